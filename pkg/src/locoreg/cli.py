"""Command-line front end: verification, analysis, localization, training.

Exit codes: 0 success, 1 usage error, 2 malformed input, 3 verification
failure.  Every subcommand is deterministic given its flags; randomized
ones expose --seed with a fixed default.  Numeric output uses repr
floats, so machine-readable listings parse back losslessly.
"""

import argparse
import sys
from pathlib import Path

import numpy as np

from locoreg import io
from locoreg.cohesion import DOMINANCE_CASES, critical_epsilon, verify_center_dominance
from locoreg.localization import locate_features
from locoreg.noise import (
    NoiseSpec,
    WINDOW_MODES,
    default_profile,
    optimal_window,
    simulate_gap_variance,
    worst_case_gap,
)
from locoreg.stats import (
    CENTER_CLASS,
    DIAG_CLASS,
    NEAR_CLASS,
    aggregate_profile,
    derive_schedule,
    format_schedule,
    parse_schedule,
)
from locoreg.tinycnn import (
    Dataset,
    TinyNetConfig,
    TrainConfig,
    layer_factors,
    make_shapes,
    train,
)

DEFAULT_SEED = 0
SUBSET_NAMES = {"all": "all", "lower": "lower_half", "upper": "upper_half"}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad flags; remap to the documented usage code 1
    def error(self, message):
        raise _UsageError(f"{self.prog}: {message}")


def _verify_theorem_1(eps: float) -> int:
    report = verify_center_dominance(eps)
    print(
        f"center dominance at eps={eps!r}: "
        f"{len(report.violations)} violations / {report.vertices_checked} vertices"
    )
    print("case,critical_eps")
    for case in DOMINANCE_CASES:
        print(f"{case},{critical_epsilon(case)!r}")
    if report.violations:
        print("violating vertices (mass grid row-major):")
        for v in report.violations[:8]:
            print(f"  {v.kind}: cells {v.first} vs {v.second} gap {v.gap!r} masses {v.masses}")
        if len(report.violations) > 8:
            print(f"  ... and {len(report.violations) - 8} more")
        return 3
    return 0


def _verify_theorem_2(trials: int, seed: int) -> int:
    profile = default_profile()
    s = 1.0
    k = 1
    x = 2 * k + 1  # smallest disjoint offset
    noise = NoiseSpec(s, seed)
    print(f"gap variance at disjoint offset x={x} (s={s!r}, trials={trials}, seed={seed})")
    print("window,sum_w2,predicted_var,empirical_var,z")
    failed = False
    for mode in WINDOW_MODES:
        window = optimal_window(mode, k)
        sum_w2 = float(np.sum(np.asarray(window.weights) ** 2))
        predicted = s * s * sum_w2
        _, var = simulate_gap_variance(profile, window, noise, x, trials)
        se = predicted * float(np.sqrt(2.0 / (trials - 1)))
        z = float((var - predicted) / se)
        print(f"{mode},{sum_w2!r},{predicted!r},{var!r},{z!r}")
        if abs(z) > 4.0:
            failed = True
    gap_exp = worst_case_gap(profile, optimal_window("expectation", k))
    gap_var = worst_case_gap(profile, optimal_window("variance", k))
    order = "holds" if gap_exp > gap_var else "VIOLATED"
    print(f"worst-case expectation gap: expectation-window {gap_exp!r} vs variance-window {gap_var!r} ({order})")
    if gap_exp <= gap_var:
        failed = True
    return 3 if failed else 0


def cmd_verify(args) -> int:
    if args.theorem == 1:
        return _verify_theorem_1(args.eps)
    return _verify_theorem_2(args.trials, args.seed)


def cmd_analyze(args) -> int:
    kset = io.read_kernelset(args.file)
    subset = SUBSET_NAMES[args.subset]
    use_abs = not args.signed
    rows = [
        aggregate_profile(kset, CENTER_CLASS, NEAR_CLASS, subset, use_abs),
        aggregate_profile(kset, NEAR_CLASS, DIAG_CLASS, subset, use_abs),
    ]
    print("comparison,subset,m,n,t,p,stars")
    for row in rows:
        print(f"{row.comparison},{row.subset},{row.m!r},{row.n},{row.t!r},{row.p!r},{row.stars}")
    return 0


def cmd_schedule(args) -> int:
    models = [io.read_kernelset(path) for path in args.files]
    entries = derive_schedule(models, c=args.c)
    sys.stdout.write(format_schedule(entries))
    return 0


def cmd_locate(args) -> int:
    with open(args.map, "rb") as f:
        magic = f.read(2)
    fmap = io.read_map_pgm(args.map) if magic == b"P5" else io.read_map_csv(args.map)
    placements = locate_features(
        fmap, k=args.k, n=args.n, strategy=args.strategy, overlap_allowed=args.overlap
    )
    print("center_row,center_col,score,strategy")
    for p in placements:
        print(f"{p.center[0]},{p.center[1]},{p.score!r},{p.strategy}")
    return 0


def _load_dataset(spec: str, train_size: int, test_size: int, seed: int) -> Dataset:
    if spec == "synthetic":
        return make_shapes(train_size, test_size, seed=seed)
    path = Path(spec)
    try:
        with np.load(path) as z:
            missing = {"x_train", "y_train", "x_test", "y_test"} - set(z.files)
            if missing:
                raise io.FormatError(f"{path}: dataset missing arrays {sorted(missing)}")
            x_train, y_train = z["x_train"], z["y_train"].astype(int)
            x_test, y_test = z["x_test"], z["y_test"].astype(int)
    except (OSError, ValueError) as exc:
        raise io.FormatError(f"{path}: cannot load dataset: {exc}") from exc
    if x_train.ndim == 3:
        x_train = x_train[..., None]
        x_test = x_test[..., None]
    try:
        return Dataset(
            np.asarray(x_train, float), y_train, np.asarray(x_test, float), y_test, name=path.stem
        )
    except ValueError as exc:
        raise io.FormatError(f"{path}: {exc}") from exc


def cmd_train_demo(args) -> int:
    data = _load_dataset(args.data, args.train_size, args.test_size, args.seed)
    hw, channels = data.x_train.shape[1], data.x_train.shape[3]
    if data.x_train.shape[2] != hw:
        raise io.FormatError(f"non-square images {data.x_train.shape[1:3]} unsupported")
    n_classes = int(max(data.y_train.max(), data.y_test.max())) + 1
    cfg = TinyNetConfig(
        input_hw=hw, in_channels=channels, n_classes=max(n_classes, 2), seed=args.seed
    )

    if args.reg == "loco" and args.schedule:
        try:
            entries = parse_schedule(Path(args.schedule).read_text(encoding="ascii"))
        except (OSError, ValueError) as exc:
            raise io.FormatError(f"{args.schedule}: {exc}") from exc
        factors = tuple((e.gamma, e.eta) for e in entries)
    else:
        factors = ((0.7, 0.77),)  # moderate center-up, corner-down weighting
    tcfg = TrainConfig(
        lr=args.lr,
        lr_decay=0.5,
        decay_epochs=tuple(range(1, args.epochs)),
        batch_size=args.batch_size,
        epochs=args.epochs,
        lam=args.lam,
        reg_mode=args.reg,
        loco_factors=factors if args.reg == "loco" else (),
    )
    try:
        layer_factors(tcfg, len(cfg.conv_channels))
    except ValueError as exc:
        raise io.FormatError(str(exc)) from exc

    report = train(cfg, tcfg, data)
    print(f"reg={args.reg} lambda={args.lam!r} epochs={args.epochs} seed={args.seed}")
    print("epoch,loss,data_loss,reg_loss,test_error")
    for e, (total, dl, rl, err) in enumerate(
        zip(report.train_losses, report.data_losses, report.reg_losses, report.test_errors),
        start=1,
    ):
        print(f"{e},{total!r},{dl!r},{rl!r},{err!r}")
    print(f"final test error: {report.test_errors[-1]!r}")
    out = Path(args.out)
    io.write_kernelset(report.kernels, out)
    print(f"kernels written: {out}")
    return 0


def cmd_emit_filters(args) -> int:
    kset = io.read_kernelset(args.file)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    count = 0
    for layer in kset.layers:
        stack = layer.kernel_stack()
        safe = layer.name.replace("/", "_").replace("\\", "_")
        for i in range(stack.shape[0]):
            io.emit_pgm(stack[i], out / f"{safe}_{i:04d}.pgm")
            count += 1
    print(f"wrote {count} filter images to {out}")
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="locoreg", description=__doc__)
    sub = parser.add_subparsers(dest="command", metavar="command")

    p = sub.add_parser("verify", help="check the closed-form guarantees by enumeration/simulation")
    p.add_argument("--theorem", type=int, choices=(1, 2), required=True)
    p.add_argument("--eps", type=float, default=0.6, help="box half-width for theorem 1")
    p.add_argument("--trials", type=int, default=100_000, help="Monte Carlo trials for theorem 2")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("analyze", help="locality statistics of a kernel collection")
    p.add_argument("file")
    p.add_argument("--subset", choices=tuple(SUBSET_NAMES), default="all")
    p.add_argument("--signed", action="store_true", help="use raw weights instead of magnitudes")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("schedule", help="derive per-layer (gamma, eta) from kernel collections")
    p.add_argument("files", nargs="+")
    p.add_argument("--c", type=float, default=1.5, help="modulation strength")
    p.set_defaults(func=cmd_schedule)

    p = sub.add_parser("locate", help="place feature windows on a 2-D map")
    p.add_argument("--map", required=True, help="CSV matrix or binary PGM")
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--strategy", choices=("cohesion", "sum"), default="cohesion")
    p.add_argument("--overlap", action="store_true", help="allow overlapping windows")
    p.set_defaults(func=cmd_locate)

    p = sub.add_parser("train-demo", help="desk-scale training comparison run")
    p.add_argument("--reg", choices=("uniform", "loco"), default="uniform")
    p.add_argument("--schedule", help="per-layer factors file (see the schedule subcommand)")
    p.add_argument("--lambda", dest="lam", type=float, default=5e-4)
    p.add_argument("--epochs", type=int, default=5)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--data", default="synthetic", help="'synthetic' or an .npz path")
    p.add_argument("--train-size", type=int, default=2000, help="synthetic data only")
    p.add_argument("--test-size", type=int, default=500, help="synthetic data only")
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--lr", type=float, default=0.05)
    p.add_argument("--out", default="tinycnn-kernels.json", help="kernel collection output path")
    p.set_defaults(func=cmd_train_demo)

    p = sub.add_parser("emit-filters", help="write every kernel as a PGM image")
    p.add_argument("file")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_emit_filters)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    if getattr(args, "func", None) is None:
        parser.print_usage(sys.stderr)
        return 1
    try:
        return args.func(args)
    except io.FormatError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except FloatingPointError as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
