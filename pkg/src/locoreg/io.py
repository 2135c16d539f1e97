"""On-disk formats: kernel collections, PGM images, feature-map matrices.

The kernel collection format is a small JSON document:

    {
      "format": "kernelset-v1",
      "model": "<name>",
      "dataset": "<optional name>",
      "layers": [
        {"name": "conv1", "depth": 0,
         "shape": [kh, kw, c_in, c_out],
         "weights": [<kh*kw*c_in*c_out floats, C order>]}
      ]
    }

Weights flatten in C order of (kh, kw, c_in, c_out), i.e. entry
((i*kw + j)*c_in + c)*c_out + f.  Floats are written with Python's repr,
which is the shortest string that round-trips, so write/read is lossless
at double precision, and the writer emits canonical bytes (fixed key
order, fixed indentation) for identical inputs.  NaN and infinities are
rejected in both directions.
"""

import json

import numpy as np

from locoreg.localization import FeatureMap2D
from locoreg.stats import KernelLayer, KernelSet

FORMAT_TAG = "kernelset-v1"


class FormatError(ValueError):
    """Structured input that does not match its documented format."""


def _reject_constant(name):
    raise FormatError(f"non-finite value {name!r} in kernel file")


def read_kernelset(path) -> KernelSet:
    """Parse a kernelset-v1 file into an in-memory KernelSet."""
    with open(path, "rb") as f:
        try:
            doc = json.load(f, parse_constant=_reject_constant)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise FormatError(f"{path}: expected a JSON object at top level")
    tag = doc.get("format")
    if tag != FORMAT_TAG:
        raise FormatError(f"{path}: format tag {tag!r}, expected {FORMAT_TAG!r}")
    model = doc.get("model")
    if not isinstance(model, str) or not model:
        raise FormatError(f"{path}: missing or empty model name")
    dataset = doc.get("dataset")
    if dataset is not None and not isinstance(dataset, str):
        raise FormatError(f"{path}: dataset must be a string when present")
    layers_doc = doc.get("layers")
    if not isinstance(layers_doc, list) or not layers_doc:
        raise FormatError(f"{path}: needs a non-empty layers list")

    layers = []
    for pos, entry in enumerate(layers_doc):
        where = f"{path}: layer {pos}"
        if not isinstance(entry, dict):
            raise FormatError(f"{where}: expected an object")
        name = entry.get("name")
        depth = entry.get("depth")
        shape = entry.get("shape")
        weights = entry.get("weights")
        if not isinstance(name, str) or not name:
            raise FormatError(f"{where}: missing layer name")
        if not isinstance(depth, int) or isinstance(depth, bool):
            raise FormatError(f"{where}: depth must be an integer")
        if (
            not isinstance(shape, list)
            or len(shape) != 4
            or not all(isinstance(d, int) and not isinstance(d, bool) and d > 0 for d in shape)
        ):
            raise FormatError(f"{where}: shape must be 4 positive integers [kh, kw, c_in, c_out]")
        if not isinstance(weights, list):
            raise FormatError(f"{where}: weights must be a flat list")
        count = shape[0] * shape[1] * shape[2] * shape[3]
        if len(weights) != count:
            raise FormatError(
                f"{where}: weight count {len(weights)} does not match shape "
                f"{shape} (expected {count})"
            )
        try:
            arr = np.array(weights, dtype=float).reshape(shape)
        except (TypeError, ValueError) as exc:
            raise FormatError(f"{where}: non-numeric weight: {exc}") from exc
        if not np.all(np.isfinite(arr)):
            raise FormatError(f"{where}: non-finite weights")
        try:
            layers.append(KernelLayer(name, depth, arr))
        except ValueError as exc:
            raise FormatError(f"{where}: {exc}") from exc
    try:
        return KernelSet(model, layers, dataset)
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc


def write_kernelset(kset: KernelSet, path):
    """Serialize canonically; identical sets produce identical bytes."""
    if not kset.layers:
        raise ValueError("refusing to write a kernel set with no layers")
    doc = {"format": FORMAT_TAG, "model": kset.model}
    if kset.dataset is not None:
        doc["dataset"] = kset.dataset
    doc["layers"] = [
        {
            "name": layer.name,
            "depth": layer.depth,
            "shape": list(layer.weights.shape),
            "weights": [float(x) for x in layer.weights.ravel(order="C")],
        }
        for layer in kset.layers
    ]
    with open(path, "w", encoding="ascii") as f:
        json.dump(doc, f, indent=1, allow_nan=False)
        f.write("\n")


def emit_pgm(matrix, path, normalize: bool = True):
    """Write a 2-D array as a binary (P5) PGM with maxval 255.

    With normalize, values are min-max scaled to 0..255 and a constant
    matrix maps to mid-gray 128; without, values are rounded and clipped.
    """
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.size == 0:
        raise ValueError(f"need a non-empty 2-D matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix contains non-finite values")
    if normalize:
        lo, hi = float(m.min()), float(m.max())
        if hi - lo < 1e-300:
            px = np.full(m.shape, 128.0)
        else:
            px = np.rint((m - lo) / (hi - lo) * 255.0)
    else:
        px = np.clip(np.rint(m), 0.0, 255.0)
    rows, cols = m.shape
    header = f"P5\n{cols} {rows}\n255\n".encode("ascii")
    with open(path, "wb") as f:
        f.write(header + px.astype(np.uint8).tobytes())


def _pgm_header_tokens(data, path):
    """First three whitespace-separated header tokens after the magic,
    honoring # comments; returns (tokens, raster_offset)."""
    i = 2  # past "P5"
    tokens = []
    n = len(data)
    while len(tokens) < 3:
        while i < n and data[i : i + 1].isspace():
            i += 1
        if i < n and data[i : i + 1] == b"#":
            while i < n and data[i : i + 1] not in (b"\n", b"\r"):
                i += 1
            continue
        start = i
        while i < n and not data[i : i + 1].isspace():
            i += 1
        if start == i:
            raise FormatError(f"{path}: truncated PGM header")
        tokens.append(data[start:i])
    if i >= n:
        raise FormatError(f"{path}: missing raster data")
    return tokens, i + 1  # single whitespace byte separates maxval and raster


def read_map_pgm(path) -> FeatureMap2D:
    """Read a binary PGM as a feature map with values scaled to 0..1."""
    with open(path, "rb") as f:
        data = f.read()
    if data[:2] != b"P5":
        raise FormatError(f"{path}: not a binary PGM (magic {data[:2]!r})")
    tokens, offset = _pgm_header_tokens(data, path)
    try:
        cols, rows, maxval = (int(t) for t in tokens)
    except ValueError as exc:
        raise FormatError(f"{path}: non-numeric PGM header field") from exc
    if cols < 1 or rows < 1:
        raise FormatError(f"{path}: bad PGM dimensions {cols}x{rows}")
    if not (0 < maxval < 256):
        raise FormatError(f"{path}: unsupported PGM maxval {maxval}")
    raster = data[offset : offset + rows * cols]
    if len(raster) != rows * cols:
        raise FormatError(
            f"{path}: raster holds {len(raster)} bytes, expected {rows * cols}"
        )
    values = np.frombuffer(raster, dtype=np.uint8).reshape(rows, cols) / float(maxval)
    return FeatureMap2D(values)


def read_map_csv(path) -> FeatureMap2D:
    """Read a plain-text comma-separated matrix of non-negative reals."""
    rows = []
    with open(path, encoding="ascii") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rows.append([float(cell) for cell in line.split(",")])
            except ValueError as exc:
                raise FormatError(f"{path}: line {lineno}: {exc}") from exc
    if not rows:
        raise FormatError(f"{path}: empty map")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise FormatError(f"{path}: ragged rows (widths {sorted(widths)})")
    try:
        return FeatureMap2D(np.array(rows, dtype=float))
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc
