#!/usr/bin/env python3
"""Export the spatial conv kernels of a Keras zoo model to kernelset-v1 JSON.

One-shot bridge between pretrained image classifiers and the locality
analyzer: it pulls every square odd spatial convolution kernel (side >= 3)
out of a published architecture and writes them in the neutral JSON format
the analyzer reads.  The file format is the only coupling, so this script
deliberately imports nothing from the analysis package.

Usage:
    python3 export.py --model vgg16 --out vgg16.json
    python3 export.py --model mobilenet --weights none --seed 0 --out m.json

--weights imagenet (default) downloads pretrained weights; --weights none
builds the architecture with seeded random initialization, which keeps the
full pipeline runnable offline (the kernels then carry no locality signal).
Classifier heads are never instantiated (include_top=False); they hold no
spatial kernels.
"""

import argparse
import json
import os
import sys

FORMAT_TAG = "kernelset-v1"

#: friendly name -> keras.applications constructor
MODELS = {
    "vgg16": "VGG16",
    "vgg19": "VGG19",
    "resnet50": "ResNet50",
    "densenet121": "DenseNet121",
    "inception_v3": "InceptionV3",
    "xception": "Xception",
    "mobilenet": "MobileNet",
}


def build_model(name: str, weights: str, seed: int):
    """Instantiate a zoo architecture, seeded so random init is reproducible."""
    os.environ.setdefault("TF_CPP_MIN_LOG_LEVEL", "2")
    import keras

    keras.utils.set_random_seed(seed)
    ctor = getattr(keras.applications, MODELS[name])
    return ctor(weights=None if weights == "none" else weights, include_top=False)


def extract_layers(model):
    """Collect exportable spatial conv kernels from a built Keras model.

    Returns (exported, skipped): exported is a list of layer records in
    forward-graph order (depth = the layer's position in model.layers),
    skipped a list of human-readable notes for spatial layers whose window
    cannot be represented (non-square or even side).  Pointwise 1x1 kernels
    have no spatial extent to analyze and are dropped silently, as are all
    non-convolution layers.
    """
    import keras

    exported, skipped = [], []
    for depth, layer in enumerate(model.layers):
        if not isinstance(
            layer,
            (keras.layers.Conv2D, keras.layers.DepthwiseConv2D, keras.layers.SeparableConv2D),
        ):
            continue
        weights = layer.get_weights()
        if not weights:
            skipped.append(f"{layer.name}: layer has no built weights")
            continue
        # the spatial kernel is the first weight array for all three classes:
        # Conv2D (kh, kw, c_in, c_out), DepthwiseConv2D and the depthwise part
        # of SeparableConv2D (kh, kw, c_in, multiplier)
        kernel = weights[0]
        if kernel.ndim != 4:
            skipped.append(f"{layer.name}: {kernel.ndim}-D kernel")
            continue
        kh, kw = kernel.shape[:2]
        if kh == 1 and kw == 1:
            continue
        if kh != kw or kh % 2 == 0:
            skipped.append(f"{layer.name}: unsupported {kh}x{kw} window")
            continue
        exported.append(
            {
                "name": layer.name,
                "depth": depth,
                "shape": [int(d) for d in kernel.shape],
                "weights": [float(x) for x in kernel.ravel(order="C")],
            }
        )
    return exported, skipped


def write_doc(path, model_name, dataset, exported, skipped):
    """Write the kernelset-v1 document; compact JSON, repr floats, one file."""
    doc = {"format": FORMAT_TAG, "model": model_name}
    if dataset is not None:
        doc["dataset"] = dataset
    if skipped:
        doc["skipped"] = skipped
    doc["layers"] = exported
    with open(path, "w") as f:
        json.dump(doc, f, allow_nan=False, separators=(",", ":"))
        f.write("\n")


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--model", required=True, choices=sorted(MODELS))
    ap.add_argument("--out", required=True, help="output JSON path")
    ap.add_argument("--weights", choices=("imagenet", "none"), default="imagenet")
    ap.add_argument("--seed", type=int, default=0, help="init seed for --weights none")
    args = ap.parse_args(argv)

    try:
        model = build_model(args.model, args.weights, args.seed)
    except Exception as exc:
        print(f"error: could not build {args.model}: {exc}", file=sys.stderr)
        return 2

    exported, skipped = extract_layers(model)
    for note in skipped:
        print(f"warning: skipping {note}", file=sys.stderr)
    if not exported:
        print(f"error: {args.model} has no exportable spatial conv layers", file=sys.stderr)
        return 2

    dataset = "imagenet" if args.weights == "imagenet" else None
    write_doc(args.out, args.model, dataset, exported, skipped)
    tail = f" ({len(skipped)} skipped)" if skipped else ""
    print(f"wrote {len(exported)} conv layers to {args.out}{tail}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
