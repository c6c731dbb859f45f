"""Compare the numba kernels against the pure-numpy fallback.

Times the hot kernels on real layer shapes plus one full
forward/backward/step iteration of the optimization loop, for each
backend. Run from the repo root:

    python benchmarks/bench_backends.py [--iters 5] [--size 128x160]
"""

import argparse
import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

import dfr
from dfr import backend
from dfr.losses import LossWeights, gram, total_loss
from dfr.vgg import LayerSelection, backward_to_image, extract_features

from helpers import make_weights

# (channels_in, channels_out, h, w) of representative trunk layers at 400x512
LAYER_SHAPES = {
    "conv1_2 (64->64, 400x512)": (64, 64, 400, 512),
    "conv3_2 (256->256, 100x128)": (256, 256, 100, 128),
    "conv5_1 (512->512, 25x32)": (512, 512, 25, 32),
}


def timed(fn, iters):
    fn()  # warm (jit compile, page in)
    start = time.perf_counter()
    for _ in range(iters):
        fn()
    return (time.perf_counter() - start) / iters


def bench_kernels(iters):
    rng = np.random.default_rng(0)
    rows = []
    for label, (c, oc, h, w) in LAYER_SHAPES.items():
        x = rng.standard_normal((1, c, h, w)).astype(np.float32)
        k = rng.standard_normal((oc, c, 3, 3)).astype(np.float32)
        b = np.zeros(oc, np.float32)
        flops = 2 * oc * c * 9 * h * w
        cells = {}
        for name in backend.available():
            backend.use(name)
            dt = timed(lambda: dfr.conv2d_forward(x, k, b), iters)
            cells[name] = (dt, flops / dt / 1e9)
        rows.append((f"conv {label}", cells))

    for label, (c, h, w) in {
        "maxpool (64ch, 400x512)": (64, 400, 512),
        "maxpool (512ch, 50x64)": (512, 50, 64),
    }.items():
        pool_in = rng.standard_normal((1, c, h, w)).astype(np.float32)
        cells = {}
        for name in backend.available():
            backend.use(name)
            dt = timed(lambda: dfr.maxpool2x2_forward(pool_in), iters)
            cells[name] = (dt, pool_in.size / dt / 1e9)
        rows.append((label, cells))
    return rows


def bench_iteration(iters, height, width):
    weights = make_weights(seed=0, gains=1.0)
    sel = LayerSelection()
    rng = np.random.default_rng(1)
    x = rng.standard_normal((1, 3, height, width)).astype(np.float32)
    target = extract_features(x, weights, [sel.content_layer])
    grams = {
        n: gram(f)
        for n, f in extract_features(x, weights, sel.style_layers).features.items()
    }
    lw = LossWeights()

    def one_iteration():
        feats = extract_features(x, weights, sel.all_layers())
        _, grads = total_loss(feats, target, grams, lw, sel)
        backward_to_image(grads, feats.tape)

    rows = {}
    for name in backend.available():
        backend.use(name)
        rows[name] = timed(one_iteration, iters)
    return rows


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--iters", type=int, default=5)
    parser.add_argument("--size", default="128x160", help="WxH for the loop benchmark")
    args = parser.parse_args(argv)
    width, height = (int(v) for v in args.size.split("x"))

    names = backend.available()
    print(f"backends: {', '.join(names)}   (median of {args.iters} runs after warmup)\n")
    header = f"{'kernel':40s}" + "".join(f"{n:>22s}" for n in names)
    print(header)
    print("-" * len(header))
    for label, cells in bench_kernels(args.iters):
        line = f"{label:40s}"
        for n in names:
            dt, rate = cells[n]
            line += f"{dt * 1e3:10.2f} ms {rate:6.1f} G/s"
        print(line)

    print(f"\nfull optimize iteration at {width}x{height} (forward+loss+backward):")
    for name, dt in bench_iteration(args.iters, height, width).items():
        print(f"  {name:8s} {dt * 1e3:9.1f} ms/iteration")


if __name__ == "__main__":
    main()
