"""Compare the compiled and numpy convolution kernels.

Runs forward, input-gradient and weight-gradient kernels for a few layer
shapes and reports the best-of-N wall time for each backend, plus one full
training step of the desk model.  Usage::

    python3 benchmarks/bench_kernels.py [--repeat 5] [--json out.json]
"""
import argparse
import importlib
import json
import sys
import timeit

import numpy as np

from ecgdenoise import _kernels_py

try:
    _kernels_c = importlib.import_module("ecgdenoise._kernels")
except ImportError:
    _kernels_c = None

# (batch, in channels, out channels, kernel, length)
SHAPES = [
    (8, 2, 8, 8, 1024),
    (8, 8, 16, 8, 1024),
    (8, 16, 32, 8, 1024),
    (8, 32, 16, 8, 1024),
    (1, 2, 8, 8, 5000),
    (4, 64, 128, 16, 1024),
]


def _bench(fn, repeat):
    fn()  # warm up
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def bench_shape(mod, shape, repeat, rng):
    b, cin, cout, k, n = shape
    left = (k - 1) // 2
    x = rng.standard_normal((b, cin, n))
    w = rng.standard_normal((cout, cin, k))
    bias = rng.standard_normal(cout)
    dy = rng.standard_normal((b, cout, n))
    return {
        "forward": _bench(lambda: mod.conv1d_forward(x, w, bias, left), repeat),
        "backward_input": _bench(lambda: mod.conv1d_backward_input(dy, w, left), repeat),
        "backward_weight": _bench(lambda: mod.conv1d_backward_weight(dy, x, k, left), repeat),
    }


def bench_train_step(backend_mod, repeat):
    """One gradient evaluation of the desk model with the kernels swapped in."""
    from ecgdenoise import kernels
    from ecgdenoise.autoencoder import AutoencoderConfig, compute_gradients, init_weights

    cfg = AutoencoderConfig.desk()
    w = init_weights(cfg, 0)
    rng = np.random.default_rng(1)
    x = rng.standard_normal((8, 2, 1024))
    t = rng.standard_normal((8, 2, 1024))
    names = ("conv1d_forward", "conv1d_backward_input", "conv1d_backward_weight")
    old = {name: getattr(kernels, name) for name in names}
    try:
        for name in names:
            setattr(kernels, name, getattr(backend_mod, name))
        return _bench(lambda: compute_gradients(w, cfg, x, t), repeat)
    finally:
        for name, fn in old.items():
            setattr(kernels, name, fn)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", help="also write results here")
    args = ap.parse_args(argv)

    backends = {"python": _kernels_py}
    if _kernels_c is not None:
        backends["cython"] = _kernels_c
    else:
        print("compiled extension not built; timing the numpy backend only", file=sys.stderr)

    rng = np.random.default_rng(0)
    results = {"shapes": [], "train_step": {}}
    header = f"{'shape (B,Cin,Cout,K,N)':<26}{'kernel':<17}" + "".join(
        f"{name:>12}" for name in backends) + ("   speedup" if len(backends) > 1 else "")
    print(header)
    for shape in SHAPES:
        row = {"shape": shape}
        for name, mod in backends.items():
            row[name] = bench_shape(mod, shape, args.repeat, rng)
        results["shapes"].append(row)
        for kernel in ("forward", "backward_input", "backward_weight"):
            times = [row[name][kernel] for name in backends]
            line = f"{str(shape):<26}{kernel:<17}" + "".join(f"{t * 1e3:>10.2f}ms" for t in times)
            if len(times) > 1:
                line += f"{times[0] / times[1]:>9.2f}x"
            print(line)
    for name, mod in backends.items():
        results["train_step"][name] = bench_train_step(mod, args.repeat)
    print("desk model gradient step (8 x 2 x 1024): " + ", ".join(
        f"{name} {t * 1e3:.1f}ms" for name, t in results["train_step"].items()))
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(results, fh, indent=1)


if __name__ == "__main__":
    main()
