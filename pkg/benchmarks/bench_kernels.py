"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from diagnet import _kernels_py

try:
    from diagnet import _kernels
except ImportError:
    _kernels = None


def cases(rng):
    X = rng.normal(size=(600, 16))
    D = _kernels_py.cosine_distance_matrix(X, X)
    allowed = ~np.eye(600, dtype=bool)
    H = rng.normal(size=(600, 32))
    src, dst = rng.integers(0, 600, 5000), rng.integers(0, 600, 5000)
    phi = rng.choice([-1.0, 1.0], 5000)
    Xa = np.hstack([rng.normal(size=(200, 2)), np.ones((200, 1))])
    y = np.where(rng.random(200) < 0.5, 1.0, -1.0)
    order = rng.integers(0, 200, 200 * 200)
    return {
        "cosine_distance_matrix 600x600x16": ("cosine_distance_matrix", (X, X)),
        "euclidean_distance_matrix 600x600x16": ("euclidean_distance_matrix", (X, X)),
        "knn_select 600 rows, k=4": ("knn_select", (D, allowed, 4)),
        "signed_graph_loss 5000 edges, dim 32": ("signed_graph_loss", (H, src, dst, phi, 1.0)),
        "pegasos_train 40000 steps": ("pegasos_train", (Xa, y, 1e-2, order)),
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    rng = np.random.default_rng(0)
    print(f"{'kernel':42s} {'python ms':>10s} {'cython ms':>10s} {'speedup':>8s}")
    for label, (name, fargs) in cases(rng).items():
        py = min(timeit.repeat(lambda: getattr(_kernels_py, name)(*fargs), number=1, repeat=args.repeat))
        if _kernels is None:
            print(f"{label:42s} {1e3 * py:10.2f} {'n/a':>10s} {'':>8s}")
            continue
        cy = min(timeit.repeat(lambda: getattr(_kernels, name)(*fargs), number=1, repeat=args.repeat))
        print(f"{label:42s} {1e3 * py:10.2f} {1e3 * cy:10.2f} {py / cy:7.1f}x")


if __name__ == "__main__":
    main()
