"""Compare the compiled kernels with their numpy/scipy twins.

Usage::

    python benchmarks/bench_kernels.py [--repeat 5] [--quick]

Each kernel runs on inputs of the size met in the acceptance sweeps.  The
best of ``--repeat`` wall-clock timings is reported for both backends, with
the largest absolute difference between their outputs.
"""

import argparse
import time

import numpy as np

from cylgraph import graph, kernels, netgen
from cylgraph import manifold as mf
from cylgraph import transfer as tr


def best_of(fn, repeat):
    times = []
    out = None
    for _ in range(repeat):
        start = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - start)
    return min(times), out


def max_diff(a, b):
    if isinstance(a, tuple):
        return max(max_diff(x, y) for x, y in zip(a, b))
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    if a.shape != b.shape:
        return float("inf")
    return float(np.max(np.abs(a - b))) if a.size else 0.0


def cases(quick):
    eps = 0.01 if quick else 0.005
    net = netgen.build_layered_net(mf.flat_cylinder2(1.0, 1.0), eps, 0.2)
    rho = 0.45 * np.sqrt(eps)
    periods = (1.0, 0.0)
    yield (
        f"radius_pairs  N={net.size} rho={rho:.4f}",
        lambda impl: kernels.radius_pairs(net.points, periods, rho, impl=impl),
    )

    L = graph.assemble_truncated_laplacian(graph.build_graph(net, rho))
    x = np.random.default_rng(0).standard_normal(L.dim)
    X = np.random.default_rng(1).standard_normal((L.dim, 2))
    csr = (L.indptr, L.indices, L.data)
    yield (f"csr_matvec    dim={L.dim} nnz={L.data.size}", lambda impl: kernels.csr_matvec(*csr, x, impl=impl))
    yield (f"csr_matmat    dim={L.dim} block=2", lambda impl: kernels.csr_matmat(*csr, X, impl=impl))

    small = netgen.build_layered_net(mf.flat_cylinder2(1.0, 1.0), 0.025, 0.3)
    spec = tr.GridSpec.for_net(small, 8 if quick else 16)
    f = tr.sine_bump(spec, 0.3125)
    r = 0.04
    offsets, _ = tr.ball_offsets(spec, r)
    weights = np.ones(len(offsets))
    yield (
        f"ball_correlate grid={spec.shape} stencil={len(offsets)}",
        lambda impl: kernels.ball_correlate(f.values, offsets, weights, spec.periodic, impl=impl),
    )
    yield (
        f"ball_dispersion grid={spec.shape} stencil={len(offsets)}",
        lambda impl: kernels.ball_dispersion(f.values, offsets, spec.periodic, impl=impl),
    )


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--quick", action="store_true", help="smaller inputs")
    args = parser.parse_args(argv)
    try:
        kernels.backend_module("cython")
    except ImportError:
        print("compiled extension not built; run `pip install --no-build-isolation -e .` first")
        return 1
    print(f"{'kernel':<52} {'cython s':>10} {'python s':>10} {'speedup':>8} {'max diff':>10}")
    for name, fn in cases(args.quick):
        tc, oc = best_of(lambda: fn("cython"), args.repeat)
        tp, op = best_of(lambda: fn("python"), args.repeat)
        print(f"{name:<52} {tc:10.4f} {tp:10.4f} {tp / tc:8.2f} {max_diff(oc, op):10.2e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
