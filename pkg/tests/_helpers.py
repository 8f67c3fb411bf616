"""Random truncated Laplacians used by several test modules."""

import numpy as np

from cylgraph import eigen, graph, netgen
from cylgraph import manifold as mf


def random_laplacian(seed, max_dim=300):
    """Truncated Laplacian on a random vertex cloud with random measures.

    The cloud lives on a flat cylinder; ``t`` is drawn so that ``X_t`` has
    between 20 and ``max_dim`` vertices.
    """
    rng = np.random.default_rng(seed)
    m = mf.flat_cylinder2(1.0, 1.0)
    count = int(rng.integers(60, 2 * max_dim))
    pts = netgen.random_points(m, count, rng)
    mu = rng.uniform(0.5, 1.5, count) / count
    bd = mf.boundary_distance(m, pts)
    # choose t so that at most max_dim vertices are kept
    order = np.sort(bd)[::-1]
    keep = int(rng.integers(20, min(max_dim, count - 5) + 1))
    t = 0.5 * (order[keep - 1] + order[keep])
    net = netgen.from_vertices(m, pts, mu, t=t, eps=0.05)
    rho = float(rng.uniform(0.12, 0.25))
    g = graph.build_graph(net, rho, check=False)
    return graph.assemble_truncated_laplacian(g)


def random_operator(seed, max_dim=300):
    L = random_laplacian(seed, max_dim)
    return L, eigen.symmetrize(L)
