"""Smallest eigenpairs of the truncated Laplacian.

``-Delta_t = D^{-1} (G - W)`` is self-adjoint in the mu-weighted inner
product. The similarity ``B = D^{1/2} (-Delta_t) D^{-1/2}`` is symmetric with
the same spectrum, and eigenvectors map back through ``u = D^{-1/2} v``.

Two solvers are provided: a dense one (LAPACK ``syevd`` through numpy) that
serves as the reference, and a block Lanczos iteration with full
reorthogonalization that only needs products with ``B``.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from . import kernels
from .errors import DomainError, SolverError
from .graph import dirichlet_energy

DENSE_THRESHOLD = 2000


class SymmetricOperator:
    """Symmetric matrix stored in CSR form (diagonal included)."""

    def __init__(self, indptr, indices, data, mu=None, dense_threshold=DENSE_THRESHOLD):
        self.indptr = np.ascontiguousarray(indptr, dtype=np.int64)
        self.indices = np.ascontiguousarray(indices, dtype=np.int64)
        self.data = np.ascontiguousarray(data, dtype=np.float64)
        self.dim = len(self.indptr) - 1
        self.mu = None if mu is None else np.asarray(mu, dtype=np.float64)
        self.dense_threshold = dense_threshold
        self._norm = None

    @classmethod
    def from_dense(cls, matrix, mu=None, dense_threshold=DENSE_THRESHOLD):
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise DomainError("square matrix required")
        rows, cols = np.nonzero(matrix)
        indptr = np.zeros(matrix.shape[0] + 1, dtype=np.int64)
        np.cumsum(np.bincount(rows, minlength=matrix.shape[0]), out=indptr[1:])
        return cls(indptr, cols, matrix[rows, cols], mu=mu, dense_threshold=dense_threshold)

    def matvec(self, x):
        return kernels.csr_matvec(self.indptr, self.indices, self.data, x)

    def matmat(self, x):
        return kernels.csr_matmat(self.indptr, self.indices, self.data, x)

    def to_dense(self):
        if self.dim > self.dense_threshold:
            raise SolverError(
                f"dimension {self.dim} exceeds dense_threshold {self.dense_threshold}"
            )
        out = np.zeros((self.dim, self.dim))
        rows = np.repeat(np.arange(self.dim), np.diff(self.indptr))
        np.add.at(out, (rows, self.indices), self.data)
        return out

    def norm_estimate(self, seed=0, iterations=60):
        """Power-iteration estimate of the spectral norm (cached)."""
        if self._norm is None:
            rng = np.random.default_rng(seed)
            x = rng.standard_normal(self.dim)
            x /= np.linalg.norm(x)
            est = 0.0
            for _ in range(iterations):
                y = self.matvec(x)
                est = float(np.linalg.norm(y))
                if est == 0.0:
                    break
                x = y / est
            self._norm = est if est > 0 else 1.0
        return self._norm


def symmetrize(L, dense_threshold=DENSE_THRESHOLD):
    """Symmetric similarity transform ``B`` of a truncated Laplacian."""
    mu = L.mu
    if np.any(mu <= 0):
        raise DomainError("all measures must be positive")
    n = L.dim
    rows = np.repeat(np.arange(n), np.diff(L.indptr))
    sq = np.sqrt(mu)
    off = -L.data / (sq[rows] * sq[L.indices])
    diag_rows = np.arange(n)
    all_rows = np.concatenate([rows, diag_rows])
    all_cols = np.concatenate([L.indices, diag_rows])
    all_vals = np.concatenate([off, L.degree / mu])
    order = np.lexsort((all_cols, all_rows))
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(all_rows, minlength=n), out=indptr[1:])
    return SymmetricOperator(
        indptr, all_cols[order], all_vals[order], mu=mu, dense_threshold=dense_threshold
    )


@dataclass
class Spectrum:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    residuals: np.ndarray
    method: str
    iterations: int = 0
    tolerance: float = 0.0
    converged: bool = True
    norm_estimate: float = float("nan")
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.eigenvalues)


def _to_mu_coords(A, v):
    if A.mu is None:
        return v
    return v / np.sqrt(A.mu)[:, None]


def _residuals(A, vals, vecs):
    if vecs.shape[1] == 0:
        return np.zeros(0)
    r = A.matmat(np.ascontiguousarray(vecs)) - vecs * vals[None, :]
    return np.linalg.norm(r, axis=0)


def dense_spectrum(A, k):
    """Smallest ``k`` eigenpairs from a full dense decomposition."""
    if k < 1 or k > A.dim:
        raise DomainError(f"k must lie in [1, {A.dim}], got {k}")
    M = A.to_dense()
    try:
        vals, vecs = np.linalg.eigh(M)
    except np.linalg.LinAlgError as exc:
        raise SolverError("dense eigensolver did not converge", {"dim": A.dim}) from exc
    vals, vecs = vals[:k], vecs[:, :k]
    return Spectrum(
        eigenvalues=vals,
        eigenvectors=_to_mu_coords(A, vecs),
        residuals=_residuals(A, vals, vecs),
        method="dense",
        tolerance=0.0,
        converged=True,
        norm_estimate=float(np.max(np.abs(np.linalg.eigvalsh(M)[[0, -1]]))),
    )


def _orthonormalize_against(Q, X, passes=2):
    for _ in range(passes):
        if Q.shape[1]:
            X -= Q @ (Q.T @ X)
    return X


def _block_lanczos(A, k, X, locked, cap, thresh, breakdown, rng):
    """One block Lanczos run in the orthogonal complement of ``locked``.

    Returns the ``min(k, m)`` smallest Ritz values and vectors of the
    basis built, the number of products with ``A`` and the basis size.
    """
    n = A.dim
    free = n - locked.shape[1]
    cap = min(cap, free)
    b = X.shape[1]
    Q = np.zeros((n, cap))
    T = np.zeros((cap, cap))
    X = _orthonormalize_against(locked, X)
    X, _ = np.linalg.qr(X)
    Q[:, :b] = X
    m = b
    cur = (0, b)
    prev = None
    prev_coupling = None
    matvecs = 0
    theta = Y = W = None

    while True:
        s, w = cur
        Qj = Q[:, s : s + w]
        W = A.matmat(np.ascontiguousarray(Qj))
        matvecs += w
        Aj = Qj.T @ W
        Aj = 0.5 * (Aj + Aj.T)
        T[s : s + w, s : s + w] = Aj
        W -= Qj @ Aj
        if prev is not None:
            ps, pw = prev
            W -= Q[:, ps : ps + pw] @ prev_coupling.T
        W = _orthonormalize_against(locked, W)
        W = _orthonormalize_against(Q[:, :m], W)

        theta, Y = np.linalg.eigh(T[:m, :m])
        kk = min(k, m)
        res = np.linalg.norm(W @ Y[s : s + w, :kk], axis=0) if m < free else np.zeros(kk)
        if kk == k and np.all(res <= thresh):
            break
        width = min(w, free - m, cap - m)
        if width <= 0:
            break

        Qn, R, piv = sla.qr(W, mode="economic", pivoting=True)
        diag = np.abs(np.diag(R))
        good = int(np.sum(diag > breakdown))
        good = min(good, width)
        coupling = np.zeros((width, w))
        newcols = np.zeros((n, width))
        if good:
            Rg = np.zeros((good, w))
            Rg[:, piv] = R[:good]
            coupling[:good] = Rg
            newcols[:, :good] = Qn[:, :good]
        if good < width:
            # invariant subspace (or rank loss): continue with fresh directions
            fresh = rng.standard_normal((n, width - good))
            basis = np.hstack([locked, Q[:, :m], newcols[:, :good]])
            fresh = _orthonormalize_against(basis, fresh)
            fresh, _ = np.linalg.qr(fresh)
            fresh = _orthonormalize_against(basis, fresh)
            fresh /= np.linalg.norm(fresh, axis=0)
            newcols[:, good:] = fresh
        Q[:, m : m + width] = newcols
        T[m : m + width, s : s + w] = coupling
        T[s : s + w, m : m + width] = coupling.T
        prev, prev_coupling = cur, coupling
        cur = (m, width)
        m += width

    kk = min(k, m)
    vecs = Q[:, :m] @ Y[:, :kk]
    vecs /= np.linalg.norm(vecs, axis=0)
    return theta[:kk].copy(), vecs, matvecs, m


def lanczos_spectrum(A, k, tol=1e-9, max_iter=None, seed=0, v0=None, block_size=2):
    """Smallest ``k`` eigenpairs by block Lanczos with full reorthogonalization.

    A single Krylov run from a block of width ``b`` sees at most ``b``
    independent directions of any eigenspace.  After the first run has
    converged, further runs are started in the orthogonal complement of
    everything found so far (deflated restarts); any Ritz value they turn up
    below the current ``k``-th eigenvalue is merged in, until a restart
    finds nothing new.  Eigenvalues of any multiplicity are found this way.

    Parameters
    ----------
    A : SymmetricOperator
    k : number of eigenpairs
    tol : convergence when every wanted Ritz residual is below ``tol * ||A||``
    max_iter : cap on products with ``A`` per run (default ``10 k + 200``)
    seed : seed of the random starting blocks
    v0 : optional first starting vector
    block_size : width of the Krylov blocks
        (rank loss in the residual block is repaired by random reseeding)

    Returns
    -------
    Spectrum
        ``converged`` is False when a run reached the iteration cap first.
    """
    n = A.dim
    if k < 1 or k > n:
        raise DomainError(f"k must lie in [1, {n}], got {k}")
    if max_iter is None:
        max_iter = 10 * k + 200
    b = max(1, min(block_size, n))
    cap = min(n, max(max_iter, k + b))
    norm = A.norm_estimate(seed=seed)
    rng = np.random.default_rng(seed)
    thresh = tol * norm
    breakdown = 1e-12 * max(norm, 1e-300)

    X = rng.standard_normal((n, b))
    if v0 is not None:
        X[:, 0] = np.asarray(v0, dtype=np.float64)
    none = np.zeros((n, 0))
    vals, vecs, matvecs, m = _block_lanczos(A, k, X, none, cap, thresh, breakdown, rng)
    resid = _residuals(A, vals, vecs)
    converged = len(vals) == k and bool(np.all(resid <= thresh))
    restarts = 0

    while converged and vecs.shape[1] < n:
        # deflated restart: look for missed eigenvalues below the k-th one
        want = min(b, n - vecs.shape[1])
        X = rng.standard_normal((n, want))
        new_vals, new_vecs, mv, _ = _block_lanczos(A, want, X, vecs, cap, thresh, breakdown, rng)
        matvecs += mv
        restarts += 1
        new_res = _residuals(A, new_vals, new_vecs)
        missed = new_vals < vals[-1] - thresh
        if not np.any(missed):
            # a Ritz value is an upper bound for the smallest eigenvalue of the
            # complement only once it has converged; otherwise nothing is certain
            converged = bool(new_res[0] <= thresh) or bool(new_vals[0] >= vals[-1] - thresh)
            break
        # Rayleigh-Ritz on the union keeps the basis orthonormal
        V = np.hstack([vecs, new_vecs[:, missed]])
        V, _ = np.linalg.qr(V)
        H = V.T @ A.matmat(np.ascontiguousarray(V))
        matvecs += V.shape[1]
        th, Y = np.linalg.eigh(0.5 * (H + H.T))
        vals = th[:k]
        vecs = V @ Y[:, :k]
        vecs /= np.linalg.norm(vecs, axis=0)
        resid = _residuals(A, vals, vecs)
        converged = bool(np.all(resid <= thresh))

    return Spectrum(
        eigenvalues=vals,
        eigenvectors=_to_mu_coords(A, vecs),
        residuals=resid,
        method="lanczos",
        iterations=matvecs,
        tolerance=tol,
        converged=converged,
        norm_estimate=norm,
        meta={"basis_size": m, "block_size": b, "restarts": restarts},
    )


def compute_spectrum(A, k, solver="auto", **kwargs):
    """Dispatch to the dense solver for small operators, Lanczos otherwise."""
    if solver == "auto":
        solver = "dense" if A.dim <= A.dense_threshold else "lanczos"
    if solver == "dense":
        return dense_spectrum(A, k)
    if solver == "lanczos":
        return lanczos_spectrum(A, k, **kwargs)
    raise DomainError(f"unknown solver {solver!r}")


def rayleigh_quotient(L, u):
    """``||du||^2 / ||u||_mu^2`` computed through the edge energy.

    ``u`` may be a restricted vector (length ``|X_t|``) or a full one.
    """
    u = np.asarray(u, dtype=np.float64)
    full = L.extend(u) if len(u) == L.dim else u
    denom = float(np.dot(L.graph.net.mu * full, full))
    if denom == 0.0:
        raise DomainError("Rayleigh quotient of the zero vector")
    return dirichlet_energy(L.graph, full) / denom
