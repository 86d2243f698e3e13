"""Sparse symmetric graph algebra.

Adjacency matrices are ``scipy.sparse.csr_matrix`` objects in canonical form:
symmetric, non-negative, no stored zeros, sorted indices. Node signals are
plain ``(N, C)`` float64 arrays (1-d arrays are accepted and treated as one
channel).
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp

from .errors import OracleTooLargeError, ShapeError, SpectralEstimateError

ORACLE_MAX_NODES = 512
EXACT_LAMBDA_MAX_NODES = 512
DENSE_MAX_NODES = 4096
DENSE_FILL = 0.1


def canonical(W):
    """Return ``W`` as a canonical float64 CSR matrix.

    Explicit zeros are dropped, duplicates summed and indices sorted, so two
    matrices holding the same values are bitwise identical however they were
    assembled.
    """
    W = sp.csr_matrix(W, dtype=np.float64, copy=True)
    W.sum_duplicates()
    W.eliminate_zeros()
    W.sort_indices()
    return W


def from_edges(n, rows, cols, weights):
    """Build a symmetric adjacency from one entry per unordered pair."""
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    weights = np.asarray(weights, dtype=np.float64)
    if np.any(weights < 0):
        raise ValueError("negative edge weight")
    if np.any(rows == cols):
        raise ValueError("self loops are not allowed")
    r = np.concatenate([rows, cols])
    c = np.concatenate([cols, rows])
    w = np.concatenate([weights, weights])
    return canonical(sp.coo_matrix((w, (r, c)), shape=(n, n)))


def to_edges(W):
    """Upper-triangle edge list ``(rows, cols, weights)`` sorted by (row, col)."""
    U = sp.triu(W, k=1).tocoo()
    order = np.lexsort((U.col, U.row))
    return U.row[order], U.col[order], U.data[order]


def check_adjacency(W, atol=0.0):
    """Raise ``ValueError`` unless ``W`` is a valid undirected weighted graph."""
    if W.shape[0] != W.shape[1]:
        raise ShapeError(f"adjacency must be square, got {W.shape}")
    if W.nnz and W.data.min() < 0:
        raise ValueError("adjacency has negative weights")
    asym = abs(W - W.T)
    if asym.nnz and asym.max() > atol:
        raise ValueError("adjacency is not symmetric")


def density(W):
    """Fraction of the n(n-1)/2 possible node pairs that carry an edge."""
    n = W.shape[0]
    if n < 2:
        return 0.0
    n_edges = (W.nnz - W.diagonal().astype(bool).sum()) / 2
    return n_edges / (n * (n - 1) / 2)


def degree_vector(W):
    return np.asarray(W.sum(axis=1)).ravel()


def normalized_laplacian(W):
    """``I - D^{-1/2} W D^{-1/2}``; isolated nodes get an identity row."""
    d = degree_vector(W)
    inv_sqrt = np.zeros_like(d)
    nz = d > 0
    inv_sqrt[nz] = 1.0 / np.sqrt(d[nz])
    A = W.tocoo()
    # scale by (d_i^-1/2 * d_j^-1/2) as one factor so (i, j) and (j, i) round identically
    vals = A.data * (inv_sqrt[A.row] * inv_sqrt[A.col])
    n = W.shape[0]
    rows = np.concatenate([A.row, np.arange(n)])
    cols = np.concatenate([A.col, np.arange(n)])
    data = np.concatenate([-vals, np.ones(n)])
    return canonical(sp.coo_matrix((data, (rows, cols)), shape=(n, n)))


def _power_iteration(L, max_iter=1000, tol=1e-6, seed=0):
    n = L.shape[0]
    v = np.random.default_rng(seed).standard_normal(n)
    v /= np.linalg.norm(v)
    rq = 0.0
    for _ in range(max_iter):
        w = L @ v
        rq_new = float(v @ w)
        norm = np.linalg.norm(w)
        if norm == 0.0:
            return 0.0
        v = w / norm
        if abs(rq_new - rq) <= tol * max(abs(rq_new), 1e-300):
            # Rayleigh quotient approaches from below; one more product tightens it
            return float(v @ (L @ v))
        rq = rq_new
    raise SpectralEstimateError(f"power iteration did not converge in {max_iter} iterations")


def estimate_lambda_max(L, method="auto", max_iter=1000, tol=1e-6):
    """Largest eigenvalue of a symmetric PSD operator.

    ``method="auto"`` uses a dense eigensolver up to 512 nodes and power
    iteration beyond. Raises :class:`SpectralEstimateError` when power
    iteration runs out of iterations.
    """
    n = L.shape[0]
    if method == "auto":
        method = "exact" if n <= EXACT_LAMBDA_MAX_NODES else "power"
    if method == "exact":
        return float(np.linalg.eigvalsh(L.toarray())[-1])
    if method == "power":
        return _power_iteration(L, max_iter=max_iter, tol=tol)
    raise ValueError(f"unknown method {method!r}")


@dataclass(frozen=True)
class SpectralOperator:
    """Normalized Laplacian, its largest eigenvalue and ``2 L / lambda_max - I``.

    ``dense`` optionally holds the rescaled operator as an array; products
    then go through BLAS, which is much faster on dense population graphs.
    """

    laplacian: sp.csr_matrix
    lambda_max: float
    scaled_laplacian: sp.csr_matrix
    dense: Optional[np.ndarray] = None

    @property
    def n(self):
        return self.laplacian.shape[0]

    def apply(self, x):
        if self.dense is not None:
            return self.dense @ x
        return self.scaled_laplacian @ x


def spectral_operator(W, lambda_max=None, dense=None):
    """Build the :class:`SpectralOperator` of adjacency ``W``.

    ``dense=None`` picks dense products when more than a tenth of the
    operator is non-zero and the graph has at most 4096 nodes.
    """
    L = normalized_laplacian(W)
    if lambda_max is None:
        try:
            lambda_max = estimate_lambda_max(L)
        except SpectralEstimateError:
            lambda_max = 2.0
    if lambda_max <= 0:
        # only the empty graph has no positive spectrum, and there L = I
        lambda_max = 1.0
    n = L.shape[0]
    L_scaled = canonical((2.0 / lambda_max) * L - sp.identity(n, format="csr"))
    if dense is None:
        dense = n <= DENSE_MAX_NODES and L_scaled.nnz > DENSE_FILL * n * n
    return SpectralOperator(L, float(lambda_max), L_scaled, L_scaled.toarray() if dense else None)


@dataclass(frozen=True)
class EigenSystem:
    eigvals: np.ndarray
    eigvecs: np.ndarray


def eigensystem(L, max_nodes=ORACLE_MAX_NODES):
    n = L.shape[0]
    if n > max_nodes:
        raise OracleTooLargeError(f"dense eigendecomposition capped at {max_nodes} nodes, got {n}")
    vals, vecs = np.linalg.eigh(L.toarray())
    return EigenSystem(vals, vecs)


def _as_signal(x, n):
    x = np.asarray(x, dtype=np.float64)
    if x.shape[0] != n:
        raise ShapeError(f"signal has {x.shape[0]} rows, graph has {n} nodes")
    return x


def gft(x, eig):
    return eig.eigvecs.T @ _as_signal(x, eig.eigvecs.shape[0])


def igft(x_hat, eig):
    return eig.eigvecs @ _as_signal(x_hat, eig.eigvecs.shape[0])


def spectral_filter_dense(x, eig, coeffs, lambda_max, max_nodes=ORACLE_MAX_NODES):
    """Dense spectral filter ``U g(Lambda) U^T x``.

    ``coeffs`` are Chebyshev coefficients on the rescaled spectrum
    ``2 Lambda / lambda_max - 1``. Used as the reference for
    :func:`chebyshev_apply`.
    """
    n = eig.eigvecs.shape[0]
    if n > max_nodes:
        raise OracleTooLargeError(f"dense filter capped at {max_nodes} nodes, got {n}")
    mu = 2.0 * eig.eigvals / lambda_max - 1.0
    response = np.polynomial.chebyshev.chebval(mu, np.asarray(coeffs, dtype=np.float64))
    x_hat = gft(x, eig)
    if x_hat.ndim == 1:
        return igft(response * x_hat, eig)
    return igft(response[:, None] * x_hat, eig)


def chebyshev_apply(x, op, K):
    """``[T_0(L~) x, ..., T_K(L~) x]`` by the three-term recursion."""
    if K < 0:
        raise ValueError("K must be non-negative")
    x = _as_signal(x, op.n)
    terms = [x]
    if K >= 1:
        terms.append(op.apply(x))
    for _ in range(2, K + 1):
        terms.append(2.0 * op.apply(terms[-1]) - terms[-2])
    return terms


def hop_distances(W, source):
    """Unweighted shortest-path distance from ``source``; -1 when unreachable."""
    from scipy.sparse.csgraph import breadth_first_order

    n = W.shape[0]
    dist = np.full(n, -1, dtype=np.int64)
    order, pred = breadth_first_order(W, source, directed=False, return_predecessors=True)
    dist[source] = 0
    for v in order[1:]:
        dist[v] = dist[pred[v]] + 1
    return dist
