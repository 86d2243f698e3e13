import numpy as np
import pytest
import scipy.sparse as sp

from popgcn.graph import from_edges


def random_graph(rng, n, p=0.3, weighted=True):
    rows, cols = np.triu_indices(n, k=1)
    keep = rng.random(rows.size) < p
    w = rng.uniform(0.1, 3.0, keep.sum()) if weighted else np.ones(keep.sum())
    return from_edges(n, rows[keep], cols[keep], w)


def path_graph(n):
    return from_edges(n, np.arange(n - 1), np.arange(1, n), np.ones(n - 1))


def grid_graph(h, w):
    idx = np.arange(h * w).reshape(h, w)
    rows = np.concatenate([idx[:, :-1].ravel(), idx[:-1, :].ravel()])
    cols = np.concatenate([idx[:, 1:].ravel(), idx[1:, :].ravel()])
    return from_edges(h * w, rows, cols, np.ones(rows.size))


def dense_laplacian(W):
    """Reference normalized Laplacian built entry by entry."""
    A = W.toarray() if sp.issparse(W) else np.asarray(W)
    n = A.shape[0]
    d = A.sum(axis=1)
    L = np.eye(n)
    for i in range(n):
        for j in range(n):
            if d[i] > 0 and d[j] > 0:
                L[i, j] -= A[i, j] / np.sqrt(d[i] * d[j])
    return L


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, echoed after the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
