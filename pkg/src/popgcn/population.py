"""Population graph construction.

Edge weights combine a pairwise sample similarity with agreement on
phenotypic measures::

    W(v, w) = sim(v, w) * sum_h rho_h(M_h(v), M_h(w))

Categorical measures agree when equal, quantitative ones when they differ by
strictly less than ``theta``. Two similarity kernels are provided: a Gaussian
kernel on correlation distance between feature vectors, and a longitudinal
kernel that multiplies same-subject pairs by ``lam``.
"""

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
import scipy.sparse as sp

from .data import as_dataset
from .errors import DegenerateFeatureError, PhenotypeError
from .graph import canonical

CATEGORICAL = "categorical"
QUANTITATIVE = "quantitative"


@dataclass(frozen=True)
class MeasureSpec:
    name: str
    kind: str
    theta: Optional[float] = None

    def __post_init__(self):
        if self.kind == QUANTITATIVE:
            if self.theta is None or not self.theta > 0:
                raise ValueError(f"quantitative measure {self.name!r} needs theta > 0")
        elif self.kind == CATEGORICAL:
            if self.theta is not None:
                raise ValueError(f"categorical measure {self.name!r} takes no theta")
        else:
            raise ValueError(f"unknown measure kind {self.kind!r}")

    @classmethod
    def parse(cls, text):
        """Parse ``name:kind[:theta]``."""
        parts = [p.strip() for p in text.split(":")]
        if len(parts) == 2:
            return cls(parts[0], parts[1])
        if len(parts) == 3:
            return cls(parts[0], parts[1], float(parts[2]))
        raise ValueError(f"bad measure spec {text!r}")

    def __str__(self):
        if self.theta is None:
            return f"{self.name}:{self.kind}"
        return f"{self.name}:{self.kind}:{self.theta!r}"


@dataclass(frozen=True)
class SimSpec:
    variant: str
    lam: Optional[float] = None
    sigma: Union[float, str] = "auto"

    def __post_init__(self):
        if self.variant == "longitudinal":
            if self.lam is None or not self.lam > 1:
                raise ValueError("longitudinal similarity needs lam > 1")
        elif self.variant == "correlation":
            if self.sigma != "auto" and not float(self.sigma) > 0:
                raise ValueError("sigma must be positive or 'auto'")
        elif self.variant != "constant":
            raise ValueError(f"unknown similarity variant {self.variant!r}")


def rho_categorical(a, b):
    return int(a == b)


def rho_quantitative(a, b, theta):
    return int(abs(a - b) < theta)


def _standardize_rows(X):
    X = np.asarray(X, dtype=np.float64)
    Z = X - X.mean(axis=-1, keepdims=True)
    norms = np.linalg.norm(Z, axis=-1, keepdims=True)
    if np.any(norms == 0):
        raise DegenerateFeatureError("degenerate feature vector: zero variance")
    return Z / norms


def correlation_distance(features_v, features_w):
    zv, zw = _standardize_rows(np.stack([features_v, features_w]))
    return 1.0 - float(zv @ zw)


def sim_correlation(features_v, features_w, sigma):
    if len(features_v) < 2 or len(features_v) != len(features_w):
        raise ValueError("feature vectors must have equal length >= 2")
    d = correlation_distance(features_v, features_w)
    return float(np.exp(-(d * d) / (2.0 * sigma * sigma)))


def sim_longitudinal(v, w, lam):
    if not lam > 1:
        raise ValueError("lam must exceed 1")
    return lam if v.subject_id == w.subject_id else 1.0


def correlation_distance_matrix(X):
    Z = _standardize_rows(X)
    D = 1.0 - Z @ Z.T
    np.fill_diagonal(D, 0.0)
    return D


def auto_sigma(D, rows=None):
    """Mean off-diagonal distance among ``rows`` (all rows by default)."""
    if rows is not None:
        D = D[np.ix_(rows, rows)]
    m = D.shape[0]
    if m < 2:
        return 1.0
    mean = (D.sum() - np.trace(D)) / (m * (m - 1))
    return float(mean) if mean > 0 else 1.0


def measure_agreement(dataset, specs):
    """Dense ``(N, N)`` count of agreeing measures, diagonal zeroed."""
    n = len(dataset)
    total = np.zeros((n, n), dtype=np.int64)
    for spec in specs:
        if spec.name not in dataset.measures:
            raise PhenotypeError(f"incomplete phenotype: measure {spec.name!r} absent for all samples")
        values = dataset.measures[spec.name]
        for i, v in enumerate(values):
            if v is None or (isinstance(v, float) and np.isnan(v)):
                raise PhenotypeError(
                    f"incomplete phenotype: sample {dataset.sample_ids[i]!r} has no value for {spec.name!r}"
                )
        if spec.kind == CATEGORICAL:
            _, codes = np.unique(np.asarray([str(v) for v in values]), return_inverse=True)
            total += codes[:, None] == codes[None, :]
        else:
            a = np.asarray(values, dtype=np.float64)
            total += np.abs(a[:, None] - a[None, :]) < spec.theta
    np.fill_diagonal(total, 0)
    return total


def similarity_matrix(dataset, sim, features=None, sigma_rows=None):
    n = len(dataset)
    if sim.variant == "constant":
        return np.ones((n, n))
    if sim.variant == "longitudinal":
        _, codes = np.unique(np.asarray(dataset.subject_ids), return_inverse=True)
        return np.where(codes[:, None] == codes[None, :], float(sim.lam), 1.0)
    X = dataset.X if features is None else np.asarray(features, dtype=np.float64)
    D = correlation_distance_matrix(X)
    sigma = auto_sigma(D, sigma_rows) if sim.sigma == "auto" else float(sim.sigma)
    return np.exp(-(D * D) / (2.0 * sigma * sigma))


def build_population_graph(samples, specs, sim, features=None, sigma_rows=None):
    """Adjacency matrix of the population graph.

    Parameters
    ----------
    samples : list of Sample or Dataset
    specs : list of MeasureSpec
    sim : SimSpec
    features : array, optional
        Replaces the sample features for the correlation kernel, e.g. after
        feature selection.
    sigma_rows : index array, optional
        Rows whose pairwise distances set ``sigma`` when it is ``"auto"``.
        Pass the training rows to keep held-out data out of the bandwidth.

    Returns
    -------
    scipy.sparse.csr_matrix
        Symmetric, zero diagonal, no stored zeros.
    """
    dataset = as_dataset(samples)
    agree = measure_agreement(dataset, specs)
    S = similarity_matrix(dataset, sim, features=features, sigma_rows=sigma_rows)
    rows, cols = np.nonzero(np.triu(agree, k=1))
    weights = S[rows, cols] * agree[rows, cols]
    n = len(dataset)
    keep = weights > 0
    rows, cols, weights = rows[keep], cols[keep], weights[keep]
    W = sp.coo_matrix(
        (np.concatenate([weights, weights]), (np.concatenate([rows, cols]), np.concatenate([cols, rows]))),
        shape=(n, n),
    )
    return canonical(W)
