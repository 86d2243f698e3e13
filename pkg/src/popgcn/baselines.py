"""Comparison arms: a linear ridge classifier and a random graph of matched density."""

import numpy as np

from .features import ridge_fit, ridge_predict, to_pm1
from .graph import from_edges


def ridge_baseline(X_train, y_train, X_test, alpha=1.0):
    """Fit ridge on the training rows; return ``(scores, classes)`` for the test rows."""
    model = ridge_fit(X_train, to_pm1(y_train), alpha)
    return ridge_predict(model, X_test)


def random_support(n, density, rng):
    """Unit-weight random graph with exactly ``round(density * n(n-1)/2)`` edges."""
    if not 0 < density <= 1:
        raise ValueError("density must lie in (0, 1]")
    rows, cols = np.triu_indices(n, k=1)
    m = int(round(density * rows.size))
    pick = np.sort(rng.choice(rows.size, size=m, replace=False))
    return from_edges(n, rows[pick], cols[pick], np.ones(m))
