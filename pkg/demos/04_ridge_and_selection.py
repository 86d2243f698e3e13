"""Ridge classifier and ridge-based feature selection.

The ridge classifier regresses +/-1 targets and thresholds at zero. The
same fit, on standardized training data, ranks features by the size of
their weights.
"""

import numpy as np

from popgcn.baselines import ridge_baseline
from popgcn.features import apply_scaler, fit_scaler, select_features

rng = np.random.default_rng(0)
y = rng.integers(0, 2, 200)
X = rng.standard_normal((200, 50))
X[:, [7, 21, 33]] += 1.5 * (2 * y[:, None] - 1)  # three informative columns

train, test = np.arange(150), np.arange(150, 200)
scaler = fit_scaler(X[train])  # fitted on training rows only
Z = apply_scaler(scaler, X)

sel = select_features(Z[train], y[train], alpha=1.0, C_out=3)
print("selected features:", sel.kept_indices)
rfe = select_features(Z[train], y[train], alpha=1.0, C_out=3, method="rfe", step=0.2)
print("recursive elimination:", rfe.kept_indices)

for name, cols in (("all 50 features", slice(None)), ("3 selected", sel.kept_indices)):
    _, pred = ridge_baseline(Z[train][:, cols], y[train], Z[test][:, cols])
    print("%-16s test accuracy %.2f" % (name, np.mean(pred == y[test])))
