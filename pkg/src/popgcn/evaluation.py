"""Cross-validation harness: subject-grouped stratified folds, metrics, significance.

Every fold fits its preprocessing on training rows only, builds the
population graph over all nodes, and hides held-out labels from the GCN
(transductive semi-supervised setting). Three arms are compared: the GCN
on the population graph, the same GCN on a random graph of equal density,
and a ridge classifier on the node features alone.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import stats

from . import __version__
from .baselines import random_support, ridge_baseline
from .data import as_dataset
from .errors import ConfigError, DivergenceError
from .features import apply_scaler, fit_scaler, select_features
from .gcn import GcnModel, predict, train
from .graph import density, spectral_operator
from .population import MeasureSpec, SimSpec, build_population_graph

ARMS = ("gcn", "random_support", "ridge")
EXACT_WILCOXON_MAX = 20


# ---------------------------------------------------------------- folds


@dataclass(frozen=True)
class FoldPlan:
    sample_ids: list
    folds: np.ndarray  # fold index per sample
    n_folds: int

    def test_indices(self, f):
        return np.flatnonzero(self.folds == f)

    def as_dict(self):
        return dict(zip(self.sample_ids, self.folds.tolist()))


def subject_labels(dataset):
    """Majority label per subject (ties go to class 1, unlabelled subjects get -1)."""
    votes = {}
    for sid, y in zip(dataset.subject_ids, dataset.labels):
        v = votes.setdefault(sid, [0, 0])
        if y >= 0:
            v[y] += 1
    out = {}
    for sid, (n0, n1) in votes.items():
        out[sid] = -1 if n0 + n1 == 0 else int(n1 >= n0)
    return out


def make_folds(samples, n_folds=10, seed=0):
    """Assign whole subjects to folds, balancing classes per fold.

    Subjects are visited by class, then by descending sample count (the seed
    orders subjects that tie on both), and each goes to the fold holding the
    fewest subjects of its class, then the fewest samples, then the lowest
    index.
    """
    dataset = as_dataset(samples)
    if n_folds < 2:
        raise ValueError("need at least 2 folds")
    labels = subject_labels(dataset)
    subjects = sorted(labels)
    if len(subjects) < n_folds:
        raise ValueError(f"cannot form folds: {len(subjects)} subjects for {n_folds} folds")
    counts = {}
    for sid in dataset.subject_ids:
        counts[sid] = counts.get(sid, 0) + 1
    shuffle = np.random.default_rng(np.random.SeedSequence([seed, 31])).permutation(len(subjects))
    order = sorted(range(len(subjects)), key=lambda i: (labels[subjects[i]], -counts[subjects[i]], shuffle[i]))

    classes = sorted(set(labels.values()))
    per_class = {c: np.zeros(n_folds, dtype=np.int64) for c in classes}
    sizes = np.zeros(n_folds, dtype=np.int64)
    fold_of = {}
    for i in order:
        sid = subjects[i]
        c = labels[sid]
        f = min(range(n_folds), key=lambda k: (per_class[c][k], sizes[k], k))
        fold_of[sid] = f
        per_class[c][f] += 1
        sizes[f] += counts[sid]
    folds = np.array([fold_of[sid] for sid in dataset.subject_ids], dtype=np.int64)
    return FoldPlan(list(dataset.sample_ids), folds, n_folds)


# ---------------------------------------------------------------- metrics


def accuracy(pred, truth):
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if truth.size == 0:
        raise ValueError("accuracy of an empty set")
    return float(np.mean(pred == truth))


def auc(scores, truth):
    """Area under the ROC curve from the Mann-Whitney rank statistic; ties count 1/2."""
    scores = np.asarray(scores, dtype=np.float64)
    truth = np.asarray(truth)
    pos = truth == 1
    n_pos = int(pos.sum())
    n_neg = truth.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC undefined: truth holds a single class")
    ranks = stats.rankdata(scores)
    u = ranks[pos].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def _signed_rank_counts(doubled_ranks):
    """Number of sign assignments reaching each positive-rank sum."""
    total = int(doubled_ranks.sum())
    counts = np.zeros(total + 1, dtype=np.float64)
    counts[0] = 1.0
    for r in doubled_ranks:
        shifted = np.zeros_like(counts)
        shifted[r:] = counts[: total + 1 - r]
        counts = counts + shifted
    return counts


def paired_significance(a, b):
    """Two-sided Wilcoxon signed-rank p-value for paired per-fold metrics.

    Zero differences are dropped. Up to 20 pairs the null distribution is
    enumerated exactly (tied magnitudes share their average rank); larger
    samples use the normal approximation.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("paired samples must be 1-d and of equal length")
    if a.size < 5:
        raise ValueError("need at least 5 pairs")
    d = a - b
    d = d[d != 0]
    if d.size == 0:
        return 1.0
    if a.size > EXACT_WILCOXON_MAX:
        return float(stats.wilcoxon(d, zero_method="wilcox", method="approx").pvalue)
    doubled = np.rint(2 * stats.rankdata(np.abs(d))).astype(np.int64)
    t_obs = int(doubled[d > 0].sum())
    counts = _signed_rank_counts(doubled)
    n_total = 2.0 ** d.size
    p_low = counts[: t_obs + 1].sum() / n_total
    p_high = counts[t_obs:].sum() / n_total
    return float(min(1.0, 2.0 * min(p_low, p_high)))


# ---------------------------------------------------------------- config


@dataclass
class ExperimentConfig:
    """Flat experiment configuration; ``to_flat``/``from_flat`` use dotted keys."""

    measures: list = field(default_factory=lambda: [MeasureSpec("site", "categorical"), MeasureSpec("gender", "categorical")])
    sim: str = "correlation"
    lam: Optional[float] = None
    sigma: object = "auto"
    K: int = 3
    L: int = 1
    hidden: int = 16
    dropout: float = 0.3
    l2: float = 5e-4
    lr: float = 0.005
    epochs: int = 150
    C: Optional[int] = None
    alpha: float = 1.0
    selection: str = "oneshot"
    folds: int = 10
    seeds: list = field(default_factory=lambda: list(range(10)))
    master_seed: int = 0

    KEYS = {
        "graph.measures": "measures",
        "graph.sim": "sim",
        "graph.lambda": "lam",
        "graph.sigma": "sigma",
        "model.K": "K",
        "model.L": "L",
        "model.hidden": "hidden",
        "model.dropout": "dropout",
        "model.l2": "l2",
        "model.lr": "lr",
        "model.epochs": "epochs",
        "features.C": "C",
        "features.alpha": "alpha",
        "features.selection": "selection",
        "eval.folds": "folds",
        "eval.seeds": "seeds",
        "master_seed": "master_seed",
    }

    def __post_init__(self):
        self.validate()

    def validate(self):
        try:
            self.sim_spec()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if not self.seeds:
            raise ConfigError("eval.seeds must list at least one seed")
        if self.folds < 2:
            raise ConfigError("eval.folds must be at least 2")
        if self.K < 0 or self.L < 0 or self.hidden < 1 or self.epochs < 1:
            raise ConfigError("model.K, model.L must be >= 0 and model.hidden, model.epochs >= 1")
        if not 0 <= self.dropout < 1:
            raise ConfigError("model.dropout must lie in [0, 1)")
        if self.l2 < 0 or self.lr < 0 or self.alpha < 0:
            raise ConfigError("model.l2, model.lr and features.alpha must be non-negative")
        if self.C is not None and self.C < 1:
            raise ConfigError("features.C must be positive")
        if self.selection not in ("oneshot", "rfe"):
            raise ConfigError("features.selection must be oneshot or rfe")

    def sim_spec(self):
        if self.sim == "longitudinal":
            return SimSpec("longitudinal", lam=self.lam)
        if self.sim == "correlation":
            return SimSpec("correlation", sigma=self.sigma)
        return SimSpec(self.sim)

    @classmethod
    def from_flat(cls, mapping):
        """Build from ``{"model.K": "3", ...}``; values may be strings."""
        unknown = set(mapping) - set(cls.KEYS)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        kwargs = {}
        try:
            for key, raw in mapping.items():
                name = cls.KEYS[key]
                kwargs[name] = _parse_value(name, raw)
        except ValueError as exc:
            raise ConfigError(f"{key}: {exc}") from exc
        return cls(**kwargs)

    def to_flat(self):
        out = {}
        for key, name in self.KEYS.items():
            value = getattr(self, name)
            if name == "measures":
                value = [str(m) for m in value]
            elif name == "seeds":
                value = list(value)
            out[key] = value
        return out


def _parse_value(name, raw):
    if not isinstance(raw, str):
        if name == "measures":
            return [m if isinstance(m, MeasureSpec) else MeasureSpec.parse(m) for m in raw]
        return raw
    raw = raw.strip()
    if name == "measures":
        return [MeasureSpec.parse(p) for p in raw.split(",") if p.strip()]
    if name == "seeds":
        return [int(p) for p in raw.split(",") if p.strip()]
    if name in ("sim", "selection"):
        return raw
    if name in ("lam", "C"):
        return None if raw.lower() in ("", "none") else (float(raw) if name == "lam" else int(raw))
    if name == "sigma":
        return raw if raw == "auto" else float(raw)
    if name in ("K", "L", "hidden", "epochs", "folds", "master_seed"):
        return int(raw)
    return float(raw)


# ---------------------------------------------------------------- experiment


@dataclass
class FoldData:
    """Per-fold preprocessing outputs; everything here is fitted on ``train`` rows."""

    train: np.ndarray
    test: np.ndarray
    features: np.ndarray
    kept: np.ndarray
    scaler: object
    graph: object


def prepare_fold(dataset, train, test, config, fixed_graph=None):
    scaler = fit_scaler(dataset.X[train])
    Z = apply_scaler(scaler, dataset.X)
    kept = np.arange(Z.shape[1])
    if config.C is not None and config.C < Z.shape[1]:
        kept = select_features(
            Z[train], dataset.labels[train], config.alpha, config.C, method=config.selection
        ).kept_indices
    Z = Z[:, kept]
    if fixed_graph is not None:
        W = fixed_graph
    else:
        W = build_population_graph(dataset, config.measures, config.sim_spec(), features=Z, sigma_rows=train)
    return FoldData(train, test, Z, kept, scaler, W)


def cell_seed(master_seed, fold, seed, arm=0):
    """Independent integer seed for one (fold, seed, arm) cell."""
    return int(np.random.SeedSequence([master_seed, fold, seed, arm]).generate_state(1)[0])


def make_model(config, n_features, seed):
    return GcnModel(
        n_features=n_features,
        K=config.K,
        n_hidden_layers=config.L,
        hidden=config.hidden,
        dropout=config.dropout,
        l2=config.l2,
        lr=config.lr,
        epochs=config.epochs,
        seed=seed,
    )


def fit_predict_gcn(config, fold_data, labels, seed, W=None):
    """Train on ``fold_data.train`` labels only; return class-1 probability per node."""
    op = spectral_operator(fold_data.graph if W is None else W)
    hidden_labels = np.full(labels.shape, -1, dtype=np.int64)
    hidden_labels[fold_data.train] = labels[fold_data.train]
    mask = hidden_labels >= 0
    model = make_model(config, fold_data.features.shape[1], seed)
    train(model, fold_data.features, op, hidden_labels, mask)
    classes, probs = predict(model, fold_data.features, op)
    return classes, probs[:, 1]


def _metrics(scores, classes, truth):
    try:
        area = auc(scores, truth)
    except ValueError:
        area = None
    return accuracy(classes, truth), area


@dataclass
class ExperimentReport:
    entries: dict
    config: dict
    master_seed: int
    n_nodes: int
    graph_density: list
    failures: list = field(default_factory=list)

    def per_fold(self, arm, metric="accuracy"):
        """Metric per fold, averaged over seeds (folds with no successful cell are skipped)."""
        by_fold = {}
        for e in self.entries[arm]:
            if e.get(metric) is not None:
                by_fold.setdefault(e["fold"], []).append(e[metric])
        return np.array([np.mean(by_fold[f]) for f in sorted(by_fold)])

    def summary(self):
        out = {}
        for arm, rows in self.entries.items():
            out[arm] = {}
            for metric in ("accuracy", "auc"):
                vals = [r[metric] for r in rows if r.get(metric) is not None]
                out[arm][metric] = {
                    "mean": float(np.mean(vals)) if vals else None,
                    "std": float(np.std(vals)) if vals else None,
                    "n": len(vals),
                }
        return out

    def pvalues(self):
        out = {}
        for a, b in (("gcn", "ridge"), ("gcn", "random_support"), ("random_support", "ridge")):
            if a not in self.entries or b not in self.entries:
                continue
            for metric in ("accuracy", "auc"):
                x, y = self.per_fold(a, metric), self.per_fold(b, metric)
                key = f"{a}_vs_{b}_{metric}"
                if x.size == y.size and x.size >= 5:
                    out[key] = paired_significance(x, y)
                else:
                    out[key] = None
        return out

    def to_dict(self):
        return {
            "code_version": __version__,
            "master_seed": self.master_seed,
            "config": self.config,
            "n_nodes": self.n_nodes,
            "graph_density": self.graph_density,
            "arms": self.entries,
            "summary": self.summary(),
            "pvalues": self.pvalues(),
            "failures": self.failures,
            "notes": [
                "scaler and feature selection are fitted per fold on training rows only",
                "graph similarity uses fold-selected features of all nodes; held-out labels are never used",
                "GCN is trained transductively on the full graph with held-out labels masked",
            ],
        }


def run_experiment(dataset, config, arms=ARMS, fixed_graph=None, progress=None):
    """Cross-validated comparison of the requested arms.

    Parameters
    ----------
    dataset : Dataset or list of Sample
    config : ExperimentConfig
    arms : subset of ``("gcn", "random_support", "ridge")``
    fixed_graph : sparse matrix, optional
        Use this adjacency instead of building the population graph.
    progress : callable, optional
        Called with a short message after each fold.
    """
    dataset = as_dataset(dataset)
    config.validate()
    unknown = set(arms) - set(ARMS)
    if unknown:
        raise ConfigError(f"unknown arms: {sorted(unknown)}")
    labelled = dataset.labelled
    plan = make_folds(dataset.subset(np.flatnonzero(labelled)), config.folds, config.master_seed)
    fold_of = np.full(len(dataset), -1, dtype=np.int64)
    fold_of[np.flatnonzero(labelled)] = plan.folds
    labels = dataset.labels

    entries = {arm: [] for arm in arms}
    failures = []
    densities = []
    for f in range(config.folds):
        test = np.flatnonzero(fold_of == f)
        train_idx = np.flatnonzero(labelled & (fold_of != f))
        fd = prepare_fold(dataset, train_idx, test, config, fixed_graph=fixed_graph)
        dens = density(fd.graph)
        densities.append(dens)
        truth = labels[test]
        if "ridge" in arms:
            scores, classes = ridge_baseline(fd.features[train_idx], labels[train_idx], fd.features[test], config.alpha)
            acc, area = _metrics(scores, classes, truth)
            entries["ridge"].append({"fold": f, "seed": None, "accuracy": acc, "auc": area})
        for s in config.seeds:
            seed = cell_seed(config.master_seed, f, s)
            for arm in ("gcn", "random_support"):
                if arm not in arms:
                    continue
                try:
                    W = None
                    if arm == "random_support":
                        rng = np.random.default_rng(cell_seed(config.master_seed, f, s, 1))
                        W = random_support(len(dataset), max(dens, 1.0 / math.comb(len(dataset), 2)), rng)
                    classes, p1 = fit_predict_gcn(config, fd, labels, seed, W=W)
                except DivergenceError as exc:
                    failures.append({"arm": arm, "fold": f, "seed": s, "error": str(exc)})
                    entries[arm].append({"fold": f, "seed": s, "accuracy": None, "auc": None})
                    continue
                acc, area = _metrics(p1[test], classes[test], truth)
                entries[arm].append({"fold": f, "seed": s, "accuracy": acc, "auc": area})
        if progress is not None:
            progress(f"fold {f + 1}/{config.folds} done")
    return ExperimentReport(entries, config.to_flat(), config.master_seed, len(dataset), densities, failures)
