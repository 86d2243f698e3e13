import itertools
import json

import numpy as np
import pytest
from scipy import stats

from popgcn.data import Dataset
from popgcn.errors import ConfigError
from popgcn.evaluation import (
    ExperimentConfig,
    accuracy,
    auc,
    fit_predict_gcn,
    make_folds,
    paired_significance,
    prepare_fold,
    run_experiment,
    subject_labels,
)
from popgcn.population import MeasureSpec
from popgcn.synth import gen_population


def brute_force_auc(scores, truth):
    pos = [s for s, t in zip(scores, truth) if t == 1]
    neg = [s for s, t in zip(scores, truth) if t == 0]
    total = sum(1.0 if p > q else 0.5 if p == q else 0.0 for p in pos for q in neg)
    return total / (len(pos) * len(neg))


def brute_force_wilcoxon(d):
    """Two-sided exact p by enumerating all 2^n sign flips of the ranked |d|."""
    d = np.asarray(d, dtype=float)
    d = d[d != 0]
    ranks = stats.rankdata(np.abs(d))
    t_obs = ranks[d > 0].sum()
    sums = np.array([sum(r for r, s in zip(ranks, signs) if s) for signs in itertools.product([0, 1], repeat=d.size)])
    lo = np.mean(sums <= t_obs + 1e-9)
    hi = np.mean(sums >= t_obs - 1e-9)
    return min(1.0, 2 * min(lo, hi))


def tiny_population(n_subjects, counts, labels):
    ids, subj, y = [], [], []
    for s in range(n_subjects):
        for t in range(counts[s]):
            ids.append(f"s{s}_{t}")
            subj.append(f"s{s}")
            y.append(labels[s])
    n = len(ids)
    return Dataset(ids, subj, np.zeros((n, 2)), y, {})


def check_plan(ds, plan):
    by_subject = {}
    for sid, f in zip(ds.subject_ids, plan.folds):
        by_subject.setdefault(sid, set()).add(int(f))
    assert all(len(v) == 1 for v in by_subject.values())
    labels = subject_labels(ds)
    for c in set(labels.values()):
        per_fold = np.bincount(
            [next(iter(by_subject[s])) for s in labels if labels[s] == c], minlength=plan.n_folds
        )
        expected = sum(1 for s in labels if labels[s] == c) / plan.n_folds
        assert np.all(np.abs(per_fold - expected) <= 1)


def test_folds_balanced_singletons():
    ds = tiny_population(20, [1] * 20, [0, 1] * 10)
    plan = make_folds(ds, 10, seed=0)
    for f in range(10):
        members = plan.test_indices(f)
        assert len(members) == 2
        assert sorted(ds.labels[members]) == [0, 1]
    assert sorted(plan.as_dict()) == sorted(ds.sample_ids)


def test_longitudinal_subject_stays_together():
    counts = [5] + [1] * 19
    ds = tiny_population(20, counts, [1] + [0, 1] * 9 + [0])
    plan = make_folds(ds, 10, seed=3)
    assert len(set(plan.folds[:5])) == 1
    check_plan(ds, plan)


def test_folds_random_populations():
    rng = np.random.default_rng(0)
    for trial in range(50):
        n_subj = int(rng.integers(10, 60))
        ds = tiny_population(n_subj, rng.integers(1, 5, n_subj), rng.integers(0, 2, n_subj))
        plan = make_folds(ds, int(rng.integers(2, 11)), seed=trial)
        check_plan(ds, plan)


def test_folds_need_enough_subjects():
    ds = tiny_population(3, [2, 2, 2], [0, 1, 0])
    with pytest.raises(ValueError, match="cannot form folds"):
        make_folds(ds, 5)


def test_fold_seed_changes_assignment_but_not_balance():
    ds = tiny_population(40, [1] * 40, [0, 1] * 20)
    a = make_folds(ds, 5, seed=0).folds
    b = make_folds(ds, 5, seed=1).folds
    assert not np.array_equal(a, b)
    assert np.array_equal(a, make_folds(ds, 5, seed=0).folds)


def test_auc_examples():
    assert auc([0.1, 0.2, 0.8, 0.9], [0, 0, 1, 1]) == 1.0
    assert auc([0.5] * 4, [0, 1, 0, 1]) == 0.5
    assert auc([0.9, 0.8, 0.3], [1, 0, 1]) == 0.5
    with pytest.raises(ValueError, match="AUC undefined"):
        auc([0.1, 0.2], [1, 1])
    assert accuracy([1, 0, 1], [1, 1, 1]) == pytest.approx(2 / 3)


def test_auc_matches_pair_counting():
    rng = np.random.default_rng(1)
    for _ in range(100):
        n = int(rng.integers(2, 200))
        truth = rng.integers(0, 2, n)
        truth[0], truth[1] = 0, 1
        scores = np.round(rng.random(n), 1)
        assert auc(scores, truth) == pytest.approx(brute_force_auc(scores, truth), abs=1e-12)


def test_wilcoxon_examples():
    a = np.linspace(0.6, 0.8, 10)
    assert paired_significance(a, a) == 1.0
    b = a - 0.05 - np.arange(10) * 0.001
    assert paired_significance(a, b) == pytest.approx(2 / 2**10, abs=1e-15)
    assert paired_significance(b, a) == paired_significance(a, b)
    with pytest.raises(ValueError):
        paired_significance(a[:4], b[:4])


def test_wilcoxon_against_enumeration_and_scipy():
    rng = np.random.default_rng(2)
    for _ in range(30):
        n = int(rng.integers(5, 13))
        a = np.round(rng.random(n), 2)
        b = np.round(rng.random(n), 2)
        assert paired_significance(a, b) == pytest.approx(brute_force_wilcoxon(a - b), abs=1e-12)
    for _ in range(10):
        a, b = rng.random(15), rng.random(15)
        ref = stats.wilcoxon(a, b, method="exact").pvalue
        assert paired_significance(a, b) == pytest.approx(ref, rel=1e-10)


def test_config_flat_roundtrip_and_errors():
    cfg = ExperimentConfig(C=10, seeds=[0, 2], measures=[MeasureSpec("age", "quantitative", 2.0)])
    flat = {k: (",".join(map(str, v)) if isinstance(v, list) else str(v)) for k, v in cfg.to_flat().items()}
    back = ExperimentConfig.from_flat(flat)
    assert back == cfg
    with pytest.raises(ConfigError):
        ExperimentConfig(seeds=[])
    with pytest.raises(ConfigError):
        ExperimentConfig.from_flat({"model.K": "three"})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_flat({"model.depth": "3"})
    with pytest.raises(ConfigError):
        ExperimentConfig(sim="longitudinal", lam=0.5)


@pytest.fixture(scope="module")
def small_dataset():
    return gen_population(n_subjects=60, C=20, n_sites=3, signal_strength=3.0, site_offset=2.0, seed=5)


@pytest.fixture(scope="module")
def small_config():
    return ExperimentConfig(C=8, folds=5, seeds=[0, 1], epochs=20, master_seed=7)


def test_report_bookkeeping_and_determinism(small_dataset, small_config):
    rep = run_experiment(small_dataset, small_config)
    assert len(rep.entries["gcn"]) == 5 * 2
    assert len(rep.entries["random_support"]) == 5 * 2
    assert len(rep.entries["ridge"]) == 5
    for rows in rep.entries.values():
        for r in rows:
            assert 0 <= r["accuracy"] <= 1 and 0 <= r["auc"] <= 1
    again = run_experiment(small_dataset, small_config)
    assert json.dumps(rep.to_dict()) == json.dumps(again.to_dict())
    assert set(rep.pvalues()) >= {"gcn_vs_ridge_accuracy", "gcn_vs_random_support_auc"}


def _fold(small_dataset, small_config):
    ds = small_dataset
    plan = make_folds(ds, small_config.folds, small_config.master_seed)
    test = plan.test_indices(0)
    train = np.setdiff1d(np.arange(len(ds)), test)
    return ds, train, test


def test_fitting_phases_never_read_held_out_features(small_dataset, small_config):
    ds, train, test = _fold(small_dataset, small_config)
    clean = prepare_fold(ds, train, test, small_config)
    X = ds.X.copy()
    X[test] = np.nan
    poisoned = prepare_fold(ds.with_features(X), train, test, small_config, fixed_graph=clean.graph)
    assert np.array_equal(clean.scaler.means, poisoned.scaler.means)
    assert np.array_equal(clean.scaler.stds, poisoned.scaler.stds)
    assert np.array_equal(clean.kept, poisoned.kept)
    assert np.isfinite(poisoned.features[train]).all()


def test_held_out_labels_never_reach_any_arm(small_dataset, small_config):
    ds, train, test = _fold(small_dataset, small_config)
    flipped = ds.labels.copy()
    flipped[test] = 1 - flipped[test]
    ds2 = type(ds)(ds.sample_ids, ds.subject_ids, ds.X, flipped, ds.measures)
    a = prepare_fold(ds, train, test, small_config)
    b = prepare_fold(ds2, train, test, small_config)
    assert np.array_equal(a.graph.toarray(), b.graph.toarray())
    assert np.array_equal(a.features, b.features)
    pa = fit_predict_gcn(small_config, a, ds.labels, seed=1)[1]
    pb = fit_predict_gcn(small_config, b, flipped, seed=1)[1]
    assert np.array_equal(pa, pb)
