"""Deterministic synthetic populations with planted structure.

Nothing here models real imaging data. The generators exist so that every
part of the pipeline can be exercised, and compared across arms, without
access-restricted datasets.
"""

import os

import numpy as np

from .data import Dataset
from .evaluation import ExperimentConfig
from .graph import from_edges
from .io import write_config, write_dataset, write_edges


def _unit(rng, c):
    u = rng.standard_normal(c)
    return u / np.linalg.norm(u)


def gen_population(
    n_subjects=200,
    samples_per_subject_range=(1, 1),
    C=50,
    n_sites=10,
    class_balance=0.5,
    signal_strength=1.0,
    noise=1.0,
    seed=0,
    site_offset=0.0,
    site_specificity=0.0,
    drift=0.0,
    subject_noise=None,
):
    """Generate a labelled population.

    Each subject gets a class, a site, a gender and a baseline age. Its
    feature vector is::

        (signal_strength * (+/-1) + site_shift) * direction_site + subject_noise * N(0, I)

    where ``direction_site`` mixes a direction shared by all sites with a
    site-specific one (``site_specificity`` in [0, 1] sets the mix) and
    ``site_shift ~ N(0, site_offset^2)`` moves the whole site along that
    same direction, so a linear read-out cannot separate class from site.
    Every sample of a subject adds per-sample noise ``noise * N(0, I)`` and
    a drift proportional to follow-up time. Follow-up samples are 6 to 24
    months apart, so ages within a subject grow.

    Parameters
    ----------
    samples_per_subject_range : (int, int)
        Inclusive range of acquisitions per subject.
    subject_noise : float, optional
        Between-subject noise scale; defaults to ``noise``.

    Returns
    -------
    Dataset
        Measures ``site``, ``gender`` and ``age``; labels on every sample.
    """
    rng = np.random.default_rng(np.random.SeedSequence([seed, 17]))
    if subject_noise is None:
        subject_noise = noise
    lo, hi = samples_per_subject_range
    if not (1 <= lo <= hi) or n_subjects < 1 or C < 2 or n_sites < 1:
        raise ValueError("invalid generator parameters")

    n_pos = int(round(class_balance * n_subjects))
    y_subj = np.zeros(n_subjects, dtype=np.int64)
    y_subj[:n_pos] = 1
    y_subj = rng.permutation(y_subj)
    site_subj = rng.integers(0, n_sites, size=n_subjects)
    gender_subj = rng.integers(0, 2, size=n_subjects)
    age_subj = rng.uniform(55.0, 90.0, size=n_subjects)

    shared = _unit(rng, C)
    directions = []
    for _ in range(n_sites):
        d = (1.0 - site_specificity) * shared + site_specificity * _unit(rng, C)
        directions.append(d / np.linalg.norm(d))
    directions = np.array(directions)
    shifts = site_offset * rng.standard_normal(n_sites)

    sample_ids, subject_ids, rows, labels = [], [], [], []
    sites, genders, ages = [], [], []
    width = len(str(n_subjects - 1))
    for s in range(n_subjects):
        signed = 1.0 if y_subj[s] == 1 else -1.0
        site = site_subj[s]
        base = (signal_strength * signed + shifts[site]) * directions[site]
        base = base + subject_noise * rng.standard_normal(C)
        drift_dir = _unit(rng, C)
        n_samples = int(rng.integers(lo, hi + 1))
        months = np.concatenate([[0.0], np.cumsum(rng.integers(6, 25, size=n_samples - 1))])
        for t in range(n_samples):
            x = base + drift * (months[t] / 12.0) * drift_dir + noise * rng.standard_normal(C)
            subject = f"sub{s:0{width}d}"
            sample_ids.append(f"{subject}_t{t}")
            subject_ids.append(subject)
            rows.append(x)
            labels.append(y_subj[s])
            sites.append(f"site{site}")
            genders.append("F" if gender_subj[s] else "M")
            ages.append(round(float(age_subj[s] + months[t] / 12.0), 2))

    return Dataset(
        sample_ids,
        subject_ids,
        np.array(rows),
        labels,
        {"site": sites, "gender": genders, "age": ages},
    )


def gen_two_community_graph(n, p_in, p_out, seed):
    """Two-block stochastic block model; block membership is the label.

    Returns ``(W, labels)`` with unit weights and ``labels[:n // 2] == 0``.
    """
    if p_in < p_out:
        raise ValueError("p_in must be at least p_out")
    rng = np.random.default_rng(np.random.SeedSequence([seed, 23]))
    labels = np.zeros(n, dtype=np.int64)
    labels[n // 2 :] = 1
    rows, cols = np.triu_indices(n, k=1)
    p = np.where(labels[rows] == labels[cols], p_in, p_out)
    keep = rng.random(rows.size) < p
    return from_edges(n, rows[keep], cols[keep], np.ones(int(keep.sum()))), labels


# Presets pair generator arguments with a matching experiment config (flat
# dotted keys, as in a config file). Parameters were fixed from pilot runs so
# that the phenomenon each preset illustrates is clearly visible.
PRESETS = {
    "abide-like": {
        # many acquisition sites whose offsets lie along the class direction:
        # a site-aware graph lets the GCN compare subjects within a site
        "generator": dict(
            n_subjects=300, C=100, n_sites=10, class_balance=0.5,
            signal_strength=3.0, noise=1.0, site_offset=4.0,
        ),
        "config": {
            "graph.measures": "site:categorical,gender:categorical",
            "graph.sim": "correlation",
            "graph.sigma": "auto",
            "model.K": "3", "model.L": "1", "model.hidden": "16",
            "model.dropout": "0.3", "model.l2": "0.0005", "model.lr": "0.005", "model.epochs": "150",
            "features.C": "30", "features.alpha": "1.0",
            "eval.folds": "10", "eval.seeds": "0,1,2,3,4,5,6,7,8,9", "master_seed": "0",
        },
    },
    "adni-like": {
        # one site, several acquisitions per subject; single scans are noisy,
        # so tying a subject's scans together pays off
        "generator": dict(
            n_subjects=100, samples_per_subject_range=(2, 6), C=138, n_sites=1, class_balance=0.5,
            signal_strength=3.0, noise=3.0, subject_noise=0.5, drift=0.2,
        ),
        "config": {
            "graph.measures": "gender:categorical,age:quantitative:2",
            "graph.sim": "longitudinal",
            "graph.lambda": "10",
            "model.K": "3", "model.L": "5", "model.hidden": "16",
            "model.dropout": "0.02", "model.l2": "1e-05", "model.lr": "0.01", "model.epochs": "200",
            "features.alpha": "1.0",
            "eval.folds": "10", "eval.seeds": "0,1,2,3,4", "master_seed": "0",
        },
    },
    "sbm": {
        # two-block graph with one-hot node features; the graph is shipped as
        # graph.csv and must be passed to ``run --graph``
        "generator": dict(n=100, p_in=0.5, p_out=0.02),
        "config": {
            "graph.measures": "",
            "graph.sim": "constant",
            "model.K": "2", "model.L": "1", "model.hidden": "16",
            "model.dropout": "0.5", "model.l2": "0.0005", "model.lr": "0.01", "model.epochs": "200",
            "eval.folds": "5", "eval.seeds": "0,1,2", "master_seed": "0",
        },
    },
}


def preset_dataset(name, seed=0):
    """``(dataset, flat_config, graph)`` for a preset; ``graph`` is None unless the preset fixes it."""
    if name not in PRESETS:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    spec = PRESETS[name]
    if name == "sbm":
        W, labels = gen_two_community_graph(seed=seed, **spec["generator"])
        n = labels.size
        ids = [f"node{i:03d}" for i in range(n)]
        return Dataset(ids, ids, np.eye(n), labels, {}), dict(spec["config"]), W
    return gen_population(seed=seed, **spec["generator"]), dict(spec["config"]), None


def write_preset(name, seed, out_dir):
    """Write the preset's CSV files plus ``config.ini`` (and ``graph.csv`` for sbm)."""
    dataset, flat, W = preset_dataset(name, seed)
    paths = write_dataset(dataset, out_dir)
    config_path = os.path.join(out_dir, "config.ini")
    write_config(ExperimentConfig.from_flat(flat), config_path)
    paths.append(config_path)
    if W is not None:
        paths.append(os.path.join(out_dir, "graph.csv"))
        write_edges(W, paths[-1])
    return paths
