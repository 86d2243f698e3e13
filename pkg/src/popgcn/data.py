"""Samples and column-oriented datasets."""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np


@dataclass
class Sample:
    """One acquisition: a node of the population graph."""

    sample_id: str
    subject_id: str
    features: np.ndarray
    label: Optional[int] = None
    measures: dict = field(default_factory=dict)

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        if self.label is not None and self.label not in (0, 1):
            raise ValueError(f"label must be 0, 1 or None, got {self.label!r}")


class Dataset:
    """Column view over a list of samples.

    ``labels`` holds -1 for unlabelled nodes. ``measures`` maps each measure
    name to a length-N list of raw values (``None`` when missing).
    """

    def __init__(self, sample_ids, subject_ids, X, labels, measures):
        self.sample_ids = list(sample_ids)
        self.subject_ids = list(subject_ids)
        self.X = np.asarray(X, dtype=np.float64)
        self.labels = np.asarray(labels, dtype=np.int64)
        self.measures = {k: list(v) for k, v in measures.items()}
        n = len(self.sample_ids)
        if self.X.ndim != 2 or self.X.shape[0] != n:
            raise ValueError("feature matrix must be (N, C)")
        if len(set(self.sample_ids)) != n:
            raise ValueError("sample ids must be unique")
        if len(self.subject_ids) != n or self.labels.shape != (n,):
            raise ValueError("column lengths disagree")
        if not np.isin(self.labels, (-1, 0, 1)).all():
            raise ValueError("labels must be 0, 1 or -1 (unlabelled)")

    @classmethod
    def from_samples(cls, samples):
        samples = list(samples)
        if not samples:
            raise ValueError("empty sample list")
        widths = {s.features.shape for s in samples}
        if len(widths) != 1:
            raise ValueError(f"feature lengths differ across samples: {sorted(widths)}")
        names = []
        for s in samples:
            for k in s.measures:
                if k not in names:
                    names.append(k)
        return cls(
            [s.sample_id for s in samples],
            [s.subject_id for s in samples],
            np.stack([s.features for s in samples]),
            [-1 if s.label is None else s.label for s in samples],
            {k: [s.measures.get(k) for s in samples] for k in names},
        )

    def to_samples(self):
        return [
            Sample(
                self.sample_ids[i],
                self.subject_ids[i],
                self.X[i].copy(),
                None if self.labels[i] < 0 else int(self.labels[i]),
                {k: v[i] for k, v in self.measures.items()},
            )
            for i in range(len(self))
        ]

    def __len__(self):
        return len(self.sample_ids)

    @property
    def labelled(self):
        return self.labels >= 0

    def subset(self, idx):
        idx = np.asarray(idx)
        return Dataset(
            [self.sample_ids[i] for i in idx],
            [self.subject_ids[i] for i in idx],
            self.X[idx],
            self.labels[idx],
            {k: [v[i] for i in idx] for k, v in self.measures.items()},
        )

    def with_features(self, X):
        return Dataset(self.sample_ids, self.subject_ids, X, self.labels, self.measures)


def as_dataset(samples):
    if isinstance(samples, Dataset):
        return samples
    return Dataset.from_samples(samples)
