"""CSV, config and report serialization.

Data directories hold three UTF-8 CSV files with a header row:

* ``features.csv``: ``sample_id, f_0, ..., f_{C-1}``
* ``phenotypes.csv``: ``sample_id, subject_id``, then one column per measure
* ``labels.csv``: ``sample_id, label`` with label ``0``, ``1`` or empty

Node order everywhere (graph indices, reports) is the row order of
``features.csv``. Floats are written with ``repr`` so that reading a file
back gives the exact same bits.
"""

import configparser
import csv
import json
import math
import os

import numpy as np

from .data import Dataset
from .errors import ConfigError, DataValidationError
from .evaluation import ExperimentConfig
from .graph import from_edges, to_edges

FEATURES = "features.csv"
PHENOTYPES = "phenotypes.csv"
LABELS = "labels.csv"


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _read_table(path, required):
    """Rows of a CSV file as ``(line_number, fields)`` plus the header."""
    if not os.path.isfile(path):
        raise DataValidationError(f"missing file: {path}")
    name = os.path.basename(path)
    with open(path, newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise DataValidationError(f"{name}: empty file, header row required")
        header = [h.strip() for h in header]
        if header[: len(required)] != required:
            raise DataValidationError(f"{name} line 1: header must start with {', '.join(required)}")
        rows, seen = [], {}
        for fields in reader:
            line = reader.line_num
            if not fields:
                continue
            if len(fields) != len(header):
                raise DataValidationError(f"{name} line {line}: expected {len(header)} fields, got {len(fields)}")
            sid = fields[0].strip()
            if not sid:
                raise DataValidationError(f"{name} line {line}: empty sample_id")
            if sid in seen:
                raise DataValidationError(f"{name} line {line}: duplicate sample_id {sid!r} (first on line {seen[sid]})")
            seen[sid] = line
            rows.append((line, [f.strip() for f in fields]))
    return header, rows


def _same_ids(reference, other, ref_name, other_name):
    missing = [s for s in reference if s not in other]
    if missing:
        raise DataValidationError(f"sample {missing[0]!r} appears in {ref_name} but not in {other_name}")
    extra = [s for s in other if s not in reference]
    if extra:
        raise DataValidationError(f"sample {extra[0]!r} appears in {other_name} but not in {ref_name}")


def ingest(data_dir, config=None):
    """Load and validate a data directory.

    When ``config`` is given, every declared measure must be a phenotype
    column with a value on every row, and quantitative measures must parse
    as numbers. Raises :class:`DataValidationError` naming file and line.
    """
    f_header, f_rows = _read_table(os.path.join(data_dir, FEATURES), ["sample_id"])
    p_header, p_rows = _read_table(os.path.join(data_dir, PHENOTYPES), ["sample_id", "subject_id"])
    l_header, l_rows = _read_table(os.path.join(data_dir, LABELS), ["sample_id", "label"])
    if len(f_header) < 2:
        raise DataValidationError(f"{FEATURES} line 1: no feature columns")
    if not f_rows:
        raise DataValidationError(f"{FEATURES}: no samples")

    ids = [fields[0] for _, fields in f_rows]
    X = np.empty((len(f_rows), len(f_header) - 1))
    for r, (line, fields) in enumerate(f_rows):
        for c, raw in enumerate(fields[1:]):
            try:
                value = float(raw)
            except ValueError:
                raise DataValidationError(
                    f"{FEATURES} line {line}: non-numeric value {raw!r} in column {f_header[c + 1]}"
                ) from None
            if not math.isfinite(value):
                raise DataValidationError(f"{FEATURES} line {line}: non-finite value {raw!r} in column {f_header[c + 1]}")
            X[r, c] = value

    phen = {fields[0]: (line, fields) for line, fields in p_rows}
    labs = {fields[0]: (line, fields) for line, fields in l_rows}
    _same_ids(ids, phen, FEATURES, PHENOTYPES)
    _same_ids(ids, labs, FEATURES, LABELS)

    labels = []
    for sid in ids:
        line, fields = labs[sid]
        if fields[1] not in ("0", "1", ""):
            raise DataValidationError(f"{LABELS} line {line}: label must be 0, 1 or empty, got {fields[1]!r}")
        labels.append(-1 if fields[1] == "" else int(fields[1]))

    kinds = {}
    if config is not None:
        for spec in config.measures:
            if spec.name not in p_header[2:]:
                raise DataValidationError(f"{PHENOTYPES} line 1: no column for declared measure {spec.name!r}")
            kinds[spec.name] = spec.kind
    measures = {}
    for c, name in enumerate(p_header[2:], start=2):
        column = []
        for sid in ids:
            line, fields = phen[sid]
            raw = fields[c]
            if raw == "":
                if name in kinds:
                    raise DataValidationError(f"{PHENOTYPES} line {line}: missing value for measure {name!r}")
                column.append(None)
            elif kinds.get(name) == "quantitative":
                try:
                    column.append(float(raw))
                except ValueError:
                    raise DataValidationError(
                        f"{PHENOTYPES} line {line}: non-numeric value {raw!r} for quantitative measure {name!r}"
                    ) from None
            else:
                column.append(raw)
        measures[name] = column
    subjects = [phen[sid][1][1] for sid in ids]
    for sid, subj in zip(ids, subjects):
        if not subj:
            raise DataValidationError(f"{PHENOTYPES} line {phen[sid][0]}: empty subject_id")
    return Dataset(ids, subjects, X, labels, measures)


def write_dataset(dataset, out_dir):
    """Write ``dataset`` as the three CSV files; returns the paths."""
    os.makedirs(out_dir, exist_ok=True)
    paths = [os.path.join(out_dir, name) for name in (FEATURES, PHENOTYPES, LABELS)]
    names = list(dataset.measures)
    with open(paths[0], "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["sample_id"] + [f"f_{c}" for c in range(dataset.X.shape[1])])
        for sid, row in zip(dataset.sample_ids, dataset.X):
            w.writerow([sid] + [repr(float(v)) for v in row])
    with open(paths[1], "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["sample_id", "subject_id"] + names)
        for i, sid in enumerate(dataset.sample_ids):
            w.writerow([sid, dataset.subject_ids[i]] + [_fmt(dataset.measures[k][i]) for k in names])
    with open(paths[2], "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["sample_id", "label"])
        for sid, y in zip(dataset.sample_ids, dataset.labels):
            w.writerow([sid, "" if y < 0 else int(y)])
    return paths


def write_edges(W, path):
    """Edge list ``i,j,weight`` with ``i < j``, sorted by ``(i, j)``."""
    rows, cols, weights = to_edges(W)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["i", "j", "weight"])
        for i, j, x in zip(rows, cols, weights):
            w.writerow([int(i), int(j), repr(float(x))])


def read_edges(path, n):
    """Inverse of :func:`write_edges` for a graph on ``n`` nodes."""
    if not os.path.isfile(path):
        raise DataValidationError(f"missing file: {path}")
    name = os.path.basename(path)
    rows, cols, weights, seen = [], [], [], set()
    with open(path, newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh)
        if [h.strip() for h in next(reader, [])] != ["i", "j", "weight"]:
            raise DataValidationError(f"{name} line 1: header must be i, j, weight")
        for fields in reader:
            line = reader.line_num
            if not fields:
                continue
            try:
                i, j, x = int(fields[0]), int(fields[1]), float(fields[2])
            except (ValueError, IndexError):
                raise DataValidationError(f"{name} line {line}: expected integer i, j and a numeric weight") from None
            if not (0 <= i < n and 0 <= j < n) or i == j:
                raise DataValidationError(f"{name} line {line}: invalid node pair ({i}, {j}) for {n} nodes")
            if not (math.isfinite(x) and x >= 0):
                raise DataValidationError(f"{name} line {line}: weight must be finite and non-negative")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise DataValidationError(f"{name} line {line}: duplicate edge {key}")
            seen.add(key)
            rows.append(key[0])
            cols.append(key[1])
            weights.append(x)
    return from_edges(n, rows, cols, weights)


def read_config(path):
    """Parse a flat ``key = value`` file (``#`` comments) into an :class:`ExperimentConfig`."""
    if not os.path.isfile(path):
        raise ConfigError(f"missing config file: {path}")
    parser = configparser.ConfigParser(interpolation=None, comment_prefixes=("#", ";"), delimiters=("=",))
    parser.optionxform = str
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        parser.read_string("[config]\n" + text, source=path)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return ExperimentConfig.from_flat(dict(parser["config"]))


def write_config(config, path):
    lines = []
    for key, value in config.to_flat().items():
        if isinstance(value, list):
            value = ",".join(str(v) for v in value)
        lines.append(f"{key} = {'' if value is None else value}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def report_json(report):
    """Deterministic JSON text for a report (object or dict): sorted keys, full float precision."""
    doc = report.to_dict() if hasattr(report, "to_dict") else report
    return json.dumps(_plain(doc), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_report(report, path):
    text = report_json(report)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
    return text


def load_report(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)
