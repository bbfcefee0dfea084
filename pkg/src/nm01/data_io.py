"""libsvm ingestion, label mapping, min/max scaling and CSV reports."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

__all__ = [
    "LibsvmParseError",
    "RawDataset",
    "ScaleParams",
    "parse_libsvm",
    "parse_libsvm_lines",
    "map_labels",
    "scale_features",
    "write_csv_report",
    "read_csv_report",
]


class LibsvmParseError(ValueError):
    """Malformed libsvm input; ``lineno`` is 1-based."""

    def __init__(self, lineno, msg):
        super().__init__(f"line {lineno}: {msg}")
        self.lineno = lineno


@dataclass(frozen=True)
class RawDataset:
    features: sp.csr_matrix  # (m, n), column j holds libsvm index j + 1
    labels: np.ndarray  # raw labels as read

    @property
    def m(self):
        return self.features.shape[0]

    @property
    def n(self):
        return self.features.shape[1]


@dataclass(frozen=True)
class ScaleParams:
    col_min: np.ndarray
    col_max: np.ndarray

    def apply(self, X):
        """Scale ``X`` (dense or sparse) column-wise into ``[-1, 1]``; returns a dense array."""
        X = X.toarray() if sp.issparse(X) else np.array(X, dtype=float)
        span = self.col_max - self.col_min
        const = span == 0
        out = 2.0 * (X - self.col_min) / np.where(const, 1.0, span) - 1.0
        out[:, const] = 0.0
        return out


def _parse_value(tok, lineno, what):
    try:
        val = float(tok)
    except ValueError:
        raise LibsvmParseError(lineno, f"bad {what} {tok!r}") from None
    if not math.isfinite(val):
        raise LibsvmParseError(lineno, f"non-finite {what} {tok!r}")
    return val


def parse_libsvm_lines(lines, n_features=None) -> RawDataset:
    """Parse an iterable of libsvm lines; see :func:`parse_libsvm`."""
    labels, indptr, indices, data = [], [0], [], []
    max_idx = 0
    for lineno, line in enumerate(lines, start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        # trailing "# ..." comments are common in hand-written files
        line = line.split("#", 1)[0]
        toks = line.split()
        labels.append(_parse_value(toks[0], lineno, "label"))
        prev = 0
        for tok in toks[1:]:
            idx_s, sep, val_s = tok.partition(":")
            if not sep:
                raise LibsvmParseError(lineno, f"expected index:value, got {tok!r}")
            try:
                idx = int(idx_s)
            except ValueError:
                raise LibsvmParseError(lineno, f"bad feature index {idx_s!r}") from None
            if idx < 1:
                raise LibsvmParseError(lineno, f"feature index {idx} is below 1")
            if idx <= prev:
                raise LibsvmParseError(lineno, f"feature index {idx} does not increase (after {prev})")
            prev = idx
            indices.append(idx - 1)
            data.append(_parse_value(val_s, lineno, "feature value"))
        max_idx = max(max_idx, prev)
        indptr.append(len(indices))
    if n_features is None:
        n_features = max_idx
    elif max_idx > n_features:
        raise ValueError(f"feature index {max_idx} exceeds declared n={n_features}")
    X = sp.csr_matrix(
        (np.asarray(data, dtype=float), np.asarray(indices, dtype=np.int64), np.asarray(indptr, dtype=np.int64)),
        shape=(len(labels), n_features),
    )
    return RawDataset(X, np.asarray(labels, dtype=float))


def parse_libsvm(path, n_features=None) -> RawDataset:
    """Read a libsvm file ``label idx:val idx:val ...`` with 1-based indices.

    Blank lines and lines starting with ``#`` are skipped. Missing
    features are zero; ``n`` is the largest index seen unless
    ``n_features`` is given.

    Raises
    ------
    LibsvmParseError
        On a malformed token or indices that are not strictly increasing.
    """
    with open(path, encoding="utf-8") as fh:
        return parse_libsvm_lines(fh, n_features)


def map_labels(raw) -> np.ndarray:
    """``+1`` where the raw label equals 1, ``-1`` everywhere else."""
    raw = raw.labels if isinstance(raw, RawDataset) else raw
    return np.where(np.asarray(raw, dtype=float) == 1, 1.0, -1.0)


def scale_features(raw, params: ScaleParams | None = None):
    """Column-wise affine map of values onto ``[-1, 1]``.

    Implicit zeros count as values, so a sparse column whose stored
    entries are all positive still sends 0 to -1. Constant columns map to
    0. Pass ``params`` from a training set to scale held-out data.

    Returns
    -------
    scaled : RawDataset
        Features as a CSR matrix (typically denser than the input).
    params : ScaleParams
    """
    X = raw.features.toarray()
    if params is None:
        if X.shape[0]:
            params = ScaleParams(X.min(axis=0), X.max(axis=0))
        else:
            params = ScaleParams(np.zeros(X.shape[1]), np.zeros(X.shape[1]))
    out = np.clip(params.apply(X), -1.0, 1.0) if X.size else X
    return RawDataset(sp.csr_matrix(out), raw.labels.copy()), params


def _fmt(key, val):
    if key == "time" or key.endswith("_time"):
        return f"{float(val):.6f}"
    if isinstance(val, (float, np.floating)):
        return repr(float(val))
    return str(val)


def write_csv_report(rows, path, fieldnames=None):
    """Write ``rows`` (dicts) as UTF-8 CSV with LF line endings.

    Columns default to the keys of the first row; time columns get six
    decimals and other floats keep full precision. With no rows and no
    ``fieldnames`` the file is empty.
    """
    rows = list(rows)
    if fieldnames is None:
        fieldnames = list(rows[0]) if rows else []
    with open(path, "w", encoding="utf-8", newline="") as fh:
        if not fieldnames:
            return
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(fieldnames)
        for row in rows:
            w.writerow([_fmt(k, row[k]) for k in fieldnames])


def read_csv_report(path):
    """Inverse of :func:`write_csv_report`; numeric-looking cells become int or float."""

    def conv(cell):
        for typ in (int, float):
            try:
                return typ(cell)
            except ValueError:
                pass
        return cell

    with open(path, encoding="utf-8", newline="") as fh:
        return [{k: conv(v) for k, v in row.items()} for row in csv.DictReader(fh)]
