"""Core numeric types: point arrays, weighted sets, finite metrics, distances.

Datasets are plain ``float64`` arrays of shape ``(n, d)``; duplicates are kept
as separate rows so that tie handling and sampling mass treat co-located
points uniformly.
"""
from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

# Relative slack used wherever a paper inequality is certified in floating point.
REL_TOL = 1e-9

# Above this many rows generators switch to a multiplicity-compressed WeightedSet.
EXPLICIT_POINT_CAP = 10**6


class CostKind(enum.IntEnum):
    """Exponent applied to the Euclidean distance."""

    MEDIAN = 1
    MEANS = 2

    @classmethod
    def coerce(cls, value) -> "CostKind":
        if isinstance(value, cls):
            return value
        if isinstance(value, str):
            key = value.strip().lower()
            aliases = {"1": 1, "median": 1, "kmedian": 1, "k-median": 1,
                       "2": 2, "means": 2, "kmeans": 2, "k-means": 2}
            if key in aliases:
                return cls(aliases[key])
            raise ValueError(f"unknown cost kind {value!r}")
        try:
            return cls(int(value))
        except (TypeError, ValueError):
            raise ValueError(f"cost kind must be 1 or 2, got {value!r}") from None


def as_points(X, *, name: str = "X", allow_empty: bool = False) -> np.ndarray:
    """Validate ``X`` and return it as a C-contiguous ``(n, d)`` float64 array.

    One-dimensional input is read as ``n`` points on the real line.
    """
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    elif arr.ndim != 2:
        raise ValueError(f"{name} must be 1-D or 2-D, got shape {arr.shape}")
    if arr.shape[1] < 1:
        raise ValueError(f"{name} must have at least one coordinate")
    if not allow_empty and arr.shape[0] == 0:
        raise ValueError(f"{name} is empty")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite coordinates")
    return np.ascontiguousarray(arr)


def as_point(p, *, name: str = "point") -> np.ndarray:
    arr = np.asarray(p, dtype=np.float64).reshape(-1)
    if arr.size < 1:
        raise ValueError(f"{name} has no coordinates")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite coordinates")
    return arr


def distance(a, b, kind=CostKind.MEANS) -> float:
    """Euclidean distance between ``a`` and ``b`` raised to ``kind``.

    >>> distance((0, 0), (3, 4), 2)
    25.0
    """
    a = as_point(a, name="a")
    b = as_point(b, name="b")
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.size} vs {b.size}")
    kind = CostKind.coerce(kind)
    diff = a - b
    if kind == CostKind.MEDIAN:
        return math.hypot(*diff)  # scaled, so tiny nonzero gaps do not underflow to 0
    return float(np.dot(diff, diff))


def point_distances(X: np.ndarray, c: np.ndarray, kind: CostKind) -> np.ndarray:
    """Distances (to the power ``kind``) from every row of ``X`` to one point."""
    diff = X - c
    sq = np.einsum("ij,ij->i", diff, diff)
    return sq if kind == CostKind.MEANS else np.sqrt(sq)


def pairwise_distances(X: np.ndarray, C: np.ndarray, kind: CostKind,
                       *, chunk: int = 1 << 22) -> np.ndarray:
    """``(n, m)`` matrix of distances raised to ``kind``.

    Uses explicit differences rather than the ``|x|^2 + |c|^2 - 2x.c``
    expansion so that a point coinciding with a center gets exactly 0.
    """
    n, d = X.shape
    m = C.shape[0]
    if C.shape[1] != d:
        raise ValueError(f"dimension mismatch: {d} vs {C.shape[1]}")
    out = np.empty((n, m), dtype=np.float64)
    rows = max(1, chunk // max(1, m * d))
    for lo in range(0, n, rows):
        diff = X[lo:lo + rows, None, :] - C[None, :, :]
        np.einsum("ijk,ijk->ij", diff, diff, out=out[lo:lo + rows])
    if kind == CostKind.MEDIAN:
        np.sqrt(out, out=out)
    return out


@dataclass(frozen=True)
class WeightedSet:
    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        pts = as_points(self.points, name="points")
        w = np.asarray(self.weights, dtype=np.float64).reshape(-1)
        if w.shape[0] != pts.shape[0]:
            raise ValueError(f"{pts.shape[0]} points but {w.shape[0]} weights")
        if np.any(~np.isfinite(w)) or np.any(w < 0):
            raise ValueError("weights must be finite and nonnegative")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def total_weight(self) -> float:
        return float(self.weights.sum())

    def expand(self) -> np.ndarray:
        """Materialize integer weights as repeated rows."""
        counts = self.weights.astype(np.int64)
        if not np.array_equal(counts, self.weights):
            raise ValueError("only integer weights can be expanded")
        return np.repeat(self.points, counts, axis=0)


@dataclass(frozen=True)
class MetricViolation:
    kind: str  # "shape" | "negative" | "diagonal" | "asymmetry" | "triangle"
    indices: tuple
    detail: str

    def __str__(self) -> str:
        return f"{self.kind} at {self.indices}: {self.detail}"


@dataclass(frozen=True)
class FiniteMetric:
    """Distance matrix over ``n`` abstract points, indexed ``0..n-1``."""

    dist: np.ndarray
    labels: tuple = field(default=())

    def __post_init__(self):
        D = np.asarray(self.dist, dtype=np.float64)
        if D.ndim != 2 or D.shape[0] != D.shape[1] or D.shape[0] == 0:
            raise ValueError(f"distance matrix must be square and nonempty, got {D.shape}")
        D.setflags(write=False)
        object.__setattr__(self, "dist", D)

    @property
    def n(self) -> int:
        return self.dist.shape[0]

    def __len__(self) -> int:
        return self.n

    @classmethod
    def from_points(cls, X) -> "FiniteMetric":
        X = as_points(X)
        return cls(pairwise_distances(X, X, CostKind.MEDIAN))

    def restrict(self, idx) -> "FiniteMetric":
        idx = np.asarray(idx, dtype=np.intp)
        return FiniteMetric(self.dist[np.ix_(idx, idx)])


def validate_metric(m, *, rtol: float = REL_TOL) -> MetricViolation | None:
    """Return ``None`` when ``m`` is a metric, else the first violation found.

    Checks run in order: shape, negative entries, diagonal, symmetry,
    triangle inequality (relative tolerance ``rtol``).
    """
    D = m.dist if isinstance(m, FiniteMetric) else np.asarray(m, dtype=np.float64)
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        return MetricViolation("shape", tuple(D.shape), "matrix is not square")
    if not np.all(np.isfinite(D)):
        i, j = np.argwhere(~np.isfinite(D))[0]
        return MetricViolation("negative", (int(i), int(j)), "non-finite entry")
    neg = np.argwhere(D < 0)
    if neg.size:
        i, j = neg[0]
        return MetricViolation("negative", (int(i), int(j)), f"d={D[i, j]!r}")
    diag = np.flatnonzero(np.diag(D) != 0)
    if diag.size:
        i = int(diag[0])
        return MetricViolation("diagonal", (i, i), f"d={D[i, i]!r}")
    asym = np.argwhere(np.triu(D != D.T))
    if asym.size:
        i, j = asym[0]
        return MetricViolation("asymmetry", (int(i), int(j)),
                               f"d(i,j)={D[i, j]!r} but d(j,i)={D[j, i]!r}")
    n = D.shape[0]
    for j in range(n):
        # d(i,k) <= d(i,j) + d(j,k) for every i, k through intermediate j
        via = D[:, j, None] + D[None, j, :]
        bad = D > via * (1.0 + rtol) + 1e-300
        if bad.any():
            i, k = np.argwhere(bad)[0]
            return MetricViolation(
                "triangle", (int(i), int(j), int(k)),
                f"d({i},{k})={D[i, k]!r} > d({i},{j})+d({j},{k})={via[i, k]!r}")
    return None


# --- CSV formats -----------------------------------------------------------

def _data_rows(lines: Iterable[str]):
    dim = None
    rows = []
    for raw in lines:
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip().replace(" ", "")
            if body.startswith("dim="):
                dim = int(body[4:])
            continue
        rows.append([float(v) for v in line.split(",")])
    return dim, rows


def read_dataset(path) -> np.ndarray:
    """Read a point CSV (one point per row, optional ``# dim=<d>`` header)."""
    with open(path, encoding="utf-8") as fh:
        dim, rows = _data_rows(fh)
    if not rows:
        raise ValueError(f"{path}: no points")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise ValueError(f"{path}: ragged rows {sorted(widths)}")
    X = as_points(np.array(rows))
    if dim is not None and dim != X.shape[1]:
        raise ValueError(f"{path}: header says dim={dim} but rows have {X.shape[1]} columns")
    return X


def read_weighted(path) -> WeightedSet:
    """Read a weighted point CSV: coordinates followed by a weight column."""
    with open(path, encoding="utf-8") as fh:
        dim, rows = _data_rows(fh)
    if not rows:
        raise ValueError(f"{path}: no points")
    arr = np.array(rows, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] < 2:
        raise ValueError(f"{path}: need coordinates plus a weight column")
    if dim is not None and dim != arr.shape[1] - 1:
        raise ValueError(f"{path}: header says dim={dim} but rows have {arr.shape[1] - 1} coordinates")
    return WeightedSet(arr[:, :-1], arr[:, -1])


def _format_rows(arr: np.ndarray) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for row in arr:
        writer.writerow([repr(float(v)) for v in row])
    return buf.getvalue()


def format_dataset(X) -> str:
    X = as_points(X)
    return f"# dim={X.shape[1]}\n" + _format_rows(X)


def format_weighted(S: WeightedSet) -> str:
    return f"# dim={S.dim}\n" + _format_rows(np.column_stack([S.points, S.weights]))


def write_dataset(path, X) -> None:
    Path(path).write_text(format_dataset(X), encoding="utf-8")


def write_weighted(path, S: WeightedSet) -> None:
    Path(path).write_text(format_weighted(S), encoding="utf-8")


def read_metric(path) -> FiniteMetric:
    """Read a square distance-matrix CSV."""
    with open(path, encoding="utf-8") as fh:
        _, rows = _data_rows(fh)
    return FiniteMetric(np.array(rows, dtype=np.float64))


def write_metric(path, m: FiniteMetric) -> None:
    Path(path).write_text(_format_rows(m.dist), encoding="utf-8")
