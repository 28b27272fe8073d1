"""Migration direction and rate statistics, yearly series and their correlations.

Ratings are indexed from best (0) to default (K - 1); an upgrade from
``i`` is a move to ``j < i`` and a downgrade a move to ``j > i``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Literal, Sequence

import numpy as np

from .errors import ParseError, UndefinedCorrelationError, ValidationError
from .matrix_core import TransitionMatrix

Kind = Literal["md", "nmd", "tmd", "ntmd", "tmr", "df"]
KINDS: tuple[str, ...] = ("md", "nmd", "tmd", "ntmd", "tmr", "df")


def migration_direction(row, i: int, kind: Kind = "tmd") -> float:
    """Evaluate one migration statistic on a TPM row.

    Parameters
    ----------
    row : array_like
        Row ``i`` of a transition matrix; the last entry is the default.
    i : int
        Zero-based index of the row's own rating.
    kind : {'md', 'nmd', 'tmd', 'ntmd', 'tmr', 'df'}
        ``md``/``nmd`` exclude default from the downgrades and condition on
        survival; ``tmd``/``ntmd`` count default as a downgrade; ``tmr`` is
        ``1 - p_ii``; ``df`` is the default probability. The normalized
        forms divide by the off-diagonal mass, which equals ``1 - p_ii``
        (or ``1 - p_ii - pd``) for a stochastic row.

    Examples
    --------
    >>> round(migration_direction([0.9169, 0.0732, 0.0099, 0, 0, 0, 0], 0, "tmd"), 4)
    -0.0831
    """
    p = np.asarray(row, dtype=float)
    k = len(p)
    if not 0 <= i < k:
        raise ValidationError(f"rating index {i} out of range for a row of length {k}")
    if i == k - 1:
        raise ValidationError("migration statistics are undefined for the default row")
    up = p[:i].sum()
    down_alive = p[i + 1:k - 1].sum()
    pd, stay = p[-1], p[i]
    if kind == "md":
        return float((up - down_alive) / (1.0 - pd)) if pd != 1.0 else 0.0
    # denominators are summed from the moving mass, not 1 - p_ii, which
    # loses digits to cancellation when p_ii is close to one
    if kind == "nmd":
        den = up + down_alive
        return 0.0 if den == 0 else float((up - down_alive) / den)
    tmd = up - down_alive - pd
    if kind == "tmd":
        return float(tmd)
    if kind == "ntmd":
        den = up + down_alive + pd
        return 0.0 if den == 0 else float(tmd / den)
    if kind == "tmr":
        return float(1.0 - stay)
    if kind == "df":
        return float(pd)
    raise ValidationError(f"unknown statistic {kind!r}")


def matrix_statistics(tpm: TransitionMatrix, kind: Kind) -> dict[str, float]:
    """One statistic for every non-default row."""
    return {lab: migration_direction(tpm.entries[i], i, kind) for i, lab in enumerate(tpm.labels[:-1])}


@dataclass(frozen=True, eq=False)
class MigrationSeries:
    """Yearly values of one statistic for one rating."""

    rating: str
    kind: str
    years: tuple
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).reshape(-1)
        if len(v) != len(self.years):
            raise ValidationError("years and values differ in length")
        lo = 0.0 if self.kind in ("tmr", "df") else -1.0
        if v.size and (v.min() < lo - 1e-12 or v.max() > 1.0 + 1e-12):
            raise ValidationError(f"{self.kind} values outside [{lo}, 1]")
        object.__setattr__(self, "years", tuple(self.years))
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return len(self.values)


def series_correlation(a: MigrationSeries, b: MigrationSeries) -> float:
    """Pearson correlation of two equally long series.

    Examples
    --------
    >>> s = lambda v: MigrationSeries("X", "tmd", tuple(range(len(v))), np.array(v) / 10)
    >>> round(series_correlation(s([1, 2, 3, 4, 5]), s([2, 4, 5, 4, 5])), 4)
    0.7746
    """
    x, y = np.asarray(a.values), np.asarray(b.values)
    if len(x) != len(y):
        raise ValidationError("series differ in length")
    if len(x) < 3:
        raise ValidationError("correlation needs at least three observations")
    # test constancy exactly; the centred sum of squares picks up rounding
    for s, v in ((a, x), (b, y)):
        if np.ptp(v) == 0.0:
            raise UndefinedCorrelationError(f"series for {s.rating} has zero variance")
    dx, dy = x - x.mean(), y - y.mean()
    sxx, syy = float(dx @ dx), float(dy @ dy)
    r = float(dx @ dy) / np.sqrt(sxx * syy)
    return float(np.clip(r, -1.0, 1.0))


def correlation_matrix(series: Sequence[MigrationSeries]) -> np.ndarray:
    n = len(series)
    out = np.eye(n)
    for i in range(n):
        for j in range(i + 1, n):
            out[i, j] = out[j, i] = series_correlation(series[i], series[j])
    return out


def build_series(history: Sequence[tuple], rating: int, kind: Kind) -> MigrationSeries:
    """Apply :func:`migration_direction` year by year.

    ``history`` is a sequence of ``(year, TransitionMatrix)`` pairs.
    """
    if not history:
        raise ValidationError("history is empty")
    years = [y for y, _ in history]
    vals = [migration_direction(t.entries[rating], rating, kind) for _, t in history]
    label = history[0][1].labels[rating]
    return MigrationSeries(label, kind, tuple(years), np.array(vals))


def read_series_csv(path, kind: str | None = None) -> list[MigrationSeries]:
    """Load series from a CSV with columns ``year, rating, <statistic>...``.

    With ``kind`` given only that column is read; otherwise the file must
    have exactly one statistic column. Values are decimals.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].lstrip().startswith("#")]
    if not rows:
        raise ParseError(f"{path}: empty file", path=str(path))
    head = [h.strip().lower() for h in rows[0]]
    if head[:2] != ["year", "rating"]:
        raise ParseError(f"{path}:1: header must start with 'year,rating'", path=str(path), row=1)
    stats = head[2:]
    if kind is None:
        if len(stats) != 1:
            raise ParseError(f"{path}:1: pick one of {stats}", path=str(path), row=1)
        kind = stats[0]
    if kind not in stats:
        raise ParseError(f"{path}:1: no column {kind!r}", path=str(path), row=1)
    col = 2 + stats.index(kind)
    data: dict[str, list] = {}
    for n, r in enumerate(rows[1:], start=2):
        try:
            data.setdefault(r[1].strip(), []).append((int(r[0]), float(r[col])))
        except (ValueError, IndexError):
            raise ParseError(f"{path}:{n}:{col + 1}: cannot parse {r!r}", path=str(path), row=n, column=col + 1) from None
    out = []
    for rating, pts in data.items():
        pts.sort()
        out.append(MigrationSeries(rating, kind, tuple(y for y, _ in pts), np.array([v for _, v in pts])))
    return out
