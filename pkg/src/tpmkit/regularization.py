"""Generator regularization and sub-period matrices (generator and QOM routes)."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateInputError, ValidationError
from .matrix_core import (
    GeneratorMatrix,
    TransitionMatrix,
    expm_real,
    fractional_root,
    principal_log,
)

ROW_TOL = 1e-12


@dataclass
class RegularizationReport:
    """Audit trail of a regularization.

    Attributes
    ----------
    zeroed_entries : list of (row, col, value)
        Negative off-diagonal entries that were floored at zero.
    redistributed : ndarray
        Per-row mass removed by the weighted adjustment (the post-flooring
        row sum).
    row_sum_residuals : ndarray
        Row sums of the regularized generator.
    """

    labels: tuple[str, ...]
    zeroed_entries: list[tuple[int, int, float]] = field(default_factory=list)
    redistributed: np.ndarray = None
    row_sum_residuals: np.ndarray = None

    def __post_init__(self):
        n = len(self.labels)
        if self.redistributed is None:
            self.redistributed = np.zeros(n)
        if self.row_sum_residuals is None:
            self.row_sum_residuals = np.zeros(n)

    @property
    def changed(self) -> bool:
        return bool(self.zeroed_entries) or bool(np.any(self.redistributed != 0))

    def to_dict(self) -> dict:
        lab = self.labels
        return {
            "zeroed_entries": [
                {"row": lab[i], "col": lab[j], "value": v} for i, j, v in self.zeroed_entries
            ],
            "redistributed": dict(zip(lab, self.redistributed.tolist())),
            "row_sum_residuals": dict(zip(lab, self.row_sum_residuals.tolist())),
        }


def _row_ok(row: np.ndarray, i: int) -> bool:
    off = np.delete(row, i)
    return bool(off.min(initial=0.0) >= 0 and abs(row.sum()) <= ROW_TOL)


def regularize_generator(g: GeneratorMatrix) -> tuple[GeneratorMatrix, RegularizationReport]:
    """Floor negative off-diagonals at zero, then restore zero row sums.

    Each remaining nonzero entry of a row absorbs a share of the row's
    excess proportional to its magnitude:
    ``g_ij - |g_ij| * sum_j g_ij / sum_j |g_ij|``. Rows that already form a
    valid generator row are left bit-for-bit unchanged.
    """
    a = np.array(g.entries, dtype=float)
    if not np.all(np.isfinite(a)):
        raise ValidationError("generator has non-finite entries")
    n = len(a)
    report = RegularizationReport(g.labels)
    for i in range(n):
        row = a[i]
        if _row_ok(row, i):
            continue
        for j in range(n):
            if j != i and row[j] < 0:
                report.zeroed_entries.append((i, j, float(row[j])))
                row[j] = 0.0
        s = row.sum()
        if s == 0.0:
            continue
        off = np.delete(row, i)
        if not np.any(off > 0):
            raise DegenerateInputError(
                f"row {g.labels[i]} has only its diagonal left after flooring (row sum {s:.3g})"
            )
        row -= np.abs(row) * (s / np.abs(row).sum())
        report.redistributed[i] = s
    report.row_sum_residuals = a.sum(axis=1)
    return g.replace(entries=a), report


def subperiod_tpm(annual: TransitionMatrix, periods_per_year: int) -> tuple[TransitionMatrix, RegularizationReport]:
    """Sub-period matrix ``exp(G_hat / n)`` from the regularized log of ``annual``."""
    if int(periods_per_year) != periods_per_year or periods_per_year < 1:
        raise ValidationError("periods_per_year must be a positive integer")
    annual.validate()
    g_hat, report = regularize_generator(principal_log(annual))
    sub = expm_real(g_hat.entries / periods_per_year)
    return annual.replace(entries=sub, period_months=annual.period_months / periods_per_year), report


def project_row_to_simplex(y) -> np.ndarray:
    """Euclidean projection onto ``{x >= 0, sum(x) = 1}`` by sort and threshold.

    Examples
    --------
    >>> project_row_to_simplex([0.6, 0.6])
    array([0.5, 0.5])
    """
    y = np.asarray(y, dtype=float)
    if y.ndim != 1 or y.size == 0 or not np.all(np.isfinite(y)):
        raise ValidationError("projection needs a finite non-empty vector")
    u = np.sort(y)[::-1]
    css = np.cumsum(u) - 1.0
    k = np.arange(1, y.size + 1)
    rho = np.flatnonzero(u - css / k > 0)[-1]
    theta = css[rho] / (rho + 1)
    return np.maximum(y - theta, 0.0)


def qom_subperiod_tpm(annual: TransitionMatrix, periods_per_year: int) -> TransitionMatrix:
    """Sub-period matrix from the raw root with each row projected on the simplex."""
    annual.validate()
    y = fractional_root(annual, periods_per_year)
    x = np.vstack([project_row_to_simplex(r) for r in y])
    x[-1] = 0.0
    x[-1, -1] = 1.0
    return annual.replace(entries=x, period_months=annual.period_months / periods_per_year)
