"""Difference tables and norm summaries between two matrices."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .matrix_core import NORM_KINDS, norm

UNDEFINED = float("nan")


@dataclass
class ComparisonReport:
    """Absolute and relative differences ``A - B`` plus their norms.

    ``relative_diff`` holds NaN where the relative difference is undefined
    (``B`` is zero while ``A`` is not); use :attr:`relative_defined` rather
    than testing for NaN directly.
    """

    labels: tuple[str, ...]
    absolute_diff: np.ndarray
    relative_diff: np.ndarray
    norms: dict[str, float]
    metadata: dict = field(default_factory=dict)

    @property
    def relative_defined(self) -> np.ndarray:
        return ~np.isnan(self.relative_diff)

    def row_abs_sums(self) -> np.ndarray:
        return np.abs(self.absolute_diff).sum(axis=1)

    def to_dict(self) -> dict:
        rel = [[None if np.isnan(v) else float(v) for v in row] for row in self.relative_diff]
        return {
            "labels": list(self.labels),
            "norms": self.norms,
            "absolute_diff": self.absolute_diff.tolist(),
            "relative_diff": rel,
            "metadata": self.metadata,
        }


def _entries(m):
    return np.asarray(getattr(m, "entries", m), dtype=float)


def compare(a, b, *, per_element: bool = False, describe: tuple[str, str] = ("A", "B")) -> ComparisonReport:
    """Compare two matrices over the same rating schema.

    Parameters
    ----------
    a, b : TransitionMatrix or array_like
    per_element : bool
        Divide the Frobenius norm by the number of entries.
    describe : (str, str)
        Operand descriptions stored in the metadata.
    """
    la, lb = getattr(a, "labels", None), getattr(b, "labels", None)
    if la is not None and lb is not None and tuple(la) != tuple(lb):
        raise ValidationError(f"schema mismatch: {la} vs {lb}")
    x, y = _entries(a), _entries(b)
    if x.shape != y.shape or x.ndim != 2:
        raise ValidationError(f"shape mismatch: {x.shape} vs {y.shape}")
    diff = x - y
    rel = np.full_like(diff, UNDEFINED)
    nz = y != 0
    rel[nz] = diff[nz] / y[nz]
    rel[~nz & (diff == 0)] = 0.0
    norms = {k: norm(diff, k) for k in NORM_KINDS}
    if per_element:
        norms["frobenius"] /= diff.size
    labels = tuple(la or lb or [str(i) for i in range(len(x))])
    meta = {"a": describe[0], "b": describe[1], "frobenius_per_element": per_element}
    return ComparisonReport(labels, diff, rel, norms, meta)
