"""Basel PD aggregation, PD overrides and row rescaling."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Mapping, Sequence

import numpy as np

from .errors import ConfigurationError, DegenerateInputError, ValidationError
from .matrix_core import TransitionMatrix

RESCALE_BOUNDS = (0.5, 1.5)


@dataclass(frozen=True)
class InternalPdTable:
    """Annual PD per internal rating id."""

    entries: Mapping[int, float]
    sector: str = ""

    def __post_init__(self):
        for k, v in self.entries.items():
            if not 0.0 <= v <= 1.0:
                raise ValidationError(f"internal rating {k}: PD {v} outside [0, 1]")


@dataclass(frozen=True, eq=False)
class PdVector:
    """Annual PDs keyed by rating label.

    The labels are usually all non-default states of a schema, but a subset
    is accepted: an override then leaves the other rows alone.
    """

    labels: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        labels = tuple(self.labels)
        vals = np.array(self.values, dtype=float).reshape(-1)
        vals.setflags(write=False)
        if len(labels) != len(vals):
            raise ValidationError("PD vector labels and values differ in length")
        if len(set(labels)) != len(labels):
            raise ValidationError(f"duplicate labels in PD vector {labels}")
        if np.any(~np.isfinite(vals)) or np.any(vals < 0) or np.any(vals > 1):
            raise ValidationError(f"PDs must lie in [0, 1], got {vals.tolist()}")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_mapping(cls, m: Mapping[str, float]) -> "PdVector":
        return cls(tuple(m), np.array([float(v) for v in m.values()]))

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.labels, self.values.tolist()))

    def __getitem__(self, label: str) -> float:
        return float(self.values[self.labels.index(label)])

    def __len__(self) -> int:
        return len(self.labels)

    def aligned(self, labels: Sequence[str]) -> np.ndarray:
        """Values reordered to ``labels``; every label must be present."""
        missing = [s for s in labels if s not in self.labels]
        if missing:
            raise ValidationError(f"PD vector has no entry for {missing}")
        return np.array([self[s] for s in labels])


@dataclass(frozen=True)
class PdOverridePolicy:
    mode: Literal["none", "floor", "replace"] = "none"
    source: PdVector | None = None

    def __post_init__(self):
        if self.mode not in ("none", "floor", "replace"):
            raise ConfigurationError(f"unknown PD override mode {self.mode!r}")
        if self.mode == "none" and self.source is not None:
            raise ConfigurationError("mode 'none' takes no PD source")
        if self.mode != "none" and self.source is None:
            raise ConfigurationError(f"mode {self.mode!r} needs a PD source")


def aggregate_basel_pd(
    table: InternalPdTable,
    buckets: Mapping[str, Sequence[int]],
    mode: Literal["average", "max"] = "average",
) -> PdVector:
    """Collapse internal-rating PDs to one PD per alphabetic rating.

    Examples
    --------
    >>> t = InternalPdTable({2: 1e-4, 3: 1.5e-4, 4: 2e-4})
    >>> aggregate_basel_pd(t, {"AA": [2, 3, 4]}, "max")["AA"]
    0.0002
    """
    if mode not in ("average", "max"):
        raise ConfigurationError(f"unknown aggregation mode {mode!r}")
    out = {}
    for label, members in buckets.items():
        if not members:
            raise ConfigurationError(f"bucket {label!r} is empty")
        missing = [m for m in members if m not in table.entries]
        if missing:
            raise ConfigurationError(f"bucket {label!r}: internal ratings {missing} have no PD")
        vals = np.array([table.entries[m] for m in members], dtype=float)
        out[label] = float(vals.mean() if mode == "average" else vals.max())
    return PdVector.from_mapping(out)


def apply_pd_override(tpm: TransitionMatrix, policy: PdOverridePolicy) -> TransitionMatrix:
    """Floor or replace the default column; rows may no longer sum to one."""
    if policy.mode == "none":
        return tpm
    src = policy.source
    non_default = tpm.schema.non_default
    extra = [s for s in src.labels if s not in non_default]
    if extra:
        raise ValidationError(f"PD vector labels {extra} are not non-default states of the matrix")
    a = np.array(tpm.entries)
    for label, pd in zip(src.labels, src.values):
        i = tpm.schema.index(label)
        a[i, -1] = max(a[i, -1], pd) if policy.mode == "floor" else pd
    return tpm.replace(entries=a)


def rescale_rows(tpm: TransitionMatrix, method: Literal["diagonal", "proportional"] = "diagonal") -> TransitionMatrix:
    """Restore unit row sums after a PD override.

    ``diagonal`` moves each row's excess onto its diagonal entry.
    ``proportional`` scales the non-default entries of a row by a common
    factor so that they fill ``1 - PD``.
    """
    a = np.array(tpm.entries)
    sums = a.sum(axis=1)
    lo, hi = RESCALE_BOUNDS
    bad = np.flatnonzero((sums < lo) | (sums > hi))
    if bad.size:
        i = int(bad[0])
        raise ValidationError(f"row {tpm.labels[i]} sums to {sums[i]:.6g}, outside [{lo}, {hi}]")
    rows = range(tpm.n - 1)
    if method == "diagonal":
        for i in rows:
            if sums[i] != 1.0:
                a[i, i] += 1.0 - sums[i]
            if a[i, i] < 0:
                raise DegenerateInputError(f"diagonal rescaling drives {tpm.labels[i]} negative")
    elif method == "proportional":
        for i in rows:
            mass = a[i, :-1].sum()
            if mass == 0:
                raise DegenerateInputError(f"row {tpm.labels[i]} has no non-default mass to rescale")
            if sums[i] != 1.0:
                a[i, :-1] *= (1.0 - a[i, -1]) / mass
    else:
        raise ConfigurationError(f"unknown rescale method {method!r}")
    return tpm.replace(entries=a)
