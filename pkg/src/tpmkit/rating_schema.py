"""Rating alphabets, external-to-internal mapping and state absorption."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterable, Mapping

import numpy as np

from .errors import RatingLookupError, ValidationError

if TYPE_CHECKING:  # pragma: no cover
    from .matrix_core import TransitionMatrix


@dataclass(frozen=True)
class RatingSchema:
    """Ordered rating labels, best to worst, with the default state last.

    Parameters
    ----------
    labels : sequence of str
        Unique rating names. The last one is the absorbing default state.
    scheme_id : str
        Free-form name of the alphabet.
    """

    labels: tuple[str, ...]
    scheme_id: str = "custom"

    def __post_init__(self):
        labels = tuple(str(s) for s in self.labels)
        object.__setattr__(self, "labels", labels)
        if len(labels) < 2:
            raise ValidationError("a rating schema needs at least two states")
        if any(not s for s in labels):
            raise ValidationError("rating labels must be non-empty")
        if len(set(labels)) != len(labels):
            raise ValidationError(f"duplicate rating labels in {labels}")

    @property
    def default_index(self) -> int:
        return len(self.labels) - 1

    @property
    def default_label(self) -> str:
        return self.labels[-1]

    @property
    def non_default(self) -> tuple[str, ...]:
        return self.labels[:-1]

    def __len__(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise RatingLookupError(
                f"rating {label!r} not in schema {self.scheme_id!r} {self.labels}"
            ) from None

    def without(self, label: str) -> "RatingSchema":
        return RatingSchema(tuple(s for s in self.labels if s != label), self.scheme_id)


IRC7 = RatingSchema(("AAA", "AA", "A", "BBB", "BB", "B", "D"), "irc")
AGENCY8 = RatingSchema(("AAA", "AA", "A", "BBB", "BB", "B", "CCC", "D"), "agency")


@dataclass(frozen=True)
class RatingMap:
    """Lookup from (scheme, external label) to an internal rating.

    Parameters
    ----------
    entries : mapping
        ``{(scheme, external_label): internal_label}``.
    schema : RatingSchema
        Alphabet that every internal label must belong to.
    """

    entries: Mapping[tuple[str, str], str]
    schema: RatingSchema
    internal_ids: Mapping[int, str] = field(default_factory=dict)

    def __post_init__(self):
        bad = sorted({v for v in self.entries.values() if v not in self.schema.labels})
        if bad:
            raise ValidationError(f"internal labels {bad} are not in schema {self.schema.labels}")
        bad = sorted({v for v in self.internal_ids.values() if v not in self.schema.labels})
        if bad:
            raise ValidationError(f"internal labels {bad} are not in schema {self.schema.labels}")

    @classmethod
    def from_rows(cls, rows: Iterable[Mapping], schema: RatingSchema) -> "RatingMap":
        """Build from rows like ``{"internal": "BBB", "id": 9, "S&P": "BBB", "Moody's": "BAA2"}``.

        A single external label may appear on several rows (e.g. Moody's
        ``UNRATE``) as long as every occurrence maps to the same internal
        rating.
        """
        entries: dict[tuple[str, str], str] = {}
        ids: dict[int, str] = {}
        for row in rows:
            internal = row["internal"]
            if "id" in row:
                ids[int(row["id"])] = internal
            for scheme, label in row.items():
                if scheme in ("internal", "id"):
                    continue
                key = (scheme, str(label))
                if entries.setdefault(key, internal) != internal:
                    raise ValidationError(f"{key} maps to both {entries[key]} and {internal}")
        return cls(entries, schema, ids)

    def buckets(self) -> dict[str, list[int]]:
        """Internal rating ids grouped by internal label, in schema order."""
        out: dict[str, list[int]] = {s: [] for s in self.schema.labels}
        for rid in sorted(self.internal_ids):
            out[self.internal_ids[rid]].append(rid)
        return out


def map_external_rating(rmap: RatingMap, scheme: str, label: str) -> str:
    """Return the internal rating for an external ``(scheme, label)`` pair.

    Examples
    --------
    >>> from tpmkit.fixtures import load_rating_map
    >>> map_external_rating(load_rating_map(), "Moody's", "BAA2")
    'BBB'
    """
    try:
        return rmap.entries[(scheme, label)]
    except KeyError:
        raise RatingLookupError(f"no mapping for ({scheme!r}, {label!r})") from None


def absorb_state(tpm: "TransitionMatrix", state: str) -> "TransitionMatrix":
    """Merge ``state`` into the default state.

    The state's row is deleted, its column is added onto the default column
    and then deleted. Row sums are preserved exactly up to one rounding.
    """
    schema = tpm.schema
    k = schema.index(state)
    if k == schema.default_index:
        raise ValidationError("cannot absorb the default state into itself")
    if k == 0:
        raise ValidationError("cannot absorb the best rating")
    a = np.array(tpm.entries, dtype=float)
    a[:, -1] += a[:, k]
    keep = [i for i in range(len(schema)) if i != k]
    return tpm.replace(entries=a[np.ix_(keep, keep)], schema=schema.without(state))
