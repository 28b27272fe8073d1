"""Bundled reference tables and configurations.

Matrix tables live under ``tables/<label>.csv``; small tables and named PD
vectors are JSON files next to this module. References of the form
``fixture:<name>`` used in configs resolve here.
"""

from __future__ import annotations

import json
from functools import lru_cache
from pathlib import Path

from ..errors import ConfigurationError
from ..files import MatrixFile, read_matrix_csv
from ..matrix_core import TransitionMatrix
from ..pd_policy import InternalPdTable, PdVector
from ..rating_schema import RatingMap, RatingSchema

ROOT = Path(__file__).resolve().parent
TABLES = ROOT / "tables"
PIPELINES = ROOT / "pipelines"
PREFIX = "fixture:"


def table_labels() -> list[str]:
    return sorted(p.stem for p in TABLES.glob("*.csv"))


def table_path(label: str) -> Path:
    p = TABLES / f"{label}.csv"
    if not p.exists():
        raise ConfigurationError(f"no fixture table {label!r}")
    return p


def load_table(label: str) -> MatrixFile:
    """Parsed table including per-cell displayed-precision tolerances."""
    return read_matrix_csv(table_path(label))


def load_tpm(label: str, validate: bool = True) -> TransitionMatrix:
    tpm = load_table(label).to_transition_matrix(scheme_id=label)
    return tpm.validate() if validate else tpm


@lru_cache(maxsize=None)
def _json(name: str) -> dict:
    return json.loads((ROOT / name).read_text())


def load_json(name: str) -> dict:
    """Return a fresh copy of a bundled JSON document."""
    return json.loads(json.dumps(_json(name if name.endswith(".json") else name + ".json")))


def load_rating_map() -> RatingMap:
    doc = load_json("rating_map")
    return RatingMap.from_rows(doc["rows"], RatingSchema(tuple(doc["schema"]), "irc_agency"))


def pd_vector(name: str) -> PdVector:
    vecs = load_json("pd_vectors")
    if name not in vecs:
        raise ConfigurationError(f"no fixture PD vector {name!r}; have {sorted(vecs)}")
    return PdVector.from_mapping(vecs[name]["pd"])


def pd_table(name: str) -> tuple[InternalPdTable, dict[str, list[int]]]:
    doc = load_json("pd_tables")
    if name not in doc:
        raise ConfigurationError(f"no fixture PD table {name!r}")
    d = doc[name]
    table = InternalPdTable({int(k): float(v) for k, v in d["entries"].items()}, d.get("sector", name))
    return table, {k: list(v) for k, v in d["buckets"].items()}


def pipeline_config_path(name: str) -> Path:
    p = PIPELINES / f"{name}.json"
    if not p.exists():
        raise ConfigurationError(f"no fixture pipeline {name!r}")
    return p


def pipeline_names() -> list[str]:
    return sorted(p.stem for p in PIPELINES.glob("*.json"))
