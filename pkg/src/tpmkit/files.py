"""CSV matrix files and JSON helpers.

Matrix file layout::

    # period_months=12
    ,AAA,AA,...,D
    AAA,0.8823,0.1176,...,0.0001
    ...

Probabilities are decimals. ``--`` marks an undefined cell (relative
difference tables). Canonical files written by :func:`write_matrix_csv`
use 10 significant digits and round-trip byte for byte.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal, InvalidOperation
from pathlib import Path

import numpy as np

from .errors import ParseError
from .matrix_core import TransitionMatrix
from .rating_schema import RatingSchema

UNDEFINED_CELL = "--"


@dataclass
class MatrixFile:
    """Parsed matrix file.

    Attributes
    ----------
    labels : tuple of str
    values : ndarray
        NaN where the file has ``--``.
    tolerance : ndarray
        Half a unit in the last displayed digit of each cell (0 for bare
        integers such as ``0`` or ``1``).
    meta : dict
        ``# key=value`` comment headers.
    """

    labels: tuple[str, ...]
    values: np.ndarray
    tolerance: np.ndarray
    meta: dict = field(default_factory=dict)
    texts: list = field(default_factory=list)

    @property
    def period_months(self) -> float:
        return float(self.meta.get("period_months", 12))

    def to_transition_matrix(self, scheme_id: str = "file") -> TransitionMatrix:
        if np.isnan(self.values).any():
            raise ParseError("matrix has undefined cells and cannot be a transition matrix")
        return TransitionMatrix(RatingSchema(self.labels, scheme_id), self.values, self.period_months)


def _cell_tolerance(text: str, d: Decimal) -> float:
    if "." not in text and "e" not in text.lower():
        return 0.0
    return 0.5 * 10.0 ** d.as_tuple().exponent


def parse_matrix_csv(text: str, source: str = "<string>") -> MatrixFile:
    meta: dict[str, str] = {}
    rows: list[tuple[int, list[str]]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if "=" in body:
                k, v = body.split("=", 1)
                meta[k.strip()] = v.strip()
            continue
        rows.append((lineno, next(csv.reader([line]))))
    if not rows:
        raise ParseError(f"{source}: no matrix rows", path=source)
    head_line, head = rows[0]
    labels = tuple(h.strip() for h in head[1:])
    n = len(labels)
    if n < 2:
        raise ParseError(f"{source}:{head_line}: header needs at least two labels", path=source, row=head_line)
    body = rows[1:]
    if len(body) != n:
        raise ParseError(
            f"{source}: expected {n} data rows for a square matrix, found {len(body)}", path=source
        )
    vals = np.empty((n, n))
    tol = np.empty((n, n))
    texts = [[""] * n for _ in range(n)]
    for r, (lineno, cells) in enumerate(body):
        if len(cells) != n + 1:
            raise ParseError(
                f"{source}:{lineno}: expected {n + 1} fields, found {len(cells)}", path=source, row=lineno
            )
        if cells[0].strip() != labels[r]:
            raise ParseError(
                f"{source}:{lineno}:1: row label {cells[0]!r} does not match column {labels[r]!r}",
                path=source, row=lineno, column=1,
            )
        for c, cell in enumerate(cells[1:]):
            s = cell.strip()
            texts[r][c] = s
            if s == UNDEFINED_CELL:
                vals[r, c], tol[r, c] = np.nan, np.nan
                continue
            try:
                d = Decimal(s)
                if not d.is_finite():
                    raise InvalidOperation
            except InvalidOperation:
                raise ParseError(
                    f"{source}:{lineno}:{c + 2}: cannot parse {cell!r} as a number",
                    path=source, row=lineno, column=c + 2,
                ) from None
            vals[r, c] = float(d)
            tol[r, c] = _cell_tolerance(s, d)
    if "period_months" in meta:
        try:
            p = float(meta["period_months"])
            if not p > 0:
                raise ValueError
        except ValueError:
            raise ParseError(f"{source}: bad period_months {meta['period_months']!r}", path=source) from None
    return MatrixFile(labels, vals, tol, meta, texts)


def round_half_away(x: float, exponent: int) -> Decimal:
    """Round ``x`` to ``10**exponent`` with ties away from zero."""
    return Decimal(repr(float(x))).quantize(Decimal(1).scaleb(exponent), rounding=ROUND_HALF_UP)


def displayed_agreement(values, table: MatrixFile) -> np.ndarray:
    """Mask of cells where ``values`` rounds to the table's printed number.

    Cells printed as bare integers must match exactly (within 1e-15) and
    ``--`` cells always agree.
    """
    values = np.asarray(values, dtype=float)
    ok = np.ones(values.shape, dtype=bool)
    for (i, j), text in np.ndenumerate(np.array(table.texts, dtype=object)):
        if text == UNDEFINED_CELL:
            continue
        d = Decimal(text)
        if table.tolerance[i, j] == 0.0:
            ok[i, j] = abs(values[i, j] - float(d)) <= 1e-15
        else:
            ok[i, j] = round_half_away(values[i, j], d.as_tuple().exponent) == d
    return ok


def read_matrix_csv(path) -> MatrixFile:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ParseError(f"{path}: {e.strerror}", path=str(path)) from None
    return parse_matrix_csv(text, str(path))


def load_transition_matrix(path, validate: bool = True) -> TransitionMatrix:
    tpm = read_matrix_csv(path).to_transition_matrix()
    return tpm.validate() if validate else tpm


def format_value(x: float) -> str:
    if isinstance(x, float) and math.isnan(x):
        return UNDEFINED_CELL
    s = format(float(x), ".10g")
    return "0" if s == "-0" else s


def format_matrix_csv(values, labels, period_months: float | None = None, meta: dict | None = None) -> str:
    buf = io.StringIO()
    items = dict(meta or {})
    if period_months is not None:
        items["period_months"] = format(float(period_months), "g")
    for k, v in items.items():
        buf.write(f"# {k}={v}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([""] + list(labels))
    for lab, row in zip(labels, np.asarray(values, dtype=float)):
        w.writerow([lab] + [format_value(v) for v in row])
    return buf.getvalue()


def write_matrix_csv(path, matrix, labels=None, period_months=None, meta=None) -> None:
    """Write a TransitionMatrix, GeneratorMatrix or raw array in canonical form."""
    labels = labels or getattr(matrix, "labels")
    if period_months is None:
        period_months = getattr(matrix, "period_months", None)
    values = getattr(matrix, "entries", matrix)
    atomic_write(path, format_matrix_csv(values, labels, period_months, meta))


def dumps_json(obj) -> str:
    return json.dumps(_plain(obj), indent=2, sort_keys=False, allow_nan=False) + "\n"


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return None if math.isnan(v) else v
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def atomic_write(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_bundle(directory, files: dict[str, str]) -> None:
    """Write several text files so that either all or none appear.

    Files are staged in a sibling temporary directory, then moved into
    place. A failure while staging leaves ``directory`` untouched.
    """
    directory = Path(directory)
    directory.parent.mkdir(parents=True, exist_ok=True)
    stage = Path(tempfile.mkdtemp(dir=directory.parent, prefix=f".{directory.name}."))
    try:
        for name, text in files.items():
            (stage / name).write_text(text)
        directory.mkdir(exist_ok=True)
        for name in files:
            os.replace(stage / name, directory / name)
    finally:
        for p in stage.glob("*"):
            p.unlink()
        stage.rmdir()
