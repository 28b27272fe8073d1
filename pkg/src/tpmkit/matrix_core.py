"""Transition and generator matrix types plus the dense kernels on them.

The principal logarithm is computed in real arithmetic by inverse scaling
and squaring: repeated Denman-Beavers square roots bring the matrix close
to the identity, where a diagonal Pade approximant (evaluated as a
Gauss-Legendre partial-fraction sum) is accurate to machine precision.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy import linalg as sla

from .errors import ConvergenceError, NoPrincipalLogError, NumericalError, ValidationError
from .rating_schema import RatingSchema

STOCHASTIC_TOL = 1e-9
GENERATOR_TOL = 1e-9

NormKind = Literal["one", "two", "inf", "frobenius"]


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class TransitionMatrix:
    """Square matrix of migration probabilities bound to a rating schema.

    Construction only checks shape; intermediate stages (for example a PD
    override before rescaling) legitimately produce rows that do not sum
    to one. Call :meth:`validate` where the full invariants must hold.

    Parameters
    ----------
    schema : RatingSchema
    entries : array_like, shape (N, N)
    period_months : float
        Length of the period the matrix covers.
    """

    schema: RatingSchema
    entries: np.ndarray
    period_months: float = 12.0

    def __post_init__(self):
        a = _frozen(self.entries)
        n = len(self.schema)
        if a.shape != (n, n):
            raise ValidationError(f"matrix shape {a.shape} does not match {n} rating labels")
        if not np.all(np.isfinite(a)):
            raise ValidationError("matrix has non-finite entries")
        if not self.period_months > 0:
            raise ValidationError("period must be positive")
        object.__setattr__(self, "entries", a)
        object.__setattr__(self, "period_months", float(self.period_months))

    @classmethod
    def from_array(cls, entries, labels=None, period_months: float = 12.0) -> "TransitionMatrix":
        a = np.asarray(entries, dtype=float)
        if labels is None:
            labels = [f"S{i + 1}" for i in range(a.shape[0] - 1)] + ["D"]
        return cls(RatingSchema(tuple(labels)), a, period_months)

    @property
    def labels(self) -> tuple[str, ...]:
        return self.schema.labels

    @property
    def n(self) -> int:
        return len(self.schema)

    @property
    def row_sums(self) -> np.ndarray:
        return self.entries.sum(axis=1)

    @property
    def default_column(self) -> np.ndarray:
        """Annual PDs of the non-default states."""
        return self.entries[:-1, -1].copy()

    @property
    def needs_rescaling(self) -> bool:
        return bool(np.any(np.abs(self.row_sums - 1.0) > 1e-12))

    def replace(self, *, entries=None, schema=None, period_months=None) -> "TransitionMatrix":
        return TransitionMatrix(
            self.schema if schema is None else schema,
            self.entries if entries is None else entries,
            self.period_months if period_months is None else period_months,
        )

    def problems(self, tol: float = STOCHASTIC_TOL) -> list[str]:
        """List every violated invariant (empty when the matrix is a valid TPM)."""
        a = self.entries
        out = []
        if a.min() < -tol or a.max() > 1 + tol:
            out.append(f"entries outside [0, 1] (min {a.min():.3g}, max {a.max():.3g})")
        worst = np.abs(self.row_sums - 1.0)
        if worst.max() > tol:
            i = int(worst.argmax())
            out.append(f"row {self.labels[i]} sums to {self.row_sums[i]:.12g}")
        unit = np.zeros(self.n)
        unit[-1] = 1.0
        if np.abs(a[-1] - unit).max() > tol:
            out.append("default row is not absorbing")
        return out

    def validate(self, tol: float = STOCHASTIC_TOL) -> "TransitionMatrix":
        probs = self.problems(tol)
        if probs:
            raise ValidationError("invalid transition matrix: " + "; ".join(probs))
        return self

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)

    def __repr__(self) -> str:
        return f"TransitionMatrix(labels={self.labels}, period_months={self.period_months:g})"


@dataclass(frozen=True, eq=False)
class GeneratorMatrix:
    """Candidate Markov generator (zero row sums, possibly negative off-diagonals).

    ``period_months`` is the period of the transition matrix the generator
    was derived from, so ``exp(s * G)`` covers ``s * period_months``.
    """

    schema: RatingSchema
    entries: np.ndarray
    period_months: float = 12.0

    def __post_init__(self):
        a = _frozen(self.entries)
        n = len(self.schema)
        if a.shape != (n, n):
            raise ValidationError(f"generator shape {a.shape} does not match {n} rating labels")
        object.__setattr__(self, "entries", a)

    @property
    def labels(self) -> tuple[str, ...]:
        return self.schema.labels

    @property
    def off_diagonal_min(self) -> float:
        a = self.entries
        mask = ~np.eye(len(a), dtype=bool)
        return float(a[mask].min()) if mask.any() else 0.0

    @property
    def valid(self) -> bool:
        return bool(
            self.off_diagonal_min >= -1e-12
            and np.abs(self.entries.sum(axis=1)).max() <= GENERATOR_TOL
        )

    def negative_off_diagonals(self) -> list[tuple[int, int, float]]:
        a = self.entries
        return [(int(i), int(j), float(a[i, j])) for i, j in np.argwhere(a < 0) if i != j]

    def replace(self, *, entries=None) -> "GeneratorMatrix":
        return GeneratorMatrix(self.schema, self.entries if entries is None else entries, self.period_months)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)


# ---------------------------------------------------------------- kernels


def _db_sqrt(a: np.ndarray, tol: float = 1e-13, max_iter: int = 60) -> np.ndarray | None:
    """Principal square root by the product-form Denman-Beavers iteration.

    Returns ``None`` if the relative residual ``|Y Y - A| / |A|`` does not
    drop below ``tol``.
    """
    eye = np.eye(len(a))
    y, m = a.copy(), a.copy()
    scale = max(np.abs(a).sum(axis=0).max(), np.finfo(float).tiny)
    for _ in range(max_iter):
        minv = np.linalg.inv(m)
        y = y @ (eye + minv) / 2.0
        m = (eye + (m + minv) / 2.0) / 2.0
        if np.abs(y @ y - a).sum(axis=0).max() / scale < tol:
            return y
    return None


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)
_GL_NODES = (_GL_NODES + 1.0) / 2.0
_GL_WEIGHTS = _GL_WEIGHTS / 2.0


def _log_near_identity(a: np.ndarray) -> np.ndarray:
    # [8/8] Pade of log(I + X) as Gauss-Legendre quadrature of X (I + tX)^-1
    x = a - np.eye(len(a))
    out = np.zeros_like(x)
    for t, w in zip(_GL_NODES, _GL_WEIGHTS):
        out += w * np.linalg.solve(np.eye(len(a)) + t * x, x)
    return out


def _log_eig(a: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eig(a.astype(complex))
    out = v @ np.diag(np.log(w)) @ np.linalg.inv(v)
    imag = np.abs(out.imag).max()
    if imag >= 1e-10:
        raise ConvergenceError(
            f"eigendecomposition fallback left imaginary parts up to {imag:.3g}", imag_max=float(imag)
        )
    return out.real


def logm_real(a: np.ndarray, *, tol: float = 1e-13) -> np.ndarray:
    """Principal logarithm of a real matrix with no eigenvalues on (-inf, 0].

    Raises
    ------
    NoPrincipalLogError
        If an eigenvalue lies on the closed negative real axis.
    ConvergenceError
        If both the square-root iteration and the eigen fallback fail.
    """
    a = np.asarray(a, dtype=float)
    ev = np.linalg.eigvals(a)
    scale = max(np.abs(ev).max(), 1.0)
    on_cut = (np.abs(ev.imag) <= 1e-12 * scale) & (ev.real <= 1e-14 * scale)
    if on_cut.any():
        raise NoPrincipalLogError(
            f"eigenvalue {ev[on_cut][0].real:.6g} lies on the closed negative real axis"
        )
    eye = np.eye(len(a))
    cur = a.copy()
    k = 0
    while np.abs(cur - eye).sum(axis=0).max() > 0.25:
        nxt = _db_sqrt(cur, tol)
        if nxt is None or k >= 40:
            return _log_eig(a)
        cur, k = nxt, k + 1
    out = (2.0 ** k) * _log_near_identity(cur)
    if not np.all(np.isfinite(out)):
        return _log_eig(a)
    return out


def _absorbing_rows(a: np.ndarray) -> np.ndarray:
    eye = np.eye(len(a))
    return np.all(a == eye, axis=1)


def principal_log(tpm: TransitionMatrix) -> GeneratorMatrix:
    """Principal matrix logarithm of a transition matrix.

    The result may have negative off-diagonal entries; check
    :attr:`GeneratorMatrix.valid`. Rows of ``tpm`` that are exact unit
    vectors (absorbing states) get an exactly zero log row.

    Examples
    --------
    >>> import numpy as np
    >>> t = TransitionMatrix.from_array([[0.9, 0.1], [0.0, 1.0]])
    >>> np.round(principal_log(t).entries, 6)
    array([[-0.105361,  0.105361],
           [ 0.      ,  0.      ]])
    """
    a = tpm.entries
    g = logm_real(a)
    g[_absorbing_rows(a)] = 0.0
    return GeneratorMatrix(tpm.schema, g, tpm.period_months)


def expm_real(a: np.ndarray) -> np.ndarray:
    out = sla.expm(np.asarray(a, dtype=float))
    if not np.all(np.isfinite(out)):
        raise NumericalError("matrix exponential overflowed")
    return out


def matrix_exp(g: GeneratorMatrix, scale: float = 1.0) -> TransitionMatrix:
    """``exp(scale * G)`` as a transition matrix over ``scale * period`` months."""
    if not scale > 0:
        raise ValidationError("scale must be positive")
    a = np.asarray(g.entries, dtype=float)
    if not np.all(np.isfinite(a)):
        raise NumericalError("generator has non-finite entries")
    return TransitionMatrix(g.schema, expm_real(scale * a), scale * g.period_months)


def matrix_power(tpm: TransitionMatrix, k: int) -> TransitionMatrix:
    if int(k) != k or k < 1:
        raise ValidationError(f"power must be a positive integer, got {k}")
    return tpm.replace(
        entries=np.linalg.matrix_power(tpm.entries, int(k)), period_months=tpm.period_months * k
    )


def fractional_root(tpm: TransitionMatrix, n: int) -> np.ndarray:
    """Raw ``n``-th root ``exp(log(tpm) / n)``; not necessarily stochastic."""
    if int(n) != n or n < 1:
        raise ValidationError(f"root order must be a positive integer, got {n}")
    return expm_real(principal_log(tpm).entries / n)


def norm(a, which: NormKind) -> float:
    """One of the four matrix norms used for error control.

    ``one`` is the maximum absolute column sum, ``inf`` the maximum absolute
    row sum, ``two`` the square root of the largest eigenvalue of ``A^T A``
    and ``frobenius`` the square root of ``trace(A^T A)``.
    """
    a = np.asarray(a, dtype=float)
    if which == "one":
        return float(np.abs(a).sum(axis=0).max())
    if which == "inf":
        return float(np.abs(a).sum(axis=1).max())
    if which == "two":
        lam = np.linalg.eigvalsh(a.T @ a)
        return float(np.sqrt(max(lam.max(), 0.0)))
    if which == "frobenius":
        return float(np.sqrt(np.trace(a.T @ a)))
    raise ValidationError(f"unknown norm {which!r}")


NORM_KINDS: tuple[NormKind, ...] = ("one", "two", "inf", "frobenius")
