"""Diagonal rescaling of a generator so implied annual PDs hit a target."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import BoundsError, CalibrationError, ValidationError
from .matrix_core import GeneratorMatrix, TransitionMatrix, expm_real, principal_log
from .pd_policy import PdVector
from .regularization import regularize_generator

MU_MAX = 100.0


@dataclass
class JltResult:
    """Outcome of a calibration.

    ``mu`` has one entry per state; the default entry is exactly 1.
    """

    mu: np.ndarray
    generator: GeneratorMatrix
    calibrated_annual: TransitionMatrix
    calibrated_monthly: TransitionMatrix
    target: np.ndarray
    implied_pd: np.ndarray
    iterations: int
    variant: str

    @property
    def discrepancy(self) -> np.ndarray:
        return self.implied_pd - self.target

    def to_dict(self) -> dict:
        lab = self.generator.labels
        return {
            "variant": self.variant,
            "iterations": self.iterations,
            "mu": dict(zip(lab, self.mu.tolist())),
            "target_pd": dict(zip(lab[:-1], self.target.tolist())),
            "calibrated_pd": dict(zip(lab[:-1], self.implied_pd.tolist())),
            "discrepancy": dict(zip(lab[:-1], self.discrepancy.tolist())),
            "calibrated_annual": self.calibrated_annual.entries.tolist(),
            "calibrated_monthly": self.calibrated_monthly.entries.tolist(),
        }


def implied_pd(lam: np.ndarray, mu: np.ndarray) -> np.ndarray:
    """Default column of ``exp(diag(mu, 1) @ lam)`` for the non-default rows."""
    u = np.append(mu, 1.0)
    return expm_real(u[:, None] * lam)[:-1, -1]


def jlt_generator(
    annual: TransitionMatrix, variant: Literal["regularized", "raw"] = "regularized"
) -> GeneratorMatrix:
    g = principal_log(annual)
    if variant == "raw":
        return g
    if variant == "regularized":
        return regularize_generator(g)[0] if not g.valid else g
    raise ValidationError(f"unknown generator variant {variant!r}")


def _newton(f, x0, tol, max_iter, mu_max):
    x = x0.copy()
    r = f(x)
    for it in range(1, max_iter + 1):
        if np.abs(r).max() < tol:
            return x, r, it - 1
        h = 1e-6 * np.maximum(np.abs(x), 1e-3)
        jac = np.empty((len(x), len(x)))
        for k in range(len(x)):
            e = np.zeros_like(x)
            e[k] = h[k]
            jac[:, k] = (f(x + e) - f(x - e)) / (2 * h[k])
        try:
            step = np.linalg.solve(jac, -r)
        except np.linalg.LinAlgError:
            raise CalibrationError("singular Jacobian", residuals=r.tolist()) from None
        t = 1.0
        for _ in range(40):
            cand = x + t * step
            if np.all(cand > 0) and np.all(cand <= mu_max):
                rc = f(cand)
                if np.abs(rc).max() < np.abs(r).max():
                    break
            t /= 2
        else:
            if np.any(x + step <= 0) or np.any(x + step > mu_max):
                raise BoundsError(
                    f"Newton step leaves (0, {mu_max}]; target PDs look incompatible with the matrix",
                    residuals=r.tolist(),
                )
            raise CalibrationError("line search failed", residuals=r.tolist())
        x, r = cand, rc
    if np.abs(r).max() < tol:
        return x, r, max_iter
    raise CalibrationError(
        f"no convergence in {max_iter} iterations, max residual {np.abs(r).max():.3g}",
        residuals=r.tolist(),
    )


def calibrate_jlt(
    annual: TransitionMatrix,
    target_pd: PdVector,
    tol: float = 1e-10,
    *,
    periods_per_year: int = 12,
    variant: Literal["regularized", "raw"] = "regularized",
    max_iter: int = 50,
    mu_max: float = MU_MAX,
) -> JltResult:
    """Find ``mu`` so that ``exp(diag(mu, 1) @ Lambda)`` has the target default column.

    ``Lambda`` is the regularized log of ``annual`` by default, which keeps
    the calibrated matrix stochastic for any positive ``mu``. The solver is
    damped Newton with a central-difference Jacobian.
    """
    if not tol > 0:
        raise ValidationError("tol must be positive")
    labels = annual.schema.non_default
    target = target_pd.aligned(labels)
    if np.any(target <= 0) or np.any(target >= 1):
        raise ValidationError("target PDs must lie strictly between 0 and 1")
    gen = jlt_generator(annual, variant)
    lam = np.asarray(gen.entries)

    def f(mu):
        return implied_pd(lam, mu) - target

    base = implied_pd(lam, np.ones(len(labels)))
    with np.errstate(divide="ignore", invalid="ignore"):
        mu0 = np.where(base > 0, target / base, 1.0)
    mu0 = np.clip(mu0, 0.01, 100.0)
    mu, resid, iters = _newton(f, mu0, tol, max_iter, mu_max)
    if np.any(mu <= 0) or np.any(mu > mu_max):
        raise BoundsError(f"mu {mu.tolist()} outside (0, {mu_max}]")
    u = np.append(mu, 1.0)
    ul = u[:, None] * lam
    ann = annual.replace(entries=expm_real(ul))
    mon = annual.replace(entries=expm_real(ul / periods_per_year), period_months=annual.period_months / periods_per_year)
    return JltResult(
        mu=u,
        generator=gen,
        calibrated_annual=ann,
        calibrated_monthly=mon,
        target=target,
        implied_pd=resid + target,
        iterations=iters,
        variant=variant,
    )
