"""One-factor Gaussian portfolio model: closed forms and Monte Carlo.

Each entity's standardized asset return over a step is
``beta * X + sqrt(1 - beta**2) * eps`` with a common factor ``X``. An
entity in state ``i`` moves to state ``j`` when the normal CDF of its
return falls in the ``j``-th bucket of row ``i``, buckets ordered from
default (left tail) up to the best rating.

Given ``X`` the entities of a homogeneous pool migrate independently with
the same conditional probabilities, so the simulator draws the per-state
counts from one multinomial per state and step instead of one uniform per
entity. The result has the same law as the entity-level simulation.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np
from scipy.optimize import brentq
from scipy.special import ndtr, ndtri

from .errors import NoRootError, ValidationError
from .matrix_core import TransitionMatrix

BLOCK_SIZE = 8192
DEFAULT_PERCENTILES = (0.99, 0.999, 0.9995)
STATS = ("df", "tmd", "tmr")


@dataclass(frozen=True)
class FactorModel:
    """Homogeneous factor loading ``beta``; pairwise asset correlation is ``beta**2``."""

    beta: float

    def __post_init__(self):
        if not 0.0 <= self.beta < 1.0:
            raise ValidationError(f"beta must lie in [0, 1), got {self.beta}")

    @classmethod
    def from_rho(cls, rho: float) -> "FactorModel":
        if not 0.0 <= rho < 1.0:
            raise ValidationError(f"rho must lie in [0, 1), got {rho}")
        return cls(math.sqrt(rho))

    @classmethod
    def from_correlation(cls, value: float, convention: Literal["rho", "beta"] = "rho") -> "FactorModel":
        if convention == "rho":
            return cls.from_rho(value)
        if convention == "beta":
            return cls(value)
        raise ValidationError(f"unknown correlation convention {convention!r}")

    @property
    def rho(self) -> float:
        return self.beta ** 2


def _check_beta(beta: float) -> None:
    if not beta * beta < 1.0:
        raise ValidationError(f"beta**2 must be below 1, got beta={beta}")


def conditional_pd(pd: float, beta: float, x):
    """Default probability conditional on the factor value ``x``.

    Examples
    --------
    >>> round(float(conditional_pd(0.016, 0.3112, ndtri(0.02))), 4)
    0.0566
    """
    _check_beta(beta)
    if pd <= 0.0 or pd >= 1.0:
        if pd < 0.0 or pd > 1.0:
            raise ValidationError(f"pd must lie in [0, 1], got {pd}")
        return pd + 0.0 * np.asarray(x, dtype=float)
    return ndtr((ndtri(pd) - beta * np.asarray(x, dtype=float)) / math.sqrt(1.0 - beta * beta))


def direct_jump_loss_quantile(pd: float, beta: float, q: float) -> float:
    """Expected default fraction of a large pool at the factor's adverse ``q`` quantile."""
    if not 0.0 < q < 1.0:
        raise ValidationError(f"percentile must lie in (0, 1), got {q}")
    return float(conditional_pd(pd, beta, ndtri(1.0 - q)))


def conditional_expected_loss(exposures, lgd, pds, betas, x) -> float:
    """Expected portfolio loss given the factor, for heterogeneous entities."""
    e, l, p, b = (np.broadcast_to(np.asarray(v, dtype=float), np.shape(exposures)) for v in (exposures, lgd, pds, betas))
    cp = np.array([conditional_pd(pi, bi, x) for pi, bi in zip(p.ravel(), b.ravel())]).reshape(e.shape)
    return float(np.sum(e * l * cp))


def implied_correlation(pd: float, observed_df: float, q: float, *, grid: int = 4000) -> tuple[float, float]:
    """Loading ``beta`` that puts ``observed_df`` at the ``q`` quantile of the pool DF.

    The equation can have two roots in ``[0, 1)`` because the quantile
    eventually falls again as ``beta`` approaches one; the smallest root is
    returned.
    """
    for name, v in (("pd", pd), ("observed_df", observed_df), ("q", q)):
        if not 0.0 < v < 1.0:
            raise ValidationError(f"{name} must lie in (0, 1), got {v}")
    a, zq = ndtri(pd), ndtri(q)

    def f(b):
        return ndtr((a + b * zq) / math.sqrt(1.0 - b * b)) - observed_df

    # Phi(Phi^-1(pd)) reproduces pd only to a few ulps
    if abs(f(0.0)) <= 4 * np.finfo(float).eps * max(observed_df, 1e-300) + 1e-300:
        return 0.0, 0.0
    bs = np.linspace(0.0, 1.0 - 1e-9, grid)
    vals = np.array([f(b) for b in bs])
    sign = np.sign(vals)
    idx = np.flatnonzero(sign[:-1] * sign[1:] <= 0)
    if idx.size == 0:
        raise NoRootError(f"no beta in [0, 1) puts DF {observed_df} at the {q} quantile for pd {pd}")
    k = int(idx[0])
    if vals[k] == 0.0:
        beta = float(bs[k])
    else:
        beta = float(brentq(f, bs[k], bs[k + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200))
    return beta, beta * beta


# ------------------------------------------------------------------ Monte Carlo


def migration_thresholds(p: np.ndarray) -> np.ndarray:
    """Normal-quantile bucket edges per row, worst state first.

    Column ``k`` holds ``Phi^-1`` of the probability of ending in one of the
    ``k + 1`` worst states.
    """
    rev = np.asarray(p, dtype=float)[:, ::-1]
    cum = np.clip(np.cumsum(rev, axis=1), 0.0, 1.0)
    cum[:, -1] = 1.0
    return ndtri(cum)


def conditional_migration(thresholds: np.ndarray, beta: float, x: np.ndarray, rows=slice(None)) -> np.ndarray:
    """Migration probabilities given factor values ``x``; shape ``(len(x), rows, K)``."""
    z = thresholds[rows]
    s = math.sqrt(1.0 - beta * beta)
    c = ndtr((z[None] - beta * np.asarray(x)[:, None, None]) / s)
    c[..., -1] = 1.0
    probs = np.diff(c, axis=-1, prepend=0.0)
    np.maximum(probs, 0.0, out=probs)
    return probs[..., ::-1]


@dataclass(frozen=True)
class SimulationConfig:
    """Parameters of one simulation run.

    Parameters
    ----------
    tpm : TransitionMatrix
        Per-step matrix. ``direct_jump`` draws once from ``tpm ** steps``.
    initial_rating : str
    pool_size : int or None
        Entities in the pool. ``None`` simulates the infinitely granular
        pool, where realized fractions equal conditional probabilities.
    steps : int
        Number of steps to the horizon.
    beta : float
        Factor loading.
    """

    tpm: TransitionMatrix
    initial_rating: str
    pool_size: int | None = 100
    steps: int = 12
    mode: Literal["multi_step", "direct_jump"] = "multi_step"
    scenarios: int = 10_000
    seed: int = 0
    beta: float = 0.0
    percentiles: tuple[float, ...] = DEFAULT_PERCENTILES
    block_size: int = BLOCK_SIZE

    def __post_init__(self):
        if self.scenarios < 1:
            raise ValidationError("scenario count must be at least 1")
        if self.pool_size is not None and self.pool_size < 1:
            raise ValidationError("pool size must be at least 1")
        if self.steps < 1:
            raise ValidationError("steps must be at least 1")
        if self.mode not in ("multi_step", "direct_jump"):
            raise ValidationError(f"unknown mode {self.mode!r}")
        if self.block_size < 1:
            raise ValidationError("block size must be at least 1")
        for q in self.percentiles:
            if not 0.0 < q < 1.0:
                raise ValidationError(f"percentile {q} outside (0, 1)")
        _check_beta(self.beta)
        FactorModel(self.beta)
        idx = self.tpm.schema.index(self.initial_rating)
        if idx == self.tpm.schema.default_index:
            raise ValidationError("initial rating cannot be the default state")
        self.tpm.validate()


def order_statistic(values: np.ndarray, q: float) -> float:
    """Value at position ``ceil(q * S)`` (1-based) of the sorted sample."""
    if not 0.0 < q < 1.0:
        raise ValidationError(f"percentile {q} outside (0, 1)")
    s = np.sort(np.asarray(values))
    k = max(math.ceil(q * len(s)), 1)
    return float(s[k - 1])


@dataclass
class SimulationResult:
    """Per-scenario pool statistics at the horizon.

    Upper-tail percentiles are reported for DF and TMR. For TMD the adverse
    tail is the lower one, so its ``q`` entry is the ``1 - q`` order
    statistic.
    """

    config: SimulationConfig
    df: np.ndarray
    tmd: np.ndarray
    tmr: np.ndarray
    percentiles: dict = field(default_factory=dict)
    mean: dict = field(default_factory=dict)
    std_error: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in STATS:
            v = getattr(self, name)
            self.mean[name] = float(v.mean())
            self.std_error[name] = float(v.std(ddof=1) / math.sqrt(len(v))) if len(v) > 1 else float("nan")
            self.percentiles[name] = {
                q: order_statistic(v, 1.0 - q if name == "tmd" else q) for q in self.config.percentiles
            }

    def summary(self) -> dict:
        c = self.config
        return {
            "initial_rating": c.initial_rating,
            "mode": c.mode,
            "pool_size": c.pool_size,
            "steps": c.steps,
            "scenarios": c.scenarios,
            "seed": c.seed,
            "beta": c.beta,
            "mean": self.mean,
            "std_error": self.std_error,
            "percentiles": {k: {repr(q): v for q, v in d.items()} for k, d in self.percentiles.items()},
        }


def _block_bounds(cfg: SimulationConfig) -> list[tuple[int, int]]:
    b = cfg.block_size
    return [(s, min(s + b, cfg.scenarios)) for s in range(0, cfg.scenarios, b)]


def _run_block(cfg: SimulationConfig, p: np.ndarray, thresholds: np.ndarray, block: int, size: int) -> np.ndarray:
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(cfg.seed, spawn_key=(block,))))
    k = p.shape[0]
    i0 = cfg.tpm.schema.index(cfg.initial_rating)
    steps = 1 if cfg.mode == "direct_jump" else cfg.steps
    if cfg.pool_size is None:
        frac = np.zeros((size, k))
        frac[:, i0] = 1.0
        for _ in range(steps):
            x = rng.standard_normal(size)
            cm = conditional_migration(thresholds, cfg.beta, x)
            frac = np.einsum("sk,skj->sj", frac, cm)
        return frac
    counts = np.zeros((size, k), dtype=np.int64)
    counts[:, i0] = cfg.pool_size
    for _ in range(steps):
        x = rng.standard_normal(size)
        cm = conditional_migration(thresholds, cfg.beta, x)
        new = np.zeros_like(counts)
        new[:, -1] = counts[:, -1]
        for src in range(k - 1):
            n_src = counts[:, src]
            if not n_src.any():
                continue
            new += rng.multinomial(n_src, cm[:, src, :])
        counts = new
    return counts / cfg.pool_size


def simulate_pool(cfg: SimulationConfig, workers: int = 1) -> SimulationResult:
    """Simulate the pool's DF, TMD and TMR at the horizon.

    Scenarios are split into fixed-size blocks and block ``b`` draws from
    its own stream seeded by ``(seed, b)``, so the result does not depend
    on ``workers``.
    """
    if workers < 1:
        raise ValidationError("workers must be at least 1")
    p = np.asarray(cfg.tpm.entries)
    if cfg.mode == "direct_jump" and cfg.steps > 1:
        p = np.linalg.matrix_power(p, cfg.steps)
    thresholds = migration_thresholds(p)
    bounds = _block_bounds(cfg)

    def job(b):
        lo, hi = bounds[b]
        return _run_block(cfg, p, thresholds, b, hi - lo)

    if workers == 1:
        parts = [job(b) for b in range(len(bounds))]
    else:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(job, range(len(bounds))))
    frac = np.vstack(parts)
    i0 = cfg.tpm.schema.index(cfg.initial_rating)
    df = frac[:, -1]
    tmd = frac[:, :i0].sum(axis=1) - frac[:, i0 + 1:].sum(axis=1)
    tmr = 1.0 - frac[:, i0]
    return SimulationResult(cfg, df, np.clip(tmd, -1.0, 1.0), np.clip(tmr, 0.0, 1.0))


def percentile_table(
    results: dict[str, dict[str, SimulationResult]],
    stat: str,
    ratings: Sequence[str],
    historical: dict[str, float] | None = None,
) -> list[list[str]]:
    """Rows shaped like a percentile report: Historical Average, then DJ-q / MS-q rows.

    ``results`` maps rating -> mode -> result. Values are decimals rendered
    with ``repr``.
    """
    tag = {"direct_jump": "DJ", "multi_step": "MS"}
    rows = [[stat.upper()] + list(ratings)]
    if historical:
        rows.append(["Historical Average"] + [repr(float(historical[r])) for r in ratings])
    modes = [m for m in ("direct_jump", "multi_step") if any(m in results.get(r, {}) for r in ratings)]
    for m in modes:
        rows.append([f"{tag[m]} Average"] + [_cell(results, r, m, None, stat) for r in ratings])
        qs = next(results[r][m].config.percentiles for r in ratings if m in results.get(r, {}))
        for q in qs:
            rows.append([f"{tag[m]}-{q * 100:.2f}%"] + [_cell(results, r, m, q, stat) for r in ratings])
    return rows


def _cell(results, rating, mode, q, stat) -> str:
    res = results.get(rating, {}).get(mode)
    if res is None:
        return ""
    v = res.mean[stat] if q is None else res.percentiles[stat][q]
    return repr(float(v))
