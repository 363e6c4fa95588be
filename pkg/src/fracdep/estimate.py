"""Monte Carlo estimation, power-law exponent fitting, and LRD/SRD labels.

Replications are embarrassingly parallel: replication i always draws from
Seed(root, stream=i) and lands in slot i of a preallocated array, so the
aggregated results are byte-identical for any thread count.  Standard
errors of nonlinear statistics (correlations, variance ratios) come from a
seeded nonparametric bootstrap over replications.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from . import analytic
from .analytic import (FnbpParams, FppParams, NoiseParams, classify_exponent)
from .errors import DomainError, NumericalError
from .sim import PathSpec, SamplePath, Seed, increment_path, sample_process_path

__all__ = [
    "BOOTSTRAP_RESAMPLES",
    "ANALYTIC_CORR_FLOOR",
    "MonteCarloEstimate",
    "CorrelationCurve",
    "ExponentFit",
    "DeltaTable",
    "default_fit_cutoff",
    "analytic_curve",
    "mc_correlation",
    "mc_marginal_moments",
    "fit_power_law",
    "delta_empirical",
]

BOOTSTRAP_RESAMPLES = 200
ANALYTIC_CORR_FLOOR = 1e-12

ANALYTIC = "ANALYTIC"
EMPIRICAL = "EMPIRICAL"


@dataclass(frozen=True)
class MonteCarloEstimate:
    value: float
    std_error: float
    replications: int


@dataclass
class CorrelationCurve:
    """Corr[X(s), X(t)] over a grid of t, analytic or empirical."""

    s: float
    delta: Optional[float]
    t: np.ndarray
    corr: np.ndarray
    std_error: Optional[np.ndarray]
    source: str

    def __post_init__(self) -> None:
        self.t = np.asarray(self.t, dtype=float)
        self.corr = np.asarray(self.corr, dtype=float)
        if np.any(np.diff(self.t) <= 0.0):
            raise DomainError("curve t values must be strictly increasing")
        if self.std_error is not None:
            self.std_error = np.asarray(self.std_error, dtype=float)


@dataclass(frozen=True)
class ExponentFit:
    """Least-squares fit of log|corr| = log c - d log t."""

    d_hat: float
    c_hat: float
    r_squared: float
    label: str
    n_points: int


@dataclass
class DeltaTable:
    """Block-variance ratio Delta_n^(m) over a list of m values."""

    n: int
    m: np.ndarray
    value: np.ndarray
    std_error: Optional[np.ndarray]
    source: str


def default_fit_cutoff(s: float, delta: Optional[float]) -> float:
    """Default start of the asymptotic fit window: t >= 100 * max(s, delta)."""
    return 100.0 * max(s, delta or 0.0)


# ---------------------------------------------------------------------------
# Analytic correlation curves
# ---------------------------------------------------------------------------

def analytic_curve(kind: str, params, s: float, t_grid,
                   delta: Optional[float] = None,
                   cfg=None) -> CorrelationCurve:
    """Exact (fpp, fnbp) or model (fpn, fnbn) correlation over a t grid.

    ``cfg`` overrides the quadrature tolerances of the FNBP covariance.
    """
    t = np.asarray(t_grid, dtype=float)
    if kind == "fpp":
        if not isinstance(params, FppParams):
            raise DomainError("fpp curve needs FppParams")
        var_s = analytic.fpp_variance(params, s)
        corr = np.array([analytic.fpp_covariance(params, s, ti)
                         / math.sqrt(var_s * analytic.fpp_variance(params, ti))
                         for ti in t])
    elif kind == "fpn":
        noise = NoiseParams(params, delta)
        corr = np.array([analytic.fpn_correlation(noise, s, ti) for ti in t])
    elif kind == "fnbp":
        if not isinstance(params, FnbpParams):
            raise DomainError("fnbp curve needs FnbpParams")
        kw = {"cfg": cfg} if cfg is not None else {}
        corr = np.array([analytic.fnbp_correlation(params, s, ti, **kw)
                         for ti in t])
    elif kind == "fnbn":
        noise = NoiseParams(params, delta)
        corr = np.array([analytic.fnbn_correlation_asymptotic(noise, s, ti)
                         for ti in t])
    else:
        raise DomainError(f"unknown curve kind {kind!r}")
    return CorrelationCurve(s=s, delta=delta, t=t, corr=corr,
                            std_error=None, source=ANALYTIC)


# ---------------------------------------------------------------------------
# Monte Carlo engine
# ---------------------------------------------------------------------------

def _run_replications(spec: PathSpec, reps: int, seed: Seed, threads: int,
                      out: np.ndarray, extract) -> None:
    """Fill out[i] = extract(path of replication i); thread-count invariant."""

    def work(lo: int, hi: int) -> None:
        for i in range(lo, hi):
            out[i] = extract(sample_process_path(spec, seed.child(i)))

    if threads in (0, None):
        threads = 1
    if threads <= 1 or reps < 256:
        work(0, reps)
        return
    bounds = np.linspace(0, reps, threads + 1).astype(int)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(work, bounds[k], bounds[k + 1])
                   for k in range(threads)]
        for f in futures:
            f.result()


def _corr_columns(xs: np.ndarray, xt: np.ndarray) -> np.ndarray:
    """Pearson correlation of xs against every column of xt."""
    xs_c = xs - xs.mean()
    xt_c = xt - xt.mean(axis=0)
    num = xs_c @ xt_c
    den = math.sqrt(float(xs_c @ xs_c)) * np.sqrt(np.sum(xt_c * xt_c, axis=0))
    with np.errstate(invalid="ignore", divide="ignore"):
        return num / den


def mc_correlation(spec: PathSpec, s: float, t_grid, reps: int, seed: Seed,
                   delta: Optional[float] = None, threads: int = 0,
                   bootstrap: int = BOOTSTRAP_RESAMPLES) -> CorrelationCurve:
    """Sample correlation between X(s) and X(t) (or their width-delta
    increments) across replications, with bootstrap standard errors."""
    if reps < 100:
        raise DomainError(f"need reps >= 100, got {reps}")
    t = np.asarray(t_grid, dtype=float)
    t_min = float(t.min())
    if not (s < t_min):
        raise DomainError(f"s={s} must be below min(t_grid)={t_min}")
    if delta is not None and s + delta > t_min:
        raise DomainError(f"s+delta={s + delta} must not exceed min(t_grid)={t_min}")

    probe = np.concatenate(([s], t))
    if delta is not None:
        probe = np.concatenate((probe, probe + delta))
    sim_grid = np.unique(probe)
    sim_spec = replace(spec, t_grid=sim_grid)

    if delta is None:
        pick = np.searchsorted(sim_grid, np.concatenate(([s], t)))

        def extract(path: SamplePath) -> np.ndarray:
            return path.values[pick]
    else:
        base = np.concatenate(([s], t))

        def extract(path: SamplePath) -> np.ndarray:
            return increment_path(path, delta, times=base).values

    out = np.empty((reps, len(t) + 1))
    _run_replications(sim_spec, reps, seed, threads, out, extract)

    xs = out[:, 0]
    xt = out[:, 1:]
    if float(np.var(xs)) == 0.0:
        raise NumericalError(
            f"degenerate sample: X(s={s}) has zero variance across {reps} replications")
    corr = _corr_columns(xs, xt)

    boot_rng = seed.rng(0xB007)
    boot = np.empty((bootstrap, len(t)))
    for b in range(bootstrap):
        idx = boot_rng.integers(0, reps, reps)
        boot[b] = _corr_columns(xs[idx], xt[idx])
    std_error = np.nanstd(boot, axis=0, ddof=1)

    return CorrelationCurve(s=s, delta=delta, t=t, corr=corr,
                            std_error=std_error, source=EMPIRICAL)


def mc_marginal_moments(spec: PathSpec, reps: int, seed: Seed,
                        threads: int = 0):
    """Empirical mean and variance (with standard errors) at every grid time.

    Returns two lists of :class:`MonteCarloEstimate`, one for the means and
    one for the variances, aligned with ``spec.t_grid``.
    """
    if reps < 2:
        raise DomainError(f"need reps >= 2, got {reps}")
    out = np.empty((reps, len(spec.t_grid)))
    _run_replications(spec, reps, seed, threads, out,
                      lambda path: path.values)
    means = out.mean(axis=0)
    devs = out - means
    m2 = np.sum(devs ** 2, axis=0) / (reps - 1)
    m4 = np.mean(devs ** 4, axis=0)
    se_mean = np.sqrt(m2 / reps)
    # standard error of the sample variance via the fourth central moment
    var_of_var = (m4 - m2 ** 2 * (reps - 3) / (reps - 1)) / reps
    se_var = np.sqrt(np.maximum(var_of_var, 0.0))
    mean_est = [MonteCarloEstimate(float(means[i]), float(se_mean[i]), reps)
                for i in range(len(means))]
    var_est = [MonteCarloEstimate(float(m2[i]), float(se_var[i]), reps)
               for i in range(len(means))]
    return mean_est, var_est


# ---------------------------------------------------------------------------
# Exponent fitting
# ---------------------------------------------------------------------------

def fit_power_law(curve: CorrelationCurve,
                  t_min_cutoff: Optional[float] = None) -> ExponentFit:
    """Fit log|corr| = log c - d log t over the usable tail of the curve.

    Points below the fit floor (1e-12 for analytic curves, 2 standard
    errors for empirical ones) are discarded; at least 5 usable points are
    required.
    """
    if t_min_cutoff is None:
        t_min_cutoff = default_fit_cutoff(curve.s, curve.delta)
    mask = curve.t >= t_min_cutoff
    acorr = np.abs(curve.corr)
    if curve.source == ANALYTIC or curve.std_error is None:
        floor = np.full_like(acorr, ANALYTIC_CORR_FLOOR)
    else:
        floor = 2.0 * curve.std_error
    usable = mask & np.isfinite(acorr) & (acorr > floor)
    if not np.any(mask):
        raise DomainError(f"no points at or beyond t_min_cutoff={t_min_cutoff}")
    if np.any(mask) and not np.any(usable & mask):
        raise DomainError("all points beyond the cutoff are below the fit floor")
    n = int(np.sum(usable))
    if n < 5:
        raise DomainError(f"insufficient usable points for a fit: {n} < 5")
    x = np.log(curve.t[usable])
    y = np.log(acorr[usable])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    d_hat = -float(slope)
    return ExponentFit(d_hat=d_hat, c_hat=math.exp(float(intercept)),
                       r_squared=r2, label=classify_exponent(d_hat), n_points=n)


# ---------------------------------------------------------------------------
# Empirical block-variance ratio
# ---------------------------------------------------------------------------

def delta_empirical(params: FppParams, n: int, m_values: Sequence[int],
                    reps: int, seed: Seed, threads: int = 0,
                    stable_step: Optional[float] = None,
                    bootstrap: int = BOOTSTRAP_RESAMPLES) -> DeltaTable:
    """Delta_n^(m) estimated from simulated FPP paths on the integer grid.

    The same paths feed numerator and denominator (common random numbers);
    bootstrap over replications gives the standard error of the ratio.
    """
    if reps < 1000:
        raise DomainError(f"need reps >= 1000, got {reps}")
    if n < 1 or min(m_values) < 1:
        raise DomainError("need n >= 1 and all m >= 1")
    m_arr = np.asarray(sorted(m_values), dtype=int)
    t_max = int(n * m_arr.max())
    grid = np.arange(1, t_max + 1, dtype=float)
    spec = PathSpec("fpp", params, grid, stable_step=stable_step)

    incs = np.empty((reps, t_max))
    _run_replications(spec, reps, seed, threads, incs,
                      lambda path: np.diff(np.concatenate(([0.0], path.values))))

    def ratios(unit_incs: np.ndarray) -> np.ndarray:
        out = np.empty(len(m_arr))
        for k, m in enumerate(m_arr):
            lo, hi = (n - 1) * m, n * m
            window = unit_incs[:, lo:hi]
            num = float(np.var(window.sum(axis=1), ddof=1))
            den = float(np.sum(np.var(window, axis=0, ddof=1)))
            out[k] = num / den if den > 0 else math.nan
        return out

    value = ratios(incs)
    boot_rng = seed.rng(0xB007)
    boot = np.empty((bootstrap, len(m_arr)))
    for b in range(bootstrap):
        boot[b] = ratios(incs[boot_rng.integers(0, reps, reps)])
    std_error = np.nanstd(boot, axis=0, ddof=1)
    return DeltaTable(n=n, m=m_arr, value=value, std_error=std_error,
                      source=EMPIRICAL)
