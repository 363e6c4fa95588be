"""Seeded sample-path generation for all processes in the package.

Subordination identities drive everything: the FPP is a Poisson process on
an inverse-stable clock, N_b(t) = N(E_b(t)); the FNBP additionally runs
that clock on a gamma subordinator, Q_b(t) = N_b(Y(t)).  The inverse
stable clock is generated by first passage of a discretized stable
subordinator, which is the faithful construction for joint (multi-time)
laws; a bias-free marginal sampler (t/S)^b is kept separately for
single-time validation.

Draw order within a replication is fixed (gamma clock, then stable chunks,
then Poisson thinning), so a (root, stream) pair reproduces a path
bit-for-bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .analytic import FnbpParams, FppParams, GammaParams
from .errors import DomainError, GridError, NumericalError, ResourceCapError

__all__ = [
    "PROCESSES",
    "Seed",
    "SamplePath",
    "PathSpec",
    "sample_positive_stable",
    "sample_inverse_stable_marginal",
    "sample_inverse_stable_path",
    "sample_gamma_path",
    "sample_poisson_count",
    "sample_process_path",
    "increment_path",
]

PROCESSES = ("poisson", "gamma", "inv_stable", "fpp", "nb", "fnbp")

# default resolution of the first-passage inversion: expected number of
# stable steps needed to exceed the largest requested time
DEFAULT_TARGET_STEPS = 10_000
DEFAULT_MAX_STEPS = 20_000_000


@dataclass(frozen=True)
class Seed:
    """Reproducibility handle: (root, stream) fully determines a replication."""

    root: int
    stream: int = 0

    def __post_init__(self) -> None:
        if not (0 <= self.root < 2 ** 64):
            raise DomainError(f"root must be a 64-bit unsigned int, got {self.root}")
        if not (0 <= self.stream < 2 ** 64):
            raise DomainError(f"stream must be a 64-bit unsigned int, got {self.stream}")

    def rng(self, *extra: int) -> np.random.Generator:
        return np.random.default_rng(
            np.random.SeedSequence(entropy=self.root,
                                   spawn_key=(self.stream, *extra)))

    def child(self, stream: int) -> "Seed":
        return Seed(self.root, stream)


@dataclass
class SamplePath:
    """A process evaluated on a strictly increasing time grid.

    Paths of the processes themselves are nondecreasing; increment paths
    (built by :func:`increment_path`) carry nonnegative but non-monotone
    values and set ``nondecreasing=False``.
    """

    times: np.ndarray
    values: np.ndarray
    nondecreasing: bool = True

    def __post_init__(self) -> None:
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.times.shape != self.values.shape or self.times.ndim != 1:
            raise DomainError("times and values must be 1-d arrays of equal length")
        if np.any(np.diff(self.times) <= 0.0):
            raise DomainError("times must be strictly increasing")
        if len(self.values) and self.values[0] < 0:
            raise DomainError("values must be nonnegative")
        if self.nondecreasing and np.any(np.diff(self.values) < 0.0):
            raise DomainError("values must be nondecreasing")


@dataclass(frozen=True)
class PathSpec:
    """What to simulate: process kind, parameters, and evaluation grid."""

    process: str
    params: Union[FppParams, FnbpParams, GammaParams]
    t_grid: np.ndarray
    stable_step: Optional[float] = None
    max_steps: int = DEFAULT_MAX_STEPS

    def __post_init__(self) -> None:
        if self.process not in PROCESSES:
            raise DomainError(f"unknown process {self.process!r}; choose from {PROCESSES}")
        grid = np.asarray(self.t_grid, dtype=float)
        if grid.ndim != 1 or len(grid) == 0:
            raise DomainError("t_grid must be a nonempty 1-d array")
        if np.any(grid <= 0.0) or np.any(np.diff(grid) <= 0.0):
            raise DomainError("t_grid must be strictly increasing and positive")
        object.__setattr__(self, "t_grid", grid)
        if self.stable_step is not None and not (self.stable_step > 0.0):
            raise DomainError(f"stable_step must be > 0, got {self.stable_step}")
        needs_fpp = self.process in ("fpp", "inv_stable")
        if needs_fpp and not isinstance(self.params, FppParams):
            raise DomainError(f"process {self.process!r} needs FppParams")
        if self.process in ("nb", "fnbp") and not isinstance(self.params, FnbpParams):
            raise DomainError(f"process {self.process!r} needs FnbpParams")
        if self.process == "gamma" and not isinstance(self.params, GammaParams):
            raise DomainError("process 'gamma' needs GammaParams")
        if self.process == "poisson" and not isinstance(self.params, FppParams):
            raise DomainError("process 'poisson' needs FppParams (rate = lam)")


# ---------------------------------------------------------------------------
# Elementary samplers
# ---------------------------------------------------------------------------

def sample_positive_stable(beta: float, rng: np.random.Generator, size=None):
    """Draw S > 0 with Laplace transform E[exp(-u S)] = exp(-u^beta), 0 < beta < 1.

    Kanter's construction: with V uniform on (0,1) and W unit exponential,

        S = sin(b pi V) sin((1-b) pi V)^{(1-b)/b}
            / ( sin(pi V)^{1/b} W^{(1-b)/b} ),

    evaluated in log space (the law is heavy-tailed; rare draws overflow to
    inf, which downstream first-passage logic treats as an immediate jump
    past every level).
    """
    if not (0.0 < beta < 1.0):
        raise DomainError(f"beta must be in (0, 1), got {beta}")
    scalar = size is None
    n = 1 if scalar else size
    v = rng.random(n)
    v = np.maximum(v, 1e-300)  # open interval (0, 1)
    w = np.maximum(rng.standard_exponential(n), 1e-300)
    r = (1.0 - beta) / beta
    with np.errstate(over="ignore"):
        log_s = (np.log(np.sin(beta * math.pi * v))
                 + r * np.log(np.sin((1.0 - beta) * math.pi * v))
                 - np.log(np.sin(math.pi * v)) / beta
                 - r * np.log(w))
        s = np.exp(log_s)
    return float(s[0]) if scalar else s


def sample_inverse_stable_marginal(beta: float, t: float,
                                   rng: np.random.Generator, size=None):
    """Single-time draw of the inverse stable clock: E_b(t) = (t/S)^b.

    Bias-free marginal sampler; E[E_b(t)] = t^b / Gamma(1+b).  beta == 1 is
    the degenerate clock E_1(t) = t.
    """
    if t < 0.0:
        raise DomainError(f"t must be >= 0, got {t}")
    scalar = size is None
    if beta == 1.0:
        out = np.full(1 if scalar else size, float(t))
        return float(out[0]) if scalar else out
    if t == 0.0:
        out = np.zeros(1 if scalar else size)
        return float(out[0]) if scalar else out
    s = sample_positive_stable(beta, rng, size=1 if scalar else size)
    with np.errstate(divide="ignore"):
        out = np.asarray(t / s, dtype=float) ** beta
    return float(out[0]) if scalar else out


def _auto_step(beta: float, t_char: float, target_steps: int = DEFAULT_TARGET_STEPS) -> float:
    """Step so the expected number of stable steps to exceed t_char is ~target."""
    return t_char ** beta / math.exp(math.lgamma(1.0 + beta)) / target_steps


def _first_passage(beta: float, targets: np.ndarray, step: float,
                   rng: np.random.Generator, max_steps: int) -> np.ndarray:
    """E_b at nondecreasing targets via first passage of a discretized
    stable subordinator D(k*step) = sum step^{1/b} S_k."""
    t_max = float(targets[-1])
    if t_max == 0.0:
        return np.zeros_like(targets)
    expected = max(16, int(t_max ** beta / math.exp(math.lgamma(1.0 + beta)) / step))
    chunk = int(min(max(1024, 2 * expected), 2 ** 20))
    scale = step ** (1.0 / beta)
    if scale == 0.0:
        raise NumericalError(f"stable_step={step} underflows step^(1/beta); increase it")
    segments = []
    total = 0
    level = 0.0
    while level <= t_max:
        if total >= max_steps:
            raise ResourceCapError(
                f"first passage needed more than max_steps={max_steps} steps")
        n = min(chunk, max_steps - total)
        with np.errstate(over="ignore", invalid="ignore"):
            seg = np.cumsum(scale * sample_positive_stable(beta, rng, size=n)) + level
        segments.append(seg)
        total += n
        level = float(seg[-1])
        if math.isnan(level):
            raise NumericalError("stable increment sum became NaN")
    d_path = np.concatenate(segments) if len(segments) > 1 else segments[0]
    k = np.searchsorted(d_path, targets, side="right")
    return (k + 1).astype(float) * step


def sample_inverse_stable_path(beta: float, t_grid, stable_step: Optional[float],
                               rng: np.random.Generator,
                               max_steps: int = DEFAULT_MAX_STEPS) -> SamplePath:
    """Joint draw of the inverse stable clock on a strictly increasing grid."""
    grid = np.asarray(t_grid, dtype=float)
    if np.any(np.diff(grid) <= 0.0) or np.any(grid < 0.0):
        raise DomainError("t_grid must be strictly increasing and nonnegative")
    if beta == 1.0:
        return SamplePath(grid, grid.copy())
    if not (0.0 < beta < 1.0):
        raise DomainError(f"beta must be in (0, 1], got {beta}")
    step = stable_step if stable_step is not None else _auto_step(beta, float(grid[-1]))
    values = _first_passage(beta, grid, step, rng, max_steps)
    return SamplePath(grid, values)


def sample_gamma_path(gamma: GammaParams, t_grid, rng: np.random.Generator) -> SamplePath:
    """Gamma subordinator on a grid via independent Gamma(rate a, shape p dt) increments."""
    grid = np.asarray(t_grid, dtype=float)
    if np.any(grid <= 0.0) or np.any(np.diff(grid) <= 0.0):
        raise DomainError("t_grid must be strictly increasing and positive")
    dt = np.diff(np.concatenate(([0.0], grid)))
    incs = rng.gamma(shape=gamma.p * dt, scale=1.0 / gamma.alpha)
    return SamplePath(grid, np.cumsum(incs))


def sample_poisson_count(mu: float, rng: np.random.Generator) -> int:
    """One Poisson draw with mean mu = rate * duration >= 0."""
    if not (mu >= 0.0) or not math.isfinite(mu):
        raise DomainError(f"rate*duration must be finite and >= 0, got {mu}")
    return int(rng.poisson(mu))


# ---------------------------------------------------------------------------
# Composite processes
# ---------------------------------------------------------------------------

def _poisson_compose(lam: float, clock: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Counts of a rate-lam Poisson process evaluated at nondecreasing clock times."""
    dt = np.diff(np.concatenate(([0.0], clock)))
    if np.any(~np.isfinite(dt)):
        raise NumericalError("clock increments overflowed; decrease stable_step")
    return np.cumsum(rng.poisson(lam * dt)).astype(float)


def sample_process_path(spec: PathSpec, seed: Seed) -> SamplePath:
    """One replication of the requested process on spec.t_grid."""
    rng = seed.rng()
    grid = spec.t_grid
    kind = spec.process
    if kind == "poisson":
        return SamplePath(grid, _poisson_compose(spec.params.lam, grid, rng))
    if kind == "gamma":
        return sample_gamma_path(spec.params, grid, rng)
    if kind == "inv_stable":
        return sample_inverse_stable_path(spec.params.beta, grid,
                                          spec.stable_step, rng, spec.max_steps)
    if kind == "fpp":
        clock = sample_inverse_stable_path(spec.params.beta, grid,
                                           spec.stable_step, rng, spec.max_steps)
        return SamplePath(grid, _poisson_compose(spec.params.lam, clock.values, rng))
    if kind == "nb":
        gamma_clock = sample_gamma_path(spec.params.gamma, grid, rng)
        return SamplePath(grid, _poisson_compose(spec.params.fpp.lam,
                                                 gamma_clock.values, rng))
    if kind == "fnbp":
        fpp = spec.params.fpp
        gamma_clock = sample_gamma_path(spec.params.gamma, grid, rng)
        y = gamma_clock.values
        if fpp.beta == 1.0:
            stable_clock = y
        else:
            step = spec.stable_step
            if step is None:
                step = _auto_step(fpp.beta, float(max(y[-1], 1e-300)))
            stable_clock = _first_passage(fpp.beta, y, step, rng, spec.max_steps)
        return SamplePath(grid, _poisson_compose(fpp.lam, stable_clock, rng))
    raise DomainError(f"unknown process {kind!r}")


def increment_path(path: SamplePath, delta: float, times=None) -> SamplePath:
    """Width-delta increments X(t+delta) - X(t) read off an existing path.

    ``times`` selects the left endpoints (default: every grid time whose
    partner t+delta is also on the grid).  Raises :class:`GridError` when a
    requested pair is absent.
    """
    if not (delta > 0.0):
        raise DomainError(f"delta must be > 0, got {delta}")
    grid = path.times
    tol = 1e-9 * max(1.0, float(grid[-1]))

    def _locate(pts: np.ndarray) -> np.ndarray:
        idx = np.searchsorted(grid, pts)
        idx = np.clip(idx, 0, len(grid) - 1)
        left_ok = np.abs(grid[idx] - pts) <= tol
        idx_m = np.clip(idx - 1, 0, len(grid) - 1)
        use_left = ~left_ok & (np.abs(grid[idx_m] - pts) <= tol)
        idx = np.where(use_left, idx_m, idx)
        if np.any(np.abs(grid[idx] - pts) > tol):
            missing = pts[np.abs(grid[idx] - pts) > tol]
            raise GridError(f"times not on the path grid: {missing[:5]}")
        return idx

    if times is None:
        i_hi = np.searchsorted(grid, grid + delta)
        i_hi = np.clip(i_hi, 0, len(grid) - 1)
        has_partner = np.abs(grid[i_hi] - (grid + delta)) <= tol
        if not np.any(has_partner):
            raise GridError(f"no time on the grid has a partner at +{delta}")
        base = grid[has_partner]
        hi = i_hi[has_partner]
        lo = np.arange(len(grid))[has_partner]
    else:
        base = np.asarray(times, dtype=float)
        lo = _locate(base)
        hi = _locate(base + delta)
    vals = path.values[hi] - path.values[lo]
    return SamplePath(base, vals, nondecreasing=False)
