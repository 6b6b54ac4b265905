"""Quenched and annealed return times, recurrence rates and the random Kac check.

Return times are computed by the kernels in one orbit pass for a whole
decreasing grid of radii: the unresolved radii always form a suffix of the
grid, so each step costs one distance and (usually) one comparison.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .parallel import run_rows
from .phase_space import InvalidInputError, distance, distances, point
from .rng import STREAM_NOISE, STREAM_POINTS, derive_seeds
from .slopes import InsufficientDataError, check_grid, fit_exponent
from .systems import NoiseStream, sample_stationary_points

DEFAULT_P = 8
DEFAULT_N_MAX_1D = 10**7
DEFAULT_N_MAX_TORUS = 10**6
REJECTION_BUDGET = 10**6


def default_n_max(system):
    return DEFAULT_N_MAX_TORUS if system.space.dim == 2 else DEFAULT_N_MAX_1D


@dataclass(frozen=True)
class ReturnTimeQuery:
    x: np.ndarray
    r: float
    p: int = 0
    n_max: int = DEFAULT_N_MAX_1D

    def validate(self, space):
        if not self.r > 0:
            raise InvalidInputError("radius must be positive")
        if int(self.p) != self.p or self.p < 0:
            raise InvalidInputError("p must be a nonnegative integer")
        if int(self.n_max) != self.n_max or self.n_max <= self.p:
            raise InvalidInputError("n_max must be an integer greater than p")
        return point(space, self.x)


@dataclass(frozen=True)
class ReturnTimeOutcome:
    kind: str  # "hit" or "capped"
    value: int  # the hit step k, or n_max when capped

    @property
    def hit(self):
        return self.kind == "hit"

    @classmethod
    def from_raw(cls, k, n_max):
        return cls("hit", int(k)) if k > 0 else cls("capped", int(n_max))


@dataclass(frozen=True)
class AnnealedEstimate:
    mean: float
    std_error: float
    n_realizations: int
    n_capped: int

    @property
    def lower_bound(self):
        """Capped realizations counted as n_max make the mean a lower bound."""
        return self.n_capped > 0


@dataclass
class RateEstimate:
    r_grid: np.ndarray
    times: np.ndarray  # tau (quenched) or the Monte Carlo mean T (annealed)
    log_times: np.ndarray
    capped: np.ndarray  # per radius: at least one capped realization
    slope: float  # least squares over the finest uncapped half
    slope_lower: float  # min of log(time) / -log(r)
    slope_upper: float  # max of log(time) / -log(r)
    residual_rms: float
    n_excluded: int
    std_errors: np.ndarray = None
    n_capped: np.ndarray = None
    mode: str = "quenched"

    def rows(self):
        """Per-radius rows: r, tau_or_T, log_tau, neg_log_r, capped_flag."""
        return [
            (float(r), float(t), float(lt), float(-np.log(r)), int(c))
            for r, t, lt, c in zip(self.r_grid, self.times, self.log_times, self.capped)
        ]


@dataclass(frozen=True)
class KacEstimate:
    estimate: float
    std_error: float
    ball_mass: float
    n_points: int
    n_realizations: int
    n_capped: int


def _batch(system, seeds, starts, centers, radii, p, n_max, workers):
    packed = system.pack()
    kern = kernels.get()
    radii = np.ascontiguousarray(radii, dtype=np.float64)
    starts = np.ascontiguousarray(starts, dtype=np.float64)
    centers = np.ascontiguousarray(centers, dtype=np.float64)

    def rows(lo, hi):
        return kern.return_times_batch(*packed, seeds[lo:hi], starts[lo:hi], centers[lo:hi], radii, p, n_max)

    return run_rows(rows, len(seeds), workers)


def _check(p, n_max):
    if int(p) != p or p < 0:
        raise InvalidInputError("p must be a nonnegative integer")
    if int(n_max) != n_max or n_max <= p:
        raise InvalidInputError("n_max must be an integer greater than p")
    return int(p), int(n_max)


def quenched_return_time(system, stream, query):
    """tau_{r,p}: first k in (p, n_max] with the orbit in B(x, r), for the stream's realization."""
    x = query.validate(system.space)
    raw = kernels.get().return_times(*system.pack(), stream.state, x, x, [float(query.r)], int(query.p), int(query.n_max))
    return ReturnTimeOutcome.from_raw(raw[0], query.n_max)


def return_time_to_set(system, stream, x, center, r, p=0, n_max=DEFAULT_N_MAX_1D):
    """First k > p with the orbit of x in the fixed ball B(center, r); x must lie in that ball."""
    p, n_max = _check(p, n_max)
    x = point(system.space, x)
    center = point(system.space, center)
    if not r > 0:
        raise InvalidInputError("radius must be positive")
    if not distance(system.space, x, center) < r:
        raise InvalidInputError("starting point lies outside the target set")
    raw = kernels.get().return_times(*system.pack(), stream.state, x, center, [float(r)], p, n_max)
    return ReturnTimeOutcome.from_raw(raw[0], n_max)


def annealed_times(system, x, r_grid, p, M, n_max, master_seed, workers=None):
    """Raw return times, one row per realization (0 = capped), realization i seeded by derive_seed(master, i)."""
    p, n_max = _check(p, n_max)
    x = point(system.space, x)
    r = np.atleast_1d(np.asarray(r_grid, dtype=np.float64))
    if M < 1:
        raise InvalidInputError("need at least one realization")
    seeds = derive_seeds(master_seed, 0, int(M), STREAM_NOISE)
    xs = np.repeat(x[None, :], int(M), axis=0)
    return _batch(system, seeds, xs, xs, r, p, n_max, workers)


def annealed_return_time(system, x, r, p=0, M=1000, n_max=DEFAULT_N_MAX_1D, master_seed=0, workers=None):
    """Monte Carlo estimate of T_{r,p}(x); capped realizations contribute n_max."""
    raw = annealed_times(system, x, [r], p, M, n_max, master_seed, workers)[:, 0]
    return _estimate(raw, n_max)


def _estimate(raw, n_max):
    capped = raw == 0
    vals = np.where(capped, n_max, raw).astype(np.int64)
    m = vals.size
    mean = int(vals.sum()) / m
    se = float(np.std(vals.astype(np.float64), ddof=1) / np.sqrt(m)) if m > 1 else float("nan")
    return AnnealedEstimate(mean, se, int(m), int(capped.sum()))


def _rate(r, times, capped, std_errors=None, n_capped=None, mode="quenched"):
    usable = ~capped
    with np.errstate(divide="ignore"):
        log_t = np.log(times)
    fit = fit_exponent(r, times, usable, sign=-1)
    est = RateEstimate(
        r_grid=r,
        times=times,
        log_times=log_t,
        capped=capped,
        slope=float("nan") if fit is None else fit.slope,
        slope_lower=float("nan") if fit is None else fit.slope_lower,
        slope_upper=float("nan") if fit is None else fit.slope_upper,
        residual_rms=float("nan") if fit is None else fit.residual_rms,
        n_excluded=int(capped.sum()),
        std_errors=std_errors,
        n_capped=n_capped,
        mode=mode,
    )
    if fit is None:
        raise InsufficientDataError(f"only {int(usable.sum())} uncapped radii; need 3", partial=est)
    return est


def quenched_rate(system, seed, x, r_grid, p=DEFAULT_P, n_max=None):
    """log tau_{r,p} against -log r along a single realization, all radii from one orbit pass."""
    r = check_grid(r_grid)
    n_max = default_n_max(system) if n_max is None else n_max
    p, n_max = _check(p, n_max)
    x = point(system.space, x)
    stream = NoiseStream(system.noise, seed)
    raw = kernels.get().return_times(*system.pack(), stream.state, x, x, r, p, n_max)
    capped = raw == 0
    times = np.where(capped, n_max, raw).astype(np.float64)
    return _rate(r, times, capped)


def annealed_rate(system, x, r_grid, p=DEFAULT_P, M=200, n_max=None, master_seed=0, workers=None):
    """log T_{r,p} against -log r; the same M realizations serve every radius."""
    r = check_grid(r_grid)
    n_max = default_n_max(system) if n_max is None else n_max
    raw = annealed_times(system, x, r, p, M, n_max, master_seed, workers)
    ests = [_estimate(raw[:, j], n_max) for j in range(r.size)]
    times = np.array([e.mean for e in ests])
    n_capped = np.array([e.n_capped for e in ests])
    se = np.array([e.std_error for e in ests])
    return _rate(r, times, n_capped > 0, std_errors=se, n_capped=n_capped, mode="annealed")


def stationary_ball_mass(system, center, r):
    if system.stationary == "lebesgue":
        from .measure import lebesgue_ball_mass

        return lebesgue_ball_mass(system.space, center, r)
    if system.measure is None:
        from .systems import StateError

        raise StateError("empirical stationary measure required but none attached")
    return system.measure.ball_mass(center, r)


def conditioned_points(system, center, r, n_points, master_seed, budget=REJECTION_BUDGET):
    """n_points stationary draws conditioned on B(center, r), by rejection."""
    got = []
    have = 0
    tried = 0
    block = 65536
    while have < n_points:
        if tried >= budget:
            raise InvalidInputError(f"rejection sampling found {have} of {n_points} points in {budget} attempts")
        count = min(block, budget - tried)
        pts = sample_stationary_points(system, derive_seeds(master_seed, tried, count, STREAM_POINTS))
        tried += count
        inside = pts[distances(system.space, pts, center) < r]
        got.append(inside)
        have += inside.shape[0]
    return np.concatenate(got)[:n_points]


def kac_check(system, center, r, n_points=1000, n_realizations=50, n_max=None, master_seed=0, workers=None):
    """mu(B) times the mean over x ~ mu|B of the annealed return time into B; 1 for ergodic systems."""
    center = point(system.space, center)
    n_max = default_n_max(system) if n_max is None else n_max
    _, n_max = _check(0, n_max)
    mass = stationary_ball_mass(system, center, r)
    if not mass > 0:
        raise InvalidInputError("target ball has zero stationary mass")
    xs = conditioned_points(system, center, r, n_points, master_seed)
    rows = np.repeat(xs, n_realizations, axis=0)
    seeds = derive_seeds(master_seed, 0, rows.shape[0], STREAM_NOISE)
    centers = np.repeat(center[None, :], rows.shape[0], axis=0)
    raw = _batch(system, seeds, rows, centers, np.array([float(r)]), 0, n_max, workers)[:, 0]
    capped = raw == 0
    vals = np.where(capped, n_max, raw).astype(np.int64).reshape(n_points, n_realizations)
    per_point = vals.sum(axis=1) / n_realizations
    mean = int(vals.sum()) / vals.size
    se = float(np.std(per_point, ddof=1) / np.sqrt(n_points)) if n_points > 1 else float("nan")
    return KacEstimate(mass * mean, mass * se, float(mass), int(n_points), int(n_realizations), int(capped.sum()))


def noninstantaneous_equivalence(system, n_samples, r_grid, p, n_max=None, master_seed=0, workers=None):
    """Fraction of sampled (omega, x) with tau_{r,p} == tau_{r,0} at the smallest grid radius."""
    if p < 1:
        raise InvalidInputError("p must be >= 1")
    r_min = float(np.min(np.asarray(r_grid, dtype=np.float64)))
    n_max = default_n_max(system) if n_max is None else n_max
    p, n_max = _check(p, n_max)
    xs = sample_stationary_points(system, derive_seeds(master_seed, 0, n_samples, STREAM_POINTS))
    seeds = derive_seeds(master_seed, 0, n_samples, STREAM_NOISE)
    r = np.array([r_min])
    t0 = _batch(system, seeds, xs, xs, r, 0, n_max, workers)[:, 0]
    tp = _batch(system, seeds, xs, xs, r, p, n_max, workers)[:, 0]
    return float(np.count_nonzero(t0 == tp)) / n_samples


def aperiodicity_atom(system, x, r, M=10_000, master_seed=0, workers=None):
    """Empirical P{tau_r(x) = 1} over M realizations."""
    raw = annealed_times(system, x, [r], 0, M, 1, master_seed, workers)[:, 0]
    return float(np.count_nonzero(raw == 1)) / raw.size
