"""Stationary measures: exact Lebesgue and empirical sample clouds with a cell index.

An :class:`EmpiricalMeasure` stores its samples sorted by grid cell together
with CSR offsets ``cell_start``, so a ball query only scans the cells the
ball's bounding box touches. Counts are exact: the same strict ``d < r`` test
as a linear scan.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .phase_space import InvalidInputError, Space, distances, point
from .rng import STREAM_NOISE, STREAM_POINTS, derive_seed, derive_seeds, uniforms_from_seeds
from .slopes import InsufficientDataError, check_grid, fit_exponent
from .systems import NoiseStream

DEFAULT_CELL = 1.0 / 256
DEFAULT_BURN_IN = 10_000


def lebesgue_ball_mass(space, center, r):
    """Closed-form Lebesgue mass of the open ball B(center, r)."""
    if not r > 0:
        raise InvalidInputError("radius must be positive")
    if space is Space.CIRCLE:
        return min(2.0 * r, 1.0)
    if space is Space.INTERVAL:
        c = float(np.atleast_1d(center)[0])
        return max(0.0, min(1.0, c + r) - max(0.0, c - r))
    # torus: disk clipped by the fundamental square [-1/2, 1/2]^2
    if r <= 0.5:
        return math.pi * r * r
    if r >= math.sqrt(0.5):
        return 1.0
    cap = r * r * math.acos(0.5 / r) - 0.5 * math.sqrt(r * r - 0.25)
    return math.pi * r * r - 4.0 * cap


class LebesgueMeasure:
    """Exact Lebesgue measure; ball masses in closed form, no sampling noise."""

    exact = True

    def __init__(self, space):
        self.space = space

    def ball_mass(self, x, r):
        return lebesgue_ball_mass(self.space, point(self.space, x), r)


def cell_of(points, m):
    """Flat cell index of each row (row-major over axes)."""
    c = np.minimum((np.asarray(points) * m).astype(np.int64), m - 1)
    c = np.maximum(c, 0)
    if c.shape[1] == 1:
        return c[:, 0]
    return c[:, 0] * m + c[:, 1]


@dataclass
class EmpiricalMeasure:
    space: Space
    samples: np.ndarray  # (N, dim), sorted by cell
    cell_start: np.ndarray  # (m**dim + 1,) CSR offsets into samples
    m: int  # cells per axis
    provenance: dict = field(default_factory=dict)

    exact = False

    @classmethod
    def from_samples(cls, space, samples, r_min=None, provenance=None):
        pts = np.asarray(samples, dtype=np.float64).reshape(-1, space.dim)
        if pts.shape[0] < 1:
            raise InvalidInputError("need at least one sample")
        pts = _normalize(space, pts)
        h = DEFAULT_CELL if r_min is None else max(DEFAULT_CELL, r_min / 2.0)
        m = max(1, int(math.floor(1.0 / h)))
        cells = cell_of(pts, m)
        order = np.argsort(cells, kind="stable")
        counts = np.bincount(cells, minlength=m**space.dim)
        start = np.zeros(m**space.dim + 1, dtype=np.int64)
        np.cumsum(counts, out=start[1:])
        return cls(space, np.ascontiguousarray(pts[order]), start, m, dict(provenance or {}))

    @property
    def n(self):
        return self.samples.shape[0]

    @property
    def h(self):
        return 1.0 / self.m

    def count(self, x, r):
        if not r > 0:
            raise InvalidInputError("radius must be positive")
        x = point(self.space, x)
        return kernels.get().ball_count(self.samples, self.cell_start, self.m, self.space.periodic, x, float(r))

    def ball_mass(self, x, r):
        """#samples in B(x, r) / N."""
        return self.count(x, r) / self.n

    def cell_members(self, cell):
        return self.samples[self.cell_start[cell] : self.cell_start[cell + 1]]

    # ---- export / import

    def to_csv(self, path):
        header = ",".join(f"x{i}" for i in range(self.space.dim))
        np.savetxt(path, self.samples, fmt="%.17g", delimiter=",", header=header, comments="")

    def to_binary(self, path):
        """Raw little-endian float64, one point per row, coordinates in order."""
        self.samples.astype("<f8").tofile(path)

    @classmethod
    def from_csv(cls, space, path, r_min=None):
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        return cls.from_samples(space, data, r_min, {"source": str(path)})

    @classmethod
    def from_binary(cls, space, path, r_min=None):
        data = np.fromfile(path, dtype="<f8").reshape(-1, space.dim)
        return cls.from_samples(space, data, r_min, {"source": str(path)})


def _normalize(space, pts):
    if not np.all(np.isfinite(pts)):
        raise InvalidInputError("samples must be finite")
    if space.periodic:
        pts = pts - np.floor(pts)
        pts[pts >= 1.0] = 0.0
        return pts
    if np.any((pts < 0) | (pts > 1)):
        raise InvalidInputError("interval samples must lie in [0, 1]")
    return pts


def brute_force_count(measure, x, r):
    """Linear scan over all samples; the reference for :meth:`EmpiricalMeasure.count`."""
    return int(np.count_nonzero(distances(measure.space, measure.samples, point(measure.space, x)) < r))


def build_empirical(system, N, burn_in=DEFAULT_BURN_IN, seed=0, r_min=None, mode="orbit"):
    """Sample the stationary measure.

    ``mode="orbit"``: one random orbit of length burn_in + N from a uniform
    start, keeping the last N points. ``mode="restart"``: N independent orbits
    of length burn_in, keeping each endpoint (slower; for cross-checks).
    """
    if N < 1:
        raise InvalidInputError("N must be >= 1")
    if burn_in < 0:
        raise InvalidInputError("burn_in must be >= 0")
    dim = system.space.dim
    kern = kernels.get()
    packed = system.pack()
    if mode == "orbit":
        start = uniforms_from_seeds(np.array([derive_seed(seed, 0, STREAM_POINTS)], dtype=np.uint64), dim)[0]
        stream = NoiseStream(system.noise, derive_seed(seed, 0, STREAM_NOISE))
        pts, _ = kern.orbit(*packed, stream.state, start, int(burn_in + N))
        samples = pts[burn_in + 1 :]
    elif mode == "restart":
        starts = uniforms_from_seeds(derive_seeds(seed, 0, N, STREAM_POINTS), dim)
        paths = kern.orbit_batch(*packed, derive_seeds(seed, 0, N, STREAM_NOISE), starts, int(burn_in))
        samples = paths[:, -1, :]
    else:
        raise InvalidInputError(f"unknown sampling mode {mode!r}")
    prov = {"system": system.name, "burn_in": int(burn_in), "seed": int(seed), "mode": mode, "N": int(N)}
    return EmpiricalMeasure.from_samples(system.space, samples, r_min, prov)


@dataclass
class DimensionEstimate:
    r_grid: np.ndarray
    masses: np.ndarray
    log_masses: np.ndarray
    slope: float
    slope_lower: float
    slope_upper: float
    residual_rms: float
    n_excluded: int  # zero-mass radii left out of the fit


def local_dimension(measure, x, r_grid):
    """Scaling exponent of mu(B(x, r)) over the grid; zero-mass radii are excluded and counted."""
    r = check_grid(r_grid)
    masses = np.array([measure.ball_mass(x, float(v)) for v in r])
    positive = masses > 0
    with np.errstate(divide="ignore"):
        logm = np.log(masses)
    fit = fit_exponent(r, masses, positive, sign=1)
    nan = float("nan")
    est = DimensionEstimate(
        r, masses, logm,
        nan if fit is None else fit.slope,
        nan if fit is None else fit.slope_lower,
        nan if fit is None else fit.slope_upper,
        nan if fit is None else fit.residual_rms,
        int((~positive).sum()),
    )
    if fit is None:
        raise InsufficientDataError(f"only {int(positive.sum())} radii with positive mass; need 3", partial=est)
    return est


@dataclass
class DimensionSummary:
    ess_sup: float
    median: float
    quantiles: dict
    slopes: np.ndarray
    n_failed: int


def dimension_summary(measure, points, r_grid, quantiles=(0.1, 0.25, 0.5, 0.75, 0.9)):
    """Local dimensions at sampled points; the max is the ess-sup (Hausdorff dimension) estimate.

    Each point contributes its least-squares slope; points without enough
    positive-mass radii are skipped and counted in ``n_failed``.
    """
    pts = np.asarray(points, dtype=np.float64).reshape(-1, measure.space.dim)
    if pts.shape[0] < 1:
        raise InvalidInputError("need at least one point")
    slopes = []
    failed = 0
    for x in pts:
        try:
            slopes.append(local_dimension(measure, x, r_grid).slope)
        except InsufficientDataError:
            failed += 1
    s = np.array(slopes)
    if s.size == 0:
        raise InsufficientDataError("no point had enough positive-mass radii")
    qs = {float(q): float(np.quantile(s, q)) for q in quantiles}
    return DimensionSummary(float(s.max()), float(np.median(s)), qs, s, failed)


@dataclass(frozen=True)
class WdrParams:
    eta: float = 4.0
    eps: float = 0.1
    r_grid: tuple = ()

    def __post_init__(self):
        if not self.eta > 1:
            raise InvalidInputError("eta must exceed 1")
        if not self.eps > 0:
            raise InvalidInputError("eps must be positive")


@dataclass
class WdrResult:
    r_grid: np.ndarray
    holds: np.ndarray
    outer: np.ndarray  # mu(B(x, eta r))
    inner: np.ndarray  # mu(B(x, r)) * r**(-eps)
    delta_estimate: float  # nan when the inequality fails at the finest radius


def wdr_check(measure, x, params):
    """Spot check of mu(B(x, eta r)) <= mu(B(x, r)) r^-eps along the grid."""
    r = np.sort(np.asarray(params.r_grid, dtype=np.float64))[::-1]
    if r.size == 0 or np.any(r <= 0):
        raise InvalidInputError("wdr grid needs positive radii")
    outer = np.array([measure.ball_mass(x, params.eta * v) for v in r])
    inner = np.array([measure.ball_mass(x, v) for v in r]) * r ** (-params.eps)
    holds = outer <= inner
    delta = float("nan")
    for j in range(r.size - 1, -1, -1):
        if not holds[j]:
            break
        delta = float(r[j])
    return WdrResult(r, holds, outer, inner, delta)


def separated_set(space, points, r):
    """Greedy maximal r-separated subset of ``points``, scanned in order.

    A point is accepted when its distance to every accepted point is >= r.
    Accepted points are hashed into cells of width >= r, so only the
    neighbouring cells need checking.
    """
    if not r > 0:
        raise InvalidInputError("radius must be positive")
    pts = np.asarray(points, dtype=np.float64).reshape(-1, space.dim)
    m = max(1, int(math.floor(1.0 / r)))
    reach = 2  # spare ring against rounding at cell edges
    full = 2 * reach + 1 >= m
    buckets = {}
    accepted = []
    for x in pts:
        c = tuple(min(int(v * m), m - 1) for v in x)
        if full:
            near = accepted
        else:
            near = []
            for off in _offsets(space.dim, reach):
                key = tuple(_shift(ci, oi, m, space.periodic) for ci, oi in zip(c, off))
                if None not in key:
                    near.extend(buckets.get(key, ()))
        if near and np.min(distances(space, np.array(near), x)) < r:
            continue
        accepted.append(x)
        buckets.setdefault(c, []).append(x)
    return np.array(accepted).reshape(-1, space.dim)


def _offsets(dim, reach):
    span = range(-reach, reach + 1)
    return [(a,) for a in span] if dim == 1 else [(a, b) for a in span for b in span]


def _shift(c, o, m, periodic):
    v = c + o
    if periodic:
        return v % m
    return v if 0 <= v < m else None


def maximal_separated_set(measure, r):
    """Greedy maximal r-separated set over the measure's samples."""
    return separated_set(measure.space, measure.samples, r)
