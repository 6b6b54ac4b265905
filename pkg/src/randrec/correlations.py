"""Annealed correlations of Lipschitz observables and decay-rate fits.

C_n = | E[psi(x_n) phi(x_0)] - (int psi dmu)(int phi dmu) |, with x_0 ~ mu and
the expectation over both x_0 and the noise. Monte Carlo sums are reduced in
fixed blocks of rows, so estimates do not depend on the worker count.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .parallel import run_rows
from .phase_space import InvalidInputError, Space, distances
from .rng import STREAM_AUX, STREAM_NOISE, STREAM_POINTS, derive_seeds
from .slopes import InsufficientDataError
from .systems import LEBESGUE, sample_stationary_points

BLOCK = 4096
KINDS = ("fourier_cos", "fourier_sin", "tent", "coordinate", "constant")


@dataclass(frozen=True)
class Observable:
    kind: str
    m: int = 1  # Fourier mode
    center: tuple = (0.5,)  # tent peak
    width: float = 0.2  # tent support diameter
    index: int = 0  # coordinate read by Fourier and coordinate observables
    value: float = 1.0  # constant observables
    scale: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidInputError(f"unknown observable {self.kind!r}; choose from {KINDS}")
        if self.kind.startswith("fourier") and (int(self.m) != self.m or self.m < 1):
            raise InvalidInputError("Fourier mode must be an integer >= 1")
        if self.kind == "tent" and not self.width > 0:
            raise InvalidInputError("tent width must be positive")
        if self.index not in (0, 1):
            raise InvalidInputError("coordinate index must be 0 or 1")
        object.__setattr__(self, "center", tuple(float(c) for c in np.atleast_1d(self.center)))

    @property
    def lipschitz_constant(self):
        a = abs(self.scale)
        if self.kind.startswith("fourier"):
            return a * 2.0 * math.pi * self.m
        if self.kind == "tent":
            return a * 2.0 / self.width
        if self.kind == "coordinate":
            return a
        return 0.0

    @property
    def sup_norm(self):
        if self.kind == "constant":
            return abs(self.scale * self.value)
        return abs(self.scale)

    def scaled(self, a):
        return Observable(self.kind, self.m, self.center, self.width, self.index, self.value, self.scale * a)

    def check_space(self, space):
        if self.kind == "coordinate" and space is not Space.INTERVAL:
            raise InvalidInputError("coordinate observables are only Lipschitz on the interval")
        if self.index >= space.dim:
            raise InvalidInputError(f"index {self.index} out of range for {space.value}")
        if self.kind == "tent" and len(self.center) != space.dim:
            raise InvalidInputError("tent center has the wrong dimension")

    def __call__(self, space, pts):
        pts = np.asarray(pts, dtype=np.float64).reshape(-1, space.dim)
        if self.kind == "fourier_cos":
            v = np.cos(2.0 * math.pi * self.m * pts[:, self.index])
        elif self.kind == "fourier_sin":
            v = np.sin(2.0 * math.pi * self.m * pts[:, self.index])
        elif self.kind == "tent":
            d = distances(space, pts, np.array(self.center))
            v = np.maximum(0.0, 1.0 - 2.0 * d / self.width)
        elif self.kind == "coordinate":
            v = pts[:, self.index].copy()
        else:
            v = np.full(pts.shape[0], self.value)
        return self.scale * v

    def lebesgue_mean(self, space):
        """Exact Lebesgue integral, or None when no closed form is wired in."""
        if self.kind.startswith("fourier"):
            return 0.0
        if self.kind == "constant":
            return self.scale * self.value
        if self.kind == "coordinate":
            return self.scale * 0.5
        h = self.width / 2.0
        if space is Space.CIRCLE and h <= 0.5:
            return self.scale * h
        if space is Space.TORUS2 and h <= 0.5:
            return self.scale * math.pi * h * h / 3.0
        return None


def fourier_cos(m=1, index=0):
    return Observable("fourier_cos", m=m, index=index)


def fourier_sin(m=1, index=0):
    return Observable("fourier_sin", m=m, index=index)


def tent(center=0.5, width=0.2):
    return Observable("tent", center=center, width=width)


def coordinate(index=0):
    return Observable("coordinate", index=index)


def constant(c=1.0):
    return Observable("constant", value=c)


def lipschitz_norm(obs):
    """sup norm plus Lipschitz constant."""
    return obs.sup_norm + obs.lipschitz_constant


@dataclass(frozen=True)
class CorrelationEstimate:
    n: int
    value: float  # |C_n|
    signed: float
    std_error: float
    mean_psi: float
    mean_phi: float
    exact_means: bool


def correlation_curve(system, psi, phi, ns, M=100_000, master_seed=0, workers=None):
    """Estimates of C_n for every n in ``ns`` from one batch of M orbits."""
    ns = [int(n) for n in ns]
    if not ns or min(ns) < 1:
        raise InvalidInputError("lags must be >= 1")
    if M < 2:
        raise InvalidInputError("need M >= 2 samples")
    space = system.space
    psi.check_space(space)
    phi.check_space(space)
    if psi.kind == "constant" or phi.kind == "constant":
        return [CorrelationEstimate(n, 0.0, 0.0, 0.0, psi.lebesgue_mean(space) or 0.0,
                                    phi.lebesgue_mean(space) or 0.0, True) for n in ns]
    n_top = max(ns)
    cols = np.array(ns)
    packed = system.pack()
    kern = kernels.get()
    noise = derive_seeds(master_seed, 0, M, STREAM_NOISE)
    starts_all = sample_stationary_points(system, derive_seeds(master_seed, 0, M, STREAM_POINTS))

    def rows(lo, hi):
        out = []
        for a in range(lo, hi, BLOCK):
            b = min(a + BLOCK, hi)
            paths = kern.orbit_batch(*packed, noise[a:b], starts_all[a:b], n_top)
            f0 = phi(space, paths[:, 0, :])
            prods = np.stack([psi(space, paths[:, n, :]) * f0 for n in cols], axis=1)
            out.append(np.concatenate([prods.sum(axis=0), (prods * prods).sum(axis=0)])[None, :])
        return np.concatenate(out, axis=0)

    sums = run_rows(rows, M, workers, min_chunk=BLOCK, align=BLOCK).sum(axis=0)
    k = len(ns)
    mean_prod = sums[:k] / M
    var_prod = np.maximum(sums[k:] / M - mean_prod**2, 0.0) * M / (M - 1)

    exact = system.stationary == LEBESGUE and psi.lebesgue_mean(space) is not None and phi.lebesgue_mean(space) is not None
    if exact:
        mp, mf = psi.lebesgue_mean(space), phi.lebesgue_mean(space)
        var_means = 0.0
    else:
        z = sample_stationary_points(system, derive_seeds(master_seed, 0, M, STREAM_AUX))
        a, b = psi(space, z), phi(space, z)
        mp, mf = float(a.mean()), float(b.mean())
        cov = np.cov(a, b)
        var_means = (mf * mf * cov[0, 0] + mp * mp * cov[1, 1] + 2.0 * mp * mf * cov[0, 1]) / M
    signed = mean_prod - mp * mf
    se = np.sqrt(var_prod / M + var_means)
    return [
        CorrelationEstimate(n, float(abs(c)), float(c), float(e), float(mp), float(mf), exact)
        for n, c, e in zip(ns, signed, se)
    ]


def correlation(system, psi, phi, n, M=100_000, master_seed=0, workers=None):
    """(|C_n|, standard error)."""
    est = correlation_curve(system, psi, phi, [n], M, master_seed, workers)[0]
    return est.value, est.std_error


@dataclass
class DecayFit:
    n_grid: np.ndarray
    c_values: np.ndarray
    std_errors: np.ndarray
    censored: np.ndarray  # at or below the 3-standard-error noise floor
    model: str  # "exponential", "polynomial" or "degenerate"
    rate: float = float("nan")  # exponential: C_n ~ exp(-rate n)
    power: float = float("nan")  # polynomial: C_n ~ n^-power
    residual_exp: float = float("nan")
    residual_poly: float = float("nan")
    margins: dict = field(default_factory=dict)  # p -> C_n n^p over uncensored n
    decreasing_from: dict = field(default_factory=dict)  # p -> first n after which margins strictly fall

    @property
    def degenerate(self):
        return self.model == "degenerate"

    @property
    def superpolynomial(self):
        """Every tested C_n n^p is eventually decreasing (or nothing is measurable)."""
        return self.degenerate or all(v is not None for v in self.decreasing_from.values())


def decay_fit(points, powers=(1, 2, 3)):
    """Fit exponential and polynomial decay to ``(n, C_n, err)`` triples; keep the better residual."""
    arr = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    order = np.argsort(arr[:, 0], kind="stable")
    n, c, err = arr[order, 0], np.abs(arr[order, 1]), arr[order, 2]
    if np.any(err < 0):
        raise InvalidInputError("standard errors must be >= 0")
    censored = (c <= 3.0 * err) | (c <= 0)
    keep = ~censored
    out = DecayFit(n, c, err, censored, "degenerate")
    if not keep.any():
        return out
    if keep.sum() < 4:
        raise InsufficientDataError(f"only {int(keep.sum())} points above the noise floor; need 4", partial=out)
    nk, ck = n[keep], c[keep]
    y = np.log(ck)
    s_e, i_e = np.polyfit(nk, y, 1)
    s_p, i_p = np.polyfit(np.log(nk), y, 1)
    out.residual_exp = float(np.sqrt(np.mean((y - (s_e * nk + i_e)) ** 2)))
    out.residual_poly = float(np.sqrt(np.mean((y - (s_p * np.log(nk) + i_p)) ** 2)))
    out.rate, out.power = float(-s_e), float(-s_p)
    out.model = "exponential" if out.residual_exp <= out.residual_poly else "polynomial"
    for p in powers:
        mg = ck * nk**p
        out.margins[p] = mg
        out.decreasing_from[p] = _decreasing_from(nk, mg)
    return out


def _decreasing_from(n, values):
    if values.size < 2 or values[-1] >= values[-2]:
        return None
    j = values.size - 1
    while j > 0 and values[j] < values[j - 1]:
        j -= 1
    return int(n[j])
