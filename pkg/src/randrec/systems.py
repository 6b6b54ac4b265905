"""Random dynamical systems: map families, noise processes and random orbits.

A :class:`RandomSystem` couples a phase space, a family of maps indexed by
labels, and a noise process emitting those labels. Orbits are produced by the
kernels in :mod:`randrec.kernels`; the Python side only validates and packs.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import _layout as L
from . import kernels
from ._pykernels import Machine, Noise
from .phase_space import InvalidInputError, Space, point
from .rng import uniforms_from_seeds

GOLDEN_ROTATION = (math.sqrt(5.0) - 1.0) / 2.0
MARKOV23_MATRIX = ((0.5, 0.5), (1.0 / 3.0, 2.0 / 3.0))


class StateError(RuntimeError):
    """Operation needs state the object does not have (e.g. no attached measure)."""


def stationary_distribution(matrix):
    """Stationary row vector of a stochastic matrix, by a direct linear solve."""
    A = np.asarray(matrix, dtype=np.float64)
    n = A.shape[0]
    M = np.vstack([(A.T - np.eye(n))[:-1], np.ones(n)])
    rhs = np.zeros(n)
    rhs[-1] = 1.0
    return np.linalg.solve(M, rhs)


# ---------------------------------------------------------------- noise


@dataclass(frozen=True)
class IID:
    weights: tuple

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if w.ndim != 1 or w.size < 1 or w.size > L.MAX_LABELS:
            raise InvalidInputError(f"need 1..{L.MAX_LABELS} weights")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise InvalidInputError(f"weights must be nonnegative and sum to 1, got {self.weights}")
        object.__setattr__(self, "weights", tuple(float(v) for v in w))

    @property
    def n_labels(self):
        return len(self.weights)

    def pack(self):
        ni = np.zeros(L.NOISE_I_SIZE, dtype=np.int64)
        nf = np.zeros(L.NOISE_F_SIZE)
        ni[:2] = (L.NOISE_IID, self.n_labels)
        nf[: self.n_labels] = _cumulative(self.weights)
        return ni, nf


@dataclass(frozen=True)
class MarkovChain:
    matrix: tuple
    initial: tuple = None  # None: start from the stationary distribution

    def __post_init__(self):
        A = np.asarray(self.matrix, dtype=np.float64)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or not 1 <= A.shape[0] <= L.MAX_LABELS:
            raise InvalidInputError("transition matrix must be square with at most 8 states")
        if np.any(A < 0) or np.any(np.abs(A.sum(axis=1) - 1.0) > 1e-12):
            raise InvalidInputError("rows of the transition matrix must be probability vectors")
        object.__setattr__(self, "matrix", tuple(tuple(float(v) for v in row) for row in A))
        init = stationary_distribution(A) if self.initial is None else np.asarray(self.initial, dtype=np.float64)
        if init.shape != (A.shape[0],) or np.any(init < -1e-15) or abs(init.sum() - 1.0) > 1e-12:
            raise InvalidInputError("initial distribution must be a probability vector")
        object.__setattr__(self, "initial", tuple(float(max(v, 0.0)) for v in init))

    @property
    def n_labels(self):
        return len(self.matrix)

    def pack(self):
        n = self.n_labels
        ni = np.zeros(L.NOISE_I_SIZE, dtype=np.int64)
        nf = np.zeros(L.NOISE_F_SIZE)
        ni[:2] = (L.NOISE_MARKOV, n)
        nf[:n] = _cumulative(self.initial)
        for i, row in enumerate(self.matrix):
            nf[n + n * i : n + n * (i + 1)] = _cumulative(row)
        return ni, nf


@dataclass(frozen=True)
class BaseMapDriven:
    """Labels read off a partition of [0, 1] along an orbit of a piecewise-linear base map.

    Piece ``j`` covers ``[breakpoints[j], breakpoints[j+1])`` and acts as
    ``w -> slopes[j] * w + intercepts[j]``. Label ``i`` is emitted while the
    base point lies in ``[cuts[i-1], cuts[i])``.
    """

    breakpoints: tuple
    slopes: tuple
    intercepts: tuple
    cuts: tuple
    omega0: float = None  # None: drawn uniformly from the stream seed

    def __post_init__(self):
        b = np.asarray(self.breakpoints, dtype=np.float64)
        m = b.size - 1
        if m < 1 or m > L.MAX_PIECES or len(self.slopes) != m or len(self.intercepts) != m:
            raise InvalidInputError("need m+1 breakpoints and m slopes/intercepts, 1 <= m <= 16")
        if b[0] != 0.0 or b[-1] != 1.0 or np.any(np.diff(b) <= 0):
            raise InvalidInputError("breakpoints must increase from 0 to 1")
        c = np.asarray(self.cuts, dtype=np.float64)
        if c.size + 1 > L.MAX_LABELS or np.any(np.diff(c) <= 0) or np.any((c <= 0) | (c >= 1)):
            raise InvalidInputError("cut points must increase strictly inside (0, 1)")
        if self.omega0 is not None and not 0.0 <= self.omega0 < 1.0:
            raise InvalidInputError("omega0 must lie in [0, 1)")
        for name in ("breakpoints", "slopes", "intercepts", "cuts"):
            object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))

    @property
    def n_labels(self):
        return len(self.cuts) + 1

    def theta(self, w):
        j = min(int(np.searchsorted(self.breakpoints, w, side="right")) - 1, len(self.slopes) - 1)
        return self.slopes[j] * w + self.intercepts[j]

    def pack(self):
        m = len(self.slopes)
        ni = np.zeros(L.NOISE_I_SIZE, dtype=np.int64)
        nf = np.zeros(L.NOISE_F_SIZE)
        ni[:3] = (L.NOISE_BASEMAP, self.n_labels, m)
        nf[0] = np.nan if self.omega0 is None else self.omega0
        nf[1 : 2 + m] = self.breakpoints
        nf[2 + m : 2 + 2 * m] = self.slopes
        nf[2 + 2 * m : 2 + 3 * m] = self.intercepts
        nf[2 + 3 * m : 2 + 3 * m + len(self.cuts)] = self.cuts
        return ni, nf


@dataclass(frozen=True)
class AdditiveIID:
    """I.i.d. additive offsets with the given density on (-eps, eps)."""

    eps: float
    density: str = "uniform"

    def __post_init__(self):
        if not self.eps > 0:
            raise InvalidInputError("noise level eps must be positive")
        if self.density != "uniform":
            raise InvalidInputError(f"unsupported noise density {self.density!r}")

    n_labels = None

    def pack(self):
        ni = np.zeros(L.NOISE_I_SIZE, dtype=np.int64)
        nf = np.zeros(L.NOISE_F_SIZE)
        ni[0] = L.NOISE_ADDITIVE
        nf[0] = self.eps
        return ni, nf


def _cumulative(p):
    c = np.cumsum(np.asarray(p, dtype=np.float64))
    c[-1] = 1.0
    return c


def markov23_base_map(omega0=None):
    """The piecewise-linear Lebesgue-preserving base map generating the x2/x3 Markov chain."""
    return BaseMapDriven(
        breakpoints=(0.0, 0.2, 0.4, 0.6, 1.0),
        slopes=(2.0, 3.0, 2.0, 1.5),
        intercepts=(0.0, -0.2, -0.8, -0.5),
        cuts=(0.4,),
        omega0=omega0,
    )


class NoiseStream:
    """A seeded realization of a noise process. Equal (process, seed) give equal labels."""

    def __init__(self, process, seed):
        self.process = process
        self.seed = int(seed) & ((1 << 64) - 1)
        self.state = (self.seed, -1, float("nan"))
        self.position = 0
        self._packed = process.pack()

    def next_label(self):
        nz = Noise(*self._packed, self.state)
        value = nz.next_offset() if isinstance(self.process, AdditiveIID) else nz.next_label()
        self.state = nz.state()
        self.position += 1
        return value

    def labels(self, n):
        return [self.next_label() for _ in range(n)]

    def copy(self):
        other = NoiseStream(self.process, self.seed)
        other.state = self.state
        other.position = self.position
        return other


# ---------------------------------------------------------------- families


def validate_cat_map(A):
    """Positive entries, |det| = 1 and hyperbolic (|trace| > 2 if det = 1, trace != 0 if det = -1)."""
    try:
        M = np.asarray(A)
        if M.shape != (2, 2) or not np.all(M == np.round(M)):
            return False
        (a, b), (c, d) = [[int(v) for v in row] for row in M]
    except (TypeError, ValueError):
        return False
    if min(a, b, c, d) <= 0:
        return False
    det = a * d - b * c
    tr = a + d
    if det == 1:
        return abs(tr) > 2
    if det == -1:
        return tr != 0
    return False


@dataclass(frozen=True)
class Markov23:
    name = "markov23"


@dataclass(frozen=True)
class CatMaps:
    A0: tuple = ((1, 1), (1, 2))
    A1: tuple = ((2, 1), (1, 1))
    q: float = 0.5
    name = "catmaps"

    def __post_init__(self):
        for M in (self.A0, self.A1):
            if not validate_cat_map(M):
                raise InvalidInputError(f"{M} is not a hyperbolic automorphism with positive entries")
        if not 0.0 < self.q < 1.0:
            raise InvalidInputError("q must lie in (0, 1)")
        object.__setattr__(self, "A0", tuple(tuple(int(v) for v in r) for r in self.A0))
        object.__setattr__(self, "A1", tuple(tuple(int(v) for v in r) for r in self.A1))


@dataclass(frozen=True)
class PerturbedCircle:
    degree: int = 2
    eps: float = 0.01
    name = "perturbed-circle"

    def __post_init__(self):
        if int(self.degree) != self.degree or self.degree < 2:
            raise InvalidInputError("degree must be an integer >= 2")
        if not 0 < self.eps < 0.5:
            raise InvalidInputError("eps must lie in (0, 1/2)")


@dataclass(frozen=True)
class PerturbedInterval:
    """Additive noise on a piecewise expanding interval map.

    ``kind="beta"``: x -> param * x mod 1 (param > 1);
    ``kind="tent"``: x -> param * min(x, 1 - x) (1 < param <= 2).
    Offsets pushing the image outside [0, 1] are redrawn.
    """

    kind: str = "beta"
    param: float = 2.5
    eps: float = 0.01
    name = "perturbed-interval"

    def __post_init__(self):
        if self.kind not in ("beta", "tent"):
            raise InvalidInputError(f"unknown interval map {self.kind!r}")
        if self.kind == "beta" and not self.param > 1:
            raise InvalidInputError("beta map needs param > 1")
        if self.kind == "tent" and not 1 < self.param <= 2:
            raise InvalidInputError("tent map needs 1 < param <= 2")
        if not 0 < self.eps < 0.5:
            raise InvalidInputError("eps must lie in (0, 1/2)")


@dataclass(frozen=True)
class RotationIdentity:
    alpha: float = GOLDEN_ROTATION
    name = "rotation-identity"


LEBESGUE = "lebesgue"
EMPIRICAL = "empirical"


@dataclass(frozen=True)
class RandomSystem:
    space: Space
    family: object
    noise: object
    stationary: str = LEBESGUE
    measure: object = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        fam = self.family
        want = Space.TORUS2 if isinstance(fam, CatMaps) else Space.INTERVAL if isinstance(fam, PerturbedInterval) else Space.CIRCLE
        if self.space is not want:
            raise InvalidInputError(f"{fam.name} lives on {want.value}, not {self.space.value}")
        continuous = isinstance(fam, (PerturbedCircle, PerturbedInterval))
        if continuous != isinstance(self.noise, AdditiveIID):
            raise InvalidInputError("perturbed families need additive noise, the others discrete labels")
        if not continuous and self.noise.n_labels != 2:
            raise InvalidInputError(f"{fam.name} takes exactly 2 labels")
        if continuous and abs(self.noise.eps - fam.eps) > 0:
            raise InvalidInputError("noise level disagrees with the family's eps")
        if self.stationary not in (LEBESGUE, EMPIRICAL):
            raise InvalidInputError(f"unknown stationary descriptor {self.stationary!r}")

    @property
    def name(self):
        return self.family.name

    @property
    def n_labels(self):
        return self.noise.n_labels

    def with_measure(self, measure):
        """Copy of this system whose stationary draws come from ``measure``'s samples."""
        return replace(self, measure=measure, stationary=EMPIRICAL)

    def pack(self):
        fi = np.zeros(L.FAM_I_SIZE, dtype=np.int64)
        ff = np.zeros(L.FAM_F_SIZE)
        fam = self.family
        fi[1] = self.space.dim
        if isinstance(fam, Markov23):
            fi[0] = L.FAM_MARKOV23
        elif isinstance(fam, CatMaps):
            fi[0] = L.FAM_CATMAPS
            fi[2:6] = np.ravel(fam.A0)
            fi[6:10] = np.ravel(fam.A1)
        elif isinstance(fam, PerturbedCircle):
            fi[0] = L.FAM_CIRCLE_PERTURBED
            fi[10] = fam.degree
            ff[1] = fam.eps
        elif isinstance(fam, PerturbedInterval):
            fi[0] = L.FAM_INTERVAL_PERTURBED
            fi[11] = L.MAP_BETA if fam.kind == "beta" else L.MAP_TENT
            ff[1] = fam.eps
            ff[2] = fam.param
        elif isinstance(fam, RotationIdentity):
            fi[0] = L.FAM_ROTATION
            ff[0] = fam.alpha
        ni, nf = self.noise.pack()
        return fi, ff, ni, nf

    def spec(self):
        """JSON-ready description, the inverse of :func:`system_from_spec`."""
        fam = self.family
        out = {"family": fam.name}
        if isinstance(fam, CatMaps):
            out.update(A0=[list(r) for r in fam.A0], A1=[list(r) for r in fam.A1], q=fam.q)
        elif isinstance(fam, PerturbedCircle):
            out.update(degree=fam.degree, eps=fam.eps)
        elif isinstance(fam, PerturbedInterval):
            out.update(map=fam.kind, param=fam.param, eps=fam.eps)
        elif isinstance(fam, RotationIdentity):
            out.update(alpha=fam.alpha)
        nz = self.noise
        if isinstance(nz, IID):
            out["noise"] = {"kind": "iid", "weights": list(nz.weights)}
        elif isinstance(nz, MarkovChain):
            out["noise"] = {"kind": "markov", "matrix": [list(r) for r in nz.matrix], "initial": list(nz.initial)}
        elif isinstance(nz, BaseMapDriven):
            out["noise"] = {"kind": "basemap", "omega0": nz.omega0}
        return out


# ---------------------------------------------------------------- built-ins


def markov23(noise=None):
    """x -> 2x and x -> 3x on the circle, chosen by the Markov chain [[1/2, 1/2], [1/3, 2/3]]."""
    return RandomSystem(Space.CIRCLE, Markov23(), noise or MarkovChain(MARKOV23_MATRIX))


def cat_maps(A0=((1, 1), (1, 2)), A1=((2, 1), (1, 1)), q=0.5):
    """I.i.d. hyperbolic toral automorphisms: A0 with probability q, A1 otherwise."""
    return RandomSystem(Space.TORUS2, CatMaps(A0, A1, q), IID((q, 1.0 - q)))


def perturbed_circle(degree=2, eps=0.01):
    """x -> degree * x + lambda (mod 1), lambda uniform on (-eps, eps). Lebesgue is stationary."""
    return RandomSystem(Space.CIRCLE, PerturbedCircle(degree, eps), AdditiveIID(eps))


def perturbed_interval(kind="beta", param=2.5, eps=0.01):
    return RandomSystem(Space.INTERVAL, PerturbedInterval(kind, param, eps), AdditiveIID(eps), stationary=EMPIRICAL)


def rotation_identity(alpha=GOLDEN_ROTATION):
    """Rotation by alpha (label 0) or the identity (label 1), each with probability 1/2."""
    return RandomSystem(Space.CIRCLE, RotationIdentity(alpha), IID((0.5, 0.5)))


CATALOG = {
    "markov23": {
        "space": "circle",
        "maps": "x -> 2x mod 1 (label 0), x -> 3x mod 1 (label 1)",
        "noise": "Markov chain with matrix [[1/2, 1/2], [1/3, 2/3]]; also iid or base-map driven",
        "params": {},
        "stationary": "Lebesgue (exact)",
        "notes": "Markov-driven linear circle maps; non-iid example",
    },
    "catmaps": {
        "space": "torus2",
        "maps": "x -> A0 x mod 1 with probability q, x -> A1 x mod 1 otherwise",
        "noise": "iid",
        "params": {"A0": "2x2 integers, default [[1,1],[1,2]]", "A1": "default [[2,1],[1,1]]", "q": "in (0,1), default 0.5"},
        "stationary": "Lebesgue (exact)",
        "notes": "matrix entries must be strictly positive integers, |det| = 1, hyperbolic",
    },
    "perturbed-circle": {
        "space": "circle",
        "maps": "x -> k x + lambda mod 1",
        "noise": "additive iid, uniform on (-eps, eps)",
        "params": {"degree": "integer k >= 2, default 2", "eps": "default 0.01"},
        "stationary": "Lebesgue (exact)",
        "notes": "small random perturbation of an expanding circle map",
    },
    "perturbed-interval": {
        "space": "interval",
        "maps": "x -> T(x) + lambda, T a beta map or tent map; out-of-range offsets redrawn",
        "noise": "additive iid, uniform on (-eps, eps)",
        "params": {"map": "beta | tent", "param": "slope, default 2.5", "eps": "default 0.01"},
        "stationary": "empirical (build with the dimension/measure tools)",
        "notes": "small random perturbation of a piecewise expanding interval map",
    },
    "rotation-identity": {
        "space": "circle",
        "maps": "x -> x + alpha mod 1 (label 0), identity (label 1), probability 1/2 each",
        "noise": "iid",
        "params": {"alpha": "irrational, default (sqrt(5) - 1) / 2"},
        "stationary": "Lebesgue (exact)",
        "notes": "not random-aperiodic: P(first return = 1) = 1/2 at every radius",
    },
}


def system_from_spec(spec):
    """Build a system from a JSON-style mapping (see :meth:`RandomSystem.spec`)."""
    spec = dict(spec)
    fam = spec.pop("family", None)
    noise = spec.pop("noise", None)
    allowed = {
        "markov23": set(),
        "catmaps": {"A0", "A1", "q"},
        "perturbed-circle": {"degree", "eps"},
        "perturbed-interval": {"map", "param", "eps"},
        "rotation-identity": {"alpha"},
    }
    if fam not in allowed:
        raise InvalidInputError(f"unknown system family {fam!r}; choose from {sorted(allowed)}")
    unknown = set(spec) - allowed[fam]
    if unknown:
        raise InvalidInputError(f"unknown keys for {fam}: {sorted(unknown)}")
    if fam == "markov23":
        system = markov23(_noise_from_spec(noise) if noise else None)
    elif fam == "catmaps":
        system = cat_maps(**{k: spec[k] for k in ("A0", "A1", "q") if k in spec})
    elif fam == "perturbed-circle":
        system = perturbed_circle(int(spec.get("degree", 2)), float(spec.get("eps", 0.01)))
    elif fam == "perturbed-interval":
        system = perturbed_interval(spec.get("map", "beta"), float(spec.get("param", 2.5)), float(spec.get("eps", 0.01)))
    else:
        system = rotation_identity(float(spec.get("alpha", GOLDEN_ROTATION)))
    if noise and fam != "markov23":
        system = replace(system, noise=_noise_from_spec(noise))
    return system


def _noise_from_spec(spec):
    spec = dict(spec)
    kind = spec.pop("kind", None)
    if kind == "iid":
        out = IID(tuple(spec.pop("weights")))
    elif kind == "markov":
        out = MarkovChain(tuple(map(tuple, spec.pop("matrix"))), spec.pop("initial", None))
    elif kind == "basemap":
        out = markov23_base_map(spec.pop("omega0", None))
    else:
        raise InvalidInputError(f"unknown noise kind {kind!r}")
    if spec:
        raise InvalidInputError(f"unknown noise keys: {sorted(spec)}")
    return out


# ---------------------------------------------------------------- operations


def _check_label(system, label):
    if isinstance(system.noise, AdditiveIID):
        try:
            lam = float(label)
        except (TypeError, ValueError):
            raise InvalidInputError(f"{system.name} labels are real offsets") from None
        if not abs(lam) < system.noise.eps:
            raise InvalidInputError(f"offset {lam} outside (-eps, eps)")
        return lam
    if isinstance(label, (bool, float)) or int(label) != label or not 0 <= int(label) < system.n_labels:
        raise InvalidInputError(f"label {label!r} invalid for {system.name}")
    return int(label)


def apply_map(system, label, x):
    """T_label(x), normalized into the phase space."""
    label = _check_label(system, label)
    x = point(system.space, x)
    m = Machine(*system.pack(), (0, -1, float("nan")))
    m.set_point(x)
    m.apply_label(label)
    y = np.array(m.point())
    if system.space is Space.INTERVAL and not 0.0 <= y[0] <= 1.0:
        raise InvalidInputError(f"offset {label} pushes T(x) outside [0, 1]")
    return y


def random_orbit(system, stream, x0, n):
    """Points x_0..x_n along the stream's labels; consumes exactly n steps of the stream."""
    if n < 0:
        raise InvalidInputError("orbit length must be >= 0")
    x0 = point(system.space, x0)
    pts, state = kernels.get().orbit(*system.pack(), stream.state, x0, int(n))
    pts[0] = x0  # the kernel reports x0 as stored internally (lattice-rounded for some families)
    stream.state = state
    stream.position += int(n)
    return pts


def sample_stationary_points(system, seeds):
    """One stationary draw per seed; row i depends only on seeds[i]."""
    seeds = np.atleast_1d(np.asarray(seeds, dtype=np.uint64))
    if system.stationary == LEBESGUE:
        return uniforms_from_seeds(seeds, system.space.dim)
    if system.measure is None:
        raise StateError(f"{system.name} has an empirical stationary measure but none is attached")
    samples = system.measure.samples
    u = uniforms_from_seeds(seeds, 1)[:, 0]
    idx = np.minimum((u * samples.shape[0]).astype(np.int64), samples.shape[0] - 1)
    return samples[idx].copy()


def sample_stationary_point(system, seed):
    return sample_stationary_points(system, [seed])[0]
