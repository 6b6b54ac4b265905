"""Pure-Python kernels.

Reference semantics for the compiled ``_ckernels`` module: both backends must
produce bit-identical outputs for identical inputs. Keep the floating-point
operation order in sync when editing either one.
"""

import math

import numpy as np

from . import _layout as L
from .rng import GOLDEN, MASK64, mix64

_Q = L.MARKOV23_MODULUS
_INV53 = 2.0 ** -53
_INV52 = 2.0 ** -52


class Noise:
    """Mutable label generator over a packed noise description."""

    __slots__ = ("kind", "nlab", "npieces", "f", "rng", "label", "omega")

    def __init__(self, noise_i, noise_f, state):
        self.kind = int(noise_i[0])
        self.nlab = int(noise_i[1])
        self.npieces = int(noise_i[2])
        self.f = [float(v) for v in noise_f]
        self.rng, self.label, self.omega = int(state[0]), int(state[1]), float(state[2])

    def state(self):
        return (self.rng, self.label, self.omega)

    def uniform(self):
        self.rng = (self.rng + GOLDEN) & MASK64
        return (mix64(self.rng) >> 11) * _INV53

    def open_uniform(self):
        # 52 bits keep (n + 0.5) exact, so the result is strictly inside (0, 1)
        self.rng = (self.rng + GOLDEN) & MASK64
        return ((mix64(self.rng) >> 12) + 0.5) * _INV52

    def _pick(self, offset):
        u = self.uniform()
        f = self.f
        for i in range(self.nlab - 1):
            if u < f[offset + i]:
                return i
        return self.nlab - 1

    def next_label(self):
        kind = self.kind
        if kind == L.NOISE_IID:
            return self._pick(0)
        if kind == L.NOISE_MARKOV:
            if self.label < 0:
                self.label = self._pick(0)
            else:
                self.label = self._pick(self.nlab + self.nlab * self.label)
            return self.label
        if kind == L.NOISE_BASEMAP:
            return self._basemap_label()
        raise ValueError("continuous noise has no discrete labels")

    def next_offset(self):
        """Additive noise value, uniform on the open interval (-eps, eps)."""
        u = self.open_uniform()
        return self.f[0] * (2.0 * u - 1.0)

    def _basemap_label(self):
        f = self.f
        m = self.npieces
        if self.omega != self.omega:
            self.omega = f[0] if f[0] == f[0] else self.uniform()
        w = self.omega
        cuts = 2 + 3 * m
        lab = self.nlab - 1
        for i in range(self.nlab - 1):
            if w < f[cuts + i]:
                lab = i
                break
        piece = m - 1
        for j in range(m - 1):
            if w < f[2 + j]:
                piece = j
                break
        w = f[1 + m + 1 + piece] * w + f[1 + 2 * m + 1 + piece]
        if w < 0.0:
            w = 0.0
        elif w >= 1.0:
            w = L.ONE_MINUS_ULP
        self.omega = w
        self.label = lab
        return lab


def _wrap(v):
    y = v - math.floor(v)
    return 0.0 if y >= 1.0 else y


class Machine:
    """One system plus its noise: lattice or float state, stepped in place."""

    def __init__(self, fam_i, fam_f, noise_i, noise_f, state):
        self.fam = int(fam_i[0])
        self.dim = int(fam_i[1])
        self.a = [int(v) for v in fam_i[2:10]]
        self.degree = int(fam_i[10])
        self.map_kind = int(fam_i[11])
        self.alpha, self.eps, self.map_param = (float(v) for v in fam_f[:3])
        self.noise = Noise(noise_i, noise_f, state)
        self.lattice = self.fam in (L.FAM_MARKOV23, L.FAM_CATMAPS)
        self.s = [0, 0]

    # -- encoding --
    def encode(self, x):
        if self.fam == L.FAM_MARKOV23:
            return [math.floor(float(x[0]) * _Q + 0.5) % _Q]
        if self.fam == L.FAM_CATMAPS:
            return [math.floor(float(x[i]) * 4503599627370496.0 + 0.5) & L.CAT_MASK for i in range(2)]
        return [float(v) for v in x[: self.dim]]

    def decode(self, s):
        if self.fam == L.FAM_MARKOV23:
            return [s[0] / _Q]
        if self.fam == L.FAM_CATMAPS:
            return [s[0] * L.CAT_SCALE, s[1] * L.CAT_SCALE]
        return list(s)

    def set_point(self, x):
        self.s = self.encode(x)

    def point(self):
        return self.decode(self.s)

    # -- dynamics --
    def step(self):
        fam = self.fam
        s = self.s
        if fam == L.FAM_MARKOV23:
            lab = self.noise.next_label()
            s[0] = (s[0] * (2 if lab == 0 else 3)) % _Q
        elif fam == L.FAM_CATMAPS:
            lab = self.noise.next_label()
            a = self.a
            o = 0 if lab == 0 else 4
            k0, k1 = s
            s[0] = (a[o] * k0 + a[o + 1] * k1) & L.CAT_MASK
            s[1] = (a[o + 2] * k0 + a[o + 3] * k1) & L.CAT_MASK
        elif fam == L.FAM_CIRCLE_PERTURBED:
            lam = self.noise.next_offset()
            s[0] = _wrap(self.degree * s[0] + lam)
        elif fam == L.FAM_INTERVAL_PERTURBED:
            t = self.base_interval(s[0])
            while True:
                v = t + self.noise.next_offset()
                if 0.0 <= v <= 1.0:
                    break
            s[0] = v
        elif fam == L.FAM_ROTATION:
            lab = self.noise.next_label()
            if lab == 0:
                s[0] = _wrap(s[0] + self.alpha)
        else:
            raise ValueError(f"unknown family code {fam}")

    def apply_label(self, label):
        """Apply one map with a caller-chosen label (or additive offset)."""
        fam = self.fam
        s = self.s
        if fam == L.FAM_MARKOV23:
            s[0] = (s[0] * (2 if label == 0 else 3)) % _Q
        elif fam == L.FAM_CATMAPS:
            a = self.a
            o = 0 if label == 0 else 4
            k0, k1 = s
            s[0] = (a[o] * k0 + a[o + 1] * k1) & L.CAT_MASK
            s[1] = (a[o + 2] * k0 + a[o + 3] * k1) & L.CAT_MASK
        elif fam == L.FAM_CIRCLE_PERTURBED:
            s[0] = _wrap(self.degree * s[0] + label)
        elif fam == L.FAM_INTERVAL_PERTURBED:
            s[0] = self.base_interval(s[0]) + label
        elif fam == L.FAM_ROTATION:
            if label == 0:
                s[0] = _wrap(s[0] + self.alpha)

    def base_interval(self, x):
        if self.map_kind == L.MAP_BETA:
            v = self.map_param * x
            return v - math.floor(v)
        return self.map_param * min(x, 1.0 - x)

    # -- geometry --
    def dist(self, c):
        """Distance from the current state to the encoded center ``c``."""
        fam = self.fam
        s = self.s
        if fam == L.FAM_MARKOV23:
            d = s[0] - c[0] if s[0] >= c[0] else c[0] - s[0]
            if _Q - d < d:
                d = _Q - d
            return d / _Q
        if fam == L.FAM_CATMAPS:
            g0 = (s[0] - c[0]) & L.CAT_MASK
            g0 = min(g0, (1 << L.CAT_BITS) - g0) * L.CAT_SCALE
            g1 = (s[1] - c[1]) & L.CAT_MASK
            g1 = min(g1, (1 << L.CAT_BITS) - g1) * L.CAT_SCALE
            return math.sqrt(g0 * g0 + g1 * g1)
        g = abs(s[0] - c[0])
        if fam != L.FAM_INTERVAL_PERTURBED:
            g = min(g, 1.0 - g)
        return g


def _fresh(seed):
    return (int(seed), -1, float("nan"))


def orbit(fam_i, fam_f, noise_i, noise_f, state, start, n):
    m = Machine(fam_i, fam_f, noise_i, noise_f, state)
    m.set_point(start)
    out = np.empty((n + 1, m.dim))
    out[0] = m.point()
    for k in range(1, n + 1):
        m.step()
        out[k] = m.point()
    return out, m.noise.state()


def _return_times(m, start, center, radii, p, n_max, out):
    m.set_point(start)
    c = m.encode(center)
    nr = len(radii)
    j = 0
    k = 0
    while j < nr and k < n_max:
        m.step()
        k += 1
        if k > p:
            d = m.dist(c)
            while j < nr and d < radii[j]:
                out[j] = k
                j += 1


def return_times(fam_i, fam_f, noise_i, noise_f, state, start, center, radii, p, n_max):
    """First k in (p, n_max] with the orbit in B(center, r_j), per decreasing radius; 0 if capped."""
    radii = [float(r) for r in radii]
    out = np.zeros(len(radii), dtype=np.int64)
    m = Machine(fam_i, fam_f, noise_i, noise_f, state)
    _return_times(m, start, center, radii, int(p), int(n_max), out)
    return out


def return_times_batch(fam_i, fam_f, noise_i, noise_f, seeds, starts, centers, radii, p, n_max):
    radii = [float(r) for r in radii]
    seeds = np.asarray(seeds, dtype=np.uint64)
    out = np.zeros((seeds.size, len(radii)), dtype=np.int64)
    for i in range(seeds.size):
        m = Machine(fam_i, fam_f, noise_i, noise_f, _fresh(seeds[i]))
        _return_times(m, starts[i], centers[i], radii, int(p), int(n_max), out[i])
    return out


def orbit_batch(fam_i, fam_f, noise_i, noise_f, seeds, starts, n):
    seeds = np.asarray(seeds, dtype=np.uint64)
    dim = int(fam_i[1])
    out = np.empty((seeds.size, n + 1, dim))
    for i in range(seeds.size):
        out[i], _ = orbit(fam_i, fam_f, noise_i, noise_f, _fresh(seeds[i]), starts[i], n)
    return out


def ball_count(samples, cell_start, m, periodic, x, r):
    """Count sorted ``samples`` strictly inside B(x, r) using the uniform cell index."""
    samples = np.asarray(samples)
    dim = samples.shape[1]
    ranges = [_cell_range(float(x[a]), r, m, periodic) for a in range(dim)]
    if dim == 1:
        idx = [np.arange(cell_start[lo], cell_start[hi + 1]) for lo, hi in ranges[0]]
    else:
        idx = []
        for lo0, hi0 in ranges[0]:
            for row in range(lo0, hi0 + 1):
                for lo1, hi1 in ranges[1]:
                    idx.append(np.arange(cell_start[row * m + lo1], cell_start[row * m + hi1 + 1]))
    idx = np.concatenate(idx) if idx else np.empty(0, dtype=np.int64)
    pts = samples[idx]
    g = np.abs(pts - np.asarray(x, dtype=np.float64)[None, :dim])
    if periodic:
        g = np.minimum(g, 1.0 - g)
    d = g[:, 0] if dim == 1 else np.sqrt(g[:, 0] * g[:, 0] + g[:, 1] * g[:, 1])
    return int(np.count_nonzero(d < r))


def _cell_range(x, r, m, periodic):
    """Contiguous cell-index runs covering [x - r, x + r] along one axis."""
    # one spare cell per side absorbs rounding in x - r and x + r
    lo = math.floor((x - r) * m) - 1
    hi = math.floor((x + r) * m) + 1
    if not periodic:
        return [(max(lo, 0), min(hi, m - 1))]
    if hi - lo + 1 >= m:
        return [(0, m - 1)]
    lo %= m
    hi %= m
    if lo <= hi:
        return [(lo, hi)]
    return [(lo, m - 1), (0, hi)]
