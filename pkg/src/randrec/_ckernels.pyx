# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels. Must stay bit-identical to ``_pykernels``."""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint64_t, int64_t
from libc.math cimport floor, sqrt

cnp.import_array()

cdef enum:
    FAM_MARKOV23 = 0
    FAM_CATMAPS = 1
    FAM_CIRCLE_PERTURBED = 2
    FAM_INTERVAL_PERTURBED = 3
    FAM_ROTATION = 4
    NOISE_IID = 0
    NOISE_MARKOV = 1
    NOISE_BASEMAP = 2
    NOISE_ADDITIVE = 3
    MAP_BETA = 0
    NF = 160

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL
cdef uint64_t MIX1 = 0xBF58476D1CE4E5B9ULL
cdef uint64_t MIX2 = 0x94D049BB133111EBULL
cdef uint64_t Q = 4503599627370405ULL
cdef double QD = 4503599627370405.0
cdef uint64_t CAT_MASK = (1ULL << 52) - 1ULL
cdef uint64_t CAT_SIZE = 1ULL << 52
cdef double CAT_SCALE = 1.0 / 4503599627370496.0
cdef double CAT_SIZED = 4503599627370496.0
cdef double INV53 = 1.0 / 9007199254740992.0
cdef double INV52 = 1.0 / 4503599627370496.0
cdef double ONE_MINUS_ULP = 1.0 - 1.0 / 9007199254740992.0


cdef struct Machine:
    int fam
    int dim
    int degree
    int map_kind
    uint64_t a[8]
    double alpha
    double eps
    double map_param
    int nkind
    int nlab
    int npieces
    double nf[NF]
    uint64_t rng
    int64_t label
    double omega
    uint64_t k0
    uint64_t k1
    double x0
    double x1


cdef inline uint64_t mix64(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * MIX1
    z = (z ^ (z >> 27)) * MIX2
    return z ^ (z >> 31)


cdef inline double uniform(Machine* m) noexcept nogil:
    m.rng += GOLDEN
    return <double>(mix64(m.rng) >> 11) * INV53


cdef inline double open_uniform(Machine* m) noexcept nogil:
    m.rng += GOLDEN
    return (<double>(mix64(m.rng) >> 12) + 0.5) * INV52


cdef inline int pick(Machine* m, int offset) noexcept nogil:
    cdef double u = uniform(m)
    cdef int i
    for i in range(m.nlab - 1):
        if u < m.nf[offset + i]:
            return i
    return m.nlab - 1


cdef inline int basemap_label(Machine* m) noexcept nogil:
    cdef int mp = m.npieces
    cdef int i, j, lab, piece, cuts
    cdef double w
    if m.omega != m.omega:
        if m.nf[0] == m.nf[0]:
            m.omega = m.nf[0]
        else:
            m.omega = uniform(m)
    w = m.omega
    cuts = 2 + 3 * mp
    lab = m.nlab - 1
    for i in range(m.nlab - 1):
        if w < m.nf[cuts + i]:
            lab = i
            break
    piece = mp - 1
    for j in range(mp - 1):
        if w < m.nf[2 + j]:
            piece = j
            break
    w = m.nf[1 + mp + 1 + piece] * w + m.nf[1 + 2 * mp + 1 + piece]
    if w < 0.0:
        w = 0.0
    elif w >= 1.0:
        w = ONE_MINUS_ULP
    m.omega = w
    m.label = lab
    return lab


cdef inline int next_label(Machine* m) noexcept nogil:
    if m.nkind == NOISE_IID:
        return pick(m, 0)
    if m.nkind == NOISE_MARKOV:
        if m.label < 0:
            m.label = pick(m, 0)
        else:
            m.label = pick(m, m.nlab + m.nlab * <int>m.label)
        return <int>m.label
    return basemap_label(m)


cdef inline double next_offset(Machine* m) noexcept nogil:
    cdef double u = open_uniform(m)
    return m.nf[0] * (2.0 * u - 1.0)


cdef inline double wrap(double v) noexcept nogil:
    cdef double y = v - floor(v)
    if y >= 1.0:
        return 0.0
    return y


cdef inline double base_interval(Machine* m, double x) noexcept nogil:
    cdef double v
    if m.map_kind == MAP_BETA:
        v = m.map_param * x
        return v - floor(v)
    if x < 1.0 - x:
        return m.map_param * x
    return m.map_param * (1.0 - x)


cdef inline void step(Machine* m) noexcept nogil:
    cdef int lab, o
    cdef uint64_t k0, k1
    cdef double t, v
    if m.fam == FAM_MARKOV23:
        lab = next_label(m)
        if lab == 0:
            m.k0 = (m.k0 * 2ULL) % Q
        else:
            m.k0 = (m.k0 * 3ULL) % Q
    elif m.fam == FAM_CATMAPS:
        lab = next_label(m)
        o = 0 if lab == 0 else 4
        k0 = m.k0
        k1 = m.k1
        m.k0 = (m.a[o] * k0 + m.a[o + 1] * k1) & CAT_MASK
        m.k1 = (m.a[o + 2] * k0 + m.a[o + 3] * k1) & CAT_MASK
    elif m.fam == FAM_CIRCLE_PERTURBED:
        v = next_offset(m)
        m.x0 = wrap(<double>m.degree * m.x0 + v)
    elif m.fam == FAM_INTERVAL_PERTURBED:
        t = base_interval(m, m.x0)
        while True:
            v = t + next_offset(m)
            if 0.0 <= v <= 1.0:
                break
        m.x0 = v
    else:
        lab = next_label(m)
        if lab == 0:
            m.x0 = wrap(m.x0 + m.alpha)


cdef inline void encode(Machine* m, const double* x, uint64_t* ck, double* cx) noexcept nogil:
    cdef uint64_t k
    if m.fam == FAM_MARKOV23:
        k = <uint64_t>floor(x[0] * QD + 0.5)
        ck[0] = k % Q
    elif m.fam == FAM_CATMAPS:
        ck[0] = (<uint64_t>floor(x[0] * CAT_SIZED + 0.5)) & CAT_MASK
        ck[1] = (<uint64_t>floor(x[1] * CAT_SIZED + 0.5)) & CAT_MASK
    else:
        cx[0] = x[0]


cdef inline void set_point(Machine* m, const double* x) noexcept nogil:
    cdef uint64_t ck[2]
    cdef double cx[2]
    ck[0] = 0
    ck[1] = 0
    cx[0] = 0.0
    cx[1] = 0.0
    encode(m, x, ck, cx)
    m.k0 = ck[0]
    m.k1 = ck[1]
    m.x0 = cx[0]


cdef inline void get_point(Machine* m, double* out) noexcept nogil:
    if m.fam == FAM_MARKOV23:
        out[0] = <double>m.k0 / QD
    elif m.fam == FAM_CATMAPS:
        out[0] = <double>m.k0 * CAT_SCALE
        out[1] = <double>m.k1 * CAT_SCALE
    else:
        out[0] = m.x0


cdef inline double dist(Machine* m, uint64_t* ck, double* cx) noexcept nogil:
    cdef uint64_t d, g0, g1
    cdef double h0, h1, g
    if m.fam == FAM_MARKOV23:
        if m.k0 >= ck[0]:
            d = m.k0 - ck[0]
        else:
            d = ck[0] - m.k0
        if Q - d < d:
            d = Q - d
        return <double>d / QD
    if m.fam == FAM_CATMAPS:
        g0 = (m.k0 - ck[0]) & CAT_MASK
        if CAT_SIZE - g0 < g0:
            g0 = CAT_SIZE - g0
        g1 = (m.k1 - ck[1]) & CAT_MASK
        if CAT_SIZE - g1 < g1:
            g1 = CAT_SIZE - g1
        h0 = <double>g0 * CAT_SCALE
        h1 = <double>g1 * CAT_SCALE
        return sqrt(h0 * h0 + h1 * h1)
    g = m.x0 - cx[0]
    if g < 0.0:
        g = -g
    if m.fam != FAM_INTERVAL_PERTURBED and 1.0 - g < g:
        g = 1.0 - g
    return g


cdef void load(Machine* m, const int64_t[::1] fam_i, const double[::1] fam_f,
               const int64_t[::1] noise_i, const double[::1] noise_f) noexcept:
    cdef int i
    m.fam = <int>fam_i[0]
    m.dim = <int>fam_i[1]
    for i in range(8):
        m.a[i] = <uint64_t>fam_i[2 + i]
    m.degree = <int>fam_i[10]
    m.map_kind = <int>fam_i[11]
    m.alpha = fam_f[0]
    m.eps = fam_f[1]
    m.map_param = fam_f[2]
    m.nkind = <int>noise_i[0]
    m.nlab = <int>noise_i[1]
    m.npieces = <int>noise_i[2]
    for i in range(NF):
        m.nf[i] = noise_f[i]


cdef double NAN_VALUE = float("nan")


def _arrays(fam_i, fam_f, noise_i, noise_f):
    return (np.ascontiguousarray(fam_i, dtype=np.int64), np.ascontiguousarray(fam_f, dtype=np.float64),
            np.ascontiguousarray(noise_i, dtype=np.int64), np.ascontiguousarray(noise_f, dtype=np.float64))


def orbit(fam_i, fam_f, noise_i, noise_f, state, start, Py_ssize_t n):
    cdef Machine m
    fi, ff, ni, nf = _arrays(fam_i, fam_f, noise_i, noise_f)
    load(&m, fi, ff, ni, nf)
    m.rng = <uint64_t>int(state[0])
    m.label = <int64_t>int(state[1])
    m.omega = float(state[2])
    cdef double[::1] x = np.ascontiguousarray(start, dtype=np.float64)
    out_arr = np.empty((n + 1, m.dim))
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t k
    with nogil:
        set_point(&m, &x[0])
        get_point(&m, &out[0, 0])
        for k in range(1, n + 1):
            step(&m)
            get_point(&m, &out[k, 0])
    return out_arr, (int(m.rng), int(m.label), float(m.omega))


cdef inline void run_return_times(Machine* m, const double* start, const double* center,
                                  const double* radii, Py_ssize_t nr, int64_t p, int64_t n_max,
                                  int64_t* out) noexcept nogil:
    cdef uint64_t ck[2]
    cdef double cx[2]
    cdef Py_ssize_t j = 0
    cdef int64_t k = 0
    cdef double d
    ck[0] = 0
    ck[1] = 0
    cx[0] = 0.0
    cx[1] = 0.0
    set_point(m, start)
    encode(m, center, ck, cx)
    while j < nr and k < n_max:
        step(m)
        k += 1
        if k > p:
            d = dist(m, ck, cx)
            while j < nr and d < radii[j]:
                out[j] = k
                j += 1


def return_times(fam_i, fam_f, noise_i, noise_f, state, start, center, radii, p, n_max):
    cdef Machine m
    fi, ff, ni, nf = _arrays(fam_i, fam_f, noise_i, noise_f)
    load(&m, fi, ff, ni, nf)
    m.rng = <uint64_t>int(state[0])
    m.label = <int64_t>int(state[1])
    m.omega = float(state[2])
    cdef double[::1] x = np.ascontiguousarray(start, dtype=np.float64)
    cdef double[::1] c = np.ascontiguousarray(center, dtype=np.float64)
    cdef double[::1] r = np.ascontiguousarray(radii, dtype=np.float64)
    out_arr = np.zeros(r.shape[0], dtype=np.int64)
    cdef int64_t[::1] out = out_arr
    cdef int64_t pp = p, nm = n_max
    if r.shape[0] == 0:
        return out_arr
    with nogil:
        run_return_times(&m, &x[0], &c[0], &r[0], r.shape[0], pp, nm, &out[0])
    return out_arr


def return_times_batch(fam_i, fam_f, noise_i, noise_f, seeds, starts, centers, radii, p, n_max):
    cdef Machine m
    fi, ff, ni, nf = _arrays(fam_i, fam_f, noise_i, noise_f)
    load(&m, fi, ff, ni, nf)
    cdef const uint64_t[::1] sd = np.ascontiguousarray(seeds, dtype=np.uint64)
    cdef const double[:, ::1] xs = np.ascontiguousarray(starts, dtype=np.float64)
    cdef const double[:, ::1] cs = np.ascontiguousarray(centers, dtype=np.float64)
    cdef double[::1] r = np.ascontiguousarray(radii, dtype=np.float64)
    cdef Py_ssize_t M = sd.shape[0], nr = r.shape[0], i
    out_arr = np.zeros((M, nr), dtype=np.int64)
    cdef int64_t[:, ::1] out = out_arr
    cdef int64_t pp = p, nm = n_max
    if M == 0 or nr == 0:
        return out_arr
    with nogil:
        for i in range(M):
            m.rng = sd[i]
            m.label = -1
            m.omega = NAN_VALUE
            run_return_times(&m, &xs[i, 0], &cs[i, 0], &r[0], nr, pp, nm, &out[i, 0])
    return out_arr


def orbit_batch(fam_i, fam_f, noise_i, noise_f, seeds, starts, Py_ssize_t n):
    cdef Machine m
    fi, ff, ni, nf = _arrays(fam_i, fam_f, noise_i, noise_f)
    load(&m, fi, ff, ni, nf)
    cdef const uint64_t[::1] sd = np.ascontiguousarray(seeds, dtype=np.uint64)
    cdef const double[:, ::1] xs = np.ascontiguousarray(starts, dtype=np.float64)
    cdef Py_ssize_t M = sd.shape[0], i, k
    out_arr = np.empty((M, n + 1, m.dim))
    cdef double[:, :, ::1] out = out_arr
    with nogil:
        for i in range(M):
            m.rng = sd[i]
            m.label = -1
            m.omega = NAN_VALUE
            set_point(&m, &xs[i, 0])
            get_point(&m, &out[i, 0, 0])
            for k in range(1, n + 1):
                step(&m)
                get_point(&m, &out[i, k, 0])
    return out_arr


cdef inline Py_ssize_t floordiv_cells(double v, Py_ssize_t m) noexcept nogil:
    return <Py_ssize_t>floor(v * <double>m)


cdef Py_ssize_t cell_runs(double x, double r, Py_ssize_t m, bint periodic, Py_ssize_t* lo, Py_ssize_t* hi) noexcept nogil:
    # one spare cell per side absorbs rounding in x - r and x + r
    cdef Py_ssize_t a = floordiv_cells(x - r, m) - 1
    cdef Py_ssize_t b = floordiv_cells(x + r, m) + 1
    if not periodic:
        lo[0] = a if a > 0 else 0
        hi[0] = b if b < m - 1 else m - 1
        return 1
    if b - a + 1 >= m:
        lo[0] = 0
        hi[0] = m - 1
        return 1
    a = ((a % m) + m) % m
    b = ((b % m) + m) % m
    if a <= b:
        lo[0] = a
        hi[0] = b
        return 1
    lo[0] = a
    hi[0] = m - 1
    lo[1] = 0
    hi[1] = b
    return 2


cdef inline int64_t count_run(const double[:, ::1] s, Py_ssize_t i0, Py_ssize_t i1, int dim, bint periodic,
                              double x0, double x1, double r) noexcept nogil:
    cdef Py_ssize_t i
    cdef int64_t c = 0
    cdef double g0, g1, d
    for i in range(i0, i1):
        g0 = s[i, 0] - x0
        if g0 < 0.0:
            g0 = -g0
        if periodic and 1.0 - g0 < g0:
            g0 = 1.0 - g0
        if dim == 1:
            d = g0
        else:
            g1 = s[i, 1] - x1
            if g1 < 0.0:
                g1 = -g1
            if periodic and 1.0 - g1 < g1:
                g1 = 1.0 - g1
            d = sqrt(g0 * g0 + g1 * g1)
        if d < r:
            c += 1
    return c


def ball_count(samples, cell_start, Py_ssize_t m, bint periodic, x, double r):
    cdef const double[:, ::1] s = np.ascontiguousarray(samples, dtype=np.float64)
    cdef const int64_t[::1] cs = np.ascontiguousarray(cell_start, dtype=np.int64)
    cdef double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef int dim = s.shape[1]
    cdef Py_ssize_t lo0[2]
    cdef Py_ssize_t hi0[2]
    cdef Py_ssize_t lo1[2]
    cdef Py_ssize_t hi1[2]
    cdef Py_ssize_t n0, n1, a, b, row
    cdef int64_t total = 0
    cdef double x0 = xv[0]
    cdef double x1 = xv[1] if dim == 2 else 0.0
    with nogil:
        n0 = cell_runs(x0, r, m, periodic, lo0, hi0)
        if dim == 1:
            for a in range(n0):
                total += count_run(s, cs[lo0[a]], cs[hi0[a] + 1], dim, periodic, x0, x1, r)
        else:
            n1 = cell_runs(x1, r, m, periodic, lo1, hi1)
            for a in range(n0):
                for row in range(lo0[a], hi0[a] + 1):
                    for b in range(n1):
                        total += count_run(s, cs[row * m + lo1[b]], cs[row * m + hi1[b] + 1],
                                           dim, periodic, x0, x1, r)
    return int(total)
