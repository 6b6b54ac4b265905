"""Packed numeric layout shared by the compiled and pure-Python kernels.

A system travels to the kernels as four flat arrays::

    fam_i   int64[16]   [family, dim, A0 (4 entries), A1 (4 entries), degree, map_kind]
    fam_f   float64[8]  [alpha, eps, map_param]
    noise_i int64[8]    [kind, n_labels, n_pieces]
    noise_f float64[NF] kind-specific, see below

noise_f by kind:

* IID:      cumulative weights (n_labels)
* MARKOV:   cumulative initial distribution (L), then cumulative rows (L * L)
* BASEMAP:  omega0 (nan = draw from the seed), breakpoints (m + 1), slopes (m),
            intercepts (m), label cut points (L - 1)
* ADDITIVE: eps

Noise state is the triple ``(rng_state, last_label, omega)`` with
``last_label = -1`` and ``omega = nan`` before the first draw.
"""

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
MAP_TENT = 1

# markov23 orbits live on the lattice Z/Q with Q = 15 * L, L prime.
# 2 and 3 are units mod L so neither map loses information, 1/3 and 1/5
# are exact, and Q < 2**52 makes float <-> lattice conversion lossless.
MARKOV23_MODULUS = 4503599627370405
# cat-map orbits live on (Z / 2**52)**2; det = +-1 makes every map a bijection.
CAT_BITS = 52
CAT_MASK = (1 << CAT_BITS) - 1
CAT_SCALE = 2.0 ** -CAT_BITS

FAM_I_SIZE = 16
FAM_F_SIZE = 8
NOISE_I_SIZE = 8
NOISE_F_SIZE = 160
MAX_LABELS = 8
MAX_PIECES = 16

ONE_MINUS_ULP = 1.0 - 2.0 ** -53
