"""Counter-based 64-bit generator shared by every kernel backend.

The generator is SplitMix64: the state advances by a fixed odd increment and
each output is a bijective mix of the state. Because the n-th output depends
only on ``seed + n * GOLDEN``, streams are cheap to derive and identical in the
compiled and pure-Python backends.

Per-realization seeds come from :func:`derive_seed`::

    derive_seed(master, i, stream) = mix64(mix64(master + stream * STREAM_KEY)
                                           + (i + 1) * GOLDEN)

so a Monte Carlo task depends only on its own index, never on scheduling.
"""

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
STREAM_KEY = 0xD1B54A32D192ED03
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB
INV_2_53 = 2.0 ** -53

# independent sub-streams used by the Monte Carlo drivers
STREAM_NOISE = 0
STREAM_POINTS = 1
STREAM_AUX = 2


def mix64(z):
    z &= MASK64
    z = ((z ^ (z >> 30)) * MIX1) & MASK64
    z = ((z ^ (z >> 27)) * MIX2) & MASK64
    return z ^ (z >> 31)


def next_u64(state):
    """Advance ``state`` once; returns ``(new_state, output)``."""
    state = (state + GOLDEN) & MASK64
    return state, mix64(state)


def u64_to_unit(z):
    """Map a 64-bit word to [0, 1) with 53 random bits."""
    return (z >> 11) * INV_2_53


def u64_to_open_unit(z):
    """Map a 64-bit word to the open interval (0, 1)."""
    return ((z >> 12) + 0.5) * 2.0 ** -52


def derive_seed(master, index, stream=STREAM_NOISE):
    base = mix64((master + stream * STREAM_KEY) & MASK64)
    return mix64((base + (index + 1) * GOLDEN) & MASK64)


# -- vectorised versions (numpy uint64 arithmetic wraps modulo 2**64) --

def _mix64_array(z):
    z = z.copy()
    z ^= z >> np.uint64(30)
    z *= np.uint64(MIX1)
    z ^= z >> np.uint64(27)
    z *= np.uint64(MIX2)
    z ^= z >> np.uint64(31)
    return z


def derive_seeds(master, start, count, stream=STREAM_NOISE):
    """Vector of ``derive_seed(master, i, stream)`` for ``i`` in ``[start, start + count)``."""
    base = np.uint64(mix64((master + stream * STREAM_KEY) & MASK64))
    idx = np.arange(start + 1, start + count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return _mix64_array(base + idx * np.uint64(GOLDEN))


def uniforms_from_seeds(seeds, count):
    """First ``count`` unit uniforms of each stream; shape ``(len(seeds), count)``."""
    seeds = np.asarray(seeds, dtype=np.uint64)
    out = np.empty((seeds.size, count))
    with np.errstate(over="ignore"):
        for j in range(count):
            state = seeds + np.uint64((GOLDEN * (j + 1)) & MASK64)
            z = _mix64_array(state)
            out[:, j] = (z >> np.uint64(11)).astype(np.float64) * INV_2_53
    return out
