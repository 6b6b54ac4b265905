"""Points, metric and open balls on the circle, the 2-torus and the unit interval.

Circle and torus carry the flat metric with per-coordinate wrap
``min(|a - b|, 1 - |a - b|)``; the interval carries ``|a - b|``.
"""

import enum
import math

import numpy as np


class InvalidInputError(ValueError):
    """Raised for arguments outside an operation's domain."""


class Space(enum.Enum):
    CIRCLE = "circle"
    TORUS2 = "torus2"
    INTERVAL = "interval"

    @property
    def dim(self):
        return 2 if self is Space.TORUS2 else 1

    @property
    def periodic(self):
        return self is not Space.INTERVAL

    @property
    def diameter(self):
        if self is Space.CIRCLE:
            return 0.5
        if self is Space.TORUS2:
            return math.sqrt(0.5)
        return 1.0


def wrap(v):
    """Reduce a real into [0, 1). Exactly representable results only."""
    y = v - math.floor(v)
    # tiny negative inputs round up to 1.0
    return 0.0 if y >= 1.0 else y


def point(space, coords):
    """Validate ``coords`` and return it as a normalized float array of shape (dim,)."""
    x = np.atleast_1d(np.asarray(coords, dtype=np.float64)).copy()
    if x.shape != (space.dim,):
        raise InvalidInputError(f"{space.value} points have {space.dim} coordinate(s), got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise InvalidInputError("coordinates must be finite")
    if space.periodic:
        x = np.array([wrap(v) for v in x])
    elif not (0.0 <= x[0] <= 1.0):
        raise InvalidInputError(f"interval point {x[0]} outside [0, 1]")
    return x


def _gaps(space, a, b):
    g = np.abs(np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64))
    if space.periodic:
        g = np.minimum(g, 1.0 - g)
    return g


def distance(space, a, b):
    a = np.atleast_1d(np.asarray(a, dtype=np.float64))
    b = np.atleast_1d(np.asarray(b, dtype=np.float64))
    if a.shape != (space.dim,) or b.shape != (space.dim,):
        raise InvalidInputError(f"dimension mismatch for {space.value}: {a.shape} vs {b.shape}")
    g = _gaps(space, a, b)
    if space.dim == 1:
        return float(g[0])
    return math.sqrt(g[0] * g[0] + g[1] * g[1])


def distances(space, points, center):
    """Distances from each row of ``points`` to ``center``; same arithmetic as :func:`distance`."""
    points = np.asarray(points, dtype=np.float64).reshape(-1, space.dim)
    return paired_distances(space, points, np.asarray(center, dtype=np.float64).reshape(1, space.dim))


def paired_distances(space, a, b):
    """Row-wise distances between two (n, dim) arrays (rows broadcast)."""
    g = _gaps(space, np.asarray(a, dtype=np.float64).reshape(-1, space.dim), np.asarray(b, dtype=np.float64).reshape(-1, space.dim))
    if space.dim == 1:
        return g[:, 0]
    return np.sqrt(g[:, 0] * g[:, 0] + g[:, 1] * g[:, 1])


def in_ball(space, center, r, y):
    """Membership in the open ball B(center, r)."""
    if not r > 0:
        raise InvalidInputError(f"radius must be positive, got {r}")
    return distance(space, center, y) < r
