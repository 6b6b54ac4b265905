"""Exact expected return time of 1/5 under the x2 / x3 maps, by linear solve.

The orbit of 1/5 stays in {1/5, 2/5, 3/5, 4/5}. The state is (position, next
label) and h(s) = 1 + sum over successors s' not at 1/5 of P(s -> s') h(s').
"""

import numpy as np

from randrec import systems as S


def _label_law(noise):
    if isinstance(noise, S.IID):
        w = np.array(noise.weights)
        return w, np.tile(w, (len(w), 1))
    return np.array(noise.initial), np.array(noise.matrix)


def mod5_expected_return(noise, factors=(2, 3)):
    init, P = _label_law(noise)
    L = len(init)
    states = [(k, lab) for k in range(1, 5) for lab in range(L)]
    index = {s: i for i, s in enumerate(states)}
    A = np.eye(len(states))
    b = np.ones(len(states))
    for (k, lab), i in index.items():
        y = (k * factors[lab]) % 5
        if y == 1:
            continue
        for nxt in range(L):
            A[i, index[(y, nxt)]] -= P[lab, nxt]
    h = np.linalg.solve(A, b)
    return float(sum(init[lab] * h[index[(1, lab)]] for lab in range(L)))
