"""Quadrature on the reference triangle ``{(t1, t2): t1, t2 >= 0, t1 + t2 <= 1}``."""

import numpy as np

_A1, _W1 = 0.445948490915965, 0.223381589678011
_A2, _W2 = 0.091576213509771, 0.109951743655322

# 6-point rule exact for polynomials of degree 4.  Weights sum to one, so an
# integral over a flat triangle T is area(T) * sum(w * f(node)).
NODES = np.array(
    [
        [_A1, _A1],
        [1.0 - 2.0 * _A1, _A1],
        [_A1, 1.0 - 2.0 * _A1],
        [_A2, _A2],
        [1.0 - 2.0 * _A2, _A2],
        [_A2, 1.0 - 2.0 * _A2],
    ]
)
WEIGHTS = np.array([_W1, _W1, _W1, _W2, _W2, _W2])

# Barycentric weights of the three vertices at each node, shape (6, 3).
BARY = np.column_stack([1.0 - NODES[:, 0] - NODES[:, 1], NODES[:, 0], NODES[:, 1]])


def lattice(k):
    """Barycentric lattice with ``k`` subdivisions per edge, shape ``(m, 3)``."""
    pts = [(k - i - j, i, j) for i in range(k + 1) for j in range(k + 1 - i)]
    return np.array(pts, dtype=float) / k
