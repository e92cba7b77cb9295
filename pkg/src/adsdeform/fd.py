"""Central finite differences with one Richardson step."""

import numpy as np


def derivative(f, x: float, h: float = 1e-4):
    d1 = (f(x + h) - f(x - h)) / (2 * h)
    d2 = (f(x + h / 2) - f(x - h / 2)) / h
    return (4 * d2 - d1) / 3


def directional(f, p, v, h: float = 1e-4):
    """d/dt f(p + t v) at t = 0."""
    p = np.asarray(p, dtype=float)
    v = np.asarray(v, dtype=float)
    return derivative(lambda t: f(p + t * v), 0.0, h)


def jacobian(f, p, h: float = 1e-4):
    p = np.asarray(p, dtype=float)
    cols = [np.atleast_1d(directional(f, p, e, h)) for e in np.eye(len(p))]
    return np.stack(cols, axis=-1)
