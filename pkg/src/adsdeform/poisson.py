"""Leafwise symplectic structure on AdS3 and the B-field profile.

The leaves are the twisted conjugacy classes; in twisted coordinates
(a, phi, nu) the form omega is the KKS form of the orbit Ad(G)H pulled back
along the coset projection and extended by zero in the a direction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import fd
from .bhtz_geometry import (
    TwistedCoords,
    _coset_maurer_cartan,
    metric_matrix,
    twisted_iwasawa_compose,
    twisted_iwasawa_decompose,
)
from .lie_core import (
    H,
    AlgebraVector,
    GroupElement,
    adjoint_matrix,
    bracket,
    killing_form,
    multiply,
    twisted_conjugate,
)

TANGENCY_TOL = 1e-8


class NotTangentError(ValueError):
    pass


def _generator(xi: AlgebraVector, v: AlgebraVector) -> AlgebraVector:
    """Some X with [X, xi] = v, or NotTangentError."""
    # [X, xi] = -ad_xi X
    m = -adjoint_matrix(xi)
    x, *_ = np.linalg.lstsq(m, v.as_array(), rcond=None)
    res = np.linalg.norm(m @ x - v.as_array())
    if res > TANGENCY_TOL * (1.0 + v.norm()):
        raise NotTangentError(f"vector not tangent to the orbit (residual {res:.2e})")
    return AlgebraVector(*x)


def kks_form(xi: AlgebraVector, v: AlgebraVector, w: AlgebraVector) -> float:
    """KKS form beta(xi, [X, Y]) for tangents v = [X, xi], w = [Y, xi]."""
    return killing_form(xi, bracket(_generator(xi, v), _generator(xi, w)))


def kks_from_generators(xi: AlgebraVector, x: AlgebraVector, y: AlgebraVector) -> float:
    return killing_form(xi, bracket(x, y))


def omega_eval(x, v, w) -> float:
    """omega at x on twisted-chart tangents (da, dphi, dnu)."""
    tc = x if isinstance(x, TwistedCoords) else twisted_iwasawa_decompose(x)
    yv = _coset_maurer_cartan(tc.phi, tc.nu, v[1], v[2])
    yw = _coset_maurer_cartan(tc.phi, tc.nu, w[1], w[2])
    # Ad(g) is an isometry of beta, so beta(Ad g H, [Ad g Yv, Ad g Yw]) = beta(H, [Yv, Yw])
    return killing_form(H, bracket(yv, yw))


def omega_matrix(x) -> np.ndarray:
    basis = np.eye(3)
    return np.array([[omega_eval(x, bi, bj) for bj in basis] for bi in basis])


def omega_exterior_derivative(p, h: float = 1e-2) -> float:
    """d omega on the coordinate cube at chart point p = (a, phi, nu), by FD."""
    p = np.asarray(p, dtype=float)

    def comp(i, j):
        return lambda q: omega_matrix(TwistedCoords(*q))[i, j]

    # (d omega)_{012} = d0 w12 - d1 w02 + d2 w01
    e = np.eye(3)
    return (
        fd.directional(comp(1, 2), p, e[0], h)
        - fd.directional(comp(0, 2), p, e[1], h)
        + fd.directional(comp(0, 1), p, e[2], h)
    )


def pushforward_twisted(g: GroupElement, tc: TwistedCoords, v, h: float = 1e-5):
    """Chart image of tau_g and its differential on v, by central differences."""
    p = np.array([tc.a, tc.phi, tc.nu])

    def image(q):
        y = twisted_conjugate(g, twisted_iwasawa_compose(TwistedCoords(*q)))
        t = twisted_iwasawa_decompose(y)
        return np.array([t.a, t.phi, t.nu])

    base = image(p)
    # keep the image chart on the same nu branch by differencing through
    # the same decomposition
    dv = fd.directional(image, p, v, h)
    return TwistedCoords(*base), dv


# ------------------------------------------------------------------ B-field


@dataclass(frozen=True)
class BFieldProfile:
    """f(a) = tanh(a/2) + c."""

    c: float = 0.0

    def __call__(self, a):
        return np.tanh(0.5 * np.asarray(a)) + self.c

    def fprime(self, a):
        return 0.5 / np.cosh(0.5 * np.asarray(a)) ** 2


@dataclass(frozen=True)
class DerivedBFieldProfile:
    """f(a) = a/2 + sinh(2a)/4 + c, so f'(a) = cosh^2(a).

    This is the profile forced by nu = f' da ^ omega for the metric
    da^2 - 1/4 cosh^2(a) ds^2_{G/A}.
    """

    c: float = 0.0

    def __call__(self, a):
        a = np.asarray(a)
        return 0.5 * a + 0.25 * np.sinh(2 * a) + self.c

    def fprime(self, a):
        return np.cosh(np.asarray(a)) ** 2


def orthonormal_frame(g: np.ndarray) -> np.ndarray:
    """Columns e_i with e_i^T g e_j = diag(+-1), positively oriented."""
    ev, vecs = np.linalg.eigh(g)
    fr = vecs / np.sqrt(np.abs(ev))
    if np.linalg.det(fr) < 0:
        fr[:, 0] = -fr[:, 0]
    return fr


def volume_form(x, frame: np.ndarray) -> float:
    """Metric volume nu(e1, e2, e3) with chart orientation (da, dphi, dnu)."""
    g = metric_matrix(x)
    return math.sqrt(abs(np.linalg.det(g))) * np.linalg.det(frame)


def da_wedge_omega(x, frame: np.ndarray) -> float:
    # (da ^ omega)(u, v, w) = da(u) om(v,w) - da(v) om(u,w) + da(w) om(u,v)
    om = omega_matrix(x)
    u, v, w = frame.T
    return u[0] * (v @ om @ w) - v[0] * (u @ om @ w) + w[0] * (u @ om @ v)


def bfield_ratio(profile, x, h: float = 1e-4) -> float:
    """nu / (f' da ^ omega) on an orthonormal frame; f' by Richardson FD."""
    tc = x if isinstance(x, TwistedCoords) else twisted_iwasawa_decompose(x)
    fr = orthonormal_frame(metric_matrix(tc))
    fp = float(fd.derivative(profile, tc.a, h))
    return volume_form(tc, fr) / (fp * da_wedge_omega(tc, fr))


def calibrate(profile, h: float = 1e-4) -> float:
    """The one global constant nu = C f' da ^ omega, fixed at x = e."""
    return bfield_ratio(profile, TwistedCoords(0.0, 0.0, 0.0), h)


def bfield_check(profile, x, calibration: float | None = None, h: float = 1e-4) -> float:
    """Relative residual |C f' da^omega - nu| / |nu| at x."""
    c = calibrate(profile, h) if calibration is None else calibration
    r = bfield_ratio(profile, x, h)
    return abs(c / r - 1.0)


# ------------------------------------------------- abelian-action Poisson bracket


def abelian_poisson(a, b, J, fields, p, h: float = 1e-4):
    """{a, b}(p) = J^{ij} (X_i a)(p) (X_j b)(p) for fundamental fields X_i.

    ``fields(p)`` returns the d vectors X_i(p) as rows.
    """
    J = np.asarray(J, dtype=float)
    xs = np.atleast_2d(fields(p))
    da = np.array([fd.directional(a, p, xi, h) for xi in xs])
    db = np.array([fd.directional(b, p, xi, h) for xi in xs])
    return da @ J @ db


def abelian_poisson_modes(a: dict, b: dict, J) -> dict:
    """Exact bracket of trig polynomials for the translation action on T^d."""
    J = np.asarray(J, dtype=float)
    out: dict = {}
    for m, am in a.items():
        for n, bn in b.items():
            c = -float(np.asarray(m) @ J @ np.asarray(n)) * am * bn
            if c != 0:
                k = tuple(int(i + j) for i, j in zip(m, n))
                out[k] = out.get(k, 0) + c
    return {k: v for k, v in out.items() if v != 0}
