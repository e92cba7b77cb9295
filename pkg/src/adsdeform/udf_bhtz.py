"""Transport of the symmetric-space kernel to R = AN and the deformation
formula for R-actions, with the two BHTZ domains as examples.

R acts on M = (a, l) through the transvections

    rho_(t,s)(a, l) = (a + t, l + s e^{-a}),

i.e. the boost flow together with the translation flow e^{-a} d_l. With
base point (0, 0) the orbit map is the identity in coordinates, so a
function u(t, s) on R is the function u(a, l) on M.

For an R-action tau on X the deformed product is

    (a * b)(x) = int K(e, g, h) a(tau_{g^-1} x) b(tau_{h^-1} x) dg dh

with left Haar measure dt ds.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import fd
from .bhtz_geometry import (
    DecompositionError,
    KillingPair,
    ModifiedIwasawa,
    RotParams,
    extension_an_coordinate,
    mass_momentum,
    modified_iwasawa_compose,
    modified_iwasawa_decompose,
    rotating_pair,
    spinless_pair,
    taub_action,
    twisted_iwasawa_decompose,
    z_action,
)
from .lie_core import (
    ANElement,
    GroupElement,
    a_element,
    center_element,
    k_element,
    multiply,
    sigma,
    twisted_conjugate,
)
from .symsym_p11 import Grid, _arr, kernel, star_at, symmetry, transvection

# ------------------------------------------------------------ R <-> M


def rho(r: ANElement, p) -> np.ndarray:
    """Transvection action of r on M."""
    p = _arr(p)
    return np.array([p[0] + r.t, p[1] + r.s * math.exp(-p[0])])


def rho_array(t, s, p):
    """Vectorised rho over arrays of group coordinates (t, s) at one point p."""
    p = _arr(p)
    return np.stack([p[0] + t, p[1] + s * np.exp(-p[0]) + 0 * t], axis=-1)


def symmetry_pair(r: ANElement):
    """(x, y) with s_x s_y = rho(r); needs r.t != 0."""
    if r.t == 0:
        raise ValueError("pure translations need four symmetries")
    lx = -r.s / (2 * math.sinh(r.t / 2))
    return np.array([r.t / 2, lx]), np.array([0.0, lx * math.exp(r.t / 2)])


@dataclass(frozen=True)
class OrbitIdentification:
    """r -> rho_r(base), a bijection R -> M."""

    base: tuple = (0.0, 0.0)

    def to_point(self, r: ANElement) -> np.ndarray:
        return rho(r, self.base)

    def to_group(self, p) -> ANElement:
        p = _arr(p)
        a0, l0 = self.base
        return ANElement(p[0] - a0, (p[1] - l0) * math.exp(a0))

    def to_points(self, t, s) -> np.ndarray:
        a0, l0 = self.base
        return np.stack([a0 + np.asarray(t, float), l0 + np.asarray(s, float) * math.exp(-a0)], axis=-1)

    def check(self, samples, tol: float = 1e-8) -> float:
        """Roundtrip, transitivity (rho_r is a transvection) and freeness on samples."""
        worst = 0.0
        for r in samples:
            p = self.to_point(r)
            back = self.to_group(p)
            worst = max(worst, abs(back.t - r.t), abs(back.s - r.s))
            q = transvection(r.t, 0.0, r.s)(np.asarray(self.base))
            worst = max(worst, float(np.max(np.abs(q - p))))
        jac = fd.jacobian(lambda v: self.to_point(ANElement(v[0], v[1])), np.zeros(2))
        if abs(np.linalg.det(jac)) < 1e-8:
            raise RuntimeError("orbit map is not a local diffeomorphism at e")
        if worst > tol:
            raise RuntimeError(f"orbit identification failed (defect {worst:.2e})")
        return worst


IDENT = OrbitIdentification()


def left_haar_density(r: ANElement) -> float:
    return 1.0


def right_haar_density(r: ANElement) -> float:
    return math.exp(r.t)


def haar_left_invariance_defect(r: ANElement, g: ANElement, h: float = 1e-5) -> float:
    """|det d(L_r)| * density(r g) / density(g) - 1, by finite differences."""
    jac = fd.jacobian(lambda v: _an_vec(r @ ANElement(v[0], v[1])), _an_vec(g), h)
    return abs(abs(np.linalg.det(jac)) * left_haar_density(r @ g) / left_haar_density(g) - 1.0)


def _an_vec(r: ANElement) -> np.ndarray:
    return np.array([r.t, r.s])


def omega_pullback(r: ANElement, h: float = 1e-6) -> float:
    """omega(d_t, d_s) pulled back to R at r."""
    jac = fd.jacobian(lambda v: IDENT.to_point(ANElement(v[0], v[1])), _an_vec(r), h)
    return float(np.linalg.det(jac))


def omega_left_invariance_defect(r: ANElement, g: ANElement, h: float = 1e-6) -> float:
    """Compare (L_r^* omega)_g with omega_g, both as dt ^ ds coefficients."""
    jac = fd.jacobian(lambda v: _an_vec(r @ ANElement(v[0], v[1])), _an_vec(g), h)
    pulled = omega_pullback(r @ g) * np.linalg.det(jac)
    return abs(pulled - omega_pullback(g))


def kernel_on_group(g1: ANElement, g2: ANElement, g3: ANElement, theta: float, amplitude: str = "jacobian") -> complex:
    p = [IDENT.to_point(g) for g in (g1, g2, g3)]
    return complex(kernel(p[0], p[1], p[2], theta, amplitude))


def group_product_dense(u: Callable, v: Callable, g: ANElement, theta: float, quad: Grid) -> complex:
    """(u * v)(g) = int K(g, g2, g3) u(g2) v(g3) dg2 dg3 by group-side evaluation.

    u, v are functions of ANElement; the kernel is evaluated through the
    group law rather than through M. O(N^4), for small grids.
    """
    ts, ss = quad.a_nodes, quad.l_nodes
    wt, ws = quad.a_weights, quad.l_weights
    els = [ANElement(t, s) for t in ts for s in ss]
    w = np.outer(wt, ws).ravel()
    U = np.array([u(e) for e in els]) * w
    V = np.array([v(e) for e in els]) * w
    P = np.array([IDENT.to_point(e) for e in els])
    x = IDENT.to_point(g)
    K = kernel(x[None, None, :], P[:, None, :], P[None, :, :], theta)
    return complex(U @ K @ V)


# ------------------------------------------------------------ R-actions


class QuadratureWindowWarning(RuntimeWarning):
    pass


@dataclass
class RAction:
    """R acting on X with a chart X ~ fiber x R in which R acts by left
    multiplication on the R-factor."""

    kind: str
    xi: KillingPair
    act: Callable  # (ANElement, GroupElement) -> GroupElement
    chart: Callable  # GroupElement -> (fiber, ANElement)
    from_chart: Callable  # (fiber, ANElement) -> GroupElement
    z_generator: ANElement
    label: int = 1
    rot: RotParams | None = None

    def z_act(self, n: int, x: GroupElement) -> GroupElement:
        return z_action(self.xi, n, x)

    def check_action_axiom(self, r1: ANElement, r2: ANElement, x: GroupElement) -> float:
        lhs = self.act(r1, self.act(r2, x))
        rhs = self.act(r1 @ r2, x)
        return _gdist(lhs, rhs)

    def check_z_in_r(self, n: int, x: GroupElement) -> float:
        """z_action(n, x) against the R-action of z_generator^n."""
        zn = ANElement(n * self.z_generator.t, 0.0)
        return _gdist(self.z_act(n, x), self.act(zn, x))

    def stabilizer_defect(self, x: GroupElement, h: float = 1e-6) -> float:
        """Smallest singular value of r -> chart R-coordinate of tau_r x at e.

        Zero would signal a non-trivial stabilizer direction.
        """

        def f(v):
            return _an_vec(self.chart(self.act(ANElement(v[0], v[1]), x))[1])

        return float(np.linalg.svd(fd.jacobian(f, np.zeros(2), h), compute_uv=False)[-1])


def _gdist(g: GroupElement, h: GroupElement) -> float:
    return max(abs(g.phi - h.phi), abs(g.n - h.n), abs(g.a - h.a))


def _spinless_from_chart(label: int):
    def from_chart(fiber, r: ANElement) -> GroupElement:
        a, m = fiber
        g = multiply(multiply(center_element(m), r.to_group()), k_element(-label * math.pi / 4))
        return twisted_conjugate(g, a_element(2 * a))

    return from_chart


def _spinless_chart(x: GroupElement):
    """(fiber=(a, sheet), r) with x = tau_{z_m r k(-label pi/4)}(exp(2a H0))."""
    lab, a, r = extension_an_coordinate(x)
    x0 = _spinless_from_chart(lab)((a, 0), r)
    m = round((x.phi - x0.phi) / (2 * math.pi))
    return (a, m), r


def bhtz_raction(kind: str, mass: float, spin: float = 0.0, label: int = 1) -> RAction:
    """R-action on the spinless extension domain (orbit with sign ``label``)
    or on rotating AdS3."""
    if kind == "spinless":
        xi = spinless_pair(mass)
        z = ANElement(math.sqrt(mass / 2.0), 0.0)  # exp(sqrt(M) H), H = H0 / sqrt 2
        return RAction(
            kind, xi,
            act=lambda r, x: twisted_conjugate(r.to_group(), x),
            chart=_spinless_chart,
            from_chart=_spinless_from_chart(label),
            z_generator=z, label=label,
        )
    if kind == "rotating":
        xi, rot = rotating_pair(mass, spin)
        c = xi.xl.h  # xl = c H0 coefficient
        z = ANElement(c, 0.0)

        def chart(x):
            mi = modified_iwasawa_decompose(x, rot)
            return mi.k, ANElement(mi.a, mi.n)

        def from_chart(k, r):
            return modified_iwasawa_compose(ModifiedIwasawa(r.t, r.s, k), rot)

        return RAction(kind, xi, act=lambda r, x: taub_action(r, x, rot), chart=chart,
                       from_chart=from_chart, z_generator=z, label=0, rot=rot)
    raise ValueError(f"unknown kind {kind!r}")


def sigma_swap(action: RAction) -> RAction:
    """The spinless action on the other open orbit."""
    if action.kind != "spinless":
        raise ValueError("sigma swap only applies to the spinless domain")
    m, _, _ = mass_momentum(action.xi)
    return bhtz_raction("spinless", m / 2.0, label=-action.label)


# ------------------------------------------------------------ products on X

DEFAULT_WINDOW = Grid(12, 4, -4.0, 4.0)


def pullback_on_group(a: Callable, x: GroupElement, action: RAction, quad: Grid) -> np.ndarray:
    """alpha^x a(g) = a(tau_{g^-1} x) sampled on the quadrature grid of R."""
    out = np.empty(quad.shape, dtype=complex)
    for i, t in enumerate(quad.a_nodes):
        for j, s in enumerate(quad.l_nodes):
            out[i, j] = a(action.act(ANElement(t, s).inverse(), x))
    return out


def window_leak(F: np.ndarray, rel: float = 1e-6) -> float:
    o = 2
    v = np.abs(F)
    ring = np.concatenate([v[:o].ravel(), v[-o:].ravel(), v[:, :o].ravel(), v[:, -o:].ravel()])
    return float(ring.max() / max(v.max(), 1e-300))


def udf_product(a: Callable, b: Callable, x: GroupElement, theta: float, action: RAction,
                quad: Grid = DEFAULT_WINDOW, warn: bool = True) -> complex:
    """(a * b)(x) with a, b functions on X (callables of GroupElement)."""
    from .symsym_p11 import SampledFunction

    Fa = pullback_on_group(a, x, action, quad)
    Fb = pullback_on_group(b, x, action, quad)
    if warn:
        leak = max(window_leak(Fa), window_leak(Fb))
        if leak > 1e-6:
            warnings.warn(f"quadrature window: pulled-back functions reach {leak:.1e} of their peak at the edge",
                          QuadratureWindowWarning, stacklevel=2)
    e = IDENT.to_point(ANElement())
    return complex(star_at(SampledFunction(quad, Fa), SampledFunction(quad, Fb), e[None, :], theta, quad)[0])


def chart_function(action: RAction, fn: Callable) -> Callable:
    """Function on X given in chart coordinates fn(fiber, t, s)."""

    def f(x: GroupElement):
        fiber, r = action.chart(x)
        return fn(fiber, r.t, r.s)

    return f


def act_function(action: RAction, r: ANElement, a: Callable) -> Callable:
    """(alpha_r a)(x) = a(tau_{r^-1} x)."""
    ri = r.inverse()
    return lambda x: a(action.act(ri, x))


def covariance_defect(a, b, x, r: ANElement, theta: float, action: RAction, quad: Grid = DEFAULT_WINDOW) -> float:
    """|alpha_r(a*b)(x) - (alpha_r a * alpha_r b)(x)| / |(a*b)(tau_{r^-1} x)|."""
    lhs = udf_product(a, b, action.act(r.inverse(), x), theta, action, quad, warn=False)
    rhs = udf_product(act_function(action, r, a), act_function(action, r, b), x, theta, action, quad, warn=False)
    return abs(lhs - rhs) / abs(lhs)


def z_invariance_defect(a, b, x, n: int, theta: float, action: RAction, quad: Grid = DEFAULT_WINDOW) -> float:
    """|(a*b)(z^n x) - (a*b)(x)| / |(a*b)(x)| for Z-invariant a, b."""
    p0 = udf_product(a, b, x, theta, action, quad, warn=False)
    p1 = udf_product(a, b, action.z_act(n, x), theta, action, quad, warn=False)
    return abs(p1 - p0) / abs(p0)


def inverted_orbit_function(a: Callable, fiber, action: RAction) -> Callable:
    """A-check(t, s) = a(from_chart(fiber, (t, s)^-1)), vectorised over point arrays."""

    def f(pts):
        pts = np.asarray(pts, dtype=float)
        out = np.empty(pts.shape[:-1], dtype=complex)
        for idx in np.ndindex(out.shape):
            t, s = pts[idx]
            out[idx] = a(action.from_chart(fiber, ANElement(t, s).inverse()))
        return out

    return f


def orbit_product_inverted(a, b, fiber, theta: float, action: RAction, quad: Grid, pts) -> np.ndarray:
    """(a * b)(from_chart(fiber, q^-1)) at chart points q.

    On one orbit alpha^x a(g) = A-check(r^-1 g) with r the chart coordinate of
    x, so the product is the R-product of the inverted functions, evaluated
    at r^-1.
    """
    Ai = quad.sample(inverted_orbit_function(a, fiber, action))
    Bi = quad.sample(inverted_orbit_function(b, fiber, action))
    return star_at(Ai, Bi, pts, theta, quad)


def orbit_trace(a, b, fiber, theta: float, action: RAction, quad: Grid, out: Grid) -> dict:
    """Relative trace defects over one orbit for right and left Haar measure.

    Inversion exchanges the two Haar measures, so the right-Haar trace of
    a * b is the left-Haar (symplectic) trace of the R-product.
    """
    Ai = quad.sample(inverted_orbit_function(a, fiber, action))
    Bi = quad.sample(inverted_orbit_function(b, fiber, action))
    P = star_at(Ai, Bi, out.points(), theta, quad)
    T = out.mesh()[0]
    Tq = quad.mesh()[0]
    res = {}
    for name, dout, dq in (("right", np.ones_like(T), np.ones_like(Tq)), ("left", np.exp(T), np.exp(Tq))):
        ref = quad.integrate(Ai.values * Bi.values * dq)
        res[name] = float(abs(out.integrate(P * dout) - ref) / abs(ref))
    return res


def sigma_swap_defect(a, b, x: GroupElement, theta: float, action: RAction, quad: Grid = DEFAULT_WINDOW) -> float:
    """sigma intertwines the two orbits up to order reversal:
    (a*b)(x) = (sigma^* b * sigma^* a)(sigma x) on the other orbit."""
    other = sigma_swap(action)
    sa = lambda y: a(sigma(y))
    sb = lambda y: b(sigma(y))
    lhs = udf_product(a, b, x, theta, action, quad, warn=False)
    rhs = udf_product(sb, sa, sigma(x), theta, other, quad, warn=False)
    return abs(lhs - rhs) / abs(lhs)


# ------------------------------------------------- separable functions on X


@dataclass
class SeparableFunction:
    """A(fiber, t, s) = sum_j p_j(fiber, t) exp(-(s - mu_j)^2 / (2 sigma_j^2)).

    Periodic p_j give Z-invariant functions, which never decay along the
    orbit; for this class the l-Fourier transforms of the pulled-back
    functions are closed form and the product needs no l-window.
    """

    terms: list  # (p, mu, sigma)

    def __call__(self, fiber, t, s):
        return sum(p(fiber, t) * np.exp(-0.5 * ((s - mu) / sg) ** 2) for p, mu, sg in self.terms)

    def on(self, action: RAction) -> Callable:
        return chart_function(action, self)

    def pulled_fourier(self, fiber, rx: ANElement, a, k):
        """int alpha^x A(a, l) e^{ikl} dl, alpha^x A(a, l) = A(rx_t - a, rx_s - l e^{a - rx_t})."""
        lam = np.exp(a - rx.t)
        kap = -k / lam
        out = 0
        for p, mu, sg in self.terms:
            ghat = sg * math.sqrt(2 * math.pi) * np.exp(1j * kap * mu - 0.5 * (kap * sg) ** 2)
            out = out + p(fiber, rx.t - a) / lam * np.exp(1j * k * rx.s / lam) * ghat
        return out


DEFAULT_SPECTRAL = Grid(144, 8, -8.0, 40.0)


def udf_product_separable(A: SeparableFunction, B: SeparableFunction, fiber, rx: ANElement, theta: float,
                          quad: Grid = DEFAULT_SPECTRAL) -> complex:
    """(A * B) at the chart point (fiber, rx); only the a-nodes of ``quad`` are used."""
    an, w = quad.a_nodes, quad.a_weights
    ay, az = an[:, None], an[None, :]
    k1 = 2.0 / theta * np.sinh(an)  # indexed by a_z, output a = 0
    k2 = 2.0 / theta * np.sinh(-an)  # indexed by a_y
    with np.errstate(over="ignore", under="ignore", invalid="ignore"):
        Uh = A.pulled_fourier(fiber, rx, ay, k1[None, :])
        Vh = B.pulled_fourier(fiber, rx, az, k2[:, None])
        amp = np.sqrt(np.cosh(ay) * np.cosh(ay - az) * np.cosh(az))
        M = w[:, None] * w[None, :] * amp * Uh * Vh
    M = np.where(np.isfinite(M), M, 0.0)
    return complex(np.sum(M) / (math.pi * theta) ** 2)

