"""BHTZ black-hole geometry on AdS3 = universal cover of SL(2,R).

Spacetime points are ``GroupElement``s. A black hole is the quotient by the
Z-action generated by a Killing pair (xl, xr) in sl2 + sl2,

    n.x = exp(n xl) x exp(n xr).

For the spinless hole the pair is (sqrt(M) H, -sqrt(M) H) and the action is
twisted conjugation by exp(n sqrt(M) H) (sigma fixes A). The rotating hole
uses a^alpha = exp(alpha t H0) for a = exp(t H0).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .lie_core import (
    E,
    F,
    H,
    Ad,
    AlgebraVector,
    ANElement,
    GroupElement,
    a_element,
    bracket,
    center_element,
    exp_map,
    inverse,
    k_element,
    k_matrix,
    killing_form,
    multiply,
    n_element,
    product,
    twisted_conjugate,
    J_ELEMENT,
)

# The bi-invariant metric beta(x^-1 dx, x^-1 dx) / ADS_METRIC_SCALE_INV equals
# da^2 - 1/4 cosh^2(a) ds^2_{G/A} in twisted coordinates.
ADS_METRIC_SCALE_INV = 8.0
GENERIC_TOL = 1e-12


class DecompositionError(RuntimeError):
    def __init__(self, msg: str, residual: float):
        super().__init__(f"{msg} (residual {residual:.3e})")
        self.residual = residual


class PathEscapeError(RuntimeError):
    pass


class CausalClass(enum.Enum):
    SPACELIKE_REGION = "spacelike"
    NULL_SET = "null"
    TIMELIKE_REGION = "timelike"
    FIXED_POINT = "fixed"


@dataclass(frozen=True)
class KillingPair:
    xl: AlgebraVector
    xr: AlgebraVector

    def mass_momentum(self):
        return mass_momentum(self)


@dataclass(frozen=True)
class RotParams:
    alpha: float

    def __post_init__(self):
        if not (abs(self.alpha) < 1.0):
            raise ValueError(f"|alpha| must be < 1, got {self.alpha}")


@dataclass(frozen=True)
class TwistedCoords:
    """x = tau_g(exp(2a H0 / 2)) with coset representative g = k(phi) n(nu).

    ``a`` is the coefficient of diag(1,-1), so the A-element has chart
    coordinate 2a.
    """

    a: float
    phi: float
    nu: float

    def coset(self) -> GroupElement:
        return multiply(k_element(self.phi), n_element(self.nu))


@dataclass(frozen=True)
class ModifiedIwasawa:
    """x = exp(a H0) exp(n E) k(k) exp(alpha a H0)."""

    a: float
    n: float
    k: float


# ---------------------------------------------------------------- Killing pairs


def mass_momentum(xi: KillingPair):
    bl = killing_form(xi.xl, xi.xl)
    br = killing_form(xi.xr, xi.xr)
    generic = bl > GENERIC_TOL and br > GENERIC_TOL
    return bl + br, bl - br, generic


def spinless_pair(mass: float) -> KillingPair:
    """Pair (sqrt(M) H, -sqrt(M) H); its Killing norm is 2M."""
    if mass <= 0:
        raise ValueError("mass must be positive")
    c = math.sqrt(mass)
    return KillingPair(H * c, H * (-c))


def rotating_pair(mass: float, spin: float):
    """Pair (c H, c alpha H) with Killing norm M and momentum |J|.

    Returns (pair, RotParams). Requires M > |J| > 0.
    """
    if not (mass > abs(spin) > 0):
        raise ValueError("rotating hole needs M > |J| > 0")
    c = math.sqrt(0.5 * (mass + abs(spin)))
    alpha = -math.sqrt((mass - abs(spin)) / (mass + abs(spin)))
    pair = KillingPair(H * c, H * (c * alpha))
    if spin < 0:
        pair = KillingPair(pair.xr, pair.xl)
    return pair, RotParams(alpha)


def _require_generic(xi: KillingPair):
    if not mass_momentum(xi)[2]:
        raise ValueError("Killing pair is not generic")


def z_action(xi: KillingPair, n: int, x: GroupElement) -> GroupElement:
    _require_generic(xi)
    if n == 0:
        return x
    return product(exp_map(xi.xl * n), x, exp_map(xi.xr * n))


def z_action_spinless(mass: float, n: int, x: GroupElement) -> GroupElement:
    """tau_{exp(n sqrt(M) H)}(x)."""
    return twisted_conjugate(exp_map(H * (n * math.sqrt(mass))), x)


# ------------------------------------------------------ twisted Iwasawa chart


def twisted_iwasawa_compose(tc: TwistedCoords) -> GroupElement:
    return twisted_conjugate(tc.coset(), a_element(2.0 * tc.a))


def twisted_iwasawa_decompose(x: GroupElement, tol: float = 1e-8) -> TwistedCoords:
    """Invert (a, gA) -> tau_g(a) in closed form.

    With D = diag(1,-1), x D = g (a D) g^-1, so tr(x D) = 2 sinh(a) and the
    eigenvectors of x D give the coset. The sheet is fixed afterwards by a
    central shift of the K-angle.
    """
    m = x.matrix()
    tr = m[0, 0] - m[1, 1]
    a = math.asinh(0.5 * tr)
    lam1, lam2 = math.exp(a), -math.exp(-a)
    t = np.array([[m[0, 0], -m[0, 1]], [m[1, 0], -m[1, 1]]])

    def eigvec(lam):
        c1 = np.array([-t[0, 1], t[0, 0] - lam])
        c2 = np.array([t[1, 1] - lam, -t[1, 0]])
        return c1 if np.hypot(*c1) >= np.hypot(*c2) else c2

    v1, v2 = eigvec(lam1), eigvec(lam2)
    phi0 = math.atan2(-v1[1], v1[0])
    w = k_matrix(phi0).T @ v2
    nu = w[0] / w[1]
    base = twisted_iwasawa_compose(TwistedCoords(a, phi0, nu))
    # shifting phi by pi shifts the image by the central (2 pi, 0, 0)
    shift = round((x.phi - base.phi) / (2.0 * math.pi))
    out = TwistedCoords(a, phi0 + shift * math.pi, nu)
    back = twisted_iwasawa_compose(out)
    res = float(np.max(np.abs(back.as_array() - x.as_array())) / (1.0 + np.abs(x.as_array()).max()))
    if res > tol:
        raise DecompositionError("twisted Iwasawa inversion failed", res)
    return out


def coset_equal(g1: GroupElement, g2: GroupElement, tol: float = 1e-8) -> bool:
    """g1 A == g2 A in G/A (on the cover)."""
    d = multiply(inverse(g2), g1)
    return abs(d.phi) < tol and abs(d.n) < tol * (1.0 + abs(g1.n) + abs(g2.n))


# -------------------------------------------------------------------- metric


def _coset_maurer_cartan(phi: float, nu: float, dphi: float, dnu: float) -> AlgebraVector:
    # g = k(phi) n(nu): g^-1 dg = Ad(n(-nu))(E - F) dphi + E dnu
    return Ad(n_element(-nu), E - F) * dphi + E * dnu


def coset_metric(phi: float, nu: float, v, w) -> float:
    """G-invariant metric on G/A as the beta-induced metric on Ad(G)(2H).

    v, w are (dphi, dnu) tangents in the KN chart.
    """
    xi = H * 2.0
    yv = bracket(_coset_maurer_cartan(phi, nu, v[0], v[1]), xi)
    yw = bracket(_coset_maurer_cartan(phi, nu, w[0], w[1]), xi)
    return killing_form(yv, yw)


def metric_eval(x, v, w) -> float:
    """Lorentzian AdS3 metric in twisted chart components (da, dphi, dnu)."""
    tc = x if isinstance(x, TwistedCoords) else twisted_iwasawa_decompose(x)
    ch = math.cosh(tc.a)
    return v[0] * w[0] - 0.25 * ch * ch * coset_metric(tc.phi, tc.nu, v[1:], w[1:])


def metric_matrix(x) -> np.ndarray:
    basis = np.eye(3)
    return np.array([[metric_eval(x, bi, bj) for bj in basis] for bi in basis])


def metric_oracle(tc: TwistedCoords, v, w, h: float = 1e-5) -> float:
    """beta(x^-1 dx, x^-1 dx)/8 via central differences of the chart."""
    p = np.array([tc.a, tc.phi, tc.nu])
    x = twisted_iwasawa_compose(tc).matrix()
    xinv = np.linalg.inv(x)

    def mc(d):
        d = np.asarray(d, dtype=float)
        xp = twisted_iwasawa_compose(TwistedCoords(*(p + h * d))).matrix()
        xm = twisted_iwasawa_compose(TwistedCoords(*(p - h * d))).matrix()
        return AlgebraVector.from_matrix(xinv @ (xp - xm) / (2 * h))

    return killing_form(mc(v), mc(w)) / ADS_METRIC_SCALE_INV


# ------------------------------------------------------------ causal structure


def killing_vector_at(xi: KillingPair, x: GroupElement) -> AlgebraVector:
    """x^-1 . Xi_x = Ad(x^-1) xl + xr."""
    return Ad(inverse(x), xi.xl) + xi.xr


def null_tolerance(x: GroupElement, scale: float = 1e-9) -> float:
    return scale * (1.0 + float(np.sum(x.matrix() ** 2)))


def causal_character(xi: KillingPair, x: GroupElement, eps_scale: float = 1e-9) -> CausalClass:
    _require_generic(xi)
    v = killing_vector_at(xi, x)
    eps = null_tolerance(x, eps_scale)
    if max(abs(v.h), abs(v.e), abs(v.f)) < eps:
        return CausalClass.FIXED_POINT
    q = killing_form(v, v)
    if q > eps:
        return CausalClass.SPACELIKE_REGION
    if q < -eps:
        return CausalClass.TIMELIKE_REGION
    return CausalClass.NULL_SET


def _angle_in_pi_z(phi: float, tol: float) -> bool:
    r = phi / math.pi
    return abs(r - round(r)) * math.pi <= tol


def in_singularity(x: GroupElement, tol: float = 1e-10) -> bool:
    """x in Z(G) A N  or  x in Z(G) A Nbar."""
    if _angle_in_pi_z(x.phi, tol):
        return True
    # J Nbar J^-1 = N and J commutes with nothing else we need
    y = product(J_ELEMENT, x, inverse(J_ELEMENT))
    return _angle_in_pi_z(y.phi, tol)


def in_horizon(x: GroupElement, tol: float = 1e-10) -> bool:
    return in_singularity(multiply(inverse(J_ELEMENT), x), tol)


def reference_point(m: int) -> GroupElement:
    """z J with z the m-th central element."""
    return multiply(center_element(m), J_ELEMENT)


def component_id(xi: KillingPair, x: GroupElement, step: float = 0.05, eps_scale: float = 1e-9) -> int:
    """Index m of the component M^{zJ}, z = center_element(m), containing x.

    Walks x -> (phi, 0, a) -> (phi, 0, 0) -> nearest reference point,
    checking the spacelike character at every step.
    """
    if causal_character(xi, x, eps_scale) is not CausalClass.SPACELIKE_REGION:
        raise ValueError("component_id needs a spacelike point")
    m = math.floor(x.phi / math.pi)
    target = reference_point(m)
    legs = [
        (x.as_array(), np.array([x.phi, 0.0, x.a])),
        (np.array([x.phi, 0.0, x.a]), np.array([x.phi, 0.0, 0.0])),
        (np.array([x.phi, 0.0, 0.0]), target.as_array()),
    ]
    for p0, p1 in legs:
        nsteps = max(1, int(math.ceil(np.max(np.abs(p1 - p0)) / step)))
        for i in range(1, nsteps + 1):
            p = p0 + (p1 - p0) * (i / nsteps)
            c = causal_character(xi, GroupElement(*p), eps_scale)
            if c is not CausalClass.SPACELIKE_REGION:
                raise PathEscapeError(f"path left the spacelike region at {p} ({c.value})")
    return m


# ---------------------------------------------------------- rotating geometry


def modified_iwasawa_compose(mi: ModifiedIwasawa, p: RotParams) -> GroupElement:
    return product(a_element(mi.a), n_element(mi.n), k_element(mi.k), a_element(p.alpha * mi.a))


def modified_iwasawa_decompose(x: GroupElement, p: RotParams, tol: float = 1e-10, maxiter: int = 100) -> ModifiedIwasawa:
    """Solve x = exp(s H0) exp(n E) k exp(alpha s H0).

    The A-part of y = x exp(-alpha s H0) in the A N K order is
    -log(x10^2 e^{-alpha s} + x11^2 e^{alpha s}); s is the unique root of
    g(s) = that - s, whose derivative is < 0 for |alpha| < 1.
    """
    al = p.alpha
    m = x.matrix()
    lp = 2.0 * math.log(abs(m[1, 0])) if m[1, 0] != 0 else -math.inf
    lq = 2.0 * math.log(abs(m[1, 1])) if m[1, 1] != 0 else -math.inf

    def g_and_dg(s):
        lu, lw = lp - al * s, lq + al * s
        top = np.logaddexp(lu, lw)
        wu = math.tanh(0.5 * (lw - lu)) if math.isfinite(lw - lu) else math.copysign(1.0, lw - lu)
        return -top - s, -al * wu - 1.0

    # g is strictly decreasing with slope <= -(1 - |alpha|): Newton with a
    # bisection safeguard on an expanding bracket
    s = -float(np.logaddexp(lp, lq))
    lo, hi = s - 1.0, s + 1.0
    while g_and_dg(lo)[0] < 0:
        lo -= 2.0 * (hi - lo)
    while g_and_dg(hi)[0] > 0:
        hi += 2.0 * (hi - lo)
    res = math.inf
    for _ in range(maxiter):
        g, dg = g_and_dg(s)
        res = abs(g)
        if res < tol * (1.0 + abs(s)):
            break
        if g > 0:
            lo = s
        else:
            hi = s
        s_new = s - g / dg
        s = s_new if lo < s_new < hi else 0.5 * (lo + hi)
    else:
        raise DecompositionError("modified Iwasawa Newton did not converge", res)
    an_inv = inverse(a_element(s))
    # k-lift and n from the group law on the cover
    y = product(an_inv, x, a_element(-al * s))
    # y = n(n) k(phi): rewrite through the inverse, y^-1 = k(-phi) n(-n)
    yi = inverse(y)
    k, n = -yi.phi, -yi.n
    out = ModifiedIwasawa(s, n, k)
    back = modified_iwasawa_compose(out, p)
    err = float(np.max(np.abs(back.as_array() - x.as_array())) / (1.0 + np.abs(x.as_array()).max()))
    # the factors carry entries ~exp(|a|/2) on both sides of k, so the
    # roundtrip is only as good as that conditioning allows
    if err > 1e-8 * math.exp(abs(s)):
        raise DecompositionError("modified Iwasawa roundtrip failed", err)
    return out


def taub_action(r: ANElement, x: GroupElement, p: RotParams) -> GroupElement:
    """(a n, x) -> a n x a^alpha."""
    return product(r.to_group(), x, a_element(p.alpha * r.t))


# --------------------------------------------------------- extension domains


def orbit_point(g: GroupElement) -> AlgebraVector:
    return Ad(g, H)


def orbit_label(xi_pt: AlgebraVector, tol: float = 1e-10) -> int:
    """Sign of beta(E, xi); 0 on the excluded plane."""
    b = killing_form(E, xi_pt)
    if abs(b) <= tol * (1.0 + xi_pt.norm()):
        return 0
    return 1 if b > 0 else -1


def extension_domain_membership(xi: KillingPair, x: GroupElement, tol: float = 1e-10):
    """(inside, label). Rotating pairs: the whole space, label 0."""
    _require_generic(xi)
    m, j, _ = mass_momentum(xi)
    if abs(j) > GENERIC_TOL:
        return True, 0
    tc = twisted_iwasawa_decompose(x)
    lab = orbit_label(orbit_point(tc.coset()), tol)
    return lab != 0, lab


def orbit_base_point(label: int) -> AlgebraVector:
    """Base point of the open AN-orbit with the given sign of beta(E, .)."""
    return Ad(k_element(-label * math.pi / 4), H)


def extension_an_coordinate(x: GroupElement):
    """(label, a, r) with x = tau_g(a) and Ad(g) H = Ad(r) xi_label, r in AN.

    AN acts simply transitively on each open orbit, so r is unique.
    """
    tc = twisted_iwasawa_decompose(x)
    xi = orbit_point(tc.coset())
    lab = orbit_label(xi)
    if lab == 0:
        raise ValueError("point lies on the excluded plane")
    x0 = orbit_base_point(lab)
    # Ad(exp tH0) scales f by e^-t, Ad(exp sE) keeps f and shifts h linearly
    t = math.log(x0.f / xi.f)
    h0 = Ad(n_element(0.0), x0).h
    slope = Ad(n_element(1.0), x0).h - h0
    s = float((xi.h - h0) / slope)
    return lab, tc.a, ANElement(t, s)


def an_distance(x: GroupElement, y: GroupElement) -> float:
    """Distance of AN-orbit coordinates of two extension-domain points."""
    _, _, r1 = extension_an_coordinate(x)
    _, _, r2 = extension_an_coordinate(y)
    return math.hypot(r1.t - r2.t, r1.s - r2.s)


__all__ = [
    "ADS_METRIC_SCALE_INV",
    "CausalClass",
    "DecompositionError",
    "KillingPair",
    "ModifiedIwasawa",
    "PathEscapeError",
    "RotParams",
    "TwistedCoords",
    "an_distance",
    "causal_character",
    "component_id",
    "coset_equal",
    "coset_metric",
    "extension_an_coordinate",
    "extension_domain_membership",
    "orbit_base_point",
    "in_horizon",
    "in_singularity",
    "killing_vector_at",
    "mass_momentum",
    "metric_eval",
    "metric_matrix",
    "metric_oracle",
    "modified_iwasawa_compose",
    "modified_iwasawa_decompose",
    "orbit_label",
    "orbit_point",
    "reference_point",
    "rotating_pair",
    "spinless_pair",
    "taub_action",
    "twisted_iwasawa_compose",
    "twisted_iwasawa_decompose",
    "z_action",
    "z_action_spinless",
]
