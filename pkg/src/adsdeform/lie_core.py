"""Arithmetic in sl(2,R), SL(2,R) and its universal cover.

Elements of the universal cover are stored in the global chart
``g = k(phi) n(n) a(a)`` with

    k(phi) = exp(phi (E - F)) = [[cos, sin], [-sin, cos]]
    n(n)   = exp(n E)
    a(a)   = exp(a H0)

The K-angle ``phi`` is the continuous lift and is never reduced mod 2*pi,
so the centre of the cover is {(m*pi, 0, 0)}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi

H0_MAT = np.array([[0.5, 0.0], [0.0, -0.5]])
E_MAT = np.array([[0.0, 1.0], [0.0, 0.0]])
F_MAT = np.array([[0.0, 0.0], [1.0, 0.0]])

# [E, F] = EF_SCALE * H0 in the basis used here (E, F are the elementary
# nilpotents, so the scale is 2).
EF_SCALE = 2.0


@dataclass(frozen=True)
class AlgebraVector:
    """Element h*H0 + e*E + f*F of sl(2,R)."""

    h: float = 0.0
    e: float = 0.0
    f: float = 0.0

    def matrix(self) -> np.ndarray:
        return np.array([[0.5 * self.h, self.e], [self.f, -0.5 * self.h]])

    @classmethod
    def from_matrix(cls, m) -> AlgebraVector:
        m = np.asarray(m, dtype=float)
        return cls(m[0, 0] - m[1, 1], m[0, 1], m[1, 0])

    def as_array(self) -> np.ndarray:
        return np.array([self.h, self.e, self.f])

    def __add__(self, other: AlgebraVector) -> AlgebraVector:
        return AlgebraVector(self.h + other.h, self.e + other.e, self.f + other.f)

    def __sub__(self, other: AlgebraVector) -> AlgebraVector:
        return AlgebraVector(self.h - other.h, self.e - other.e, self.f - other.f)

    def __neg__(self) -> AlgebraVector:
        return AlgebraVector(-self.h, -self.e, -self.f)

    def __mul__(self, c: float) -> AlgebraVector:
        return AlgebraVector(c * self.h, c * self.e, c * self.f)

    __rmul__ = __mul__

    def norm(self) -> float:
        return math.sqrt(self.h**2 + self.e**2 + self.f**2)


H0 = AlgebraVector(1.0, 0.0, 0.0)
E = AlgebraVector(0.0, 1.0, 0.0)
F = AlgebraVector(0.0, 0.0, 1.0)
# Unit Killing length: killing_form(H, H) == 1.
H = AlgebraVector(1.0 / math.sqrt(2.0), 0.0, 0.0)


def bracket(x: AlgebraVector, y: AlgebraVector) -> AlgebraVector:
    # [hH0+eE+fF, h'H0+e'E+f'F] in closed form
    return AlgebraVector(
        EF_SCALE * (x.e * y.f - x.f * y.e),
        x.h * y.e - y.h * x.e,
        -(x.h * y.f - y.h * x.f),
    )


def killing_form(x: AlgebraVector, y: AlgebraVector) -> float:
    """beta(X, Y) = 4 tr(XY), the Killing form of sl(2,R)."""
    return 2.0 * x.h * y.h + 4.0 * (x.e * y.f + x.f * y.e)


def killing_gram() -> np.ndarray:
    """Gram matrix of the Killing form in the basis (H0, E, F)."""
    return np.array([[2.0, 0.0, 0.0], [0.0, 0.0, 4.0], [0.0, 4.0, 0.0]])


def adjoint_matrix(x: AlgebraVector) -> np.ndarray:
    """Matrix of ad_x in the basis (H0, E, F), columns are images."""
    cols = [bracket(x, b).as_array() for b in (H0, E, F)]
    return np.array(cols).T


def Ad(m, x: AlgebraVector) -> AlgebraVector:
    """Adjoint action of a group element (matrix or GroupElement)."""
    if isinstance(m, GroupElement):
        m = m.matrix()
    m = np.asarray(m, dtype=float)
    minv = np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]])
    return AlgebraVector.from_matrix(m @ x.matrix() @ minv)


def _wrap(x: float) -> float:
    """Reduce an angle to (-pi, pi]."""
    y = math.fmod(x + math.pi, TWO_PI)
    if y <= 0.0:
        y += TWO_PI
    return y - math.pi


def k_matrix(phi: float) -> np.ndarray:
    c, s = math.cos(phi), math.sin(phi)
    return np.array([[c, s], [-s, c]])


def an_matrix(n: float, a: float) -> np.ndarray:
    ea = math.exp(0.5 * a)
    return np.array([[ea, n / ea], [0.0, 1.0 / ea]])


@dataclass(frozen=True)
class GroupElement:
    """Point (phi, n, a) of the universal cover of SL(2,R)."""

    phi: float = 0.0
    n: float = 0.0
    a: float = 0.0

    def matrix(self) -> np.ndarray:
        return k_matrix(self.phi) @ an_matrix(self.n, self.a)

    def as_array(self) -> np.ndarray:
        return np.array([self.phi, self.n, self.a])

    def __matmul__(self, other: GroupElement) -> GroupElement:
        return multiply(self, other)


@dataclass(frozen=True)
class IwasawaFactors:
    k: float
    n: float
    a: float


IDENTITY = GroupElement()
# Quarter rotation: J in K with J^2 = -I.
J_ELEMENT = GroupElement(math.pi / 2, 0.0, 0.0)


def center_element(m: int) -> GroupElement:
    """m-th element of the centre Z(G) ~ Z, projecting to (-I)^m."""
    return GroupElement(m * math.pi, 0.0, 0.0)


def is_central(g: GroupElement, tol: float = 1e-10) -> bool:
    return abs(g.n) <= tol and abs(g.a) <= tol and abs(g.phi / math.pi - round(g.phi / math.pi)) <= tol


def _an_times_k(n: float, a: float, phi: float):
    """Write n(n) a(a) k(phi) = k(psi) n(n') a(a') with psi the lift near phi."""
    ea = math.exp(0.5 * a)
    c, s = math.cos(phi), math.sin(phi)
    m00 = ea * c - (n / ea) * s
    m01 = ea * s + (n / ea) * c
    m10 = -s / ea
    m11 = c / ea
    # first column is proportional to (cos psi, -sin psi)
    psi0 = math.atan2(-m10, m00)
    psi = phi + _wrap(psi0 - phi)
    cp, sp = math.cos(psi), math.sin(psi)
    # R = k(psi)^{-1} M, upper triangular with positive diagonal
    r00 = cp * m00 - sp * m10
    r01 = cp * m01 - sp * m11
    r11 = sp * m01 + cp * m11
    a2 = 2.0 * math.log(r00)
    return psi, r01 / r11, a2, r00, r01, r11


def multiply(g: GroupElement, h: GroupElement) -> GroupElement:
    """Group law of the universal cover.

    g h = k1 [n1 a1 k2] n2 a2; the bracket is rewritten as k(psi) b' with the
    lift |psi - phi2| < pi, which is forced because upper-triangular matrices
    with positive diagonal fix the directions of +e1 and -e1.
    """
    psi, _, _, r00, r01, r11 = _an_times_k(g.n, g.a, h.phi)
    # (r00, r01; 0, r11) times n(n2) a(a2)
    ea2 = math.exp(0.5 * h.a)
    p00 = r00 * ea2
    p01 = (r00 * h.n + r01) / ea2
    p11 = r11 / ea2
    a = 2.0 * math.log(p00)
    return GroupElement(g.phi + psi, p01 / p11, a)


def inverse(g: GroupElement) -> GroupElement:
    an_inv = multiply(GroupElement(0.0, 0.0, -g.a), GroupElement(0.0, -g.n, 0.0))
    return multiply(an_inv, GroupElement(-g.phi, 0.0, 0.0))


def a_element(a: float) -> GroupElement:
    return GroupElement(0.0, 0.0, a)


def n_element(n: float) -> GroupElement:
    return GroupElement(0.0, n, 0.0)


def k_element(phi: float) -> GroupElement:
    return GroupElement(phi, 0.0, 0.0)


def product(*gs: GroupElement) -> GroupElement:
    out = IDENTITY
    for g in gs:
        out = multiply(out, g)
    return out


def iwasawa_matrix(m) -> IwasawaFactors:
    """KNA factors of an SL(2,R) matrix, angle reduced to (-pi, pi]."""
    m = np.asarray(m, dtype=float)
    phi = math.atan2(-m[1, 0], m[0, 0])
    r = k_matrix(phi).T @ m
    a = 2.0 * math.log(r[0, 0])
    return IwasawaFactors(phi, r[0, 1] / r[1, 1], a)


def from_matrix(m, phi_hint: float = 0.0) -> GroupElement:
    """Lift a matrix to the sheet whose K-angle is closest to ``phi_hint``."""
    f = iwasawa_matrix(m)
    return GroupElement(phi_hint + _wrap(f.k - phi_hint), f.n, f.a)


def iwasawa_decompose(g: GroupElement) -> IwasawaFactors:
    # the storage chart is already the global KNA decomposition
    return IwasawaFactors(g.phi, g.n, g.a)


def iwasawa_compose(f: IwasawaFactors) -> GroupElement:
    return product(k_element(f.k), n_element(f.n), a_element(f.a))


def _exp_matrix(x: AlgebraVector, t: float = 1.0) -> np.ndarray:
    xm = x.matrix() * t
    delta = (0.25 * x.h * x.h + x.e * x.f) * t * t
    if delta > 1e-300:
        r = math.sqrt(delta)
        return math.cosh(r) * np.eye(2) + (math.sinh(r) / r) * xm
    if delta < -1e-300:
        r = math.sqrt(-delta)
        return math.cos(r) * np.eye(2) + (math.sin(r) / r) * xm
    return np.eye(2) + xm


def exp_map(x: AlgebraVector) -> GroupElement:
    """exp: sl(2,R) -> universal cover, lifted continuously along t -> exp(tX)."""
    delta = 0.25 * x.h * x.h + x.e * x.f
    if delta >= 0.0:
        # hyperbolic/parabolic one-parameter groups never wind
        return from_matrix(_exp_matrix(x), 0.0)
    # elliptic: follow the path with steps small enough that the K-angle
    # moves by less than pi/4 per step
    steps = max(8, int(math.ceil(8.0 * x.norm())) * 4)
    phi = 0.0
    for i in range(1, steps + 1):
        phi = from_matrix(_exp_matrix(x, i / steps), phi).phi
    return from_matrix(_exp_matrix(x), phi)


def log_map(g: GroupElement) -> AlgebraVector:
    """Inverse of exp near the identity.

    Defined for |phi| < pi and trace > -2; raises ValueError otherwise.
    """
    if abs(g.phi) >= math.pi:
        raise ValueError(f"log_map: |phi| = {abs(g.phi):.6g} >= pi, outside the exp chart")
    m = g.matrix()
    half_tr = 0.5 * (m[0, 0] + m[1, 1])
    if half_tr <= -1.0:
        raise ValueError(f"log_map: trace {2 * half_tr:.6g} <= -2, not in the image of exp")
    traceless = m - half_tr * np.eye(2)
    if half_tr > 1.0 + 1e-14:
        r = math.acosh(half_tr)
        x = traceless * (r / math.sinh(r))
    elif half_tr < 1.0 - 1e-14:
        r = math.acos(half_tr)
        x = traceless * (r / math.sin(r))
    else:
        x = traceless
    out = AlgebraVector.from_matrix(x)
    back = exp_map(out)
    if abs(back.phi - g.phi) > 1e-6:
        raise ValueError("log_map: element lies on a different sheet of the cover")
    return out


def sigma(g: GroupElement) -> GroupElement:
    """Involutive automorphism fixing A pointwise: conjugation by diag(1,-1).

    k(phi) -> k(-phi), n(n) -> n(-n), a(a) -> a(a), hence a sign flip in the
    chart, which is also the continuous lift to the cover.
    """
    return GroupElement(-g.phi, -g.n, g.a)


def sigma_algebra(x: AlgebraVector) -> AlgebraVector:
    return AlgebraVector(x.h, -x.e, -x.f)


def twisted_conjugate(g: GroupElement, x: GroupElement) -> GroupElement:
    """tau_g(x) = g x sigma(g)^{-1}."""
    return multiply(multiply(g, x), inverse(sigma(g)))


def random_element(rng: np.random.Generator, scale: float = 5.0) -> GroupElement:
    phi, n, a = rng.uniform(-scale, scale, size=3)
    return GroupElement(float(phi), float(n), float(a))


def distance(g: GroupElement, h: GroupElement) -> float:
    """Max-norm distance between chart coordinates."""
    return float(np.max(np.abs(g.as_array() - h.as_array())))


@dataclass(frozen=True)
class ANElement:
    """Element exp(t H0) exp(s E) of the solvable group R = AN.

    Group law (t1, s1)(t2, s2) = (t1 + t2, s1 exp(-t2) + s2).
    """

    t: float = 0.0
    s: float = 0.0

    def __matmul__(self, other: ANElement) -> ANElement:
        return ANElement(self.t + other.t, self.s * math.exp(-other.t) + other.s)

    def inverse(self) -> ANElement:
        return ANElement(-self.t, -self.s * math.exp(self.t))

    def to_group(self) -> GroupElement:
        # a(t) n(s) = n(s e^t) a(t) in the k n a chart
        return GroupElement(0.0, self.s * math.exp(self.t), self.t)

    @classmethod
    def from_group(cls, g: GroupElement, tol: float = 1e-9) -> ANElement:
        if abs(g.phi) > tol:
            raise ValueError("element is not in AN")
        return cls(g.a, g.n * math.exp(-g.a))

    def matrix(self) -> np.ndarray:
        return self.to_group().matrix()
