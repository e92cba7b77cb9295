"""Spinor fields on the spinless extension domain and their deformed module
structure.

Coordinates: p = (a, t, s) with a the transversal coordinate and
q = (t, s) = r^-1, r the R-coordinate of the point on its orbit. In these
coordinates the deformed product of functions on a leaf is the symmetric
space product in (t, s), and the fields commuting with the R-action are

    d_a,   F_H = d_t,   F_E = e^-t d_s.

The metric in the frame (d_a, F_H, F_E) depends on a only; the orthonormal
frame E_0 = d_a, E_1, E_2 = C(a) (F_H, F_E) has signature (+, +, -).
Spinor fields are C^2-valued, the bundle being trivialised by this frame.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .lie_core import ANElement, GroupElement
from .symsym_p11 import COMMUTATOR_CONSTANT, Grid, star_at
from .udf_bhtz import RAction, bhtz_raction

# ---------------------------------------------------------------- Clifford

GAMMA = np.array([
    [[1.0, 0.0], [0.0, -1.0]],
    [[0.0, 1.0], [1.0, 0.0]],
    [[0.0, 1.0], [-1.0, 0.0]],
], dtype=complex)
ETA = np.diag([1.0, 1.0, -1.0])
GAMMA_UP = np.einsum("ii,ijk->ijk", np.linalg.inv(ETA), GAMMA)
# D is formally symmetric for the pairing int Psi^dagger BETA Phi dvol
BETA = 1j * GAMMA[2]


def clifford_defect(gammas=GAMMA, eta=ETA) -> float:
    worst = 0.0
    for i in range(3):
        for j in range(3):
            ac = gammas[i] @ gammas[j] + gammas[j] @ gammas[i]
            worst = max(worst, float(np.max(np.abs(ac - 2 * eta[i, j] * np.eye(2)))))
    return worst


def spin_lift(lam: np.ndarray) -> np.ndarray:
    """S with S gamma_i S^-1 = sum_j lam[j, i] gamma_j, det S = 1 (sign free)."""
    rows = []
    for i in range(3):
        gi = GAMMA[i]
        gp = np.einsum("j,jkl->kl", lam[:, i], GAMMA)
        # S gi - gp S = 0, linear in vec(S) (row-major)
        rows.append(np.kron(np.eye(2), gi.T) - np.kron(gp, np.eye(2)))
    _, sv, vh = np.linalg.svd(np.concatenate(rows))
    S = vh[-1].conj().reshape(2, 2)
    S = S / np.sqrt(np.linalg.det(S))
    return S


# ---------------------------------------------------------------- chart and frame


class FrameDegenerationError(ValueError):
    pass


def _point(action: RAction, a: float, t: float, s: float) -> GroupElement:
    return action.from_chart((a, 0), ANElement(t, s).inverse())


def coordinate_fields(p) -> np.ndarray:
    """Rows: components of (d_a, F_H, F_E) in (a, t, s) at p (broadcasting)."""
    p = np.asarray(p, dtype=float)
    out = np.zeros(p.shape[:-1] + (3, 3))
    out[..., 0, 0] = 1.0
    out[..., 1, 1] = 1.0
    out[..., 2, 2] = np.exp(-p[..., 1])
    return out


def metric_gram_oracle(action: RAction, p, h: float = 1e-5) -> np.ndarray:
    """Gram matrix of (d_a, F_H, F_E) at p from beta(x^-1 dx, x^-1 dx) / 8."""
    p = np.asarray(p, dtype=float)
    x = _point(action, *p).matrix()
    xi = np.linalg.inv(x)
    vecs = []
    for v in coordinate_fields(p):
        xp = _point(action, *(p + h * v)).matrix()
        xm = _point(action, *(p - h * v)).matrix()
        y = xi @ (xp - xm) / (2 * h)
        vecs.append(y)
    G = np.array([[4 * np.trace(u @ w) / 8 for w in vecs] for u in vecs])
    return G


@dataclass
class Frame:
    """Orthonormal frame E_i = A(a) (d_a, F_H, F_E) and its connection."""

    action: RAction
    G0: np.ndarray = field(init=False)  # orbit Gram of (F_H, F_E) at a = 0
    C0: np.ndarray = field(init=False)

    def __post_init__(self):
        G = metric_gram_oracle(self.action, np.array([0.0, 0.1, -0.2]))
        if abs(G[0, 0] - 1) > 1e-6 or np.max(np.abs(G[0, 1:])) > 1e-6:
            raise FrameDegenerationError("transversal direction is not unit and orthogonal")
        self.G0 = G[1:, 1:]
        w, V = np.linalg.eigh(self.G0)
        order = np.argsort(-w)  # positive first
        w, V = w[order], V[:, order]
        if not (w[0] > 0 > w[1]):
            raise FrameDegenerationError("orbit metric is not Lorentzian")
        C0 = (V / np.sqrt(np.abs(w))).T
        self.C0 = C0 * np.sign(np.diag(C0))[:, None]

    def A(self, a) -> np.ndarray:
        a = np.asarray(a, dtype=float)
        out = np.zeros(a.shape + (3, 3))
        out[..., 0, 0] = 1.0
        out[..., 1:, 1:] = self.C0 / np.cosh(a)[..., None, None]
        return out

    def vectors(self, p) -> np.ndarray:
        """Rows: E_i in (a, t, s) components."""
        p = np.asarray(p, dtype=float)
        return np.einsum("...ij,...jk->...ik", self.A(p[..., 0]), coordinate_fields(p))

    def structure(self, a: float) -> np.ndarray:
        """c[i, j, k] with [E_i, E_j] = c[i, j, k] E_k.

        Uses [d_a, F] = 0 and [F_H, F_E] = -F_E.
        """
        c = np.zeros((3, 3, 3))
        for k in (1, 2):
            c[0, k, k] = -math.tanh(a)
            c[k, 0, k] = math.tanh(a)
        Ab = self.C0 / math.cosh(a)
        Ainv = np.linalg.inv(Ab)
        det = np.linalg.det(Ab)
        # [E_1, E_2] = -det(A) F_E = -det(A) sum_l Ainv[E, l] E_l
        for l in (1, 2):
            c[1, 2, l] = -det * Ainv[1, l - 1]
            c[2, 1, l] = -c[1, 2, l]
        return c

    def connection(self, a: float) -> np.ndarray:
        """Gamma[i, j, k] = g(nabla_{E_i} E_j, E_k) by the Koszul formula."""
        c = self.structure(a)
        cl = np.einsum("ijl,lk->ijk", c, ETA)  # g([E_i, E_j], E_k)
        # 2 Gamma_ijk = c_ijk - c_ikj - c_jki
        return 0.5 * (cl - np.einsum("ikj->ijk", cl) - np.einsum("jki->ijk", cl))

    def spin_connection(self, a: float) -> np.ndarray:
        """Gamma_i = -1/4 Gamma_ijk gamma^j gamma^k."""
        gam = self.connection(a)
        return -0.25 * np.einsum("ijk,jab,kbc->iac", gam, GAMMA_UP, GAMMA_UP)


def volume_density(frame: Frame, p) -> np.ndarray:
    """sqrt|det g| in (a, t, s) coordinates."""
    p = np.asarray(p, dtype=float)
    A = frame.A(p[..., 0])
    return 1.0 / np.abs(np.linalg.det(A)) * np.exp(p[..., 1])


# ---------------------------------------------------------------- lifted action


@dataclass
class SpinLiftedAction:
    """The R-action r -> g r, i.e. q -> q g^-1, with its spin lift.

    The lift at (g, p) is the spin matrix of the frame rotation
    Lambda[j, i] = E^j(d tau_g E_i) at tau_g p. The frame is R-invariant, so
    Lambda is the identity and the lift is +-1.
    """

    frame: Frame

    @staticmethod
    def act(g: ANElement, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        qq = ANElement(p[1], p[2]) @ g.inverse()
        return np.array([p[0], qq.t, qq.s])

    def frame_matrix(self, g: ANElement, p, h: float = 1e-6) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        img = self.act(g, p)
        E = self.frame.vectors(p)
        pushed = np.array([(self.act(g, p + h * e) - self.act(g, p - h * e)) / (2 * h) for e in E])
        # pushed[i] = sum_j Lambda[j, i] E_j(img)
        return np.linalg.solve(self.frame.vectors(img).T, pushed.T)

    def lift(self, g: ANElement, p) -> np.ndarray:
        return spin_lift(self.frame_matrix(g, p))

    def cocycle_defect(self, g1: ANElement, g2: ANElement, p) -> float:
        """|L(g1 g2, p) -+ L(g1, tau_g2 p) L(g2, p)|, sign ambiguity removed."""
        lhs = self.lift(g1 @ g2, p)
        rhs = self.lift(g1, self.act(g2, p)) @ self.lift(g2, p)
        return float(min(np.max(np.abs(lhs - rhs)), np.max(np.abs(lhs + rhs))))

    def act_spinor(self, g: ANElement, psi: Callable) -> Callable:
        """(alpha_g Psi)(p) = L(g, tau_g^-1 p) Psi(tau_g^-1 p), L trivial here."""
        gi = g.inverse()

        def out(P):
            P = np.asarray(P, dtype=float)
            flat = P.reshape(-1, 3)
            moved = np.array([self.act(gi, x) for x in flat]).reshape(P.shape)
            return psi(moved)

        return out


# ---------------------------------------------------------------- derivatives


def partials(f: Callable, p, h: float = 1e-4) -> np.ndarray:
    """d f / d(a, t, s) at p (last axis of the result), central FD with one Richardson step."""
    p = np.asarray(p, dtype=float)
    out = []
    for mu in range(3):
        e = np.zeros(3)
        e[mu] = 1.0
        d1 = (f(p + h * e) - f(p - h * e)) / (2 * h)
        d2 = (f(p + 0.5 * h * e) - f(p - 0.5 * h * e)) / h
        out.append((4 * d2 - d1) / 3)
    return np.stack(out, axis=-1)


def frame_derivative(frame: Frame, f: Callable, p, h: float = 1e-4) -> np.ndarray:
    """E_i f at p, index i last (scalar f) or after the value axes."""
    p = np.asarray(p, dtype=float)
    d = partials(f, p, h)  # (..., [value...], 3)
    E = frame.vectors(p)  # (..., 3, 3)
    extra = d.ndim - p.ndim
    E = E.reshape(E.shape[:-2] + (1,) * extra + E.shape[-2:])
    return np.einsum("...m,...im->...i", d, E)


def dirac(frame: Frame, psi: Callable, p, h: float = 1e-4) -> np.ndarray:
    """D psi = gamma^i (E_i + Gamma_i) psi at points p (..., 3) -> (..., 2)."""
    p = np.asarray(p, dtype=float)
    dpsi = frame_derivative(frame, psi, p, h)  # (..., 2, 3)
    val = psi(p)
    out = np.einsum("iab,...bi->...a", GAMMA_UP, dpsi)
    flat = p.reshape(-1, 3)
    G = np.array([frame.spin_connection(a) for a in flat[:, 0]]).reshape(p.shape[:-1] + (3, 2, 2))
    out = out + np.einsum("iab,...ibc,...c->...a", GAMMA_UP, G, val)
    return out


def dirac_op(frame: Frame, psi: Callable, h: float = 1e-4) -> Callable:
    return lambda p: dirac(frame, psi, p, h)


def clifford_of_gradient(frame: Frame, f: Callable, p, h: float = 1e-4) -> np.ndarray:
    """D f = gamma^i E_i f for a scalar f: a 2x2 matrix field."""
    return np.einsum("iab,...i->...ab", GAMMA_UP, frame_derivative(frame, f, p, h))


# ---------------------------------------------------------------- leafwise products


@dataclass(frozen=True)
class SpinorSetup:
    theta: float = 1.0
    mass: float = 2.0
    quad: Grid = Grid(8, 4, -2.0, 2.0, 24, -6.0, 6.0)


def _leaf(f: Callable, a: float) -> Callable:
    def g(q):
        q = np.asarray(q, dtype=float)
        return f(np.concatenate([np.full(q.shape[:-1] + (1,), a), q], axis=-1))

    return g


def _by_leaf(p, fn):
    """Evaluate fn(a, q_points) leaf by leaf; results stacked in input order."""
    p = np.asarray(p, dtype=float)
    flat = p.reshape(-1, 3)
    res = None
    for a in np.unique(flat[:, 0]):
        sel = flat[:, 0] == a
        val = fn(a, flat[sel, 1:])
        if res is None:
            res = np.zeros((len(flat),) + val.shape[1:], dtype=complex)
        res[sel] = val
    return res.reshape(p.shape[:-1] + res.shape[1:])


def scalar_product(u: Callable, v: Callable, p, theta: float, quad: Grid) -> np.ndarray:
    """(u * v)(p) for scalar fields, leaf by leaf."""
    return _by_leaf(p, lambda a, q: star_at(_leaf(u, a), _leaf(v, a), q, theta, quad))


def _component(f: Callable, *idx) -> Callable:
    return lambda q: f(q)[(Ellipsis,) + idx]


def deformed_right_action(psi: Callable, f: Callable, p, theta: float, quad: Grid) -> np.ndarray:
    """(Psi * f)(p) = int K(e, g, h) f(h) Psi(g): componentwise, Psi in the first slot."""

    def leaf(a, q):
        pa, fa = _leaf(psi, a), _leaf(f, a)
        return np.stack([star_at(_component(pa, j), fa, q, theta, quad) for j in range(2)], axis=-1)

    return _by_leaf(p, leaf)


def endo_left_action(gam: Callable, psi: Callable, p, theta: float, quad: Grid) -> np.ndarray:
    """(gamma * Psi)_i = sum_j gamma_ij * Psi_j, gamma in the first slot."""

    def leaf(a, q):
        ga, pa = _leaf(gam, a), _leaf(psi, a)
        out = np.zeros((len(q), 2), dtype=complex)
        for i in range(2):
            for j in range(2):
                out[:, i] += star_at(_component(ga, i, j), _component(pa, j), q, theta, quad)
        return out

    return _by_leaf(p, leaf)


def spinor_times_endo(psi: Callable, gam: Callable, p, theta: float, quad: Grid) -> np.ndarray:
    """(Psi * gamma)_i = sum_j Psi_j * gamma_ij: Psi in the first slot, gamma acting."""

    def leaf(a, q):
        pa, ga = _leaf(psi, a), _leaf(gam, a)
        out = np.zeros((len(q), 2), dtype=complex)
        for i in range(2):
            for j in range(2):
                out[:, i] += star_at(_component(pa, j), _component(ga, i, j), q, theta, quad)
        return out

    return _by_leaf(p, leaf)


def sampled_on_leaf(values_fn: Callable, a: float, quad: Grid) -> Callable:
    """Tabulate a (possibly expensive) field on the quadrature grid of one leaf
    and return a callable usable as a quadrature input on that grid."""
    pts = np.concatenate([np.full(quad.shape + (1,), a), quad.points()], axis=-1)
    vals = values_fn(pts)

    def f(p):
        p = np.asarray(p)
        if p.shape[:-1] != quad.shape:
            raise ValueError("tabulated field can only be read back on its own grid")
        return vals

    return f


# ---------------------------------------------------------------- checks


def _rel(x, y) -> float:
    return float(np.max(np.abs(x - y)) / max(np.max(np.abs(y)), 1e-300))


def module_associativity_defect(psi, f, g, a: float, pts_q, theta: float, quad: Grid) -> float:
    """(Psi * f) * g against Psi * (f * g) on one leaf."""
    pts = np.concatenate([np.full(pts_q.shape[:-1] + (1,), a), pts_q], axis=-1)
    pf = sampled_on_leaf(lambda P: deformed_right_action(psi, f, P, theta, quad), a, quad)
    fg = sampled_on_leaf(lambda P: scalar_product(f, g, P, theta, quad), a, quad)
    left = deformed_right_action(pf, g, pts, theta, quad)
    right = deformed_right_action(psi, fg, pts, theta, quad)
    return _rel(left, right)


def endo_compatibility_defect(gam, psi, f, a: float, pts_q, theta: float, quad: Grid) -> float:
    """(gamma * Psi) * f against gamma * (Psi * f) on one leaf."""
    pts = np.concatenate([np.full(pts_q.shape[:-1] + (1,), a), pts_q], axis=-1)
    gp = sampled_on_leaf(lambda P: endo_left_action(gam, psi, P, theta, quad), a, quad)
    pf = sampled_on_leaf(lambda P: deformed_right_action(psi, f, P, theta, quad), a, quad)
    left = deformed_right_action(gp, f, pts, theta, quad)
    right = endo_left_action(gam, pf, pts, theta, quad)
    return _rel(left, right)


def vector_field_derivative(X: Callable, f: Callable, p, h: float = 1e-4) -> np.ndarray:
    """X.f with X(p) -> (..., 3) components in (a, t, s)."""
    p = np.asarray(p, dtype=float)
    return np.einsum("...m,...m->...", partials(f, p, h), X(p))


COMMUTING_FIELDS = {
    "d_a": lambda p: np.stack([np.ones(p.shape[:-1]), 0 * p[..., 0], 0 * p[..., 0]], axis=-1),
    "F_H": lambda p: np.stack([0 * p[..., 0], np.ones(p.shape[:-1]), 0 * p[..., 0]], axis=-1),
    "F_E": lambda p: np.stack([0 * p[..., 0], 0 * p[..., 0], np.exp(-p[..., 1])], axis=-1),
}

NON_COMMUTING_FIELDS = {
    # generators of right multiplication on q: these do not commute with the action
    "right_E": lambda p: np.stack([0 * p[..., 0], 0 * p[..., 0], np.ones(p.shape[:-1])], axis=-1),
    "right_H": lambda p: np.stack([0 * p[..., 0], np.ones(p.shape[:-1]), -p[..., 2]], axis=-1),
}


def derivation_defect(X: Callable, f: Callable, g: Callable, pts, theta: float, quad: Grid, h: float = 1e-4) -> float:
    """sup |X(f*g) - (Xf)*g - f*(Xg)| / sup |X(f*g)|."""
    pts = np.asarray(pts, dtype=float)
    prod = lambda P: scalar_product(f, g, P, theta, quad)
    lhs = vector_field_derivative(X, prod, pts, h)
    Xf = lambda P: vector_field_derivative(X, f, P, h)
    Xg = lambda P: vector_field_derivative(X, g, P, h)
    rhs = scalar_product(Xf, g, pts, theta, quad) + scalar_product(f, Xg, pts, theta, quad)
    return _rel(rhs, lhs)


def dirac_commutator_defect(frame: Frame, f: Callable, psi: Callable, pts, theta: float, quad: Grid,
                            h: float = 1e-4) -> dict:
    """[D, f] Psi = D(Psi * f) - (D Psi) * f against Psi * (D f).

    f acts through the deformed right action; D f = gamma^i E_i f acts on
    Psi in the matrix slot.
    """
    pts = np.asarray(pts, dtype=float)
    pf = lambda P: deformed_right_action(psi, f, P, theta, quad)
    lhs = dirac(frame, pf, pts, h) - deformed_right_action(dirac_op(frame, psi, h), f, pts, theta, quad)
    Df = lambda P: clifford_of_gradient(frame, f, P, h)
    rhs = spinor_times_endo(psi, Df, pts, theta, quad)
    return {"defect": _rel(lhs, rhs), "sup_commutator": float(np.max(np.abs(lhs))),
            "sup_Df": float(np.max(np.abs(Df(pts))))}


# ---------------------------------------------------------------- Hamiltonian fields


class NotHamiltonianError(ValueError):
    pass


def hamiltonian_from_field(X: Callable, a: float, base=(0.0, -6.0), loop_tol: float = 1e-6, n: int = 64) -> Callable:
    """Leafwise lambda with i_X omega = d lambda, omega = dt ^ ds, by line
    integration from ``base`` (first along t, then along s).

    Rejects X whose i_X omega has a non-zero loop integral around small
    squares at sample points.
    """
    xg, wg = np.polynomial.legendre.leggauss(n)

    def form(q):
        # i_X omega = X^t ds - X^s dt -> components (dt, ds) = (-X^s, X^t)
        q = np.asarray(q, dtype=float)
        P = np.concatenate([np.full(q.shape[:-1] + (1,), a), q], axis=-1)
        v = X(P)
        return np.stack([-v[..., 2], v[..., 1]], axis=-1)

    def line(p0, p1):
        p0, p1 = np.asarray(p0, float), np.asarray(p1, float)
        t = 0.5 * (xg + 1)
        pts = p0[None, :] + t[:, None] * (p1 - p0)[None, :]
        return float(np.sum(0.5 * wg * (form(pts) @ (p1 - p0))))

    for c in ((0.3, -0.2), (-0.5, 0.4), (0.0, 0.0)):
        c = np.array(c)
        d = 0.2
        corners = [c, c + [d, 0], c + [d, d], c + [0, d], c]
        loop = sum(line(corners[i], corners[i + 1]) for i in range(4))
        if abs(loop) > loop_tol:
            raise NotHamiltonianError(f"loop integral {loop:.2e} of i_X omega")

    b = np.asarray(base, float)
    tw = 0.5 * (xg + 1)

    def lam(P):
        P = np.asarray(P, dtype=float)
        q = P.reshape(-1, 3)[:, 1:]
        # leg 1: (b_t, b_s) -> (t, b_s); leg 2: (t, b_s) -> (t, s)
        leg1 = np.stack([b[0] + tw[None, :] * (q[:, :1] - b[0]), np.full((len(q), n), b[1])], axis=-1)
        leg2 = np.stack([np.repeat(q[:, :1], n, axis=1), b[1] + tw[None, :] * (q[:, 1:] - b[1])], axis=-1)
        i1 = np.sum(0.5 * wg * form(leg1)[..., 0], axis=1) * (q[:, 0] - b[0])
        i2 = np.sum(0.5 * wg * form(leg2)[..., 1], axis=1) * (q[:, 1] - b[1])
        return (i1 + i2).reshape(P.shape[:-1])

    return lam


def hamiltonian_field(lam: Callable, h: float = 1e-4) -> Callable:
    """X_lambda with i_X omega = d lambda on each leaf: X^t = d_s lambda, X^s = -d_t lambda."""

    def X(P):
        d = partials(lam, P, h)
        return np.stack([0 * d[..., 0], d[..., 2], -d[..., 1]], axis=-1)

    return X


def deformed_covariant_derivative(frame: Frame, lam: Callable, X: Callable, psi: Callable, pts,
                                  theta: float, quad: Grid) -> np.ndarray:
    """(lam * Psi - Psi * lam) / (i theta) + Psi * Gamma(X).

    The 1/(i theta) makes the theta -> 0 limit the classical X.Psi + Gamma(X) Psi.
    """
    pts = np.asarray(pts, dtype=float)
    norm = -COMMUTATOR_CONSTANT * theta
    lp = _by_leaf(pts, lambda a, q: np.stack(
        [star_at(_leaf(lam, a), _component(_leaf(psi, a), j), q, theta, quad) for j in range(2)], axis=-1))
    pl = deformed_right_action(psi, lam, pts, theta, quad)

    def gamma_X(P):
        P = np.asarray(P, dtype=float)
        comps = np.einsum("...m,...im->...i", X(P), np.linalg.inv(frame.vectors(P)).swapaxes(-1, -2))
        flat = P.reshape(-1, 3)
        G = np.array([frame.spin_connection(a) for a in flat[:, 0]]).reshape(P.shape[:-1] + (3, 2, 2))
        return np.einsum("...i,...iab->...ab", comps, G)

    return (lp - pl) / norm + spinor_times_endo(psi, gamma_X, pts, theta, quad)


def classical_covariant_derivative(frame: Frame, X: Callable, psi: Callable, pts, h: float = 1e-4) -> np.ndarray:
    pts = np.asarray(pts, dtype=float)
    xpsi = np.einsum("...am,...m->...a", partials(psi, pts, h), X(pts))
    comps = np.einsum("...m,...im->...i", X(pts), np.linalg.inv(frame.vectors(pts)).swapaxes(-1, -2))
    flat = pts.reshape(-1, 3)
    G = np.array([frame.spin_connection(a) for a in flat[:, 0]]).reshape(pts.shape[:-1] + (3, 2, 2))
    return xpsi + np.einsum("...i,...iab,...b->...a", comps, G, psi(pts))


UNIT_WINDOW = Grid(32, 4, -4.0, 4.0, 256, -14.0, 14.0)


def smooth_step(x, lo: float, hi: float):
    """1 for |x| <= lo, 0 for |x| >= hi, C-infinity in between."""
    u = np.clip((np.abs(x) - lo) / (hi - lo), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        e1 = np.where(u < 1, np.exp(-1.0 / np.maximum(1 - u, 1e-300)), 0.0)
        e0 = np.where(u > 0, np.exp(-1.0 / np.maximum(u, 1e-300)), 0.0)
    return e1 / (e1 + e0)


def unit_cutoff(t_plateau: float = 3.0, s_plateau: float = 10.0, t_edge: float = 3.9, s_edge: float = 13.5) -> Callable:
    """Leafwise approximate unit: 1 on a box in (t, s), compactly supported."""
    return lambda p: smooth_step(p[..., 1], t_plateau, t_edge) * smooth_step(p[..., 2], s_plateau, s_edge) + 0j


def unit_defect(psi: Callable, pts, theta: float = 1.0, quad: Grid = UNIT_WINDOW, chi: Callable | None = None) -> dict:
    """Psi * chi and chi Id * Psi against Psi for a unit cutoff chi."""
    chi = unit_cutoff() if chi is None else chi
    pts = np.asarray(pts, dtype=float)
    ref = psi(pts)
    right = deformed_right_action(psi, chi, pts, theta, quad)
    ident = lambda p: chi(p)[..., None, None] * np.eye(2)
    left = endo_left_action(ident, psi, pts, theta, quad)
    return {"right": _rel(right, ref), "left": _rel(left, ref)}


def leibniz_defect(frame: Frame, lam: Callable, X: Callable, f: Callable, psi: Callable, a: float, pts_q,
                   theta: float, quad: Grid) -> float:
    """nabla(f * Psi) against [lam, f] * Psi + f * nabla(Psi) on one leaf,
    with [lam, f] = (lam * f - f * lam) / (i theta)."""
    pts = np.concatenate([np.full(pts_q.shape[:-1] + (1,), a), pts_q], axis=-1)
    norm = -COMMUTATOR_CONSTANT * theta
    ident = lambda p: f(p)[..., None, None] * np.eye(2)
    fpsi = sampled_on_leaf(lambda P: endo_left_action(ident, psi, P, theta, quad), a, quad)
    lhs = deformed_covariant_derivative(frame, lam, X, fpsi, pts, theta, quad)
    br = sampled_on_leaf(lambda P: (scalar_product(lam, f, P, theta, quad) - scalar_product(f, lam, P, theta, quad)) / norm,
                         a, quad)
    nab = sampled_on_leaf(lambda P: deformed_covariant_derivative(frame, lam, X, psi, P, theta, quad), a, quad)
    rhs = (endo_left_action(lambda p: br(p)[..., None, None] * np.eye(2), psi, pts, theta, quad)
           + endo_left_action(ident, nab, pts, theta, quad))
    return _rel(lhs, rhs)


def make_frame(mass: float = 2.0, label: int = 1) -> Frame:
    return Frame(bhtz_raction("spinless", mass, label=label))
