"""The solvable symplectic symmetric space with transvection group P(1,1).

Model: M = R^2 with coordinates (a, l), omega = da ^ dl and symmetries

    s_(a,l)(a', l') = (2a - a', 2 l cosh(a - a') - l').

Closed forms used throughout (each one is re-derived numerically in the
tests from the symmetries alone):

* geodesics are a = a0 + t D, l = l0 e^{tD} + C sinh(tD), or vertical lines;
* the fourth point of (x, y, z) is (a_x - a_y + a_z, c/2);
* the three-point phase is linear in the l coordinates,
  S = 2 [sinh(ay - az) lx + sinh(az - ax) ly + sinh(ax - ay) lz].

The star product kernel is A e^{iS/theta} / (pi theta)^2 with
A = sqrt(cosh(ax - ay) cosh(ay - az) cosh(az - ax)), the square root of the
Jacobian ratio of the midpoint-to-vertex map; with this amplitude the
product is exactly unital and tracial.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import fd

# ------------------------------------------------------------------ model


@dataclass(frozen=True)
class SymPoint:
    a: float
    l: float

    def as_array(self) -> np.ndarray:
        return np.array([self.a, self.l])


def _arr(p) -> np.ndarray:
    if isinstance(p, SymPoint):
        return p.as_array()
    return np.asarray(p, dtype=float)


def symmetry(x, y) -> np.ndarray:
    """s_x(y), broadcasting over leading axes."""
    x, y = _arr(x), _arr(y)
    a = 2 * x[..., 0] - y[..., 0]
    l = 2 * x[..., 1] * np.cosh(x[..., 0] - y[..., 0]) - y[..., 1]
    return np.stack([a, l], axis=-1)


def symmetry_jacobian(x, y) -> np.ndarray:
    x, y = _arr(x), _arr(y)
    return np.array([[-1.0, 0.0], [-2 * x[1] * math.sinh(x[0] - y[0]), -1.0]])


# ---------------------------------------------------------- transvections


def boost(c: float):
    return lambda p: _arr(p) + np.array([c, 0.0])


def translation_plus(p_: float):
    return lambda p: np.array([_arr(p)[0], _arr(p)[1] + p_ * math.exp(_arr(p)[0])])


def translation_minus(q: float):
    return lambda p: np.array([_arr(p)[0], _arr(p)[1] + q * math.exp(-_arr(p)[0])])


def transvection(c: float, p_: float, q: float):
    """(a, l) -> (a + c, l + p e^a + q e^-a)."""

    def f(pt):
        pt = _arr(pt)
        a, l = pt[..., 0], pt[..., 1]
        return np.stack([a + c, l + p_ * np.exp(a) + q * np.exp(-a)], axis=-1)

    return f


def transvection_of_pair(x, y):
    """(c, p, q) with s_x s_y = transvection(c, p, q)."""
    x, y = _arr(x), _arr(y)
    c = 2 * (x[0] - y[0])
    # 2 lx cosh(a + ax - 2ay) - 2 ly cosh(a - ay)
    p_ = x[1] * math.exp(x[0] - 2 * y[0]) - y[1] * math.exp(-y[0])
    q = x[1] * math.exp(2 * y[0] - x[0]) - y[1] * math.exp(y[0])
    return c, p_, q


def transvection_generators():
    """One-parameter flows h (boost), e+ and e- (translations)."""
    return {"h": boost, "e+": translation_plus, "e-": translation_minus}


GENERATOR_FIELDS = {
    "h": lambda p: np.array([1.0, 0.0]),
    "e+": lambda p: np.array([0.0, math.exp(_arr(p)[0])]),
    "e-": lambda p: np.array([0.0, math.exp(-_arr(p)[0])]),
}


def flow_bracket(flow_x, flow_y, p, t: float = 1e-3) -> np.ndarray:
    """Lie bracket [X, Y] at p from the group commutator of the flows.

    phi^Y_{-t} phi^X_{-t} phi^Y_t phi^X_t (p) = p + t^2 [X, Y](p) + O(t^3);
    the symmetric combination with -t cancels the cubic term.
    """

    def comm(s):
        q = flow_x(s)(p)
        q = flow_y(s)(q)
        q = flow_x(-s)(q)
        q = flow_y(-s)(q)
        return q

    p = _arr(p)
    return (comm(t) + comm(-t) - 2 * p) / (2 * t * t)


def transvection_bracket_table(p, t: float = 1e-3) -> dict:
    """Bracket coefficients in the basis (h, e+, e-), by least squares at p
    and at a second point (the fields are not pointwise independent)."""
    gens = transvection_generators()
    names = list(gens)
    p = _arr(p)
    pts = [p, p + np.array([0.37, -0.21])]
    basis = np.concatenate([np.stack([GENERATOR_FIELDS[n](q) for n in names], axis=1) for q in pts], axis=0)
    table = {}
    for i, x in enumerate(names):
        for y in names[i + 1:]:
            rhs = np.concatenate([flow_bracket(gens[x], gens[y], q, t) for q in pts])
            coef, *_ = np.linalg.lstsq(basis, rhs, rcond=None)
            table[(x, y)] = dict(zip(names, coef))
    return table


# ------------------------------------------------------------- connection


OMEGA = np.array([[0.0, 1.0], [-1.0, 0.0]])


def christoffels(x, h: float = 1e-4) -> np.ndarray:
    """Gamma[m, i, j] at x from omega(nabla_i d_j, d_k) = 1/2 d_i omega(d_j + s_x* d_j, d_k).

    (s_x* Y)(y) = ds_x|_{s_x(y)} Y(s_x(y)); all derivatives by central FD.
    """
    x = _arr(x)

    def pushed(j):
        e = np.eye(2)[j]

        def w(y):
            sy = symmetry(x, y)
            jac = fd.jacobian(lambda q: symmetry(x, q), sy, h)
            return e + jac @ e

        return w

    lower = np.zeros((2, 2, 2))  # lower[i, j, k] = omega(nabla_i d_j, d_k)
    for j in range(2):
        wj = pushed(j)
        for i in range(2):
            dw = fd.directional(wj, x, np.eye(2)[i], h)
            lower[i, j] = 0.5 * dw @ OMEGA
    # omega(Gamma^m_ij d_m, d_k) = Gamma^m_ij OMEGA[m, k]
    gam = np.einsum("ijk,km->mij", lower, np.linalg.inv(OMEGA))
    return gam


def christoffels_closed(x) -> np.ndarray:
    """Gamma^l_aa = -l, all others zero."""
    g = np.zeros((2, 2, 2))
    g[1, 0, 0] = -_arr(x)[1]
    return g


def torsion(gam: np.ndarray) -> float:
    return float(np.max(np.abs(gam - gam.transpose(0, 2, 1))))


def nabla_omega(gam: np.ndarray) -> float:
    """max |(nabla_i omega)_jk| for constant omega."""
    t = -np.einsum("mij,mk->ijk", gam, OMEGA) - np.einsum("mik,jm->ijk", gam, OMEGA)
    return float(np.max(np.abs(t)))


def pushforward_christoffels(phi, p, gamma_fn, h: float = 1e-4) -> np.ndarray:
    """Connection coefficients of phi_* nabla at phi(p)."""
    p = _arr(p)
    D = fd.jacobian(phi, p, h)
    Di = np.linalg.inv(D)
    hess = np.zeros((2, 2, 2))
    for a_ in range(2):
        for b_ in range(2):
            ea, eb = np.eye(2)[a_], np.eye(2)[b_]
            hess[:, a_, b_] = (
                phi(p + h * (ea + eb)) - phi(p + h * (ea - eb)) - phi(p - h * (ea - eb)) + phi(p - h * (ea + eb))
            ) / (4 * h * h)
    gam = gamma_fn(p)
    out = np.einsum("km,mab,ai,bj->kij", D, gam, Di, Di) - np.einsum("kab,ai,bj->kij", hess, Di, Di)
    return out


# --------------------------------------------------------------- geodesics


@dataclass
class GeodesicArc:
    p: np.ndarray
    q: np.ndarray
    t: np.ndarray
    points: np.ndarray
    velocity0: np.ndarray
    step: float
    residual: float
    iterations: int


class ShootingError(RuntimeError):
    pass


def _geodesic_rhs(state, gamma_fn=christoffels_closed):
    x, v = state[:2], state[2:]
    gam = gamma_fn(x)
    acc = -np.einsum("mij,i,j->m", gam, v, v)
    return np.concatenate([v, acc])


def integrate_geodesic(p, v0, t1: float = 1.0, n: int = 200):
    """RK4 on the geodesic equation; returns (t, states)."""
    st = np.concatenate([_arr(p), np.asarray(v0, dtype=float)])
    ts = np.linspace(0.0, t1, n + 1)
    h = ts[1] - ts[0]
    out = [st]
    for _ in range(n):
        k1 = _geodesic_rhs(st)
        k2 = _geodesic_rhs(st + 0.5 * h * k1)
        k3 = _geodesic_rhs(st + 0.5 * h * k2)
        k4 = _geodesic_rhs(st + h * k3)
        st = st + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        out.append(st)
    return ts, np.array(out)


def geodesic(p, q, n: int = 200, tol: float = 1e-11, maxiter: int = 50) -> GeodesicArc:
    """Two-point geodesic by shooting on the initial velocity (RK4 + Newton)."""
    p, q = _arr(p), _arr(q)
    if np.allclose(p, q, atol=0, rtol=0):
        ts = np.linspace(0, 1, n + 1)
        return GeodesicArc(p, q, ts, np.tile(p, (n + 1, 1)), np.zeros(2), 1.0 / n, 0.0, 0)
    v = q - p

    def end(v):
        return integrate_geodesic(p, v, 1.0, n)[1][-1, :2]

    res = math.inf
    for it in range(maxiter):
        r = end(v) - q
        res = float(np.max(np.abs(r)))
        if res < tol * (1 + np.max(np.abs(q))):
            break
        jac = fd.jacobian(end, v, 1e-6)
        v = v - np.linalg.solve(jac, r)
    else:
        raise ShootingError(f"geodesic shooting did not converge (residual {res:.2e})")
    ts, states = integrate_geodesic(p, v, 1.0, n)
    return GeodesicArc(p, q, ts, states[:, :2], v, 1.0 / n, res, it)


def geodesic_closed(p, q, t):
    """Point at parameter t in [0, 1] on the geodesic p -> q (vectorised in t)."""
    p, q = _arr(p), _arr(q)
    t = np.asarray(t, dtype=float)
    d = q[0] - p[0]
    a = p[0] + t * d
    if abs(d) < 1e-12:
        l = p[1] + t * (q[1] - p[1])
    else:
        c = (q[1] - p[1] * math.exp(d)) / math.sinh(d)
        l = p[1] * np.exp(t * d) + c * np.sinh(t * d)
    return np.stack([a, l], axis=-1)


def geodesic_midpoint(p, q) -> np.ndarray:
    return geodesic_closed(p, q, 0.5)


# ------------------------------------------------------------- fourth point


def fourth_point(x, y, z) -> np.ndarray:
    """Unique t with s_x s_y s_z t = t (closed form, broadcasting)."""
    x, y, z = _arr(x), _arr(y), _arr(z)
    at = x[..., 0] - y[..., 0] + z[..., 0]
    t0 = np.stack([at, np.zeros_like(at)], axis=-1)
    # l-equation is affine with slope -1: image of l=0 gives 2 l_t
    c = symmetry(x, symmetry(y, symmetry(z, t0)))[..., 1]
    return np.stack([at, 0.5 * c], axis=-1)


def fourth_point_newton(x, y, z, guess=None, tol: float = 1e-13, maxiter: int = 50) -> np.ndarray:
    x, y, z = _arr(x), _arr(y), _arr(z)

    def F(t):
        return symmetry(x, symmetry(y, symmetry(z, t))) - t

    t = np.zeros(2) if guess is None else _arr(guess).copy()
    for _ in range(maxiter):
        r = F(t)
        if np.max(np.abs(r)) < tol:
            break
        t = t - np.linalg.solve(fd.jacobian(F, t, 1e-5), r)
    return t


# -------------------------------------------------------------------- areas


def _segment_closed(p, q):
    """Integral of -l da along the geodesic p -> q (vectorised)."""
    p, q = np.asarray(p), np.asarray(q)
    d = q[..., 0] - p[..., 0]
    small = np.abs(d) < 1e-8
    ds = np.where(small, 1.0, d)
    c = (q[..., 1] - p[..., 1] * np.exp(ds)) / np.sinh(ds)
    val = -(p[..., 1] * np.expm1(ds) + c * (np.cosh(ds) - 1.0))
    # small-d limit: trapezoid in a is exact to O(d^3)
    lim = -0.5 * d * (p[..., 1] + q[..., 1])
    return np.where(small, lim, val)


def triangle_area_closed(p, q, r):
    p, q, r = _arr(p), _arr(q), _arr(r)
    return _segment_closed(p, q) + _segment_closed(q, r) + _segment_closed(r, p)


def _gauss(n):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1), 0.5 * w


def triangle_area(p, q, r, pieces: int = 8, order: int = 8) -> float:
    """Oriented area by Stokes, sum of -l da along the three geodesic arcs.

    Composite Gauss-Legendre in the arc parameter; da/dt is constant on
    each arc.
    """
    x, w = _gauss(order)
    tot = 0.0
    for u, v in ((p, q), (q, r), (r, p)):
        u, v = _arr(u), _arr(v)
        da = v[0] - u[0]
        for k in range(pieces):
            t = (k + x) / pieces
            pts = geodesic_closed(u, v, t)
            tot += -np.sum(w / pieces * pts[:, 1]) * da
    return float(tot)


def triangle_area_interior(p, q, r, order: int = 24) -> float:
    """Area as a 2-d integral over F(u, v) = geodesic(p -> gamma_qr(v))(u)."""
    p = _arr(p)
    x, w = _gauss(order)
    h = 1e-6

    def F(u, v):
        end = geodesic_closed(q, r, v)
        return geodesic_closed(p, end, u)

    tot = 0.0
    for i, u in enumerate(x):
        for j, v in enumerate(x):
            fu = (F(u + h, v) - F(u - h, v)) / (2 * h)
            fv = (F(u, v + h) - F(u, v - h)) / (2 * h)
            tot += w[i] * w[j] * (fu[0] * fv[1] - fu[1] * fv[0])
    return float(tot)


# ---------------------------------------------------------------- phase, amplitude


def phase_vertices(x, y, z):
    t = fourth_point(x, y, z)
    a = symmetry(z, t)
    b = symmetry(y, a)
    return t, a, b


def phase_S(x, y, z, method: str = "closed"):
    """Symplectic area of the geodesic triangle (t, s_z t, s_y s_z t)."""
    t, a, b = phase_vertices(x, y, z)
    if method == "closed":
        return triangle_area_closed(t, a, b)
    if method == "stokes":
        return triangle_area(t, a, b)
    if method == "interior":
        return triangle_area_interior(t, a, b)
    raise ValueError(method)


def phase_S_linear(x, y, z):
    """2 [sinh(ay - az) lx + sinh(az - ax) ly + sinh(ax - ay) lz]."""
    x, y, z = _arr(x), _arr(y), _arr(z)
    ax, ay, az = x[..., 0], y[..., 0], z[..., 0]
    return 2 * (np.sinh(ay - az) * x[..., 1] + np.sinh(az - ax) * y[..., 1] + np.sinh(ax - ay) * z[..., 1])


DEGENERATE_AREA = 1e-12
_DEGENERATE_LIMIT: dict = {}


def _amplitude_limit() -> float:
    """Limit of the literal ratio along (x, x + eps u, x + eps v), computed once."""
    if "A" not in _DEGENERATE_LIMIT:
        x = np.array([0.3, -0.2])
        u, v = np.array([1.0, 0.4]), np.array([-0.3, 1.1])
        vals = []
        for eps in (1e-2, 5e-3):
            y, z = x + eps * u, x + eps * v
            vals.append(math.sqrt(abs(phase_S(x, y, z) / triangle_area_closed(x, y, z))))
        _DEGENERATE_LIMIT["A"] = (4 * vals[1] - vals[0]) / 3
    return _DEGENERATE_LIMIT["A"]


def amplitude_A(x, y, z) -> float:
    """Literal amplitude (|S| / |area(x, y, z)|)^(1/2).

    The ratio is negative in this orientation (the fourth-point triangle
    has the opposite orientation), hence the absolute values. Both areas
    below DEGENERATE_AREA fall back to the cached rescaling limit.
    """
    s = float(phase_S(x, y, z))
    ar = float(triangle_area_closed(x, y, z))
    if abs(s) < DEGENERATE_AREA and abs(ar) < DEGENERATE_AREA:
        return _amplitude_limit()
    if abs(ar) < DEGENERATE_AREA:
        raise ZeroDivisionError("degenerate base triangle with non-degenerate phase triangle")
    return math.sqrt(abs(s / ar))


def amplitude_A_literal_closed(x, y, z):
    """2 sqrt(prod cosh((a_i - a_j)/2)), equal to amplitude_A off the diagonal."""
    x, y, z = _arr(x), _arr(y), _arr(z)
    ax, ay, az = x[..., 0], y[..., 0], z[..., 0]
    return 2 * np.sqrt(np.cosh(0.5 * (ax - ay)) * np.cosh(0.5 * (ay - az)) * np.cosh(0.5 * (az - ax)))


def kernel_amplitude(x, y, z):
    """sqrt(cosh(ax - ay) cosh(ay - az) cosh(az - ax)) = sqrt(|det dPhi| / 16).

    Phi is the map (x, y, z) -> (t, s_z t, s_y s_z t) from the midpoint
    triple to the phase-triangle vertices.
    """
    x, y, z = _arr(x), _arr(y), _arr(z)
    ax, ay, az = x[..., 0], y[..., 0], z[..., 0]
    return np.sqrt(np.cosh(ax - ay) * np.cosh(ay - az) * np.cosh(az - ax))


def midpoint_vertex_jacobian(x, y, z, h: float = 1e-6) -> float:
    def phi(v):
        t, a, b = phase_vertices(v[0:2], v[2:4], v[4:6])
        return np.concatenate([t, a, b])

    v = np.concatenate([_arr(x), _arr(y), _arr(z)])
    return float(abs(np.linalg.det(fd.jacobian(phi, v, h))))


def kernel_normalisation(theta: float) -> float:
    return 1.0 / (math.pi * theta) ** 2


def kernel(x, y, z, theta: float, amplitude: str = "jacobian"):
    amp = kernel_amplitude(x, y, z) if amplitude == "jacobian" else amplitude_A_literal_closed(x, y, z)
    return kernel_normalisation(theta) * amp * np.exp(1j * phase_S_linear(x, y, z) / theta)


def separability_defect(theta_pts: int = 6, seed: int = 0) -> float:
    """How far S is from sigma(x,y) + sigma(y,z) + sigma(z,x) with sigma = S(., ., o).

    Measured for the report; any cyclic two-point decomposition would make
    S(x,y,z) - S(x,y,o) - S(y,z,o) - S(z,x,o) vanish.
    """
    rng = np.random.default_rng(seed)
    o = np.zeros(2)
    worst = 0.0
    for _ in range(theta_pts):
        x, y, z = rng.normal(size=(3, 2))
        d = phase_S_linear(x, y, z) - (phase_S_linear(x, y, o) + phase_S_linear(y, z, o) + phase_S_linear(z, x, o))
        worst = max(worst, abs(float(d)))
    return worst


# ------------------------------------------------------------- grids and products


class GridSupportError(ValueError):
    pass


def _composite_gl(cells: int, order: int, lo: float, hi: float):
    x, w = np.polynomial.legendre.leggauss(order)
    width = (hi - lo) / cells
    nodes = np.concatenate([lo + width * (k + 0.5 * (x + 1)) for k in range(cells)])
    return nodes, np.tile(0.5 * width * w, cells)


@dataclass(frozen=True)
class Grid:
    """Tensor composite Gauss-Legendre grid on [lo, hi] x [l_lo, l_hi].

    The l-axis defaults to the a-axis; a rectangular grid is used when the
    product has to be resolved beyond the default window.
    """

    cells: int = 6
    order: int = 4
    lo: float = -2.0
    hi: float = 2.0
    l_cells: int | None = None
    l_lo: float | None = None
    l_hi: float | None = None
    a_nodes: np.ndarray = field(init=False, repr=False, compare=False)
    a_weights: np.ndarray = field(init=False, repr=False, compare=False)
    l_nodes: np.ndarray = field(init=False, repr=False, compare=False)
    l_weights: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.l_cells is None:
            object.__setattr__(self, "l_cells", self.cells)
        if self.l_lo is None:
            object.__setattr__(self, "l_lo", self.lo)
        if self.l_hi is None:
            object.__setattr__(self, "l_hi", self.hi)
        an, aw = _composite_gl(self.cells, self.order, self.lo, self.hi)
        ln, lw = _composite_gl(self.l_cells, self.order, self.l_lo, self.l_hi)
        for k, v in (("a_nodes", an), ("a_weights", aw), ("l_nodes", ln), ("l_weights", lw)):
            object.__setattr__(self, k, v)

    @property
    def shape(self):
        return (len(self.a_nodes), len(self.l_nodes))

    @property
    def n(self) -> int:
        return len(self.a_nodes)

    @property
    def cell_width(self) -> float:
        return max((self.hi - self.lo) / self.cells, (self.l_hi - self.l_lo) / self.l_cells)

    def mesh(self):
        return np.meshgrid(self.a_nodes, self.l_nodes, indexing="ij")

    def points(self) -> np.ndarray:
        A, L = self.mesh()
        return np.stack([A, L], axis=-1)

    def refine(self) -> Grid:
        return Grid(self.cells * 2, self.order, self.lo, self.hi, self.l_cells * 2, self.l_lo, self.l_hi)

    def integrate(self, values) -> complex:
        return np.einsum("i,j,ij->", self.a_weights, self.l_weights, values)

    def sample(self, fn) -> SampledFunction:
        return SampledFunction(self, np.asarray(fn(self.points()), dtype=complex))

    def to_json(self) -> dict:
        return {"cells": self.cells, "order": self.order, "a_range": [self.lo, self.hi],
                "l_cells": self.l_cells, "l_range": [self.l_lo, self.l_hi], "shape": list(self.shape)}


@dataclass
class SampledFunction:
    grid: Grid
    values: np.ndarray

    def integral(self) -> complex:
        return self.grid.integrate(self.values)

    def sup(self) -> float:
        return float(np.max(np.abs(self.values)))

    def __mul__(self, other):
        if isinstance(other, SampledFunction):
            return SampledFunction(self.grid, self.values * other.values)
        return SampledFunction(self.grid, self.values * other)

    def __sub__(self, other):
        return SampledFunction(self.grid, self.values - other.values)

    def conj(self):
        return SampledFunction(self.grid, np.conj(self.values))


def bump(center=(0.0, 0.0), radius: float = 0.8, amplitude: float = 1.0):
    """Smooth compactly supported bump exp(1 - 1/(1 - r^2/R^2))."""
    c = np.asarray(center, dtype=float)

    def f(p):
        p = np.asarray(p, dtype=float)
        r2 = np.sum((p - c) ** 2, axis=-1) / radius**2
        out = np.zeros(r2.shape)
        m = r2 < 1
        out[m] = np.exp(1.0 - 1.0 / (1.0 - r2[m]))
        return amplitude * out

    return f


def gaussian(center=(0.0, 0.0), width: float = 0.3, amplitude: float = 1.0, phase=(0.0, 0.0)):
    c = np.asarray(center, dtype=float)
    k = np.asarray(phase, dtype=float)

    def f(p):
        p = np.asarray(p, dtype=float)
        d = p - c
        return amplitude * np.exp(-0.5 * np.sum(d * d, axis=-1) / width**2 + 1j * (d @ k))

    return f


def check_support(u: SampledFunction, rel: float = 1e-8) -> None:
    """Reject functions that do not vanish on the outer ring of cells."""
    o = u.grid.order
    v = np.abs(u.values)
    ring = np.concatenate([v[:o].ravel(), v[-o:].ravel(), v[:, :o].ravel(), v[:, -o:].ravel()])
    if ring.max(initial=0.0) > rel * max(v.max(), 1e-300):
        raise GridSupportError(f"function not supported inside the grid (edge/max = {ring.max() / v.max():.2e})")


def phase_per_cell(u: SampledFunction, v: SampledFunction, theta: float, rel: float = 1e-10) -> float:
    """Largest phase change of e^{iS/theta} across one cell in the l directions,
    over the effective supports of u and v."""
    g = u.grid
    au = g.a_nodes[np.any(np.abs(u.values) > rel * u.sup(), axis=1)]
    av = g.a_nodes[np.any(np.abs(v.values) > rel * v.sup(), axis=1)]
    if len(au) == 0 or len(av) == 0:
        return 0.0
    span = max(au.max() - av.min(), av.max() - au.min())
    return 2.0 / abs(theta) * math.sinh(span) * g.cell_width


def star_at(u, v, out_pts, theta: float, quad: Grid, amplitude: str = "jacobian") -> np.ndarray:
    """(u * v) at arbitrary points, integrating over the quadrature grid.

    u, v are callables or SampledFunctions on ``quad``. Uses the linearity
    of S in the l coordinates: the l_y and l_z sums become weighted Fourier
    sums, leaving an (a_y, a_z) double sum per output point. Cost O(N^3)
    per output a-value.
    """
    U = u.values if isinstance(u, SampledFunction) else np.asarray(u(quad.points()), dtype=complex)
    V = v.values if isinstance(v, SampledFunction) else np.asarray(v(quad.points()), dtype=complex)
    nodes, w = quad.a_nodes, quad.a_weights
    lnodes = quad.l_nodes
    Uw = U * quad.l_weights[None, :]
    Vw = V * quad.l_weights[None, :]
    out_pts = np.asarray(out_pts, dtype=float)
    shape = out_pts.shape[:-1]
    flat = out_pts.reshape(-1, 2)
    res = np.zeros(len(flat), dtype=complex)
    ay, az = nodes[:, None], nodes[None, :]
    sh_yz = np.sinh(ay - az)
    norm = kernel_normalisation(theta)
    for ax in np.unique(flat[:, 0]):
        sel = flat[:, 0] == ax
        k1 = 2.0 / theta * np.sinh(nodes - ax)  # multiplies l_y, indexed by a_z
        k2 = 2.0 / theta * np.sinh(ax - nodes)  # multiplies l_z, indexed by a_y
        # Uh[i, j] = sum_l w u(ay_i, l) e^{i k1_j l}; Vh[j, i] = sum_l w v(az_j, l) e^{i k2_i l}
        Uh = Uw @ np.exp(1j * np.outer(lnodes, k1))
        Vh = Vw @ np.exp(1j * np.outer(lnodes, k2))
        if amplitude == "jacobian":
            amp = np.sqrt(np.cosh(ax - ay) * np.cosh(ay - az) * np.cosh(az - ax))
        else:
            amp = 2 * np.sqrt(np.cosh(0.5 * (ax - ay)) * np.cosh(0.5 * (ay - az)) * np.cosh(0.5 * (az - ax)))
        M = (w[:, None] * w[None, :]) * amp * Uh * Vh.T
        lx = flat[sel, 1]
        ph = np.exp(1j * (2.0 / theta) * sh_yz[None, :, :] * lx[:, None, None])
        res[sel] = norm * np.einsum("kij,ij->k", ph, M)
    return res.reshape(shape)


def star_symsym(u: SampledFunction, v: SampledFunction, theta: float, amplitude: str = "jacobian", check: bool = True) -> SampledFunction:
    """Star product sampled on the common grid of u and v."""
    if u.grid != v.grid:
        raise ValueError("u and v must share a grid")
    if theta == 0:
        raise ValueError("theta must be non-zero")
    if check:
        check_support(u)
        check_support(v)
        ppc = phase_per_cell(u, v, theta)
        if ppc > math.pi * u.grid.order / 2:
            warnings.warn(f"quadrature resolution: phase varies by {ppc:.1f} rad per cell", RuntimeWarning, stacklevel=2)
    g = u.grid
    vals = star_at(u, v, g.points(), theta, g, amplitude)
    return SampledFunction(g, vals)


@dataclass(frozen=True)
class KernelTensor:
    """Dense K[x, y, z] on a (small) grid; immutable once built."""

    grid: Grid
    theta: float
    amplitude: str = "jacobian"
    K: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        P = self.grid.points().reshape(-1, 2)
        x = P[:, None, None, :]
        y = P[None, :, None, :]
        z = P[None, None, :, :]
        K = kernel(x, y, z, self.theta, self.amplitude)
        K.setflags(write=False)
        object.__setattr__(self, "K", K)

    def product(self, u: SampledFunction, v: SampledFunction) -> SampledFunction:
        w = np.outer(self.grid.a_weights, self.grid.l_weights).ravel()
        vals = np.einsum("xyz,y,z->x", self.K, u.values.ravel() * w, v.values.ravel() * w)
        return SampledFunction(self.grid, vals.reshape(u.values.shape))


def poisson_bracket_fn(u, v, h: float = 1e-4):
    """{u, v} = du/da dv/dl - du/dl dv/da as a callable."""

    def f(p):
        p = np.asarray(p, dtype=float)
        ea, el = np.array([h, 0.0]), np.array([0.0, h])
        ua = (u(p + ea) - u(p - ea)) / (2 * h)
        ul = (u(p + el) - u(p - el)) / (2 * h)
        va = (v(p + ea) - v(p - ea)) / (2 * h)
        vl = (v(p + el) - v(p - el)) / (2 * h)
        return ua * vl - ul * va

    return f


# ------------------------------------------------------------- verification


def trace_defect(u, v, theta: float, grid: Grid, out: Grid | None = None) -> float:
    """|int u*v - int uv| / |int uv|, with u*v integrated over ``out`` (default: the grid)."""
    U, V = grid.sample(u), grid.sample(v)
    ref = (U * V).integral()
    out = grid if out is None else out
    prod = star_at(U, V, out.points(), theta, grid)
    return float(abs(out.integrate(prod) - ref) / abs(ref))


def associativity_defect(u, v, w, theta: float, grid: Grid) -> float:
    """sup |(u*v)*w - u*(v*w)| / sup |u*(v*w)| with all products sampled on ``grid``."""
    U, V, W = grid.sample(u), grid.sample(v), grid.sample(w)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        left = star_symsym(star_symsym(U, V, theta), W, theta, check=False)
        right = star_symsym(U, star_symsym(V, W, theta), theta, check=False)
    return float(np.max(np.abs(left.values - right.values)) / np.max(np.abs(right.values)))


def refinement_study(defect, grid: Grid) -> dict:
    """defect(grid) and defect(grid.refine()) with the observed order log2(d0/d1)."""
    d0 = defect(grid)
    d1 = defect(grid.refine())
    order = math.log2(d0 / d1) if d0 > 0 and d1 > 0 else math.inf
    return {"coarse": d0, "fine": d1, "order": order, "decreasing": d1 < d0}


def commutator_ratio(u, v, pts, theta: float, quad: Grid) -> np.ndarray:
    """(u*v - v*u) / (theta {u, v}) at pts."""
    c = star_at(u, v, pts, theta, quad) - star_at(v, u, pts, theta, quad)
    return c / (theta * poisson_bracket_fn(u, v)(pts))


def symmetric_first_order(u, v, pts, theta: float, quad: Grid) -> np.ndarray:
    """((u*v + v*u)/2 - uv) / theta at pts; vanishes as theta -> 0."""
    s = 0.5 * (star_at(u, v, pts, theta, quad) + star_at(v, u, pts, theta, quad))
    return (s - u(pts) * v(pts)) / theta


def covariance_defect(u, v, phi, pts, theta: float, quad: Grid) -> float:
    """sup |(u o phi) * (v o phi) - (u * v) o phi| / sup |u * v| at pts."""
    uf = lambda p: u(phi(p))
    vf = lambda p: v(phi(p))
    lhs = star_at(uf, vf, pts, theta, quad)
    rhs = star_at(u, v, phi(np.asarray(pts)), theta, quad)
    return float(np.max(np.abs(lhs - rhs)) / np.max(np.abs(rhs)))


COMMUTATOR_CONSTANT = -1j  # (u*v - v*u)/theta -> COMMUTATOR_CONSTANT {u, v}
