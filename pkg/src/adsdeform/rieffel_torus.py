"""Rieffel deformation for the translation action of R^d on the torus.

On plane waves e_m(x) = exp(i m.x) the oscillatory integral

    (a * b)(x) = kappa_d  int int e^{i x.y} a(x + u) b(x + theta J y) du dy

(with u the translation of the first argument) collapses to a delta
function, and normalising so that e_0 is the unit gives

    e_m * e_n = exp(i theta m.J n) e_{m+n}.

So the convention constant is KAPPA = 1: u * v = exp(2 i theta) v * u for the
generators with J = [[0, 1], [-1, 0]].
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .poisson import abelian_poisson_modes

KAPPA = 1.0


@dataclass(frozen=True)
class DeformationMatrix:
    J: np.ndarray

    def __post_init__(self):
        j = np.asarray(self.J, dtype=float)
        if j.ndim != 2 or j.shape[0] != j.shape[1] or not np.array_equal(j.T, -j):
            raise ValueError("J must be a square antisymmetric matrix")
        object.__setattr__(self, "J", j)

    @property
    def d(self) -> int:
        return self.J.shape[0]

    def pair(self, m, n) -> float:
        return float(np.asarray(m, dtype=float) @ self.J @ np.asarray(n, dtype=float))

    @classmethod
    def standard(cls, d: int = 2) -> DeformationMatrix:
        j = np.zeros((d, d))
        for k in range(0, d - 1, 2):
            j[k, k + 1], j[k + 1, k] = 1.0, -1.0
        return cls(j)


@dataclass
class TrigPolynomial:
    """Finite sum  sum_m c_m exp(i m.x)."""

    coeffs: dict = field(default_factory=dict)

    def __post_init__(self):
        self.coeffs = {tuple(int(i) for i in k): complex(v) for k, v in self.coeffs.items() if v != 0}

    @classmethod
    def mode(cls, m, c=1.0) -> TrigPolynomial:
        return cls({tuple(m): c})

    @classmethod
    def one(cls, d: int) -> TrigPolynomial:
        return cls({(0,) * d: 1.0})

    def __add__(self, other):
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out.get(k, 0) + v
        return TrigPolynomial(out)

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, c) -> TrigPolynomial:
        return TrigPolynomial({k: c * v for k, v in self.coeffs.items()})

    def conj(self) -> TrigPolynomial:
        return TrigPolynomial({tuple(-i for i in k): np.conj(v) for k, v in self.coeffs.items()})

    def trace(self) -> complex:
        """Mode-0 coefficient (normalised Haar integral)."""
        if not self.coeffs:
            return 0j
        d = len(next(iter(self.coeffs)))
        return self.coeffs.get((0,) * d, 0j)

    def support(self) -> set:
        return set(self.coeffs)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape[:-1], dtype=complex)
        for k, v in self.coeffs.items():
            out = out + v * np.exp(1j * (x @ np.asarray(k, dtype=float)))
        return out

    def max_diff(self, other) -> float:
        keys = self.support() | other.support()
        return max((abs(self.coeffs.get(k, 0) - other.coeffs.get(k, 0)) for k in keys), default=0.0)

    def to_json(self):
        return [[list(k), [v.real, v.imag]] for k, v in sorted(self.coeffs.items())]

    @classmethod
    def from_json(cls, rows) -> TrigPolynomial:
        out = {}
        for k, v in rows:
            c = complex(v[0], v[1]) if isinstance(v, (list, tuple)) else complex(v)
            out[tuple(k)] = out.get(tuple(k), 0) + c
        return cls(out)


def mode_product(m, n, theta: float, J: DeformationMatrix):
    """(c, m + n) with e_m * e_n = c e_{m+n}."""
    c = complex(np.exp(1j * KAPPA * theta * J.pair(m, n)))
    return c, tuple(int(i + j) for i, j in zip(m, n))


def star_theta(a: TrigPolynomial, b: TrigPolynomial, theta: float, J: DeformationMatrix) -> TrigPolynomial:
    out: dict = {}
    for m, am in a.coeffs.items():
        for n, bn in b.coeffs.items():
            c, k = mode_product(m, n, theta, J)
            out[k] = out.get(k, 0) + c * am * bn
    return TrigPolynomial(out)


def commutator(a, b, theta, J) -> TrigPolynomial:
    return star_theta(a, b, theta, J) - star_theta(b, a, theta, J)


def poisson_bracket(a: TrigPolynomial, b: TrigPolynomial, J: DeformationMatrix) -> TrigPolynomial:
    return TrigPolynomial(abelian_poisson_modes(a.coeffs, b.coeffs, J.J))


def _regularised_factor(m: float, v: float, eps: float) -> complex:
    """int int e^{i u y} e^{i m u} e^{i v y} e^{-eps^2 (u^2 + y^2)/2} du dy."""
    L = 7.0 / eps
    h = math.pi * eps / 9.0
    g = np.linspace(-L, L, int(2 * L / h) + 1)
    w = np.exp(-0.5 * (eps * g) ** 2)
    tot = 0j
    for i in range(0, len(g), 400):
        y = g[i:i + 400, None]
        inner = (np.exp(1j * (y + m) * g[None, :]) * w[None, :]).sum(axis=1)
        tot += (inner * w[i:i + 400] * np.exp(1j * v * g[i:i + 400])).sum()
    return tot * (g[1] - g[0]) ** 2


def oscillatory_phase_oracle(m, n, theta: float, J: DeformationMatrix, eps=(0.2, 0.16, 0.13, 0.1)) -> complex:
    """Quadrature value of the unit-normalised plane-wave coefficient.

    With a = e_m, b = e_n the integrand is
    e^{i u.y} e^{i m.u} e^{i theta y.(J^T n)}, a product over coordinates
    of 2-d oscillatory integrals. Each is Gaussian-regularised, summed on a
    grid, divided by the m = n = 0 value (unit normalisation), and the
    log is extrapolated to eps -> 0 by a cubic fit in eps^2.
    """
    m = np.asarray(m, dtype=float)
    v = theta * (J.J.T @ np.asarray(n, dtype=float))
    eps = np.asarray(eps, dtype=float)
    logs = np.zeros(len(eps), dtype=complex)
    for k in range(J.d):
        if m[k] == 0 and v[k] == 0:
            continue
        r = np.array([_regularised_factor(m[k], v[k], e) / _regularised_factor(0.0, 0.0, e) for e in eps])
        logs += np.log(np.abs(r)) + 1j * np.unwrap(np.angle(r))
    re = np.polyfit(eps**2, logs.real, len(eps) - 1)[-1]
    im = np.polyfit(eps**2, logs.imag, len(eps) - 1)[-1]
    return complex(np.exp(re + 1j * im))


def first_order_check(a: TrigPolynomial, b: TrigPolynomial, J: DeformationMatrix, thetas=(1e-1, 1e-2, 1e-3, 1e-4), levels: int = 4):
    """Leading coefficient r of (a*b - b*a) = r theta {a, b} + O(theta^3).

    For each theta the commutator is sampled at theta / 2^j and the odd
    expansion is Richardson-extrapolated in theta^2; r is the least-squares
    ratio over all modes. Returns (r per theta, r at the smallest theta).
    """
    pb = poisson_bracket(a, b, J)
    if not pb.coeffs:
        return [0j for _ in thetas], 0j
    keys = sorted(pb.coeffs)
    ref = np.array([pb.coeffs[k] for k in keys])
    ratios = []
    for t in thetas:
        table = []
        for j in range(levels):
            h = t / 2**j
            c = commutator(a, b, h, J)
            table.append(np.array([c.coeffs.get(k, 0) for k in keys]) / h)
        for lev in range(1, levels):
            f = 4.0**lev
            table = [(f * table[i + 1] - table[i]) / (f - 1) for i in range(len(table) - 1)]
        lin = table[0]
        ratios.append(complex(np.vdot(ref, lin) / np.vdot(ref, ref)))
    return ratios, ratios[-1]
