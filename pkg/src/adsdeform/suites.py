"""Verification suites, one per acceptance criterion.

Each suite returns a list of Check records. A suite passes when every gating
check passes; non-gating checks are reported for context only.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .config import RunConfig


@dataclass
class Check:
    name: str
    value: float
    tol: float
    passed: bool
    gating: bool = True
    note: str = ""

    def to_dict(self) -> dict:
        return {"name": self.name, "value": self.value, "tol": self.tol, "passed": self.passed,
                "gating": self.gating, "note": self.note}


def below(name, value, tol, **kw) -> Check:
    return Check(name, float(value), float(tol), bool(value < tol) if tol > 0 else bool(value == 0), **kw)


def above(name, value, tol, **kw) -> Check:
    return Check(name, float(value), float(tol), bool(value > tol), **kw)


def _rng(cfg: RunConfig, k: int) -> np.random.Generator:
    return np.random.default_rng([cfg.seed, k])


# ---------------------------------------------------------------- 1 group


def suite_group(cfg: RunConfig) -> list[Check]:
    from .bhtz_geometry import (ModifiedIwasawa, RotParams, modified_iwasawa_compose, modified_iwasawa_decompose,
                                twisted_iwasawa_compose, twisted_iwasawa_decompose)
    from .lie_core import distance, iwasawa_compose, iwasawa_decompose, multiply, random_element, sigma

    rng = _rng(cfg, 1)
    tol = cfg.tolerances["group.roundtrip"]
    scale = lambda g: 1 + np.abs(g.as_array()).max()
    iw = tw = mi = 0.0
    for _ in range(cfg.n_group):
        g = random_element(rng)
        iw = max(iw, distance(iwasawa_compose(iwasawa_decompose(g)), g) / scale(g))
        x = random_element(rng)
        tw = max(tw, distance(twisted_iwasawa_compose(twisted_iwasawa_decompose(x)), x) / scale(x))
        p = RotParams(rng.uniform(-0.95, 0.95))
        f = ModifiedIwasawa(*rng.uniform(-3, 3, 3))
        back = modified_iwasawa_decompose(modified_iwasawa_compose(f, p), p)
        mi = max(mi, abs(back.a - f.a), abs(back.n - f.n), abs(back.k - f.k))
    inv = aut = 0.0
    stol = cfg.tolerances["group.sigma"]
    for _ in range(cfg.n_group):
        g, h = random_element(rng, 2), random_element(rng, 2)
        inv = max(inv, distance(sigma(sigma(g)), g))
        gh = multiply(g, h)
        aut = max(aut, distance(sigma(gh), multiply(sigma(g), sigma(h))) / scale(gh))
    return [below("iwasawa_roundtrip", iw, tol), below("twisted_iwasawa_roundtrip", tw, tol),
            below("modified_iwasawa_roundtrip", mi, tol), below("sigma_involution", inv, stol),
            below("sigma_automorphism", aut, stol)]


# ---------------------------------------------------------------- 2 metric


def suite_metric(cfg: RunConfig) -> list[Check]:
    from .bhtz_geometry import TwistedCoords, metric_matrix, metric_oracle

    rng = _rng(cfg, 2)
    rel = cross = exact_cross = 0.0
    e = np.eye(3)
    for _ in range(cfg.n_metric):
        tc = TwistedCoords(*rng.uniform(-2, 2, 3))
        g = metric_matrix(tc)
        o = np.array([[metric_oracle(tc, e[i], e[j]) for j in range(3)] for i in range(3)])
        rel = max(rel, abs(g[0, 0] - o[0, 0]) / abs(o[0, 0]),
                  np.max(np.abs(g[1:, 1:] - o[1:, 1:])) / np.max(np.abs(o[1:, 1:])))
        cross = max(cross, np.max(np.abs(o[0, 1:])))
        exact_cross = max(exact_cross, np.max(np.abs(g[0, 1:])))
    return [below("metric_block_relative", rel, cfg.tolerances["metric.relative"]),
            below("oracle_cross_terms", cross, cfg.tolerances["metric.cross"]),
            below("chart_cross_terms", exact_cross, 0.0)]


# ---------------------------------------------------------------- 3 causal


def suite_causal(cfg: RunConfig) -> list[Check]:
    from .bhtz_geometry import CausalClass, causal_character, in_horizon, in_singularity, spinless_pair
    from .lie_core import E, F, J_ELEMENT, a_element, center_element, exp_map, multiply, product, random_element

    rng = _rng(cfg, 3)
    xi = spinless_pair(cfg.mass)

    def on_s():
        m = int(rng.integers(-3, 4))
        an = product(a_element(rng.uniform(-3, 3)), exp_map((E if rng.random() < 0.5 else F) * rng.uniform(-3, 3)))
        return multiply(center_element(m), an)

    good = total = 0
    for i in range(cfg.n_causal):
        kind = i % 3
        x = random_element(rng, 3) if kind == 0 else on_s() if kind == 1 else multiply(J_ELEMENT, on_s())
        c = causal_character(xi, x)
        ok = True
        if in_singularity(x):
            ok &= c in (CausalClass.NULL_SET, CausalClass.FIXED_POINT)
        if in_horizon(x):
            ok &= c is CausalClass.SPACELIKE_REGION
        if kind == 1:
            ok &= in_singularity(x)
        if kind == 2:
            ok &= in_horizon(x)
        good += ok
        total += 1
    frac = good / total
    return [Check("lateral_class_coherence", frac, cfg.tolerances["causal.coherence"],
                  frac >= cfg.tolerances["causal.coherence"])]


# ---------------------------------------------------------------- 4 B-field


def bfield_scan(cfg: RunConfig, profile_name: str = "tanh") -> list[tuple]:
    from .bhtz_geometry import TwistedCoords
    from .poisson import BFieldProfile, DerivedBFieldProfile, bfield_check, calibrate

    rng = _rng(cfg, 4)
    prof = BFieldProfile() if profile_name == "tanh" else DerivedBFieldProfile()
    c = calibrate(prof)
    rows = []
    for a in np.linspace(*cfg.bfield_range, cfg.bfield_samples):
        tc = TwistedCoords(float(a), *rng.uniform(-2, 2, 2))
        rows.append((float(a), float(prof(a)), bfield_check(prof, tc, c)))
    return rows


def suite_bfield(cfg: RunConfig) -> list[Check]:
    tol = cfg.tolerances["bfield.residual"]
    tanh = max(r[2] for r in bfield_scan(cfg, "tanh"))
    derived = max(r[2] for r in bfield_scan(cfg, "derived"))
    return [below("tanh_profile_residual", tanh, tol),
            below("derived_profile_residual", derived, tol, gating=False, note="f' proportional to cosh^2")]


# ---------------------------------------------------------------- 5 torus


def suite_torus(cfg: RunConfig) -> list[Check]:
    from .rieffel_torus import KAPPA, DeformationMatrix, TrigPolynomial, first_order_check, poisson_bracket, star_theta

    rng = _rng(cfg, 5)
    Jr = DeformationMatrix(np.array([[0, 2, -1], [-2, 0, 3], [1, -3, 0]]))
    eps = np.finfo(float).eps
    ulps = cfg.tolerances["torus.exact_ulps"]
    worst = {"associativity": 0.0, "unit": 0.0, "involution": 0.0, "trace": 0.0}
    for _ in range(cfg.n_torus):
        m, n, p = (tuple(int(v) for v in rng.integers(-5, 6, 3)) for _ in range(3))
        th = float(rng.uniform(-2, 2))
        a, b, c = (TrigPolynomial.mode(x, complex(*rng.normal(size=2))) for x in (m, n, p))
        amp = abs(a.coeffs[m] * b.coeffs[n] * c.coeffs[p])
        arg = abs(Jr.pair(m, n)) + abs(Jr.pair(m, p)) + abs(Jr.pair(n, p))
        lhs = star_theta(star_theta(a, b, th, Jr), c, th, Jr)
        rhs = star_theta(a, star_theta(b, c, th, Jr), th, Jr)
        worst["associativity"] = max(worst["associativity"], lhs.max_diff(rhs) / (eps * (1 + abs(th) * arg) * (1 + amp)))
        one = TrigPolynomial.one(3)
        worst["unit"] = max(worst["unit"], star_theta(a, one, th, Jr).max_diff(a) / eps,
                            star_theta(one, a, th, Jr).max_diff(a) / eps)
        il = star_theta(a, b, th, Jr).conj()
        ir = star_theta(b.conj(), a.conj(), th, Jr)
        worst["involution"] = max(worst["involution"], il.max_diff(ir) / (eps * (1 + abs(a.coeffs[m] * b.coeffs[n]))))
        t1, t2 = star_theta(a, b, th, Jr).trace(), star_theta(b, a, th, Jr).trace()
        worst["trace"] = max(worst["trace"], abs(t1 - t2) / eps)
    checks = [below(f"{k}_in_ulps", v, ulps) for k, v in worst.items()]

    J2 = DeformationMatrix(np.array([[0, 1], [-1, 0]]))
    u, v = TrigPolynomial.mode((1, 0)), TrigPolynomial.mode((0, 1))
    qt = max(star_theta(u, v, th, J2).max_diff(star_theta(v, u, th, J2).scale(np.exp(2j * KAPPA * th)))
             for th in (0.1, 0.5, 1.7))
    checks.append(below("quantum_torus_relation_in_ulps", qt / eps, ulps))

    ratios = []
    while len(ratios) < 40:  # 10 pairs x 4 theta values
        pa = TrigPolynomial({tuple(int(v) for v in rng.integers(-3, 4, 2)): complex(*rng.normal(size=2)) for _ in range(4)})
        pb = TrigPolynomial({tuple(int(v) for v in rng.integers(-3, 4, 2)): complex(*rng.normal(size=2)) for _ in range(4)})
        if not poisson_bracket(pa, pb, J2).coeffs:
            continue
        r, _ = first_order_check(pa, pb, J2)
        ratios.extend(r)
    ratios = np.array(ratios)
    checks.append(below("first_order_ratio_spread", np.max(np.abs(ratios - ratios[0])), cfg.tolerances["torus.first_order"]))
    checks.append(below("first_order_ratio_vs_pinned", abs(ratios[0] - (-2j * KAPPA)), cfg.tolerances["torus.first_order"]))
    return checks


# ---------------------------------------------------------------- 6 symmetric space


def suite_symsym(cfg: RunConfig) -> list[Check]:
    from . import symsym_p11 as sp

    rng = _rng(cfg, 6)
    pts = rng.uniform(-1.5, 1.5, (200, 3, 2))
    model = 0.0
    for x, y, z in pts:
        rhs = sp.symmetry(sp.symmetry(x, y), z)
        model = max(model,
                    np.max(np.abs(sp.symmetry(x, sp.symmetry(x, y)) - y)) / (1 + np.max(np.abs(y))),
                    np.max(np.abs(sp.symmetry(x, x) - x)),
                    np.max(np.abs(sp.symmetry(x, sp.symmetry(y, sp.symmetry(x, z))) - rhs)) / (1 + np.max(np.abs(rhs))),
                    abs(np.linalg.det(sp.symmetry_jacobian(x, y)) - 1))
    tab = sp.transvection_bracket_table([0.3, 0.2])
    want = {("h", "e+"): {"h": 0, "e+": 1, "e-": 0}, ("h", "e-"): {"h": 0, "e+": 0, "e-": -1},
            ("e+", "e-"): {"h": 0, "e+": 0, "e-": 0}}
    table = max(abs(tab[k][n] - v) for k, row in want.items() for n, v in row.items())
    refl = fourth = inv = golden = 0.0
    for x, y, z in pts[:50]:
        t, u = rng.uniform(0.1, 0.9), rng.uniform(0, 0.1)
        c = sp.geodesic_closed(x, y, t)
        after = sp.geodesic_closed(x, y, t + u)
        refl = max(refl, np.max(np.abs(sp.symmetry(c, sp.geodesic_closed(x, y, t - u)) - after))
                   / (1 + np.max(np.abs(after))))
        fourth = max(fourth, np.max(np.abs(sp.fourth_point_newton(x, y, z) - sp.fourth_point(x, y, z))))
        w = rng.uniform(-1, 1, 2)
        sw = lambda p: sp.symmetry(w, p)
        s0 = sp.phase_S_linear(x, y, z)
        a0 = sp.amplitude_A(x, y, z)
        inv = max(inv, abs(sp.phase_S_linear(sw(x), sw(y), sw(z)) - s0) / (1 + abs(s0)),
                  abs(sp.amplitude_A(sw(x), sw(y), sw(z)) - a0) / a0)
    for x, y, z in pts[:5]:
        ref = sp.phase_S(x, y, z, "stokes")
        golden = max(golden, abs(sp.phase_S(x, y, z, "interior") - ref) / (1 + abs(ref)))
    return [below("model_axioms", model, cfg.tolerances["symsym.model"]),
            below("transvection_table", table, cfg.tolerances["symsym.table"]),
            below("geodesic_reflection", refl, cfg.tolerances["symsym.reflection"]),
            below("fourth_point_closed_vs_newton", fourth, cfg.tolerances["symsym.fourth_point"]),
            below("phase_amplitude_invariance", inv, cfg.tolerances["symsym.invariance"]),
            below("phase_dual_quadrature", golden, cfg.tolerances["symsym.invariance"])]


# ---------------------------------------------------------------- 7 star product


def suite_star(cfg: RunConfig) -> list[Check]:
    from . import symsym_p11 as sp

    U = sp.bump((0.0, 0.0), 0.8)
    V = sp.bump((0.3, -0.2), 0.8)
    W = sp.bump((-0.2, 0.25), 0.8)
    grid = cfg.grid()
    th = cfg.theta
    tr = sp.refinement_study(lambda g: sp.trace_defect(U, V, th, g), grid)
    asc = sp.refinement_study(lambda g: sp.associativity_defect(U, V, W, th, g), grid)
    pts = np.array([[0.1, 0.1], [0.2, -0.3], [-0.1, 0.2], [0.4, 0.0]])
    quad = sp.Grid(24, 8, -1.2, 1.5)
    r = sp.commutator_ratio(U, V, pts, 0.025, quad)
    s1 = np.max(np.abs(sp.symmetric_first_order(U, V, pts, 0.05, quad)))
    s2 = np.max(np.abs(sp.symmetric_first_order(U, V, pts, 0.025, quad)))
    return [
        below("trace_defect", tr["coarse"], cfg.tolerances["star.trace"]),
        above("trace_order", tr["order"], 1.0),
        below("associativity_defect", asc["coarse"], cfg.tolerances["star.associativity"]),
        above("associativity_order", asc["order"], 1.0),
        below("commutator_over_poisson_vs_pinned", np.max(np.abs(r - sp.COMMUTATOR_CONSTANT)),
              cfg.tolerances["star.commutator_constant"]),
        below("symmetric_first_order_ratio", s2 / s1, 0.6),
    ]


# ---------------------------------------------------------------- 8 UDF / BHTZ


def suite_udf(cfg: RunConfig) -> list[Check]:
    from . import udf_bhtz as ud
    from .lie_core import ANElement

    rng = _rng(cfg, 8)
    inv = 0.0
    for _ in range(50):
        r, g1, g2, g3 = (ANElement(*rng.uniform(-1.5, 1.5, 2)) for _ in range(4))
        k0 = ud.kernel_on_group(g1, g2, g3, cfg.theta)
        k1 = ud.kernel_on_group(r @ g1, r @ g2, r @ g3, cfg.theta)
        inv = max(inv, abs(k1 - k0) / abs(k0))

    act = ud.bhtz_raction("spinless", cfg.mass)
    sig = 0.35
    ga = lambda f, t, s: np.exp(-((t - 0.1) ** 2 + (s + 0.2) ** 2) / (2 * sig**2))
    gb = lambda f, t, s: np.exp(-((t + 0.2) ** 2 + (s - 0.1) ** 2) / (2 * sig**2)) * (1 + 0.3j * s)
    a, b = ud.chart_function(act, ga), ud.chart_function(act, gb)
    x = act.from_chart((0.3, 0), ANElement(0.2, -0.3))
    cov = ud.covariance_defect(a, b, x, ANElement(0.3, 0.2), cfg.theta, act)

    c = act.z_generator.t
    Ap = ud.SeparableFunction([(lambda f, t: 1.5 + np.cos(2 * np.pi * t / c), 0.0, 0.4)])
    Bp = ud.SeparableFunction([(lambda f, t: 1.5 + np.sin(2 * np.pi * t / c), 0.2, 0.4)])
    rx, fib = ANElement(0.2, -0.3), (0.3, 0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        p0 = ud.udf_product_separable(Ap, Bp, fib, rx, cfg.theta)
        p1 = ud.udf_product_separable(Ap, Bp, fib, act.z_generator @ rx, cfg.theta)
    zinv = abs(p1 - p0) / abs(p0)
    swap = ud.sigma_swap_defect(a, b, x, cfg.theta, act)
    return [below("kernel_left_invariance", inv, cfg.tolerances["udf.kernel_invariance"]),
            below("r_covariance", cov, cfg.tolerances["udf.covariance"]),
            below("z_invariance", zinv, cfg.tolerances["udf.z_invariance"]),
            below("sigma_swap", swap, cfg.tolerances["udf.sigma_swap"])]


# ---------------------------------------------------------------- 9 spectral


def _spectral_fields():
    def g3(c, s, v=None):
        c = np.asarray(c, dtype=float)
        if v is None:
            return lambda p: np.exp(-np.sum((np.asarray(p) - c) ** 2, -1) / (2 * s * s)) + 0j
        v = np.asarray(v, dtype=complex)
        return lambda p: np.exp(-np.sum((np.asarray(p) - c) ** 2, -1) / (2 * s * s))[..., None] * v

    f = g3((0.1, 0.1, -0.2), 0.35)
    g = g3((0.1, -0.2, 0.1), 0.35)
    psi = g3((0.1, 0.2, -0.1), 0.35, (1, 0.5j))
    pts = np.array([[0.1, 0.0, 0.0], [0.1, 0.2, -0.3], [0.0, -0.1, 0.2]])
    return f, g, psi, pts


def spectral_report(cfg: RunConfig, check: str) -> dict:
    from . import spinor_dirac as sd
    from .symsym_p11 import Grid

    f, g, psi, pts = _spectral_fields()
    grid = cfg.grid()
    if check == "derivation":
        vals = {k: sd.derivation_defect(X, f, g, pts, cfg.theta, grid) for k, X in sd.COMMUTING_FIELDS.items()}
        ctrl = {k: sd.derivation_defect(X, f, g, pts, cfg.theta, grid) for k, X in sd.NON_COMMUTING_FIELDS.items()}
        return {"commuting": vals, "non_commuting": ctrl, "grid": grid.to_json()}
    if check == "dirac":
        frame = sd.make_frame(cfg.mass)
        c = sd.dirac_commutator_defect(frame, f, psi, pts, cfg.theta, grid)
        fine = sd.dirac_commutator_defect(frame, f, psi, pts, cfg.theta, grid.refine())
        slope = math.log2(c["defect"] / fine["defect"]) if fine["defect"] > 0 else math.inf
        return {"coarse": c, "fine": fine, "slope": slope, "grid": grid.to_json(),
                "clifford_defect": sd.clifford_defect()}
    if check == "module":
        q = pts[:, 1:]
        quad = sd.SpinorSetup().quad
        M = np.array([[0.5, 1j], [0.2, -1]])
        gam = lambda p: f(p)[..., None, None] * M
        return {"associativity": sd.module_associativity_defect(psi, f, g, 0.1, q, cfg.theta, quad),
                "endo_compatibility": sd.endo_compatibility_defect(gam, psi, g, 0.1, q, cfg.theta, quad),
                "unit": sd.unit_defect(psi, pts[:2], cfg.theta),
                "grid": quad.to_json()}
    raise ValueError(f"unknown spectral check {check!r}")


def suite_spectral(cfg: RunConfig) -> list[Check]:
    from . import spinor_dirac as sd

    der = spectral_report(cfg, "derivation")
    dirac = spectral_report(cfg, "dirac")
    t = cfg.tolerances
    return [below("clifford_relations", sd.clifford_defect(), t["spectral.clifford"]),
            below("derivation_commuting_fields", max(der["commuting"].values()), t["spectral.derivation"]),
            above("derivation_negative_control", der["non_commuting"]["right_H"], t["spectral.negative_control"]),
            below("dirac_commutator", dirac["coarse"]["defect"], t["spectral.dirac"]),
            below("dirac_commutator_refined_ratio", dirac["fine"]["defect"] / dirac["coarse"]["defect"], 1.0)]


SUITES = {
    "group": suite_group,
    "metric": suite_metric,
    "causal": suite_causal,
    "bfield": suite_bfield,
    "torus": suite_torus,
    "symsym": suite_symsym,
    "star": suite_star,
    "udf": suite_udf,
    "spectral": suite_spectral,
}


def run_suites(cfg: RunConfig, names) -> dict:
    out = {}
    for n in names:
        checks = SUITES[n](cfg)
        out[n] = {"passed": all(c.passed for c in checks if c.gating), "checks": [c.to_dict() for c in checks]}
    return out
