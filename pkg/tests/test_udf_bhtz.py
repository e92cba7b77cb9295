import math

import numpy as np
import pytest

from adsdeform import udf_bhtz as ud
from adsdeform.lie_core import ANElement, sigma
from adsdeform.symsym_p11 import Grid, bump, star_at, symmetry

SIG = 0.35


def gauss_chart(t0, s0, twist=0.0):
    return lambda fiber, t, s: np.exp(-((t - t0) ** 2 + (s - s0) ** 2) / (2 * SIG**2)) * (1 + 1j * twist * s)


def random_an(rng, scale=1.0):
    t, s = rng.uniform(-scale, scale, 2)
    return ANElement(t, s)


# ---------------------------------------------------------------- R <-> M


def test_orbit_identification(rng):
    samples = [random_an(rng, 2.0) for _ in range(50)]
    assert ud.IDENT.check(samples) < 1e-12
    assert np.allclose(ud.IDENT.to_point(ANElement()), [0.0, 0.0])
    other = ud.OrbitIdentification((0.4, -0.7))
    assert other.check(samples) < 1e-12


def test_rho_is_homomorphism(rng):
    for _ in range(20):
        r1, r2, p = random_an(rng), random_an(rng), rng.uniform(-1, 1, 2)
        assert np.allclose(ud.rho(r1, ud.rho(r2, p)), ud.rho(r1 @ r2, p), atol=1e-12)


def test_rho_is_product_of_symmetries(rng):
    for _ in range(20):
        r, p = random_an(rng), rng.uniform(-1, 1, 2)
        x, y = ud.symmetry_pair(r)
        assert np.allclose(symmetry(x, symmetry(y, p)), ud.rho(r, p), atol=1e-10)


def test_left_haar(rng):
    for _ in range(20):
        r, g = random_an(rng, 2), random_an(rng, 2)
        assert ud.haar_left_invariance_defect(r, g) < 1e-8
    # the right Haar density is not left invariant
    assert ud.right_haar_density(ANElement(1.0, 0)) != ud.right_haar_density(ANElement(0.0, 0))


def test_omega_left_invariant(rng):
    for _ in range(20):
        assert ud.omega_left_invariance_defect(random_an(rng), random_an(rng)) < 1e-6


def test_kernel_left_invariant(rng):
    for _ in range(50):
        r, g1, g2, g3 = (random_an(rng, 1.5) for _ in range(4))
        k0 = ud.kernel_on_group(g1, g2, g3, 0.8)
        k1 = ud.kernel_on_group(r @ g1, r @ g2, r @ g3, 0.8)
        assert abs(k1 - k0) < 1e-6 * abs(k0)


def test_kernel_diagonal():
    g = ANElement(0.3, -0.4)
    theta = 0.7
    assert abs(ud.kernel_on_group(g, g, g, theta) - 1 / (math.pi * theta) ** 2) < 1e-12
    lit = ud.kernel_on_group(g, g, g, theta, amplitude="literal")
    assert abs(lit - 2 / (math.pi * theta) ** 2) < 1e-12


def test_group_product_matches_M_product():
    u, v = bump((0, 0), 0.8), bump((0.3, -0.2), 0.8)
    quad = Grid(3, 4, -1.2, 1.2)
    uR = lambda g: u(ud.IDENT.to_point(g))
    vR = lambda g: v(ud.IDENT.to_point(g))
    for g in (ANElement(0.1, 0.2), ANElement(-0.3, 0.0)):
        lhs = ud.group_product_dense(uR, vR, g, 1.0, quad)
        rhs = star_at(u, v, ud.IDENT.to_point(g)[None, :], 1.0, quad)[0]
        assert abs(lhs - rhs) < 1e-8 * max(1.0, abs(rhs))


# ---------------------------------------------------------------- actions


@pytest.fixture(params=["spinless", "rotating"])
def action(request):
    if request.param == "spinless":
        return ud.bhtz_raction("spinless", 2.0)
    return ud.bhtz_raction("rotating", 2.0, 1.0)


def fiber_for(action):
    return (0.3, 0) if action.kind == "spinless" else 0.4


def test_action_axiom_and_chart(action, rng):
    fib = fiber_for(action)
    for _ in range(10):
        r0, r1, r2 = random_an(rng), random_an(rng), random_an(rng)
        x = action.from_chart(fib, r0)
        assert action.check_action_axiom(r1, r2, x) < 1e-10
        f2, r = action.chart(action.act(r1, x))
        want = r1 @ r0
        assert abs(r.t - want.t) < 1e-8 and abs(r.s - want.s) < 1e-8
        if action.kind == "rotating":
            assert abs(f2 - fib) < 1e-8  # k-fiber preserved
        else:
            assert abs(f2[0] - fib[0]) < 1e-8 and f2[1] == fib[1]


def test_trivial_stabilizers(action, rng):
    fib = fiber_for(action)
    for _ in range(5):
        assert action.stabilizer_defect(action.from_chart(fib, random_an(rng))) > 1e-3


def test_z_inside_r(action, rng):
    fib = fiber_for(action)
    for n in (-2, 1, 3):
        x = action.from_chart(fib, random_an(rng))
        assert action.check_z_in_r(n, x) < 1e-8


def test_alpha_at_identity(action):
    a = ud.chart_function(action, gauss_chart(0.1, -0.2))
    x = action.from_chart(fiber_for(action), ANElement(0.2, -0.3))
    F = ud.pullback_on_group(a, x, action, Grid(1, 1, -1e-9, 1e-9))
    assert abs(F[0, 0] - a(x)) < 1e-8


# ---------------------------------------------------------------- products


def test_product_equals_inverted_group_product():
    act = ud.bhtz_raction("spinless", 2.0)
    a = ud.chart_function(act, gauss_chart(0.1, -0.2))
    b = ud.chart_function(act, gauss_chart(-0.2, 0.1, 0.3))
    fib = (0.3, 0)
    quad = Grid(8, 6, -1.6, 1.6, 12, -2.4, 2.4)
    q = np.array([0.1, 0.2])
    via_group = ud.orbit_product_inverted(a, b, fib, 1.0, act, quad, q[None, :])[0]
    x = act.from_chart(fib, ANElement(*q).inverse())
    direct = ud.udf_product(a, b, x, 1.0, act, Grid(16, 4, -4, 4), warn=False)
    assert abs(via_group - direct) < 1e-3 * abs(direct)


def test_product_commutes_with_right_chart_translations():
    act = ud.bhtz_raction("spinless", 2.0)
    q = ANElement(0.3, 0.25)

    def right(fn):
        def f(fib, t, s):
            r = ANElement(t, s) @ q
            return fn(fib, r.t, r.s)

        return f

    ga, gb = gauss_chart(0.1, -0.2), gauss_chart(-0.2, 0.1, 0.5)
    a, b = ud.chart_function(act, ga), ud.chart_function(act, gb)
    aq, bq = ud.chart_function(act, right(ga)), ud.chart_function(act, right(gb))
    rx, fib = ANElement(0.2, -0.3), (0.3, 0)
    lhs = ud.udf_product(aq, bq, act.from_chart(fib, rx), 1.0, act, warn=False)
    rhs = ud.udf_product(a, b, act.from_chart(fib, rx @ q), 1.0, act, warn=False)
    assert abs(lhs - rhs) < 1e-12 * abs(rhs)


def test_spinless_and_rotating_agree_in_chart():
    s = ud.bhtz_raction("spinless", 2.0)
    r = ud.bhtz_raction("rotating", 2.0, 1.0)
    vals = []
    for act, fib in ((s, (0.3, 0)), (r, 0.4)):
        a = ud.chart_function(act, gauss_chart(0.1, -0.2))
        b = ud.chart_function(act, gauss_chart(-0.2, 0.1, 0.5))
        vals.append(ud.udf_product(a, b, act.from_chart(fib, ANElement(0.2, -0.3)), 1.0, act, warn=False))
    assert abs(vals[0] - vals[1]) < 1e-8


def test_window_warning():
    act = ud.bhtz_raction("spinless", 2.0)
    wide = ud.chart_function(act, lambda f, t, s: np.exp(-(t * t + s * s) / 8))
    x = act.from_chart((0.3, 0), ANElement())
    with pytest.warns(ud.QuadratureWindowWarning):
        ud.udf_product(wide, wide, x, 1.0, act)


def test_separable_path_matches_grid_path():
    act = ud.bhtz_raction("spinless", 8.0)
    A = ud.SeparableFunction([(lambda f, t: np.exp(-(t - 0.1) ** 2 / (2 * SIG**2)), -0.2, SIG)])
    B = ud.SeparableFunction([(lambda f, t: np.exp(-(t + 0.2) ** 2 / (2 * SIG**2)), 0.1, SIG)])
    rx, fib = ANElement(0.2, -0.3), (0.3, 0)
    grid = ud.udf_product(A.on(act), B.on(act), act.from_chart(fib, rx), 1.0, act, Grid(16, 4, -4, 4), warn=False)
    sep = ud.udf_product_separable(A, B, fib, rx, 1.0)
    assert abs(grid - sep) < 1e-5 * abs(sep)


def test_trace_with_right_haar():
    act = ud.bhtz_raction("spinless", 2.0)
    a = ud.chart_function(act, lambda f, t, s: np.exp(-((t - 0.1) ** 2 + (s + 0.2) ** 2) / (2 * 0.3**2)))
    b = ud.chart_function(act, lambda f, t, s: np.exp(-((t + 0.2) ** 2 + (s - 0.1) ** 2) / (2 * 0.3**2)) * (1 + 0.3j * s))
    res = ud.orbit_trace(a, b, (0.3, 0), 1.0, act, Grid(8, 6, -1.6, 1.6, 12, -2.4, 2.4), Grid(10, 6, -3, 3, 16, -8, 8))
    assert res["right"] < 1e-3
    # the R-invariant (left Haar) measure does not give a trace
    assert res["left"] > 0.1


def test_sigma_swap(rng):
    act = ud.bhtz_raction("spinless", 2.0)
    assert ud.sigma_swap(act).label == -1
    a = ud.chart_function(act, gauss_chart(0.1, -0.2))
    b = ud.chart_function(act, gauss_chart(-0.2, 0.1, 0.3))
    x = act.from_chart((0.3, 0), ANElement(0.2, -0.3))
    assert ud.sigma_swap_defect(a, b, x, 1.0, act) < 1e-10
    # sigma reverses the order: without the swap the products differ
    other = ud.sigma_swap(act)
    same = ud.udf_product(lambda y: a(sigma(y)), lambda y: b(sigma(y)), sigma(x), 1.0, other, warn=False)
    assert abs(same - ud.udf_product(a, b, x, 1.0, act, warn=False)) > 1e-2 * abs(same)
