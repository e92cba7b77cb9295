import math

import numpy as np
import pytest

from adsdeform import fd
from adsdeform.bhtz_geometry import (
    TwistedCoords, metric_oracle, orbit_point, twisted_iwasawa_compose, twisted_iwasawa_decompose,
)
from adsdeform.lie_core import E, F, H, H0, Ad, AlgebraVector, bracket, killing_form, random_element, EF_SCALE
from adsdeform.poisson import (
    BFieldProfile, DerivedBFieldProfile, NotTangentError, abelian_poisson, abelian_poisson_modes,
    bfield_check, bfield_ratio, calibrate, kks_form, omega_eval, omega_exterior_derivative,
    omega_matrix, pushforward_twisted,
)


def test_kks_examples():
    v, w = bracket(E, H0), bracket(F, H0)
    assert kks_form(H0, v, v) == 0
    assert kks_form(H0, v, w) == pytest.approx(killing_form(H0, bracket(E, F)))
    assert kks_form(H0, v, w) == pytest.approx(EF_SCALE * killing_form(H0, H0))


def test_kks_invariance_and_well_defined(rng):
    for _ in range(50):
        g = random_element(rng, 1.5)
        xi = Ad(g, H)
        x, y = AlgebraVector(*rng.normal(size=3)), AlgebraVector(*rng.normal(size=3))
        v, w = bracket(x, xi), bracket(y, xi)
        val = kks_form(xi, v, w)
        assert val == pytest.approx(killing_form(xi, bracket(x, y)), abs=1e-8 * (1 + abs(val)))
        # stabiliser shift of the generators leaves the value unchanged
        shift = xi * rng.normal()
        assert killing_form(xi, bracket(x + shift, y - shift)) == pytest.approx(val, abs=1e-8 * (1 + abs(val)))
        h = random_element(rng, 1.0)
        moved = kks_form(Ad(h, xi), Ad(h, v), Ad(h, w))
        assert moved == pytest.approx(val, abs=1e-8 * (1 + abs(val)))


def test_kks_rejects_non_tangent():
    with pytest.raises(NotTangentError):
        kks_form(H0, H0, bracket(E, H0))


def test_omega_examples(rng):
    for _ in range(20):
        tc = TwistedCoords(*rng.uniform(-2, 2, 3))
        assert omega_eval(tc, (1.0, 0, 0), rng.normal(size=3)) == 0
        om = omega_matrix(tc)
        assert np.allclose(om, -om.T, atol=0)
        # restriction to a leaf is the KKS form on the orbit through the chart
        g = tc.coset()
        v, w = np.r_[0, rng.normal(size=2)], np.r_[0, rng.normal(size=2)]

        def xi_of(q):
            return orbit_point(TwistedCoords(tc.a, q[0], q[1]).coset()).as_array()

        dv = fd.directional(xi_of, [tc.phi, tc.nu], v[1:], 1e-5)
        dw = fd.directional(xi_of, [tc.phi, tc.nu], w[1:], 1e-5)
        ref = kks_form(orbit_point(g), AlgebraVector(*dv), AlgebraVector(*dw))
        assert omega_eval(tc, v, w) == pytest.approx(ref, rel=1e-6, abs=1e-8)


def test_omega_closed():
    for p in ([0.3, 0.2, 0.1], [-1.0, 2.0, -0.5], [2.0, -1.0, 1.5]):
        assert abs(omega_exterior_derivative(p, 1e-2)) < 1e-5


def test_omega_twisted_invariant(rng):
    for _ in range(100):
        tc = TwistedCoords(*rng.uniform(-1.5, 1.5, 3))
        g = random_element(rng, 1.0)
        v, w = rng.normal(size=3), rng.normal(size=3)
        t1, dv = pushforward_twisted(g, tc, v)
        _, dw = pushforward_twisted(g, tc, w)
        assert omega_eval(t1, dv, dw) == pytest.approx(omega_eval(tc, v, w), rel=1e-6, abs=1e-6)


def test_bfield_profile_examples():
    f = BFieldProfile(0.0)
    assert f(0.0) == 0
    assert f(20.0) == pytest.approx(1.0, abs=1e-8) and f(-20.0) == pytest.approx(-1.0, abs=1e-8)
    a = np.linspace(-20, 20, 401)
    assert np.all(np.diff(f(a)) >= 0)
    assert np.all(f.fprime(a) > 0)
    assert BFieldProfile(0.4)(0.0) == 0.4


def test_volume_over_leaf_form_oracle(rng):
    # independent oracle: volume from the FD bi-invariant metric, omega from
    # the KKS form of FD orbit tangents. Their ratio scales like cosh^2(a).
    def ratio(tc):
        e = np.eye(3)
        g = np.array([[metric_oracle(tc, e[i], e[j]) for j in range(3)] for i in range(3)])

        def xi_of(q):
            return orbit_point(TwistedCoords(tc.a, q[0], q[1]).coset()).as_array()

        d1 = AlgebraVector(*fd.directional(xi_of, [tc.phi, tc.nu], [1, 0], 1e-5))
        d2 = AlgebraVector(*fd.directional(xi_of, [tc.phi, tc.nu], [0, 1], 1e-5))
        return math.sqrt(abs(np.linalg.det(g))) / kks_form(orbit_point(tc.coset()), d1, d2)

    r0 = ratio(TwistedCoords(0.0, 0.4, -0.3))
    for a in (-2.5, -1.0, 0.7, 2.0):
        tc = TwistedCoords(a, *rng.uniform(-1, 1, 2))
        assert ratio(tc) / r0 == pytest.approx(math.cosh(a) ** 2, rel=1e-6)


def test_derived_profile_satisfies_bfield_condition(rng):
    prof = DerivedBFieldProfile(0.3)
    c = calibrate(prof)
    worst = max(bfield_check(prof, TwistedCoords(a, *rng.uniform(-2, 2, 2)), c) for a in np.linspace(-3, 3, 61))
    assert worst < 1e-4


def test_tanh_profile_calibration_point():
    prof = BFieldProfile()
    assert bfield_check(prof, TwistedCoords(0.0, 0.7, 0.2)) < 1e-10


def test_abelian_poisson_modes():
    J = np.array([[0.0, 1.3], [-1.3, 0.0]])
    m, n = (1, 2), (-3, 1)
    out = abelian_poisson_modes({m: 1.0}, {n: 1.0}, J)
    assert out == {(-2, 3): -(np.array(m) @ J @ np.array(n))}
    assert abelian_poisson_modes({m: 1.0}, {m: 1.0}, J) == {}
    assert abelian_poisson_modes({m: 1.0}, {n: 1.0}, np.zeros((2, 2))) == {}


def test_abelian_poisson_fd_matches_modes(rng):
    J = np.array([[0.0, 0.8], [-0.8, 0.0]])
    m, n = np.array([1, -2]), np.array([2, 1])
    a = lambda x: np.exp(1j * (m @ x))
    b = lambda x: np.exp(1j * (n @ x))
    fields = lambda p: np.eye(2)
    for _ in range(10):
        p = rng.uniform(-3, 3, 2)
        val = abelian_poisson(a, b, J, fields, p)
        ref = -(m @ J @ n) * np.exp(1j * ((m + n) @ p))
        assert abs(val - ref) < 1e-8


def test_abelian_poisson_leibniz_and_jacobi(rng):
    J = np.array([[0.0, 1.0], [-1.0, 0.0]])
    polys = [{tuple(rng.integers(-3, 4, 2)): complex(*rng.normal(size=2)) for _ in range(3)} for _ in range(3)]
    a, b, c = polys

    def br(x, y):
        return abelian_poisson_modes(x, y, J)

    def add(*ds):
        out = {}
        for d in ds:
            for k, v in d.items():
                out[k] = out.get(k, 0) + v
        return out

    jac = add(br(a, br(b, c)), br(b, br(c, a)), br(c, br(a, b)))
    assert max((abs(v) for v in jac.values()), default=0) < 1e-10
    anti = add(br(a, b), br(b, a))
    assert max((abs(v) for v in anti.values()), default=0) < 1e-12
