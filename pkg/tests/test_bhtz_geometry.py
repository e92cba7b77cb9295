import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from adsdeform.bhtz_geometry import (
    CausalClass, KillingPair, ModifiedIwasawa, RotParams, TwistedCoords, an_distance,
    causal_character, component_id, coset_equal, coset_metric, extension_an_coordinate,
    extension_domain_membership, in_horizon, in_singularity, killing_vector_at,
    mass_momentum, metric_eval, metric_matrix, metric_oracle, modified_iwasawa_compose,
    modified_iwasawa_decompose, orbit_label, orbit_point, reference_point, rotating_pair,
    spinless_pair, taub_action, twisted_iwasawa_compose, twisted_iwasawa_decompose,
    z_action, z_action_spinless,
)
from adsdeform.lie_core import (
    E, F, H, H0, IDENTITY, J_ELEMENT, Ad, AlgebraVector, ANElement, GroupElement,
    a_element, center_element, distance, exp_map, inverse, k_element, killing_form,
    multiply, n_element, product, random_element, twisted_conjugate,
)

SPINLESS = spinless_pair(1.3)


def cond(*gs):
    return np.prod([np.linalg.norm(g.matrix()) for g in gs])


def test_mass_momentum_examples():
    m, j, gen = mass_momentum(KillingPair(H, H))
    assert j == 0 and gen
    assert not mass_momentum(KillingPair(H, E))[2]
    m, j, _ = mass_momentum(KillingPair(H, H * 0.5))
    assert m == pytest.approx(1.25, abs=1e-14) and j == pytest.approx(0.75, abs=1e-14)


def test_pair_constructors():
    m, j, gen = mass_momentum(SPINLESS)
    assert gen and j == pytest.approx(0) and m == pytest.approx(2 * 1.3)
    pair, p = rotating_pair(2.0, 0.5)
    m, j, gen = mass_momentum(pair)
    assert gen and m == pytest.approx(2.0) and j == pytest.approx(0.5)
    assert abs(p.alpha) < 1
    pair, _ = rotating_pair(2.0, -0.5)
    assert mass_momentum(pair)[1] == pytest.approx(-0.5)
    with pytest.raises(ValueError):
        RotParams(1.0)


def test_z_action(rng):
    with pytest.raises(ValueError):
        z_action(KillingPair(H, E), 1, IDENTITY)
    x = random_element(rng, 2)
    assert z_action(SPINLESS, 0, x) == x
    assert distance(z_action(SPINLESS, 3, IDENTITY), IDENTITY) < 1e-12
    pair, _ = rotating_pair(1.5, 0.4)
    for xi in (SPINLESS, pair):
        for _ in range(50):
            x = random_element(rng, 2)
            twice = z_action(xi, 1, z_action(xi, 1, x))
            assert distance(twice, z_action(xi, 2, x)) < 1e-9 * cond(x) ** 2
            assert distance(z_action(xi, -1, z_action(xi, 1, x)), x) < 1e-9 * cond(x) ** 2


def test_spinless_pair_matches_twisted_conjugation(rng):
    for _ in range(100):
        x = random_element(rng, 2)
        for n in (1, -2):
            a = z_action(SPINLESS, n, x)
            b = z_action_spinless(1.3, n, x)
            assert distance(a, b) < 1e-9 * cond(x) ** 2


def test_rotating_pair_matches_taub(rng):
    pair, p = rotating_pair(1.5, 0.4)
    r = ANElement(pair.xl.h, 0.0)  # exp(xl) = exp(xl.h H0)
    for _ in range(20):
        x = random_element(rng, 2)
        assert distance(z_action(pair, 1, x), taub_action(r, x, p)) < 1e-9 * cond(x) ** 2


def test_twisted_iwasawa(rng):
    tc = twisted_iwasawa_decompose(a_element(1.4))
    assert tc.a == pytest.approx(0.7) and coset_equal(tc.coset(), IDENTITY)
    worst = 0.0
    for _ in range(1000):
        x = random_element(rng)
        tc = twisted_iwasawa_decompose(x)
        worst = max(worst, distance(twisted_iwasawa_compose(tc), x) / (1 + np.abs(x.as_array()).max()))
    assert worst < 1e-8
    for _ in range(200):
        a0 = rng.uniform(-3, 3)
        g = multiply(random_element(rng, 3), a_element(rng.uniform(-1, 1)))
        tc = twisted_iwasawa_decompose(twisted_conjugate(g, a_element(2 * a0)))
        assert tc.a == pytest.approx(a0, abs=1e-8)
        assert coset_equal(tc.coset(), g, tol=1e-7)


def test_twisted_iwasawa_equivariance(rng):
    for _ in range(1000):
        x, g = random_element(rng, 2), random_element(rng, 2)
        t0 = twisted_iwasawa_decompose(x)
        t1 = twisted_iwasawa_decompose(twisted_conjugate(g, x))
        assert t1.a == pytest.approx(t0.a, abs=1e-7)
        assert coset_equal(t1.coset(), multiply(g, t0.coset()), tol=1e-6)


def test_killing_vector_examples():
    assert killing_vector_at(SPINLESS, IDENTITY).norm() < 1e-15
    v = killing_vector_at(SPINLESS, n_element(0.9))
    assert abs(v.h) < 1e-14 and abs(v.f) < 1e-14 and abs(v.e) > 0.1
    v = killing_vector_at(SPINLESS, J_ELEMENT)
    assert abs(v.e) < 1e-14 and abs(v.f) < 1e-14 and killing_form(v, v) > 0


def test_causal_examples():
    assert causal_character(SPINLESS, J_ELEMENT) is CausalClass.SPACELIKE_REGION
    assert causal_character(SPINLESS, IDENTITY) is CausalClass.FIXED_POINT
    for x in (product(a_element(0.4), n_element(-2.0)), n_element(3.0), center_element(2)):
        assert causal_character(SPINLESS, x) in (CausalClass.NULL_SET, CausalClass.FIXED_POINT)
    assert causal_character(SPINLESS, GroupElement(0.3, -5.0, 0.2)) is CausalClass.TIMELIKE_REGION


def test_singularity_horizon_examples():
    assert in_singularity(IDENTITY)
    assert in_horizon(J_ELEMENT)
    assert in_singularity(product(a_element(0.3), n_element(-1.7)))
    assert in_singularity(product(center_element(3), a_element(0.3), exp_map(F * 2.0)))
    assert not in_singularity(J_ELEMENT)
    assert not in_horizon(IDENTITY)


def _on_s(rng):
    m = int(rng.integers(-3, 4))
    an = product(a_element(rng.uniform(-3, 3)), exp_map((E if rng.random() < 0.5 else F) * rng.uniform(-3, 3)))
    return multiply(center_element(m), an)


def test_causal_coherence(rng):
    # 10^4 samples: generic points plus points built on S and H
    for i in range(10_000):
        kind = i % 3
        if kind == 0:
            x = random_element(rng, 3)
        elif kind == 1:
            x = _on_s(rng)
        else:
            x = multiply(J_ELEMENT, _on_s(rng))
        c = causal_character(SPINLESS, x)
        if in_singularity(x):
            assert c in (CausalClass.NULL_SET, CausalClass.FIXED_POINT), (x, c)
        if in_horizon(x):
            assert c is CausalClass.SPACELIKE_REGION, (x, c)
        if kind == 1:
            assert in_singularity(x)
        if kind == 2:
            assert in_horizon(x)


def test_spacelike_criterion_matches_matrix_entries(rng):
    # spacelike iff the off-diagonal entries of the projected matrix have opposite signs
    for _ in range(500):
        x = random_element(rng, 3)
        m = x.matrix()
        qr = m[0, 1] * m[1, 0]
        if abs(qr) < 1e-6:
            continue
        c = causal_character(SPINLESS, x)
        assert (c is CausalClass.SPACELIKE_REGION) == (qr < 0)


def test_component_id():
    assert component_id(SPINLESS, J_ELEMENT) == 0
    assert component_id(SPINLESS, reference_point(2)) == 2
    assert center_element(2).phi == pytest.approx(2 * math.pi)
    near = product(J_ELEMENT, a_element(0.05), n_element(-0.03))
    assert component_id(SPINLESS, near) == 0
    assert component_id(SPINLESS, GroupElement(-2.5, 0.4, 1.0)) == -1
    with pytest.raises(ValueError):
        component_id(SPINLESS, GroupElement(0.3, -5.0, 0.2))


def test_metric_examples():
    tc = TwistedCoords(0.7, 0.3, -0.4)
    assert metric_eval(tc, (1.3, 0, 0), (1.3, 0, 0)) == pytest.approx(1.69, abs=1e-14)
    t0 = TwistedCoords(0.0, 0.3, -0.4)
    v, w = (0, 0.4, 1.0), (0, -0.2, 0.5)
    assert metric_eval(t0, v, w) == pytest.approx(-0.25 * coset_metric(0.3, -0.4, v[1:], w[1:]))
    g = metric_matrix(tc)
    assert g[0, 1] == 0 and g[0, 2] == 0
    ev = np.linalg.eigvalsh(g)
    assert (ev > 0).sum() == 2 and (ev < 0).sum() == 1


def test_metric_against_bi_invariant_oracle(rng):
    for _ in range(100):
        tc = TwistedCoords(*rng.uniform(-2, 2, 3))
        v, w = rng.normal(size=3), rng.normal(size=3)
        ref = metric_oracle(tc, v, w)
        assert metric_eval(tc, v, w) == pytest.approx(ref, rel=1e-6, abs=1e-6)


def test_metric_twisted_invariance(rng):
    # tau_g is an isometry: the twisted chart metric at x and tau_g x agree on
    # pushed-forward vectors; checked with the oracle in matrix form
    for _ in range(20):
        x = random_element(rng, 1.5)
        g = random_element(rng, 1.5)
        y = twisted_conjugate(g, x)
        gm, sgi = g.matrix(), np.linalg.inv(np.diag([1, -1]) @ g.matrix() @ np.diag([1, -1]))
        X = rng.normal(size=(2, 2))
        X[1, 1] = -X[0, 0]
        dx = x.matrix() @ X
        dy = gm @ dx @ sgi
        b1 = 4 * np.trace(np.linalg.inv(x.matrix()) @ dx @ np.linalg.inv(x.matrix()) @ dx)
        b2 = 4 * np.trace(np.linalg.inv(y.matrix()) @ dy @ np.linalg.inv(y.matrix()) @ dy)
        assert b1 == pytest.approx(b2, rel=1e-8)


def test_modified_iwasawa_examples(rng):
    x = random_element(rng, 2)
    mi = modified_iwasawa_decompose(x, RotParams(0.0))
    assert distance(product(a_element(mi.a), n_element(mi.n), k_element(mi.k)), x) < 1e-9
    mi = modified_iwasawa_decompose(k_element(2.2), RotParams(0.4))
    assert abs(mi.a) < 1e-12 and abs(mi.n) < 1e-12 and mi.k == pytest.approx(2.2)


def test_modified_iwasawa_roundtrip(rng):
    for _ in range(1000):
        p = RotParams(rng.uniform(-0.95, 0.95))
        f = ModifiedIwasawa(*rng.uniform(-3, 3, 3))
        back = modified_iwasawa_decompose(modified_iwasawa_compose(f, p), p)
        assert max(abs(back.a - f.a), abs(back.n - f.n), abs(back.k - f.k)) < 1e-8
    for _ in range(300):
        p = RotParams(rng.uniform(-0.5, 0.5))
        x = random_element(rng, 2)
        mi = modified_iwasawa_decompose(x, p)
        assert distance(modified_iwasawa_compose(mi, p), x) < 1e-8


@given(st.floats(-0.999, 0.999), st.floats(-4, 4), st.floats(-4, 4), st.floats(-6, 6))
def test_modified_iwasawa_fuzz_converges(alpha, a, n, phi):
    # Newton with bracketing never diverges for |alpha| < 1
    p = RotParams(alpha)
    x = GroupElement(phi, n, a)
    mi = modified_iwasawa_decompose(x, p)
    assert math.isfinite(mi.a) and math.isfinite(mi.k)


def test_taub_action(rng):
    p = RotParams(-0.6)
    x = random_element(rng, 2)
    assert distance(taub_action(ANElement(), x, p), x) < 1e-14
    for _ in range(100):
        x = random_element(rng, 2)
        r1, r2 = ANElement(*rng.uniform(-1, 1, 2)), ANElement(*rng.uniform(-1, 1, 2))
        lhs = taub_action(r1, taub_action(r2, x, p), p)
        rhs = taub_action(r1 @ r2, x, p)
        assert distance(lhs, rhs) < 1e-9 * cond(x) ** 2
        k0 = modified_iwasawa_decompose(x, p).k
        mi = modified_iwasawa_decompose(taub_action(r1, x, p), p)
        assert mi.k == pytest.approx(k0, abs=1e-10)
        m0 = modified_iwasawa_decompose(x, p)
        assert mi.a == pytest.approx(m0.a + r1.t, abs=1e-8)


def test_twisted_a_constant_on_orbits(rng):
    for _ in range(100):
        x, g = random_element(rng, 2), random_element(rng, 2)
        assert twisted_iwasawa_decompose(twisted_conjugate(g, x)).a == pytest.approx(
            twisted_iwasawa_decompose(x).a, abs=1e-8)


def test_extension_domain(rng):
    pair, _ = rotating_pair(1.5, 0.4)
    for _ in range(20):
        assert extension_domain_membership(pair, random_element(rng)) == (True, 0)
    # boundary: coset k(0) gives beta(E, H) = 0
    assert extension_domain_membership(SPINLESS, a_element(0.8)) == (False, 0)
    xi = Ad(exp_map(F), H)
    assert orbit_label(xi) == int(np.sign(killing_form(E, xi))) == 1
    x = twisted_conjugate(exp_map(F), a_element(0.6))
    assert extension_domain_membership(SPINLESS, x) == (True, 1)
    x = twisted_conjugate(exp_map(F * -1.0), a_element(0.6))
    assert extension_domain_membership(SPINLESS, x) == (True, -1)


def test_z_action_preserves_extension_label(rng):
    for _ in range(200):
        x = random_element(rng, 2)
        inside, lab = extension_domain_membership(SPINLESS, x)
        if inside:
            assert extension_domain_membership(SPINLESS, z_action(SPINLESS, 1, x)) == (True, lab)


def test_properness_proxy(rng):
    disp = []
    for _ in range(500):
        x = random_element(rng, 2)
        if extension_domain_membership(SPINLESS, x)[0]:
            disp.append(an_distance(x, z_action(SPINLESS, 1, x)))
    assert len(disp) > 100
    assert min(disp) > 0.5 * math.sqrt(1.3 / 2)
