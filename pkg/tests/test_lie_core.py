import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from adsdeform.lie_core import (
    E, F, H, H0, IDENTITY, J_ELEMENT, Ad, AlgebraVector, ANElement, GroupElement,
    a_element, adjoint_matrix, bracket, center_element, distance, exp_map, from_matrix,
    inverse, is_central, iwasawa_compose, iwasawa_decompose, iwasawa_matrix,
    k_element, killing_form, killing_gram, log_map, multiply, n_element, random_element,
    sigma, sigma_algebra, twisted_conjugate, EF_SCALE,
)

coord = st.floats(-5, 5, allow_nan=False)
elements = st.builds(GroupElement, coord, coord, coord)
vectors = st.builds(AlgebraVector, coord, coord, coord)


def lifted_product_oracle(g, h, steps=400):
    # multiply the matrix paths g(t) h(t) and follow the K-angle continuously
    phi = 0.0
    for i in range(1, steps + 1):
        t = i / steps
        gt = GroupElement(t * g.phi, t * g.n, t * g.a).matrix()
        ht = GroupElement(t * h.phi, t * h.n, t * h.a).matrix()
        phi = from_matrix(gt @ ht, phi).phi
    return from_matrix(g.matrix() @ h.matrix(), phi)


def cond(*gs):
    return np.prod([np.linalg.norm(g.matrix()) for g in gs])


def test_bracket_relations():
    assert bracket(H0, E) == E
    assert bracket(H0, F) == -F
    assert bracket(E, F) == H0 * EF_SCALE
    for x in (H0, E, F):
        for y in (H0, E, F):
            m = x.matrix() @ y.matrix() - y.matrix() @ x.matrix()
            assert np.allclose(bracket(x, y).matrix(), m, atol=0)


def test_killing_examples():
    assert killing_form(E, E) == 0
    assert killing_form(H0, E) == 0
    assert killing_form(H0, H0) == 2
    assert killing_form(H, H) == pytest.approx(1.0, abs=1e-15)
    # adjoint-trace oracle
    for x in (H0, E, F, H0 + E * 0.3 - F * 2.0):
        for y in (H0, E, F):
            ad = np.trace(adjoint_matrix(x) @ adjoint_matrix(y))
            assert killing_form(x, y) == pytest.approx(ad, abs=1e-12)
            assert killing_form(x, y) == pytest.approx(4 * np.trace(x.matrix() @ y.matrix()), abs=1e-12)


def test_killing_signature():
    ev = np.linalg.eigvalsh(killing_gram())
    assert (ev > 0).sum() == 2 and (ev < 0).sum() == 1


@given(vectors, vectors, vectors)
def test_killing_ad_invariant(x, y, z):
    lhs = killing_form(bracket(z, x), y) + killing_form(x, bracket(z, y))
    assert abs(lhs) < 1e-12 * (1 + x.norm() * y.norm() * z.norm())


def test_multiply_examples():
    g = GroupElement(0.4, -1.2, 2.0)
    assert distance(multiply(IDENTITY, g), g) == 0
    assert distance(multiply(a_element(0.7), a_element(-1.9)), a_element(0.7 - 1.9)) < 1e-14
    assert distance(multiply(k_element(2 * math.pi), k_element(2 * math.pi)), k_element(4 * math.pi)) < 1e-12


def test_multiply_against_path_lift(rng):
    for _ in range(30):
        g, h = random_element(rng, 3), random_element(rng, 3)
        got = multiply(g, h)
        ref = lifted_product_oracle(g, h)
        assert distance(got, ref) < 1e-9 * cond(g, h) ** 2


@given(elements)
def test_matrix_projection(g):
    assert abs(np.linalg.det(g.matrix()) - 1) < 1e-12 * np.linalg.norm(g.matrix()) ** 2


def test_group_axioms(rng):
    worst_phi = worst_n = 0.0
    for _ in range(1000):
        g, h, k = (random_element(rng) for _ in range(3))
        lhs = multiply(multiply(g, h), k)
        rhs = multiply(g, multiply(h, k))
        worst_phi = max(worst_phi, abs(lhs.phi - rhs.phi), abs(lhs.a - rhs.a))
        # the n-coordinate is an entry ratio of matrices of size ~cond^2
        worst_n = max(worst_n, abs(lhs.n - rhs.n) / cond(g, h, k) ** 2)
        assert distance(multiply(g, inverse(g)), IDENTITY) < 1e-9 * cond(g) ** 2
    assert worst_phi < 1e-10
    assert worst_n < 1e-10


def test_center():
    z = center_element(2)
    assert np.allclose(center_element(1).matrix(), -np.eye(2), atol=1e-15)
    assert is_central(z) and not is_central(J_ELEMENT)
    rng = np.random.default_rng(1)
    for _ in range(200):
        g = random_element(rng)
        assert distance(multiply(z, g), multiply(g, z)) < 1e-10 * cond(g) ** 2


def test_exp_log():
    assert exp_map(AlgebraVector()) == IDENTITY
    assert distance(exp_map(H0 * 1.3), a_element(1.3)) < 1e-12
    for s in (0.3, 2.5, 7.0, -11.0):
        assert distance(exp_map((E - F) * s), k_element(s)) < 1e-10
    rng = np.random.default_rng(2)
    for _ in range(200):
        x = AlgebraVector(*rng.uniform(-0.57, 0.57, 3))
        if x.norm() >= 1:
            continue
        y = log_map(exp_map(x))
        assert (y - x).norm() < 1e-10


def test_log_domain_errors():
    with pytest.raises(ValueError):
        log_map(k_element(3.5))
    with pytest.raises(ValueError):
        log_map(GroupElement(math.pi * 0.99, 0.0, 3.0))


def test_iwasawa(rng):
    assert iwasawa_decompose(IDENTITY).k == 0
    f = iwasawa_decompose(n_element(0.8))
    assert (f.k, f.n, f.a) == (0.0, 0.8, 0.0)
    for _ in range(1000):
        g = random_element(rng)
        assert distance(iwasawa_compose(iwasawa_decompose(g)), g) < 1e-10 * cond(g) ** 2
    # QR oracle on the projected matrix
    for _ in range(50):
        g = random_element(rng, 2)
        q, r = np.linalg.qr(g.matrix())
        s = np.sign(np.diag(r))
        q, r = q * s, (r.T * s).T
        f = iwasawa_matrix(g.matrix())
        assert abs(2 * math.log(r[0, 0]) - f.a) < 1e-10
        assert abs(math.atan2(-q[1, 0], q[0, 0]) - f.k) < 1e-10


def test_sigma(rng):
    d = np.diag([1.0, -1.0])
    assert sigma(a_element(0.9)) == a_element(0.9)
    assert sigma(n_element(0.5)) == n_element(-0.5)
    for _ in range(1000):
        g, h = random_element(rng), random_element(rng)
        assert sigma(sigma(g)) == g
        assert distance(sigma(multiply(g, h)), multiply(sigma(g), sigma(h))) < 1e-9 * cond(g, h) ** 2
    g = random_element(rng, 2)
    assert np.allclose(sigma(g).matrix(), d @ g.matrix() @ d, atol=1e-12)
    x = AlgebraVector(0.3, -1.0, 2.0)
    assert np.allclose(sigma_algebra(x).matrix(), d @ x.matrix() @ d)


def test_twisted_conjugation(rng):
    x = random_element(rng, 2)
    assert distance(twisted_conjugate(IDENTITY, x), x) < 1e-12
    for _ in range(100):
        g, h, x = (random_element(rng, 2) for _ in range(3))
        lhs = twisted_conjugate(multiply(g, h), x)
        rhs = twisted_conjugate(g, twisted_conjugate(h, x))
        assert distance(lhs, rhs) < 1e-9 * cond(g, h, x) ** 2
    a = a_element(0.8)
    x = random_element(rng, 2)
    ref = multiply(multiply(a, x), a_element(-0.8))
    assert distance(twisted_conjugate(a, x), ref) < 1e-12


def test_ad_matches_exp():
    # Ad(exp(-sE)) H0 = H0 + sE
    s = 0.7
    assert (Ad(n_element(-s), H0) - (H0 + E * s)).norm() < 1e-14
    assert (Ad(J_ELEMENT.matrix().T, H0) + H0).norm() < 1e-14


def test_an_element_group_law(rng):
    for _ in range(100):
        r1, r2 = ANElement(*rng.uniform(-2, 2, 2)), ANElement(*rng.uniform(-2, 2, 2))
        m = (r1 @ r2).matrix()
        assert np.allclose(m, r1.matrix() @ r2.matrix(), atol=1e-12)
        assert np.allclose((r1 @ r1.inverse()).matrix(), np.eye(2), atol=1e-12)
        assert distance(multiply(r1.to_group(), r2.to_group()), (r1 @ r2).to_group()) < 1e-12
    r = ANElement(0.4, -1.1)
    back = ANElement.from_group(r.to_group())
    assert abs(back.t - r.t) < 1e-15 and abs(back.s - r.s) < 1e-15
    assert np.allclose(r.matrix(), (exp_map(H0 * r.t).matrix() @ exp_map(E * r.s).matrix()))
