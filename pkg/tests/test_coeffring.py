import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from laplace_toda.coeffring.bipoly import BivariatePolynomial as BP, poly_det, univariate
from laplace_toda.coeffring.fourier import (
    PeriodicFunction, pf_eval, pf_mul, pf_derivative, pf_mean_integral,
    pf_reciprocal, pf_log_derivative, winding_number, nth_root)
from laplace_toda.errors import NearVanishing

from oracles import as_dict, central_diff, fourier_sum, leibniz_det

T = 2.5


def random_pf(rng, degree, period=T, scale=1.0):
    c = scale * (rng.standard_normal(2 * degree + 1) + 1j * rng.standard_normal(2 * degree + 1))
    return PeriodicFunction(c, period)


coeff_lists = st.lists(st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False),
                       min_size=1, max_size=7).filter(lambda c: len(c) % 2 == 1)


# evaluation

def test_constant_evaluates_to_value():
    assert pf_eval(PeriodicFunction.constant(1.0, T), 0.37) == pytest.approx(1.0)


def test_cosine_at_zero():
    f = PeriodicFunction([0.5, 0, 0.5], T)
    assert pf_eval(f, 0.0) == pytest.approx(1.0, abs=1e-15)


def test_eval_matches_direct_sum():
    rng = np.random.default_rng(1)
    f = random_pf(rng, 5)
    for y in rng.uniform(-3, 3, 20):
        assert abs(pf_eval(f, y) - fourier_sum(f.coeffs, T, y)) < 1e-14 * max(1, np.abs(f.coeffs).sum())


@given(coeff_lists, st.floats(-10, 10))
def test_eval_is_periodic(c, y):
    f = PeriodicFunction(c, T)
    assert abs(f(y) - f(y + T)) < 1e-9 * (1 + np.abs(c).sum())


# calculus

def test_derivative_of_constant_is_zero():
    assert pf_derivative(PeriodicFunction.constant(3.0, T)).sup_norm() == 0


def test_integral_of_cosine_is_zero():
    assert abs(pf_mean_integral(PeriodicFunction([0.5, 0, 0.5], T))) < 1e-15


def test_derivative_keeps_degree():
    f = PeriodicFunction([1, 2, 3, 4, 5], T)
    assert pf_derivative(f).degree == 2


def test_derivative_matches_finite_difference():
    f = random_pf(np.random.default_rng(2), 3)
    for y in (0.1, 0.9, 2.0):
        assert abs(pf_derivative(f)(y) - central_diff(f, y)) < 1e-6


def test_product_degree_adds():
    rng = np.random.default_rng(3)
    f, g = random_pf(rng, 2), random_pf(rng, 3)
    assert pf_mul(f, g).degree == 5


def test_product_matches_pointwise():
    rng = np.random.default_rng(4)
    f, g = random_pf(rng, 2), random_pf(rng, 2)
    y = rng.uniform(0, T, 50)
    assert np.max(np.abs(pf_mul(f, g)(y) - f(y) * g(y))) < 1e-12


@given(coeff_lists, coeff_lists, st.lists(st.floats(0, T), min_size=1, max_size=50))
def test_product_is_pointwise_property(cf, cg, ys):
    f, g = PeriodicFunction(cf, T), PeriodicFunction(cg, T)
    y = np.array(ys)
    scale = (1 + np.abs(cf).sum()) * (1 + np.abs(cg).sum())
    assert np.max(np.abs(pf_mul(f, g)(y) - f(y) * g(y))) < 1e-12 * scale


# nonlinear fits

def test_reciprocal_of_two():
    r = pf_reciprocal(PeriodicFunction.constant(2.0, T))
    assert r.sup_distance(PeriodicFunction.constant(0.5, T)) < 1e-12


def test_log_derivative_matches_finite_difference():
    f = PeriodicFunction.fit(lambda y: np.exp(np.cos(2 * np.pi * y / T)), T)
    ld = pf_log_derivative(f)
    for y in np.linspace(0, T, 7):
        expect = central_diff(lambda x: np.log(np.exp(np.cos(2 * np.pi * x / T))), y)
        assert abs(ld(y) - expect) < 1e-8


def test_reciprocal_rejects_zero_on_grid():
    f = PeriodicFunction([-0.5, 1, -0.5], T)        # 1 - cos vanishes at the node y = 0
    with pytest.raises(NearVanishing):
        pf_reciprocal(f)


@given(st.integers(0, 10**6))
def test_reciprocal_inverts_property(seed):
    rng = np.random.default_rng(seed)
    f = random_pf(rng, 3, scale=0.1) + 2.0
    prod = pf_mul(pf_reciprocal(f), f)
    y = np.linspace(0, T, 257)
    assert np.max(np.abs(prod(y) - 1)) < 1e-9


def test_winding_and_root():
    z = PeriodicFunction([0, 0, 1], T)              # e^{2 pi i y / T}, winding 1
    assert winding_number(z) == 1
    sq = nth_root(PeriodicFunction([0, 0, 0, 0, 1], T), 2)
    y = np.linspace(0, T, 33)
    assert np.max(np.abs(sq(y) ** 2 - np.exp(4j * np.pi * y / T))) < 1e-9


# polynomial determinants

def test_det_identity():
    one, zero = BP.constant(1), BP.constant(0)
    m = [[one if i == j else zero for j in range(3)] for i in range(3)]
    assert poly_det(m) == BP.constant(1)


def test_det_diagonal():
    nu, mu = BP.nu(), BP.mu()
    zero = BP.constant(0)
    m = [[nu, zero, zero], [zero, mu, zero], [zero, zero, nu + mu]]
    assert poly_det(m) == nu * mu * (nu + mu)


def random_linear(rng):
    return BP({(0, 0): Fraction(rng.randint(-5, 5), rng.randint(1, 4)),
               (1, 0): Fraction(rng.randint(-5, 5), rng.randint(1, 4)),
               (0, 1): Fraction(rng.randint(-5, 5), rng.randint(1, 4))})


def test_det_matches_leibniz_4x4():
    rng = random.Random(5)
    for _ in range(5):
        m = [[random_linear(rng) for _ in range(4)] for _ in range(4)]
        assert as_dict(poly_det(m)) == leibniz_det([[as_dict(e) for e in row] for row in m])


@given(st.integers(0, 10**6), st.integers(1, 3), st.integers(1, 3))
def test_det_multiplicative_on_blocks(seed, n1, n2):
    rng = random.Random(seed)
    m1 = [[random_linear(rng) for _ in range(n1)] for _ in range(n1)]
    m2 = [[random_linear(rng) for _ in range(n2)] for _ in range(n2)]
    zero = BP.constant(0)
    big = [row + [zero] * n2 for row in m1] + [[zero] * n1 + row for row in m2]
    assert poly_det(big) == poly_det(m1) * poly_det(m2)


def test_rational_inverse_pairs():
    rng = random.Random(6)
    for _ in range(1000):
        a, b = rng.randint(1, 10**6) * rng.choice((-1, 1)), rng.randint(1, 10**6)
        assert Fraction(a, b) * Fraction(b, a) == 1


def test_univariate_and_evaluate_exact():
    p = univariate({2: Fraction(1, 3), 0: 2}, 0)
    assert p.evaluate_exact(Fraction(3), Fraction(7)) == 5
