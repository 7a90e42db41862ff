import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from laplace_toda import semidisc as sd
from laplace_toda.coeffring.fourier import PeriodicFunction, exp as pf_exp
from laplace_toda.errors import BranchFailure, NearVanishing

T = 2 * np.pi
Y = np.linspace(0, T, 64, endpoint=False)


def const(x):
    return PeriodicFunction.constant(x, T)


def sup(f, g):
    return float(np.max(np.abs(f(Y) - g(Y))))


def small_positive(rng, degree=2):
    k = np.arange(-degree, degree + 1)
    c = 0.05 * (rng.standard_normal(k.size) + 1j * rng.standard_normal(k.size)) / (1 + abs(k)) ** 2
    c[degree] = 1.0
    return PeriodicFunction(c, T)


# decompositions

def test_first_decomposition_hand_example():
    L = sd.SemiDiscreteOperator.constant(2, 1, 3, 1, period=T)
    dec = sd.decompose_first(L)
    for got, want in ((dec.f[0], 1), (dec.v[0], 1), (dec.A[0], 3), (dec.w[0], -1)):
        assert sup(got, const(want)) < 1e-14


def test_second_decomposition_hand_example():
    L = sd.SemiDiscreteOperator.constant(2, 1, 3, 1, period=T)
    dec = sd.decompose_second(L)
    for got, want in ((dec.f[0], 1), (dec.v[0], 1), (dec.A[0], 3), (dec.w[0], -1)):
        assert sup(got, const(want)) < 1e-14


def test_equal_a_and_c_give_zero_w():
    rng = np.random.default_rng(0)
    a = small_positive(rng)
    L = sd.SemiDiscreteOperator([a], [const(1)], [a], [const(1)])
    assert sd.decompose_first(L).w[0].sup_norm() < 1e-14


def test_second_decomposition_index_shift():
    L = sd.SemiDiscreteOperator.constant([1, 2], 1, [5, 7], 1, N=2, period=T)
    assert sup(sd.decompose_second(L).A[1], const(5)) < 1e-14


def test_second_decomposition_rejects_vanishing_d():
    d = PeriodicFunction([-0.5, 1, -0.5], T)          # zero at y = 0
    L = sd.SemiDiscreteOperator([const(2)], [const(1)], [const(1)], [d])
    with pytest.raises(NearVanishing):
        sd.decompose_second(L)


@pytest.mark.parametrize("seed", range(5))
def test_decompositions_recompose(seed):
    rng = np.random.default_rng(seed)
    L = sd.random_operator(int(rng.integers(1, 5)), 3, rng)
    assert sd.operator_distance(sd.recompose_first(sd.decompose_first(L)), L) < 1e-9
    assert sd.operator_distance(sd.recompose_second(sd.decompose_second(L)), L) < 1e-9


# gauges

def test_identity_gauge():
    L = sd.random_operator(2, 2, np.random.default_rng(1))
    out = sd.gauge_apply(L, [1, 1], [1, 1])
    assert sd.operator_distance(out, L) == 0


def test_gauge_to_unit_b():
    L = sd.SemiDiscreteOperator.constant(2, 4, 3, 5, period=T)
    out = sd.gauge_apply(L, [1], [0.25])
    assert sup(out.b[0], const(1)) < 1e-15


def test_gauge_composition():
    rng = np.random.default_rng(2)
    L = sd.random_operator(2, 2, rng, period=T)
    g1, h1, g2, h2 = ([small_positive(rng) for _ in range(2)] for _ in range(4))
    twice = sd.gauge_apply(sd.gauge_apply(L, g1, h1), g2, h2)
    once = sd.gauge_apply(L, [x * y for x, y in zip(g1, g2)], [x * y for x, y in zip(h1, h2)])
    assert sd.operator_distance(twice, once) < 1e-12


def test_gauge_invariance_property():
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(100):
        N = int(rng.integers(1, 4))
        L = sd.random_operator(N, 2, rng, period=T)
        g = [small_positive(rng) for _ in range(N)]
        h = [small_positive(rng) for _ in range(N)]
        base = sd.canonical_invariants(L)
        moved = sd.canonical_invariants(sd.gauge_apply(L, g, h))
        worst = max(worst, sd.invariants_distance(base, moved))
    assert worst < 1e-8


def test_canonical_form_of_canonical_operator():
    rng = np.random.default_rng(4)
    L, _ = sd.canonical_form(sd.random_operator(3, 2, rng, period=T))
    again, gauge = sd.canonical_form(L)
    assert sd.operator_distance(again, L) < 1e-12
    assert all(sup(g, const(1)) < 1e-12 for g in gauge.g)


def test_canonical_form_constant_example():
    L = sd.SemiDiscreteOperator.constant(2, 2, 6, 2, period=T)
    Lc, _ = sd.canonical_form(L)
    assert sup(Lc.b[0], const(1)) < 1e-15 and sup(Lc.d[0], const(1)) < 1e-15
    inv = sd.canonical_invariants(L)
    dec = sd.decompose_first(Lc)
    assert sup(inv.A[0], dec.A[0]) < 1e-14 and sup(inv.w[0], dec.w[0]) < 1e-14


# periodic mode

def test_periodic_form_already_normal():
    one = const(1.0)
    L = sd.SemiDiscreteOperator([const(0.3), const(0.7)], [-one, -one],
                                [const(0.1), const(0.2)], [one, one])
    out, inv = sd.periodic_canonical_form(L, Z=const(-1.0))
    assert sup(inv.I, one) < 1e-15
    assert sd.operator_distance(out, L) < 1e-14


def test_periodic_form_keeps_product_ratio():
    rng = np.random.default_rng(5)
    L = sd.random_operator(3, 2, rng, period=T)
    out, inv = sd.periodic_canonical_form(L)
    assert sup(sd.product_ratio(out), inv.I) < 1e-8
    assert sup(sd.product_ratio(L), inv.I) < 1e-12
    assert sup(inv.Z * inv.Z * inv.Z, inv.I) < 1e-8


def test_winding_product_ratio_has_no_root():
    one = const(1.0)
    b0 = PeriodicFunction([0, 0, 1], T)                # winds once
    L = sd.SemiDiscreteOperator([const(2), const(2)], [b0, one], [const(1), const(1)], [one, one])
    with pytest.raises(BranchFailure):
        sd.periodic_canonical_form(L)


# Laplace transformations

def test_constant_single_site_is_fixed():
    inv = sd.canonical_invariants(sd.SemiDiscreteOperator.constant(2.5, 1, 0.5, 1, period=T))
    out = sd.canonical_invariants(sd.laplace_first(sd.SemiDiscreteOperator.constant(2.5, 1, 0.5, 1, period=T)))
    assert sd.invariants_distance(inv, out) < 1e-14


def test_first_transform_of_constant_canonical_operator():
    a, c = [2.0, 3.5, 5.0], [0.5, -1.0, 0.25]
    out = sd.laplace_first(sd.SemiDiscreteOperator.constant(a, 1, c, 1, N=3, period=T))
    for n in range(3):
        m = (n + 1) % 3
        assert sup(out.a[n], const(a[n])) < 1e-13
        assert sup(out.d[n], const((a[n] - c[n]) / (a[m] - c[m]))) < 1e-13


@pytest.mark.parametrize("seed", range(4))
def test_first_then_second_is_identity(seed):
    rng = np.random.default_rng(seed)
    L = sd.random_operator(int(rng.integers(1, 4)), 2, rng)
    base = sd.canonical_invariants(L)
    assert sd.invariants_distance(sd.canonical_invariants(sd.laplace_second(sd.laplace_first(L))), base) < 1e-8
    assert sd.invariants_distance(sd.canonical_invariants(sd.laplace_first(sd.laplace_second(L))), base) < 1e-8


@pytest.mark.parametrize("seed", range(3))
def test_first_transform_keeps_product_ratio(seed):
    rng = np.random.default_rng(seed)
    L = sd.random_operator(3, 2, rng, period=T)
    assert sup(sd.product_ratio(sd.laplace_first(L)), sd.product_ratio(L)) < 1e-8


def test_invariant_step_constant_identity():
    one = const(1.0)
    inv = sd.GaugeInvariants((const(0.4),), (const(1.5),), one, one)
    out = sd.laplace_invariants_step(inv)
    assert sd.invariants_distance(out, inv) < 1e-15


@pytest.mark.parametrize("seed", range(4))
def test_invariant_step_matches_operator_route(seed):
    rng = np.random.default_rng(seed)
    L = sd.random_operator(int(rng.integers(1, 4)), 2, rng, period=T)
    via_invariants = sd.laplace_invariants_step(sd.canonical_invariants(L))
    via_operator = sd.canonical_invariants(sd.laplace_first(L))
    assert sd.invariants_distance(via_invariants, via_operator) < 1e-8


def test_w_sum_telescopes_to_root_derivative():
    rng = np.random.default_rng(6)
    N = 3
    base = sd.random_invariants(N, 2, rng)
    logZ = PeriodicFunction([0.05j, 0.1, 0, 0.1, -0.05j], T)
    Z = pf_exp(logZ)
    inv = sd.GaugeInvariants(base.A, base.w, Z * Z * Z, Z, None)
    out = sd.laplace_invariants_step(inv)
    total = sum((wt - w for wt, w in zip(out.w, inv.w)), const(0.0))
    assert sup(total, -N * logZ.derivative()) < 1e-8


def test_constant_chain():
    one = const(1.0)
    inv = sd.GaugeInvariants((const(0.2), const(0.2)), (const(1.5), const(1.5)), one, one)
    for link in sd.build_chain(inv, 4):
        assert sd.invariants_distance(link, inv) < 1e-14


@settings(max_examples=5)
@given(st.integers(0, 10**6), st.integers(1, 3))
def test_chain_reverses(seed, N):
    rng = np.random.default_rng(seed)
    inv = sd.random_invariants(N, 3, rng)
    chain = sd.build_chain(inv, 4)
    back = sd.build_chain(chain[-1], 4, inverse=True)
    assert sd.invariants_distance(back[-1], inv) < 1e-7
