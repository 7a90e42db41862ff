import random
from fractions import Fraction

import numpy as np
import pytest

from laplace_toda import disc, semidisc as sd, toda
from laplace_toda.coeffring.fourier import DriftFunction, PeriodicFunction
from laplace_toda.errors import DegenerateW, IncompatibleField
from laplace_toda.verify import _laplace_chain

T = 2 * np.pi
Y = np.linspace(0, T, 50, endpoint=False)


def const(x):
    return PeriodicFunction.constant(x, T)


def constant_field(value, N=2, K=4):
    return toda.SemiDiscreteField(tuple(tuple(const(value) for _ in range(N)) for _ in range(K + 1)))


def random_field(rng, N=2, K=4):
    return toda.SemiDiscreteField(tuple(tuple(sd.random_invariants(N, 2, rng).w) for _ in range(K + 1)))


# semi-discrete

def test_constant_field_has_zero_residual():
    field = constant_field(1.7)
    for k in (1, 2, 3):
        assert toda.eqw_residual(field, k, 0).sup_norm() == 0


def test_random_layers_violate_lattice():
    field = random_field(np.random.default_rng(0))
    assert toda.eqw_residual(field, 1, 0).sup_norm() > 1e-3


@pytest.mark.parametrize("N", [1, 2, 3])
def test_chain_layers_satisfy_lattice(N):
    rng = np.random.default_rng(N)
    chain = sd.build_chain(sd.random_invariants(N, 3, rng), 4)
    field = toda.field_from_chain(chain)
    for k in (1, 2, 3):
        for n in range(N):
            assert toda.eqw_residual(field, k, n).sup_norm() < 1e-7


def test_field_window():
    field = toda.SemiDiscreteField(constant_field(2.0).layers, k0=3)
    assert field.w(3, 5).sup_norm() == 2
    with pytest.raises(KeyError):
        field.w(0, 0)


def test_reconstruct_constant_closed_form():
    w = 1.7
    gf = toda.reconstruct_g(constant_field(w, K=3), 0.0)
    for (k, n), g in gf.g.items():
        assert np.max(np.abs(g(Y) - k * np.log(w))) < 1e-12
    for k in (1, 2):
        assert toda.toda_residual_2D1(gf, k, 0).sup_norm() < 1e-12


def test_reconstructed_g_solves_toda():
    rng = np.random.default_rng(5)
    chain = sd.build_chain(sd.random_invariants(2, 3, rng), 4)
    gf = toda.reconstruct_g(toda.field_from_chain(chain), PeriodicFunction([0.1, 0.2, 0.05j], T),
                            {0: 0.5, 1: -0.2})
    assert gf.compat_spread < 1e-7
    for k in (1, 2, 3):
        for n in range(4 - k):
            assert toda.toda_residual_2D1(gf, k, n).sup_norm() < 1e-6


def test_incompatible_field_rejected():
    with pytest.raises(IncompatibleField):
        toda.reconstruct_g(random_field(np.random.default_rng(6)), 0.0)


def test_perturbed_g_breaks_toda():
    gf = toda.reconstruct_g(constant_field(1.7, K=3), 0.0)
    bump = DriftFunction.lift(PeriodicFunction([0.05, 0, 0.05], T))
    gf.g[(1, 0)] = gf.g[(1, 0)] + bump
    assert toda.toda_residual_2D1(gf, 1, 0).sup_norm() > 1e-3


def test_log_drift_of_winding_function():
    f = PeriodicFunction([0, 0, 2], T)                 # 2 e^{iy}
    L = toda.log_drift(f)
    assert np.max(np.abs(np.exp(L(Y)) - f(Y))) < 1e-9
    assert abs(L(T) - L(0) - 2j * np.pi) < 1e-9


# completely discrete

P = disc.PeriodMatrix.diag(2, 2)


def layer(value):
    return ((Fraction(value),) * 2,) * 2


def test_ones_are_fixed():
    field = toda.DiscreteField(P, {0: layer(1), 1: layer(1)})
    assert toda.discrete_toda_step(field, 0) == layer(1)


def test_degenerate_layers_rejected():
    for bad in (0, -1):
        with pytest.raises(DegenerateW):
            toda.discrete_toda_step(toda.DiscreteField(P, {0: layer(bad), 1: layer(2)}), 0)


def test_random_discrete_layers_violate_lattice():
    rng = random.Random(1)
    layers = {k: tuple(tuple(disc._rand_rational(rng) for _ in range(2)) for _ in range(2))
              for k in range(3)}
    res = toda.discrete_toda_residual(toda.DiscreteField(P, layers), 0)
    assert any(v != 0 for v in res.values())


@pytest.mark.parametrize("rows", [[[2, 0], [0, 2]], [[2, 0], [1, 2]], [[3, 0], [0, 2]]])
def test_operator_chain_solves_discrete_lattice(rows):
    Pm = disc.PeriodMatrix.from_rows(rows)
    ops = _laplace_chain(Pm, random.Random(2), 4)
    layers = {k: disc.invariants(op).w for k, op in enumerate(ops)}
    field = toda.DiscreteField(Pm, layers)
    for k in (0, 1):
        assert all(v == 0 for v in toda.discrete_toda_residual(field, k).values())
        assert toda.discrete_toda_step(field, k) == field.layers[k + 2]
