import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from laplace_toda import floquet as fl
from laplace_toda import semidisc as sd
from laplace_toda.coeffring.fourier import PeriodicFunction
from laplace_toda.errors import PoleAtOne

from oracles import constant_floquet_A


def random_system(rng, N, degree=2, period=1.0):
    L = sd.random_operator(N, degree, rng, period=period)
    return fl.FloquetSystem(L.a, L.c, L.period)


def test_B_matrix_and_inverse():
    sys = fl.FloquetSystem.constant([0.1, 0.2, 0.3], [0.0, 0.0, 0.0])
    rho = 2.5 + 0.5j
    B = sys.B(rho)
    expect = (-np.eye(3) + np.diag([1, 1], 1)).astype(complex)
    expect[2, 0] = rho
    assert np.allclose(B, expect)
    assert np.max(np.abs(sys.B_inv(rho) @ B - np.eye(3))) < 1e-14


def test_A_matches_linear_system():
    a, c = [0.3, -0.4, 0.7], [0.2, 0.5, -0.1]
    sys = fl.FloquetSystem.constant(a, c)
    for rho in (0.0, 2.0, -1.5 + 0.5j):
        assert np.max(np.abs(sys.A(0.3, rho) - constant_floquet_A(a, c, rho))) < 1e-13


@pytest.mark.parametrize("N", [1, 2, 3, 4])
def test_constant_monodromy_is_matrix_exponential(N):
    rng = np.random.default_rng(N)
    a, c = rng.uniform(-1, 1, N), rng.uniform(-1, 1, N)
    sys = fl.FloquetSystem.constant(a, c, 1.3)
    rho = 0.4 - 0.8j
    res = fl.monodromy(sys, rho)
    oracle = expm(constant_floquet_A(a, c, rho) * 1.3)
    assert np.max(np.abs(res.phi - oracle)) < 1e-9 * max(1, np.abs(oracle).max())
    _, mis = fl.match_multisets(res.eigenvalues, np.linalg.eigvals(oracle))
    assert mis < 1e-9


def test_rho_zero_diagonal_multipliers():
    sys = fl.FloquetSystem.constant([0.4, -0.7], [1.1, 0.3], 2.0)
    _, mis = fl.match_multisets(fl.monodromy(sys, 0.0).eigenvalues, [np.exp(0.8), np.exp(-1.4)])
    assert mis < 1e-9


def test_zero_system_is_identity():
    sys = fl.FloquetSystem.constant([0, 0, 0], [0, 0, 0])
    assert np.max(np.abs(fl.monodromy(sys, 3.0).phi - np.eye(3))) == 0


def test_pole_guard():
    with pytest.raises(PoleAtOne):
        fl.monodromy(fl.FloquetSystem.constant([1], [1]), 1.0 + 1e-5)


def test_spectral_sample_matches_exponential():
    a, c = [0.3, -0.2, 0.5], [0.1, 0.4, -0.6]
    sys = fl.FloquetSystem.constant(a, c)
    grid = [0.0, 2.0, -1.0 + 1j, 3j]
    for rho, res in zip(grid, fl.spectral_sample(sys, grid, threads=2)):
        _, mis = fl.match_multisets(res.eigenvalues, np.linalg.eigvals(expm(constant_floquet_A(a, c, rho))))
        assert mis < 1e-8


def test_spectral_sample_single_zero_point():
    rng = np.random.default_rng(1)
    sys = random_system(rng, 3)
    (res,) = fl.spectral_sample(sys, [0.0])
    assert fl.match_multisets(res.eigenvalues, fl.fiber_at_zero(sys))[1] < 1e-8


def test_spectral_sample_reports_failures():
    sys = fl.FloquetSystem.constant([1, 2], [0, 0])
    out = fl.spectral_sample(sys, [1.0, 2.0])
    assert isinstance(out[0], fl.SampleFailure) and isinstance(out[1], fl.MonodromyResult)


def test_real_operator_conjugate_symmetry():
    rng = np.random.default_rng(2)
    L = sd.random_operator(3, 2, rng, real=True)
    sys = fl.FloquetSystem(L.a, L.c, L.period)
    for rho in (0.5 + 1.5j, -2.0 + 0.3j):
        up = fl.monodromy(sys, rho).eigenvalues
        down = fl.monodromy(sys, np.conj(rho)).eigenvalues
        assert fl.match_multisets(np.conj(up), down)[1] < 1e-8


def test_fiber_closed_forms():
    sys = fl.FloquetSystem.constant([0.2, 0.5, -0.3], [1.0, 2.0, 3.0], 2.0)
    assert np.allclose(fl.fiber_at_zero(sys), np.exp([0.4, 1.0, -0.6]))
    assert np.allclose(fl.fiber_at_infinity(sys), np.exp([-6.0, -4.0, -2.0]))
    zero = fl.FloquetSystem.constant([0, 0], [0.3, 0.4])
    assert np.allclose(fl.fiber_at_zero(zero), 1)


@pytest.mark.parametrize("seed", range(3))
def test_fiber_routes_agree(seed):
    sys = random_system(np.random.default_rng(seed), 3)
    assert fl.fiber_routes(sys, "zero").mismatch < 1e-8
    assert fl.fiber_routes(sys, "infinity").mismatch < 1e-8


def test_infinity_limit_against_large_rho():
    # first-order correction: lambda_k + c_k = prod(lambda - a) / (rho prod_{n != k}(lambda + c_n))
    a, c, T = [0.1, 0.2, 0.3], [-1.0, 0.2, 1.3], 1.0
    sys = fl.FloquetSystem.constant(a, c, T)
    coef = max(abs(np.prod([-ck - x for x in a]) / np.prod([cn - ck for cn in c if cn != ck]))
               for ck in c)
    for rho in (1e4, 1e6):
        mis = fl.match_multisets(fl.monodromy(sys, rho, tol=1e-13).eigenvalues,
                                 fl.fiber_at_infinity(sys))[1]
        assert mis * rho == pytest.approx(T * coef, rel=1e-3)
    rng = np.random.default_rng(4)
    var = random_system(rng, 3)
    errs = [fl.match_multisets(fl.monodromy(var, r, tol=1e-12).eigenvalues,
                               fl.fiber_at_infinity(var))[1] for r in (1e5, 1e6)]
    assert errs[1] < 1e-3 and errs[0] / errs[1] == pytest.approx(10, rel=0.05)


def test_zero_fiber_ignores_c():
    rng = np.random.default_rng(5)
    L = sd.random_operator(3, 2, rng)
    s1 = fl.FloquetSystem(L.a, L.c, L.period)
    s2 = fl.FloquetSystem(L.a, [x * 3 + 1 for x in L.c], L.period)
    e1, e2 = fl.monodromy(s1, 0.0).eigenvalues, fl.monodromy(s2, 0.0).eigenvalues
    assert fl.match_multisets(e1, e2)[1] < 1e-8


def test_cocycle():
    sys = random_system(np.random.default_rng(6), 3)
    one = fl.monodromy(sys, 2.0 + 0.5j, tol=1e-11).phi
    two = fl.monodromy(sys, 2.0 + 0.5j, tol=1e-11, periods=2).phi
    assert np.max(np.abs(two - one @ one)) < 1e-9 * np.abs(two).max()


def test_halving_tolerance_reduces_drift():
    sys = random_system(np.random.default_rng(7), 3, degree=3)
    rho = -1.5 + 0.7j
    ref = np.array(sorted(fl.monodromy(sys, rho, tol=1e-14).eigenvalues, key=lambda z: (z.real, z.imag)))

    def drift(tol):
        e = np.array(fl.monodromy(sys, rho, tol=tol).eigenvalues)
        return fl.match_multisets(e, ref)[1]
    assert drift(1e-7 / 2) <= drift(1e-7) / 2


@settings(max_examples=10)
@given(st.integers(0, 10**6), st.integers(1, 4))
def test_monodromy_is_invertible(seed, N):
    rng = np.random.default_rng(seed)
    sys = random_system(rng, N)
    rho = complex(*rng.uniform(-3, 3, 2))
    if abs(rho - 1) < 0.1:
        rho += 1
    res = fl.monodromy(sys, rho)
    liouville = np.exp(sys.trace_integral(rho))
    assert abs(res.det - liouville) < 1e-7 * abs(liouville)
    assert res.det != 0


def test_floquet_criterion():
    sys = random_system(np.random.default_rng(8), 3)
    rho = 0.3 + 2.0j
    res = fl.monodromy(sys, rho, tol=1e-12)
    mus, vecs = np.linalg.eig(res.phi)
    for mu, v in zip(mus, vecs.T):
        end = fl.floquet_solution(sys, rho, v, sys.T, tol=1e-12)
        assert np.max(np.abs(end - mu * v)) < 1e-9 * max(1, abs(mu))


# behaviour at rho = 1

def test_point_q_rate_constant():
    sys = fl.FloquetSystem.constant([0.3, -0.2, 0.4], [0.5, 0.1, -0.3])
    q = fl.q_asymptotics(sys, list(np.logspace(-1, -3, 9)))
    assert q.relative_error < 1e-4
    assert q.M_expected == pytest.approx(-0.8)


def test_point_q_rate_variable_coefficients():
    sys = random_system(np.random.default_rng(9), 3)
    q = fl.q_asymptotics(sys, list(np.logspace(-1, -3, 9)))
    assert q.relative_error < 1e-3


def test_point_q_zero_system():
    sys = fl.FloquetSystem.constant([0, 0, 0], [0, 0, 0])
    q = fl.q_asymptotics(sys, [0.1, 0.01, 0.001])
    assert abs(q.M_rate) < 1e-9
    assert all(abs(v - 1) < 1e-9 for row in q.near_one for v in row)


def test_point_q_bounded_multipliers_limit():
    """The bounded multipliers tend to e^{lambda T} with
    prod(lambda - a_n) = prod(lambda + c_n), not to 1."""
    a, c = [0.3, -0.2, 0.4], [0.5, 0.1, -0.3]
    q = fl.q_asymptotics(fl.FloquetSystem.constant(a, c), [1e-2, 1e-3, 1e-4])
    lam = np.roots(np.poly(a) - np.poly([-x for x in c]))
    limit = np.exp(lam)
    errs = [fl.match_multisets(row, limit)[1] for row in q.near_one]
    assert errs[-1] < 1e-4 and errs[0] > errs[1] > errs[2]
    assert min(abs(v - 1) for v in limit) > 0.1


def test_point_q_rejects_bad_t():
    sys = fl.FloquetSystem.constant([1], [1])
    with pytest.raises(ValueError):
        fl.q_asymptotics(sys, [0.01, 0.1])


# adjoint

@pytest.mark.parametrize("seed", range(3))
def test_adjoint_identity(seed):
    sys = random_system(np.random.default_rng(seed), 3)
    out = fl.adjoint_check(sys, 2.0, tol=1e-12)
    assert out.residual < 1e-7 and out.reciprocity < 1e-8


def test_adjoint_constant_reciprocity():
    a, c = [0.3, -0.2, 0.5], [0.1, 0.4, -0.6]
    sys = fl.FloquetSystem.constant(a, c)
    out = fl.adjoint_check(sys, -0.5 + 1.2j, tol=1e-13)
    assert out.reciprocity < 1e-9


def test_adjoint_zero_system():
    out = fl.adjoint_check(fl.FloquetSystem.constant([0, 0], [0, 0]), 2.0)
    assert out.residual == 0 and float(out) == 0


# branch points

def test_single_site_has_no_branch_points():
    sys = fl.FloquetSystem.constant([0.3], [0.7])
    assert fl.branch_point_scan(sys, (-2, 2, -2, 2)) == []


def _disc_zeros(a, c):
    """Zeros of (rho - 1)^2 (tr^2 - 4 det) of A(rho) from samples."""
    def p(r):
        A = constant_floquet_A(a, c, r)
        return (r - 1) ** 2 * (np.trace(A) ** 2 - 4 * np.linalg.det(A))
    z = 3 * np.exp(2j * np.pi * np.arange(9) / 9)
    coef = np.polyfit(z, [p(r) for r in z], 4)
    coef = np.trim_zeros(np.where(np.abs(coef) < 1e-10, 0, coef), "f")
    return np.roots(coef)


def test_two_site_branch_points_match_discriminant():
    a, c = (0.3, -0.2), (0.5, 0.1)
    sys = fl.FloquetSystem.constant(a, c)
    expect = _disc_zeros(a, c)
    assert np.allclose(sorted(expect, key=lambda z: z.imag), [-0.25 - 1.5 ** 0.5 * 1j, -0.25 + 1.5 ** 0.5 * 1j])
    found = fl.branch_point_scan(sys, (-0.83, 0.51, -1.9, 1.7), grid_density=12)
    assert fl.match_multisets(found, expect)[1] < 1e-8
    for z in found:
        assert fl.winding_around(sys, z, 0.05) == 1


def test_discriminant_of_repeated_eigenvalue():
    assert abs(fl.discriminant(np.array([[2.0, 1.0], [0.0, 2.0]]))) < 1e-14
    assert abs(fl.discriminant(np.diag([1.0, 2.0, 4.0])) - (1 * 3 * 2) ** 2) < 1e-9
