"""Seeded self-check suites run by ``laplace-toda verify``."""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List

import numpy as np

from . import disc, disc_spectral, floquet, semidisc, toda
from .coeffring.bipoly import poly_det
from .coeffring.fourier import PeriodicFunction
from .errors import LaplaceTodaError

__all__ = ["Check", "SUITES", "run_suite", "exact_det"]

TWO_PI = 2 * np.pi
LATTICES = ([[2, 0], [0, 2]], [[2, 0], [1, 2]], [[3, 0], [0, 2]])


@dataclass
class Check:
    name: str
    ok: bool
    detail: str = ""

    def line(self) -> str:
        return f"{'PASS' if self.ok else 'FAIL'}  {self.name}  {self.detail}".rstrip()


def exact_det(rows) -> Fraction:
    """Determinant of a rational matrix by fraction-exact elimination."""
    m = [list(map(Fraction, r)) for r in rows]
    n, det = len(m), Fraction(1)
    for k in range(n):
        piv = next((r for r in range(k, n) if m[r][k] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != k:
            m[k], m[piv] = m[piv], m[k]
            det = -det
        det *= m[k][k]
        for r in range(k + 1, n):
            f = m[r][k] / m[k][k]
            if f:
                for c in range(k, n):
                    m[r][c] -= f * m[k][c]
    return det


def _semi(rng, count, N_max=4, degree=3, period=1.0):
    for _ in range(count):
        N = int(rng.integers(1, N_max + 1))
        yield semidisc.random_operator(N, degree, rng, period=period)


def _lattices(rng: random.Random, count):
    for k in range(count):
        yield disc.PeriodMatrix.from_rows(LATTICES[k % len(LATTICES)])


def sample_rho(rng, radius: float = 2.5, gap: float = 0.5) -> complex:
    """Random rho in the disk |rho| <= radius with |rho - 1| >= gap."""
    while True:
        rho = complex(*rng.uniform(-radius, radius, 2))
        if abs(rho) <= radius and abs(rho - 1) >= gap:
            return rho


def laplace_ready(P, rng: random.Random, tries: int = 100) -> disc.DiscreteOperator:
    """Random operator whose first Laplace image exists and whose marked
    points are finite (redraws otherwise)."""
    for _ in range(tries):
        L = disc.random_operator(P, rng)
        try:
            disc.laplace12_pp(L)
            disc_spectral.spectral_points(L)
        except LaplaceTodaError:
            continue
        return L
    raise RuntimeError("no admissible operator drawn")


def suite_lemma1(seed: int) -> List[Check]:
    rng = np.random.default_rng(seed)
    worst1 = worst2 = 0.0
    for L in _semi(rng, 10):
        worst1 = max(worst1, semidisc.operator_distance(
            semidisc.recompose_first(semidisc.decompose_first(L)), L))
        worst2 = max(worst2, semidisc.operator_distance(
            semidisc.recompose_second(semidisc.decompose_second(L)), L))
    return [Check("first decomposition round trip", worst1 < 1e-9, f"{worst1:.2e}"),
            Check("second decomposition round trip", worst2 < 1e-9, f"{worst2:.2e}")]


def suite_lemma4(seed: int) -> List[Check]:
    rng = np.random.default_rng(seed)
    worst1 = worst2 = 0.0
    for L in _semi(rng, 6, N_max=3, degree=2):
        base = semidisc.canonical_invariants(L)
        back = semidisc.canonical_invariants(semidisc.laplace_second(semidisc.laplace_first(L)))
        worst1 = max(worst1, semidisc.invariants_distance(back, base))
        back = semidisc.canonical_invariants(semidisc.laplace_first(semidisc.laplace_second(L)))
        worst2 = max(worst2, semidisc.invariants_distance(back, base))
    return [Check("second after first is gauge identity", worst1 < 1e-8, f"{worst1:.2e}"),
            Check("first after second is gauge identity", worst2 < 1e-8, f"{worst2:.2e}")]


def _chain(rng, N, K=4):
    inv = semidisc.random_invariants(N, 3, rng, period=TWO_PI)
    return inv, semidisc.build_chain(inv, K)


def suite_eq6(seed: int) -> List[Check]:
    rng = np.random.default_rng(seed)
    worst = back = 0.0
    for N in (1, 2, 3):
        inv, chain = _chain(rng, N)
        field = toda.field_from_chain(chain)
        for k in range(1, len(chain) - 1):
            for n in range(N):
                worst = max(worst, toda.eqw_residual(field, k, n).sup_norm())
        rev = semidisc.build_chain(chain[-1], len(chain) - 1, inverse=True)
        back = max(back, semidisc.invariants_distance(rev[-1], inv))
    return [Check("chain layers satisfy the compatibility lattice", worst < 1e-7, f"{worst:.2e}"),
            Check("inverse chain returns to the start", back < 1e-8, f"{back:.2e}")]


def suite_theorem1(seed: int) -> List[Check]:
    rng = np.random.default_rng(seed)
    res = spread = 0.0
    for N in (2, 3):
        _, chain = _chain(rng, N)
        field = toda.field_from_chain(chain)
        g00 = PeriodicFunction([0.1, 0.2, 0.05j], TWO_PI)
        gf = toda.reconstruct_g(field, g00, {0: 0.5, 1: -0.2})
        spread = max(spread, gf.compat_spread)
        K = len(chain) - 1
        for k in range(1, K):
            for n in range(0, K - k):
                res = max(res, toda.toda_residual_2D1(gf, k, n).sup_norm())
    return [Check("2D Toda residual of reconstructed g", res < 1e-6, f"{res:.2e}"),
            Check("compatibility constants independent of y", spread < 1e-7, f"{spread:.2e}")]


def _floquet_systems(rng, count, N_max=4):
    for _ in range(count):
        N = int(rng.integers(1, N_max + 1))
        L = semidisc.random_operator(N, 2, rng)
        yield floquet.FloquetSystem(L.a, L.c, L.period)


def suite_fibers(seed: int) -> List[Check]:
    rng = np.random.default_rng(seed)
    z = inf = 0.0
    for sys in _floquet_systems(rng, 5):
        z = max(z, floquet.fiber_routes(sys, "zero").mismatch)
        inf = max(inf, floquet.fiber_routes(sys, "infinity").mismatch)
    return [Check("multipliers at rho = 0", z < 1e-8, f"{z:.2e}"),
            Check("multipliers at rho = infinity", inf < 1e-8, f"{inf:.2e}")]


def suite_adjoint(seed: int) -> List[Check]:
    rng = np.random.default_rng(seed)
    res = rec = 0.0
    for sys in _floquet_systems(rng, 3):
        for _ in range(3):
            out = floquet.adjoint_check(sys, sample_rho(rng), tol=1e-13)
            res, rec = max(res, out.residual), max(rec, out.reciprocity)
    return [Check("adjoint resolvent identity", res < 1e-7, f"{res:.2e}"),
            Check("reciprocal multipliers", rec < 1e-8, f"{rec:.2e}")]


def suite_pointq(seed: int) -> List[Check]:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(3):
        a, c = rng.uniform(-1, 1, 3), rng.uniform(-1, 1, 3)
        sys = floquet.FloquetSystem.constant(a, c)
        q = floquet.q_asymptotics(sys, list(np.logspace(-1, -3, 9)))
        worst = max(worst, q.relative_error)
    return [Check("exponential rate at rho = 1", worst < 1e-3, f"{worst:.2e}")]


def suite_lemma13(seed: int) -> List[Check]:
    rng = random.Random(seed)
    det_ok = newton_ok = corner_ok = match_ok = True
    for P in _lattices(rng, 6):
        L = disc.random_operator(P, rng)
        M = disc_spectral.build_M(L)
        curve = disc_spectral.spectral_poly(L)
        nu, mu = Fraction(rng.randint(1, 9), rng.randint(1, 9)), Fraction(rng.randint(-9, -1), 7)
        det_ok &= curve.R(nu, mu) == exact_det([[e(nu, mu) if e else 0 for e in row] for row in M.entries])
        newton_ok &= curve.newton_ok
        corner_ok &= all(curve.corners.values())
        try:
            disc_spectral.consistency_R_Rhat(L, curve.R, curve.Rhat)
        except LaplaceTodaError:
            match_ok = False
    return [Check("determinant agrees with exact elimination", det_ok),
            Check("support inside the Newton polygon", newton_ok),
            Check("corner factorizations", corner_ok),
            Check("R and R-hat agree after the multiplier change", match_ok)]


def suite_theorem8(seed: int) -> List[Check]:
    rng = random.Random(seed)
    ok, bad = True, []
    for P in _lattices(rng, 6):
        rep = disc_spectral.laplace_spectral_invariance(laplace_ready(P, rng), strict=False)
        ok &= rep.ok
        bad += [k for k, v in rep.rows.items() if not v]
    return [Check("curve invariance and point permutations", ok, ", ".join(sorted(set(bad))))]


def _laplace_chain(P, rng: random.Random, length: int, tries: int = 100):
    """[L, Lambda L, ...] of the given length with all w outside {0, -1}."""
    for _ in range(tries):
        ops = [disc.random_operator(P, rng)]
        try:
            while len(ops) < length:
                ops.append(disc.laplace12_pp(ops[-1]))
            if any(v in (0, -1) for op in ops for row in disc.invariants(op).w for v in row):
                continue
        except LaplaceTodaError:
            continue
        return ops
    raise RuntimeError("no admissible chain drawn")


def suite_eq15(seed: int) -> List[Check]:
    rng = random.Random(seed)
    lattice_ok = step_ok = route_ok = True
    for P in _lattices(rng, 6):
        ops = _laplace_chain(P, rng, 3)
        stepped_inv = disc.laplace_invariants_step_disc(disc.invariants(ops[0]))
        route_ok &= stepped_inv == disc.invariants(ops[1])
        layers = {k: disc.invariants(op).w for k, op in enumerate(ops)}
        field = toda.DiscreteField(P, layers)
        lattice_ok &= all(v == 0 for v in toda.discrete_toda_residual(field, 0).values())
        stepped = toda.discrete_toda_step(toda.DiscreteField(P, {0: layers[0], 1: layers[1]}), 0)
        step_ok &= stepped == field.layers[2]
    return [Check("operator layers satisfy the discrete lattice", lattice_ok),
            Check("lattice step reproduces the operator layer", step_ok),
            Check("invariant update matches the operator route", route_ok)]


def suite_psi(seed: int) -> List[Check]:
    rng = random.Random(seed)
    worst = 0.0
    for P in _lattices(rng, 3):
        L = disc.random_operator(P, rng)
        M = disc_spectral.build_M(L)
        R = poly_det(M.entries)
        for _ in range(2):
            nu = complex(rng.uniform(0.5, 2), rng.uniform(-1, 1))
            mu = disc_spectral.curve_points(R, nu)[0]
            psi = disc_spectral.floquet_psi(L, (nu, mu), M)
            for (i, j) in L.sites():
                rb, rc = disc_spectral.psi_ratios(L, (nu, mu), (i, j), M=M, R=R)
                base = psi(i, j)
                worst = max(worst, abs(rb - psi(i + 1, j) / base), abs(rc - psi(i, j + 1) / base))
    return [Check("psi ratios from cofactors", worst < 1e-9, f"{worst:.2e}")]


def suite_integrable(seed: int) -> List[Check]:
    rng = random.Random(seed)
    sep_ok = rand_ok = True
    for P in _lattices(rng, 6):
        pts = disc_spectral.spectral_points(disc.separable_operator(P, rng))
        sep_ok &= all(pts.coincident().values())
        pts = disc_spectral.spectral_points(disc.random_operator(P, rng))
        rand_ok &= not all(pts.coincident().values())
    return [Check("integrable operators have coincident points", sep_ok),
            Check("random operators have split points", rand_ok)]


SUITES: Dict[str, Callable[[int], List[Check]]] = {
    "lemma1": suite_lemma1,
    "lemma4": suite_lemma4,
    "eq6": suite_eq6,
    "theorem1": suite_theorem1,
    "fibers": suite_fibers,
    "adjoint": suite_adjoint,
    "pointq": suite_pointq,
    "lemma13": suite_lemma13,
    "theorem8": suite_theorem8,
    "eq15": suite_eq15,
    "psi": suite_psi,
    "integrable": suite_integrable,
}


def run_suite(name: str, seed: int = 0) -> List[Check]:
    if name == "all":
        out = []
        for key, fn in SUITES.items():
            out += [Check(f"{key}: {c.name}", c.ok, c.detail) for c in fn(seed)]
        return out
    if name not in SUITES:
        raise KeyError(name)
    return SUITES[name](seed)
