"""Discrete hyperbolic operators on Z^2 with a period sub-lattice.

An operator acts as

    (L psi)_{n,m} = a psi_{n,m} + b psi_{n+1,m} + c psi_{n,m+1} + d psi_{n+1,m+1}

with rational coefficients periodic under a sub-lattice.  Coefficients are
stored on the triangular-basis box 0 <= i < dt, 0 <= j < delta and every
other site is reduced to the box by the wrap rule of :meth:`NormalForms.reduce1`.
All arithmetic is exact.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from .coeffring.bipoly import as_rational
from .errors import (DegeneratePeriods, DegenerateW, ZeroCoefficient,
                     ZeroMultiplier, ZeroProduct)

__all__ = [
    "PeriodMatrix", "NormalForms", "normal_forms", "multipliers_convert",
    "DiscreteOperator", "DiscreteGaugeInvariants", "Decomposition",
    "decompose12", "decompose21", "laplace12_pp", "laplace21_pp",
    "invariants", "laplace_invariants_step_disc", "shift1", "shift2",
    "laplace_variant", "gauge_disc", "reflect1", "reflect2",
    "IntegrabilityWitness", "is_integrable", "cyclic_chain_check",
    "CycleResult", "random_operator", "separable_operator", "same_class",
]

COEFFS = ("a", "b", "c", "d")


def _xgcd(a: int, b: int) -> Tuple[int, int, int]:
    """Return (g, x, y) with x*a + y*b = g = gcd(a, b) >= 0."""
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


@dataclass(frozen=True)
class PeriodMatrix:
    """Rows (P, R) and (S, T) are period vectors of the coefficients."""

    P: int
    R: int
    S: int
    T: int

    def __post_init__(self):
        if self.det <= 0:
            raise DegeneratePeriods(
                f"period matrix must have positive determinant, got {self.det}")

    @property
    def det(self) -> int:
        return self.P * self.T - self.R * self.S

    @classmethod
    def diag(cls, p: int, t: int) -> "PeriodMatrix":
        return cls(p, 0, 0, t)

    @classmethod
    def from_rows(cls, rows) -> "PeriodMatrix":
        (p, r), (s, t) = rows
        return cls(int(p), int(r), int(s), int(t))

    def rows(self) -> Tuple[Tuple[int, int], Tuple[int, int]]:
        return ((self.P, self.R), (self.S, self.T))


@dataclass(frozen=True)
class NormalForms:
    """Parameters of the two triangular bases of a period lattice.

    Basis one has rows (dt, 0) and (-zeta, delta); basis two has rows
    (eps, -xi) and (0, et).  The unimodular change of basis is
    ``[[Dt, xit], [-zetat, kappa]]``, i.e. nu1 = nu2^Dt mu2^xit and
    mu1 = nu2^-zetat mu2^kappa.
    """

    delta: int
    dt: int
    zeta: int
    eps: int
    et: int
    xi: int
    Delta: int
    Dt: int
    xit: int
    zetat: int
    kappa: int

    @property
    def genus(self) -> int:
        return self.Delta - self.delta - self.eps + 1

    @property
    def basis1(self):
        return ((self.dt, 0), (-self.zeta, self.delta))

    @property
    def basis2(self):
        return ((self.eps, -self.xi), (0, self.et))

    def reduce1(self, n: int, m: int) -> Tuple[int, int, int, int]:
        """Site (n, m) = (i, j) + alpha*(dt, 0) + beta*(-zeta, delta)."""
        beta, j = divmod(m, self.delta)
        alpha, i = divmod(n + beta * self.zeta, self.dt)
        return i, j, alpha, beta

    def reduce2(self, n: int, m: int) -> Tuple[int, int, int, int]:
        """Site (n, m) = (i, j) + alpha*(eps, -xi) + beta*(0, et)."""
        alpha, i = divmod(n, self.eps)
        beta, j = divmod(m + alpha * self.xi, self.et)
        return i, j, alpha, beta

    def contains(self, n: int, m: int) -> bool:
        i, j, _, _ = self.reduce1(n, m)
        return i == 0 and j == 0


def normal_forms(pm: PeriodMatrix) -> NormalForms:
    Delta = pm.det
    delta, x, y = _xgcd(pm.R, pm.T)
    dt = Delta // delta
    # x*(P,R) + y*(S,T) = (n0, delta) lies in the lattice, so zeta = -n0 mod dt
    zeta = (-(x * pm.P + y * pm.S)) % dt
    eps, x2, y2 = _xgcd(pm.P, pm.S)
    et = Delta // eps
    xi = (-(x2 * pm.R + y2 * pm.T)) % et
    if delta >= Delta or eps >= Delta:
        raise DegeneratePeriods(
            f"degenerate period lattice: delta={delta}, eps={eps}, Delta={Delta}")
    Dt = Delta // (delta * eps)
    if xi % delta or zeta % eps:
        raise DegeneratePeriods("inconsistent normal forms")  # pragma: no cover
    xit, zetat = xi // delta, zeta // eps
    num = 1 - xit * zetat
    if num % Dt:
        raise DegeneratePeriods("normal forms fail unimodularity")  # pragma: no cover
    return NormalForms(delta, dt, zeta, eps, et, xi, Delta, Dt, xit, zetat,
                       num // Dt)


def multipliers_convert(pair, nf: NormalForms, direction: str = "2to1"):
    """Convert Floquet multipliers between the two bases.

    ``direction="2to1"`` maps (nu2, mu2) to (nu1, mu1); ``"1to2"`` the
    reverse.  Rational inputs give exact outputs.
    """
    x, y = pair
    if x == 0 or y == 0:
        raise ZeroMultiplier("multipliers must be nonzero")
    if direction == "2to1":
        return (x ** nf.Dt * y ** nf.xit, x ** (-nf.zetat) * y ** nf.kappa)
    if direction == "1to2":
        return (x ** nf.kappa * y ** (-nf.xit), x ** nf.zetat * y ** nf.Dt)
    raise ValueError(f"unknown direction {direction!r}")


class DiscreteOperator:
    """Exact discrete operator with coefficients on the basis-one box."""

    __slots__ = ("periods", "nf", "a", "b", "c", "d")

    def __init__(self, periods: PeriodMatrix, a, b, c, d):
        self.periods = periods
        self.nf = normal_forms(periods)
        shape = (self.nf.dt, self.nf.delta)
        for name, arr in zip(COEFFS, (a, b, c, d)):
            tab = tuple(tuple(as_rational(v) for v in row) for row in arr)
            if len(tab) != shape[0] or any(len(r) != shape[1] for r in tab):
                raise ValueError(f"coefficient {name} must have shape {shape}")
            object.__setattr__(self, name, tab)

    def __setattr__(self, key, value):
        if hasattr(self, "d"):
            raise AttributeError("DiscreteOperator is immutable")
        object.__setattr__(self, key, value)

    @classmethod
    def from_function(cls, periods: PeriodMatrix,
                      func: Callable[[int, int], Sequence]) -> "DiscreteOperator":
        """Sample ``func(n, m) -> (a, b, c, d)`` on the box."""
        nf = normal_forms(periods)
        vals = [[func(i, j) for j in range(nf.delta)] for i in range(nf.dt)]
        return cls(periods, *[[[v[k] for v in row] for row in vals]
                              for k in range(4)])

    @classmethod
    def constant(cls, periods, a, b, c, d):
        return cls.from_function(periods, lambda n, m: (a, b, c, d))

    def coef(self, name: str, n: int, m: int) -> Fraction:
        i, j, _, _ = self.nf.reduce1(n, m)
        return getattr(self, name)[i][j]

    def at(self, n: int, m: int) -> Tuple[Fraction, ...]:
        i, j, _, _ = self.nf.reduce1(n, m)
        return (self.a[i][j], self.b[i][j], self.c[i][j], self.d[i][j])

    def sites(self) -> Iterable[Tuple[int, int]]:
        for i in range(self.nf.dt):
            for j in range(self.nf.delta):
                yield i, j

    def apply(self, psi: Callable[[int, int], complex], n: int, m: int):
        a, b, c, d = self.at(n, m)
        return (a * psi(n, m) + b * psi(n + 1, m) + c * psi(n, m + 1)
                + d * psi(n + 1, m + 1))

    def replace(self, periods: Optional[PeriodMatrix] = None,
                **arrays) -> "DiscreteOperator":
        vals = {k: arrays.get(k, getattr(self, k)) for k in COEFFS}
        return DiscreteOperator(periods or self.periods, **vals)

    def __eq__(self, other):
        if not isinstance(other, DiscreteOperator):
            return NotImplemented
        return (self.periods == other.periods
                and all(getattr(self, k) == getattr(other, k) for k in COEFFS))

    def __hash__(self):
        return hash((self.periods, self.a, self.b, self.c, self.d))

    def __repr__(self):
        return (f"DiscreteOperator(periods={self.periods.rows()}, "
                f"box={self.nf.dt}x{self.nf.delta})")


def gauge_disc(L: DiscreteOperator, f: Callable[[int, int], Fraction],
               g: Callable[[int, int], Fraction]) -> DiscreteOperator:
    """Return f L g, i.e. psi is replaced by g^{-1} psi."""

    def new(n, m):
        a, b, c, d = L.at(n, m)
        fv = as_rational(f(n, m))
        return (fv * a * as_rational(g(n, m)),
                fv * b * as_rational(g(n + 1, m)),
                fv * c * as_rational(g(n, m + 1)),
                fv * d * as_rational(g(n + 1, m + 1)))

    return DiscreteOperator.from_function(L.periods, new)


@dataclass(frozen=True)
class Decomposition:
    """Box arrays (f, u, v, w) of a factorized representation."""

    f: Tuple[Tuple[Fraction, ...], ...]
    u: Tuple[Tuple[Fraction, ...], ...]
    v: Tuple[Tuple[Fraction, ...], ...]
    w: Tuple[Tuple[Fraction, ...], ...]
    nf: NormalForms

    def get(self, name: str, n: int, m: int) -> Fraction:
        i, j, _, _ = self.nf.reduce1(n, m)
        return getattr(self, name)[i][j]


def _box(nf, func):
    return tuple(tuple(func(i, j) for j in range(nf.delta))
                 for i in range(nf.dt))


def _nonzero(value, what, n, m):
    if value == 0:
        raise ZeroCoefficient(f"{what} vanishes at site ({n}, {m})")
    return value


def decompose12(L: DiscreteOperator) -> Decomposition:
    """L = f((1 + u T1)(1 + v T2) + w)."""
    nf = L.nf

    def v(n, m):
        b = _nonzero(L.coef("b", n - 1, m), "b", n - 1, m)
        return L.coef("d", n - 1, m) / b

    def f(n, m):
        return L.coef("c", n, m) / _nonzero(v(n, m), "v", n, m)

    def u(n, m):
        return L.coef("b", n, m) / _nonzero(f(n, m), "f", n, m)

    def w(n, m):
        return L.coef("a", n, m) / f(n, m) - 1

    return Decomposition(_box(nf, f), _box(nf, u), _box(nf, v), _box(nf, w), nf)


def decompose21(L: DiscreteOperator) -> Decomposition:
    """L = f'((1 + v' T2)(1 + u' T1) + w')."""
    nf = L.nf

    def u(n, m):
        c = _nonzero(L.coef("c", n, m - 1), "c", n, m - 1)
        return L.coef("d", n, m - 1) / c

    def f(n, m):
        return L.coef("b", n, m) / _nonzero(u(n, m), "u'", n, m)

    def v(n, m):
        return L.coef("c", n, m) / _nonzero(f(n, m), "f'", n, m)

    def w(n, m):
        return L.coef("a", n, m) / f(n, m) - 1

    return Decomposition(_box(nf, f), _box(nf, u), _box(nf, v), _box(nf, w), nf)


def recompose12(dec: Decomposition, periods: PeriodMatrix) -> DiscreteOperator:
    def coeffs(n, m):
        f, u, v, w = (dec.get(k, n, m) for k in "fuvw")
        return (f * (1 + w), f * u, f * v, f * u * dec.get("v", n + 1, m))
    return DiscreteOperator.from_function(periods, coeffs)


def recompose21(dec: Decomposition, periods: PeriodMatrix) -> DiscreteOperator:
    def coeffs(n, m):
        f, u, v, w = (dec.get(k, n, m) for k in "fuvw")
        return (f * (1 + w), f * u, f * v, f * v * dec.get("u", n, m + 1))
    return DiscreteOperator.from_function(periods, coeffs)


def _check_w(dec: Decomposition):
    for i in range(dec.nf.dt):
        for j in range(dec.nf.delta):
            if dec.w[i][j] == 0:
                raise DegenerateW(f"w vanishes at site ({i}, {j})")


def laplace12_pp(L: DiscreteOperator) -> DiscreteOperator:
    """First-type transformation built on T1 then T2; output has f = 1."""
    dec = decompose12(L)
    _check_w(dec)

    def coeffs(n, m):
        u, v, w = (dec.get(k, n, m) for k in "uvw")
        r = v * w / dec.get("w", n, m + 1)
        return (1 + w, u, r, r * dec.get("u", n, m + 1))

    return DiscreteOperator.from_function(L.periods, coeffs)


def laplace21_pp(L: DiscreteOperator) -> DiscreteOperator:
    """Second-type transformation built on T2 then T1; output has f' = 1."""
    dec = decompose21(L)
    _check_w(dec)

    def coeffs(n, m):
        u, v, w = (dec.get(k, n, m) for k in "uvw")
        r = u * w / dec.get("w", n + 1, m)
        return (1 + w, r, v, r * dec.get("v", n + 1, m))

    return DiscreteOperator.from_function(L.periods, coeffs)


@dataclass(frozen=True)
class DiscreteGaugeInvariants:
    """Complete gauge invariants (w, H) on the basis-one box."""

    w: Tuple[Tuple[Fraction, ...], ...]
    H: Tuple[Tuple[Fraction, ...], ...]
    periods: PeriodMatrix

    @property
    def nf(self) -> NormalForms:
        return normal_forms(self.periods)

    def get(self, name: str, n: int, m: int) -> Fraction:
        i, j, _, _ = self.nf.reduce1(n, m)
        return getattr(self, name)[i][j]


def invariants(L: DiscreteOperator) -> DiscreteGaugeInvariants:
    dec = decompose12(L)

    def H(n, m):
        u = _nonzero(dec.get("u", n, m), "u", n, m)
        v1 = _nonzero(dec.get("v", n + 1, m), "v", n + 1, m)
        return dec.get("v", n, m) * dec.get("u", n, m + 1) / (u * v1)

    return DiscreteGaugeInvariants(dec.w, _box(L.nf, H), L.periods)


def same_class(L1: DiscreteOperator, L2: DiscreteOperator) -> bool:
    """Exact gauge-class equality through the (w, H) invariants."""
    if normal_forms(L1.periods) != normal_forms(L2.periods):
        return False
    i1, i2 = invariants(L1), invariants(L2)
    return i1.w == i2.w and i1.H == i2.H


def laplace_invariants_step_disc(inv: DiscreteGaugeInvariants
                                 ) -> DiscreteGaugeInvariants:
    """Transform (w, H) under the first-type transformation.

    1 + w~_{n+1,m} = (1 + w_{n+1,m}) H_{n,m} w_{n,m} w_{n+1,m+1}
                     / (w_{n+1,m} w_{n,m+1})
    H~_{n,m} = (1 + w~_{n,m+1}) / (1 + w_{n,m+1})
    """
    nf = inv.nf
    for i in range(nf.dt):
        for j in range(nf.delta):
            w, h = inv.w[i][j], inv.H[i][j]
            if w in (0, -1) or h == 0:
                raise DegenerateW(
                    f"invariants degenerate at site ({i}, {j}): w={w}, H={h}")
    W = lambda n, m: inv.get("w", n, m)  # noqa: E731

    def wt(n, m):
        # value of w~ at (n, m) from the update written at (n - 1, m)
        p = n - 1
        val = ((1 + W(n, m)) * inv.get("H", p, m) * W(p, m) * W(n, m + 1)
               / (W(n, m) * W(p, m + 1)))
        return val - 1

    wnew = _box(nf, wt)
    for i in range(nf.dt):
        for j in range(nf.delta):
            if wnew[i][j] == -1:
                raise DegenerateW(f"1 + w~ vanishes at site ({i}, {j})")

    def Ht(n, m):
        i, j, _, _ = nf.reduce1(n, m + 1)
        return (1 + wnew[i][j]) / (1 + W(n, m + 1))

    return DiscreteGaugeInvariants(wnew, _box(nf, Ht), inv.periods)


def shift1(L: DiscreteOperator, k: int = 1) -> DiscreteOperator:
    """Coefficients re-indexed by (n, m) -> (n - k, m)."""
    return DiscreteOperator.from_function(L.periods,
                                          lambda n, m: L.at(n - k, m))


def shift2(L: DiscreteOperator, k: int = 1) -> DiscreteOperator:
    """Coefficients re-indexed by (n, m) -> (n, m - k)."""
    return DiscreteOperator.from_function(L.periods,
                                          lambda n, m: L.at(n, m - k))


def reflect1(L: DiscreteOperator) -> DiscreteOperator:
    """Conjugate by n -> -n.

    Writing L = L' T1 with L' built on T1^{-1} and reading L' in the
    reflected coordinate k = -n - 1 gives an operator of the same shape.
    """
    pm = L.periods
    new_pm = PeriodMatrix(-pm.S, pm.T, -pm.P, pm.R)

    def coeffs(k, m):
        a, b, c, d = L.at(-k - 1, m)
        return (b, a, d, c)

    return DiscreteOperator.from_function(new_pm, coeffs)


def reflect2(L: DiscreteOperator) -> DiscreteOperator:
    """Conjugate by m -> -m, the analogue of :func:`reflect1`."""
    pm = L.periods
    new_pm = PeriodMatrix(pm.S, -pm.T, pm.P, -pm.R)

    def coeffs(n, k):
        a, b, c, d = L.at(n, -k - 1)
        return (c, d, a, b)

    return DiscreteOperator.from_function(new_pm, coeffs)


_SIGNS = {"pp": (1, 1), "pm": (1, -1), "mp": (-1, 1), "mm": (-1, -1)}


def laplace_variant(L: DiscreteOperator, signs: str = "pp",
                    order: str = "12") -> DiscreteOperator:
    """Signed transformations expressed through shifts of the (+,+) ones.

    ``signs`` is one of pp, pm, mp, mm (first sign belongs to the first
    listed shift).  For order 12 the (-,+), (+,-), (-,-) variants are
    S1^{-1}, S2^{-1} and (S1 S2)^{-1} applied after the (+,+) map; for
    order 21 they are the inverses of the matching order-12 maps.
    """
    if signs not in _SIGNS:
        raise ValueError(f"unknown signs {signs!r}")
    if order == "12":
        out = laplace12_pp(L)
        s1, s2 = _SIGNS[signs]
        if s1 < 0:
            out = shift1(out, -1)
        if s2 < 0:
            out = shift2(out, -1)
        return out
    if order == "21":
        # order-21 signs (t, s) invert order-12 signs (s, t); for 21 the
        # first sign refers to T2 and the second to T1
        out = laplace21_pp(L)
        t, s = _SIGNS[signs]
        if s < 0:
            out = shift1(out, 1)
        if t < 0:
            out = shift2(out, 1)
        return out
    raise ValueError(f"unknown order {order!r}")


@dataclass(frozen=True)
class IntegrabilityWitness:
    integrable: bool
    column_ab: Tuple[Fraction, ...]
    column_cd: Tuple[Fraction, ...]
    row_ac: Tuple[Fraction, ...]
    row_bd: Tuple[Fraction, ...]

    def violations(self) -> List[str]:
        out = []
        for name, vals in (("A/B columns", self.column_ab),
                           ("C/D columns", self.column_cd),
                           ("A/C rows", self.row_ac),
                           ("B/D rows", self.row_bd)):
            if len(set(vals)) > 1:
                out.append(f"{name}: {[str(v) for v in vals]}")
        return out

    def __bool__(self):
        return self.integrable


def column_products(L: DiscreteOperator, name: str) -> Tuple[Fraction, ...]:
    """Product of coefficient ``name`` over a full n-period, per column j."""
    out = []
    for j in range(L.nf.delta):
        out.append(math.prod((L.coef(name, i, j) for i in range(L.nf.dt)),
                             start=Fraction(1)))
    return tuple(out)


def row_products(L: DiscreteOperator, name: str) -> Tuple[Fraction, ...]:
    """Product of coefficient ``name`` over a full m-period, per row i."""
    out = []
    for i in range(L.nf.eps):
        out.append(math.prod((L.coef(name, i, j) for j in range(L.nf.et)),
                             start=Fraction(1)))
    return tuple(out)


def _ratios(num, den, what):
    if any(x == 0 for x in den):
        raise ZeroProduct(f"vanishing {what} product")
    return tuple(x / y for x, y in zip(num, den))


def is_integrable(L: DiscreteOperator) -> IntegrabilityWitness:
    A, B, C, D = (column_products(L, k) for k in COEFFS)
    Ar, Br, Cr, Dr = (row_products(L, k) for k in COEFFS)
    ab = _ratios(A, B, "column b")
    cd = _ratios(C, D, "column d")
    ac = _ratios(Ar, Cr, "row c")
    bd = _ratios(Br, Dr, "row d")
    ok = all(len(set(x)) == 1 for x in (ab, cd, ac, bd))
    return IntegrabilityWitness(ok, ab, cd, ac, bd)


@dataclass(frozen=True)
class CycleResult:
    cyclic: bool
    alpha: int
    beta: int
    gamma: int
    gcd_conditions: bool
    integrable: bool

    @property
    def consistent(self) -> bool:
        """A cycle with the gcd side conditions must be integrable."""
        return not (self.cyclic and self.gcd_conditions) or self.integrable


def cyclic_chain_check(L: DiscreteOperator, alpha: int, beta: int,
                       gamma: int) -> CycleResult:
    if alpha < 1:
        raise ValueError("alpha must be at least 1")
    nf = L.nf
    cur = L
    for _ in range(alpha):
        cur = laplace12_pp(cur)
    target = shift2(shift1(L, beta), gamma)
    cyclic = same_class(cur, target)
    conds = (math.gcd(beta, nf.delta) == 1 and math.gcd(gamma, nf.eps) == 1
             and math.gcd(alpha + gamma, nf.eps) == 1
             and math.gcd(alpha - beta, nf.delta) == 1)
    return CycleResult(cyclic, alpha, beta, gamma, conds,
                       bool(is_integrable(L)))


def _rand_rational(rng: random.Random, bound: int = 9) -> Fraction:
    while True:
        num = rng.randint(-bound, bound)
        if num:
            return Fraction(num, rng.randint(1, bound))


def random_operator(periods: PeriodMatrix, rng: random.Random,
                    bound: int = 9) -> DiscreteOperator:
    """Generic operator with nonzero random rational coefficients."""
    return DiscreteOperator.from_function(
        periods, lambda n, m: tuple(_rand_rational(rng, bound) for _ in range(4)))


def separable_operator(periods: PeriodMatrix, rng: random.Random,
                       bound: int = 9) -> DiscreteOperator:
    """Operator whose row and column product ratios are constant.

    Start from (x_a, x_b p_n, x_c q_m, x_d p_n q_m) with p invariant under
    the lattice in n and q invariant in m, then apply a random gauge.
    The p and q factors cancel in every ratio or enter it through a full
    product, and the gauge factors telescope over periods.
    """
    nf = normal_forms(periods)
    pper = math.gcd(nf.dt, nf.zeta)
    qper = math.gcd(nf.et, nf.xi)
    x = [_rand_rational(rng, bound) for _ in range(4)]
    p = [_rand_rational(rng, bound) for _ in range(pper)]
    q = [_rand_rational(rng, bound) for _ in range(qper)]
    sites = [(i, j) for i in range(nf.dt) for j in range(nf.delta)]
    left = {s: _rand_rational(rng, bound) for s in sites}
    right = {s: _rand_rational(rng, bound) for s in sites}

    def base(n, m):
        pn, qm = p[n % pper], q[m % qper]
        return (x[0], x[1] * pn, x[2] * qm, x[3] * pn * qm)

    def f(n, m):
        i, j, _, _ = nf.reduce1(n, m)
        return left[(i, j)]

    def g(n, m):
        i, j, _, _ = nf.reduce1(n, m)
        return right[(i, j)]

    return gauge_disc(DiscreteOperator.from_function(periods, base), f, g)
