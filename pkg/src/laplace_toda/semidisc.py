"""Semi-discrete hyperbolic operators and their Laplace transformations.

An operator acts on sequences of functions psi_n(y) by

    (L psi)_n = a_n psi_n + b_n psi_n' + c_n psi_{n+1} + d_n psi_{n+1}'

with coefficients stored for n = 0..N-1.  Coefficients may carry a
*twist* tau(y): the operator at n + N equals the one at n conjugated by a
common gauge with logarithmic derivative tau, i.e.

    a_{n+N} = a_n + tau b_n,   c_{n+N} = c_n + tau d_n,

with b and d N-periodic.  Plain periodic operators have tau = 0; the
canonical form under non-periodic gauges (b = d = 1) generally has
tau = (log I)'.  All transformations below preserve the twist.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from .config import DEFAULT, Tolerances
from .coeffring.fourier import (PeriodicFunction, log_derivative, nth_root,
                                reciprocal)
from .errors import NearVanishing

__all__ = [
    "SemiDiscreteOperator", "FirstDecomposition", "SecondDecomposition",
    "GaugeInvariants", "Gauge", "decompose_first", "decompose_second",
    "recompose_first", "recompose_second", "gauge_apply", "canonical_form",
    "periodic_canonical_form", "canonical_invariants", "laplace_first",
    "laplace_second", "laplace_invariants_step", "laplace_invariants_inverse",
    "build_chain", "invariants_distance", "operator_distance",
    "random_operator", "product_ratio",
]


def _pf(x, period) -> PeriodicFunction:
    if isinstance(x, PeriodicFunction):
        return x
    return PeriodicFunction.constant(x, period)


class _Twisted:
    """Index access ``seq[n] = base[n mod N] + (n div N) * step[n mod N]``."""

    def __init__(self, base, step=None):
        self.base = list(base)
        self.step = step

    def __len__(self):
        return len(self.base)

    def __getitem__(self, n):
        q, r = divmod(n, len(self.base))
        if q == 0 or self.step is None:
            return self.base[r]
        return self.base[r] + self.step(r) * q


class SemiDiscreteOperator:
    """Immutable operator with N-periodic (possibly twisted) coefficients."""

    __slots__ = ("a", "b", "c", "d", "twist", "period")

    def __init__(self, a, b, c, d, twist: Optional[PeriodicFunction] = None,
                 period: Optional[float] = None):
        seqs = [list(x) for x in (a, b, c, d)]
        N = len(seqs[0])
        if N == 0 or any(len(s) != N for s in seqs):
            raise ValueError("coefficient vectors must share a positive length N")
        if period is None:
            found = [x.period for s in seqs for x in s if isinstance(x, PeriodicFunction)]
            period = found[0] if found else 1.0
        seqs = [tuple(_pf(x, period) for x in s) for s in seqs]
        for s in seqs:
            for x in s:
                if abs(x.period - period) > 1e-12 * period:
                    raise ValueError("all coefficients must share the period T")
        object.__setattr__(self, "a", seqs[0])
        object.__setattr__(self, "b", seqs[1])
        object.__setattr__(self, "c", seqs[2])
        object.__setattr__(self, "d", seqs[3])
        object.__setattr__(self, "twist", None if twist is None else _pf(twist, period))
        object.__setattr__(self, "period", float(period))

    def __setattr__(self, key, value):
        raise AttributeError("SemiDiscreteOperator is immutable")

    @property
    def N(self) -> int:
        return len(self.a)

    @classmethod
    def constant(cls, a, b, c, d, N: int = 1, period: float = 1.0):
        def rep(x):
            return [x] * N if np.isscalar(x) else list(x)
        return cls(rep(a), rep(b), rep(c), rep(d), period=period)

    def coef(self, name: str, n: int) -> PeriodicFunction:
        q, r = divmod(n, self.N)
        base = getattr(self, name)[r]
        if q and self.twist is not None and name in ("a", "c"):
            other = self.b[r] if name == "a" else self.d[r]
            return base + self.twist * other * q
        return base

    def untwisted_sequences(self):
        return self.a, self.b, self.c, self.d

    def __repr__(self):
        tw = ", twisted" if self.twist is not None else ""
        return f"SemiDiscreteOperator(N={self.N}, T={self.period}{tw})"

    def apply(self, psi, dpsi, n: int, y):
        """Evaluate (L psi)_n(y) for callables psi(n, y) and dpsi(n, y)."""
        return (self.coef("a", n)(y) * psi(n, y) + self.b[n % self.N](y) * dpsi(n, y)
                + self.coef("c", n)(y) * psi(n + 1, y)
                + self.d[n % self.N](y) * dpsi(n + 1, y))


@dataclass(frozen=True)
class FirstDecomposition:
    """L = f((d/dy + A)(1 + v T) + w); A_{n+N} = A_n + twist."""

    f: tuple
    v: tuple
    A: tuple
    w: tuple
    twist: Optional[PeriodicFunction] = None

    def A_at(self, n: int) -> PeriodicFunction:
        return _Twisted(self.A, None if self.twist is None else (lambda r: self.twist))[n]


@dataclass(frozen=True)
class SecondDecomposition:
    """L = f((1 + v T)(d/dy + A) + w); A_{n+N} = A_n + twist."""

    f: tuple
    v: tuple
    A: tuple
    w: tuple
    twist: Optional[PeriodicFunction] = None

    def A_at(self, n: int) -> PeriodicFunction:
        return _Twisted(self.A, None if self.twist is None else (lambda r: self.twist))[n]


def decompose_first(L: SemiDiscreteOperator, tol: Tolerances = DEFAULT) -> FirstDecomposition:
    f, v, A, w = [], [], [], []
    for n in range(L.N):
        a, b, c, d = L.a[n], L.b[n], L.c[n], L.d[n]
        rb, rd = reciprocal(b, tolerances=tol), reciprocal(d, tolerances=tol)
        ldr = log_derivative(d, tolerances=tol) - log_derivative(b, tolerances=tol)
        f.append(b)
        v.append(d * rb)
        A.append(c * rd - ldr)
        w.append(a * rb - c * rd + ldr)
    return FirstDecomposition(tuple(f), tuple(v), tuple(A), tuple(w), L.twist)


def decompose_second(L: SemiDiscreteOperator, tol: Tolerances = DEFAULT) -> SecondDecomposition:
    N = L.N
    f, v, A, w = [], [], [], []
    for n in range(N):
        a, b = L.a[n], L.b[n]
        rb = reciprocal(b, tolerances=tol)
        # A_n = c_{n-1}/d_{n-1}, continued through the twist for n = 0
        An = L.coef("c", n - 1) * reciprocal(L.d[(n - 1) % N], tolerances=tol)
        f.append(b)
        v.append(L.d[n] * rb)
        A.append(An)
        w.append(a * rb - An)
    return SecondDecomposition(tuple(f), tuple(v), tuple(A), tuple(w), L.twist)


def recompose_first(dec: FirstDecomposition) -> SemiDiscreteOperator:
    a, b, c, d = [], [], [], []
    for n in range(len(dec.f)):
        f, v, A, w = dec.f[n], dec.v[n], dec.A[n], dec.w[n]
        a.append(f * (A + w))
        b.append(f)
        c.append(f * (v.derivative() + A * v))
        d.append(f * v)
    return SemiDiscreteOperator(a, b, c, d, twist=dec.twist)


def recompose_second(dec: SecondDecomposition) -> SemiDiscreteOperator:
    N = len(dec.f)
    a, b, c, d = [], [], [], []
    for n in range(N):
        f, v, w = dec.f[n], dec.v[n], dec.w[n]
        a.append(f * (dec.A[n] + w))
        b.append(f)
        c.append(f * v * dec.A_at(n + 1))
        d.append(f * v)
    return SemiDiscreteOperator(a, b, c, d, twist=dec.twist)


@dataclass(frozen=True)
class Gauge:
    """Gauge (g, h): psi -> g^{-1} psi, L -> h L g, entries for n = 0..N-1.

    ``g_next_factor`` multiplies g_N relative to g_0 (1 for periodic gauges).
    """

    g: tuple
    h: tuple
    g_next_factor: Optional[PeriodicFunction] = None


def gauge_apply(L: SemiDiscreteOperator, g: Sequence, h: Sequence,
                tol: Tolerances = DEFAULT) -> SemiDiscreteOperator:
    """Apply an N-periodic gauge: a -> h(ag + bg'), b -> hbg,
    c -> h(c g_{n+1} + d g'_{n+1}), d -> h d g_{n+1}."""
    N = L.N
    g = [_pf(x, L.period) for x in g]
    h = [_pf(x, L.period) for x in h]
    if len(g) != N or len(h) != N:
        raise ValueError("gauge vectors must have length N")
    for x in list(g) + list(h):
        _check_nonvanishing(x, tol)
    a, b, c, d = [], [], [], []
    for n in range(N):
        g0, g1 = g[n], g[(n + 1) % N]
        a.append(h[n] * (L.a[n] * g0 + L.b[n] * g0.derivative()))
        b.append(h[n] * L.b[n] * g0)
        c.append(h[n] * (L.c[n] * g1 + L.d[n] * g1.derivative()))
        d.append(h[n] * L.d[n] * g1)
    # a periodic gauge keeps the twist: a_{n+N} -> a'_n + tau b'_n
    return SemiDiscreteOperator(a, b, c, d, twist=L.twist)


def _check_nonvanishing(f: PeriodicFunction, tol: Tolerances, points: int = 256):
    y = np.arange(points) * (f.period / points)
    worst = float(np.min(np.abs(f(y))))
    if worst <= tol.vanish_tol:
        raise NearVanishing(f"function value {worst:.3e} within vanish_tol of zero")


def product_ratio(L: SemiDiscreteOperator, tol: Tolerances = DEFAULT) -> PeriodicFunction:
    """I(y) = b_0 ... b_{N-1} / (d_0 ... d_{N-1})."""
    num = PeriodicFunction.constant(1.0, L.period)
    den = PeriodicFunction.constant(1.0, L.period)
    for n in range(L.N):
        num = num * L.b[n]
        den = den * L.d[n]
    return (num * reciprocal(den, tolerances=tol)).trim(1e-15)


@dataclass(frozen=True)
class GaugeInvariants:
    """Invariants (A_n, w_n) of a canonical representative.

    ``Z`` is set in periodic mode (b = Z, d = 1); otherwise the
    representative has b = d = 1 and ``twist`` gives A_{n+N} - A_n.
    A is determined up to adding one function of y to every A_n.
    """

    A: tuple
    w: tuple
    I: PeriodicFunction
    Z: Optional[PeriodicFunction] = None
    twist: Optional[PeriodicFunction] = None

    @property
    def N(self) -> int:
        return len(self.A)

    @property
    def period(self) -> float:
        return self.I.period

    def A_at(self, n: int) -> PeriodicFunction:
        return _Twisted(self.A, None if self.twist is None else (lambda r: self.twist))[n]

    def w_at(self, n: int) -> PeriodicFunction:
        return self.w[n % self.N]


def canonical_form(L: SemiDiscreteOperator, tol: Tolerances = DEFAULT):
    """Gauge to b = d = 1 with g_0 = 1 and g_{n+1} = g_n b_n / d_n.

    The result is twisted by (log I)' on top of any existing twist.
    Returns the operator and the gauge used.
    """
    N = L.N
    lb = [log_derivative(x, tolerances=tol) for x in L.b]
    ld = [log_derivative(x, tolerances=tol) for x in L.d]
    rb = [reciprocal(x, tolerances=tol) for x in L.b]
    rd = [reciprocal(x, tolerances=tol) for x in L.d]
    one = PeriodicFunction.constant(1.0, L.period)
    zero = PeriodicFunction.constant(0.0, L.period)
    g, lg = [one], [zero]
    for n in range(N):
        g.append((g[-1] * L.b[n] * rd[n]).trim(1e-15))
        lg.append(lg[-1] + lb[n] - ld[n])
    a, c = [], []
    for n in range(N):
        a.append(L.a[n] * rb[n] + lg[n])
        c.append(L.c[n] * rd[n] + lg[n + 1])
    ones = [one] * N
    tau = lg[N]
    twist = tau if L.twist is None else tau + L.twist
    if twist.sup_norm() == 0.0:
        twist = None
    h = [rb[n] * reciprocal(g[n], tolerances=tol) for n in range(N)]
    gauge = Gauge(tuple(g[:N]), tuple(h), g[N])
    return SemiDiscreteOperator(a, ones, c, ones, twist=twist), gauge


def canonical_invariants(L: SemiDiscreteOperator, tol: Tolerances = DEFAULT) -> GaugeInvariants:
    """Invariants from the b = d = 1 representative (non-periodic gauges)."""
    Lc, _ = canonical_form(L, tol)
    A = tuple(Lc.c)
    w = tuple(x - y for x, y in zip(Lc.a, Lc.c))
    return GaugeInvariants(A, w, product_ratio(L, tol), None, Lc.twist)


def periodic_canonical_form(L: SemiDiscreteOperator, tol: Tolerances = DEFAULT,
                            Z: Optional[PeriodicFunction] = None):
    """Gauge by N-periodic (g, h) to b = Z, d = 1 where Z^N = I.

    Returns the operator and its :class:`GaugeInvariants`.  ``Z`` may be
    supplied to pick a branch; by default the principal root at y = 0 is
    continued along y (BranchFailure if I winds a non-multiple of N times).
    """
    N = L.N
    I = product_ratio(L, tol)
    if Z is None:
        Z = nth_root(I, N, tol)
    lz = log_derivative(Z, tolerances=tol)
    lb = [log_derivative(x, tolerances=tol) for x in L.b]
    ld = [log_derivative(x, tolerances=tol) for x in L.d]
    rb = [reciprocal(x, tolerances=tol) for x in L.b]
    rd = [reciprocal(x, tolerances=tol) for x in L.d]
    zero = PeriodicFunction.constant(0.0, L.period)
    lg = [zero]
    for n in range(N):
        lg.append(lg[-1] + lb[n] - ld[n] - lz)
    a, c = [], []
    for n in range(N):
        a.append(Z * (L.a[n] * rb[n] + lg[n]))
        c.append(L.c[n] * rd[n] + lg[n + 1])
    out = SemiDiscreteOperator(a, [Z] * N, c, [PeriodicFunction.constant(1.0, L.period)] * N,
                               twist=L.twist)
    rz = reciprocal(Z, tolerances=tol)
    A = tuple(cn + lz for cn in c)
    w = tuple(an * rz - cn - lz for an, cn in zip(a, c))
    return out, GaugeInvariants(A, w, I, Z, L.twist)


def laplace_first(L: SemiDiscreteOperator, tol: Tolerances = DEFAULT) -> SemiDiscreteOperator:
    """L = (d/dy + A)(1 + vT) + w  ->  w(1 + vT)w^{-1}(d/dy + A) + w."""
    dec = decompose_first(L, tol)
    N = L.N
    rw = [reciprocal(x, tolerances=tol) for x in dec.w]
    a, b, c, d = [], [], [], []
    one = PeriodicFunction.constant(1.0, L.period)
    for n in range(N):
        ratio = dec.v[n] * dec.w[n] * rw[(n + 1) % N]
        a.append(dec.A[n] + dec.w[n])
        b.append(one)
        c.append(ratio * dec.A_at(n + 1))
        d.append(ratio)
    return SemiDiscreteOperator(a, b, c, d, twist=L.twist)


def laplace_second(L: SemiDiscreteOperator, tol: Tolerances = DEFAULT) -> SemiDiscreteOperator:
    """L = (1 + vT)(d/dy + A) + w  ->  w(d/dy + A)w^{-1}(1 + vT) + w."""
    dec = decompose_second(L, tol)
    N = L.N
    a, b, c, d = [], [], [], []
    one = PeriodicFunction.constant(1.0, L.period)
    for n in range(N):
        shifted = dec.A[n] - log_derivative(dec.w[n], tolerances=tol)
        a.append(shifted + dec.w[n])
        b.append(one)
        c.append(dec.v[n] * shifted + dec.v[n].derivative())
        d.append(dec.v[n])
    return SemiDiscreteOperator(a, b, c, d, twist=L.twist)


def _zeta(inv: GaugeInvariants, tol: Tolerances):
    if inv.Z is None:
        return None
    return log_derivative(inv.Z, tolerances=tol)


def laplace_invariants_step(inv: GaugeInvariants, tol: Tolerances = DEFAULT) -> GaugeInvariants:
    """First-type transformation written on (A, w).

    A~_n = A_{n+1} + (log w_{n+1})' [+ (log Z)'],
    w~_n = w_n + A_n + (log w_n)' - A_{n+1} - (log w_{n+1})' [- (log Z)'].
    """
    N = inv.N
    lw = [log_derivative(x, tolerances=tol) for x in inv.w]
    z = _zeta(inv, tol)
    At, wt = [], []
    for n in range(N):
        nxt = inv.A_at(n + 1) + lw[(n + 1) % N]
        if z is not None:
            nxt = nxt + z
        At.append(nxt)
        wt.append(inv.w[n] + inv.A[n] + lw[n] - nxt)
    return GaugeInvariants(tuple(At), tuple(wt), inv.I, inv.Z, inv.twist)


def laplace_invariants_inverse(inv: GaugeInvariants, tol: Tolerances = DEFAULT) -> GaugeInvariants:
    """Inverse of :func:`laplace_invariants_step` (the second-type map).

    w_n = w~_n + A~_n - A~_{n-1} [+ (log Z)'],
    A_n = A~_{n-1} - (log w_n)' [- (log Z)'].
    """
    N = inv.N
    z = _zeta(inv, tol)
    A, w = [], []
    for n in range(N):
        prev = inv.A_at(n - 1)
        wn = inv.w[n] + inv.A[n] - prev
        if z is not None:
            wn = wn + z
        An = prev - log_derivative(wn, tolerances=tol)
        if z is not None:
            An = An - z
        w.append(wn)
        A.append(An)
    return GaugeInvariants(tuple(A), tuple(w), inv.I, inv.Z, inv.twist)


def build_chain(inv0: GaugeInvariants, K: int, tol: Tolerances = DEFAULT,
                inverse: bool = False) -> List[GaugeInvariants]:
    """Return [inv0, step(inv0), ..., step^K(inv0)]."""
    step = laplace_invariants_inverse if inverse else laplace_invariants_step
    chain = [inv0]
    for k in range(K):
        try:
            chain.append(step(chain[-1], tol))
        except NearVanishing as exc:
            raise NearVanishing(f"chain step {k + 1}: {exc}") from exc
    return chain


def _grid(period: float, points: int):
    return np.arange(points) * (period / points)


def invariants_distance(i1: GaugeInvariants, i2: GaugeInvariants, points: int = 64) -> float:
    """Distance between gauge classes.

    w is compared directly; A is compared after removing the common
    function A1_0 - A2_0, the residual freedom of the representative.
    """
    if i1.N != i2.N:
        return float("inf")
    y = _grid(i1.period, points)
    shift = i1.A[0](y) - i2.A[0](y)
    worst = 0.0
    for n in range(i1.N):
        worst = max(worst, float(np.max(np.abs(i1.w[n](y) - i2.w[n](y)))))
        worst = max(worst, float(np.max(np.abs(i1.A[n](y) - i2.A[n](y) - shift))))
    t1 = i1.twist(y) if i1.twist is not None else 0.0
    t2 = i2.twist(y) if i2.twist is not None else 0.0
    worst = max(worst, float(np.max(np.abs(np.asarray(t1) - np.asarray(t2)))))
    return worst


def operator_distance(L1: SemiDiscreteOperator, L2: SemiDiscreteOperator,
                      points: int = 64) -> float:
    """Sup-norm distance between coefficient vectors on a y grid."""
    if L1.N != L2.N:
        return float("inf")
    y = _grid(L1.period, points)
    worst = 0.0
    for name in ("a", "b", "c", "d"):
        for x1, x2 in zip(getattr(L1, name), getattr(L2, name)):
            worst = max(worst, float(np.max(np.abs(x1(y) - x2(y)))))
    return worst


def random_operator(N: int, degree: int, rng: np.random.Generator,
                    period: float = 1.0, scale: float = 0.05,
                    real: bool = False) -> SemiDiscreteOperator:
    """Random smooth operator with b, d bounded away from zero.

    b_n and d_n are 1 plus small modes, a_n and c_n have well separated
    constant parts so that w_n stays away from zero.
    """
    def fn(center):
        k = np.arange(-degree, degree + 1)
        c = scale * (rng.standard_normal(k.size) + (0 if real else 1j) * rng.standard_normal(k.size))
        c = c / (1.0 + np.abs(k)) ** 2
        if real:
            c = (c + c[::-1].conj()) / 2
        c[degree] = center
        return PeriodicFunction(c, period)

    a = [fn(2.0 + 0.3 * rng.standard_normal()) for _ in range(N)]
    b = [fn(1.0) for _ in range(N)]
    c = [fn(0.3 * rng.standard_normal()) for _ in range(N)]
    d = [fn(1.0) for _ in range(N)]
    return SemiDiscreteOperator(a, b, c, d, period=period)


def random_invariants(N: int, degree: int, rng: np.random.Generator,
                      period: float = 2 * np.pi, scale: float = 0.05,
                      w0: float = 2.0) -> GaugeInvariants:
    """Random periodic-mode invariants with I = Z = 1.

    w_n = w0 + small modes and A_n = small zero-mean modes; equal mean
    parts of A keep the constant part of w from drifting along a chain.
    """
    def modes(center):
        k = np.arange(-degree, degree + 1)
        c = scale * (rng.standard_normal(k.size) + 1j * rng.standard_normal(k.size))
        c = c / (1.0 + np.abs(k)) ** 2
        c[degree] = center
        return PeriodicFunction(c, period)

    one = PeriodicFunction.constant(1.0, period)
    A = tuple(modes(0.0) for _ in range(N))
    w = tuple(modes(w0) for _ in range(N))
    return GaugeInvariants(A, w, one, one, None)
