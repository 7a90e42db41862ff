"""Toda lattices attached to chains of Laplace transformations.

Semi-discrete side: the compatibility lattice for w^k_n(y), the 2D Toda
lattice for g^k_n(y) and the reconstruction of g from w.  Discrete side:
the completely discretized lattice for w^{(k)}_{n,m}, stepped exactly.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Mapping, Optional, Tuple

import numpy as np

from .config import DEFAULT, Tolerances
from .coeffring.bipoly import as_rational
from .coeffring.fourier import DriftFunction, PeriodicFunction, log_derivative
from .disc import PeriodMatrix, normal_forms
from .errors import DegenerateW, IncompatibleField, NearVanishing

__all__ = [
    "SemiDiscreteField", "GField", "DiscreteField", "eqw_residual",
    "toda_residual_2D1", "reconstruct_g", "discrete_toda_step",
    "discrete_toda_residual", "field_from_chain", "log_drift",
]


@dataclass(frozen=True)
class SemiDiscreteField:
    """Layers w^k_n(y) for k in ``range(k0, k0 + len(layers))``, n mod N."""

    layers: Tuple[Tuple[PeriodicFunction, ...], ...]
    k0: int = 0

    @property
    def N(self) -> int:
        return len(self.layers[0])

    @property
    def ks(self) -> range:
        return range(self.k0, self.k0 + len(self.layers))

    @property
    def period(self) -> float:
        return self.layers[0][0].period

    def w(self, k: int, n: int) -> PeriodicFunction:
        if k not in self.ks:
            raise KeyError(f"layer {k} outside the stored window {self.ks}")
        layer = self.layers[k - self.k0]
        return layer[n % len(layer)]


def field_from_chain(chain) -> SemiDiscreteField:
    """Collect the w-layers of a list of GaugeInvariants."""
    return SemiDiscreteField(tuple(tuple(inv.w) for inv in chain))


def eqw_residual(field: SemiDiscreteField, k: int, n: int,
                 tol: Tolerances = DEFAULT) -> PeriodicFunction:
    """w^{k+1}_n - w^k_n - (w^k_{n+1} - w^{k-1}_{n+1})
    - ((log w^k_n)' - (log w^k_{n+1})')."""
    w = field.w
    lhs = w(k + 1, n) - w(k, n) - (w(k, n + 1) - w(k - 1, n + 1))
    rhs = (log_derivative(w(k, n), tolerances=tol)
           - log_derivative(w(k, n + 1), tolerances=tol))
    return (lhs - rhs).trim(1e-15)


def log_drift(f: PeriodicFunction, tol: Tolerances = DEFAULT) -> DriftFunction:
    """Continuous logarithm of f along y, starting from the principal value
    at y = 0; winding appears as a linear drift."""
    if f.degree == 0:
        c = f.coeff(0)
        if abs(c) <= tol.vanish_tol:
            raise NearVanishing("log of zero constant")
        return DriftFunction(0.0, PeriodicFunction.constant(np.log(complex(c)), f.period))
    prim = log_derivative(f, tolerances=tol).antiderivative()
    return prim + complex(np.log(complex(f(0.0))))


@dataclass
class GField:
    """g^k_n(y) on the triangle k, n >= 0, k + n <= depth + 1, plus constants."""

    g: Dict[Tuple[int, int], DriftFunction]
    c: Dict[Tuple[int, int], complex]
    r: Dict[int, complex]
    compat_spread: float = 0.0
    depth: int = 0

    def __getitem__(self, key) -> DriftFunction:
        return self.g[key]


def reconstruct_g(field: SemiDiscreteField, g00, r: Optional[Mapping[int, complex]] = None,
                  tol: Tolerances = DEFAULT, points: int = 64,
                  compat_tol: float = 1e-7) -> GField:
    """Build g from w with g^k_n - g^{k-1}_{n+1} = log w^k_n and
    g^k_n - g^k_{n+1} = int_0^y (w^{k+1}_n - w^k_n) + c^k_n.

    Indices are relative to the field window (k = 0 is its first layer).
    c^k_0 = r^k; the other constants follow from the compatibility relation,
    whose y-independence is verified (IncompatibleField otherwise).  With
    K + 1 layers g is defined for k, n >= 0 and k + n <= K.
    """
    K = len(field.layers) - 1
    if K < 1:
        raise ValueError("need at least two layers")
    k0 = field.k0
    w = lambda k, n: field.w(k0 + k, n)  # noqa: E731
    r = dict(r or {})
    depth = K - 1
    for k in range(depth + 1):
        r.setdefault(k, 0.0)
    T = field.period
    y = np.arange(points) * (T / points)
    logs: Dict[Tuple[int, int], DriftFunction] = {}

    def L(k, n):
        if (k, n) not in logs:
            logs[(k, n)] = log_drift(w(k, n), tol)
        return logs[(k, n)]

    # compatibility: c^{k-1}_{n+1} = c^k_n + E^k_n(y) with E constant in y
    c: Dict[Tuple[int, int], complex] = {(k, 0): complex(r[k]) for k in range(depth + 1)}
    spread = 0.0
    for s in range(1, depth + 1):          # s = n index of the target constant
        for k in range(0, depth + 1 - s):
            kk, nn = k + 1, s - 1          # source c^{kk}_{nn}
            integrand = w(kk + 1, nn) - w(kk, nn + 1) - w(kk, nn) + w(kk - 1, nn + 1)
            E = integrand.antiderivative() + L(kk, nn + 1) - L(kk, nn)
            vals = E(y)
            spread = max(spread, float(np.max(np.abs(vals - vals[0]))))
            c[(k, s)] = c[(kk, nn)] + complex(vals[0])
    if spread > compat_tol:
        raise IncompatibleField(
            f"compatibility expression varies by {spread:.3e} in y (limit {compat_tol:.1e})")
    g: Dict[Tuple[int, int], DriftFunction] = {}
    g[(0, 0)] = DriftFunction.lift(g00 if not np.isscalar(g00)
                                   else PeriodicFunction.constant(g00, T))
    for k in range(K + 1):
        if k > 0:
            g[(k, 0)] = g[(k - 1, 1)] + L(k, 0)
        for n in range(K - k):
            step = (w(k + 1, n) - w(k, n)).antiderivative() + c[(k, n)]
            g[(k, n + 1)] = g[(k, n)] - step
    return GField(g, c, r, spread, depth)


def toda_residual_2D1(gf: GField, k: int, n: int, tol: Tolerances = DEFAULT,
                      points: int = 128) -> PeriodicFunction:
    """(g^k_n - g^k_{n+1})' - (exp(g^{k+1}_n - g^k_{n+1}) - exp(g^k_n - g^{k-1}_{n+1}))."""
    g = gf.g
    for key in ((k, n), (k, n + 1), (k + 1, n), (k - 1, n + 1)):
        if key not in g:
            raise KeyError(f"g{key} outside the reconstructed index set")
    left = (g[(k, n)] - g[(k, n + 1)]).derivative()
    e1 = g[(k + 1, n)] - g[(k, n + 1)]
    e2 = g[(k, n)] - g[(k - 1, n + 1)]
    T = left.period
    return PeriodicFunction.fit(lambda y: left(y) - (np.exp(e1(y)) - np.exp(e2(y))),
                                T, tol)


# ---------------------------------------------------------------------
# completely discretized lattice

@dataclass
class DiscreteField:
    """Layers w^{(k)} on the basis-one box of a period lattice."""

    periods: PeriodMatrix
    layers: Dict[int, Tuple[Tuple[Fraction, ...], ...]] = field(default_factory=dict)

    def __post_init__(self):
        self.nf = normal_forms(self.periods)
        self.layers = {int(k): tuple(tuple(as_rational(v) for v in row) for row in arr)
                       for k, arr in self.layers.items()}

    def w(self, k: int, n: int, m: int) -> Fraction:
        i, j, _, _ = self.nf.reduce1(n, m)
        return self.layers[k][i][j]

    def check_layer(self, k: int):
        for row in self.layers[k]:
            for v in row:
                if v in (0, -1):
                    raise DegenerateW(f"layer {k} has w = {v}")


def discrete_toda_step(field: DiscreteField, k: int) -> Tuple[Tuple[Fraction, ...], ...]:
    """Solve for layer k + 2 from layers k and k + 1.

    (1 + w2_{n+1,m}) / (1 + w1_{n+1,m}) * (1 + w0_{n,m+1}) / (1 + w1_{n,m+1})
        = w1_{n,m} w1_{n+1,m+1} / (w1_{n+1,m} w1_{n,m+1})
    """
    field.check_layer(k)
    field.check_layer(k + 1)
    nf = field.nf
    W = field.w

    def site(i, j):
        n, m = i - 1, j
        rhs = (W(k + 1, n, m) * W(k + 1, n + 1, m + 1)
               / (W(k + 1, n + 1, m) * W(k + 1, n, m + 1)))
        val = (rhs * (1 + W(k + 1, n + 1, m)) * (1 + W(k + 1, n, m + 1))
               / (1 + W(k, n, m + 1)))
        return val - 1

    return tuple(tuple(site(i, j) for j in range(nf.delta)) for i in range(nf.dt))


def discrete_toda_residual(field: DiscreteField, k: int) -> Dict[Tuple[int, int], Fraction]:
    """LHS / RHS - 1 of the lattice at every box site (exactly zero on solutions)."""
    nf = field.nf
    W = field.w
    out = {}
    for n in range(nf.dt):
        for m in range(nf.delta):
            lhs = ((1 + W(k + 2, n + 1, m)) / (1 + W(k + 1, n + 1, m))
                   * (1 + W(k, n, m + 1)) / (1 + W(k + 1, n, m + 1)))
            rhs = (W(k + 1, n, m) * W(k + 1, n + 1, m + 1)
                   / (W(k + 1, n + 1, m) * W(k + 1, n, m + 1)))
            out[(n, m)] = lhs / rhs - 1
    return out
