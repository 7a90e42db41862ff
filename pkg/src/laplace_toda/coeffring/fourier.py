"""Smooth periodic functions of y as truncated Fourier series.

A :class:`PeriodicFunction` stores coefficients ``c_k`` for ``k = -M..M`` of

    f(y) = sum_k c_k exp(2 pi i k y / T).

Linear operations, products and derivatives are exact on the coefficient
vector.  Nonlinear maps (reciprocal, logarithm, exponential, ...) are
re-fitted by collocation on ``2M + 1`` equispaced nodes; the degree is doubled
until the fit agrees with the pointwise map on a twice-finer grid.
"""
from __future__ import annotations

import numbers

import numpy as np

from ..config import DEFAULT, Tolerances
from ..errors import BranchFailure, FitDivergence, NearVanishing

_TRIM = 1e-16


class PeriodicFunction:
    """Immutable truncated Fourier series of period ``period``."""

    __slots__ = ("period", "coeffs")

    def __init__(self, coeffs, period=1.0):
        c = np.array(coeffs, dtype=complex).ravel()
        if c.size % 2 == 0:
            raise ValueError("coefficient vector must have odd length 2M+1")
        if not period > 0:
            raise ValueError("period must be positive")
        c.setflags(write=False)
        self.coeffs = c
        self.period = float(period)

    # construction -----------------------------------------------------
    @classmethod
    def constant(cls, value, period=1.0):
        return cls([value], period)

    @classmethod
    def from_modes(cls, modes, period=1.0):
        """Build from a ``{k: c_k}`` mapping."""
        if not modes:
            return cls([0.0], period)
        deg = max(abs(int(k)) for k in modes)
        c = np.zeros(2 * deg + 1, dtype=complex)
        for k, v in modes.items():
            c[int(k) + deg] += v
        return cls(c, period)

    @classmethod
    def fit(cls, func, period=1.0, tolerances: Tolerances = DEFAULT,
            start_degree=None, check=None, polish=True, _grade=False):
        """Adaptive collocation fit of a vectorised callable ``func(y)``.

        ``check`` (optional) is called on the node values of every grid tried
        and may raise, e.g. to enforce non-vanishing.
        """
        deg = tolerances.fourier_degree if start_degree is None else start_degree
        deg = max(int(deg), 1)
        while True:
            n = 2 * deg + 1
            y = np.arange(n) * (period / n)
            vals = np.asarray(func(y), dtype=complex)
            if check is not None:
                check(vals)
            coeffs = _values_to_coeffs(vals)
            f = cls(coeffs, period)
            # residual on a twice-finer grid (offset so no node is reused)
            yf = (np.arange(2 * n) + 0.5) * (period / (2 * n))
            truth = np.asarray(func(yf), dtype=complex)
            if check is not None:
                check(truth)
            scale = max(1.0, float(np.max(np.abs(truth))))
            resid = float(np.max(np.abs(f(yf) - truth))) / scale
            if resid <= tolerances.fit_tol:
                if polish and 2 * deg <= tolerances.max_fit_degree:
                    # one extra doubling: derivatives of refits amplify the
                    # fit error by the mode number, so buy headroom cheaply
                    try:
                        finer = cls.fit(func, period, tolerances, 2 * deg, check,
                                        polish=False, _grade=True)
                    except FitDivergence:
                        finer = None
                    if finer is not None and finer[1] < resid:
                        return finer[0]
                out = f.trim(1e-15)
                return (out, resid) if _grade else out
            deg *= 2
            if deg > tolerances.max_fit_degree:
                raise FitDivergence(
                    f"collocation residual {resid:.3e} above fit_tol "
                    f"{tolerances.fit_tol:.1e} at degree cap {tolerances.max_fit_degree}")

    # basic protocol ---------------------------------------------------
    @property
    def degree(self) -> int:
        return (self.coeffs.size - 1) // 2

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        M = self.degree
        k = np.arange(-M, M + 1)
        phase = np.exp(2j * np.pi * np.multiply.outer(y, k) / self.period)
        return phase @ self.coeffs

    def __repr__(self):
        return f"PeriodicFunction(degree={self.degree}, period={self.period})"

    def coeff(self, k: int) -> complex:
        M = self.degree
        return complex(self.coeffs[k + M]) if abs(k) <= M else 0j

    def padded(self, degree: int) -> np.ndarray:
        M = self.degree
        if degree < M:
            raise ValueError("cannot pad to a smaller degree")
        out = np.zeros(2 * degree + 1, dtype=complex)
        out[degree - M: degree + M + 1] = self.coeffs
        return out

    def trim(self, rel=_TRIM) -> "PeriodicFunction":
        """Drop outer modes below ``rel * max|c_k|``."""
        c = self.coeffs
        big = np.max(np.abs(c)) if c.size else 0.0
        if big == 0.0:
            return PeriodicFunction([0.0], self.period)
        M = self.degree
        mag = np.abs(c)
        keep = M
        while keep > 0 and mag[M - keep] <= rel * big and mag[M + keep] <= rel * big:
            keep -= 1
        if keep == M:
            return self
        return PeriodicFunction(c[M - keep: M + keep + 1], self.period)

    def _check_period(self, other):
        if abs(other.period - self.period) > 1e-12 * self.period:
            raise ValueError("periods differ")

    def _coerce(self, other):
        if isinstance(other, PeriodicFunction):
            self._check_period(other)
            return other
        if isinstance(other, numbers.Number):
            return PeriodicFunction.constant(other, self.period)
        return NotImplemented

    # arithmetic -------------------------------------------------------
    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        M = max(self.degree, other.degree)
        return PeriodicFunction(self.padded(M) + other.padded(M), self.period)

    __radd__ = __add__

    def __neg__(self):
        return PeriodicFunction(-self.coeffs, self.period)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, numbers.Number):
            return PeriodicFunction(self.coeffs * other, self.period)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return PeriodicFunction(np.convolve(self.coeffs, other.coeffs), self.period)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, numbers.Number):
            return PeriodicFunction(self.coeffs / other, self.period)
        return self * reciprocal(other)

    def __rtruediv__(self, other):
        return reciprocal(self) * other

    # calculus ---------------------------------------------------------
    def derivative(self) -> "PeriodicFunction":
        M = self.degree
        k = np.arange(-M, M + 1)
        return PeriodicFunction(self.coeffs * (2j * np.pi * k / self.period), self.period)

    def mean(self) -> complex:
        return self.coeff(0)

    def mean_integral(self) -> complex:
        """Integral over one period, ``T * c_0``."""
        return self.period * self.coeff(0)

    def antiderivative(self) -> "DriftFunction":
        """Primitive vanishing at y = 0, as drift ``c_0 y`` plus periodic part."""
        M = self.degree
        k = np.arange(-M, M + 1)
        c = np.zeros_like(self.coeffs)
        nz = k != 0
        c[nz] = self.coeffs[nz] / (2j * np.pi * k[nz] / self.period)
        c[M] = -np.sum(c)
        return DriftFunction(self.coeff(0), PeriodicFunction(c, self.period))

    # comparisons ------------------------------------------------------
    def sup_distance(self, other, points=None) -> float:
        """Sup-norm of ``self - other`` sampled on a uniform grid."""
        other = self._coerce(other)
        n = points or max(64, 4 * max(self.degree, other.degree) + 1)
        y = np.arange(n) * (self.period / n)
        return float(np.max(np.abs(self(y) - other(y))))

    def sup_norm(self, points=None) -> float:
        n = points or max(64, 4 * self.degree + 1)
        y = np.arange(n) * (self.period / n)
        return float(np.max(np.abs(self(y))))

    def is_constant(self, tol) -> bool:
        return float(np.max(np.abs(self.coeffs - self.coeff(0) * (np.arange(self.coeffs.size) == self.degree)))) <= tol


class DriftFunction:
    """``slope * y + periodic(y)``: the primitive of a periodic function."""

    __slots__ = ("slope", "periodic")

    def __init__(self, slope, periodic: PeriodicFunction):
        self.slope = complex(slope)
        self.periodic = periodic

    @property
    def period(self):
        return self.periodic.period

    @classmethod
    def lift(cls, f):
        if isinstance(f, DriftFunction):
            return f
        return cls(0.0, f)

    def __call__(self, y):
        return self.slope * np.asarray(y, dtype=float) + self.periodic(y)

    def __add__(self, other):
        if isinstance(other, numbers.Number):
            return DriftFunction(self.slope, self.periodic + other)
        other = DriftFunction.lift(other)
        return DriftFunction(self.slope + other.slope, self.periodic + other.periodic)

    __radd__ = __add__

    def __neg__(self):
        return DriftFunction(-self.slope, -self.periodic)

    def __sub__(self, other):
        if isinstance(other, numbers.Number):
            return self + (-other)
        return self + (-DriftFunction.lift(other))

    def __rsub__(self, other):
        return (-self) + other

    def derivative(self) -> PeriodicFunction:
        return self.periodic.derivative() + self.slope

    def __repr__(self):
        return f"DriftFunction(slope={self.slope}, {self.periodic!r})"


# ---------------------------------------------------------------------
# collocation helpers

def _values_to_coeffs(vals: np.ndarray) -> np.ndarray:
    n = vals.size
    M = (n - 1) // 2
    c = np.fft.fft(vals) / n
    # fft order is k = 0..M, -M..-1
    return np.concatenate([c[M + 1:], c[:M + 1]])


def _start(f: PeriodicFunction, tolerances: Tolerances):
    return max(tolerances.fourier_degree, f.trim(1e-15).degree)


def _guarded(f: PeriodicFunction, tolerances: Tolerances):
    """Values of ``f`` at the nodes, refusing near-zeros."""
    def values(y):
        vals = f(y)
        worst = float(np.min(np.abs(vals)))
        if worst <= tolerances.vanish_tol:
            raise NearVanishing(f"function value {worst:.3e} within vanish_tol of zero")
        return vals
    return values


def _tol_with_cap(tolerances, max_degree):
    if max_degree is None:
        return tolerances
    return tolerances.with_(max_fit_degree=max(int(max_degree), tolerances.fourier_degree))


def reciprocal(f: PeriodicFunction, max_degree=None, tolerances: Tolerances = DEFAULT):
    """Collocation fit of ``1/f``."""
    if f.degree == 0:
        c = f.coeff(0)
        if abs(c) <= tolerances.vanish_tol:
            raise NearVanishing("constant function is zero")
        return PeriodicFunction.constant(1.0 / c, f.period)
    tol = _tol_with_cap(tolerances, max_degree)
    fv = _guarded(f, tol)
    return PeriodicFunction.fit(lambda y: 1.0 / fv(y), f.period, tol,
                                start_degree=_start(f, tol))


def log_derivative(f: PeriodicFunction, max_degree=None, tolerances: Tolerances = DEFAULT):
    """Collocation fit of ``f'/f``."""
    if f.degree == 0:
        if abs(f.coeff(0)) <= tolerances.vanish_tol:
            raise NearVanishing("constant function is zero")
        return PeriodicFunction.constant(0.0, f.period)
    df = f.derivative()
    tol = _tol_with_cap(tolerances, max_degree)
    fv = _guarded(f, tol)
    return PeriodicFunction.fit(lambda y: df(y) / fv(y), f.period, tol,
                                start_degree=_start(f, tol))


def winding_number(f: PeriodicFunction, tolerances: Tolerances = DEFAULT) -> int:
    """Winding of ``f(y)`` around 0 over one period, via the mean of ``f'/f``."""
    ld = log_derivative(f, tolerances=tolerances)
    w = ld.mean_integral() / (2j * np.pi)
    return int(round(w.real))


def nth_root(f: PeriodicFunction, n: int, tolerances: Tolerances = DEFAULT) -> PeriodicFunction:
    """A continuous periodic ``Z`` with ``Z**n == f``.

    Uses ``Z = exp(log f / n)`` with the logarithm continued along y; raises
    :class:`BranchFailure` when the winding of ``f`` is not divisible by ``n``.
    The branch is fixed by taking the principal root at ``y = 0``.
    """
    if n == 1:
        return f
    wind = winding_number(f, tolerances)
    if wind % n:
        raise BranchFailure(f"I(y) winds {wind} times around 0; no periodic {n}-th root")
    ld = log_derivative(f, tolerances=tolerances)
    # log f(y) = log f(0) + int_0^y f'/f ; integer winding part is linear in y
    prim = ld.antiderivative()
    log0 = complex(np.log(complex(f(0.0))))

    def z(y):
        return np.exp((log0 + prim(y)) / n)

    return PeriodicFunction.fit(z, f.period, tolerances, start_degree=_start(f, tolerances))


def exp(f: PeriodicFunction, tolerances: Tolerances = DEFAULT) -> PeriodicFunction:
    if f.degree == 0:
        return PeriodicFunction.constant(np.exp(f.coeff(0)), f.period)
    return PeriodicFunction.fit(lambda y: np.exp(f(y)), f.period, tolerances,
                                start_degree=_start(f, tolerances))


def log(f: PeriodicFunction, tolerances: Tolerances = DEFAULT) -> PeriodicFunction:
    """Continuous periodic logarithm; requires zero winding."""
    if f.degree == 0:
        c = f.coeff(0)
        if abs(c) <= tolerances.vanish_tol:
            raise NearVanishing("log of zero constant")
        return PeriodicFunction.constant(np.log(complex(c)), f.period)
    wind = winding_number(f, tolerances)
    if wind:
        raise BranchFailure(f"function winds {wind} times around 0; log is not periodic")
    ld = log_derivative(f, tolerances=tolerances)
    prim = ld.antiderivative()
    log0 = complex(np.log(complex(f(0.0))))
    return PeriodicFunction.fit(lambda y: log0 + prim(y), f.period, tolerances,
                                start_degree=_start(f, tolerances))


# short aliases --------------------------------------------------

def pf_eval(f: PeriodicFunction, y):
    return f(y)


def pf_derivative(f: PeriodicFunction) -> PeriodicFunction:
    return f.derivative()


def pf_mul(f: PeriodicFunction, g: PeriodicFunction) -> PeriodicFunction:
    return f * g


def pf_mean_integral(f: PeriodicFunction) -> complex:
    return f.mean_integral()


def pf_reciprocal(f, max_degree=None, tolerances: Tolerances = DEFAULT):
    return reciprocal(f, max_degree, tolerances)


def pf_log_derivative(f, max_degree=None, tolerances: Tolerances = DEFAULT):
    return log_derivative(f, max_degree, tolerances)
