"""Direct spectral problem for periodic semi-discrete operators.

The operator is taken in the normalization b = -1, d = 1:

    (L psi)_n = a_n psi_n - psi_n' + c_n psi_{n+1} + psi_{n+1}'.

For psi_{n+N} = rho psi_n the equation becomes Psi' = A(y, rho) Psi with
A = -B^{-1}(rho) C(y, rho).  Monodromies are integrated by the DOPRI5
kernel in ``kernels``.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from .coeffring.fourier import PeriodicFunction
from .config import DEFAULT, Tolerances, thread_cap
from .errors import IntegratorFailure, LaplaceTodaError, PoleAtOne
from .kernels import integrate_fourier_matrix

__all__ = [
    "FloquetSystem", "MonodromyResult", "SampleFailure", "QAsymptotics",
    "AdjointResult", "monodromy", "spectral_sample", "fiber_at_zero",
    "fiber_at_infinity", "fiber_routes", "q_asymptotics", "adjoint_check",
    "branch_point_scan", "discriminant", "winding_around", "match_multisets",
    "floquet_solution",
]


class FloquetSystem:
    """Periodic operator with b = -1, d = 1, given by a_n(y) and c_n(y)."""

    def __init__(self, a: Sequence, c: Sequence, period: Optional[float] = None):
        a, c = list(a), list(c)
        if not a or len(a) != len(c):
            raise ValueError("a and c must have the same positive length N")
        if period is None:
            found = [x.period for x in a + c if isinstance(x, PeriodicFunction)]
            period = found[0] if found else 1.0
        conv = lambda x: x if isinstance(x, PeriodicFunction) else PeriodicFunction.constant(x, period)  # noqa: E731
        self.a = tuple(conv(x) for x in a)
        self.c = tuple(conv(x) for x in c)
        self.T = float(period)
        for x in self.a + self.c:
            if abs(x.period - self.T) > 1e-12 * self.T:
                raise ValueError("all coefficients must share the period T")
        self.N = len(self.a)
        self.D = max(x.degree for x in self.a + self.c)
        self._ahat = np.array([x.padded(self.D) for x in self.a])   # [N, 2D+1]
        self._chat = np.array([x.padded(self.D) for x in self.c])

    @classmethod
    def from_operator(cls, L, tol: float = 1e-12) -> "FloquetSystem":
        """Take a SemiDiscreteOperator already in the b = -1, d = 1 form."""
        y = np.linspace(0.0, L.period, 33)
        for n in range(L.N):
            if (np.max(np.abs(L.b[n](y) + 1)) > tol or np.max(np.abs(L.d[n](y) - 1)) > tol):
                raise ValueError("operator is not normalized to b = -1, d = 1")
        if L.twist is not None:
            raise ValueError("twisted operators have no Floquet reduction")
        return cls(L.a, L.c, L.period)

    @classmethod
    def constant(cls, a: Sequence[complex], c: Sequence[complex], period: float = 1.0):
        return cls(list(a), list(c), period)

    def __repr__(self):
        return f"FloquetSystem(N={self.N}, T={self.T}, degree={self.D})"

    # matrices -----------------------------------------------------------
    def B(self, rho) -> np.ndarray:
        N = self.N
        if N == 1:
            return np.array([[rho - 1.0]], dtype=complex)
        B = -np.eye(N, dtype=complex) + np.eye(N, k=1)
        B[N - 1, 0] = rho
        return B

    def B_inv(self, rho) -> np.ndarray:
        """(1/(rho - 1)) [rho for j < i, 1 for j >= i]."""
        N = self.N
        i, j = np.indices((N, N))
        return np.where(j < i, rho, 1.0).astype(complex) / (rho - 1.0)

    def C_modes(self, rho) -> np.ndarray:
        """Fourier coefficients of C(y, rho), shape [2D+1, N, N]."""
        N, K = self.N, 2 * self.D + 1
        C = np.zeros((K, N, N), dtype=complex)
        if N == 1:
            C[:, 0, 0] = self._ahat[0] + rho * self._chat[0]
            return C
        for n in range(N):
            C[:, n, n] = self._ahat[n]
            if n + 1 < N:
                C[:, n, n + 1] = self._chat[n]
        C[:, N - 1, 0] = rho * self._chat[N - 1]
        return C

    def C(self, y, rho) -> np.ndarray:
        return _eval_modes(self.C_modes(rho), self.T, y)

    def A_modes(self, rho) -> np.ndarray:
        return -np.einsum("ij,kjl->kil", self.B_inv(rho), self.C_modes(rho))

    def A(self, y, rho) -> np.ndarray:
        return _eval_modes(self.A_modes(rho), self.T, y)

    def A_inf_modes(self) -> np.ndarray:
        """Limit of A(y, rho) as rho -> infinity (t = 1/rho at t = 0)."""
        N, K = self.N, 2 * self.D + 1
        if N == 1:
            return -self._chat[0].reshape(K, 1, 1).astype(complex)
        C = self.C_modes(0.0)
        i, j = np.indices((N, N))
        lower = np.where(j < i, 1.0, 0.0)
        A = -np.einsum("ij,kjl->kil", lower, C)
        # rho c_{N-1} in the corner meets the 1/(rho - 1) column of B^{-1}
        A[:, :, 0] -= self._chat[N - 1][:, None]
        return A

    def A_adjoint_modes(self, rho) -> np.ndarray:
        """(B^{-1})^T C^T."""
        return np.einsum("ji,klj->kil", self.B_inv(rho), self.C_modes(rho))

    def trace_integral(self, rho) -> complex:
        """int_0^T tr A(y, rho) dy (Liouville: log det of the monodromy)."""
        A0 = self.A_modes(rho)[self.D]
        return complex(np.trace(A0)) * self.T

    def mean_integrals(self) -> Tuple[np.ndarray, np.ndarray]:
        return (np.array([x.coeff(0) * self.T for x in self.a]),
                np.array([x.coeff(0) * self.T for x in self.c]))


def _eval_modes(modes: np.ndarray, T: float, y) -> np.ndarray:
    D = (modes.shape[0] - 1) // 2
    ph = np.exp(2j * np.pi * np.arange(-D, D + 1) * y / T)
    return np.tensordot(ph, modes, axes=1)


@dataclass
class MonodromyResult:
    rho: complex
    phi: np.ndarray
    eigenvalues: List[complex]
    err_estimate: float
    steps: int = 0

    @property
    def det(self) -> complex:
        return complex(np.linalg.det(self.phi))


@dataclass
class SampleFailure:
    rho: complex
    error: str


def _integrate(modes, T, y0, y1, X0, tol):
    X, err, acc, rej, status = integrate_fourier_matrix(
        np.ascontiguousarray(modes), T, float(y0), float(y1),
        np.asarray(X0, dtype=complex), tol, tol)
    if status == 1:
        raise IntegratorFailure("step size underflow", y=None, h=None)
    if status == 2:
        raise IntegratorFailure("step budget exhausted")
    return X, err, acc


def _guard(sys: FloquetSystem, rho, tol: Tolerances):
    if abs(rho - 1.0) < tol.pole_guard:
        raise PoleAtOne(f"|rho - 1| = {abs(rho - 1):.3e} below pole_guard {tol.pole_guard:.1e}")


def monodromy(sys: FloquetSystem, rho, tol: Optional[float] = None,
              tolerances: Tolerances = DEFAULT, periods: int = 1) -> MonodromyResult:
    """Phi(periods * T, 0, rho) by adaptive integration from the identity."""
    rho = complex(rho)
    _guard(sys, rho, tolerances)
    tol = tolerances.tol if tol is None else tol
    if tol <= 0:
        raise ValueError("tol must be positive")
    phi, err, steps = _integrate(sys.A_modes(rho), sys.T, 0.0, periods * sys.T,
                                 np.eye(sys.N), tol)
    return MonodromyResult(rho, phi, list(np.linalg.eigvals(phi)), err, steps)


def floquet_solution(sys: FloquetSystem, rho, v, y1: float, tol: Optional[float] = None,
                     tolerances: Tolerances = DEFAULT) -> np.ndarray:
    """Psi(y1) for the solution with Psi(0) = v."""
    rho = complex(rho)
    _guard(sys, rho, tolerances)
    tol = tolerances.tol if tol is None else tol
    X, _, _ = _integrate(sys.A_modes(rho), sys.T, 0.0, y1,
                         np.asarray(v, dtype=complex).reshape(sys.N, 1), tol)
    return X[:, 0]


def spectral_sample(sys: FloquetSystem, rho_grid, tol: Optional[float] = None,
                    tolerances: Tolerances = DEFAULT, threads: Optional[int] = None):
    """Monodromy at each grid point, in grid order.  Failures are returned
    as SampleFailure entries instead of being raised."""
    def one(rho):
        try:
            return monodromy(sys, rho, tol, tolerances)
        except LaplaceTodaError as exc:
            return SampleFailure(complex(rho), f"{type(exc).__name__}: {exc}")

    grid = list(rho_grid)
    workers = thread_cap(threads)
    if workers <= 1 or len(grid) <= 1:
        return [one(r) for r in grid]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, grid))


def match_multisets(x, y) -> Tuple[np.ndarray, float]:
    """Optimal pairing of two equal-size multisets; returns (perm, max
    relative mismatch) with x[perm[i]] paired to y[i]."""
    x, y = np.asarray(x, dtype=complex), np.asarray(y, dtype=complex)
    cost = np.abs(x[:, None] - y[None, :]) / np.maximum(np.abs(y)[None, :], 1e-300)
    rows, cols = linear_sum_assignment(cost)
    perm = np.empty(len(y), dtype=int)
    perm[cols] = rows
    return perm, float(cost[rows, cols].max()) if len(y) else 0.0


def fiber_at_zero(sys: FloquetSystem) -> List[complex]:
    """P^+_i multipliers e^{int a_{i-1}}, i = 1..N."""
    ia, _ = sys.mean_integrals()
    return [complex(np.exp(v)) for v in ia]


def fiber_at_infinity(sys: FloquetSystem) -> List[complex]:
    """P^-_i multipliers e^{-int c_{N-i}}, i = 1..N."""
    _, ic = sys.mean_integrals()
    N = sys.N
    return [complex(np.exp(-ic[N - i])) for i in range(1, N + 1)]


@dataclass
class FiberRoutes:
    closed_form: List[complex]
    integrated: List[complex]
    mismatch: float


def fiber_routes(sys: FloquetSystem, which: str = "zero", tol: Optional[float] = None,
                 tolerances: Tolerances = DEFAULT) -> FiberRoutes:
    """Closed-form fiber against the integrated one (rho = 0, or the
    analytic rho -> infinity limit of A)."""
    tol = tolerances.tol if tol is None else tol
    if which == "zero":
        closed = fiber_at_zero(sys)
        phi = monodromy(sys, 0.0, tol, tolerances).phi
    elif which == "infinity":
        closed = fiber_at_infinity(sys)
        phi, _, _ = _integrate(sys.A_inf_modes(), sys.T, 0.0, sys.T, np.eye(sys.N), tol)
    else:
        raise ValueError("which must be 'zero' or 'infinity'")
    eig = np.linalg.eigvals(phi)
    perm, mis = match_multisets(eig, closed)
    return FiberRoutes(closed, [complex(v) for v in eig[perm]], mis)


@dataclass
class QAsymptotics:
    """Behaviour near rho = 1.  ``samples`` holds (t, log mu_3) pairs since
    mu_3 itself over- or underflows; ``near_one`` the other N - 1
    multipliers for each t."""

    K: complex
    M_rate: complex
    M_expected: complex
    samples: List[Tuple[float, complex]] = field(default_factory=list)
    near_one: List[List[complex]] = field(default_factory=list)

    @property
    def relative_error(self) -> float:
        return abs(self.M_rate - self.M_expected) / max(abs(self.M_expected), 1e-300)


def q_asymptotics(sys: FloquetSystem, t_list: Sequence[float], tol: Optional[float] = None,
                  tolerances: Tolerances = DEFAULT, fit_degree: int = 3,
                  fit_span: float = 10 ** 1.5) -> QAsymptotics:
    """Fit log mu_3(t) ~ M / t at rho = 1 + t.

    The monodromy is integrated in the direction in which the 1/t mode
    decays; the N - 1 bounded multipliers are read off directly and
    log mu_3 = int tr A - sum log mu_bounded (Liouville).  The polynomial
    fit of t log mu_3 uses the samples with t <= fit_span * min(t) (at
    least fit_degree + 1 of them): larger t are outside the regime where
    mu_3 dominates whenever M is small.
    """
    t_list = [float(t) for t in t_list]
    if any(not 0 < t < 0.5 for t in t_list):
        raise ValueError("t values must lie in (0, 0.5)")
    if any(t2 >= t1 for t1, t2 in zip(t_list, t_list[1:])):
        raise ValueError("t values must be strictly decreasing")
    tol = tolerances.tol if tol is None else tol
    ia, ic = sys.mean_integrals()
    M_expected = complex(-(ia.sum() + ic.sum()))
    K = complex(-sum(x(0.0) for x in sys.a + sys.c))
    samples, near = [], []
    for t in t_list:
        rho = 1.0 + t
        lam = sys.trace_integral(rho)
        backward = lam.real > 0
        y0, y1 = (sys.T, 0.0) if backward else (0.0, sys.T)
        try:
            X, _, _ = _integrate(sys.A_modes(rho), sys.T, y0, y1, np.eye(sys.N), tol)
        except IntegratorFailure as exc:
            raise IntegratorFailure(f"t = {t:g}: {exc}; smallest achieved t = "
                                    f"{samples[-1][0] if samples else None}") from exc
        eig = np.linalg.eigvals(X)
        if backward:
            eig = 1.0 / eig
        # the N - 1 multipliers closest to 1 on a log scale stay bounded
        order = np.argsort(np.abs(np.log(eig.astype(complex))))
        bounded = eig[order[: sys.N - 1]]
        log_mu3 = lam - np.sum(np.log(bounded.astype(complex)))
        samples.append((t, complex(log_mu3)))
        near.append([complex(v) for v in bounded])
    ts = np.array([s[0] for s in samples])
    ys = np.array([s[0] * s[1] for s in samples])
    keep = np.flatnonzero(ts <= fit_span * ts.min())
    if keep.size < fit_degree + 1:
        keep = np.argsort(ts)[: fit_degree + 1]
    ts, ys = ts[keep], ys[keep]
    deg = min(fit_degree, len(ts) - 1)
    M = complex(np.polynomial.polynomial.polyfit(ts, ys, deg)[0]) if deg >= 0 else 0j
    return QAsymptotics(K, M, M_expected, samples, near)


@dataclass
class AdjointResult:
    residual: float
    reciprocity: float

    def __float__(self):
        return self.residual


def adjoint_check(sys: FloquetSystem, rho, tol: Optional[float] = None,
                  tolerances: Tolerances = DEFAULT) -> AdjointResult:
    """||B^{-1} (Phi^+)^T B Phi - I|| and the reciprocal-eigenvalue mismatch."""
    rho = complex(rho)
    _guard(sys, rho, tolerances)
    tol = tolerances.tol if tol is None else tol
    phi = monodromy(sys, rho, tol, tolerances).phi
    phip, _, _ = _integrate(sys.A_adjoint_modes(rho), sys.T, 0.0, sys.T, np.eye(sys.N), tol)
    B = sys.B(rho)
    Q = sys.B_inv(rho) @ phip.T @ B @ phi
    residual = float(np.max(np.abs(Q - np.eye(sys.N))))
    _, mis = match_multisets(np.linalg.eigvals(phip), 1.0 / np.linalg.eigvals(phi))
    return AdjointResult(residual, mis)


# ---------------------------------------------------------------------
# branch points

def _charpoly(M: np.ndarray) -> np.ndarray:
    """Monic characteristic polynomial, highest degree first (Faddeev-LeVerrier)."""
    n = M.shape[0]
    coeffs = [1.0 + 0j]
    Mk = np.zeros_like(M)
    I = np.eye(n, dtype=complex)
    for k in range(1, n + 1):
        Mk = M @ (Mk + coeffs[-1] * I)
        coeffs.append(-np.trace(Mk) / k)
    return np.array(coeffs)


def _sylvester_det(p: np.ndarray, q: np.ndarray) -> complex:
    m, n = len(p) - 1, len(q) - 1
    S = np.zeros((m + n, m + n), dtype=complex)
    for i in range(n):
        S[i, i:i + m + 1] = p
    for i in range(m):
        S[n + i, i:i + n + 1] = q
    return complex(np.linalg.det(S))


def discriminant(phi: np.ndarray) -> complex:
    """Discriminant of det(Phi - mu I) as a polynomial in mu."""
    n = phi.shape[0]
    if n == 1:
        return 1.0 + 0j
    if n == 2:
        tr, det = np.trace(phi), np.linalg.det(phi)
        return complex(tr * tr - 4 * det)
    p = _charpoly(phi)
    dp = p[:-1] * np.arange(n, 0, -1)
    return (-1) ** (n * (n - 1) // 2) * _sylvester_det(p, dp)


def _disc_at(sys, rho, tol, tolerances):
    return discriminant(monodromy(sys, rho, tol, tolerances).phi)


def _winding(values: np.ndarray) -> int:
    steps = np.angle(np.roll(values, -1) / values)
    return int(round(float(np.sum(steps)) / (2 * np.pi)))


def winding_around(sys: FloquetSystem, center, radius: float, samples: int = 64,
                   tol: Optional[float] = None, tolerances: Tolerances = DEFAULT) -> int:
    """Winding number of the discriminant on a circle: the zero count inside."""
    z = center + radius * np.exp(2j * np.pi * np.arange(samples) / samples)
    return _winding(np.array([_disc_at(sys, r, tol, tolerances) for r in z]))


def branch_point_scan(sys: FloquetSystem, region: Tuple[float, float, float, float],
                      grid_density: int = 24, tol: Optional[float] = None,
                      tolerances: Tolerances = DEFAULT, refine_tol: float = 1e-9,
                      edge_samples: int = 4) -> List[complex]:
    """Zeros of the monodromy discriminant in [x0, x1] x [y0, y1].

    Cells of a grid_density x grid_density mesh are tested with the
    argument principle; cells holding zeros are refined by multiplicity-
    aware Newton steps, with quadrisection as the fallback.  A zero of
    order k is reported k times.
    """
    x0, x1, y0, y1 = region
    if sys.N == 1:
        return []
    cache = {}

    def F(z):
        key = (round(z.real, 14), round(z.imag, 14))
        if key not in cache:
            cache[key] = _disc_at(sys, z, tol, tolerances)
        return cache[key]

    def cell_winding(a, b, c, d):
        pts = []
        corners = [complex(a, c), complex(b, c), complex(b, d), complex(a, d)]
        for p, q in zip(corners, corners[1:] + corners[:1]):
            for s in range(edge_samples):
                pts.append(p + (q - p) * s / edge_samples)
        vals = np.array([F(z) for z in pts])
        if np.any(vals == 0):
            return None
        return _winding(vals)

    def newton(z, m, box):
        a, b, c, d = box
        h = 1e-6 * max(b - a, d - c, 1e-3)
        for _ in range(60):
            f = _disc_at(sys, z, tol, tolerances)
            if f == 0:
                return z
            df = (_disc_at(sys, z + h, tol, tolerances) - _disc_at(sys, z - h, tol, tolerances)) / (2 * h)
            if df == 0:
                return None
            step = m * f / df
            z = z - step
            pad = 0.5 * max(b - a, d - c)
            if not (a - pad <= z.real <= b + pad and c - pad <= z.imag <= d + pad):
                return None
            if abs(step) < refine_tol:
                return z
            h = max(min(h, abs(step)), 1e-9)
        return None

    found: List[complex] = []

    def resolve(box, k, depth=0):
        a, b, c, d = box
        centre = complex((a + b) / 2, (c + d) / 2)
        z = newton(centre, k, box)
        if z is not None and a <= z.real <= b and c <= z.imag <= d:
            found.extend([z] * k)
            return
        if depth > 12:
            found.extend([centre] * k)
            return
        mx, my = (a + b) / 2, (c + d) / 2
        for sub in ((a, mx, c, my), (mx, b, c, my), (a, mx, my, d), (mx, b, my, d)):
            w = cell_winding(*sub)
            if w:
                resolve(sub, w, depth + 1)

    xs = np.linspace(x0, x1, grid_density + 1)
    ys = np.linspace(y0, y1, grid_density + 1)
    for i in range(grid_density):
        for j in range(grid_density):
            box = (xs[i], xs[i + 1], ys[j], ys[j + 1])
            if abs(complex((box[0] + box[1]) / 2, (box[2] + box[3]) / 2) - 1) < tolerances.pole_guard + max(box[1] - box[0], box[3] - box[2]):
                raise PoleAtOne("scan region must exclude the disk around rho = 1")
            w = cell_winding(*box)
            if w:
                resolve(box, w)
    return sorted(found, key=lambda z: (round(z.real, 8), round(z.imag, 8)))
