"""Exact direct spectral problem for periodic discrete operators.

Floquet solutions with multipliers (nu1, mu1) in basis one, or (nu2, mu2) in
basis two, reduce L psi = 0 to a finite linear system whose determinant is
the spectral polynomial.  Everything here is exact except the numeric curve
points used for the psi ratios.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

import numpy as np

from .coeffring.bipoly import (BivariatePolynomial, cofactor, evaluate_matrix,
                               poly_det, univariate)
from .config import DEFAULT, Tolerances
from .disc import (COEFFS, DiscreteOperator, PeriodMatrix, column_products,
                   laplace12_pp, row_products, shift1, shift2)
from .errors import MismatchReport, OffCurve, SingularPoint, ZeroProduct

__all__ = [
    "FloquetMatrix", "SpectralCurvePoly", "SpectralPoints", "build_M",
    "build_Mhat", "spectral_poly", "consistency_R_Rhat", "spectral_points",
    "psi_ratios", "adjoint_operator", "adjoint_reciprocity",
    "laplace_spectral_invariance", "corner_products", "newton_violations",
    "curve_points", "floquet_psi",
]

# (coefficient, dn, dm) for the four terms of (L psi)_{n,m}
_STENCIL = (("a", 0, 0), ("b", 1, 0), ("c", 0, 1), ("d", 1, 1))


@dataclass(frozen=True)
class FloquetMatrix:
    """Matrix of L psi = 0 on a fundamental box.

    ``sites[k]`` is the lattice site of column (and row) k; ``slots[r]``
    maps each coefficient name to its (column, monomial exponent) in row r.
    """

    entries: Tuple[Tuple[BivariatePolynomial, ...], ...]
    sites: Tuple[Tuple[int, int], ...]
    slots: Tuple[Dict[str, Tuple[int, Tuple[int, int]]], ...]
    basis: int

    @property
    def size(self) -> int:
        return len(self.entries)

    def evaluate(self, nu, mu) -> np.ndarray:
        return evaluate_matrix(self.entries, nu, mu)


def _build(L: DiscreteOperator, basis: int) -> FloquetMatrix:
    nf = L.nf
    if basis == 1:
        sites = [(i, j) for j in range(nf.delta) for i in range(nf.dt)]
        reduce = nf.reduce1
    else:
        sites = [(i, j) for i in range(nf.eps) for j in range(nf.et)]
        reduce = nf.reduce2
    index = {s: k for k, s in enumerate(sites)}
    size = len(sites)
    rows = []
    slots = []
    for (n, m) in sites:
        terms: List[Dict[Tuple[int, int], Fraction]] = [dict() for _ in range(size)]
        slot = {}
        for name, dn, dm in _STENCIL:
            i, j, al, be = reduce(n + dn, m + dm)
            col = index[(i, j)]
            coef = L.coef(name, n, m)
            terms[col][(al, be)] = terms[col].get((al, be), 0) + coef
            slot[name] = (col, (al, be))
        rows.append(tuple(BivariatePolynomial(t) for t in terms))
        slots.append(slot)
    return FloquetMatrix(tuple(rows), tuple(sites), tuple(slots), basis)


def build_M(L: DiscreteOperator) -> FloquetMatrix:
    """Matrix in (nu1, mu1); row and column i + j*dt hold site (i, j)."""
    return _build(L, 1)


def build_Mhat(L: DiscreteOperator) -> FloquetMatrix:
    """Matrix in (nu2, mu2); row and column i*et + j hold site (i, j)."""
    return _build(L, 2)


def corner_products(L: DiscreteOperator) -> Dict[str, BivariatePolynomial]:
    """The four boundary products predicted for the spectral polynomials."""
    nf = L.nf
    A, B, C, D = (column_products(L, k) for k in COEFFS)
    Ar, Br, Cr, Dr = (row_products(L, k) for k in COEFFS)
    s1 = (-1) ** nf.dt
    s2 = (-1) ** nf.et
    one = BivariatePolynomial.constant(1)
    mu0, muT, nu0, nuT = one, one, one, one
    for j in range(nf.delta):
        mu0 = mu0 * univariate({1: B[j], 0: -s1 * A[j]}, 0)
        muT = muT * univariate({1: D[j], 0: -s1 * C[j]}, 0)
    for i in range(nf.eps):
        nu0 = nu0 * univariate({1: Cr[i], 0: -s2 * Ar[i]}, 1)
        nuT = nuT * univariate({1: Dr[i], 0: -s2 * Br[i]}, 1)
    return {"mu1^0": mu0, "mu1^top": muT.shift(nf.zeta, 0),
            "nu2^0": nu0, "nu2^top": nuT.shift(0, nf.xi)}


def newton_violations(R: BivariatePolynomial, nf) -> List[Tuple[int, int]]:
    """Support exponents of R(nu1, mu1) outside the predicted polygon."""
    bad = []
    for (i, j) in R.support():
        ok = (0 <= i <= nf.delta + nf.zeta and 0 <= j <= nf.dt
              and 0 <= i * nf.Dt - nf.zetat * j <= nf.et
              and 0 <= nf.xit * i + nf.kappa * j <= nf.eps + nf.xi)
        if not ok:
            bad.append((i, j))
    return bad


@dataclass(frozen=True)
class SpectralCurvePoly:
    R: BivariatePolynomial
    Rhat: BivariatePolynomial
    genus: int
    support: frozenset
    corners: Dict[str, bool]
    newton_ok: bool

    @property
    def normalized(self) -> BivariatePolynomial:
        return self.R.normalized()


def _corner_checks(L, R, Rhat) -> Dict[str, bool]:
    nf = L.nf
    pred = corner_products(L)
    got = {
        "mu1^0": univariate(R.slice(1, 0), 0),
        "mu1^top": univariate(R.slice(1, nf.dt), 0),
        "nu2^0": univariate(Rhat.slice(0, 0), 1),
        "nu2^top": univariate(Rhat.slice(0, nf.et), 1),
    }
    # the determinant fixes the sign convention only up to a global unit
    out = {}
    for k in pred:
        r = got[k].monomial_ratio(pred[k])
        out[k] = r is not None and r[:2] == (0, 0) and abs(r[2]) == 1
    return out


def spectral_poly(L: DiscreteOperator) -> SpectralCurvePoly:
    M = build_M(L)
    Mh = build_Mhat(L)
    R = poly_det(M.entries)
    Rhat = poly_det(Mh.entries)
    corners = _corner_checks(L, R, Rhat)
    return SpectralCurvePoly(R, Rhat, L.nf.genus, frozenset(R.support()),
                             corners, not newton_violations(R, L.nf))


def consistency_R_Rhat(L: DiscreteOperator, R: Optional[BivariatePolynomial] = None,
                       Rhat: Optional[BivariatePolynomial] = None):
    """Match R after the multiplier substitution against R-hat.

    Returns ``(p, q, s)`` with R(nu1(nu2, mu2), mu1(nu2, mu2)) equal to
    ``s * nu2^p mu2^q * Rhat(nu2, mu2)``.
    """
    nf = L.nf
    if R is None:
        R = poly_det(build_M(L).entries)
    if Rhat is None:
        Rhat = poly_det(build_Mhat(L).entries)
    sub = R.substitute_monomials((nf.Dt, nf.xit), (-nf.zetat, nf.kappa))
    found = sub.monomial_ratio(Rhat)
    if found is None:
        ks = sorted(set(sub.support()) ^ set(Rhat.support()))
        detail = ks[0] if ks else min(sub.support())
        raise MismatchReport("substituted R does not match R-hat",
                             {"first_difference": detail,
                              "terms_R": len(sub.terms),
                              "terms_Rhat": len(Rhat.terms)})
    return found


@dataclass(frozen=True)
class SpectralPoints:
    """Marked points at the ends of the curve.

    ``Pplus[j]`` and ``Pminus[j]`` are nu1 values at mu1 = 0 and infinity
    for column j mod delta; ``Qplus[i]`` and ``Qminus[i]`` are mu2 values at
    nu2 = 0 and infinity for row i mod eps.
    """

    Pplus: Tuple[Fraction, ...]
    Pminus: Tuple[Fraction, ...]
    Qplus: Tuple[Fraction, ...]
    Qminus: Tuple[Fraction, ...]

    def multiplicities(self) -> Dict[str, Dict[Fraction, int]]:
        out = {}
        for name in ("Pplus", "Pminus", "Qplus", "Qminus"):
            counts: Dict[Fraction, int] = {}
            for v in getattr(self, name):
                counts[v] = counts.get(v, 0) + 1
            out[name] = counts
        return out

    def coincident(self) -> Dict[str, bool]:
        return {k: len(v) == 1 for k, v in self.multiplicities().items()}


def spectral_points(L: DiscreteOperator) -> SpectralPoints:
    nf = L.nf
    A, B, C, D = (column_products(L, k) for k in COEFFS)
    Ar, Br, Cr, Dr = (row_products(L, k) for k in COEFFS)
    if any(x == 0 for x in B + D + Cr + Dr):
        raise ZeroProduct("vanishing product in a spectral point denominator")
    s1 = (-1) ** nf.dt
    s2 = (-1) ** nf.et
    return SpectralPoints(
        tuple(s1 * a / b for a, b in zip(A, B)),
        tuple(s1 * c / d for c, d in zip(C, D)),
        tuple(s2 * a / c for a, c in zip(Ar, Cr)),
        tuple(s2 * b / d for b, d in zip(Br, Dr)),
    )


def curve_points(R: BivariatePolynomial, nu) -> List[complex]:
    """Roots mu of R(nu, mu) = 0 via the companion matrix of the slice."""
    coeffs: Dict[int, complex] = {}
    for (i, j), c in R.terms.items():
        coeffs[j] = coeffs.get(j, 0) + complex(float(c)) * complex(nu) ** i
    lo, hi = min(coeffs), max(coeffs)
    poly = [coeffs.get(k, 0) for k in range(hi, lo - 1, -1)]
    return [complex(r) for r in np.roots(poly)]


def psi_ratios(L: DiscreteOperator, point, site: Tuple[int, int] = (0, 0),
               tol: Tolerances = DEFAULT, M: Optional[FloquetMatrix] = None,
               R: Optional[BivariatePolynomial] = None):
    """(psi_{n+1,m}/psi_{n,m}, psi_{n,m+1}/psi_{n,m}) at a curve point.

    Uses derivatives of det M with respect to the coefficients, each of
    which is a monomial times a cofactor of M.
    """
    M = M or build_M(L)
    R = R if R is not None else poly_det(M.entries)
    nu, mu = point
    scale = max(1.0, max(abs(complex(float(c)) * complex(nu) ** i * complex(mu) ** j)
                         for (i, j), c in R.terms.items()))
    if abs(R(complex(nu), complex(mu))) > tol.curve_tol * scale:
        raise OffCurve(f"|R| = {abs(R(complex(nu), complex(mu))):.3e} at {point}")
    i, j, _, _ = L.nf.reduce1(*site)
    row = M.sites.index((i, j))
    slot = M.slots[row]

    def dR(name):
        col, (al, be) = slot[name]
        return complex(nu) ** al * complex(mu) ** be * complex(
            cofactor(M.entries, row, col)(complex(nu), complex(mu)))

    da = dR("a")
    if abs(da) < tol.vanish_tol * scale:
        raise SingularPoint("derivative with respect to a vanishes")
    return dR("b") / da, dR("c") / da


def floquet_psi(L: DiscreteOperator, point, M: Optional[FloquetMatrix] = None):
    """Null vector of M at a curve point as a function psi(n, m)."""
    M = M or build_M(L)
    nu, mu = complex(point[0]), complex(point[1])
    mat = M.evaluate(nu, mu)
    _, _, vh = np.linalg.svd(mat)
    vec = vh[-1].conj()
    k0 = int(np.argmax(np.abs(vec)))
    vec = vec / vec[k0]
    index = {s: k for k, s in enumerate(M.sites)}
    nf = L.nf

    def psi(n, m):
        i, j, al, be = nf.reduce1(n, m)
        return vec[index[(i, j)]] * nu ** al * mu ** be

    return psi


def adjoint_operator(L: DiscreteOperator) -> DiscreteOperator:
    """Formal adjoint rewritten with forward shifts.

    a+ = d, b+ = c_{n+1,m}, c+ = b_{n,m+1}, d+ = a_{n+1,m+1}; its Floquet
    multipliers are the inverses of those of L.
    """
    return DiscreteOperator.from_function(
        L.periods, lambda n, m: (L.coef("d", n, m), L.coef("c", n + 1, m),
                                 L.coef("b", n, m + 1), L.coef("a", n + 1, m + 1)))


def _reciprocal(R: BivariatePolynomial) -> BivariatePolynomial:
    """R(1/nu, 1/mu) with exponents shifted back to be nonnegative."""
    inv = R.substitute_monomials((-1, 0), (0, -1))
    lo_i = min(i for i, _ in inv.support())
    lo_j = min(j for _, j in inv.support())
    return inv.shift(-lo_i, -lo_j)


def adjoint_reciprocity(L: DiscreteOperator,
                        Lplus: Optional[DiscreteOperator] = None):
    """Return (p, q, s) with R+(nu, mu) = s nu^p mu^q R(1/nu, 1/mu)."""
    Lplus = Lplus or adjoint_operator(L)
    R = poly_det(build_M(L).entries)
    Rp = poly_det(build_M(Lplus).entries)
    inv = R.substitute_monomials((-1, 0), (0, -1))
    found = Rp.monomial_ratio(inv)
    if found is None:
        raise MismatchReport("adjoint curve is not reciprocal",
                             {"terms_R": len(R.terms), "terms_Rplus": len(Rp.terms)})
    return found


@dataclass
class InvarianceReport:
    ok: bool = True
    rows: Dict[str, bool] = field(default_factory=dict)

    def record(self, name: str, value: bool):
        self.rows[name] = bool(value)
        self.ok = self.ok and bool(value)


def _rot(seq, k):
    """Sequence s with s'[i] = s[i + k] (cyclic)."""
    n = len(seq)
    return tuple(seq[(i + k) % n] for i in range(n))


# index shift of each family: new[i] == old[i + shift]
_TABLE = {
    "laplace": {"Pplus": 0, "Pminus": 1, "Qplus": 0, "Qminus": -1},
    "S1": {"Pplus": 0, "Pminus": 0, "Qplus": -1, "Qminus": -1},
    "S2": {"Pplus": -1, "Pminus": -1, "Qplus": 0, "Qminus": 0},
}


def laplace_spectral_invariance(L: DiscreteOperator, strict: bool = True
                                ) -> InvarianceReport:
    """Check curve invariance and marked-point permutations.

    For each of the first-type transformation and the two shifts the
    spectral polynomial must agree up to a monomial and a scalar, and each
    point family of the image must be the cyclically re-indexed family of
    L as listed in ``_TABLE``.
    """
    R0 = poly_det(build_M(L).entries)
    P0 = spectral_points(L)
    report = InvarianceReport()
    for name, op in (("laplace", laplace12_pp), ("S1", shift1), ("S2", shift2)):
        L1 = op(L)
        R1 = poly_det(build_M(L1).entries)
        report.record(f"{name}:curve", R1.monomial_ratio(R0) is not None)
        P1 = spectral_points(L1)
        for fam, k in _TABLE[name].items():
            report.record(f"{name}:{fam}", getattr(P1, fam) == _rot(getattr(P0, fam), k))
    if strict and not report.ok:
        bad = [k for k, v in report.rows.items() if not v]
        raise MismatchReport(f"violated rows: {', '.join(bad)}", report.rows)
    return report
