"""Sparse exact polynomials in two variables and their determinants.

Exponents may be negative (Laurent monomials appear when Floquet multipliers
are converted between period bases), coefficients are
:class:`fractions.Fraction`.
"""
from __future__ import annotations

import numbers
from fractions import Fraction

Rational = Fraction


def as_rational(x) -> Fraction:
    """Exact conversion; strings like ``"3/4"`` are accepted, floats are not."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("bool is not a rational")
    if isinstance(x, (int, str)):
        return Fraction(x)
    if isinstance(x, numbers.Rational):
        return Fraction(x.numerator, x.denominator)
    raise TypeError(f"cannot convert {type(x).__name__} exactly to a rational")


class BivariatePolynomial:
    """Immutable sparse polynomial ``sum r[i,j] nu**i mu**j``."""

    __slots__ = ("terms", "_hash")
    variables = ("nu", "mu")

    def __init__(self, terms=None):
        clean = {}
        if terms:
            for (i, j), c in terms.items():
                c = as_rational(c)
                if c:
                    key = (int(i), int(j))
                    clean[key] = clean.get(key, 0) + c
                    if not clean[key]:
                        del clean[key]
        self.terms = clean
        self._hash = None

    # constructors -----------------------------------------------------
    @classmethod
    def constant(cls, c):
        return cls({(0, 0): c})

    @classmethod
    def monomial(cls, i, j, c=1):
        return cls({(i, j): c})

    @classmethod
    def nu(cls):
        return cls({(1, 0): 1})

    @classmethod
    def mu(cls):
        return cls({(0, 1): 1})

    # protocol -----------------------------------------------------------
    def __bool__(self):
        return bool(self.terms)

    def is_zero(self):
        return not self.terms

    def __eq__(self, other):
        if isinstance(other, BivariatePolynomial):
            return self.terms == other.terms
        if isinstance(other, numbers.Rational):
            return self.terms == BivariatePolynomial.constant(other).terms
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for (i, j), c in sorted(self.terms.items()):
            mono = "*".join(
                s for s in (
                    "" if i == 0 else ("nu" if i == 1 else f"nu^{i}"),
                    "" if j == 0 else ("mu" if j == 1 else f"mu^{j}"),
                ) if s)
            parts.append(f"({c})" + (f"*{mono}" if mono else ""))
        return " + ".join(parts)

    def coefficient(self, i, j) -> Fraction:
        return self.terms.get((i, j), Fraction(0))

    def support(self):
        return set(self.terms)

    def degree(self, var: int) -> int:
        """Largest exponent of variable 0 (nu) or 1 (mu); -inf-safe for zero."""
        if not self.terms:
            return -1
        return max(k[var] for k in self.terms)

    def low_degree(self, var: int) -> int:
        if not self.terms:
            return 0
        return min(k[var] for k in self.terms)

    # arithmetic -----------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, BivariatePolynomial):
            return other
        if isinstance(other, (numbers.Rational, str)):
            return BivariatePolynomial.constant(as_rational(other))
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self.terms)
        for k, c in other.terms.items():
            v = out.get(k, 0) + c
            if v:
                out[k] = v
            else:
                out.pop(k, None)
        return _raw(out)

    __radd__ = __add__

    def __neg__(self):
        return _raw({k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, numbers.Rational):
            c = as_rational(other)
            if not c:
                return _raw({})
            return _raw({k: v * c for k, v in self.terms.items()})
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = {}
        for (i1, j1), c1 in self.terms.items():
            for (i2, j2), c2 in other.terms.items():
                k = (i1 + i2, j1 + j2)
                v = out.get(k, 0) + c1 * c2
                if v:
                    out[k] = v
                else:
                    out.pop(k, None)
        return _raw(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            if len(self.terms) != 1:
                raise ValueError("negative powers only for monomials")
            ((i, j), c), = self.terms.items()
            return _raw({(i * n, j * n): c ** n})
        out = BivariatePolynomial.constant(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def shift(self, di: int, dj: int) -> "BivariatePolynomial":
        """Multiply by the monomial ``nu**di mu**dj``."""
        return _raw({(i + di, j + dj): c for (i, j), c in self.terms.items()})

    def leading(self):
        """Leading term in lexicographic order (nu first)."""
        k = max(self.terms)
        return k, self.terms[k]

    def exact_div(self, other: "BivariatePolynomial") -> "BivariatePolynomial":
        """Quotient of an exact division; raises ``ArithmeticError`` otherwise."""
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        (oi, oj), oc = other.leading()
        rem = dict(self.terms)
        quot = {}
        while rem:
            (ri, rj) = max(rem)
            rc = rem[(ri, rj)]
            qk = (ri - oi, rj - oj)
            qc = rc / oc
            quot[qk] = qc
            for (i, j), c in other.terms.items():
                k = (i + qk[0], j + qk[1])
                v = rem.get(k, 0) - qc * c
                if v:
                    rem[k] = v
                else:
                    rem.pop(k, None)
            if len(quot) > 10_000:
                raise ArithmeticError("division is not exact")
            if rem and max(rem) >= (ri, rj):
                raise ArithmeticError("division is not exact")
        return _raw(quot)

    # evaluation and substitution -------------------------------------
    def __call__(self, nu, mu):
        exact = isinstance(nu, numbers.Rational) and isinstance(mu, numbers.Rational)
        total = 0
        for (i, j), c in self.terms.items():
            total += (c if exact else float(c)) * nu ** i * mu ** j
        return total

    def evaluate(self, nu, mu):
        return self(nu, mu)

    def evaluate_exact(self, nu, mu) -> Fraction:
        nu, mu = as_rational(nu), as_rational(mu)
        return sum((c * nu ** i * mu ** j for (i, j), c in self.terms.items()), Fraction(0))

    def substitute_monomials(self, nu_exp, mu_exp) -> "BivariatePolynomial":
        """Substitute ``nu -> x**a y**b`` and ``mu -> x**c y**d``.

        ``nu_exp = (a, b)``, ``mu_exp = (c, d)``; the result is in (x, y).
        """
        (a, b), (c, d) = nu_exp, mu_exp
        out = {}
        for (i, j), coef in self.terms.items():
            k = (a * i + c * j, b * i + d * j)
            v = out.get(k, 0) + coef
            if v:
                out[k] = v
            else:
                out.pop(k, None)
        return _raw(out)

    def partial(self, var: int) -> "BivariatePolynomial":
        out = {}
        for (i, j), c in self.terms.items():
            e = (i, j)[var]
            if e:
                k = (i - 1, j) if var == 0 else (i, j - 1)
                out[k] = c * e
        return _raw(out)

    def slice(self, var: int, exponent: int) -> dict:
        """Coefficients of the terms whose ``var`` exponent equals ``exponent``,
        keyed by the other exponent."""
        other = 1 - var
        return {k[other]: c for k, c in self.terms.items() if k[var] == exponent}

    def normalized(self) -> "BivariatePolynomial":
        """Scale so the lexicographically smallest term has coefficient 1."""
        if not self.terms:
            return self
        c = self.terms[min(self.terms)]
        return self * (1 / c)

    def monomial_ratio(self, other: "BivariatePolynomial"):
        """Return ``(p, q, s)`` with ``self == s * nu**p mu**q * other``, else None."""
        if self.is_zero() or other.is_zero():
            return (0, 0, Fraction(1)) if self.is_zero() and other.is_zero() else None
        if len(self.terms) != len(other.terms):
            return None
        ks, ko = min(self.terms), min(other.terms)
        p, q = ks[0] - ko[0], ks[1] - ko[1]
        s = self.terms[ks] / other.terms[ko]
        for (i, j), c in other.terms.items():
            if self.terms.get((i + p, j + q)) != s * c:
                return None
        return p, q, s


def _raw(terms):
    """Wrap an already clean term dictionary without re-validating."""
    out = BivariatePolynomial.__new__(BivariatePolynomial)
    out.terms = terms
    out._hash = None
    return out


def univariate(coeffs: dict, var: int = 0) -> BivariatePolynomial:
    """Polynomial in a single variable from ``{exponent: coefficient}``."""
    if var == 0:
        return BivariatePolynomial({(e, 0): c for e, c in coeffs.items()})
    return BivariatePolynomial({(0, e): c for e, c in coeffs.items()})


# ---------------------------------------------------------------------
# determinants

def _as_matrix(entries):
    rows = [[e if isinstance(e, BivariatePolynomial) else BivariatePolynomial.constant(e)
             for e in row] for row in entries]
    n = len(rows)
    if any(len(r) != n for r in rows):
        raise ValueError("determinant of a non-square matrix")
    return rows


def _minor_expansion(m):
    n = len(m)
    if n == 0:
        return BivariatePolynomial.constant(1)
    if n == 1:
        return m[0][0]
    if n == 2:
        return m[0][0] * m[1][1] - m[0][1] * m[1][0]
    total = BivariatePolynomial()
    # expand along the sparsest row
    r = min(range(n), key=lambda i: sum(1 for e in m[i] if e))
    for c in range(n):
        if m[r][c]:
            sub = [row[:c] + row[c + 1:] for k, row in enumerate(m) if k != r]
            term = m[r][c] * _minor_expansion(sub)
            total = total + term if (r + c) % 2 == 0 else total - term
    return total


def _bareiss(m):
    m = [row[:] for row in m]
    n = len(m)
    sign = 1
    prev = BivariatePolynomial.constant(1)
    for k in range(n - 1):
        if m[k][k].is_zero():
            swap = next((i for i in range(k + 1, n) if not m[i][k].is_zero()), None)
            if swap is None:
                return BivariatePolynomial()
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        pivot = m[k][k]
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                num = m[i][j] * pivot - m[i][k] * m[k][j]
                m[i][j] = num.exact_div(prev) if not num.is_zero() else num
            m[i][k] = BivariatePolynomial()
        prev = pivot
    det = m[n - 1][n - 1]
    return det if sign > 0 else -det


def _block_split(m):
    """Smallest k with a zero lower-left block ``m[k:, :k]`` (or None)."""
    n = len(m)
    for k in range(1, n):
        if all(m[i][j].is_zero() for i in range(k, n) for j in range(k)):
            return k
    return None


def poly_det(entries) -> BivariatePolynomial:
    """Exact determinant of a square matrix of bivariate polynomials.

    Block upper-triangular structure is split off first; blocks of size <= 4
    use minor expansion, larger ones fraction-free (Bareiss) elimination.
    """
    m = _as_matrix(entries)
    n = len(m)
    if n == 0:
        return BivariatePolynomial.constant(1)
    k = _block_split(m)
    if k is not None:
        top = [row[:k] for row in m[:k]]
        bottom = [row[k:] for row in m[k:]]
        return poly_det(top) * poly_det(bottom)
    if n <= 4:
        return _minor_expansion(m)
    return _bareiss(m)


def cofactor(entries, row: int, col: int) -> BivariatePolynomial:
    """Signed cofactor: the derivative of ``det`` with respect to ``entries[row][col]``."""
    m = _as_matrix(entries)
    sub = [r[:col] + r[col + 1:] for k, r in enumerate(m) if k != row]
    d = poly_det(sub)
    return d if (row + col) % 2 == 0 else -d


def evaluate_matrix(entries, nu, mu):
    """Numeric (complex) matrix of the polynomial entries at ``(nu, mu)``."""
    import numpy as np
    return np.array([[complex(e(nu, mu)) if e else 0j for e in row] for row in entries], dtype=complex)


__all__ = [
    "BivariatePolynomial", "Rational", "as_rational", "poly_det", "cofactor",
    "univariate", "evaluate_matrix",
]
