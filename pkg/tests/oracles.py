"""Independent reference computations used by the tests."""
from fractions import Fraction
from itertools import permutations

import numpy as np


def perm_sign(p):
    sign, seen = 1, [False] * len(p)
    for i in range(len(p)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = p[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def dict_mul(p, q):
    out = {}
    for (i1, j1), c1 in p.items():
        for (i2, j2), c2 in q.items():
            k = (i1 + i2, j1 + j2)
            out[k] = out.get(k, 0) + c1 * c2
    return {k: v for k, v in out.items() if v != 0}


def leibniz_det(entries):
    """Determinant of a matrix of {(i, j): coeff} dicts by full expansion."""
    n = len(entries)
    total = {}
    for p in permutations(range(n)):
        term = {(0, 0): Fraction(perm_sign(p))}
        for r in range(n):
            term = dict_mul(term, entries[r][p[r]])
            if not term:
                break
        for k, v in term.items():
            total[k] = total.get(k, 0) + v
    return {k: v for k, v in total.items() if v != 0}


def as_dict(poly):
    """BivariatePolynomial (or zero entry) to a plain dict."""
    if not poly:
        return {}
    return {k: Fraction(v) for k, v in poly.terms.items() if v != 0}


def fourier_sum(coeffs, period, y):
    """Direct evaluation of sum_k c_k exp(2 pi i k y / T), k = -D..D."""
    D = (len(coeffs) - 1) // 2
    total = 0j
    for idx, c in enumerate(coeffs):
        total += c * np.exp(2j * np.pi * (idx - D) * y / period)
    return total


def central_diff(f, y, h=1e-5):
    return (f(y + h) - f(y - h)) / (2 * h)


def constant_floquet_A(a, c, rho):
    """A(rho) for constant coefficients, written out from the linear system
    -psi'_n + psi'_{n+1} = -a_n psi_n - c_n psi_{n+1} with psi_N = rho psi_0."""
    N = len(a)
    B = np.zeros((N, N), complex)
    C = np.zeros((N, N), complex)
    for n in range(N):
        B[n, n] -= 1
        C[n, n] += a[n]
        nxt = (n + 1) % N
        factor = rho if n == N - 1 else 1
        B[n, nxt] += factor
        C[n, nxt] += c[n] * factor
    return -np.linalg.solve(B, C)
