# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled DOPRI5 integrator for X' = A(y) X with A a trigonometric
polynomial in y.  Mirrors ``_kernels_py.integrate_fourier_matrix``."""
import numpy as np

from libc.math cimport cos, sin, sqrt, fabs, pow, M_PI
from libc.stdlib cimport malloc, free

ctypedef double complex cplx

# Dormand-Prince 5(4) tableau
cdef double C2 = 0.2
cdef double C3 = 0.3
cdef double C4 = 0.8
cdef double C5 = 8.0 / 9.0
cdef double A21 = 0.2
cdef double A31 = 3.0 / 40.0
cdef double A32 = 9.0 / 40.0
cdef double A41 = 44.0 / 45.0
cdef double A42 = -56.0 / 15.0
cdef double A43 = 32.0 / 9.0
cdef double A51 = 19372.0 / 6561.0
cdef double A52 = -25360.0 / 2187.0
cdef double A53 = 64448.0 / 6561.0
cdef double A54 = -212.0 / 729.0
cdef double A61 = 9017.0 / 3168.0
cdef double A62 = -355.0 / 33.0
cdef double A63 = 46732.0 / 5247.0
cdef double A64 = 49.0 / 176.0
cdef double A65 = -5103.0 / 18656.0
cdef double B1 = 35.0 / 384.0
cdef double B3 = 500.0 / 1113.0
cdef double B4 = 125.0 / 192.0
cdef double B5 = -2187.0 / 6784.0
cdef double B6 = 11.0 / 84.0
cdef double E1 = 71.0 / 57600.0
cdef double E3 = -71.0 / 16695.0
cdef double E4 = 71.0 / 1920.0
cdef double E5 = -17253.0 / 339200.0
cdef double E6 = 22.0 / 525.0
cdef double E7 = -1.0 / 40.0


cdef inline double cabs_(cplx z) nogil:
    return sqrt(z.real * z.real + z.imag * z.imag)


cdef void eval_A(const cplx[:, :, ::1] coeffs, int D, int N, double omega, double y,
                 cplx* phase, cplx* out) nogil:
    cdef int k, i, j
    cdef cplx e1, s
    e1 = cos(omega * y) + 1j * sin(omega * y)
    phase[D] = 1.0
    for k in range(1, D + 1):
        phase[D + k] = phase[D + k - 1] * e1
        phase[D - k] = phase[D - k + 1] * e1.conjugate()
    for i in range(N):
        for j in range(N):
            s = 0.0
            for k in range(2 * D + 1):
                s = s + coeffs[k, i, j] * phase[k]
            out[i * N + j] = s


cdef void rhs(const cplx[:, :, ::1] coeffs, int D, int N, int M, double omega, double y,
              const cplx* x, cplx* out, cplx* phase, cplx* A) nogil:
    cdef int i, j, l
    cdef cplx s
    eval_A(coeffs, D, N, omega, y, phase, A)
    for i in range(N):
        for l in range(M):
            s = 0.0
            for j in range(N):
                s = s + A[i * N + j] * x[j * M + l]
            out[i * M + l] = s


def integrate_fourier_matrix(const cplx[:, :, ::1] coeffs, double period, double y0, double y1,
                             X0, double rtol, double atol, double h0=0.0,
                             long max_steps=1000000):
    """Integrate X' = A(y) X from y0 to y1.

    coeffs[k] is the Fourier coefficient of A for mode k - D.  Returns
    (X, err_estimate, accepted, rejected, status); status 0 is success,
    1 step size underflow, 2 step budget exhausted.
    """
    cdef cplx[:, ::1] X = np.array(X0, dtype=np.complex128, order="C", copy=True)
    cdef int N = X.shape[0]
    cdef int M = X.shape[1]
    cdef int D = (coeffs.shape[0] - 1) // 2
    cdef int S = N * M
    cdef double omega = 2.0 * M_PI / period
    cdef double span = y1 - y0
    cdef double direction = 1.0 if span >= 0 else -1.0
    cdef double y = y0, h, hmin, err, sc, xa, xb, fac, errsum = 0.0, norm_a = 0.0
    cdef long accepted = 0, rejected = 0
    cdef int status = 0, i, k, last
    cdef cplx* buf
    cdef cplx *x, *xn, *xt, *k1, *k2, *k3, *k4, *k5, *k6, *k7, *phase, *A, *tmp
    if span == 0.0:
        return np.asarray(X), 0.0, 0, 0, 0
    buf = <cplx*> malloc(sizeof(cplx) * (10 * S + 2 * D + 1 + N * N))
    if buf == NULL:
        raise MemoryError()
    x = buf; xn = x + S; xt = xn + S
    k1 = xt + S; k2 = k1 + S; k3 = k2 + S; k4 = k3 + S; k5 = k4 + S; k6 = k5 + S; k7 = k6 + S
    phase = k7 + S; A = phase + 2 * D + 1
    try:
        with nogil:
            for i in range(S):
                x[i] = X[i // M, i % M]
            for k in range(2 * D + 1):
                for i in range(N * N):
                    norm_a += cabs_(coeffs[k, i // N, i % N])
            hmin = 1e-14 * fabs(span)
            if h0 > 0.0:
                h = h0
            else:
                h = 0.5 / (norm_a + 1e-300)
            if h > fabs(span):
                h = fabs(span)
            h = direction * h
            rhs(coeffs, D, N, M, omega, y, x, k1, phase, A)
            while True:
                last = 0
                if direction * (y + h - y1) >= 0.0:
                    h = y1 - y
                    last = 1
                for i in range(S):
                    xt[i] = x[i] + h * A21 * k1[i]
                rhs(coeffs, D, N, M, omega, y + C2 * h, xt, k2, phase, A)
                for i in range(S):
                    xt[i] = x[i] + h * (A31 * k1[i] + A32 * k2[i])
                rhs(coeffs, D, N, M, omega, y + C3 * h, xt, k3, phase, A)
                for i in range(S):
                    xt[i] = x[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i])
                rhs(coeffs, D, N, M, omega, y + C4 * h, xt, k4, phase, A)
                for i in range(S):
                    xt[i] = x[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i])
                rhs(coeffs, D, N, M, omega, y + C5 * h, xt, k5, phase, A)
                for i in range(S):
                    xt[i] = x[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i]
                                        + A64 * k4[i] + A65 * k5[i])
                rhs(coeffs, D, N, M, omega, y + h, xt, k6, phase, A)
                for i in range(S):
                    xn[i] = x[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i]
                                        + B5 * k5[i] + B6 * k6[i])
                rhs(coeffs, D, N, M, omega, y + h, xn, k7, phase, A)
                err = 0.0
                for i in range(S):
                    xa = cabs_(x[i])
                    xb = cabs_(xn[i])
                    if xb > xa:
                        xa = xb
                    sc = atol + rtol * xa
                    xb = cabs_(h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i]
                                    + E6 * k6[i] + E7 * k7[i])) / sc
                    if xb > err:
                        err = xb
                if err <= 1.0:
                    accepted += 1
                    errsum += err * atol
                    y = y + h
                    tmp = x; x = xn; xn = tmp
                    tmp = k1; k1 = k7; k7 = tmp
                    if last:
                        break
                else:
                    rejected += 1
                if err == 0.0:
                    fac = 5.0
                else:
                    fac = 0.9 * pow(err, -0.2)
                    if fac > 5.0:
                        fac = 5.0
                    if fac < 0.2:
                        fac = 0.2
                h = h * fac
                if fabs(h) < hmin:
                    status = 1
                    break
                if accepted + rejected >= max_steps:
                    status = 2
                    break
            for i in range(S):
                X[i // M, i % M] = x[i]
    finally:
        free(buf)
    return np.asarray(X), errsum, accepted, rejected, status
