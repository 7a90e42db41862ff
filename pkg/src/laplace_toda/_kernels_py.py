"""Pure-Python DOPRI5 integrator, used when the compiled kernel is absent."""
from __future__ import annotations

import numpy as np

_C = (0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0)
_A = (
    (),
    (0.2,),
    (3.0 / 40.0, 9.0 / 40.0),
    (44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0),
    (19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0),
    (9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0),
)
_B = np.array([35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0])
_E = np.array([71.0 / 57600.0, 0.0, -71.0 / 16695.0, 71.0 / 1920.0,
               -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0])


def integrate_fourier_matrix(coeffs, period, y0, y1, X0, rtol, atol, h0=0.0,
                             max_steps=1000000):
    """Integrate X' = A(y) X from y0 to y1.

    coeffs[k] is the Fourier coefficient of A for mode k - D.  Returns
    (X, err_estimate, accepted, rejected, status); status 0 is success,
    1 step size underflow, 2 step budget exhausted.
    """
    coeffs = np.ascontiguousarray(coeffs, dtype=np.complex128)
    X = np.array(X0, dtype=np.complex128)
    D = (coeffs.shape[0] - 1) // 2
    modes = np.arange(-D, D + 1)
    omega = 2.0 * np.pi / period
    span = y1 - y0
    if span == 0.0:
        return X, 0.0, 0, 0, 0
    direction = 1.0 if span > 0 else -1.0

    def f(y, x):
        A = np.tensordot(np.exp(1j * omega * y * modes), coeffs, axes=1)
        return A @ x

    hmin = 1e-14 * abs(span)
    norm_a = float(np.abs(coeffs).sum())
    h = h0 if h0 > 0 else 0.5 / (norm_a + 1e-300)
    h = direction * min(h, abs(span))
    y = y0
    k1 = f(y, X)
    accepted = rejected = 0
    errsum = 0.0
    while True:
        last = direction * (y + h - y1) >= 0.0
        if last:
            h = y1 - y
        ks = [k1]
        for s in range(1, 6):
            xt = X + h * sum(a * k for a, k in zip(_A[s], ks))
            ks.append(f(y + _C[s] * h, xt))
        xn = X + h * sum(b * k for b, k in zip(_B, ks) if b != 0.0)
        k7 = f(y + h, xn)
        ks.append(k7)
        est = h * sum(e * k for e, k in zip(_E, ks) if e != 0.0)
        scale = atol + rtol * np.maximum(np.abs(X), np.abs(xn))
        err = float(np.max(np.abs(est) / scale))
        if err <= 1.0:
            accepted += 1
            errsum += err * atol
            y += h
            X, k1 = xn, k7
            if last:
                break
        else:
            rejected += 1
        fac = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
        h *= fac
        if abs(h) < hmin:
            return X, errsum, accepted, rejected, 1
        if accepted + rejected >= max_steps:
            return X, errsum, accepted, rejected, 2
    return X, errsum, accepted, rejected, 0
