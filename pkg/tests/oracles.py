"""Independent reference computations used as test oracles.

None of these touch numpy.fft, LAPACK eigenvalue routines or the package's
own algebra, so agreement with the package is a genuine cross-check.
"""

import math

import numpy as np


def dft_matrix(n: int) -> np.ndarray:
    m = np.arange(n)
    return np.exp(-2j * math.pi * np.outer(m, m) / n) / n


def explicit_dft(samples: np.ndarray) -> np.ndarray:
    """Forward transform with 1/n^d normalisation by dense matrix products."""
    out = samples.astype(complex)
    for axis, n in enumerate(samples.shape):
        out = np.moveaxis(np.tensordot(dft_matrix(n), np.moveaxis(out, axis, 0), axes=1), 0, axis)
    return out


def quat_as_complex_matrix(q) -> np.ndarray:
    q0, q1, q2, q3 = q
    return np.array([[q0 + 1j * q1, q2 + 1j * q3], [-q2 + 1j * q3, q0 - 1j * q1]])


def quat_product_via_matrices(p, q) -> np.ndarray:
    """Hamilton product through the 2x2 complex matrix representation."""
    m = quat_as_complex_matrix(p) @ quat_as_complex_matrix(q)
    return np.array([m[0, 0].real, m[0, 0].imag, m[0, 1].real, m[0, 1].imag])


def charpoly_faddeev(a: np.ndarray) -> np.ndarray:
    """Characteristic polynomial coefficients (highest degree first)."""
    n = a.shape[0]
    coeffs = [1.0]
    m = np.zeros_like(a)
    for k in range(1, n + 1):
        m = a @ m + coeffs[-1] * np.eye(n)
        coeffs.append(-np.trace(a @ m) / k)
    return np.array(coeffs)


def mult_charpoly(a0: float, vnorm: float) -> np.ndarray:
    """Coefficients of (x^2 - 2 a0 x + a0^2 + |v|^2)^2, highest degree first."""
    quad = np.array([1.0, -2.0 * a0, a0 * a0 + vnorm * vnorm])
    return np.polymul(quad, quad)


def taylor_green_velocity(x, y, t, nu):
    decay = math.exp(-2.0 * nu * t)
    return np.sin(x) * np.cos(y) * decay, -np.cos(x) * np.sin(y) * decay
