"""Fourier-domain solvers for the constant-coefficient linear systems.

On a periodic grid every difference operator is diagonalised by the DFT, so
the two implicit systems of the splitting iteration reduce to independent
2x2 (g-system) or scalar (u-system) solves per frequency. Real transforms
are used throughout; one solve costs a handful of FFTs, O(N log N).
"""

import functools

import numpy as np
from scipy import fft

from .grid import divergence


def difference_symbols(shape, half=True):
    """DFT symbols ``(s1, s2)`` of the forward differences along axes 1 and 2.

    With ``half=True`` the arrays match the ``rfft2`` frequency layout. The
    backward-difference symbols are ``-conj(s1)``, ``-conj(s2)``.
    """
    m, n = shape
    k1 = fft.fftfreq(m)[:, None]
    k2 = (fft.rfftfreq(n) if half else fft.fftfreq(n))[None, :]
    s1 = np.exp(2j * np.pi * k1) - 1.0
    s2 = np.exp(2j * np.pi * k2) - 1.0
    return s1, s2


@functools.lru_cache(maxsize=16)
def _symbols(shape):
    s1, s2 = difference_symbols(shape)
    s1, s2 = np.broadcast_arrays(s1, s2)
    s1, s2 = s1.copy(), s2.copy()
    lap = -(np.abs(s1) ** 2 + np.abs(s2) ** 2)
    for a in (s1, s2, lap):
        a.setflags(write=False)
    return s1, s2, lap


class SpectralSymbols:
    """Cached symbols and system entries for one grid and parameter set.

    Parameters
    ----------
    shape : tuple of int
        Grid dimensions ``(M, N)``.
    dt, alpha2, c : float
        Time step, g-energy weight and frozen coefficient of the g-system.
    theta : float
        Fidelity penalty of the (u, v) system.
    """

    def __init__(self, shape, dt, alpha2, c, theta):
        if min(dt, alpha2, c, theta) <= 0:
            raise ValueError("dt, alpha2, c and theta must be positive")
        self.shape = tuple(shape)
        self.dt, self.alpha2, self.c, self.theta = dt, alpha2, c, theta
        self.s1, self.s2, self.laplacian = _symbols(self.shape)

        # g-system matrix per frequency: beta*I + c * s s^H  (Hermitian, PD)
        beta = 1.0 + 2.0 * dt * alpha2
        self.g11 = beta + c * np.abs(self.s1) ** 2
        self.g22 = beta + c * np.abs(self.s2) ** 2
        self.g12 = c * self.s1 * np.conj(self.s2)
        self.g_det = self.g11 * self.g22 - np.abs(self.g12) ** 2
        # inverse matrix entries
        self._h11 = self.g22 / self.g_det
        self._h22 = self.g11 / self.g_det
        self._h12 = -self.g12 / self.g_det
        self._h21 = np.conj(self._h12)

        # (u, v) system after eliminating v: [r - (1 + r) * laplacian] u = ...
        r = dt / theta
        self.ratio = r
        self.u_den = r - (1.0 + r) * self.laplacian

    def solve_g(self, rhs):
        """Solve ``(1 + 2 dt alpha2) g - c grad(div g) = rhs`` for ``g``."""
        b = fft.rfft2(rhs)
        x = np.empty_like(b)
        np.multiply(self._h11, b[0], out=x[0])
        x[0] += self._h12 * b[1]
        np.multiply(self._h22, b[1], out=x[1])
        x[1] += self._h21 * b[0]
        return fft.irfft2(x, s=self.shape)

    def solve_uv(self, div_p, v_half, f):
        """Solve the (u, v) optimality system given ``div(p_half)``.

        Rows: ``(r - lap) u + r v = -div_p + r f`` and
        ``r u + (1 + r) v = v_half + r f`` with ``r = dt / theta``.
        The eliminated right-hand side is written as ``r (f - v_half) -
        (1 + r) div_p`` to avoid cancelling two ``r**2`` terms.
        """
        r = self.ratio
        rhs = r * (f - v_half) - (1.0 + r) * div_p
        u = fft.irfft2(fft.rfft2(rhs) / self.u_den, s=self.shape)
        v = (v_half + r * (f - u)) / (1.0 + r)
        return u, v


def solve_g_constant_part(rhs, dt, alpha2, c):
    """Solve ``(I - c grad div + 2 dt alpha2 I) g = rhs`` on the periodic grid.

    `rhs` has shape ``(2, M, N)``; the result has the same shape.
    """
    rhs = np.asarray(rhs, dtype=np.float64)
    # theta does not enter the g-system
    return SpectralSymbols(rhs.shape[1:], dt, alpha2, c, 1.0).solve_g(rhs)


def solve_uv_system(p_half, v_half, f, dt, theta):
    """Solve the (u, v) system for given ``p_half``, ``v_half`` and data ``f``.

    Returns ``(u, v)``.
    """
    f = np.asarray(f, dtype=np.float64)
    sym = SpectralSymbols(f.shape, dt, 1.0, 1.0, theta)
    return sym.solve_uv(divergence(p_half), np.asarray(v_half, dtype=np.float64), f)
