"""Periodic compact-difference pair (A, B) and the implicit two-component line solve.

``A = (1/2) * tridiag(1, 2, 1)`` and ``B = tridiag(-1, 0, 1)``, both with periodic
corners. They are circulant, so they share the discrete Fourier basis; ``A``
has real symbol ``1 + cos(2*pi*k/n)`` and ``B`` the imaginary symbol
``2i*sin(2*pi*k/n)``. ``A^{-1} B / h`` approximates ``d/dx``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np


@dataclass(frozen=True)
class CirculantSpectra:
    n: int
    a_hat: np.ndarray
    b: np.ndarray  # B's k-th eigenvalue is 1j * b[k]


@dataclass(frozen=True)
class LineSystemParams:
    sign: int
    c: float  # tau / (2 h) for the sweep axis
    eps: float = 1.0
    mu: float = 1.0

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError(f"sign must be +1 or -1, got {self.sign}")
        if not self.c >= 0:
            raise ValueError(f"coupling c must be non-negative, got {self.c}")


def _check_odd(n: int) -> None:
    if n < 3 or n % 2 == 0:
        raise ValueError(f"line size {n} must be odd and >= 3 (A is singular for even sizes)")


@lru_cache(maxsize=None)
def _spectra(n: int) -> CirculantSpectra:
    theta = 2 * np.pi * np.arange(n) / n
    a_hat = 1 + np.cos(theta)
    b = 2 * np.sin(theta)
    a_hat.setflags(write=False)
    b.setflags(write=False)
    return CirculantSpectra(n, a_hat, b)


def circulant_spectra(n: int) -> CirculantSpectra:
    _check_odd(n)
    return _spectra(int(n))


@lru_cache(maxsize=None)
def _half_spectra(n: int) -> tuple[np.ndarray, np.ndarray]:
    # eigenvalues restricted to the rfft half-spectrum 0..n//2
    sp = _spectra(n)
    m = n // 2 + 1
    return sp.a_hat[:m].copy(), sp.b[:m].copy()


def apply_stencil(line: np.ndarray, which: str, n: int | None = None) -> np.ndarray:
    """Direct periodic application of A or B along the last axis."""
    u = np.asarray(line, dtype=np.float64)
    if n is not None and u.shape[-1] != n:
        raise ValueError(f"line length {u.shape[-1]} does not match stencil size {n}")
    left = np.roll(u, 1, axis=-1)  # u_{i-1}
    right = np.roll(u, -1, axis=-1)  # u_{i+1}
    if which == "A":
        return 0.5 * (left + 2 * u + right)
    if which == "B":
        return right - left
    raise ValueError(f"stencil must be 'A' or 'B', got {which!r}")


def _broadcast(v: np.ndarray, ndim: int, axis: int) -> np.ndarray:
    shape = [1] * ndim
    shape[axis] = v.size
    return v.reshape(shape)


def solve_pair_lines(e, h, axis: int, params: LineSystemParams):
    """Solve every line along ``axis`` of the coupled implicit-midpoint system.

    For each line ``(x, y)`` solves::

        eps*A x - s*c*B y = eps*A e + s*c*B h
        mu*A y  - s*c*B x = mu*A h  + s*c*B e

    mode by mode in Fourier space. ``e`` and ``h`` may be whole lattices.
    """
    e = np.asarray(e, dtype=np.float64)
    h = np.asarray(h, dtype=np.float64)
    if e.shape != h.shape:
        raise ValueError(f"shape mismatch {e.shape} vs {h.shape}")
    n = e.shape[axis]
    _check_odd(n)
    if not (np.isfinite(e).all() and np.isfinite(h).all()):
        raise ValueError("non-finite values in line solve input")
    if params.c == 0:
        return e.copy(), h.copy()

    a_half, b_half = _half_spectra(n)
    a = _broadcast(a_half, e.ndim, axis)
    beta = _broadcast(1j * params.sign * params.c * b_half, e.ndim, axis)
    eps, mu = params.eps, params.mu

    E = np.fft.rfft(e, axis=axis)
    H = np.fft.rfft(h, axis=axis)
    r1 = eps * a * E + beta * H
    r2 = mu * a * H + beta * E
    det = eps * mu * a * a - beta * beta
    X = (mu * a * r1 + beta * r2) / det
    Y = (eps * a * r2 + beta * r1) / det
    return np.fft.irfft(X, n=n, axis=axis), np.fft.irfft(Y, n=n, axis=axis)


def solve_pair_line(e_line, h_line, params: LineSystemParams):
    e_line = np.asarray(e_line, dtype=np.float64)
    h_line = np.asarray(h_line, dtype=np.float64)
    if e_line.ndim != 1 or e_line.shape != h_line.shape:
        raise ValueError(f"expected two 1-D lines of equal length, got {e_line.shape} and {h_line.shape}")
    return solve_pair_lines(e_line, h_line, 0, params)


def pair_residual(e, h, x, y, params: LineSystemParams) -> float:
    """Max-norm residual of the assembled real system, using direct stencils."""
    s, c, eps, mu = params.sign, params.c, params.eps, params.mu
    A = lambda u: apply_stencil(u, "A")
    B = lambda u: apply_stencil(u, "B")
    r1 = eps * A(x) - s * c * B(y) - (eps * A(e) + s * c * B(h))
    r2 = mu * A(y) - s * c * B(x) - (mu * A(h) + s * c * B(e))
    return float(max(np.abs(r1).max(), np.abs(r2).max()))


def compact_derivative(u, h: float, axis: int = -1) -> np.ndarray:
    """``(1/h) A^{-1} B u`` along ``axis``."""
    u = np.asarray(u, dtype=np.float64)
    n = u.shape[axis]
    _check_odd(n)
    a_half, b_half = _half_spectra(n)
    axis = axis % u.ndim
    sym = _broadcast(1j * b_half / a_half, u.ndim, axis)
    return np.fft.irfft(sym * np.fft.rfft(u, axis=axis), n=n, axis=axis) / h
