"""Spectral substrate: transforms, fractional spatial derivatives, Sobolev
norms, smooth cutoffs, and the half-line -> whole-line extension.

Conventions. The forward transform approximates g_hat(xi) = int e^{-i x xi} g dx
and is realized as dx * fft(g) on the periodic grid; the discrete frequencies
are xi_k = 2*pi*fftfreq(n, dx) in [-pi/dx, pi/dx). With the inverse carrying
the 1/(2*pi) weight, the discrete Parseval identity

    (d_xi / 2 pi) * sum |g_hat|^2  =  dx * sum |g|^2

holds exactly, so the s=0 Sobolev norm reproduces the grid L2 norm to
rounding. Multiplier applications ifft(m * fft(g)) do not depend on the grid's
absolute position (the x_min phase factors cancel), which is the only way
transforms are used here.
"""
from __future__ import annotations

import numpy as np

from .grids import GridFunction, SpatialGrid, TimeGrid, TimeSignal

_MEAN_TOL = 1e-10


def _weights_abs_pow(xi, s):
    """|xi|^s with the zero mode set to 0 for s>0 and 1 for s=0."""
    if s == 0.0:
        return np.ones_like(xi)
    with np.errstate(divide="ignore"):
        w = np.abs(xi) ** s
    w[xi == 0.0] = 0.0
    return w


def fractional_derivative(g: GridFunction, s: float) -> GridFunction:
    """Homogeneous fractional derivative: inverse transform of |xi|^s * g_hat.

    The zero frequency is multiplied by 0 when s>0 and left unchanged when
    s=0. Negative s is rejected when g carries a nonzero mean component (the
    multiplier is unbounded at xi=0); for numerically mean-free g the zero
    mode is dropped.
    """
    v = g.values
    if s < 0.0:
        scale = np.sum(np.abs(v))
        if scale > 0.0 and abs(np.sum(v)) > _MEAN_TOL * scale:
            raise ValueError(
                "fractional_derivative: s<0 needs mean-free data "
                "(unbounded multiplier at xi=0)"
            )
    if s == 0.0:
        return g.copy()
    xi = g.grid.frequencies
    out = np.fft.ifft(_weights_abs_pow(xi, s) * np.fft.fft(v))
    return GridFunction(g.grid, out)


def sobolev_norm(g: GridFunction, s: float, homogeneous: bool = False) -> float:
    """Discrete H^s (or homogeneous) norm via the weighted Plancherel sum."""
    grid = g.grid
    xi = grid.frequencies
    ghat = grid.dx * np.fft.fft(g.values)
    if homogeneous:
        if s < 0.0:
            raise ValueError("homogeneous norm with s<0 not supported")
        w2 = _weights_abs_pow(xi, s) ** 2
    else:
        w2 = (1.0 + xi * xi) ** s
    dxi = 2.0 * np.pi / (grid.n * grid.dx)
    return float(np.sqrt(dxi / (2.0 * np.pi) * np.sum(w2 * np.abs(ghat) ** 2)))


def time_sobolev_norm(h: TimeSignal, s: float) -> float:
    """Inhomogeneous Sobolev norm in t of the zero-extended signal.

    The signal is embedded by zero extension into a power-of-two buffer of
    length >= 4(m+1); for data vanishing at both endpoints the weighted
    rectangle sum in tau has no aliasing, leaving only the O(dt^2) quadrature
    error of the discrete transform.
    """
    m = h.grid.m
    dt = h.grid.dt
    M = 1
    while M < 4 * (m + 1):
        M *= 2
    buf = np.zeros(M, dtype=complex)
    buf[: m + 1] = h.values
    tau = 2.0 * np.pi * np.fft.fftfreq(M, d=dt)
    hhat = dt * np.fft.fft(buf)
    dtau = 2.0 * np.pi / (M * dt)
    w2 = (1.0 + tau * tau) ** s
    return float(np.sqrt(dtau / (2.0 * np.pi) * np.sum(w2 * np.abs(hhat) ** 2)))


def _psi(sigma):
    out = np.zeros_like(sigma)
    pos = sigma > 0.0
    out[pos] = np.exp(-1.0 / sigma[pos])
    return out


def smooth_ramp(sigma):
    """C-infinity ramp: 0 for sigma<=0, 1 for sigma>=1, strictly monotone
    between, built from the standard exp(-1/s) gluing."""
    sigma = np.asarray(sigma, dtype=float)
    a = _psi(sigma)
    b = _psi(1.0 - sigma)
    out = np.empty_like(sigma)
    lo = sigma <= 0.0
    hi = sigma >= 1.0
    mid = ~(lo | hi)
    out[lo] = 0.0
    out[hi] = 1.0
    out[mid] = a[mid] / (a[mid] + b[mid])
    return out


def cutoff(T: float, tgrid: TimeGrid) -> TimeSignal:
    """Sampled plateau cutoff: 1 on [0, T], 0 for t >= 2T, smooth between.

    The profile is theta(t/T) with theta = 1 on [-1,1], supported in [-2,2];
    the plateau and support values are exact at grid nodes.
    """
    if T <= 0.0:
        raise ValueError("cutoff: T must be positive")
    u = np.abs(tgrid.nodes / T)
    vals = smooth_ramp(2.0 - u)
    return TimeSignal(tgrid, vals.astype(complex))


def _extension_window(x, x_min):
    """1 for x >= x_min/4, 0 for x <= x_min/2, smooth ramp between."""
    lo = 0.5 * x_min
    hi = 0.25 * x_min
    return smooth_ramp((x - lo) / (hi - lo))


def extend_half_line(phi, grid: SpatialGrid, s: float = 0.0) -> GridFunction:
    """Whole-line extension of half-line samples: even reflection about x=0
    times a smooth window supported in x > x_min/2.

    phi holds samples at the grid nodes with x >= 0, in node order. The x>=0
    samples are copied bit-exact; the s argument is accepted for interface
    symmetry (one construction is bounded on H^s over the whole range used).
    """
    phi = np.asarray(phi, dtype=complex)
    x = grid.nodes
    nonneg = np.nonzero(x >= 0.0)[0]
    if len(phi) != len(nonneg):
        raise ValueError(
            f"extend_half_line: expected {len(nonneg)} samples on x>=0 nodes, "
            f"got {len(phi)}"
        )
    out = np.zeros(grid.n, dtype=complex)
    out[nonneg] = phi

    xs = x[nonneg]
    vals = phi
    if xs[0] > 0.0 and len(xs) >= 3:
        # anchor the reflection with a quadratic extrapolant at x=0
        x0, x1, x2 = xs[:3]
        v0, v1, v2 = vals[:3]
        l0 = (0 - x1) * (0 - x2) / ((x0 - x1) * (x0 - x2))
        l1 = (0 - x0) * (0 - x2) / ((x1 - x0) * (x1 - x2))
        l2 = (0 - x0) * (0 - x1) / ((x2 - x0) * (x2 - x1))
        anchor = l0 * v0 + l1 * v1 + l2 * v2
        xs = np.concatenate(([0.0], xs))
        vals = np.concatenate(([anchor], vals))

    neg = np.nonzero(x < 0.0)[0]
    xr = -x[neg]
    refl = np.interp(xr, xs, vals.real) + 1j * np.interp(xr, xs, vals.imag)
    out[neg] = _extension_window(x[neg], grid.x_min) * refl
    return GridFunction(grid, out)


def boundary_value(phi, grid: SpatialGrid):
    """phi(0) from half-line samples: the exact node value when the grid has
    an x=0 node, else a quadratic extrapolation from the first three nodes."""
    phi = np.asarray(phi, dtype=complex)
    x = grid.nodes
    nonneg = np.nonzero(x >= 0.0)[0]
    xs = x[nonneg]
    if xs[0] == 0.0:
        return complex(phi[0])
    x0, x1, x2 = xs[:3]
    v0, v1, v2 = phi[:3]
    l0 = (0 - x1) * (0 - x2) / ((x0 - x1) * (x0 - x2))
    l1 = (0 - x0) * (0 - x2) / ((x1 - x0) * (x1 - x2))
    l2 = (0 - x0) * (0 - x1) / ((x2 - x0) * (x2 - x1))
    return complex(l0 * v0 + l1 * v1 + l2 * v2)
