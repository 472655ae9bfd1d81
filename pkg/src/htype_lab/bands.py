"""Spectral grids adapted to a dyadic band of the full Laplacian, the
per-degree amplitude envelope of band kernels, and the truncation rule in
the Laguerre degree.

A band kernel is the inverse transform of

    f^(lam, m) = R(2^{-2j} tau) exp(i t tau),   tau = M lam + lam^2,  M = 2m + d,

whose lam-support for degree m is [root(M, 2^{2j-1}), root(M, 2^{2j+2})] with
root(M, c) the positive solution of M lam + lam^2 = c.
"""

from __future__ import annotations

from math import comb, pi

import numpy as np
from scipy import special as sp

from .algebra import HTypeGroup
from .littlewood_paley import DyadicWindow
from .quadrature import QuadratureNotConverged, panel_rule, refine_breaks
from .special import SphereTransform, sphere_fourier
from .spherical import SpectralGrid, graded_breaks, sphere_measure, spectral_tau

# radians of phase per 16-node panel on the shared lam-grid
PANEL_PHASE = 14.0


def root(M, c):
    """Positive solution of M x + x^2 = c, in a cancellation-free form."""
    M = np.asarray(M, dtype=float)
    out = 2.0 * c / (M + np.sqrt(M * M + 4.0 * c))
    return out if out.ndim else float(out)


def band_support(group: HTypeGroup, w: DyadicWindow, j: int, m: int) -> tuple[float, float]:
    """lam-interval on which R(2^{-2j} tau(m, lam)) can be non-zero."""
    lo, hi = w.band(j)
    M = 2 * m + group.d
    return root(M, lo), root(M, hi)


def band_grid(group: HTypeGroup, w: DyadicWindow, j: int, m_cut: int, t: float = 0.0,
              rho_max: float = 0.0, r_max: float = 0.0, level: int = 0,
              kappa: float = PANEL_PHASE, order: int = 16) -> SpectralGrid:
    """One graded composite Gauss-Legendre grid serving every degree m <= m_cut.

    Panel widths are kappa / omega(lam), where omega bounds the lam-frequency of
    the integrand at lam: time phase |t| (M + 2 lam), Bessel phase rho_max,
    Laguerre phase r_max sqrt(M / 2 lam) and the window's own variation, with M
    the largest degree still inside the band at lam.  Each level halves every
    panel (the independent second rule used for consistency checks).
    """
    d = group.d
    lo_b, hi_b = w.band(j)
    Mc = 2 * m_cut + d
    lo = root(Mc, lo_b)
    hi = root(d, hi_b)
    scale = 4.0**j

    def width(lam):
        m_top = min(Mc, max(d, (hi_b - lam * lam) / lam))
        omega = (abs(t) * (m_top + 2 * lam) + rho_max + r_max * np.sqrt(m_top / (2 * lam))
                 + 20.0 * (m_top + 2 * lam) / scale)
        return min(kappa / omega, 0.15 * lam)

    br = graded_breaks(lo, hi, width)
    for _ in range(level):
        br = refine_breaks(br)
    return SpectralGrid(br, order)


def band_values(group: HTypeGroup, w: DyadicWindow, j: int, m_cut: int, lam, t: float = 0.0):
    """Spectral values R(2^{-2j} tau) exp(i t tau) for m <= m_cut on the nodes lam."""
    tau = spectral_tau(group.d, m_cut, lam)
    vals = w.dilated(j, tau)
    if t != 0.0:
        return vals * np.exp(1j * t * tau)
    return vals.astype(complex)


def band_synthesize(group: HTypeGroup, w: DyadicWindow, j: int, t: float, lam, weights,
                    m_cut: int, r, rho) -> np.ndarray:
    """Inverse transform of R(2^{-2j} tau) exp(i t tau), m <= m_cut, on r x rho.

    Same algorithm as spherical.synthesize, but the spectral values are
    generated degree by degree on the nodes where the degree is still inside
    the band, so memory stays proportional to (nodes x len(r)).
    """
    d, p = group.d, group.p
    lam = np.asarray(lam, dtype=float)
    r = np.asarray(r, dtype=float)
    rho = np.asarray(rho, dtype=float)
    lo_b, hi_b = w.band(j)
    # largest degree with M lam + lam^2 <= hi_b
    top = np.floor(((hi_b - lam * lam) / lam - d) / 2).astype(np.int64)
    top = np.minimum(top, m_cut)
    keep = top >= 0
    lam, weights, top = lam[keep], np.asarray(weights)[keep], top[keep]
    if lam.size == 0:
        return np.zeros((r.size, rho.size), dtype=complex)
    order = np.argsort(-top, kind="stable")
    lam, weights, top = lam[order], weights[order], top[order]
    n_active = np.searchsorted(-top, -np.arange(top[0] + 1), side="right")
    x = 0.5 * lam[:, None] * r[None, :] ** 2
    alpha = d - 1

    def coef(m, k):
        tau = (2 * m + d) * lam[:k] + lam[:k] ** 2
        c = w.dilated(j, tau)
        if t != 0.0:
            return c * np.cos(t * tau), c * np.sin(t * tau)
        return c, None

    Sr = np.zeros((lam.size, r.size))
    Si = np.zeros((lam.size, r.size)) if t != 0.0 else None

    def acc(m, k, L):
        cr, ci = coef(m, k)
        Sr[:k] += cr[:, None] * L
        if Si is not None:
            Si[:k] += ci[:, None] * L

    prev = np.exp(-0.5 * x)
    acc(0, lam.size, prev)
    if top[0] >= 1:
        k = n_active[1]
        cur = (alpha + 1.0 - x[:k]) * prev[:k]
        acc(1, k, cur)
        for m in range(1, top[0]):
            k = n_active[m + 1]
            nxt = ((2 * m + alpha + 1.0 - x[:k]) * cur[:k] - (m + alpha) * prev[:k]) / (m + 1)
            acc(m + 1, k, nxt)
            prev, cur = cur[:k], nxt

    W = weights * lam ** (d + p - 1) / (2 * pi) ** (d + p)
    D = sphere_fourier(SphereTransform(p), lam[:, None] * rho[None, :])
    out = (Sr * W[:, None]).T @ D
    if Si is None:
        return out.astype(complex)
    return out + 1j * ((Si * W[:, None]).T @ D)


def band_field(group: HTypeGroup, w: DyadicWindow, j: int, t: float, r, rho, m_cut: int,
               level: int = 0, kappa: float = PANEL_PHASE) -> np.ndarray:
    """exp(i t L) psi_j on the tensor grid r x rho, degrees m <= m_cut."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    rho = np.atleast_1d(np.asarray(rho, dtype=float))
    grid = band_grid(group, w, j, m_cut, t, float(rho.max()), float(r.max()), level, kappa)
    lam, wt = grid.nodes
    return band_synthesize(group, w, j, t, lam, wt, m_cut, r, rho)


def checked_band_field(group: HTypeGroup, w: DyadicWindow, j: int, t: float, r, rho, m_cut: int,
                       tol: float, scale: float | None = None,
                       atol: float = 0.0) -> tuple[np.ndarray, float]:
    """band_field cross-checked against the refined rule.

    Returns the refined values and the largest two-rule difference; raises
    QuadratureNotConverged if the difference exceeds max(tol * scale, atol)
    (scale defaults to the largest modulus on the grid).
    """
    a = band_field(group, w, j, t, r, rho, m_cut, level=0)
    b = band_field(group, w, j, t, r, rho, m_cut, level=1)
    diff = float(np.max(np.abs(a - b)))
    ref = float(np.max(np.abs(b))) if scale is None else scale
    if diff > max(tol * max(ref, np.finfo(float).tiny), atol):
        raise QuadratureNotConverged(f"two-rule difference {diff:.3e} exceeds {tol:.1e} x {ref:.3e}")
    return b, diff


def _window_moment(w: DyadicWindow, power: float) -> float:
    x, wt = panel_rule(np.linspace(w.lower, w.upper, 65), 16)
    return float(np.sum(wt * w(x) * x**power))


def mode_envelope(group: HTypeGroup, w: DyadicWindow, j: int, m_max: int) -> np.ndarray:
    """A_m = (2 pi)^{-(d+p)} |S^{p-1}| binom(m+d-1, m) int R(2^{-2j} tau) lam^{d+p-1} dlam.

    Since |Lf_m^{(d-1)}| <= binom(m+d-1, m) and |dsigma^| <= |S^{p-1}|, A_m bounds
    the modulus of degree m's contribution to exp(i t L) psi_j everywhere.
    """
    d, p = group.d, group.p
    out = np.empty(m_max + 1)
    for m in range(m_max + 1):
        lo, hi = band_support(group, w, j, m)
        x, wt = panel_rule(np.linspace(lo, hi, 65), 16)
        M = 2 * m + d
        out[m] = comb(m + d - 1, m) * np.sum(wt * w.dilated(j, M * x + x * x) * x ** (d + p - 1))
    return sphere_measure(p - 1) * out / (2 * pi) ** (d + p)


def envelope_constant(group: HTypeGroup, w: DyadicWindow, j: int, n_modes: int = 10) -> float:
    """C_env with A_m <= C_env 2^{jN} M^{-(p+1)} for every m.

    The ratio A_m M^{p+1} 2^{-jN} is measured on the first n_modes degrees and
    combined with its large-M limit

        (2 pi)^{-(d+p)} |S^{p-1}| int R(x) x^{d+p-1} dx / (2^{d-1} (d-1)!),

    which the ratio approaches from below.
    """
    d, p = group.d, group.p
    N = group.N
    A = mode_envelope(group, w, j, n_modes - 1)
    M = 2.0 * np.arange(n_modes) + d
    measured = float(np.max(A * M ** (p + 1) / 2.0 ** (j * N)))
    limit = (sphere_measure(p - 1) * _window_moment(w, d + p - 1)
             / (2 * pi) ** (d + p) / (2.0 ** (d - 1) * float(sp.factorial(d - 1))))
    return max(measured, limit)


def envelope_tail(group: HTypeGroup, m_cut: int) -> float:
    """Sum of M^{-(p+1)} over M = 2m + d with m > m_cut (Hurwitz zeta)."""
    p, d = group.p, group.d
    return 2.0 ** (-(p + 1)) * float(sp.zeta(p + 1, m_cut + 1 + d / 2))


def truncation_bound(j: int, tol: float, group: HTypeGroup, w: DyadicWindow | None = None,
                     m_limit: int = 1_000_000) -> int:
    """Smallest m_cut with C_env 2^{jN} sum_{M > 2 m_cut + d} M^{-(p+1)} < tol."""
    if not tol > 0:
        raise ValueError("tolerance must be positive")
    if group.p < 2:
        raise ValueError("truncation bound needs p >= 2")
    if w is None:
        w = DyadicWindow()
    c = envelope_constant(group, w, j) * 2.0 ** (j * group.N)

    def ok(m):
        return c * envelope_tail(group, m) < tol

    if not ok(m_limit):
        raise ValueError(f"truncation tolerance {tol:g} unattainable below m_cut = {m_limit}")
    lo, hi = -1, m_limit
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return max(hi, 0)


def crude_bound(group: HTypeGroup, w: DyadicWindow, j: int, n_modes: int = 10) -> float:
    """Triangle-inequality bound sum_m A_m on |exp(i t L) psi_j| (all t, all points)."""
    head = float(np.sum(mode_envelope(group, w, j, n_modes - 1)))
    tail = envelope_constant(group, w, j, n_modes) * 2.0 ** (j * group.N) * envelope_tail(group, n_modes - 1)
    return head + tail


def static_box(j: int) -> tuple[float, float]:
    """Box [0, R_z] x [0, R_s] carrying psi_j up to ~1e-5 of its peak."""
    s = 2.0**-j
    return 12.0 * s, 48.0 * max(s, s * s)
