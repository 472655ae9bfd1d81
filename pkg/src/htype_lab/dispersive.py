"""Schroedinger evolution exp(i t L) of band kernels, sup-norm decay fits, the
stationary-phase sharpness example and Strichartz exponents.

Every kernel is a sum over Laguerre degrees m of one-dimensional integrals

    I_m(r, rho) = (2 pi)^{-(d+p)} int dsigma^(lam rho) exp(i t tau) R(2^{-2j} tau)
                  Lf_m^{(d-1)}(lam r^2 / 2) lam^{d+p-1} dlam,   tau = (2m+d) lam + lam^2,

the exp(-i lam.s) factor having been integrated over the sphere first.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import pi

import numpy as np

from .algebra import HTypeGroup
from .bands import (band_field, band_grid, band_support, checked_band_field, crude_bound, root,
                    static_box, truncation_bound)
from .littlewood_paley import (BesovSpec, DyadicWindow, besov_norm, bump, psi_spectral)
from .quadrature import QuadratureNotConverged, gauss_legendre, oscillatory_quadrature, panel_rule
from .special import SphereTransform, laguerre_fn, LaguerreEvaluator, sphere_fourier
from .spherical import Multiplier, SpectralFunction, apply_multiplier, plancherel_norm

__all__ = [
    "evolve", "PropagatorQuery", "propagated_kernel", "mode_integral", "oscillatory_quadrature",
    "truncation_bound", "SearchBoxTooSmall", "search_box", "SupNorm", "sup_norm", "DecayFit",
    "log_fit", "fit_decay", "UniformTable", "uniform_constant", "SharpnessExperiment",
    "sharpness_value", "sharpness_run", "sharpness_radial", "admissible", "strichartz_box",
    "strichartz_ratio", "spatial_l2_norm", "unitarity_ratio",
]


class SearchBoxTooSmall(RuntimeError):
    pass


def schroedinger_multiplier(t: float) -> Multiplier:
    return Multiplier(lambda tau: np.exp(1j * t * tau), f"exp(i {t} tau)")


def evolve(F: SpectralFunction, t: float) -> SpectralFunction:
    """exp(i t L) on the spectral side."""
    if t == 0:
        return F
    return apply_multiplier(F, schroedinger_multiplier(t))


def _m_cut(group, w, j, rel_tol):
    return truncation_bound(j, rel_tol * crude_bound(group, w, j), group, w)


@dataclass(frozen=True)
class PropagatorQuery:
    j: int
    t: float
    r: float
    rho: float
    group: HTypeGroup
    window: DyadicWindow = field(default_factory=DyadicWindow)
    tol: float = 1e-8         # two-rule quadrature tolerance (relative)
    trunc_tol: float = 1e-6   # degree truncation, relative to the crude bound on |psi_j|
    m_cut: int | None = None

    @property
    def sigma(self) -> float:
        return self.rho / abs(self.t) if self.t else math.inf


def propagated_kernel(q: PropagatorQuery, return_diagnostics: bool = False):
    """exp(i t L) psi_j at |z| = r, |s| = rho.

    The value comes from the refined shared lam-rule; the unrefined rule must
    agree to q.tol relative to |value|, or to 1e-3 of the truncation budget
    trunc_tol x crude bound when that is larger (tiny values are cancellations
    of terms of the size of the crude bound).
    """
    if not (q.tol > 0 and q.trunc_tol > 0):
        raise ValueError("tolerances must be positive")
    m_cut = q.m_cut if q.m_cut is not None else _m_cut(q.group, q.window, q.j, q.trunc_tol)
    atol = 1e-3 * q.trunc_tol * crude_bound(q.group, q.window, q.j)
    vals, diff = checked_band_field(q.group, q.window, q.j, q.t, [q.r], [q.rho], m_cut, q.tol,
                                    atol=atol)
    value = complex(vals[0, 0])
    if return_diagnostics:
        return value, {"m_cut": m_cut, "two_rule": diff}
    return value


def mode_integral(group: HTypeGroup, w: DyadicWindow, j: int, m: int, t: float, r: float,
                  rho: float, tol: float = 1e-10):
    """I_m(r, rho) by the adaptive oscillatory engine (independent of the shared grid)."""
    d, p = group.d, group.p
    M = 2 * m + d
    lo, hi = band_support(group, w, j, m)
    ev = LaguerreEvaluator(d - 1, m)
    st = SphereTransform(p)

    def amp(lam):
        tau = M * lam + lam * lam
        return (w.dilated(j, tau) * laguerre_fn(ev, m, 0.5 * lam * r * r)
                * sphere_fourier(st, lam * rho) * lam ** (d + p - 1))

    def phase(lam):
        return t * (M * lam + lam * lam)

    omega = abs(t) * (M + 2 * hi) + rho + r * np.sqrt(M / (2 * lo)) + 20 * (M + 2 * hi) / 4.0**j
    res = oscillatory_quadrature(phase, amp, (lo, hi), omega, tol=tol)
    return res.value / (2 * pi) ** (d + p), res.error / (2 * pi) ** (d + p)


# --------------------------------------------------------------------- sup norms

@dataclass(frozen=True)
class SupNorm:
    value: float
    r: float
    rho: float
    m_cut: int
    two_rule: float        # |value(rule) - value(refined rule)| at the argmax
    truncation: float      # |value(m_cut) - value(2 m_cut)| at the argmax
    box: tuple[float, float]


def search_box(group: HTypeGroup, w: DyadicWindow, j: int, m_box: int = 4) -> tuple[float, float]:
    """(R_z, sigma_max): r-extent and largest velocity sigma = rho/|t| searched.

    sigma_max is 1.5 times the largest group velocity M + 2 lam over the band
    for the lowest m_box + 1 degrees, where the stationary configuration of
    the dominant degrees lives.
    """
    d = group.d
    lo, hi = w.band(j)
    vel = max(2 * m + d + 2 * root(2 * m + d, hi) for m in range(m_box + 1))
    return 4.0 * 2.0**-j, 1.5 * vel


def _local(axis, i, n=9):
    lo = axis[max(i - 1, 0)]
    hi = axis[min(i + 1, axis.size - 1)]
    return np.linspace(lo, hi, n)


def sup_norm(j: int, t: float, group: HTypeGroup, w: DyadicWindow | None = None,
             n_coarse: int = 64, levels: int = 3, tol: float = 1e-6, trunc_tol: float = 1e-4,
             box: tuple[float, float] | None = None, enlarge: bool = True,
             m_cut: int | None = None) -> SupNorm:
    """max |exp(i t L) psi_j| over r in [0, R_z], rho in [0, sigma_max |t|].

    A coarse n_coarse x n_coarse grid is followed by `levels` local 4x
    refinements around the maximum.  A maximum on the outer edge of the box
    enlarges it once (factor 2), then raises SearchBoxTooSmall.  The reported
    value is re-evaluated with the refined lam-rule and with doubled m_cut.
    """
    if w is None:
        w = DyadicWindow()
    if m_cut is None:
        m_cut = _m_cut(group, w, j, trunc_tol)
    R_z, s_max = box if box is not None else search_box(group, w, j)
    tt = abs(t) if t != 0 else 1.0
    for attempt in range(2):
        r = np.linspace(0.0, R_z, n_coarse)
        rho = np.linspace(0.0, s_max * tt, n_coarse)
        vals = np.abs(band_field(group, w, j, t, r, rho, m_cut))
        i, k = np.unravel_index(int(np.argmax(vals)), vals.shape)
        edge = (i == n_coarse - 1 and R_z > 0) or (k == n_coarse - 1 and t != 0)
        if not edge:
            break
        if not enlarge or attempt == 1:
            raise SearchBoxTooSmall(f"maximum on the edge of the search box (r={r[i]:.3g}, rho={rho[k]:.3g})")
        R_z, s_max = 2 * R_z, 2 * s_max
    best = vals[i, k]
    br, bs = r[i], rho[k]
    for _ in range(levels):
        r = _local(r, i)
        rho = _local(rho, k)
        vals = np.abs(band_field(group, w, j, t, r, rho, m_cut))
        i, k = np.unravel_index(int(np.argmax(vals)), vals.shape)
        if vals[i, k] >= best:
            best, br, bs = vals[i, k], r[i], rho[k]
    fine, diff = checked_band_field(group, w, j, t, [br], [bs], m_cut, tol, scale=best)
    doubled = band_field(group, w, j, t, [br], [bs], 2 * m_cut, level=1)
    trunc = float(abs(doubled[0, 0] - fine[0, 0]))
    return SupNorm(float(abs(fine[0, 0])), float(br), float(bs), m_cut, diff, trunc, (R_z, s_max))


@dataclass(frozen=True)
class DecayFit:
    slope: float
    intercept: float
    residual: float
    t_window: tuple[float, float]
    samples: tuple = ()


def log_fit(t, y) -> DecayFit:
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    A = np.vstack([np.log(t), np.ones_like(t)]).T
    coef, *_ = np.linalg.lstsq(A, np.log(y), rcond=None)
    res = np.log(y) - A @ coef
    return DecayFit(float(coef[0]), float(coef[1]), float(np.sqrt(np.mean(res**2))),
                    (float(t.min()), float(t.max())))


def fit_decay(j: int, t_grid, group: HTypeGroup, w: DyadicWindow | None = None,
              map_fn=map, **kw) -> DecayFit:
    """Least-squares slope of log sup_norm against log t."""
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.size < 8:
        raise ValueError("fit needs at least 8 time samples")
    if t_grid.min() < 10 or t_grid.max() > 1e3:
        raise ValueError("time samples must lie in [10, 1000]")
    sups = list(map_fn(lambda t: sup_norm(j, float(t), group, w, **kw), t_grid))
    fit = log_fit(t_grid, [s.value for s in sups])
    return DecayFit(fit.slope, fit.intercept, fit.residual, fit.t_window, tuple(sups))


@dataclass(frozen=True)
class UniformTable:
    table: dict            # (j, t) -> C_{j,t}
    sups: dict             # (j, t) -> SupNorm
    exponents: tuple[float, float]

    @property
    def values(self) -> np.ndarray:
        return np.array(list(self.table.values()))

    @property
    def max(self) -> float:
        return float(self.values.max())

    @property
    def spread(self) -> float:
        """max / median of the normalized constants."""
        v = self.values
        return float(v.max() / np.median(v))


def uniform_constant(j_range, t_grid, exponent_pair: tuple[float, float], group: HTypeGroup,
                     w: DyadicWindow | None = None, map_fn=map, **kw) -> UniformTable:
    """C_{j,t} = sup_norm(j, t) |t|^{a_t} 2^{-j a_j}."""
    a_t, a_j = exponent_pair
    n, N, p = group.n, group.N, group.p
    ok = (math.isclose(a_t, p / 2) and math.isclose(a_j, n - 1)) or (
        math.isclose(a_t, 0.5) and n - 1 - 1e-12 <= a_j <= N - 2 + 1e-12)
    if not ok:
        raise ValueError("exponent pair must be (p/2, n-1) or (1/2, rho) with rho in [n-1, N-2]")
    keys = [(int(j), float(t)) for j in j_range for t in t_grid]
    sups = list(map_fn(lambda jt: sup_norm(jt[0], jt[1], group, w, **kw), keys))
    table = {key: s.value * abs(key[1]) ** a_t * 2.0 ** (-key[0] * a_j) for key, s in zip(keys, sups)}
    return UniformTable(table, dict(zip(keys, sups)), (a_t, a_j))


# ------------------------------------------------------------------ sharpness

@dataclass(frozen=True)
class SharpnessExperiment:
    d: int
    p: int
    t_list: tuple = tuple(np.geomspace(20.0, 200.0, 8))

    def __post_init__(self):
        if self.p not in (2, 3):
            raise ValueError("the tensor quadrature is implemented for p in {2, 3}")
        if min(self.t_list) < 20 or max(self.t_list) > 500:
            raise ValueError("t_list must lie in [20, 500]")
        if self.width >= self.d:
            raise ValueError("support of Q touches 0")

    @property
    def width(self) -> float:
        return self.d / 2

    def Q(self, x):
        return bump(x, self.d, self.width)

    @property
    def s0(self) -> np.ndarray:
        s = np.zeros(self.p)
        s[-1] = 3 * self.d
        return s

    @property
    def lam0(self) -> np.ndarray:
        return self.s0 / 3

    def phase(self, lam):
        lam = np.atleast_2d(lam)
        a = np.linalg.norm(lam, axis=-1)
        return self.d * a + a * a - lam @ self.s0

    def hessian(self, lam=None) -> np.ndarray:
        """Hessian of d|lam| + |lam|^2 - lam.s0."""
        lam = self.lam0 if lam is None else np.asarray(lam, dtype=float)
        a = np.linalg.norm(lam)
        e = lam / a
        return 2 * np.eye(self.p) + self.d / a * (np.eye(self.p) - np.outer(e, e))

    @property
    def det_hessian(self) -> float:
        return float(np.linalg.det(self.hessian()))

    def predicted(self, t: float) -> float:
        d, p = self.d, self.p
        return ((2 * pi / t) ** (p / 2) * abs(self.det_hessian) ** -0.5 * float(self.Q(d))
                * d**d / (2 * pi) ** (d + p))


def _tensor_sharpness(ex: SharpnessExperiment, t: float, refine: int = 0) -> complex:
    # refine=1 doubles the radial panels and takes 25% more angular nodes, an
    # independent second rule for the consistency check
    d, p = ex.d, ex.p
    a, b = d - ex.width, d + ex.width
    s = 3 * d
    # radial panels: phase varies at most t (d + 2b + s) per unit radius
    n_rad = (1 + int(np.ceil(t * (d + 2 * b + s) * (b - a) / 6.0))) * 2**refine
    rad, wrad = panel_rule(np.linspace(a, b, n_rad + 1), 16)
    amp = ex.Q(rad) * rad**d * rad ** (p - 1) * wrad
    total = 0.0 + 0.0j
    if p == 2:
        # periodic trapezoid in the angle: exact once n exceeds the Bessel band
        n_ang = int(np.ceil((1.3 * t * s * b + 64) * (1.25 if refine else 1.0)))
        theta = 2 * pi * np.arange(n_ang) / n_ang
        c = np.cos(theta)
        for k0 in range(0, rad.size, 512):
            rr = rad[k0:k0 + 512, None]
            ph = t * (d * rr + rr * rr - s * rr * c[None, :])
            total += np.sum(amp[k0:k0 + 512] * np.exp(1j * ph).sum(axis=1)) * (2 * pi / n_ang)
    else:
        # polar cosine u in [-1, 1]; the azimuth integrates to 2 pi
        n_u = int(np.ceil((1 + t * s * b * 2 / 6.0) * (1.25 if refine else 1.0)))
        u, wu = panel_rule(np.linspace(-1.0, 1.0, n_u + 1), 16)
        for k0 in range(0, rad.size, 256):
            rr = rad[k0:k0 + 256, None]
            ph = t * (d * rr + rr * rr - s * rr * u[None, :])
            total += 2 * pi * np.sum(amp[k0:k0 + 256] * (np.exp(1j * ph) @ wu))
    return total / (2 * pi) ** (d + p)


def sharpness_value(ex: SharpnessExperiment, t: float, tol: float = 1e-8) -> tuple[complex, float]:
    """u((0, t s0), t) by p-dimensional tensor quadrature, with a refined-rule error estimate."""
    a = _tensor_sharpness(ex, t)
    b = _tensor_sharpness(ex, t, refine=1)
    err = abs(a - b)
    if err > tol * abs(b):
        raise QuadratureNotConverged(f"sharpness quadrature changed by {err:.2e} under refinement")
    return b, err


def sharpness_radial(ex: SharpnessExperiment, t: float, tol: float = 1e-10) -> complex:
    """Same quantity through the sphere transform: the angular integral of
    exp(-i t lam.s0) is dsigma^(t |s0| |lam|)."""
    d, p = ex.d, ex.p
    st = SphereTransform(p)
    s = 3 * d
    a, b = d - ex.width, d + ex.width

    def amp(x):
        return ex.Q(x) * x ** (d + p - 1) * sphere_fourier(st, t * s * x)

    res = oscillatory_quadrature(lambda x: t * (d * x + x * x), amp, (a, b),
                                 t * (d + 2 * b + s), tol=tol)
    return res.value / (2 * pi) ** (d + p)


def sharpness_run(ex: SharpnessExperiment, tol: float = 1e-8, map_fn=map):
    """Rows (t, |u|, predicted, ratio) and the log-log slope of |u|."""
    vals = list(map_fn(lambda t: sharpness_value(ex, float(t), tol)[0], ex.t_list))
    rows = []
    for t, u in zip(ex.t_list, vals):
        pred = ex.predicted(float(t))
        rows.append((float(t), abs(u), pred, abs(u) / pred))
    fit = log_fit([r[0] for r in rows], [r[1] for r in rows])
    return rows, fit


# ------------------------------------------------------------------ Strichartz

def _as_fraction(x) -> Fraction | None:
    if x == math.inf:
        return None
    return Fraction(x).limit_denominator(10**6)


def admissible(q, r, p: int, n: int | None = None):
    """(2/q == p (1/2 - 1/r) and (q, r, p) != (2, inf, 2), rho = -(n-1)(1/2 - 1/r)).

    rho is None when n is not given.
    """
    if q < 2 or r < 2:
        raise ValueError("q and r must lie in [2, inf]")
    fq, fr = _as_fraction(q), _as_fraction(r)
    inv_q = Fraction(0) if fq is None else 1 / fq
    inv_r = Fraction(0) if fr is None else 1 / fr
    ok = 2 * inv_q == p * (Fraction(1, 2) - inv_r)
    if q == 2 and r == math.inf and p == 2:
        ok = False
    rho = None if n is None else -float((n - 1) * (Fraction(1, 2) - inv_r))
    return bool(ok), rho


def strichartz_box(group: HTypeGroup, w: DyadicWindow, j: int, t_max: float) -> tuple[float, float]:
    """Spatial box holding Delta_j exp(i t L) u for |t| <= t_max."""
    R_z, R_s = static_box(j)
    _, s_max = search_box(group, w, j)
    return R_z + 3.0 * 2.0**j * t_max, R_s + s_max * t_max


def strichartz_ratio(F0: SpectralFunction, q, r, group: HTypeGroup, w: DyadicWindow, t_grid,
                     j_range: tuple[int, int], panels: int | None = None, map_fn=map) -> float:
    """||exp(i t L) u0||_{L^q(t; B^rho_{r,2})} / ||u0||_2 over the span of t_grid.

    The time integral is the trapezoid rule on t_grid; spatial L^r norms use
    the box strichartz_box(j, max |t|).
    """
    ok, rho = admissible(q, r, group.p, group.n)
    if not ok:
        raise ValueError(f"(q, r, p) = ({q}, {r}, {group.p}) is not admissible")
    t_grid = np.asarray(t_grid, dtype=float)
    t_max = float(np.max(np.abs(t_grid)))
    spec = BesovSpec(rho, r, 2, j_range)

    def boxes(j):
        return strichartz_box(group, w, j, t_max)

    def norm_at(t):
        return besov_norm(evolve(F0, float(t)), spec, w, boxes=boxes, strict=True, panels=panels).value

    vals = np.array(list(map_fn(norm_at, t_grid)))
    if q == math.inf:
        mixed = float(vals.max())
    else:
        mixed = float(np.trapezoid(vals**q, t_grid)) ** (1.0 / q)
    return mixed / plancherel_norm(F0)


def spatial_l2_norm(group: HTypeGroup, w: DyadicWindow, j: int, t: float, m_cut: int,
                    box: tuple[float, float], tol: float = 1e-10) -> float:
    """||exp(i t L) psi_j||_2 (degrees m <= m_cut) by tensor quadrature over box.

    Panels are sized for the fastest spatial oscillation in the band; the
    box must hold the evolved kernel (its L^2 mass outside is not counted).
    """
    from .bands import band_support
    from .spherical import sphere_measure

    d, p = group.d, group.p
    R_z, R_s = box
    lam_max = band_support(group, w, j, 0)[1]
    tau_max = w.band(j)[1]
    br = np.linspace(0.0, R_z, max(8, int(np.ceil(R_z * np.sqrt(2 * tau_max) / 6))) + 1)
    bs = np.linspace(0.0, R_s, max(8, int(np.ceil(R_s * lam_max / 6))) + 1)
    r, wr = panel_rule(br, 16)
    s, ws = panel_rule(bs, 16)
    K = band_field(group, w, j, t, r, s, m_cut, level=1)
    wgt = (wr * r ** (2 * d - 1))[:, None] * (ws * s ** (p - 1))[None, :]
    total = sphere_measure(2 * d - 1) * sphere_measure(p - 1) * float(np.sum(wgt * np.abs(K) ** 2))
    return float(np.sqrt(total))


def unitarity_ratio(group: HTypeGroup, w: DyadicWindow, j: int, t: float, m_cut: int,
                    box: tuple[float, float] | None = None) -> dict:
    """Spectral and spatial ||exp(i t L) psi_j||_2 / ||psi_j||_2 for degrees <= m_cut.

    The spatial norm of the evolved kernel is compared with the Plancherel
    norm of psi_j (same truncation).
    """
    F = psi_spectral(group, w, j, m_cut)
    base = plancherel_norm(F)
    spectral = plancherel_norm(evolve(F, t)) / base
    if box is None:
        # Laguerre functions are negligible beyond lam r^2 / 2 = 4M + 60; the
        # static rho-profile of degree m lives on the scale M / lam-band
        Mc = 2 * m_cut + group.d
        lam_lo = band_support(group, w, j, m_cut)[0]
        _, s_max = search_box(group, w, j, m_box=m_cut)
        R_s = 100.0 * Mc / group.d * max(1.0, 2.0 ** (-2 * j)) + s_max * abs(t)
        box = (float(np.sqrt(2 * (4 * Mc + 60) / lam_lo)), R_s)
    spatial = spatial_l2_norm(group, w, j, t, m_cut, box) / base
    return {"spectral": spectral, "spatial": spatial, "box": box}
