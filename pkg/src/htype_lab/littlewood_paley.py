"""Dyadic windows in the spectrum of the full Laplacian, Littlewood-Paley
projections and homogeneous Besov norms."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def _flat(u):
    out = np.zeros_like(u)
    pos = u > 0
    out[pos] = np.exp(-1.0 / u[pos])
    return out


def smooth_step(x):
    """C-infinity even cutoff: 1 on [0, 1], 0 on [2, inf), monotone between."""
    x = np.abs(np.asarray(x, dtype=float))
    a = _flat(2.0 - x)
    b = _flat(x - 1.0)
    return a / (a + b)


def bump(x, center: float, half_width: float):
    """Smooth bump equal to 1 at center, supported in (center - w, center + w)."""
    u = (np.asarray(x, dtype=float) - center) / half_width
    out = np.zeros_like(u)
    inside = np.abs(u) < 1
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - u[inside] ** 2))
    return out


@dataclass(frozen=True)
class DyadicWindow:
    """R(tau) = eta(tau/2) - eta(2 tau): supported in 1/2 <= |tau| <= 4 and
    sum_j R(2^{-2j} tau) = 1 for tau != 0 by telescoping."""

    lower: float = 0.5
    upper: float = 4.0

    def eta(self, x):
        return smooth_step(x)

    def __call__(self, tau):
        tau = np.abs(np.asarray(tau, dtype=float))
        return smooth_step(0.5 * tau) - smooth_step(2.0 * tau)

    def dilated(self, j: int, tau):
        """R(2^{-2j} tau)."""
        return self(np.ldexp(np.asarray(tau, dtype=float), -2 * j))

    def band(self, j: int) -> tuple[float, float]:
        """Support [2^{2j-1}, 2^{2j+2}] of tau -> R(2^{-2j} tau)."""
        return self.lower * 4.0**j, self.upper * 4.0**j


def build_window() -> DyadicWindow:
    return DyadicWindow()


def partition_sum(w: DyadicWindow, tau, j_min: int = -40, j_max: int = 40):
    tau = np.asarray(tau, dtype=float)
    total = np.zeros_like(tau)
    for j in range(j_min, j_max + 1):
        total += w.dilated(j, tau)
    return total


def band_symbol(w: DyadicWindow, j: int):
    """Multiplier tau -> R(2^{-2j} tau)."""
    return lambda tau: w.dilated(j, tau)


def psi_spectral(group, w: DyadicWindow, j: int, m_cut: int, grid=None,
                 box: tuple[float, float] = (0.0, 0.0)):
    """Spectral function of psi_j on a band-adapted grid resolving the spatial
    box (R_z, R_s), or on a given grid."""
    from .bands import band_grid
    from .spherical import from_symbol

    if grid is None:
        grid = band_grid(group, w, j, m_cut, rho_max=box[1], r_max=box[0])
    return from_symbol(group, grid, m_cut, band_symbol(w, j))


def default_m_cut(group, w: DyadicWindow, j: int, rel_tol: float) -> int:
    """Degree cut-off with envelope tail below rel_tol times the crude bound on psi_j."""
    from .bands import crude_bound, truncation_bound

    return truncation_bound(j, rel_tol * crude_bound(group, w, j), group, w)


def psi_kernel(j: int, w: DyadicWindow, r, rho, group, m_cut: int | None = None,
               tol: float = 1e-8):
    """psi_j(r, rho), the kernel of R(2^{-2j} L), on the tensor grid r x rho.

    Cross-checked against a second (refined) lam-rule to tol relative to the
    largest value, or to tol x crude bound (the scale of sup |psi_j|) when that
    is larger; raises QuadratureNotConverged otherwise.
    """
    from .bands import checked_band_field, crude_bound

    if m_cut is None:
        m_cut = default_m_cut(group, w, j, tol)
    vals, _ = checked_band_field(group, w, j, 0.0, r, rho, m_cut, tol,
                                 atol=tol * crude_bound(group, w, j))
    out = vals.real
    return out if out.size > 1 else float(out.ravel()[0])


def project(F, j: int, w: DyadicWindow):
    """Delta_j on the spectral side: multiply by R(2^{-2j} tau)."""
    from .spherical import apply_multiplier

    return apply_multiplier(F, band_symbol(w, j))


@dataclass(frozen=True)
class BesovSpec:
    rho: float
    q: float
    r: float
    j_range: tuple[int, int]

    def __post_init__(self):
        if not (self.q == np.inf or self.q >= 1) or not (self.r == np.inf or self.r >= 1):
            raise ValueError("q and r must lie in [1, inf]")
        if self.j_range[0] > self.j_range[1]:
            raise ValueError("empty j range")

    def check_dimension(self, N: int):
        if self.q != np.inf and not self.rho < N / self.q:
            raise ValueError(f"smoothness {self.rho} must be below N/q = {N / self.q}")


@dataclass(frozen=True)
class BesovResult:
    value: float
    terms: dict          # j -> ||Delta_j f||_q
    leakage: float       # share of the r-sum carried by the two boundary indices


def band_lq_norm(F, q: float, box: tuple[float, float] | None = None,
                 panels: int | None = None) -> float:
    """L^q norm of the inverse transform of F; q = 2 goes through Plancherel.

    Without an explicit panel count the spatial panels are sized so that each
    16-node panel spans at most 6 radians of the fastest oscillation
    (lam_max in rho, sqrt(2 tau_max) in r).
    """
    from .spherical import kernel_function, l_q_norm, plancherel_norm

    if q == 2:
        return plancherel_norm(F)
    if box is None:
        raise ValueError("a spatial box (R_z, R_s) is needed for q != 2")
    if panels is None:
        active = np.abs(F.values) > 0
        lam_max = float(F.lam[active.any(axis=0)].max()) if active.any() else 1.0
        tau_max = float(F.tau[active].max()) if active.any() else 1.0
        p_r = max(16, int(np.ceil(box[0] * np.sqrt(2 * tau_max) / 6)))
        p_s = max(16, int(np.ceil(box[1] * lam_max / 6)))
    else:
        p_r = p_s = panels
    f = kernel_function(F, box[0], box[1], panels_r=p_r, panels_rho=p_s)
    return l_q_norm(f, q)


def besov_norm(F, spec: BesovSpec, w: DyadicWindow | None = None, boxes=None,
               leak_tol: float = 1e-6, strict: bool = True, panels: int | None = None) -> BesovResult:
    """(sum_j 2^{j rho r} ||Delta_j f||_q^r)^{1/r} over spec.j_range.

    boxes maps j to the spatial box used for q != 2 (a single pair is used for
    every j).  The boundary indices' share of the sum is reported as leakage;
    with strict=True a leakage above leak_tol raises ValueError.
    """
    if w is None:
        w = DyadicWindow()
    spec.check_dimension(F.group.N)
    j0, j1 = spec.j_range
    terms = {}
    for j in range(j0, j1 + 1):
        Pj = project(F, j, w)
        if not np.any(Pj.values):
            terms[j] = 0.0
            continue
        box = boxes(j) if callable(boxes) else boxes
        terms[j] = band_lq_norm(Pj, spec.q, box, panels)
    weighted = np.array([2.0 ** (j * spec.rho) * terms[j] for j in range(j0, j1 + 1)])
    if spec.r == np.inf:
        value = float(weighted.max())
        edge = float(max(weighted[0], weighted[-1]))
        leakage = edge / value if value > 0 else 0.0
    else:
        powered = weighted**spec.r
        total = float(powered.sum())
        value = total ** (1.0 / spec.r)
        leakage = float(powered[0] + (powered[-1] if powered.size > 1 else 0.0)) / total if total > 0 else 0.0
    if strict and leakage > leak_tol:
        raise ValueError(f"boundary leakage {leakage:.2e} exceeds {leak_tol:.0e}; widen j_range")
    return BesovResult(value, terms, leakage)


def square_sum_bracket(w: DyadicWindow, n: int = 4001) -> tuple[float, float]:
    """min and max of sum_j R(2^{-2j} tau)^2 over one period of the dilation."""
    tau = np.geomspace(1.0, 4.0, n)
    total = np.zeros_like(tau)
    for j in range(-3, 4):
        total += w.dilated(j, tau) ** 2
    return float(total.min()), float(total.max())


def bernstein_check(F, j: int, sigma: float, q: float, w: DyadicWindow | None = None,
                    box: tuple[float, float] | None = None) -> float:
    """||L^{sigma/2} Delta_j f||_q / (2^{j sigma} ||Delta_j f||_q)."""
    from .spherical import apply_multiplier

    if w is None:
        w = DyadicWindow()
    P = project(F, j, w)
    if sigma == 0:
        return 1.0
    Ps = apply_multiplier(P, lambda tau: np.where(tau > 0, tau, 1.0) ** (0.5 * sigma))
    num = band_lq_norm(Ps, q, box)
    den = band_lq_norm(P, q, box)
    return num / (2.0 ** (j * sigma) * den)


def psi_l1_norm(group, w: DyadicWindow, j: int, m_cut: int | None = None, box=None,
                panels: int | None = 16) -> float:
    """||psi_j||_{L^1(G)} over the static box of psi_j."""
    from .bands import static_box

    if m_cut is None:
        m_cut = default_m_cut(group, w, j, 1e-6)
    if box is None:
        box = static_box(j)
    return band_lq_norm(psi_spectral(group, w, j, m_cut, box=box), 1.0, box, panels)
