"""Verification experiments.  Each returns an ExperimentResult holding a CSV
table, a summary for the footer and the pass/fail verdict of its checks."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import algebra, special
from .bands import band_grid
from .config import ExperimentConfig
from .dispersive import (SharpnessExperiment, admissible, fit_decay, sharpness_run,
                         strichartz_box, strichartz_ratio, uniform_constant)
from .littlewood_paley import build_window, default_m_cut, partition_sum, psi_spectral
from .spherical import heat_kernel, heat_spectral, inverse_transform


@dataclass
class ExperimentResult:
    header: list[str]
    rows: list[tuple]
    summary: dict = field(default_factory=dict)
    passed: bool = True


def _group(cfg: ExperimentConfig):
    return algebra.build_htype_group(cfg.p, cfg.d)


def validate_group(cfg: ExperimentConfig, map_fn=map) -> ExperimentResult:
    g = _group(cfg)
    rep = algebra.validate_htype(g.U)
    rows = [(cfg.p, cfg.d, rep.skew_violation, rep.orthogonal_violation, rep.anticommute_violation)]
    return ExperimentResult(["p", "d", "skew_violation", "orthogonal_violation", "anticommute_violation"],
                            rows, {"max_violation": rep.max_violation}, rep.passed and rep.max_violation == 0)


def partition_check(cfg: ExperimentConfig, map_fn=map) -> ExperimentResult:
    w = build_window()
    tau = np.geomspace(1e-3, 1e6, 1000)
    total = partition_sum(w, tau)
    err = np.abs(total - 1.0)
    rows = list(zip(tau, total, err))
    return ExperimentResult(["tau", "window_sum", "abs_error"], rows, {"max_abs_error": float(err.max())},
                            bool(err.max() < 1e-12))


def laguerre_bounds(cfg: ExperimentConfig, map_fn=map) -> ExperimentResult:
    d, m_max = cfg.d, 100
    tau = np.arange(0.0, 4 * (2 * m_max + d) + 0.05, 0.05)
    reports = list(map_fn(lambda k: special.check_laguerre_bound(d, k, m_max, tau), range(d + 1)))
    rows = [tuple([m] + [rep.ratios[m] for rep in reports]) for m in range(m_max + 1)]
    summary = {f"tail_slope_k{rep.k}": rep.tail_slope for rep in reports}
    return ExperimentResult(["m"] + [f"ratio_k{k}" for k in range(d + 1)], rows, summary,
                            all(rep.bounded for rep in reports))


def transform_roundtrip(cfg: ExperimentConfig, map_fn=map) -> ExperimentResult:
    from .spherical import BiRadialFunction, _tensor_eval, l_q_norm, plancherel_norm

    g = _group(cfg)
    t, m_max = 1.0, 2000
    F = heat_spectral(g, t, m_max)
    r = np.array([0.0, 0.5, 1.0, 2.0, 4.0])
    rho = np.array([0.0, 0.5, 1.0, 3.0, 8.0])
    inv = inverse_transform(F, r[:, None], rho[None, :], check_hypothesis=None).real
    exact = heat_kernel(g, t, r, rho)
    rel = float(np.abs(inv - exact).max() / np.abs(exact).max())
    f = BiRadialFunction(g, lambda a, b: _tensor_eval(lambda x, y: heat_kernel(g, t, x, y), a, b),
                         10.0, 24.0, panels_r=10, panels_rho=16)
    pl = plancherel_norm(F)
    l2 = l_q_norm(f, 2.0)
    rows = [(r[i], rho[k], inv[i, k], exact[i, k], abs(inv[i, k] - exact[i, k]))
            for i in range(r.size) for k in range(rho.size)]
    summary = {"roundtrip_rel_error": rel, "plancherel_norm": pl, "spatial_l2_norm": l2,
               "plancherel_rel_error": abs(pl / l2 - 1)}
    return ExperimentResult(["r", "rho", "inverse_transform", "heat_kernel", "abs_error"], rows, summary,
                            rel < 1e-6 and abs(pl / l2 - 1) < 1e-6)


def dispersive_decay(cfg: ExperimentConfig, map_fn=map) -> ExperimentResult:
    g = _group(cfg)
    w = build_window()
    kw = dict(tol=cfg.tol, trunc_tol=cfg.trunc_tol, box=cfg.search_box())
    if cfg.m_cut:
        kw["m_cut"] = cfg.m_cut
    fit = fit_decay(cfg.j, cfg.t_grid(), g, w, map_fn=map_fn, **kw)
    rows = [(t, s.value, s.r, s.rho) for t, s in zip(cfg.t_grid(), fit.samples)]
    target = -cfg.p / 2
    summary = {"slope": fit.slope, "target": target, "residual": fit.residual,
               "max_truncation_rel": max(s.truncation / s.value for s in fit.samples)}
    return ExperimentResult(["t", "sup_norm", "argmax_r", "argmax_rho"], rows, summary,
                            abs(fit.slope - target) <= 0.15)


def uniform_constant_run(cfg: ExperimentConfig, map_fn=map) -> ExperimentResult:
    g = _group(cfg)
    w = build_window()
    kw = dict(tol=cfg.tol, trunc_tol=cfg.trunc_tol)
    tab = uniform_constant(range(cfg.j_min, cfg.j_max + 1), cfg.t_grid(), (g.p / 2, g.n - 1), g, w,
                           map_fn=map_fn, **kw)
    rows = [(j, t, tab.sups[(j, t)].value, c) for (j, t), c in tab.table.items()]
    return ExperimentResult(["j", "t", "sup_norm", "C"], rows,
                            {"max_over_median": tab.spread, "max": tab.max}, tab.spread < 10)


def sharpness(cfg: ExperimentConfig, map_fn=map) -> ExperimentResult:
    ex = SharpnessExperiment(cfg.d, cfg.p, tuple(cfg.t_grid()))
    rows, fit = sharpness_run(ex, map_fn=map_fn)
    late = [r[3] for r in rows if r[0] >= 100]
    ok_ratio = all(0.95 <= x <= 1.05 for x in late)
    summary = {"slope": fit.slope, "target": -cfg.p / 2, "det_hessian": ex.det_hessian}
    return ExperimentResult(["t", "abs_u", "predicted", "ratio"], rows, summary,
                            abs(fit.slope + cfg.p / 2) <= 0.05 and ok_ratio)


ADMISSIBLE_GRID = (2.0, 8.0 / 3.0, 4.0, 8.0, math.inf)


def direct_admissible(q: float, r: float, p: int) -> bool:
    """Conditions checked by plain float arithmetic (independent of admissible())."""
    lhs = 0.0 if q == math.inf else 2.0 / q
    rhs = p * (0.5 - (0.0 if r == math.inf else 1.0 / r))
    return math.isclose(lhs, rhs, rel_tol=1e-12, abs_tol=1e-12) and not (q == 2 and r == math.inf and p == 2)


def admissible_run(cfg: ExperimentConfig, map_fn=map) -> ExperimentResult:
    n = 2 * cfg.d + cfg.p
    rows = []
    ok = True
    for p in (2, 3, 4):
        for q in ADMISSIBLE_GRID:
            for r in ADMISSIBLE_GRID:
                a, rho = admissible(q, r, p, n)
                b = direct_admissible(q, r, p)
                ok &= a == b
                rows.append((q, r, p, int(a), rho, int(b)))
    return ExperimentResult(["q", "r", "p", "admissible", "rho", "direct"], rows, {"matches": ok}, ok)


def strichartz_data(g, w, k: int, t_max: float, rel_tol: float = 1e-3):
    """psi_k on a lam-grid resolving exp(i t L) for |t| <= t_max on its Strichartz box."""
    m_cut = default_m_cut(g, w, k, rel_tol)
    box = strichartz_box(g, w, k + 1, t_max)
    grid = band_grid(g, w, k, m_cut, t=t_max, rho_max=box[1], r_max=box[0])
    return psi_spectral(g, w, k, m_cut, grid=grid)


def strichartz(cfg: ExperimentConfig, map_fn=map) -> ExperimentResult:
    g = _group(cfg)
    w = build_window()
    t_grid = np.linspace(0.0, cfg.strichartz_t_max, cfg.strichartz_t_count)
    ks = (-1, 0, 1)

    def one(k):
        F = strichartz_data(g, w, k, cfg.strichartz_t_max)
        return strichartz_ratio(F, 4.0, 4.0, g, w, t_grid, (k - 2, k + 2))

    ratios = list(map_fn(one, ks))
    spread = max(ratios) / min(ratios)
    rows = [(k, x) for k, x in zip(ks, ratios)]
    return ExperimentResult(["k", "ratio"], rows, {"max_over_min": spread},
                            bool(np.all(np.isfinite(ratios)) and spread <= 5))


EXPERIMENTS = {
    "validate-group": validate_group,
    "partition-check": partition_check,
    "laguerre-bounds": laguerre_bounds,
    "transform-roundtrip": transform_roundtrip,
    "dispersive-decay": dispersive_decay,
    "uniform-constant": uniform_constant_run,
    "sharpness": sharpness,
    "admissible": admissible_run,
    "strichartz": strichartz,
}
