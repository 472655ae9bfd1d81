"""Acceptance criteria 1-13, one test each; every test reports a PASS/FAIL
line (collected again in the terminal summary)."""

import math
import sys
import time
from fractions import Fraction
from math import comb, factorial, gamma

import numpy as np
import pytest
from scipy.special import roots_genlaguerre

from htype_lab import experiments
from htype_lab.algebra import build_htype_group, validate_htype
from htype_lab.cli import run
from htype_lab.config import parse_config
from htype_lab.dispersive import SharpnessExperiment, evolve, log_fit, uniform_constant, unitarity_ratio
from htype_lab.littlewood_paley import build_window, default_m_cut, partition_sum, psi_spectral, smooth_step
from htype_lab.quadrature import oscillatory_quadrature
from htype_lab.special import LaguerreEvaluator, check_laguerre_bound, laguerre_fn, laguerre_table
from htype_lab.spherical import plancherel_norm

THREADS_N = 4


def footer(path):
    out = {}
    for line in path.read_text(encoding="utf-8").splitlines():
        if line.startswith("# ") and " = " in line:
            k, v = line[2:].split(" = ", 1)
            out[k] = v
    return out


def body_rows(path):
    lines = [l for l in path.read_text(encoding="utf-8").splitlines() if not l.startswith("#")]
    return [l.split(",") for l in lines[1:]]


@pytest.fixture(scope="session")
def cli_dir(tmp_path_factory):
    return tmp_path_factory.mktemp("acceptance")


@pytest.fixture(scope="session")
def cli_runs(cli_dir):
    """CLI runs shared by criteria 2, 6, 9 (threads N) and 13 (threads 1)."""
    cache = {}

    def get(name, argv, threads):
        key = (name, threads)
        if key not in cache:
            out = cli_dir / f"{name}-t{threads}.csv"
            t0 = time.perf_counter()
            code = run(argv + ["--threads", str(threads), "--out", str(out)])
            cache[key] = (code, out, time.perf_counter() - t0)
        return cache[key]

    return get


RUNS = {
    "partition": ["partition-check"],
    "decay-p2": ["dispersive-decay"],
    "decay-p3": ["dispersive-decay", "--set", "p=3"],
    "sharpness": ["sharpness"],
}


def test_criterion_01_group_validation(acceptance_report):
    t0 = time.perf_counter()
    worst = 0
    ok = True
    for p, d in ((1, 1), (2, 2), (3, 2), (3, 4)):
        rep = validate_htype(build_htype_group(p, d).U)
        ok &= rep.passed
        worst = max(worst, rep.max_violation)
    elapsed = time.perf_counter() - t0
    ok = ok and worst == 0 and elapsed < 1.0
    assert acceptance_report(1, "group validation", ok, f"max violation {worst}, {elapsed:.3f} s")


def test_criterion_02_partition(acceptance_report, cli_runs):
    t0 = time.perf_counter()
    tau = np.geomspace(1e-3, 1e6, 1000)
    err = float(np.max(np.abs(partition_sum(build_window(), tau) - 1.0)))
    elapsed = time.perf_counter() - t0
    code, out, _ = cli_runs("partition", RUNS["partition"], THREADS_N)
    csv_err = max(float(r[2]) for r in body_rows(out))
    ok = err < 1e-12 and elapsed < 1.0 and code == 0 and csv_err < 1e-12
    assert acceptance_report(2, "partition of unity", ok, f"max |sum - 1| = {err:.2e}, {elapsed:.3f} s")


def _explicit(alpha, m, x):
    xf = Fraction(x)
    return float(sum(Fraction((-1) ** k * comb(m + alpha, m - k), factorial(k)) * xf**k
                     for k in range(m + 1)))


def test_criterion_03_laguerre(acceptance_report):
    t0 = time.perf_counter()
    rec_err = 0.0
    for alpha in range(4):
        ev = LaguerreEvaluator(alpha, 5)
        for m in range(6):
            for x in (0.0, 0.3, 1.0, 3.7, 9.25, 20.0):
                ref = _explicit(alpha, m, x) * math.exp(-x / 2)
                rec_err = max(rec_err, abs(laguerre_fn(ev, m, x) - ref) / max(1.0, abs(ref)))
    orth_err = 0.0
    for alpha in range(4):
        x, w = roots_genlaguerre(64, alpha)
        L = laguerre_table(alpha, 40, x) * np.exp(0.5 * x)
        G = (L * w) @ L.T
        h = np.array([gamma(m + alpha + 1) / factorial(m) for m in range(41)])
        orth_err = max(orth_err, float(np.max(np.abs(G - np.diag(h)) / np.sqrt(np.outer(h, h)))))
    tau = np.arange(0.0, 4 * 202 + 0.05, 0.05)
    bounded = all(check_laguerre_bound(2, k, 100, tau).bounded for k in range(3))
    elapsed = time.perf_counter() - t0
    ok = rec_err < 1e-10 and orth_err < 1e-8 and bounded and elapsed < 10
    assert acceptance_report(3, "Laguerre suite", ok,
                             f"recurrence {rec_err:.1e}, orthogonality {orth_err:.1e}, bounded {bounded}, {elapsed:.1f} s")


def test_criterion_04_round_trip_plancherel(acceptance_report):
    t0 = time.perf_counter()
    res = experiments.transform_roundtrip(parse_config(""))
    elapsed = time.perf_counter() - t0
    rt, pl = res.summary["roundtrip_rel_error"], res.summary["plancherel_rel_error"]
    ok = rt < 1e-6 and pl < 1e-6 and elapsed < 60
    assert acceptance_report(4, "transform round trip and Plancherel", ok,
                             f"round trip {rt:.1e}, Plancherel {pl:.1e}, {elapsed:.1f} s")


def test_criterion_05_unitarity(acceptance_report):
    t0 = time.perf_counter()
    g, w = build_htype_group(2, 2), build_window()
    F = psi_spectral(g, w, 0, default_m_cut(g, w, 0, 1e-6))
    base = plancherel_norm(F)
    worst_spec, worst_spat = 0.0, 0.0
    for t in (1.0, 10.0, 100.0):
        worst_spec = max(worst_spec, abs(plancherel_norm(evolve(F, t)) / base - 1))
        worst_spat = max(worst_spat, abs(unitarity_ratio(g, w, 0, t, 6)["spatial"] - 1))
    elapsed = time.perf_counter() - t0
    ok = worst_spec < 1e-6 and worst_spat < 1e-6 and elapsed < 60
    assert acceptance_report(5, "unitarity", ok,
                             f"spectral {worst_spec:.1e}, spatial (m <= 6) {worst_spat:.1e}, {elapsed:.1f} s")


@pytest.mark.slow
def test_criterion_06_dispersive_slope(acceptance_report, cli_runs):
    details, ok = [], True
    for name, target in (("decay-p2", -1.0), ("decay-p3", -1.5)):
        code, out, elapsed = cli_runs(name, RUNS[name], THREADS_N)
        f = footer(out)
        slope = float(f["slope"])
        n = len(body_rows(out))
        ok &= code == 0 and n == 16 and abs(slope - target) <= 0.15
        details.append(f"slope {slope:.3f} (target {target}), {elapsed:.0f} s")
    assert acceptance_report(6, "sharp dispersive exponent", ok, "; ".join(details))


@pytest.mark.slow
def test_criterion_07_single_constant(acceptance_report):
    g, w = build_htype_group(2, 2), build_window()
    t0 = time.perf_counter()
    tab = uniform_constant(range(-2, 3), np.geomspace(20, 200, 8), (g.p / 2, g.n - 1), g, w,
                           tol=1e-8, trunc_tol=1e-4)
    elapsed = time.perf_counter() - t0
    ok = tab.spread < 10 and np.all(np.isfinite(tab.values))
    assert acceptance_report(7, "single constant (|t|^{p/2} 2^{-j(n-1)})", ok,
                             f"max/median {tab.spread:.2f}, {elapsed:.0f} s")


def test_criterion_08_weak_time_bound(acceptance_report):
    g, w = build_htype_group(2, 2), build_window()
    tab = uniform_constant(range(-2, 1), [-1.0, -0.3, -0.1, 0.1, 0.3, 1.0], (0.5, g.N - 2), g, w, tol=1e-8, trunc_tol=1e-4)
    ok = tab.spread < 10 and np.all(np.isfinite(tab.values))
    assert acceptance_report(8, "weak-time bound (|t|^{1/2} 2^{-j(N-2)})", ok, f"max/median {tab.spread:.2f}")


@pytest.mark.slow
def test_criterion_09_sharpness(acceptance_report, cli_runs):
    code, out, elapsed = cli_runs("sharpness", RUNS["sharpness"], THREADS_N)
    f = footer(out)
    rows = [[float(x) for x in r] for r in body_rows(out)]
    late = [r[3] for r in rows if r[0] >= 100]
    slope = float(f["slope"])
    det = float(f["det_hessian"])
    ok = (code == 0 and abs(slope + 1.0) <= 0.05 and late and all(0.95 <= x <= 1.05 for x in late)
          and abs(det - 6.0) < 1e-12 and abs(SharpnessExperiment(2, 3).det_hessian - 18.0) < 1e-12
          and elapsed < 120)
    assert acceptance_report(9, "sharpness example", ok,
                             f"slope {slope:.4f}, ratios t>=100 in [{min(late):.4f}, {max(late):.4f}], "
                             f"det H {det:g}, {elapsed:.0f} s")


def test_criterion_10_oscillatory_engine(acceptance_report):
    t0 = time.perf_counter()
    w = 100.0
    lin = oscillatory_quadrature(lambda x: w * x, lambda x: np.ones_like(x), (0.0, 1.0), w).value
    e1 = abs(lin - (np.exp(1j * w) - 1) / (1j * w))
    w = 50.0
    gau = oscillatory_quadrature(lambda x: w * x * x, lambda x: np.exp(-x * x), (-8.5, 8.5), 17 * w,
                                 tol=1e-12).value
    e2 = abs(gau - np.sqrt(np.pi / (1 - 1j * w)))
    omegas = np.geomspace(1e2, 1e4, 9)
    amp = [abs(oscillatory_quadrature(lambda x, w=w: w * x * x, smooth_step, (0.0, 2.0), 4 * w,
                                      tol=1e-12).value) for w in omegas]
    slope = log_fit(omegas, amp).slope
    elapsed = time.perf_counter() - t0
    ok = e1 < 1e-10 and e2 < 1e-8 and abs(slope + 0.5) <= 0.02 and elapsed < 10
    assert acceptance_report(10, "oscillatory engine", ok,
                             f"linear {e1:.1e}, Gaussian {e2:.1e}, Fresnel slope {slope:.4f}")


def test_criterion_11_admissibility(acceptance_report):
    res = experiments.admissible_run(parse_config(""))
    n = len(res.rows)
    matches = sum(1 for r in res.rows if r[3] == r[5])
    excluded = [r for r in res.rows if r[0] == 2 and r[1] == math.inf and r[2] == 2]
    ok = n == 75 and matches == n and excluded and excluded[0][3] == 0
    assert acceptance_report(11, "admissibility", ok, f"{matches}/{n} match")


@pytest.mark.slow
def test_criterion_12_strichartz(acceptance_report):
    t0 = time.perf_counter()
    res = experiments.strichartz(parse_config(""))
    ratios = [r[1] for r in res.rows]
    spread = max(ratios) / min(ratios)
    ok = all(np.isfinite(ratios)) and spread <= 5
    assert acceptance_report(12, "Strichartz ratio", ok,
                             "ratios " + ", ".join(f"{x:.4f}" for x in ratios)
                             + f", max/min {spread:.2f}, {time.perf_counter() - t0:.0f} s")


@pytest.mark.slow
def test_criterion_13_determinism(acceptance_report, cli_runs):
    same = {}
    for name in ("partition", "decay-p2", "sharpness"):
        code1, a, _ = cli_runs(name, RUNS[name], 1)
        codeN, b, _ = cli_runs(name, RUNS[name], THREADS_N)
        same[name] = code1 == 0 and codeN == 0 and a.read_bytes() == b.read_bytes()
    ok = all(same.values())
    assert acceptance_report(13, "determinism (--threads 1 vs %d)" % THREADS_N, ok,
                             ", ".join(f"{k} {'identical' if v else 'DIFFER'}" for k, v in same.items()))


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
