import numpy as np
import pytest

from htype_lab.bands import band_field, band_support, static_box
from htype_lab.littlewood_paley import (BesovSpec, DyadicWindow, bernstein_check, besov_norm,
                                        build_window, default_m_cut, partition_sum, project,
                                        psi_kernel, psi_l1_norm, psi_spectral, smooth_step,
                                        square_sum_bracket)
from htype_lab.spherical import SpectralGrid, from_symbol, heat_spectral, plancherel_norm


@pytest.fixture(scope="module")
def heat(g22):
    return heat_spectral(g22, 1.0, 2000)


def test_partition_examples(window):
    tau = np.array([0.01, 1.0, 7.0, 1e3])
    assert np.max(np.abs(partition_sum(window, tau, -8, 8) - 1.0)) < 1e-12
    assert window(0.4) == 0.0 and window(4.1) == 0.0


def test_partition_log_grid(window):
    tau = np.geomspace(1e-3, 1e6, 1000)
    assert np.max(np.abs(partition_sum(window, tau) - 1.0)) < 1e-12


def test_window_shape(window):
    x = np.linspace(0, 3, 3001)
    eta = smooth_step(x)
    assert np.all(eta[x <= 1] == 1.0) and np.all(eta[x >= 2] == 0.0)
    assert np.all(np.diff(eta) <= 0)
    tau = np.linspace(-6, 6, 4001)
    R = window(tau)
    assert np.all(R >= 0) and np.array_equal(R, window(-tau))
    assert np.all(R[(np.abs(tau) < 0.5) | (np.abs(tau) > 4)] == 0)


def test_support_disjointness(window):
    tau = np.geomspace(1e-4, 1e4, 20001)
    for j in range(-5, 5):
        for k in range(j + 2, j + 6):
            assert np.all(window.dilated(j, tau) * window.dilated(k, tau) == 0)


def test_square_sum_bracket(window):
    lo, hi = square_sum_bracket(window)
    assert 0.5 <= lo <= hi <= 1.0 + 1e-15


@pytest.mark.parametrize("j", [-2, -1, 0, 1, 2])
def test_psi_kernel_at_origin(g22, window, j):
    v = psi_kernel(j, window, [0.0], [0.0], g22)
    assert np.isfinite(v) and v > 0


def test_psi_kernel_real(g22, window):
    vals = band_field(g22, window, 0, 0.0, np.linspace(0, 4, 9), np.linspace(0, 12, 13), 400)
    assert np.abs(vals.imag).max() == 0.0


def test_psi_spectral_support(g22, window):
    F = psi_spectral(g22, window, 1, 200)
    lo, hi = window.band(1)
    outside = (F.tau < lo) | (F.tau > hi)
    assert outside.any() and np.all(F.values[outside] == 0)
    assert np.all(F.values[~outside] >= 0)
    for m in (0, 10, 200):
        a, b = band_support(g22, window, 1, m)
        M = 2 * m + 2
        assert M * a + a * a == pytest.approx(lo) and M * b + b * b == pytest.approx(hi)


def test_psi_l1_uniform(g22, window):
    norms = [psi_l1_norm(g22, window, j, m_cut=default_m_cut(g22, window, j, 1e-4)) for j in range(-3, 4)]
    norms = np.array(norms)
    assert np.all(np.isfinite(norms)) and norms.max() / np.median(norms) < 10


def test_psi_decays_superpolynomially(g22, window):
    # shell maxima of |psi_0| beyond homogeneous radius c = max(r, sqrt(rho))
    r = np.linspace(0, 16, 129)
    s = np.linspace(0, 256, 1025)
    K = np.abs(band_field(g22, window, 0, 0.0, r, s, default_m_cut(g22, window, 0, 1e-6), level=1).real)
    hom = np.maximum(r[:, None], np.sqrt(s[None, :]))
    c = np.array([1, 2, 4, 8, 16])
    shell = np.array([K[hom >= x].max() for x in c])
    rates = np.log2(shell[:-1] / shell[1:])
    assert np.all(np.diff(rates) > 0) and rates[-1] > 6
    weighted = c**4 * shell
    assert np.all(np.diff(weighted[2:]) < 0)
    assert weighted[-1] < 0.5 * K[0, 0]


def test_project_telescopes(heat, window):
    total = project(heat, -3, window)
    for j in range(-2, 4):
        total = total + project(heat, j, window)
    inside = (heat.tau >= 2.0**-6) & (heat.tau <= 2.0**7)
    assert np.max(np.abs(total.values - heat.values)[inside]) < 1e-12


def test_project_disjoint_and_contractive(g22, heat, window):
    F = psi_spectral(g22, window, 0, 200)
    for k in (-3, -2, 2, 3):
        assert np.all(project(F, k, window).values == 0)
    for j in range(-3, 4):
        assert plancherel_norm(project(heat, j, window)) <= plancherel_norm(heat)


def test_besov_l2_equivalence(g22, heat, window):
    lo, hi = square_sum_bracket(window)
    res = besov_norm(heat, BesovSpec(0.0, 2.0, 2.0, (-8, 4)), window)
    ratio = res.value / plancherel_norm(heat)
    assert np.sqrt(lo) - 1e-12 <= ratio <= np.sqrt(hi) + 1e-12
    assert 0.5 <= ratio <= 2.0
    assert res.leakage < 1e-6


def test_besov_zero(g22, window):
    grid = SpectralGrid(np.linspace(0.1, 3.0, 8))
    F = from_symbol(g22, grid, 5, lambda tau: np.zeros_like(tau))
    assert besov_norm(F, BesovSpec(0.0, 2.0, 2.0, (-2, 2)), window).value == 0.0


def test_besov_leakage_reported(g22, heat, window):
    with pytest.raises(ValueError):
        besov_norm(heat, BesovSpec(0.0, 2.0, 2.0, (-1, 1)), window)


def test_besov_smoothness_limit(g22, heat, window):
    with pytest.raises(ValueError):
        besov_norm(heat, BesovSpec(9.0, 1.0, 1.0, (-1, 1)), window)


def test_besov_norm_of_psi0_finite(g22, window):
    F = psi_spectral(g22, window, 0, default_m_cut(g22, window, 0, 1e-4), box=static_box(-1))
    spec = BesovSpec(g22.n - 1, 1.0, 1.0, (-3, 3))
    res = besov_norm(F, spec, window, boxes=static_box)
    assert np.isfinite(res.value) and res.value > 0
    assert set(j for j, v in res.terms.items() if v > 0) == {-1, 0, 1}


def test_bernstein_q2_band_bound(heat, window):
    for j in (-1, 0, 1):
        assert bernstein_check(heat, j, 0.0, 2.0, window) == 1.0
        for sigma in (-2.0, -1.0, 1.0, 2.0):
            ratio = bernstein_check(heat, j, sigma, 2.0, window)
            # (tau / 4^j)^{sigma/2} with tau / 4^j in [1/2, 4]
            ends = (0.5 ** (sigma / 2), 4.0 ** (sigma / 2))
            assert min(ends) * (1 - 1e-12) <= ratio <= max(ends) * (1 + 1e-12)
            assert ratio <= 2.0 ** abs(sigma)


@pytest.mark.slow
def test_bernstein_uniform_sup_norm(g22, window):
    ratios = []
    for j in range(-3, 4):
        box = static_box(j)
        F = psi_spectral(g22, window, j, default_m_cut(g22, window, j, 1e-4), box=box)
        for sigma in (-2.0, 2.0):
            ratios.append(bernstein_check(F, j, sigma, np.inf, window, box))
    ratios = np.array(ratios)
    assert np.all(np.isfinite(ratios)) and ratios.max() / ratios.min() < 10
