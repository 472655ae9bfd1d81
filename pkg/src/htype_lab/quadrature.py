"""Composite Gauss-Legendre panels and an adaptive oscillatory integrator."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np


class QuadratureNotConverged(RuntimeError):
    pass


@lru_cache(maxsize=None)
def gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def panel_rule(breaks, order: int = 16) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the composite rule on consecutive break points."""
    breaks = np.asarray(breaks, dtype=float)
    x, w = gauss_legendre(order)
    a, b = breaks[:-1, None], breaks[1:, None]
    half = 0.5 * (b - a)
    nodes = (0.5 * (a + b) + half * x).ravel()
    weights = (half * w).ravel()
    return nodes, weights


def refine_breaks(breaks) -> np.ndarray:
    """Split every panel in two."""
    breaks = np.asarray(breaks, dtype=float)
    mid = 0.5 * (breaks[:-1] + breaks[1:])
    out = np.empty(2 * len(breaks) - 1)
    out[0::2] = breaks
    out[1::2] = mid
    return out


@dataclass(frozen=True)
class QuadResult:
    value: complex
    error: float
    panels: int

    def __complex__(self):
        return complex(self.value)


def oscillatory_quadrature(phase, amplitude, interval, omega_eff: float, tol: float = 1e-10,
                           order: int = 16, max_doublings: int = 14) -> QuadResult:
    """Integral of amplitude(x) * exp(i phase(x)) over a finite interval.

    The initial panel count grows like 1 + |omega_eff| * length, and the panel
    count is doubled until two successive results differ by less than
    tol * max(|I|, integral of |amplitude|).
    """
    a, b = map(float, interval)
    if not b > a:
        raise ValueError("empty interval")
    n0 = 1 + int(np.ceil(abs(omega_eff) * (b - a) / 6.0))
    breaks = np.linspace(a, b, n0 + 1)

    def integrate(br):
        x, w = panel_rule(br, order)
        amp = amplitude(x)
        return np.sum(w * amp * np.exp(1j * phase(x))), np.sum(w * np.abs(amp))

    prev, _ = integrate(breaks)
    for _ in range(max_doublings):
        breaks = refine_breaks(breaks)
        cur, scale = integrate(breaks)
        err = abs(cur - prev)
        if err <= tol * max(abs(cur), scale) or err == 0.0:
            return QuadResult(complex(cur), float(err), len(breaks) - 1)
        prev = cur
    raise QuadratureNotConverged(
        f"oscillatory quadrature did not reach tol={tol} after {max_doublings} doublings (last change {err:.3e})"
    )
