"""Laguerre functions, the Fourier transform of the sphere measure and
dyadic power sums.

The Laguerre functions are damped polynomials

    Lf_m^{(alpha)}(x) = L_m^{(alpha)}(x) exp(-x/2),

generated by running the three-term recurrence directly on the damped
values so that nothing overflows for large degree and argument.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from math import gamma, pi

import numpy as np
from scipy import special as sp
from scipy.optimize import minimize_scalar


@dataclass(frozen=True)
class LaguerreEvaluator:
    alpha: int
    m_max: int

    def __post_init__(self):
        if self.alpha < 0 or self.m_max < 0:
            raise ValueError("alpha and m_max must be non-negative")


def laguerre_table(alpha, m_max: int, x) -> np.ndarray:
    """All damped Laguerre functions of degree 0..m_max at x.

    Returns an array of shape (m_max + 1,) + x.shape.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty((m_max + 1,) + x.shape)
    out[0] = np.exp(-0.5 * x)
    if m_max >= 1:
        out[1] = (alpha + 1.0 - x) * out[0]
    for m in range(1, m_max):
        out[m + 1] = ((2 * m + alpha + 1.0 - x) * out[m] - (m + alpha) * out[m - 1]) / (m + 1)
    return out


def laguerre_fn(ev: LaguerreEvaluator, m: int, tau):
    """Damped Laguerre function of degree m (scalar or array argument)."""
    if not 0 <= m <= ev.m_max:
        raise ValueError(f"degree {m} outside [0, {ev.m_max}]")
    tau = np.asarray(tau, dtype=float)
    if np.any(tau < 0):
        raise ValueError("argument must be non-negative")
    prev = np.exp(-0.5 * tau)
    if m == 0:
        return prev if prev.ndim else float(prev)
    cur = (ev.alpha + 1.0 - tau) * prev
    for k in range(1, m):
        prev, cur = cur, ((2 * k + ev.alpha + 1.0 - tau) * cur - (k + ev.alpha) * prev) / (k + 1)
    return cur if cur.ndim else float(cur)


def _euler_expansion(k: int) -> dict[tuple[int, int], float]:
    # (x d/dx)^k Lf_m^{(a)} = sum c[i, l] x^i Lf_{m-l}^{(a+l)}, obtained from
    # (L_m^{(a)})' = -L_{m-1}^{(a+1)} and (e^{-x/2})' = -e^{-x/2}/2.
    terms = {(0, 0): 1.0}
    for _ in range(k):
        nxt: dict[tuple[int, int], float] = defaultdict(float)
        for (i, l), c in terms.items():
            if i:
                nxt[(i, l)] += i * c
            nxt[(i + 1, l + 1)] -= c
            nxt[(i + 1, l)] -= 0.5 * c
        terms = {key: v for key, v in nxt.items() if v != 0.0}
    return terms


def laguerre_scaled_derivative(ev: LaguerreEvaluator, m: int, k: int, tau):
    """(tau d/dtau)^k applied to the damped Laguerre function of degree m."""
    if k < 0 or k > ev.alpha + 1:
        raise ValueError(f"derivative order k={k} outside [0, {ev.alpha + 1}]")
    if not 0 <= m <= ev.m_max:
        raise ValueError(f"degree {m} outside [0, {ev.m_max}]")
    tau = np.asarray(tau, dtype=float)
    total = np.zeros_like(tau)
    for (i, l), c in _euler_expansion(k).items():
        if m - l < 0:
            continue
        val = laguerre_fn(LaguerreEvaluator(ev.alpha + l, m), m - l, tau)
        total = total + c * tau**i * val
    return total if total.ndim else float(total)


def scaled_derivative_table(alpha: int, k: int, m_max: int, tau) -> np.ndarray:
    """(tau d/dtau)^k Lf_m^{(alpha)}(tau) for all m <= m_max, shape (m_max+1, len(tau))."""
    tau = np.asarray(tau, dtype=float)
    out = np.zeros((m_max + 1,) + tau.shape)
    tables = {}
    for (i, l), c in _euler_expansion(k).items():
        if l not in tables:
            tables[l] = laguerre_table(alpha + l, m_max, tau)
        if l > m_max:
            continue
        out[l:] += c * tau**i * tables[l][: m_max + 1 - l]
    return out


@dataclass(frozen=True)
class BoundReport:
    d: int
    k: int
    exponent: float
    ratios: np.ndarray  # max_tau |.| / (2m+d)^exponent, indexed by m
    running_max: np.ndarray
    tail_slope: float
    bounded: bool


def check_laguerre_bound(d: int, k: int, m_max: int, tau_grid) -> BoundReport:
    """Ratios sup_tau |(tau d/dtau)^k Lf_m^{(d-1)}| / (2m+d)^e for m <= m_max.

    The exponent is d - 1 for k <= d - 1 and d - 1/4 for k = d.  The table is
    flagged bounded when the log-log slope of the ratios over the last quarter
    of the degrees does not exceed 0.05.
    """
    if not 0 <= k <= d:
        raise ValueError("need 0 <= k <= d")
    tau = np.asarray(tau_grid, dtype=float)
    t_max = 4 * (2 * m_max + d)
    if tau.min() > 0 or tau.max() < t_max:
        raise ValueError(f"tau grid must cover [0, {t_max}]")
    zone = tau[tau <= t_max]
    if np.max(np.diff(np.sort(zone))) > 0.1:
        raise ValueError("tau grid too coarse in the oscillation zone (spacing > 0.1)")
    e = d - 1.0 if k <= d - 1 else d - 0.25
    vals = scaled_derivative_table(d - 1, k, m_max, tau)
    M = 2.0 * np.arange(m_max + 1) + d
    ratios = np.max(np.abs(vals), axis=1) / M**e
    q = max(2, (m_max + 1) // 4)
    tail_M, tail_r = M[-q:], ratios[-q:]
    slope = float(np.polyfit(np.log(tail_M), np.log(tail_r), 1)[0])
    return BoundReport(
        d=d,
        k=k,
        exponent=e,
        ratios=ratios,
        running_max=np.maximum.accumulate(ratios),
        tail_slope=slope,
        bounded=bool(slope <= 0.05),
    )


@dataclass(frozen=True)
class SphereTransform:
    p: int

    def __post_init__(self):
        if self.p < 1:
            raise ValueError("p must be >= 1")

    @property
    def total_measure(self) -> float:
        return 2 * pi ** (self.p / 2) / gamma(self.p / 2)


def sphere_fourier(st: SphereTransform, r):
    """Fourier transform of the surface measure of S^{p-1}:

        (2 pi)^{p/2} r^{-(p-2)/2} J_{(p-2)/2}(r),

    real and even in r; a short Taylor series is used for |r| < 1e-3.
    """
    r = np.abs(np.asarray(r, dtype=float))
    nu = (st.p - 2) / 2
    c = (2 * pi) ** (st.p / 2)
    out = np.empty_like(r)
    small = r < 1e-3
    big = ~small
    if np.any(big):
        rb = r[big]
        if st.p == 2:
            out[big] = c * sp.j0(rb)
        elif st.p == 3:
            out[big] = 4 * pi * np.sin(rb) / rb
        else:
            out[big] = c * rb**-nu * sp.jv(nu, rb)
    if np.any(small):
        h = (0.5 * r[small]) ** 2
        acc = np.zeros_like(h)
        for kk in range(5, -1, -1):
            acc = acc * (-h) + 1.0 / (gamma(kk + 1) * gamma(kk + nu + 1))
        out[small] = c * 2.0**-nu * acc
    return out if out.ndim else float(out)


def verify_sphere_decay(st: SphereTransform, r_max: float, n: int | None = None) -> float:
    """max over r in [1, r_max] of |dsigma^(r)| (1 + r)^{(p-1)/2}."""
    if r_max < 10:
        raise ValueError("r_max must be >= 10")
    if n is None:
        n = int(min(2_000_000, 40 * r_max))
    r = np.linspace(1.0, r_max, n)

    def envelope(x):
        return np.abs(sphere_fourier(st, x)) * (1 + x) ** ((st.p - 1) / 2)

    vals = envelope(r)
    i = int(np.argmax(vals))
    lo, hi = r[max(i - 1, 0)], r[min(i + 1, n - 1)]
    res = minimize_scalar(lambda x: -envelope(x), bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-12})
    return float(max(vals[i], -res.fun))


def dyadic_sum_check(beta: float, A: float, direction: str, d: int = 1) -> tuple[float, float]:
    """Sum of M^beta over M = 2m + d with M >= A (tail) or M <= A (head).

    Returns the sum and its ratio to A^{beta+1}.  The tail is evaluated through
    the Hurwitz zeta function, so it carries no truncation error.
    """
    if A <= 0:
        raise ValueError("A must be positive")
    if direction == "tail":
        if beta >= -1:
            raise ValueError("tail sums need beta < -1")
        m0 = max(0, int(np.ceil((A - d) / 2)))
        total = 2.0**beta * float(sp.zeta(-beta, m0 + d / 2))
    elif direction == "head":
        if beta <= -1:
            raise ValueError("head sums need beta > -1")
        m_hi = int(np.floor((A - d) / 2))
        M = 2.0 * np.arange(0, m_hi + 1) + d if m_hi >= 0 else np.zeros(0)
        total = float(np.sum(M**beta))
    else:
        raise ValueError("direction must be 'tail' or 'head'")
    return total, total / A ** (beta + 1)
