"""H-type group structures built from real Clifford module generators.

A group is described by p skew-symmetric orthogonal 2d x 2d matrices U^1..U^p
that pairwise anticommute.  Elements are pairs (z, s) with z in R^{2d},
s in R^p and the law

    (z, s)(z', s') = (z + z', s + s' + 1/2 [z, z']),   [z, z']_k = <z, U^k z'>.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product

import numpy as np


class DimensionIncompatible(ValueError):
    """No Clifford module of the requested size exists for p generators."""


class ConstraintViolated(ValueError):
    """The pair (p, d) violates p + 1 <= 2d."""


# 2x2 building blocks: identity, swap, sign flip, and their skew product.
_I2 = np.array([[1, 0], [0, 1]], dtype=np.int64)
_X2 = np.array([[0, 1], [1, 0]], dtype=np.int64)
_Z2 = np.array([[1, 0], [0, -1]], dtype=np.int64)
_J2 = _Z2 @ _X2  # [[0, 1], [-1, 0]]
_BLOCKS = (_I2, _X2, _Z2, _J2)


def minimal_module_dim(p: int) -> int:
    """Dimension of an irreducible real module for p anticommuting
    complex structures (periodic with period 8, factor 16)."""
    if p < 1:
        raise ValueError("p must be >= 1")
    table = {0: 1, 1: 2, 2: 4, 3: 4, 4: 8, 5: 8, 6: 8, 7: 8}
    q, r = divmod(p, 8)
    return table[r] * 16**q


@lru_cache(maxsize=None)
def _generators(p: int, size: int) -> tuple[np.ndarray, ...]:
    # Depth-first search over tensor words in the four blocks; a word is
    # skew iff it contains an odd number of J factors.
    k = size.bit_length() - 1
    words = []
    for idx in product(range(4), repeat=k):
        if sum(1 for i in idx if i == 3) % 2 == 0:
            continue
        m = np.array([[1]], dtype=np.int64)
        for i in idx:
            m = np.kron(m, _BLOCKS[i])
        words.append(m)

    def anticommute(a, b):
        return not np.any(a @ b + b @ a)

    chosen: list[int] = []

    def dfs(start: int) -> bool:
        if len(chosen) == p:
            return True
        for i in range(start, len(words)):
            if all(anticommute(words[i], words[c]) for c in chosen):
                chosen.append(i)
                if dfs(i + 1):
                    return True
                chosen.pop()
        return False

    if not dfs(0):
        raise DimensionIncompatible(f"no {p} anticommuting generators of size {size}")
    return tuple(words[i] for i in chosen)


@dataclass(frozen=True)
class ValidationReport:
    skew_orthogonal: bool
    anticommuting: bool
    skew_violation: float
    orthogonal_violation: float
    anticommute_violation: float

    @property
    def passed(self) -> bool:
        return self.skew_orthogonal and self.anticommuting

    @property
    def max_violation(self) -> float:
        return max(self.skew_violation, self.orthogonal_violation, self.anticommute_violation)


def validate_htype(U) -> ValidationReport:
    """Check skewness/orthogonality of every matrix and pairwise anticommutation.

    Integer-valued input is compared exactly; otherwise a 1e-12 tolerance is used.
    """
    mats = [np.asarray(u) for u in U]
    if not mats:
        return ValidationReport(True, True, 0.0, 0.0, 0.0)
    n = mats[0].shape[0]
    for u in mats:
        if u.ndim != 2 or u.shape != (n, n):
            raise ValueError("all matrices must be square and of equal size")
    exact = all(np.issubdtype(u.dtype, np.integer) or np.all(u == np.round(u)) for u in mats)
    tol = 0.0 if exact else 1e-12
    eye = np.eye(n, dtype=mats[0].dtype)

    skew = max(float(np.max(np.abs(u.T + u))) for u in mats)
    orth = max(float(np.max(np.abs(u.T @ u - eye))) for u in mats)
    anti = 0.0
    for i in range(len(mats)):
        for j in range(i + 1, len(mats)):
            a, b = mats[i], mats[j]
            anti = max(anti, float(np.max(np.abs(a @ b + b @ a))))
    return ValidationReport(
        skew_orthogonal=skew <= tol and orth <= tol,
        anticommuting=anti <= tol,
        skew_violation=skew,
        orthogonal_violation=orth,
        anticommute_violation=anti,
    )


@dataclass(frozen=True)
class GroupElement:
    z: np.ndarray
    s: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "z", np.asarray(self.z, dtype=float))
        object.__setattr__(self, "s", np.asarray(self.s, dtype=float))
        if not (np.all(np.isfinite(self.z)) and np.all(np.isfinite(self.s))):
            raise ValueError("group element entries must be finite")


@dataclass(frozen=True)
class HTypeGroup:
    d: int
    p: int
    U: tuple = field(repr=False)

    @property
    def n(self) -> int:
        """Topological dimension 2d + p."""
        return 2 * self.d + self.p

    @property
    def N(self) -> int:
        """Homogeneous dimension 2d + 2p."""
        return 2 * self.d + 2 * self.p

    def identity(self) -> GroupElement:
        return GroupElement(np.zeros(2 * self.d), np.zeros(self.p))

    def _check(self, a: GroupElement):
        if a.z.shape != (2 * self.d,) or a.s.shape != (self.p,):
            raise ValueError(
                f"element dimensions {a.z.shape}, {a.s.shape} do not match (2d, p) = ({2 * self.d}, {self.p})"
            )

    def bracket(self, z, w) -> np.ndarray:
        """[z, w]_k = <z, U^k w>."""
        z = np.asarray(z, dtype=float)
        w = np.asarray(w, dtype=float)
        return np.array([z @ (u @ w) for u in self.U])


def build_htype_group(p: int, d: int) -> HTypeGroup:
    """Deterministic H-type structure with centre dimension p on R^{2d} x R^p."""
    if p < 1 or d < 1:
        raise ValueError("p and d must be positive")
    if p + 1 > 2 * d:
        raise ConstraintViolated(f"p + 1 = {p + 1} exceeds 2d = {2 * d}")
    base = minimal_module_dim(p)
    if (2 * d) % base:
        raise DimensionIncompatible(
            f"2d = {2 * d} is not a multiple of the minimal module dimension {base} for p = {p}"
        )
    copies = 2 * d // base
    gens = _generators(p, base)
    U = tuple(np.kron(np.eye(copies, dtype=np.int64), g) for g in gens)
    return HTypeGroup(d=d, p=p, U=U)


def multiply(g: HTypeGroup, a: GroupElement, b: GroupElement) -> GroupElement:
    g._check(a)
    g._check(b)
    return GroupElement(a.z + b.z, a.s + b.s + 0.5 * g.bracket(a.z, b.z))


def inverse(g: HTypeGroup, a: GroupElement) -> GroupElement:
    g._check(a)
    return GroupElement(-a.z, -a.s)


def dilate(r: float, a: GroupElement) -> GroupElement:
    """delta_r(z, s) = (r z, r^2 s)."""
    if not r > 0:
        raise ValueError("dilation factor must be positive")
    return GroupElement(r * a.z, r * r * a.s)


def j_map(g: HTypeGroup, s, u) -> np.ndarray:
    """J_s u = sum_k s_k (U^k)^T u, so that <J_s u, w> = <s, [u, w]>."""
    s = np.asarray(s, dtype=float)
    u = np.asarray(u, dtype=float)
    if s.shape != (g.p,) or u.shape != (2 * g.d,):
        raise ValueError("dimension mismatch in j_map")
    out = np.zeros(2 * g.d)
    for sk, Uk in zip(s, g.U):
        out += sk * (Uk.T @ u)
    return out
