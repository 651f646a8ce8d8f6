"""Exact enumeration of the hexagonal lattice ``spacing * (u + v e^{i pi/3})``.

Inclusion in a disc is decided on the integer quadratic form ``u^2 + u v + v^2``
so that points sitting exactly on a shell radius are never lost to rounding.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .errors import DomainError

__all__ = [
    "LatticeSpec",
    "LatticePoint",
    "DENSITY_UNIT",
    "norm_limit",
    "enumerate_lattice",
    "lattice_arrays",
    "sector_norm_chunks",
    "count_points",
    "epstein_tail_bound",
    "epstein_tail_estimate",
]

# Points per unit area of the unit-spacing lattice.
DENSITY_UNIT = 2.0 / math.sqrt(3.0)
_E60 = cmath.exp(1j * math.pi / 3.0)


@dataclass(frozen=True)
class LatticeSpec:
    spacing: float = 1.0

    def __post_init__(self) -> None:
        if not self.spacing > 0:
            raise DomainError(f"spacing must be > 0, got {self.spacing}")

    @property
    def density(self) -> float:
        return DENSITY_UNIT / self.spacing**2

    def position(self, u: int, v: int) -> complex:
        return self.spacing * (u + v * _E60)


@dataclass(frozen=True)
class LatticePoint:
    u: int
    v: int
    position: complex
    norm: float

    @property
    def norm_sq_units(self) -> int:
        return self.u * self.u + self.u * self.v + self.v * self.v


def norm_limit(spec: LatticeSpec, max_norm: float) -> int:
    """Largest integer ``u^2 + uv + v^2`` admitted by ``|s| <= max_norm``."""
    return int(math.floor((max_norm / spec.spacing) ** 2))


def lattice_arrays(limit: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(u, v, u^2+uv+v^2)`` for every non-origin point with squared unit norm <= ``limit``."""
    if limit < 1:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty, empty
    # |u|, |v| <= 2 sqrt(limit / 3) inside the disc
    span = int(math.isqrt(4 * limit // 3)) + 1
    axis = np.arange(-span, span + 1, dtype=np.int64)
    u, v = np.meshgrid(axis, axis, indexing="ij")
    n = u * u + u * v + v * v
    keep = (n > 0) & (n <= limit)
    return u[keep], v[keep], n[keep]


def enumerate_lattice(spec: LatticeSpec, max_norm: float) -> list[LatticePoint]:
    """Every non-origin point with ``|s| <= max_norm``, ordered by norm then angle."""
    if not max_norm > 0:
        raise DomainError(f"max_norm must be > 0, got {max_norm}")
    u, v, n = lattice_arrays(norm_limit(spec, max_norm))
    pos = spec.spacing * (u + v * _E60)
    angle = np.mod(np.angle(pos), 2.0 * math.pi)
    order = np.lexsort((angle, n))
    return [
        LatticePoint(int(u[j]), int(v[j]), complex(pos[j]), spec.spacing * math.sqrt(int(n[j])))
        for j in order
    ]


def _row_extent(u: int, limit: int) -> int:
    # largest v >= 0 with u^2 + u v + v^2 <= limit (requires u^2 <= limit)
    v = (math.isqrt(4 * limit - 3 * u * u) - u) // 2
    while (v + 1) * (v + 1) + u * (v + 1) + u * u <= limit:
        v += 1
    while v > 0 and v * v + u * v + u * u > limit:
        v -= 1
    return v


def sector_norm_chunks(limit: int, chunk: int = 1 << 22) -> Iterator[np.ndarray]:
    """Squared unit norms of the points with ``u >= 1, v >= 0`` (one sixth of the lattice).

    Rotating that sector by multiples of 60 degrees covers every non-origin point
    exactly once.  Yields int64 arrays of roughly ``chunk`` entries, in a fixed order.
    """
    u_top = math.isqrt(limit)
    rows_u: list[int] = []
    rows_len: list[int] = []
    pending = 0
    for u in range(1, u_top + 1):
        length = _row_extent(u, limit) + 1
        rows_u.append(u)
        rows_len.append(length)
        pending += length
        if pending >= chunk:
            yield _rows_to_norms(rows_u, rows_len)
            rows_u, rows_len, pending = [], [], 0
    if rows_u:
        yield _rows_to_norms(rows_u, rows_len)


def _rows_to_norms(rows_u: list[int], rows_len: list[int]) -> np.ndarray:
    lengths = np.asarray(rows_len, dtype=np.int64)
    u = np.repeat(np.asarray(rows_u, dtype=np.int64), lengths)
    starts = np.cumsum(lengths) - lengths
    v = np.arange(u.size, dtype=np.int64) - np.repeat(starts, lengths)
    return u * u + u * v + v * v


def count_points(limit: int) -> int:
    """Number of lattice points, origin included, with squared unit norm <= ``limit``."""
    if limit < 0:
        return 0
    return 1 + 6 * sum(_row_extent(u, limit) + 1 for u in range(1, math.isqrt(limit) + 1))


def epstein_tail_bound(b: float, spec: LatticeSpec, max_norm: float) -> float:
    """Upper bound on ``sum_{|s| > max_norm} |s|^{-2b}``.

    Lattice density times ``int_{max_norm}^inf r^{-2b} 2 pi r dr``, doubled as a
    safety margin.
    """
    if not b > 1:
        raise DomainError(f"epstein_tail_bound requires b > 1, got {b}")
    if not max_norm >= 2 * spec.spacing:
        raise DomainError(f"max_norm must be >= 2 * spacing, got {max_norm}")
    integral = 2.0 * math.pi * max_norm ** (2.0 - 2.0 * b) / (2.0 * b - 2.0)
    return 2.0 * spec.density * integral


def epstein_tail_estimate(b: float, spec: LatticeSpec, max_norm: float, n_inside: int) -> float:
    """Estimate of ``sum_{|s| > max_norm} |s|^{-2b}`` with the boundary correction.

    Writing the tail as a Stieltjes integral against the point count ``N(r)`` and
    integrating by parts, only the smooth part ``density * pi r^2`` of ``N`` is
    approximated; the exact count ``n_inside = N(max_norm)`` (origin included)
    fixes the boundary term.  The leftover error is driven by the lattice-point
    discrepancy beyond ``max_norm`` and is far below ``epstein_tail_bound``.
    """
    if not b > 1:
        raise DomainError(f"epstein_tail_estimate requires b > 1, got {b}")
    area_count = spec.density * math.pi * max_norm**2
    smooth = spec.density * math.pi * max_norm ** (2.0 - 2.0 * b) / (b - 1.0)
    return smooth - (n_inside - area_count) * max_norm ** (-2.0 * b)
