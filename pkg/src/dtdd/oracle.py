"""Brute-force references for every closed form: lattice sums, quadrature, Monte-Carlo.

Nothing here touches the zeta kernels or the ISR series, so agreement between the
two routes is a real check.  Lattice sums run over the unit-spacing lattice:

* points up to ``near_radius`` are summed directly around the shifted center;
* points out to ``lattice_max_norm`` enter through their power moments
  ``sum |s|^{-2(b+p)}`` weighted by the exact ring average of ``|s - w|^{-2b}``
  (6-fold symmetry kills the angular harmonics up to order ``(|w|/near)^6``);
* the remainder beyond ``lattice_max_norm`` uses the boundary-corrected integral
  of :func:`dtdd.hexlattice.epstein_tail_estimate`, and its conservative bound is
  reported as ``tail_bound``.

Random draws use numpy's PCG64 seeded through ``SeedSequence(seed, spawn_key=(stream,))``
and split into fixed-size chunks, each with its own spawned child.  Chunk results
are reduced in chunk order, so output does not depend on the worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .cluster import ClusterParams, SmallCellQuery, noise_term
from .errors import DomainError
from .hexlattice import (
    LatticeSpec,
    count_points,
    epstein_tail_bound,
    epstein_tail_estimate,
    lattice_arrays,
    sector_norm_chunks,
)
from .isr import NetworkParams, ul_exponent

__all__ = [
    "OracleConfig",
    "OracleResult",
    "LatticeField",
    "epstein_sums",
    "mc_disc_sum",
    "oracle_dl_dl",
    "oracle_ul_dl",
    "oracle_ul_ul",
    "oracle_dl_ul",
    "theta_mean",
    "cluster_coefficient",
    "oracle_cluster_dl_ul",
    "oracle_coverage",
    "oracle_coverage_curve",
]

_UNIT = LatticeSpec(1.0)
_E60 = complex(0.5, math.sqrt(3.0) / 2.0)
# Radial moments kept in the far-field expansion.
_FAR_ORDER = 5
STREAM_CLUSTER = 0
STREAM_COVERAGE = 1


@dataclass(frozen=True)
class OracleConfig:
    """Truncation, quadrature and sampling settings.

    Radii are in lattice spacings.  ``mc_radius`` is the ring of nearest clusters
    sampled by Monte-Carlo in the cluster oracle; farther clusters are integrated
    deterministically.
    """

    lattice_max_norm: float = 300.0
    quad_radial_order: int = 64
    quad_angular_order: int = 128
    mc_draws: int = 1_000_000
    seed: int = 20180611
    near_radius: float = 20.0
    mc_radius: float = 3.0
    mc_chunk: int = 16384
    workers: int = 1

    def __post_init__(self) -> None:
        if not self.lattice_max_norm >= 10.0:
            raise DomainError(f"lattice_max_norm must be >= 10 spacings, got {self.lattice_max_norm}")
        if not 2.0 <= self.near_radius <= self.lattice_max_norm:
            raise DomainError(f"near_radius must lie in [2, lattice_max_norm], got {self.near_radius}")
        if not 1.0 <= self.mc_radius < self.near_radius:
            raise DomainError(f"mc_radius must lie in [1, near_radius), got {self.mc_radius}")
        for name in ("quad_radial_order", "quad_angular_order", "mc_draws", "mc_chunk", "workers"):
            if getattr(self, name) < 1:
                raise DomainError(f"{name} must be positive, got {getattr(self, name)}")
        if not 0 <= self.seed < 2**64:
            raise DomainError(f"seed must be an unsigned 64-bit integer, got {self.seed}")


@dataclass(frozen=True)
class OracleResult:
    value: float
    tail_bound: float = 0.0
    mc_stderr: float = 0.0


def _rising_sq(b: float, p: int) -> float:
    # ((b)_p / p!)^2, ring average coefficient of |1 - t e^{ia}|^{-2b}
    out = 1.0
    for j in range(p):
        out *= (b + j) / (j + 1.0)
    return out * out


class LatticeField:
    """``F(w) = sum |s - w|^{-2b}`` over unit-lattice points with ``inner < |s|``."""

    def __init__(
        self,
        b: float,
        max_norm: float = 300.0,
        near_radius: float = 20.0,
        inner_radius: float = 0.0,
    ) -> None:
        if not b > 1:
            raise DomainError(f"LatticeField requires b > 1, got {b}")
        self.b = b
        self.max_norm = max_norm
        self.near_radius = min(near_radius, max_norm)
        limit_max = int(math.floor(max_norm * max_norm))
        limit_near = int(math.floor(self.near_radius**2))
        limit_inner = int(math.floor(inner_radius * inner_radius))
        u, v, n = lattice_arrays(limit_max)
        near = (n > limit_inner) & (n <= limit_near)
        pos = u[near] + v[near] * _E60
        self.near_points = pos
        far_n = n[n > max(limit_near, limit_inner)].astype(np.float64)
        ln_far = np.log(far_n)
        n_inside = count_points(limit_max)
        self.moments = []
        for p in range(_FAR_ORDER + 1):
            beta = b + p
            annulus = math.fsum(np.exp(-beta * ln_far)) if far_n.size else 0.0
            tail = epstein_tail_estimate(beta, _UNIT, max_norm, n_inside)
            self.moments.append(_rising_sq(b, p) * (annulus + tail))
        self._tail_bound = epstein_tail_bound(b, _UNIT, max_norm)

    def __call__(self, w: np.ndarray | complex) -> np.ndarray:
        w = np.atleast_1d(np.asarray(w, dtype=np.complex128))
        out = np.empty(w.shape, dtype=np.float64)
        flat_w = w.ravel()
        flat_out = out.reshape(-1)
        pts = self.near_points
        step = max(1, 4_000_000 // max(1, pts.size))
        for lo in range(0, flat_w.size, step):
            chunk = flat_w[lo : lo + step]
            d = pts[None, :] - chunk[:, None]
            d2 = d.real * d.real + d.imag * d.imag
            flat_out[lo : lo + step] = np.sum(d2 ** (-self.b), axis=1)
        r2 = (w.real * w.real + w.imag * w.imag).reshape(-1)
        far = np.zeros_like(r2)
        for p in reversed(range(_FAR_ORDER + 1)):
            far = far * r2 + self.moments[p]
        flat_out += far
        return out

    def tail_bound(self, shift: float) -> float:
        """Bound on the contribution beyond ``max_norm`` for centers with ``|w| <= shift``."""
        return self._tail_bound * (self.max_norm / (self.max_norm - shift)) ** (2.0 * self.b)


@lru_cache(maxsize=64)
def _field(b: float, max_norm: float, near_radius: float, inner_radius: float = 0.0) -> LatticeField:
    return LatticeField(b, max_norm, near_radius, inner_radius)


def epstein_sums(zs: Sequence[float], max_norm: float, chunk: int = 1 << 22) -> list[OracleResult]:
    """``sum_{s != 0} (u^2+uv+v^2)^{-z}`` for each ``z``, truncated at ``|s| <= max_norm``.

    The truncated part is an exact lattice sweep over one sixth of the plane; the
    remainder is the boundary-corrected tail estimate, with its bound alongside.
    """
    zs = [float(z) for z in zs]
    for z in zs:
        if not z > 1:
            raise DomainError(f"epstein sum diverges for z <= 1, got {z}")
    limit = int(math.floor(max_norm * max_norm))
    partial: list[list[float]] = [[] for _ in zs]
    for norms in sector_norm_chunks(limit, chunk):
        ln_n = np.log(norms.astype(np.float64))
        for j, z in enumerate(zs):
            partial[j].append(float(np.sum(np.exp(-z * ln_n))))
    n_inside = count_points(limit)
    return [
        OracleResult(
            6.0 * math.fsum(partial[j]) + epstein_tail_estimate(z, _UNIT, max_norm, n_inside),
            epstein_tail_bound(z, _UNIT, max_norm),
        )
        for j, z in enumerate(zs)
    ]


def _disc_nodes(n_radial: int, n_angular: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes/weights for t in [0, 1] and uniform angles."""
    t, wt = np.polynomial.legendre.leggauss(n_radial)
    t = 0.5 * (t + 1.0)
    wt = 0.5 * wt
    phi = 2.0 * math.pi * (np.arange(n_angular) + 0.5) / n_angular
    return t, wt, np.exp(1j * phi)


@lru_cache(maxsize=512)
def _ring_means(field: LatticeField, center: complex, radius: float, oc: OracleConfig) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Angular means of ``F(center - radius t e^{i phi})`` at the radial nodes ``t``."""
    t, wt, rot = _disc_nodes(oc.quad_radial_order, oc.quad_angular_order)
    nodes = center - radius * t[:, None] * rot[None, :]
    ring = field(nodes).reshape(t.size, rot.size).mean(axis=1)
    return t, wt, ring


def _disc_average(
    field: LatticeField,
    center: complex,
    radius: float,
    weight_power: float,
    oc: OracleConfig,
) -> float:
    """``(1/pi) int_0^1 int_0^{2pi} t^{weight_power} F(center - radius t e^{i phi}) dphi dt``."""
    t, wt, ring = _ring_means(field, complex(center), float(radius), oc)
    return 2.0 * float(np.sum(wt * t**weight_power * ring))


def oracle_dl_dl(x: float, theta: float, net: NetworkParams, oc: OracleConfig = OracleConfig()) -> OracleResult:
    """``r^{2b} sum_{s != 0} |s - r e^{i theta}|^{-2b}`` by direct lattice summation."""
    if not 0.0 <= x < 1.0 / math.sqrt(3.0):
        raise DomainError(f"x must lie in [0, 1/sqrt(3)), got {x}")
    if x == 0.0:
        return OracleResult(0.0)
    field = _field(net.b, oc.lattice_max_norm, oc.lattice_max_norm)
    scale = x ** (2.0 * net.b)
    value = scale * float(field(x * complex(math.cos(theta), math.sin(theta)))[0])
    return OracleResult(value, scale * field.tail_bound(x))


def oracle_ul_dl(x: float, theta: float, net: NetworkParams, oc: OracleConfig = OracleConfig()) -> OracleResult:
    """UL->DL ISR by quadrature over interferer positions in each disc of radius R.

    ``(P*/P) x^{2b} R^{2bk} (1/pi) int int t^{2bk+1} F(m/delta - (R/delta) t e^{i phi})``.
    """
    if not 0.0 <= x < 1.0 / math.sqrt(3.0):
        raise DomainError(f"x must lie in [0, 1/sqrt(3)), got {x}")
    if x + net.radius_ratio >= 1.0:
        raise DomainError(f"x + R/delta must be < 1, got {x + net.radius_ratio}")
    if x == 0.0:
        return OracleResult(0.0)
    b, bk = net.b, net.b * net.k
    field = _field(b, oc.lattice_max_norm, oc.near_radius)
    center = x * complex(math.cos(theta), math.sin(theta))
    integral = _disc_average(field, center, net.radius_ratio, 2.0 * bk + 1.0, oc)
    scale = net.p_target / net.p_dl * x ** (2.0 * b) * net.cell_radius ** (2.0 * bk)
    bound = scale * field.tail_bound(x + net.radius_ratio) / (bk + 1.0)
    return OracleResult(scale * integral, bound)


def oracle_ul_ul(x: float, net: NetworkParams, oc: OracleConfig = OracleConfig()) -> OracleResult:
    """UL->UL ISR: ``x^{2b(1-k)} (R/delta)^{2bk} (1/pi) int int t^{2bk+1} F((R/delta) t e^{i phi})``."""
    if not x >= 0.0:
        raise DomainError(f"x must be >= 0, got {x}")
    b, bk = net.b, net.b * net.k
    field = _field(b, oc.lattice_max_norm, oc.near_radius)
    integral = _disc_average(field, 0j, net.radius_ratio, 2.0 * bk + 1.0, oc)
    scale = x ** ul_exponent(b, net.k) * net.radius_ratio ** (2.0 * bk)
    bound = scale * field.tail_bound(net.radius_ratio) / (bk + 1.0)
    return OracleResult(scale * integral, bound)


def oracle_dl_ul(x: float, net: NetworkParams, oc: OracleConfig = OracleConfig()) -> OracleResult:
    """DL->UL ISR: ``(P/P*) x^{2b(1-k)} delta^{-2bk} sum_{s != 0} |s/delta|^{-2b}``."""
    if not x >= 0.0:
        raise DomainError(f"x must be >= 0, got {x}")
    b = net.b
    field = _field(b, oc.lattice_max_norm, oc.lattice_max_norm)
    scale = net.p_dl / net.p_target * x ** ul_exponent(b, net.k) * net.delta ** (-2.0 * b * net.k)
    return OracleResult(scale * float(field(0j)[0]), scale * field.tail_bound(0.0))


def theta_mean(fn: Callable[[float], OracleResult], n_theta: int = 8) -> OracleResult:
    """Average of an oracle over the mobile angle.

    The lattice is invariant under 60-degree rotations and reflections, so the
    angular profile is a cosine series in ``6 theta``; ``n_theta`` equispaced
    samples on ``[0, pi/3)`` integrate it exactly up to harmonic ``6 n_theta``.
    """
    results = [fn((j + 0.5) * (math.pi / 3.0) / n_theta) for j in range(n_theta)]
    return OracleResult(
        math.fsum(r.value for r in results) / n_theta,
        max(r.tail_bound for r in results),
    )


def _mc_chunks(oc: OracleConfig, stream: int, draws: int) -> list[tuple[np.random.Generator, int]]:
    root = np.random.SeedSequence(oc.seed, spawn_key=(stream,))
    n_chunks = -(-draws // oc.mc_chunk)
    sizes = [oc.mc_chunk] * (n_chunks - 1) + [draws - oc.mc_chunk * (n_chunks - 1)]
    return [(np.random.Generator(np.random.PCG64(child)), size) for child, size in zip(root.spawn(n_chunks), sizes)]


def _run_chunks(fn: Callable[[tuple[np.random.Generator, int]], object], chunks, workers: int):
    if workers == 1:
        return [fn(c) for c in chunks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, chunks))


def _merge_moments(parts: Sequence[tuple[int, float, float]]) -> tuple[int, float, float]:
    """Fold per-chunk ``(count, mean, centred sum of squares)`` in the given order."""
    n, mean, m2 = 0, 0.0, 0.0
    for nb, mb, m2b in parts:
        tot = n + nb
        delta = mb - mean
        mean += delta * nb / tot
        m2 += m2b + delta * delta * n * nb / tot
        n = tot
    return n, mean, m2


def mc_disc_sum(
    centers: np.ndarray,
    radius: float,
    target: complex,
    b: float,
    n_pts: int,
    oc: OracleConfig,
    stream: int = STREAM_CLUSTER,
    spin_target: bool = False,
) -> tuple[float, float]:
    """Monte-Carlo estimate of ``sum_c E|c + w - target|^{-2b}``, ``w`` uniform in a disc.

    Each draw places ``n_pts`` independent points in every disc and averages them.
    With ``spin_target`` the target is also rotated by a uniform angle on every draw.
    Returns ``(mean, stderr)`` over ``oc.mc_draws`` draws.
    """
    centers = np.asarray(centers, dtype=np.complex128)
    draws = oc.mc_draws

    def chunk(job: tuple[np.random.Generator, int]) -> tuple[float, float]:
        rng, size = job
        if spin_target:
            shift = target * np.exp(2j * math.pi * rng.random(size))
        else:
            shift = np.full(size, target)
        shape = (size, n_pts, centers.size)
        rad = radius * np.sqrt(rng.random(shape))
        ang = 2.0 * math.pi * rng.random(shape)
        d = centers[None, None, :] - shift[:, None, None] + rad * np.exp(1j * ang)
        d2 = d.real * d.real + d.imag * d.imag
        per_draw = np.sum(d2 ** (-b), axis=(1, 2)) / n_pts
        m = float(np.mean(per_draw))
        return size, m, float(np.sum((per_draw - m) ** 2))

    parts = _run_chunks(chunk, _mc_chunks(oc, stream, draws), oc.workers)
    _, mean, m2 = _merge_moments(parts)
    var = m2 / max(draws - 1, 1)
    return mean, math.sqrt(var / draws)


@lru_cache(maxsize=64)
def _cluster_lattice_sum(
    b: float, disc: float, rho0: float, phi0: float | None, n_pts: int, oc: OracleConfig
) -> tuple[float, float, float]:
    """``sum_{c != 0} E_w |c + w - s0|^{-2b}`` on the unit cluster lattice, ``s0 = rho0 e^{i phi0}``.

    ``phi0=None`` averages over a uniform angle of ``s0``.  Returns
    ``(value, mc_stderr, tail_bound)``: Monte-Carlo for clusters within
    ``mc_radius``, disc quadrature of the lattice field beyond it.
    """
    u, v, _ = lattice_arrays(int(math.floor(oc.mc_radius**2)))
    near_centers = u + v * _E60
    outer = _field(b, oc.lattice_max_norm, oc.near_radius, oc.mc_radius)
    if phi0 is None:
        mc_mean, mc_err = mc_disc_sum(near_centers, disc, complex(rho0), b, n_pts, oc, spin_target=True)
        # the outer field is a cosine series in 6*phi0; 8 equispaced angles on [0, pi/3) suffice
        angles = (np.arange(8) + 0.5) * (math.pi / 3.0) / 8
        det = math.fsum(
            _disc_average(outer, rho0 * complex(math.cos(a), math.sin(a)), disc, 1.0, oc) for a in angles
        ) / angles.size
    else:
        target = rho0 * complex(math.cos(phi0), math.sin(phi0))
        mc_mean, mc_err = mc_disc_sum(near_centers, disc, target, b, n_pts, oc)
        det = _disc_average(outer, target, disc, 1.0, oc)
    return mc_mean + det, mc_err, outer.tail_bound(rho0 + disc)


def cluster_coefficient(
    cp: ClusterParams,
    b: float,
    k: float,
    oc: OracleConfig = OracleConfig(),
    phi0: float | None = None,
) -> OracleResult:
    """Oracle for the clustered DL->UL coefficient (the ISR divided by ``x_tilde^{2b(1-k)}``).

    The studied small cell sits at distance ``cp.rho0`` from its cluster center, at
    angle ``phi0``; by default the angle is uniform, as for any small cell of the cluster.
    """
    if cp.intensity == 0.0:
        return OracleResult(0.0)
    disc = cp.cluster_radius / cp.delta_tilde
    rho0 = cp.rho0 / cp.delta_tilde
    n_pts = max(cp.n_cells, 1)
    lattice, err, bound = _cluster_lattice_sum(b, disc, rho0, phi0, n_pts, oc)
    scale = cp.p_small_dl / cp.p_small_target * cp.delta_tilde ** (-2.0 * b * k) * cp.cells_per_cluster
    return OracleResult(scale * lattice, scale * bound, scale * err)


def oracle_cluster_dl_ul(
    x_tilde: float,
    cp: ClusterParams,
    q: SmallCellQuery,
    oc: OracleConfig = OracleConfig(),
    phi0: float | None = None,
) -> OracleResult:
    """Clustered DL->UL ISR at ``x_tilde``: other clusters' small cells, uniform in their discs.

    ``q`` supplies ``b`` and ``k``; ``x_tilde`` is taken from the argument.
    """
    if not 0.0 <= x_tilde < 1.0:
        raise DomainError(f"x_tilde must lie in [0, 1), got {x_tilde}")
    coef = cluster_coefficient(cp, q.b, q.k, oc, phi0)
    scale = x_tilde ** ul_exponent(q.b, q.k)
    return OracleResult(scale * coef.value, scale * coef.tail_bound, scale * coef.mc_stderr)


def oracle_coverage_curve(
    gammas: Sequence[float], cp: ClusterParams, q: SmallCellQuery, oc: OracleConfig = OracleConfig()
) -> list[OracleResult]:
    """Empirical ``P(SINR > gamma)`` for a mobile uniform in the studied small cell.

    The interference coefficient comes from :func:`cluster_coefficient`; every
    gamma is scored on the same mobile draws.
    """
    gammas = np.asarray(gammas, dtype=np.float64)
    if np.any(~(gammas > 0)):
        raise DomainError("gamma values must be > 0")
    coef = cluster_coefficient(cp, q.b, q.k, oc).value + noise_term(cp, q).y0
    expo = ul_exponent(q.b, q.k)
    reach = cp.smallcell_radius / cp.delta_tilde
    draws = oc.mc_draws

    def chunk(job: tuple[np.random.Generator, int]) -> np.ndarray:
        rng, size = job
        x = reach * np.sqrt(rng.random(size))
        with np.errstate(divide="ignore"):
            sinr = 1.0 / (coef * x**expo)
        return np.sum(sinr[None, :] > gammas[:, None], axis=1)

    counts = np.sum(_run_chunks(chunk, _mc_chunks(oc, STREAM_COVERAGE, draws), oc.workers), axis=0)
    out = []
    for c in counts:
        p = float(c) / draws
        out.append(OracleResult(p, 0.0, math.sqrt(p * (1.0 - p) / draws)))
    return out


def oracle_coverage(
    gamma: float, cp: ClusterParams, q: SmallCellQuery, oc: OracleConfig = OracleConfig()
) -> OracleResult:
    return oracle_coverage_curve([gamma], cp, q, oc)[0]
