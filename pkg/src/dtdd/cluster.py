"""Clustered small-cell layer: DL->UL ISR, uplink SINR and coverage probability.

Small cells are grouped in clusters whose centers form a hexagonal lattice of
spacing ``delta_tilde``.  All cells of a cluster share one UL/DL configuration,
so a small cell in uplink is only hit by downlink cells of *other* clusters.
Macro-layer and UL->UL interference are not part of this model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError, NotInvertibleError
from .isr import _triple_inner_sum, ul_exponent
from .series import DEFAULT_SERIES, SeriesControl, sum_series
from .specfun import DEFAULT_ACCURACY, SpecFunAccuracy, omega

__all__ = [
    "UNBOUNDED_SINR",
    "ClusterParams",
    "SmallCellQuery",
    "NoiseTerm",
    "noise_term",
    "coef_a2_tilde",
    "isr_dl_ul_clustered",
    "coef_a2_tilde_rho_averaged",
    "sinr_ul",
    "g_inverse",
    "coverage_probability",
]

# A mobile sitting on its small cell (x_tilde = 0, k < 1) sees no interference.
UNBOUNDED_SINR = math.inf


@dataclass(frozen=True)
class ClusterParams:
    """Cluster lattice and small-cell constants (linear units).

    ``intensity`` (small cells per unit area) defaults to three cells per cluster
    disc.  ``n_cells`` is derived from it when omitted and must agree with it
    when given.
    """

    delta_tilde: float = 1.0 / math.sqrt(3.0)
    cluster_radius: float = 0.4 / math.sqrt(3.0)
    smallcell_radius: float = 0.2 / math.sqrt(3.0)
    intensity: float | None = None
    n_cells: int | None = None
    p_small_dl: float = 1.0
    p_small_target: float = 1.0
    rho0: float = 0.2 / math.sqrt(3.0)
    p_noise: float = 0.0

    def __post_init__(self) -> None:
        for name in ("delta_tilde", "cluster_radius", "smallcell_radius", "p_small_dl", "p_small_target"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be > 0, got {getattr(self, name)}")
        if not 0.0 <= self.rho0 <= self.cluster_radius:
            raise DomainError(f"rho0 must lie in [0, cluster_radius], got {self.rho0}")
        if not self.p_noise >= 0:
            raise DomainError(f"p_noise must be >= 0, got {self.p_noise}")
        area = math.pi * self.cluster_radius**2
        if self.intensity is None:
            n = 3 if self.n_cells is None else self.n_cells
            object.__setattr__(self, "intensity", n / area)
        if not self.intensity >= 0:
            raise DomainError(f"intensity must be >= 0, got {self.intensity}")
        expected = round(self.intensity * area)
        if self.n_cells is None:
            object.__setattr__(self, "n_cells", expected)
        elif self.n_cells < 0 or abs(self.intensity * area - self.n_cells) > 1e-9 * max(1, self.n_cells):
            raise DomainError(
                f"n_cells={self.n_cells} inconsistent with intensity*pi*R^2={self.intensity * area}"
            )

    @classmethod
    def from_macro(cls, delta: float, **kwargs) -> "ClusterParams":
        """Cluster lattice derived from a macro layer: ``delta_tilde = delta / sqrt(3)``."""
        return cls(delta_tilde=delta / math.sqrt(3.0), **kwargs)

    @property
    def cells_per_cluster(self) -> float:
        """``lambda * pi * R_tilde^2``; may be non-integer when only ``intensity`` is set."""
        return self.intensity * math.pi * self.cluster_radius**2


@dataclass(frozen=True)
class SmallCellQuery:
    """Mobile at distance ``x_tilde * delta_tilde`` from its small cell."""

    x_tilde: float
    b: float = 1.75
    k: float = 0.8

    def __post_init__(self) -> None:
        if not 0.0 <= self.x_tilde < 1.0:
            raise DomainError(f"x_tilde must lie in [0, 1), got {self.x_tilde}")
        if not self.b > 1:
            raise DomainError(f"b must be > 1, got {self.b}")
        if not 0.0 <= self.k <= 1.0:
            raise DomainError(f"k must lie in [0, 1], got {self.k}")


@dataclass(frozen=True)
class NoiseTerm:
    """Noise-to-signal coefficient ``y0 = P_N delta_tilde^{2b(1-k)} / P_tilde*``."""

    y0: float

    def __post_init__(self) -> None:
        if not self.y0 >= 0:
            raise DomainError(f"y0 must be >= 0, got {self.y0}")


def noise_term(cp: ClusterParams, q: SmallCellQuery) -> NoiseTerm:
    # Normalised by the small-cell target power, not the macro one.
    return NoiseTerm(cp.p_noise * cp.delta_tilde ** ul_exponent(q.b, q.k) / cp.p_small_target)


def coef_a2_tilde(
    cp: ClusterParams,
    q: SmallCellQuery,
    sc: SeriesControl = DEFAULT_SERIES,
    acc: SpecFunAccuracy = DEFAULT_ACCURACY,
) -> float:
    """Clustered DL->UL coefficient; the ISR is this times ``x_tilde^{2b(1-k)}``.

    The ``(R/rho0)^{2(n+i)} (rho0/delta)^{2h}`` factor is evaluated as
    ``(R/delta)^{2(n+i)} (rho0/delta)^{2(h-n-i)}`` so that ``rho0 = 0`` is regular.
    """
    b, k = q.b, q.k
    disc = cp.cluster_radius / cp.delta_tilde
    pos = cp.rho0 / cp.delta_tilde
    if disc + pos >= 1.0:
        raise DomainError(
            f"coef_a2_tilde needs (R_tilde + rho0) / delta_tilde < 1, got {disc + pos}"
        )
    if cp.intensity == 0.0:
        return 0.0
    ln_disc = math.log(disc)
    ln_pos = math.log(pos) if pos > 0 else -math.inf

    def term(h: int) -> float:
        return _triple_inner_sum(h, b, 1.0, ln_disc, ln_pos) * omega(b + h, acc)

    prefactor = (
        6.0 * math.pi * cp.cluster_radius**2 * cp.p_small_dl * cp.intensity
        / (cp.p_small_target * cp.delta_tilde ** (2.0 * b * k))
    )
    return prefactor * sum_series(term, sc, "coef_a2_tilde")


def isr_dl_ul_clustered(
    q: SmallCellQuery,
    cp: ClusterParams,
    sc: SeriesControl = DEFAULT_SERIES,
    acc: SpecFunAccuracy = DEFAULT_ACCURACY,
) -> float:
    return coef_a2_tilde(cp, q, sc, acc) * q.x_tilde ** ul_exponent(q.b, q.k)


def coef_a2_tilde_rho_averaged(
    cp: ClusterParams,
    q: SmallCellQuery,
    n_nodes: int = 24,
    sc: SeriesControl = DEFAULT_SERIES,
    acc: SpecFunAccuracy = DEFAULT_ACCURACY,
) -> float:
    """Extension: ``coef_a2_tilde`` averaged over ``rho0`` uniform in the cluster disc.

    Gauss-Legendre in ``rho0 / R_tilde`` with density ``2 t``; ``cp.rho0`` is ignored.
    The coefficient is a power series in ``rho0^2``, so a modest node count is exact
    to rounding.
    """
    if n_nodes < 1:
        raise DomainError(f"n_nodes must be >= 1, got {n_nodes}")
    t, w = np.polynomial.legendre.leggauss(n_nodes)
    t = 0.5 * (t + 1.0)
    w = 0.5 * w
    values = [
        coef_a2_tilde(replace(cp, rho0=float(tj) * cp.cluster_radius), q, sc, acc) for tj in t
    ]
    return math.fsum(2.0 * float(wj * tj) * v for wj, tj, v in zip(w, t, values))


def sinr_ul(
    q: SmallCellQuery,
    cp: ClusterParams,
    sc: SeriesControl = DEFAULT_SERIES,
    acc: SpecFunAccuracy = DEFAULT_ACCURACY,
) -> float:
    """Uplink SINR of the studied small cell, linear scale.

    Returns ``UNBOUNDED_SINR`` when the denominator vanishes (mobile on the cell
    with ``k < 1``, or no interferers and no noise).
    """
    a2 = coef_a2_tilde(cp, q, sc, acc)
    y0 = noise_term(cp, q).y0
    denom = (a2 + y0) * q.x_tilde ** ul_exponent(q.b, q.k)
    if denom == 0.0:
        return UNBOUNDED_SINR
    return 1.0 / denom


def g_inverse(
    y: float,
    cp: ClusterParams,
    q: SmallCellQuery,
    sc: SeriesControl = DEFAULT_SERIES,
    acc: SpecFunAccuracy = DEFAULT_ACCURACY,
) -> float:
    """Normalised distance at which ``1 / SINR`` equals ``y``."""
    if not y > 0:
        raise DomainError(f"g_inverse requires y > 0, got {y}")
    if q.k == 1.0:
        raise NotInvertibleError("1/SINR does not depend on distance when k = 1")
    a2 = coef_a2_tilde(cp, q, sc, acc)
    y0 = noise_term(cp, q).y0
    return (y / (a2 + y0)) ** (1.0 / ul_exponent(q.b, q.k))


def coverage_probability(
    gamma: float,
    cp: ClusterParams,
    q: SmallCellQuery,
    sc: SeriesControl = DEFAULT_SERIES,
    acc: SpecFunAccuracy = DEFAULT_ACCURACY,
) -> float:
    """Fraction of small-cell locations (uniform in its disc) with SINR above ``gamma``.

    ``q.x_tilde`` is ignored; only ``b`` and ``k`` are read.  For ``k = 1`` the SINR is
    the same everywhere and the result is a 0/1 step.
    """
    if not gamma > 0:
        raise DomainError(f"gamma must be > 0, got {gamma}")
    if q.k == 1.0:
        a2 = coef_a2_tilde(cp, q, sc, acc)
        y0 = noise_term(cp, q).y0
        return 1.0 if gamma * (a2 + y0) < 1.0 else 0.0
    reach = cp.delta_tilde / cp.smallcell_radius * g_inverse(1.0 / gamma, cp, q, sc, acc)
    return min(reach * reach, 1.0)
