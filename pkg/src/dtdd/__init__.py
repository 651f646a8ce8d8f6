"""Interference-to-signal ratios, SINR and coverage for Dynamic-TDD hexagonal networks."""

from .errors import ConvergenceError, DomainError, NotInvertibleError
from .specfun import SpecFunAccuracy, gamma_ln, hurwitz_zeta, omega, riemann_zeta
from .series import SeriesControl
from .isr import (
    IsrBreakdown,
    MobileQuery,
    NetworkParams,
    TrafficMix,
    coef_a1,
    coef_a2,
    isr_breakdown,
    isr_dl_dl,
    isr_dl_total,
    isr_dl_ul,
    isr_ul_dl,
    isr_ul_total,
    isr_ul_ul,
)
from .cluster import (
    ClusterParams,
    NoiseTerm,
    SmallCellQuery,
    UNBOUNDED_SINR,
    coef_a2_tilde,
    coef_a2_tilde_rho_averaged,
    coverage_probability,
    g_inverse,
    isr_dl_ul_clustered,
    noise_term,
    sinr_ul,
)

__version__ = "0.1.0"

__all__ = [
    "ConvergenceError",
    "DomainError",
    "NotInvertibleError",
    "SpecFunAccuracy",
    "gamma_ln",
    "hurwitz_zeta",
    "omega",
    "riemann_zeta",
    "SeriesControl",
    "IsrBreakdown",
    "MobileQuery",
    "NetworkParams",
    "TrafficMix",
    "coef_a1",
    "coef_a2",
    "isr_breakdown",
    "isr_dl_dl",
    "isr_dl_total",
    "isr_dl_ul",
    "isr_ul_dl",
    "isr_ul_total",
    "isr_ul_ul",
    "ClusterParams",
    "NoiseTerm",
    "SmallCellQuery",
    "UNBOUNDED_SINR",
    "coef_a2_tilde",
    "coef_a2_tilde_rho_averaged",
    "coverage_probability",
    "g_inverse",
    "isr_dl_ul_clustered",
    "noise_term",
    "sinr_ul",
]
