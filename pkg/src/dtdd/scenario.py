"""Scenario files (TOML) and the built-in figure presets.

A scenario file has flat sections; every key is optional unless stated::

    [scenario]
    id = "fig2"
    quantities = ["isr_dl_total"]
    x_grid = [0.1, 0.2, 0.3]          # required: x = r / delta
    x_tilde_grid = [0.1, 0.3]         # cluster quantities; defaults to x_grid
    gamma_grid = [0.1, 1.0, 10.0]     # coverage
    b_values = [1.2, 1.75]            # defaults to [network.b]
    k_values = [0.8]                  # defaults to [network.k]
    mixes = [[1.0, 0.0], [0.5, 0.5]]  # [alpha_d, alpha_u] pairs
    output = "out.csv"

    [network]      # NetworkParams fields
    [cluster]      # ClusterParams fields; enables cluster quantities
    [series]       # SeriesControl fields
    [oracle]       # OracleConfig fields; required by `validate`
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .cluster import ClusterParams
from .errors import DomainError
from .isr import NetworkParams, TrafficMix
from .oracle import OracleConfig
from .series import SeriesControl

__all__ = [
    "ConfigError",
    "MACRO_QUANTITIES",
    "MIX_QUANTITIES",
    "CLUSTER_QUANTITIES",
    "QUANTITIES",
    "Scenario",
    "ResultRow",
    "RESULT_FIELDS",
    "load_scenario",
    "parse_scenario",
    "preset",
    "PRESETS",
]

MACRO_QUANTITIES = ("isr_dl_dl", "isr_ul_dl", "isr_ul_ul", "isr_dl_ul")
MIX_QUANTITIES = ("isr_dl_total", "isr_ul_total")
# isr_dl_ul_clustered_rho_avg is an extension: rho0 averaged over the cluster disc.
CLUSTER_QUANTITIES = ("isr_dl_ul_clustered", "isr_dl_ul_clustered_rho_avg", "sinr_ul", "coverage")
QUANTITIES = MACRO_QUANTITIES + MIX_QUANTITIES + CLUSTER_QUANTITIES


class ConfigError(ValueError):
    """Malformed or inconsistent scenario file."""


@dataclass(frozen=True)
class Scenario:
    scenario_id: str
    network: NetworkParams
    x_grid: tuple[float, ...]
    quantities: tuple[str, ...] = ("isr_dl_total", "isr_ul_total")
    mixes: tuple[TrafficMix, ...] = (TrafficMix(1.0, 0.0),)
    cluster: ClusterParams | None = None
    x_tilde_grid: tuple[float, ...] = ()
    gamma_grid: tuple[float, ...] = ()
    b_values: tuple[float, ...] = ()
    k_values: tuple[float, ...] = ()
    series: SeriesControl = SeriesControl()
    oracle: OracleConfig | None = None
    output_path: str | None = None

    def networks(self) -> list[NetworkParams]:
        """One parameter set per (b, k) pair, b outermost."""
        bs = self.b_values or (self.network.b,)
        ks = self.k_values or (self.network.k,)
        return [replace(self.network, b=b, k=k) for b in bs for k in ks]

    @property
    def cluster_x_grid(self) -> tuple[float, ...]:
        return self.x_tilde_grid or self.x_grid


@dataclass(frozen=True)
class ResultRow:
    scenario_id: str
    quantity_name: str
    x: float | None
    b: float
    k: float
    alpha_d: float | None
    alpha_u: float | None
    gamma: float | None
    value_linear: float
    value_db: float | None
    oracle_value: float | None = None
    oracle_tail_or_stderr: float | None = None
    rel_err: float | None = None

    @staticmethod
    def to_db(value: float) -> float | None:
        if value > 0 and math.isfinite(value):
            return 10.0 * math.log10(value)
        return None


RESULT_FIELDS = [f.name for f in fields(ResultRow)]


def _floats(section: str, key: str, raw: Any) -> tuple[float, ...]:
    if not isinstance(raw, list) or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in raw):
        raise ConfigError(f"[{section}] {key}: expected a list of numbers")
    return tuple(float(v) for v in raw)


def _build(section: str, cls: type, table: dict[str, Any], ints: tuple[str, ...] = ()) -> Any:
    known = {f.name for f in fields(cls) if f.init}
    kwargs: dict[str, Any] = {}
    for key, value in table.items():
        if key not in known:
            raise ConfigError(f"[{section}] unknown key {key!r}")
        if key in ints:
            if not isinstance(value, int) or isinstance(value, bool):
                raise ConfigError(f"[{section}] {key}: expected an integer")
        elif isinstance(value, bool) and key != "strict":
            raise ConfigError(f"[{section}] {key}: expected a number")
        elif not isinstance(value, (int, float, bool)):
            raise ConfigError(f"[{section}] {key}: expected a number")
        kwargs[key] = value if key in ints or isinstance(value, bool) else float(value)
    try:
        return cls(**kwargs)
    except DomainError as exc:
        raise ConfigError(f"[{section}] {exc}") from exc


_SCENARIO_KEYS = {
    "id", "quantities", "x_grid", "x_tilde_grid", "gamma_grid", "b_values", "k_values", "mixes", "output",
}


def parse_scenario(data: dict[str, Any], default_id: str = "scenario") -> Scenario:
    for section in data:
        if section not in {"scenario", "network", "cluster", "series", "oracle"}:
            raise ConfigError(f"unknown section [{section}]")
    sc = data.get("scenario", {})
    for key in sc:
        if key not in _SCENARIO_KEYS:
            raise ConfigError(f"[scenario] unknown key {key!r}")
    network = _build("network", NetworkParams, data.get("network", {}))
    cluster = _build("cluster", ClusterParams, data["cluster"], ints=("n_cells",)) if "cluster" in data else None
    series = _build("series", SeriesControl, data.get("series", {}), ints=("h_max",))
    oracle = (
        _build(
            "oracle",
            OracleConfig,
            data["oracle"],
            ints=("quad_radial_order", "quad_angular_order", "mc_draws", "seed", "mc_chunk", "workers"),
        )
        if "oracle" in data
        else None
    )

    if "x_grid" not in sc:
        raise ConfigError("[scenario] x_grid: required")
    x_grid = _floats("scenario", "x_grid", sc["x_grid"])
    if not x_grid:
        raise ConfigError("[scenario] x_grid: empty grid, nothing to sweep")

    quantities = tuple(sc.get("quantities", ["isr_dl_total", "isr_ul_total"]))
    for q in quantities:
        if q not in QUANTITIES:
            raise ConfigError(f"[scenario] quantities: unknown quantity {q!r}; choose from {', '.join(QUANTITIES)}")
    if cluster is None and any(q in CLUSTER_QUANTITIES for q in quantities):
        raise ConfigError("[scenario] quantities: cluster quantities need a [cluster] section")

    mixes_raw = sc.get("mixes", [[1.0, 0.0]])
    if not isinstance(mixes_raw, list) or not mixes_raw:
        raise ConfigError("[scenario] mixes: expected a non-empty list of [alpha_d, alpha_u] pairs")
    mixes = []
    for j, pair in enumerate(mixes_raw):
        if not isinstance(pair, list) or len(pair) != 2:
            raise ConfigError(f"[scenario] mixes[{j}]: expected [alpha_d, alpha_u]")
        try:
            mixes.append(TrafficMix(*_floats("scenario", f"mixes[{j}]", pair)))
        except DomainError as exc:
            raise ConfigError(f"[scenario] mixes[{j}]: {exc}") from exc

    gamma_grid = _floats("scenario", "gamma_grid", sc.get("gamma_grid", []))
    if "coverage" in quantities and not gamma_grid:
        raise ConfigError("[scenario] gamma_grid: required for the coverage quantity")

    output = sc.get("output")
    if output is not None and not isinstance(output, str):
        raise ConfigError("[scenario] output: expected a path string")

    scenario = Scenario(
        scenario_id=str(sc.get("id", default_id)),
        network=network,
        x_grid=x_grid,
        quantities=quantities,
        mixes=tuple(mixes),
        cluster=cluster,
        x_tilde_grid=_floats("scenario", "x_tilde_grid", sc.get("x_tilde_grid", [])),
        gamma_grid=gamma_grid,
        b_values=_floats("scenario", "b_values", sc.get("b_values", [])),
        k_values=_floats("scenario", "k_values", sc.get("k_values", [])),
        series=series,
        oracle=oracle,
        output_path=output,
    )
    try:
        scenario.networks()
    except DomainError as exc:
        raise ConfigError(f"[scenario] b_values/k_values: {exc}") from exc
    return scenario


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return parse_scenario(data, default_id=path.stem)


def _grid(lo: float, hi: float, step: float) -> tuple[float, ...]:
    n = int(round((hi - lo) / step))
    return tuple(round(lo + j * step, 10) for j in range(n + 1))


def _log_grid(lo_exp: float, hi_exp: float, n: int) -> tuple[float, ...]:
    return tuple(10.0 ** (lo_exp + (hi_exp - lo_exp) * j / (n - 1)) for j in range(n))


# Path-loss exponents 2b = 2.4 and 3.5.  The power ratio P/P* = 10, R/delta = 0.45,
# k = 0.8 and the grids are choices of this package, not values read off the figures.
_FIGURE_NETWORK = NetworkParams(delta=1.0, b=1.75, k=0.8, p_dl=10.0, p_target=1.0, cell_radius=0.45)
_FIGURE_B = (1.2, 1.75)
# UL->DL needs x + R/delta < 1 and converges like (x + R/delta)^h, so the DL-cycle
# grid stops at 0.50; the other figures cover the macro domain x < 1/sqrt(3).
_X_GRID_DL = _grid(0.02, 0.50, 0.02)
_X_GRID = _grid(0.02, 0.56, 0.02)

PRESETS = ("fig2", "fig3", "fig5", "coverage")


def preset(name: str) -> Scenario:
    if name == "fig2":
        return Scenario(
            scenario_id="fig2",
            network=_FIGURE_NETWORK,
            x_grid=_X_GRID_DL,
            quantities=("isr_dl_total",),
            mixes=(TrafficMix(1.0, 0.0), TrafficMix(0.75, 0.25), TrafficMix(0.5, 0.5)),
            b_values=_FIGURE_B,
        )
    if name == "fig3":
        return Scenario(
            scenario_id="fig3",
            network=_FIGURE_NETWORK,
            x_grid=_X_GRID,
            quantities=("isr_ul_total",),
            mixes=(TrafficMix(0.0, 1.0), TrafficMix(0.25, 0.75), TrafficMix(0.5, 0.5)),
            b_values=_FIGURE_B,
        )
    if name == "fig5":
        return Scenario(
            scenario_id="fig5",
            network=_FIGURE_NETWORK,
            x_grid=_X_GRID,
            quantities=("isr_dl_ul_clustered", "isr_dl_ul"),
            cluster=ClusterParams.from_macro(_FIGURE_NETWORK.delta),
            b_values=_FIGURE_B,
        )
    if name == "coverage":
        return Scenario(
            scenario_id="coverage",
            network=_FIGURE_NETWORK,
            x_grid=_X_GRID,
            quantities=("coverage",),
            cluster=ClusterParams.from_macro(_FIGURE_NETWORK.delta),
            gamma_grid=_log_grid(-3.0, 2.0, 51),
            b_values=_FIGURE_B,
        )
    raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
