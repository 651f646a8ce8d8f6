"""``dtdd`` command line: parameter sweeps to CSV and analytic-vs-oracle validation.

Exit codes: 0 success, 1 configuration or domain error, 2 validation failure,
3 numeric non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, replace
from typing import Callable, Iterable, Sequence, TextIO

from . import cluster as cl
from . import isr
from . import oracle as orc
from .errors import ConvergenceError, DomainError
from .scenario import (
    PRESETS,
    RESULT_FIELDS,
    ConfigError,
    ResultRow,
    Scenario,
    load_scenario,
    preset,
)
from .specfun import omega

__all__ = [
    "EXIT_OK",
    "EXIT_CONFIG",
    "EXIT_VALIDATION",
    "EXIT_CONVERGENCE",
    "RowError",
    "SweepResult",
    "Check",
    "ValidationReport",
    "CHECK_FIELDS",
    "run_sweep",
    "run_validate",
    "write_rows",
    "write_checks",
    "main",
]

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_VALIDATION = 2
EXIT_CONVERGENCE = 3

# Module tolerances applied by `validate`.
TOL_SERIES = 1e-3
TOL_LATTICE = 1e-6
TOL_SIGMA = 3.0
TOL_COVERAGE = 0.01
N_THETA = 8


def _fmt(value: object) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


# --------------------------------------------------------------------------- sweep


@dataclass(frozen=True)
class RowError:
    quantity_name: str
    point: str
    message: str
    non_convergence: bool


@dataclass(frozen=True)
class SweepResult:
    rows: list[ResultRow]
    errors: list[RowError]


@dataclass(frozen=True)
class _Job:
    quantity: str
    net: isr.NetworkParams
    mix: isr.TrafficMix | None
    x: float | None
    gamma: float | None


def _jobs(scenario: Scenario) -> list[_Job]:
    out: list[_Job] = []
    for quantity in scenario.quantities:
        for net in scenario.networks():
            if quantity in ("isr_dl_total", "isr_ul_total"):
                out.extend(_Job(quantity, net, mix, x, None) for mix in scenario.mixes for x in scenario.x_grid)
            elif quantity == "coverage":
                out.extend(_Job(quantity, net, None, None, g) for g in scenario.gamma_grid)
            elif quantity in ("isr_dl_ul_clustered", "isr_dl_ul_clustered_rho_avg", "sinr_ul"):
                out.extend(_Job(quantity, net, None, x, None) for x in scenario.cluster_x_grid)
            else:
                out.extend(_Job(quantity, net, None, x, None) for x in scenario.x_grid)
    return out


def _analytic(job: _Job, scenario: Scenario) -> float:
    net, sc = job.net, scenario.series
    q = job.quantity
    if q in ("isr_dl_ul_clustered", "isr_dl_ul_clustered_rho_avg", "sinr_ul", "coverage"):
        cp = scenario.cluster
        sq = cl.SmallCellQuery(0.0 if job.x is None else job.x, net.b, net.k)
        if q == "isr_dl_ul_clustered":
            return cl.isr_dl_ul_clustered(sq, cp, sc)
        if q == "isr_dl_ul_clustered_rho_avg":
            return cl.coef_a2_tilde_rho_averaged(cp, sq, sc=sc) * sq.x_tilde ** isr.ul_exponent(net.b, net.k)
        if q == "sinr_ul":
            return cl.sinr_ul(sq, cp, sc)
        return cl.coverage_probability(job.gamma, cp, sq, sc)
    mq = isr.MobileQuery(job.x)
    if q == "isr_dl_dl":
        return isr.isr_dl_dl(mq, net, sc)
    if q == "isr_ul_dl":
        return isr.isr_ul_dl(mq, net, sc)
    if q == "isr_ul_ul":
        return isr.isr_ul_ul(mq, net, sc)
    if q == "isr_dl_ul":
        return isr.isr_dl_ul(mq, net)
    if q == "isr_dl_total":
        return isr.isr_dl_total(mq, net, job.mix, sc)
    return isr.isr_ul_total(mq, net, job.mix, sc)


def _oracle(job: _Job, scenario: Scenario) -> tuple[float | None, float | None]:
    """Reference value and its bound (tail bound, or Monte-Carlo stderr).

    Position-dependent macro quantities use the angle-averaged oracle, which is
    the quantity the series represent.  The rho0-averaged extension has no oracle.
    """
    oc, net, x = scenario.oracle, job.net, job.x
    q = job.quantity
    if q == "isr_dl_ul_clustered_rho_avg":
        return None, None

    def mean_dl_dl() -> orc.OracleResult:
        return orc.theta_mean(lambda t: orc.oracle_dl_dl(x, t, net, oc), N_THETA)

    def mean_ul_dl() -> orc.OracleResult:
        return orc.theta_mean(lambda t: orc.oracle_ul_dl(x, t, net, oc), N_THETA)

    if q == "isr_dl_dl":
        r = mean_dl_dl()
    elif q == "isr_ul_dl":
        r = mean_ul_dl()
    elif q == "isr_ul_ul":
        r = orc.oracle_ul_ul(x, net, oc)
    elif q == "isr_dl_ul":
        r = orc.oracle_dl_ul(x, net, oc)
    elif q == "isr_dl_total":
        a, b = mean_dl_dl(), mean_ul_dl()
        m = job.mix
        r = orc.OracleResult(m.alpha_d * a.value + m.alpha_u * b.value, m.alpha_d * a.tail_bound + m.alpha_u * b.tail_bound)
    elif q == "isr_ul_total":
        a, b = orc.oracle_ul_ul(x, net, oc), orc.oracle_dl_ul(x, net, oc)
        m = job.mix
        r = orc.OracleResult(m.alpha_u * a.value + m.alpha_d * b.value, m.alpha_u * a.tail_bound + m.alpha_d * b.tail_bound)
    else:
        cp = scenario.cluster
        sq = cl.SmallCellQuery(0.0 if x is None else x, net.b, net.k)
        if q == "isr_dl_ul_clustered":
            r = orc.oracle_cluster_dl_ul(x, cp, sq, oc)
        elif q == "sinr_ul":
            coef = orc.cluster_coefficient(cp, net.b, net.k, oc)
            denom = (coef.value + cl.noise_term(cp, sq).y0) * x ** isr.ul_exponent(net.b, net.k)
            value = cl.UNBOUNDED_SINR if denom == 0.0 else 1.0 / denom
            rel = coef.mc_stderr / coef.value if coef.value else 0.0
            r = orc.OracleResult(value, 0.0, abs(value) * rel if math.isfinite(value) else 0.0)
        else:
            r = orc.oracle_coverage(job.gamma, cp, sq, oc)
    return r.value, r.mc_stderr if r.mc_stderr else r.tail_bound


def _rel_err(value: float, ref: float) -> float | None:
    if not (math.isfinite(value) and math.isfinite(ref)):
        return None
    if ref == 0.0:
        return 0.0 if value == 0.0 else None
    return abs(value - ref) / abs(ref)


def _point_label(job: _Job) -> str:
    parts = [f"b={job.net.b!r}", f"k={job.net.k!r}"]
    if job.mix is not None:
        parts.append(f"mix=({job.mix.alpha_d!r},{job.mix.alpha_u!r})")
    if job.x is not None:
        parts.append(f"x={job.x!r}")
    if job.gamma is not None:
        parts.append(f"gamma={job.gamma!r}")
    return " ".join(parts)


def _evaluate(job: _Job, scenario: Scenario) -> ResultRow | RowError:
    try:
        value = _analytic(job, scenario)
        ref = bound = rel = None
        if scenario.oracle is not None:
            ref, bound = _oracle(job, scenario)
            rel = None if ref is None else _rel_err(value, ref)
    except ConvergenceError as exc:
        return RowError(job.quantity, _point_label(job), str(exc), True)
    except DomainError as exc:
        return RowError(job.quantity, _point_label(job), str(exc), False)
    return ResultRow(
        scenario_id=scenario.scenario_id,
        quantity_name=job.quantity,
        x=job.x,
        b=job.net.b,
        k=job.net.k,
        alpha_d=None if job.mix is None else job.mix.alpha_d,
        alpha_u=None if job.mix is None else job.mix.alpha_u,
        gamma=job.gamma,
        value_linear=value,
        value_db=ResultRow.to_db(value),
        oracle_value=ref,
        oracle_tail_or_stderr=bound,
        rel_err=rel,
    )


def _ordered_map(fn: Callable, items: Sequence, workers: int) -> list:
    # Results come back in input order whatever the completion order.
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def run_sweep(scenario: Scenario, workers: int = 1) -> SweepResult:
    """Evaluate every (quantity, b, k, mix, grid point) of ``scenario`` in that nesting order."""
    if not scenario.x_grid:
        raise ConfigError("x_grid is empty: nothing to sweep")
    outcomes = _ordered_map(lambda job: _evaluate(job, scenario), _jobs(scenario), workers)
    rows = [o for o in outcomes if isinstance(o, ResultRow)]
    errors = [o for o in outcomes if isinstance(o, RowError)]
    return SweepResult(rows, errors)


def write_rows(rows: Iterable[ResultRow], out: TextIO) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(RESULT_FIELDS)
    for row in rows:
        record = asdict(row)
        writer.writerow([_fmt(record[name]) for name in RESULT_FIELDS])


# ------------------------------------------------------------------------ validate


@dataclass(frozen=True)
class Check:
    check: str
    b: float
    k: float | None
    x: float | None
    theta: str
    gamma: float | None
    analytic: float
    oracle: float | None
    oracle_bound: float | None
    oracle_stderr: float | None
    rel_err: float | None
    metric: str
    metric_value: float | None
    tolerance: float
    passed: bool
    note: str = ""


CHECK_FIELDS = list(Check.__dataclass_fields__)


@dataclass(frozen=True)
class ValidationReport:
    scenario_id: str
    checks: list[Check]
    a2_statement: str

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def worst_rel_err(self) -> float | None:
        # coverage is judged on absolute gaps; its relative error near P = 0 is noise
        errs = [c.rel_err for c in self.checks if c.rel_err is not None and c.metric != "abs_err"]
        return max(errs) if errs else None

    def summary(self) -> str:
        n_fail = sum(not c.passed for c in self.checks)
        lines = [f"scenario {self.scenario_id}: {len(self.checks) - n_fail}/{len(self.checks)} checks passed"]
        by_name: dict[str, list[Check]] = {}
        for c in self.checks:
            by_name.setdefault(c.check, []).append(c)
        for name, group in by_name.items():
            fails = sum(not c.passed for c in group)
            worst = max((c.metric_value for c in group if c.metric_value is not None), default=None)
            metric = group[0].metric
            tol = group[0].tolerance
            worst_txt = "n/a" if worst is None else f"{worst:.3e}"
            lines.append(
                f"  {name:<20} {len(group) - fails:>4}/{len(group):<4} worst {metric} {worst_txt} (tol {tol:g})"
            )
        worst = self.worst_rel_err
        lines.append(f"worst rel_err: {'n/a' if worst is None else f'{worst:.3e}'}")
        lines.append(self.a2_statement)
        lines.append("RESULT: PASS" if self.passed else "RESULT: FAIL")
        return "\n".join(lines)


def _failed(check: str, b: float, k, x, theta: str, gamma, metric: str, tol: float, note: str) -> Check:
    return Check(check, b, k, x, theta, gamma, math.nan, None, None, None, None, metric, None, tol, False, note)


def _rel_check(
    check: str, net: isr.NetworkParams, x: float, theta: str, analytic: Callable[[], float],
    ref: Callable[[], orc.OracleResult], tol: float, k: float | None,
) -> Check:
    try:
        value = analytic()
    except (ConvergenceError, DomainError) as exc:
        return _failed(check, net.b, k, x, theta, None, "rel_err", tol, f"analytic: {exc}")
    try:
        r = ref()
    except (ConvergenceError, DomainError, ArithmeticError) as exc:
        return _failed(check, net.b, k, x, theta, None, "rel_err", tol, f"oracle: {exc}")
    rel = _rel_err(value, r.value)
    ok = rel is not None and rel <= tol
    return Check(check, net.b, k, x, theta, None, value, r.value, r.tail_bound, r.mc_stderr, rel, "rel_err", rel, tol, ok)


def _macro_checks(scenario: Scenario, printed_a2: bool) -> list[Check]:
    oc, sc = scenario.oracle, scenario.series
    wanted = set()
    for q in scenario.quantities:
        if q == "isr_dl_total":
            wanted |= {"isr_dl_dl", "isr_ul_dl"}
        elif q == "isr_ul_total":
            wanted |= {"isr_ul_ul", "isr_dl_ul"}
        elif q in isr.__all__:
            wanted.add(q)
    out: list[Check] = []
    nets = scenario.networks()
    # DL->DL does not depend on k: one check per (b, x).
    if "isr_dl_dl" in wanted:
        for net in {n.b: n for n in nets}.values():
            for x in scenario.x_grid:
                mq = isr.MobileQuery(x)
                series = lambda mq=mq, net=net: isr.isr_dl_dl(mq, net, sc)
                out.append(_rel_check("dl_dl@theta0", net, x, "0", series,
                                      lambda x=x, net=net: orc.oracle_dl_dl(x, 0.0, net, oc), TOL_SERIES, None))
                out.append(_rel_check("dl_dl@theta_mean", net, x, f"mean{N_THETA}", series,
                                      lambda x=x, net=net: orc.theta_mean(lambda t: orc.oracle_dl_dl(x, t, net, oc), N_THETA),
                                      TOL_SERIES, None))
    for net in nets:
        for x in scenario.x_grid:
            mq = isr.MobileQuery(x)
            if "isr_ul_dl" in wanted:
                series = lambda mq=mq, net=net: isr.isr_ul_dl(mq, net, sc)
                out.append(_rel_check("ul_dl@theta0", net, x, "0", series,
                                      lambda x=x, net=net: orc.oracle_ul_dl(x, 0.0, net, oc), TOL_SERIES, net.k))
                out.append(_rel_check(
                    "ul_dl@theta_mean", net, x, f"mean{N_THETA}", series,
                    lambda x=x, net=net: orc.theta_mean(lambda t: orc.oracle_ul_dl(x, t, net, oc), N_THETA),
                    TOL_SERIES, net.k))
            if "isr_ul_ul" in wanted:
                out.append(_rel_check("ul_ul", net, x, "", lambda mq=mq, net=net: isr.isr_ul_ul(mq, net, sc),
                                      lambda x=x, net=net: orc.oracle_ul_ul(x, net, oc), TOL_SERIES, net.k))
            if "isr_dl_ul" in wanted:
                out.append(_rel_check(
                    "dl_ul", net, x, "", lambda mq=mq, net=net: isr.isr_dl_ul(mq, net, printed_constant=printed_a2),
                    lambda x=x, net=net: orc.oracle_dl_ul(x, net, oc), TOL_LATTICE, net.k))
    return out


def _cluster_checks(scenario: Scenario) -> list[Check]:
    oc, sc, cp = scenario.oracle, scenario.series, scenario.cluster
    out: list[Check] = []
    quantities = set(scenario.quantities)
    for net in scenario.networks():
        if quantities & {"isr_dl_ul_clustered", "sinr_ul"}:
            for x in scenario.cluster_x_grid:
                try:
                    sq = cl.SmallCellQuery(x, net.b, net.k)
                    value = cl.isr_dl_ul_clustered(sq, cp, sc)
                except (ConvergenceError, DomainError) as exc:
                    out.append(_failed("clustered", net.b, net.k, x, "", None, "sigma", TOL_SIGMA, f"analytic: {exc}"))
                    continue
                r = orc.oracle_cluster_dl_ul(x, cp, sq, oc)
                if r.mc_stderr > 0:
                    sigma = abs(value - r.value) / r.mc_stderr
                else:
                    sigma = 0.0 if value == r.value else math.inf
                ok = sigma <= TOL_SIGMA
                out.append(Check("clustered", net.b, net.k, x, "", None, value, r.value, r.tail_bound, r.mc_stderr,
                                 _rel_err(value, r.value), "sigma", sigma, TOL_SIGMA, ok))
        if "coverage" in quantities:
            sq = cl.SmallCellQuery(0.0, net.b, net.k)
            try:
                values = [cl.coverage_probability(g, cp, sq, sc) for g in scenario.gamma_grid]
            except (ConvergenceError, DomainError) as exc:
                out.extend(_failed("coverage", net.b, net.k, None, "", g, "abs_err", TOL_COVERAGE, f"analytic: {exc}")
                           for g in scenario.gamma_grid)
                continue
            refs = orc.oracle_coverage_curve(scenario.gamma_grid, cp, sq, oc)
            for g, value, r in zip(scenario.gamma_grid, values, refs):
                gap = abs(value - r.value)
                out.append(Check("coverage", net.b, net.k, None, "", g, value, r.value, r.tail_bound, r.mc_stderr,
                                 _rel_err(value, r.value), "abs_err", gap, TOL_COVERAGE, gap <= TOL_COVERAGE))
    return out


def _a2_statement(scenario: Scenario) -> str:
    """Which constant the direct lattice sum supports: ``omega(b)`` or ``6 omega(b)``."""
    oc = scenario.oracle
    parts = []
    for b in sorted({n.b for n in scenario.networks()}):
        net = replace(scenario.network, b=b, k=0.0, p_dl=1.0, p_target=1.0, delta=1.0)
        lattice = orc.oracle_dl_ul(1.0, net, oc).value
        w = omega(b)
        parts.append(
            f"b={b!r}: lattice sum {lattice:.12g}, 6*omega {6 * w:.12g} (rel {abs(6 * w - lattice) / lattice:.1e}), "
            f"omega {w:.12g} (rel {abs(w - lattice) / lattice:.1e})"
        )
    return "A2 constant: the oracle supports 6*omega(b), not omega(b). " + "; ".join(parts)


def run_validate(scenario: Scenario, printed_a2: bool = False) -> ValidationReport:
    """Compare every closed form in ``scenario`` against its brute-force oracle.

    Macro checks run on ``x_grid`` for each (b, k); DL->DL and UL->DL are checked
    both at theta = 0 and against the angle average.  Cluster checks need a
    [cluster] section.  Non-convergence shows up as a failed check.
    """
    if scenario.oracle is None:
        raise ConfigError("validate needs an [oracle] section")
    checks = _macro_checks(scenario, printed_a2)
    if scenario.cluster is not None:
        checks += _cluster_checks(scenario)
    return ValidationReport(scenario.scenario_id, checks, _a2_statement(scenario))


def write_checks(report: ValidationReport, out: TextIO) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CHECK_FIELDS)
    for c in report.checks:
        record = asdict(c)
        writer.writerow([_fmt(record[name]) for name in CHECK_FIELDS])


# ---------------------------------------------------------------------------- main


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, help="Monte-Carlo seed (unsigned 64-bit)")
    common.add_argument("--oracle-radius", type=float, help="lattice truncation radius in spacings")
    common.add_argument("--mc-draws", type=int, help="Monte-Carlo draws")
    common.add_argument("--h-max", type=int, help="series term cap")
    common.add_argument("--format", choices=["csv"], default="csv", help="output format (only csv)")
    common.add_argument("--workers", type=int, default=1, help="threads for grid points and Monte-Carlo chunks")
    common.add_argument("--out", help="output path (default: scenario output, else stdout)")

    parser = argparse.ArgumentParser(prog="dtdd", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("sweep", parents=[common], help="evaluate a scenario file to CSV")
    p.add_argument("scenario")
    p = sub.add_parser("validate", parents=[common], help="check closed forms against the oracles")
    p.add_argument("scenario")
    p.add_argument("--printed-a2", action="store_true", help="debug: use the A2 constant without the factor 6")
    p = sub.add_parser("preset", parents=[common], help="sweep a built-in figure scenario")
    p.add_argument("name", choices=PRESETS)
    return parser


def _apply_overrides(scenario: Scenario, args: argparse.Namespace) -> Scenario:
    if args.workers < 1:
        raise ConfigError(f"--workers must be >= 1, got {args.workers}")
    try:
        if args.h_max is not None:
            scenario = replace(scenario, series=replace(scenario.series, h_max=args.h_max))
        overrides = {
            key: value
            for key, value in (
                ("seed", args.seed),
                ("lattice_max_norm", args.oracle_radius),
                ("mc_draws", args.mc_draws),
            )
            if value is not None
        }
        if scenario.oracle is not None:
            scenario = replace(scenario, oracle=replace(scenario.oracle, workers=args.workers, **overrides))
        if scenario.oracle is not None and scenario.oracle.near_radius > scenario.oracle.lattice_max_norm:
            raise ConfigError("--oracle-radius is below the oracle near_radius")
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc
    return scenario


def _emit(write: Callable[[TextIO], None], path: str | None) -> None:
    if path is None:
        buf = io.StringIO()
        write(buf)
        sys.stdout.write(buf.getvalue())
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        write(fh)


def main(argv: Sequence[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        scenario = preset(args.name) if args.command == "preset" else load_scenario(args.scenario)
        scenario = _apply_overrides(scenario, args)
        out_path = args.out or scenario.output_path

        if args.command == "validate":
            report = run_validate(scenario, printed_a2=args.printed_a2)
            _emit(lambda fh: write_checks(report, fh), out_path)
            print(report.summary(), file=sys.stdout if out_path else sys.stderr)
            return EXIT_OK if report.passed else EXIT_VALIDATION

        result = run_sweep(scenario, workers=args.workers)
        _emit(lambda fh: write_rows(result.rows, fh), out_path)
        for err in result.errors:
            kind = "non-convergence" if err.non_convergence else "domain error"
            print(f"{kind}: {err.quantity_name} {err.point}: {err.message}", file=sys.stderr)
        if any(e.non_convergence for e in result.errors):
            return EXIT_CONVERGENCE
        return EXIT_CONFIG if result.errors else EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConvergenceError as exc:
        print(f"non-convergence: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except DomainError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    raise SystemExit(main())
