"""CLI entry point for the bergman-tube verification toolkit."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from pydantic import ValidationError

from .config import Settings, get_settings
from .errors import BergmanTubeError, HypothesisError, exit_code_for
from .geometry import TubePoint, axis_point
from .lattice import generate_lattice, write_lattice_csv
from .measures.carleson import AnyMeasure, berezin_bounded_check, carleson_test, default_paths, vanishing_test
from .measures.registry import load_measure
from .measures.zoo import zoo_for_exponent
from .models import CarlesonParams, Region, SamplingPlan, SpacePair
from .operators.rademacher import khinchine_check
from .operators.toeplitz import axis_probes, locate_crossover, operator_norm_estimate, sequence_criterion
from .quadrature.integrate import verify_identity
from .reports import emit, open_output, profile_rows, report_header, write_header
from .suite.runner import SUITE_COLUMNS, run_suite
from .utils.run_logger import log_check, log_path, log_run_finish, log_run_start, new_run_id, read_run, tail_lines

logger = logging.getLogger("bergman-tube")

SIGMA_PASS = 4.0
ZOO_NAMES = ("atom", "atom-cloud", "matched-density", "mismatched-density")

Handler = Callable[[argparse.Namespace, Settings, str], int]


# --- argument parsing -------------------------------------------------------


def _tube_point(text: str) -> TubePoint:
    try:
        return TubePoint.model_validate_json(text)
    except ValidationError as e:
        raise argparse.ArgumentTypeError(f"not a TubePoint JSON object ({e.error_count()} errors): {text}") from e


def _coefficients(text: str) -> List[complex]:
    """JSON list of numbers or [re, im] pairs, or comma-separated reals."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError:
        data = [part for part in text.split(",") if part.strip()]
    if not isinstance(data, list) or not data:
        raise argparse.ArgumentTypeError("coefficients must be a non-empty list")
    try:
        return [complex(v[0], v[1]) if isinstance(v, list) else complex(float(v)) for v in data]
    except (TypeError, ValueError, IndexError) as e:
        raise argparse.ArgumentTypeError(f"bad coefficient list: {text}") from e


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=None, help="override the published default seed")
    p.add_argument("--samples", type=int, default=None, help="Monte-Carlo sample count (>= 1000)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--output", default=None, help="output file (default stdout)")


def _add_measure(p: argparse.ArgumentParser) -> None:
    g = p.add_mutually_exclusive_group()
    g.add_argument("--measure", default=None, help="measure JSON file")
    g.add_argument("--zoo", choices=ZOO_NAMES, default=None, help="built-in measure (default atom)")
    p.add_argument("--n", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bergman-tube",
        description="Numerical checks for Bergman spaces, Carleson measures and Toeplitz operators on tubular domains.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify-identity", help="two-kernel integral identity by quadrature")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--z", type=_tube_point, default=None, help="TubePoint JSON (default (0', i))")
    p.add_argument("--u", type=_tube_point, default=None, help="TubePoint JSON (default (0', i))")
    _add_common(p)

    p = sub.add_parser("suite", help="run the acceptance battery")
    p.add_argument("--quick", action="store_true", help="fewer samples, tolerances x3")
    p.add_argument("--measure", action="append", default=[], help="extra measure JSON file (repeatable)")
    p.add_argument("--only", action="append", default=None, help="run only this check_id (repeatable)")
    _add_common(p)

    p = sub.add_parser("carleson", help="Carleson ratios over probes and boundary paths")
    _add_measure(p)
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--gamma", type=float, default=0.0)
    p.add_argument("--r", type=float, default=1.0)
    p.add_argument("--levels", type=int, default=17)
    _add_common(p)

    p = sub.add_parser("berezin", help="Berezin-type transform sup and trend")
    _add_measure(p)
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--t", type=float, default=None)
    p.add_argument("--levels", type=int, default=17)
    _add_common(p)

    p = sub.add_parser("opnorm", help="Toeplitz operator norm lower bound vs Carleson surrogate")
    _add_measure(p)
    _add_space_pair(p)
    p.add_argument("--levels", type=int, default=17)
    p.add_argument("--r", type=float, default=None)
    p.add_argument("--probe-density", type=int, default=None, help="candidate sweep size of the surrogate lattice")
    _add_common(p)

    p = sub.add_parser("sequence", help="lattice sequence criterion (p2 < p1)")
    _add_measure(p)
    _add_space_pair(p)
    p.add_argument("--r", type=float, default=None)
    p.add_argument("--crossover", action="store_true", help="also locate the V_beta crossover exponent")
    _add_common(p)

    p = sub.add_parser("lattice", help="generate an r-lattice of the default region")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--r", type=float, default=None)
    p.add_argument("--probe-density", type=int, default=None)
    p.add_argument("--x-bound", type=float, default=None)
    p.add_argument("--yprime-bound", type=float, default=None)
    p.add_argument("--h-min", type=float, default=None)
    p.add_argument("--h-max", type=float, default=None)
    _add_common(p)

    p = sub.add_parser("khinchine", help="Khinchine inequality for Rademacher sums")
    p.add_argument("--coeffs", type=_coefficients, required=True)
    p.add_argument("--p", type=float, required=True)
    _add_common(p)

    p = sub.add_parser("logs", help="inspect the JSONL run log (BERGMAN_TUBE_LOG_PATH)")
    logs = p.add_subparsers(dest="logs_command", required=True)
    tail = logs.add_parser("tail")
    tail.add_argument("--n", type=int, default=100)
    show = logs.add_parser("show")
    show.add_argument("run_id")
    return parser


def _add_space_pair(p: argparse.ArgumentParser) -> None:
    p.add_argument("--p1", type=float, required=True)
    p.add_argument("--p2", type=float, required=True)
    p.add_argument("--alpha1", type=float, default=0.0)
    p.add_argument("--alpha2", type=float, default=0.0)
    p.add_argument("--xi", type=float, default=0.0)


# --- shared helpers -----------------------------------------------------------


def _settings_for(args: argparse.Namespace) -> Settings:
    s = get_settings()
    update: Dict[str, Any] = {}
    if getattr(args, "seed", None) is not None:
        update["seed"] = args.seed
    if getattr(args, "samples", None) is not None:
        if args.samples < 1000:
            raise HypothesisError(f"--samples must be at least 1000, got {args.samples}")
        update["samples"] = args.samples
    if getattr(args, "n", None) is not None and args.command != "logs":
        update["n"] = args.n
    return s.model_copy(update=update) if update else s


def _plan(settings: Settings) -> SamplingPlan:
    return SamplingPlan(samples=settings.samples, seed=settings.seed, chunk_size=settings.chunk_size)


def _region(settings: Settings) -> Region:
    return Region(x_bound=settings.x_bound, yprime_bound=settings.yprime_bound, h_min=settings.h_min, h_max=settings.h_max)


def _measure(args: argparse.Namespace, settings: Settings, ball_exponent: float) -> Tuple[str, AnyMeasure]:
    if args.measure:
        return Path(args.measure).name, load_measure(args.measure)
    name = args.zoo or "atom"
    for entry in zoo_for_exponent(ball_exponent, settings.n):
        if entry.name == name:
            return name, entry.measure
    raise HypothesisError(f"unknown zoo measure '{name}'")


def _space_pair(args: argparse.Namespace) -> SpacePair:
    return SpacePair(p1=args.p1, p2=args.p2, alpha1=args.alpha1, alpha2=args.alpha2, xi=args.xi)


# --- subcommands ----------------------------------------------------------------


def cmd_verify_identity(args: argparse.Namespace, settings: Settings, run_id: str) -> int:
    n = settings.n
    z = args.z or axis_point(1.0, n)
    u = args.u or axis_point(1.0, n)
    report = verify_identity(n, args.r, args.s, args.t, z, u, _plan(settings), threads=settings.threads)
    passed = report.sigma_distance < SIGMA_PASS
    header = report_header(settings, command="verify-identity", r=args.r, s=args.s, t=args.t, z=z, u=u)
    emit(args.format, args.output, header, report)
    log_check(run_id, "verify-identity", passed, measured=report.sigma_distance)
    return 0 if passed else 1


def cmd_suite(args: argparse.Namespace, settings: Settings, run_id: str) -> int:
    extra = [(Path(path).name, load_measure(path)) for path in args.measure]
    result = run_suite(quick=args.quick, extra_measures=extra, settings=settings, only=args.only, run_id=run_id)
    header = report_header(settings, command="suite", quick=args.quick, measures=[name for name, _ in extra])
    emit(args.format, args.output, header, {"rows": list(result.rows), "summary": result.summary}, rows=result.rows, columns=SUITE_COLUMNS)
    if result.passed:
        return 0
    for name in result.failing:
        print(f"FAILED {name}", file=sys.stderr)
    return 1


def cmd_carleson(args: argparse.Namespace, settings: Settings, run_id: str) -> int:
    cp = CarlesonParams(lam=args.lam, gamma=args.gamma)
    name, mu = _measure(args, settings, cp.ball_exponent(settings.n))
    plan = _plan(settings)
    paths = default_paths(mu.n, settings.path_parameters)
    probes = axis_probes(mu.n, levels=args.levels)
    report = carleson_test(mu, cp, args.r, probes, plan, paths=paths)
    vanishing = vanishing_test(mu, cp, args.r, paths, plan)
    header = report_header(settings, command="carleson", measure=name, **{"lambda": cp.lam}, gamma=cp.gamma, r=args.r)
    payload = {"carleson": report, "vanishing": vanishing}
    emit(args.format, args.output, header, payload, rows=_summary_rows(report.verdict, vanishing.verdict, report.vanishing_profile), columns=("path", "k", "value", "verdict"))
    log_check(run_id, "carleson", report.verdict == "Carleson-consistent", measured=report.sup_ratio)
    return 0


def _summary_rows(verdict: str, vanishing: str, profiles: Optional[Dict[str, Any]]) -> List[Dict[str, Any]]:
    rows = profile_rows(profiles or {})
    rows.append({"path": "verdict", "verdict": verdict})
    rows.append({"path": "vanishing", "verdict": vanishing})
    return rows


def cmd_berezin(args: argparse.Namespace, settings: Settings, run_id: str) -> int:
    n = settings.n
    t = args.t if args.t is not None else settings.verdict_berezin_t
    name, mu = _measure(args, settings, (n + 1.0 + args.alpha) * args.lam)
    paths = default_paths(mu.n, settings.path_parameters)
    report = berezin_bounded_check(mu, args.alpha, args.lam, t, axis_probes(mu.n, levels=args.levels), _plan(settings), paths=paths)
    header = report_header(settings, command="berezin", measure=name, alpha=args.alpha, **{"lambda": args.lam}, t=t)
    rows = profile_rows(report.trend)
    rows.append({"path": "sup", "value": report.sup, "verdict": report.verdict})
    emit(args.format, args.output, header, report, rows=rows, columns=("path", "k", "value", "verdict"))
    log_check(run_id, "berezin", report.verdict == "bounded", measured=report.sup)
    return 0


def cmd_opnorm(args: argparse.Namespace, settings: Settings, run_id: str) -> int:
    sp = _space_pair(args)
    n = settings.n
    name, mu = _measure(args, settings, (n + 1.0 + sp.gamma) * sp.lam)
    r = args.r if args.r is not None else settings.lattice_r
    density = args.probe_density if args.probe_density is not None else settings.probe_density
    lat = generate_lattice(_region(settings), r, density, settings.seed, n=mu.n)
    report = operator_norm_estimate(mu, sp, axis_probes(mu.n, levels=args.levels), _plan(settings), lattice=lat)
    header = report_header(
        settings, command="opnorm", measure=name, p1=sp.p1, p2=sp.p2, alpha1=sp.alpha1, alpha2=sp.alpha2, xi=sp.xi, r=r, probe_density=density
    )
    emit(args.format, args.output, header, report)
    log_check(run_id, "opnorm", report.ratio is not None, measured=report.ratio)
    return 0


def cmd_sequence(args: argparse.Namespace, settings: Settings, run_id: str) -> int:
    sp = _space_pair(args)
    n = settings.n
    name, mu = _measure(args, settings, (n + 1.0 + sp.gamma) * sp.lam)
    plan = _plan(settings)
    r = args.r if args.r is not None else settings.lattice_r
    lat = generate_lattice(_region(settings), r, settings.probe_density, settings.seed, n=mu.n)
    report = sequence_criterion(mu, sp, lat, plan)
    payload: Dict[str, Any] = {"sequence": report}
    if args.crossover:
        payload["crossover"] = locate_crossover(sp, mu.n, _region(settings), r, plan, probe_density=settings.probe_density)
    header = report_header(settings, command="sequence", measure=name, p1=sp.p1, p2=sp.p2, xi=sp.xi, r=r, norm=report.norm, exponent=report.exponent)
    rows = [row.model_dump() for row in report.summand_profile]
    emit(args.format, args.output, header, payload, rows=rows, columns=("k", "ball_mass", "rho", "summand"))
    log_check(run_id, "sequence", True, measured=report.norm)
    return 0


def cmd_lattice(args: argparse.Namespace, settings: Settings, run_id: str) -> int:
    update = {
        key: value
        for key, value in (
            ("lattice_r", args.r),
            ("probe_density", args.probe_density),
            ("x_bound", args.x_bound),
            ("yprime_bound", args.yprime_bound),
            ("h_min", args.h_min),
            ("h_max", args.h_max),
        )
        if value is not None
    }
    settings = settings.model_copy(update=update)
    try:
        region = _region(settings)
    except ValidationError as e:
        raise HypothesisError(f"invalid region: {e.errors()[0]['msg']}") from e
    lat = generate_lattice(region, settings.lattice_r, settings.probe_density, settings.seed, n=settings.n)
    header = report_header(settings, command="lattice", points=len(lat), overlap_stat=lat.overlap_stat, separation_ok=lat.separation_ok)
    if args.format == "csv":
        with open_output(args.output) as handle:
            write_header(handle, header)
            write_lattice_csv(lat, handle)
    else:
        emit("json", args.output, header, {"points": lat.points, "overlap_stat": lat.overlap_stat, "separation_ok": lat.separation_ok})
    log_check(run_id, "lattice", lat.separation_ok, measured=len(lat))
    return 0 if lat.separation_ok else 1


def cmd_khinchine(args: argparse.Namespace, settings: Settings, run_id: str) -> int:
    report = khinchine_check(args.coeffs, args.p, settings.samples, settings.seed)
    header = report_header(settings, command="khinchine", p=args.p, coefficients=len(args.coeffs))
    emit(args.format, args.output, header, report)
    log_check(run_id, "khinchine", report.in_band, measured=report.ratio)
    return 0 if report.in_band else 1


# --- logs -----------------------------------------------------------------------


def _logs_tail(n: int = 100) -> None:
    """Print the last N lines of the run log."""
    path = log_path()
    if not path or not os.path.isfile(path):
        print(f"Log file not found: {path or '(BERGMAN_TUBE_LOG_PATH unset)'}")
        print("Set BERGMAN_TUBE_LOG_PATH before running checks to create it.")
        return
    for line in tail_lines(n):
        print(line)


def _logs_show(run_id: str) -> None:
    """Print the records of one run, one JSON object per line."""
    for record in read_run(run_id):
        print(json.dumps(record, sort_keys=True, default=str))


HANDLERS: Dict[str, Handler] = {
    "verify-identity": cmd_verify_identity,
    "suite": cmd_suite,
    "carleson": cmd_carleson,
    "berezin": cmd_berezin,
    "opnorm": cmd_opnorm,
    "sequence": cmd_sequence,
    "lattice": cmd_lattice,
    "khinchine": cmd_khinchine,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Parse arguments, run one subcommand and return its exit code (0 pass, 1 check failure, 2 usage/regime error)."""
    args = build_parser().parse_args(argv)
    base = get_settings()
    logging.basicConfig(stream=sys.stderr, level=getattr(logging, base.log_level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")

    if args.command == "logs":
        if args.logs_command == "tail":
            _logs_tail(args.n)
        else:
            _logs_show(args.run_id)
        return 0

    run_id = new_run_id()
    try:
        settings = _settings_for(args)
        log_run_start(run_id, args.command, report_header(settings))
        code = HANDLERS[args.command](args, settings, run_id)
    except BergmanTubeError as e:
        code = exit_code_for(e)
        if code is None:
            logger.exception("%s failed", args.command)
            log_run_finish(run_id, 1, error=str(e))
            raise
        print(f"error: {e}", file=sys.stderr)
        log_run_finish(run_id, code, error=str(e))
        return code
    log_run_finish(run_id, code)
    return code


if __name__ == "__main__":
    sys.exit(main())
