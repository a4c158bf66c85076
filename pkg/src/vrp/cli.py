"""Command-line front end.

Subcommands
-----------
``thresholds DIST``
    Median, indifference thresholds, admissibility verdict, and the
    two-round variance condition for one distribution.
``simulate --dist DIST``
    Seeded Monte Carlo estimate of the probability that the final winner is
    the median, compared against the closed form.
``sweep DIST --Tmax N``
    CSV table of the closed-form (and optionally simulated) probability for
    round counts 2..Tmax.
``verify DIST``
    Discretized backward-induction verification of the closed-form
    strategies, strategy-proofness, and the threshold sign structure.

Exit codes: 0 success, 1 usage or configuration error, 2 verification
failure.  Machine outputs (json/csv) print floats with 17 significant
digits; human summaries use 6.  Identical invocations produce identical
bytes.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import oracle as oracle_mod
from .distributions import check_admissibility, parse_distribution
from .simulator import (
    GameConfig,
    ProposerMode,
    VoterMode,
    run_monte_carlo,
    write_trajectories_csv,
)
from .thresholds import solve_thresholds, two_round_condition

USAGE_EXIT = 1
VERIFY_EXIT = 2


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors; our contract reserves 2 for
    verification failures, so remap to 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(self.exit_with_usage(message))

    def exit_with_usage(self, message) -> int:
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        return USAGE_EXIT


def _fmt17(x: float) -> str:
    return format(float(x), ".17g")


def _fmt6(x: float) -> str:
    return format(float(x), ".6g")


def _json_render(value, indent: int = 0) -> str:
    pad = "  " * indent
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return _fmt17(value)
    if isinstance(value, str):
        escaped = value.replace("\\", "\\\\").replace('"', '\\"')
        return f'"{escaped}"'
    if isinstance(value, dict):
        items = [f'{pad}  "{k}": {_json_render(v, indent + 1)}' for k, v in value.items()]
        return "{\n" + ",\n".join(items) + f"\n{pad}}}"
    if isinstance(value, (list, tuple)):
        items = [f"{pad}  {_json_render(v, indent + 1)}" for v in value]
        return "[\n" + ",\n".join(items) + f"\n{pad}]"
    raise TypeError(f"cannot render {type(value)!r}")


def _flatten(prefix: str, value, out: dict):
    if isinstance(value, dict):
        for k, v in value.items():
            _flatten(k if not prefix else f"{prefix}.{k}", v, out)
    else:
        out[prefix] = value
    return out


def _csv_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return _fmt17(value)
    return str(value)


def _emit(text: str, out_path: str | None):
    if out_path:
        Path(out_path).write_text(text)
    else:
        sys.stdout.write(text)


def _record_output(record: dict, fmt: str, out_path: str | None):
    if fmt == "json":
        _emit(_json_render(record) + "\n", out_path)
    elif fmt == "csv":
        flat = _flatten("", record, {})
        header = ",".join(flat.keys())
        row = ",".join(_csv_cell(v) for v in flat.values())
        _emit(f"{header}\n{row}\n", out_path)
    else:
        raise ValueError(f"unknown format {fmt!r}")


def _load_config_file(path: str) -> dict[str, str]:
    """Flat ``key = value`` file mirroring long flag names."""
    values: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()
    return values


def _apply_config_file(args, parser: _Parser, argv: list[str], spec: dict[str, type]):
    """Fill arguments from ``--config`` without overriding explicit flags."""
    if not getattr(args, "config", None):
        return
    try:
        values = _load_config_file(args.config)
    except (OSError, ValueError) as exc:
        raise SystemExit(parser.exit_with_usage(str(exc)))
    for key, raw in values.items():
        dest = key.replace("-", "_")
        if dest not in spec:
            raise SystemExit(parser.exit_with_usage(f"unknown config key {key!r} in {args.config}"))
        if any(tok == f"--{key}" or tok.startswith(f"--{key}=") for tok in argv):
            continue  # explicit flag wins
        try:
            setattr(args, dest, spec[dest](raw))
        except ValueError as exc:
            raise SystemExit(parser.exit_with_usage(f"bad config value for {key!r}: {exc}"))


def _parse_dist(parser: _Parser, spec: str):
    try:
        dist = parse_distribution(spec)
    except (ValueError, OSError) as exc:
        raise SystemExit(parser.exit_with_usage(str(exc)))
    clamped = getattr(dist, "clamped_count", 0)
    if clamped:
        print(f"warning: clamped {clamped} out-of-range samples into [0, 1]", file=sys.stderr)
    return dist


def build_parser() -> _Parser:
    parser = _Parser(prog="vrp", description=(
        "Multi-round majority voting with randomly drawn proposers: "
        "thresholds, simulation, and brute-force verification."
    ))
    sub = parser.add_subparsers(dest="command", required=True)

    p_thr = sub.add_parser("thresholds", parents=[], help="equilibrium thresholds and admissibility")
    p_thr.add_argument("dist", help="distribution spec, e.g. beta:20,2")
    p_thr.add_argument("--format", choices=["text", "json", "csv"], default="text")
    p_thr.add_argument("--out", default=None, help="write output to a file instead of stdout")

    p_sim = sub.add_parser("simulate", help="Monte Carlo estimate of the median winning")
    p_sim.add_argument("--dist", default=None, help="distribution spec")
    p_sim.add_argument("--T", type=int, default=2, help="number of voting rounds")
    p_sim.add_argument(
        "--q1",
        type=float,
        default=None,
        help="initial status quo; default is the tail on the threshold side, "
        "where the closed-form probability is the binding benchmark",
    )
    p_sim.add_argument("--reps", type=int, default=10_000)
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--voter-mode", choices=[m.value for m in VoterMode], default=VoterMode.SOPHISTICATED.value)
    p_sim.add_argument(
        "--proposer-mode", choices=[m.value for m in ProposerMode], default=ProposerMode.EQUILIBRIUM.value
    )
    p_sim.add_argument("--threads", type=int, default=1)
    p_sim.add_argument("--dump-trajectories", default=None, metavar="PATH")
    p_sim.add_argument("--format", choices=["text", "json", "csv"], default="text")
    p_sim.add_argument("--out", default=None)
    p_sim.add_argument("--config", default=None, help="flat key=value file mirroring the flags")

    p_swp = sub.add_parser("sweep", help="probability table for T = 2..Tmax (CSV)")
    p_swp.add_argument("dist")
    p_swp.add_argument("--Tmax", type=int, required=True)
    p_swp.add_argument("--reps", type=int, default=None, help="add Monte Carlo columns with this many replications")
    p_swp.add_argument("--seed", type=int, default=0)
    p_swp.add_argument("--q1", type=float, default=None)
    p_swp.add_argument("--threads", type=int, default=1)
    p_swp.add_argument("--out", default=None)

    p_ver = sub.add_parser("verify", help="discretized backward-induction verification")
    p_ver.add_argument("dist")
    p_ver.add_argument("--N", type=int, default=201, help="alternative grid size")
    p_ver.add_argument("--M", type=int, default=1001, help="voter panel size (odd)")
    p_ver.add_argument("--T", type=int, default=2, help="rounds")
    p_ver.add_argument("--K", type=int, default=401, help="proposer type grid size")
    p_ver.add_argument("--scan-points", type=int, default=200)
    p_ver.add_argument("--out", default=None)

    return parser


_SIM_CONFIG_TYPES = {
    "dist": str,
    "T": int,
    "q1": float,
    "reps": int,
    "seed": int,
    "voter_mode": str,
    "proposer_mode": str,
    "threads": int,
    "dump_trajectories": str,
    "format": str,
    "out": str,
    "config": str,
}


def _cmd_thresholds(parser: _Parser, args) -> int:
    dist = _parse_dist(parser, args.dist)
    report = check_admissibility(dist)
    th = solve_thresholds(dist, enforce_admissible=False)
    cert = two_round_condition(dist)
    mass_low = dist.cdf(th.lower)
    mass_high = 1.0 - dist.cdf(th.upper)
    if args.format == "text":
        lines = [
            f"distribution           {dist.spec}",
            f"median                 {_fmt6(th.median)}",
            f"lower threshold        {_fmt6(th.lower)} ({'root' if th.lower_root_found else 'clamped'})",
            f"upper threshold        {_fmt6(th.upper)} ({'root' if th.upper_root_found else 'clamped'})",
            f"F(lower)               {_fmt6(mass_low)}",
            f"1 - F(upper)           {_fmt6(mass_high)}",
            f"mean                   {_fmt6(report.mean)}",
            f"variance               {_fmt6(report.variance)}",
            f"admissible             {'yes' if report.admissible else 'no'} "
            f"({report.branch.value}, integral {_fmt6(report.integral_value)})",
            f"two rounds suffice     {'yes' if cert.holds else 'no'} "
            f"(Var {_fmt6(cert.lhs_variance)} vs {_fmt6(cert.rhs)})",
        ]
        _emit("\n".join(lines) + "\n", args.out)
    else:
        record = {
            "distribution": dist.spec,
            "median": th.median,
            "lower": th.lower,
            "upper": th.upper,
            "lower_root_found": th.lower_root_found,
            "upper_root_found": th.upper_root_found,
            "mass_below_lower": mass_low,
            "mass_above_upper": mass_high,
            "admissibility": {
                "branch": report.branch.value,
                "integral_value": report.integral_value,
                "mean": report.mean,
                "variance": report.variance,
                "admissible": report.admissible,
            },
            "two_round": {
                "branch": cert.branch.value,
                "lhs_variance": cert.lhs_variance,
                "rhs": cert.rhs,
                "holds": cert.holds,
            },
        }
        _record_output(record, args.format, args.out)
    return 0


def _default_q1(dist) -> float:
    return 0.0 if dist.median() >= 0.5 else 1.0


def _cmd_simulate(parser: _Parser, args, argv) -> int:
    _apply_config_file(args, parser, argv, _SIM_CONFIG_TYPES)
    if not args.dist:
        raise SystemExit(parser.exit_with_usage("simulate requires --dist (flag or config file)"))
    dist = _parse_dist(parser, args.dist)
    q1 = args.q1 if args.q1 is not None else _default_q1(dist)
    try:
        config = GameConfig(
            distribution=dist,
            rounds=args.T,
            initial_status_quo=q1,
            voter_mode=VoterMode(args.voter_mode),
            proposer_mode=ProposerMode(args.proposer_mode),
            seed=args.seed,
            replications=args.reps,
        )
    except ValueError as exc:
        raise SystemExit(parser.exit_with_usage(str(exc)))
    report = run_monte_carlo(config, threads=max(1, args.threads))
    if args.dump_trajectories:
        write_trajectories_csv(config, args.dump_trajectories)
    record = {
        "distribution": report.distribution,
        "rounds": report.rounds,
        "initial_status_quo": report.initial_status_quo,
        "voter_mode": report.voter_mode,
        "proposer_mode": report.proposer_mode,
        "seed": report.seed,
        "replications": report.replications,
        "p_hat": report.p_hat,
        "standard_error": report.standard_error,
        "closed_form": report.closed_form,
        "z_score": report.z_score,
        "mean_final_distance_to_median": report.mean_final_distance_to_median,
    }
    if args.format == "text":
        lines = []
        for key, value in record.items():
            if isinstance(value, float):
                lines.append(f"{key:<30} {_fmt6(value)}")
            else:
                lines.append(f"{key:<30} {'-' if value is None else value}")
        _emit("\n".join(lines) + "\n", args.out)
    else:
        _record_output(record, args.format, args.out)
    return 0


def _cmd_sweep(parser: _Parser, args) -> int:
    if args.Tmax < 2:
        raise SystemExit(parser.exit_with_usage(f"--Tmax must be >= 2, got {args.Tmax}"))
    dist = _parse_dist(parser, args.dist)
    th = solve_thresholds(dist, enforce_admissible=False)
    from .equilibrium import closed_form_probability

    q1 = args.q1 if args.q1 is not None else _default_q1(dist)
    lines = ["T,closed_form,monte_carlo,stderr"]
    for rounds in range(2, args.Tmax + 1):
        closed = closed_form_probability(dist, th, rounds)
        if args.reps:
            config = GameConfig(
                distribution=dist,
                rounds=rounds,
                initial_status_quo=q1,
                seed=args.seed,
                replications=args.reps,
            )
            rep = run_monte_carlo(config, threads=max(1, args.threads))
            lines.append(f"{rounds},{_fmt17(closed)},{_fmt17(rep.p_hat)},{_fmt17(rep.standard_error)}")
        else:
            lines.append(f"{rounds},{_fmt17(closed)},,")
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def _cmd_verify(parser: _Parser, args) -> int:
    dist = _parse_dist(parser, args.dist)
    try:
        game = oracle_mod.build_discrete_game(dist, args.N, args.M, args.T, args.K)
        th = solve_thresholds(dist, enforce_admissible=False)
    except ValueError as exc:
        raise SystemExit(parser.exit_with_usage(str(exc)))
    table = oracle_mod.backward_induction(game)
    check = oracle_mod.verify_equilibrium(game, table, th)
    dev = oracle_mod.verify_strategy_proofness(game, table)
    signs = oracle_mod.verify_threshold_signs(dist, th, args.scan_points)
    lines = [
        f"distribution            {dist.spec}",
        f"grid/panel/types/rounds N={args.N} M={args.M} K={args.K} T={args.T}",
        "equilibrium agreement   "
        + ("PASS" if check.passed else "FAIL")
        + f" ({check.checked} pairs checked, {len(check.violations)} violations, "
        + f"{check.excluded} near-threshold pairs excluded, max gap {_fmt6(check.max_gap)})",
        "strategy-proofness      "
        + ("PASS" if dev.passed else "FAIL")
        + f" (max proposer gain {_fmt6(dev.max_proposer_gain)}, max voter gain {_fmt6(dev.max_voter_gain)})",
        "threshold sign scan     " + ("PASS" if signs else "FAIL"),
    ]
    if check.violations:
        lines.append("round,type_index,q_index,analytic,oracle,gap")
        lines.extend(v.line() for v in check.violations)
    _emit("\n".join(lines) + "\n", args.out)
    return 0 if (check.passed and dev.passed and signs) else VERIFY_EXIT


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "thresholds":
            return _cmd_thresholds(parser, args)
        if args.command == "simulate":
            return _cmd_simulate(parser, args, argv)
        if args.command == "sweep":
            return _cmd_sweep(parser, args)
        if args.command == "verify":
            return _cmd_verify(parser, args)
        raise SystemExit(parser.exit_with_usage(f"unknown command {args.command!r}"))
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else USAGE_EXIT


if __name__ == "__main__":
    sys.exit(main())
