"""Command-line entry point.

Every subcommand echoes its fully resolved configuration (defaults and
seeds included) into the output, and every randomized command requires an
explicit seed (flag or ``RANKGRAPH_SEED``) so nothing is silently
nondeterministic.  Exit codes: 0 success, 1 runtime/file error, 2 usage.
"""

import argparse
import json
import os
import sys

from .anticoncentration import FAMILIES, lo_scaling_experiment
from .errors import RankToolError
from .exact_rank import DEFAULT_PRIMES, PrimeModulus, certify_rank
from .experiments import (
    D_REGULAR,
    G_OF_Y,
    THRESHOLD_SWEEP,
    ExperimentConfig,
    canonical_json,
    emit_plot_script,
    persist,
    run_experiment,
    to_jsonl,
)
from .exposure import trace_exposure
from .graphs import ExposureStream, exposure_stream, gnp, parse_graph, random_regular
from .structure import (
    find_witnesses,
    is_good,
    is_small_set_expander,
    is_well_separated,
    thresholds,
)

SEED_ENV = "RANKGRAPH_SEED"


def _add_graph_source(parser, generators=True):
    parser.add_argument("--edges", metavar="PATH", help="edge-list file (first line n, then 'u v' lines)")
    if generators:
        parser.add_argument("--gnp", metavar="N,P", help="sample G(n,p), e.g. --gnp 100,0.05")
        parser.add_argument("--regular", metavar="N,D", help="sample a random d-regular graph")


def _add_common(parser, seed_required=False):
    parser.add_argument("--seed", type=int, default=None,
                        help=f"master seed (or set {SEED_ENV})" + (" [required]" if seed_required else ""))
    parser.add_argument("--primes", metavar="P1,P2",
                        help="comma-separated 31-bit primes (default: two fixed primes)")
    parser.add_argument("--out", metavar="PATH", help="write output to PATH instead of stdout")
    parser.add_argument("--format", choices=("json", "csv", "text"), default=None,
                        help="output encoding (default json; csv for lo)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rankgraph",
        description="Exact rank certification and randomized exploration of "
                    "random graph adjacency matrices.",
    )
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    p_rank = sub.add_parser("rank", help="certify rank(Q_G) against n - i(G)")
    _add_graph_source(p_rank)
    _add_common(p_rank)

    p_cert = sub.add_parser("certify", help="run the structural checkers and print witnesses")
    _add_graph_source(p_cert)
    _add_common(p_cert)
    p_cert.add_argument("--p", type=float, default=None,
                        help="edge probability used to derive checker thresholds")
    p_cert.add_argument("--mode", choices=("auto", "exact", "randomized"), default="auto",
                        help="checker mode (auto picks exact when small enough)")
    p_cert.add_argument("--restarts", type=int, default=1000,
                        help="randomized-search restarts (default 1000)")

    p_trace = sub.add_parser("trace", help="trace the deficiency walk along a vertex exposure")
    _add_graph_source(p_trace)
    _add_common(p_trace, seed_required=True)
    p_trace.add_argument("--prime", type=int, default=DEFAULT_PRIMES[0].value,
                         help="field prime for incremental ranks")

    p_sweep = sub.add_parser("sweep", help="threshold sweep over p = c ln n / n")
    p_sweep.add_argument("--n", type=int, required=True)
    p_sweep.add_argument("--c", required=True, metavar="C1,C2,...",
                         help="comma-separated c values")
    p_sweep.add_argument("--samples", type=int, default=50)
    p_sweep.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    p_sweep.add_argument("--emit-plot", metavar="DIR", help="write plot CSV + script into DIR")
    _add_common(p_sweep, seed_required=True)

    p_gofy = sub.add_parser("gofy", help="estimate rank/n against y = n p")
    p_gofy.add_argument("--n", type=int, required=True)
    p_gofy.add_argument("--y", required=True, metavar="Y1,Y2,...",
                        help="comma-separated y values")
    p_gofy.add_argument("--samples", type=int, default=50)
    p_gofy.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    p_gofy.add_argument("--emit-plot", metavar="DIR", help="write plot CSV + script into DIR")
    _add_common(p_gofy, seed_required=True)

    p_reg = sub.add_parser("regular", help="nonsingularity rates of random d-regular graphs")
    p_reg.add_argument("--n", type=int, required=True)
    p_reg.add_argument("--d", required=True, metavar="D1,D2,...",
                       help="comma-separated degrees")
    p_reg.add_argument("--samples", type=int, default=50)
    p_reg.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    _add_common(p_reg, seed_required=True)

    p_lo = sub.add_parser("lo", help="scaled small-ball atoms over an (n, p) grid")
    p_lo.add_argument("--n", required=True, metavar="N1,N2,...",
                      help="comma-separated coefficient counts")
    p_lo.add_argument("--p", required=True, metavar="P1,P2,...",
                      help="comma-separated probabilities")
    p_lo.add_argument("--families", default=",".join(FAMILIES),
                      help=f"coefficient families among {FAMILIES}")
    p_lo.add_argument("--samples", type=int, default=20000,
                      help="Monte Carlo samples for the quadratic form")
    p_lo.add_argument("--no-quadratic", action="store_true",
                      help="skip the Monte Carlo quadratic column")
    _add_common(p_lo)
    return parser


def _parse_floats(text: str) -> list:
    try:
        return [float(x) for x in text.split(",") if x != ""]
    except ValueError:
        raise RankToolError(f"expected a comma-separated number list, got {text!r}") from None


def _resolve_seed(args, parser, required: bool):
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env is not None:
        return int(env)
    if required:
        parser.error(f"--seed is required (or set {SEED_ENV})")
    return 0


def _resolve_primes(args) -> tuple:
    if getattr(args, "primes", None):
        return tuple(PrimeModulus(int(p)).value for p in args.primes.split(","))
    return tuple(p.value for p in DEFAULT_PRIMES)


def _load_graph(args, parser, seed):
    sources = [s for s in ("edges", "gnp", "regular") if getattr(args, s, None)]
    if len(sources) != 1:
        parser.error("exactly one of --edges, --gnp, --regular is required")
    if args.edges:
        with open(args.edges, "r", encoding="utf-8") as fh:
            return parse_graph(fh.read()), {"edges": args.edges}
    if args.gnp:
        n, p = args.gnp.split(",")
        graph = gnp(int(n), float(p), seed)
        return graph, {"gnp": {"n": int(n), "p": float(p)}, "seed": seed}
    n, d = args.regular.split(",")
    graph = random_regular(int(n), int(d), seed)
    return graph, {"regular": {"n": int(n), "d": int(d)}, "seed": seed}


def _emit(args, text: str) -> None:
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_rank(args, parser) -> int:
    seed = _resolve_seed(args, parser, required=bool(args.gnp or args.regular))
    primes = _resolve_primes(args)
    graph, source = _load_graph(args, parser, seed)
    cert = certify_rank(graph, primes)
    payload = {"config": {"command": "rank", "source": source, "primes": list(primes)},
               **cert.to_dict()}
    if args.format == "text":
        lines = [f"n={cert.n} isolated={cert.isolated} rank={cert.rank} status={cert.status}"]
        lines.extend(
            f"witness {w.kind}: {w.vertices}" + (f" via {w.via}" if w.via else "")
            for w in cert.witnesses
        )
        _emit(args, "\n".join(lines) + "\n")
    else:
        _emit(args, canonical_json(payload) + "\n")
    return 0


def _cmd_certify(args, parser) -> int:
    seed = _resolve_seed(args, parser, required=bool(args.gnp or args.regular))
    primes = _resolve_primes(args)
    graph, source = _load_graph(args, parser, seed)
    p = args.p
    if p is None and args.gnp:
        p = float(args.gnp.split(",")[1])
    report: dict = {
        "config": {
            "command": "certify", "source": source, "p": p, "mode": args.mode,
            "restarts": args.restarts, "seed": seed, "primes": list(primes),
        }
    }
    if p is not None and 0.0 < p < 1.0 and graph.n >= 3:
        th = thresholds(graph.n, p)
        report["thresholds"] = {
            "k": th.k,
            "low_degree": th.low_degree,
            "small_set_bound": th.small_set_bound,
            "few_low_degree_bound": th.few_low_degree_bound,
        }
        mode = args.mode
        if mode == "auto":
            exact_ok = graph.n <= 24
            mode = "exact" if exact_ok else "randomized"
        sep = is_well_separated(graph, th.low_degree)
        exp = is_small_set_expander(graph, th.small_set_bound, mode=mode, seed=seed,
                                    restarts=args.restarts)
        good_mode = mode
        if mode == "exact" and graph.n > 16 and th.k > 3:
            good_mode = "randomized"
        good = is_good(graph, th.k, th.few_low_degree_bound, mode=good_mode,
                       seed=seed, restarts=args.restarts)
        report["checkers"] = {
            "well_separated": {"status": sep.status, "witness": _jsonable(sep.witness)},
            "small_set_expander": {"status": exp.status, "witness": _jsonable(exp.witness)},
            "good": {"status": good.status, "witness": _jsonable(good.witness)},
        }
    cert = certify_rank(graph, primes)
    report["certificate"] = cert.to_dict()
    report["witnesses"] = [
        {
            "kind": w.kind,
            "vertices": list(w.vertices),
            "deficiency_contribution": w.deficiency_contribution,
            **({"via": w.via} if w.via is not None else {}),
        }
        for w in find_witnesses(graph)
    ]
    if args.format == "text":
        lines = [f"rank {cert.rank} of upper bound {cert.n - cert.isolated} ({cert.status})"]
        for w in report["witnesses"]:
            lines.append(f"witness {w['kind']}: {w['vertices']}")
        for name, res in report.get("checkers", {}).items():
            lines.append(f"{name}: {res['status']}")
        _emit(args, "\n".join(lines) + "\n")
    else:
        _emit(args, canonical_json(report) + "\n")
    return 0


def _jsonable(obj):
    if obj is None or isinstance(obj, (int, float, str, bool)):
        return obj
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        return sorted(_jsonable(v) for v in obj)
    return repr(obj)


def _cmd_trace(args, parser) -> int:
    seed = _resolve_seed(args, parser, required=True)
    graph = None
    if args.edges:
        with open(args.edges, "r", encoding="utf-8") as fh:
            graph = parse_graph(fh.read())
        stream = ExposureStream.from_graph(graph)
        source = {"edges": args.edges}
    elif args.gnp:
        n, p = args.gnp.split(",")
        stream = exposure_stream(int(n), float(p), seed)
        source = {"gnp": {"n": int(n), "p": float(p)}, "seed": seed}
    else:
        parser.error("trace needs --edges or --gnp")
    trace = trace_exposure(stream, args.prime)
    lines = [canonical_json({"record": "config", "command": "trace",
                             "source": source, "prime": args.prime})]
    lines.extend(canonical_json(r) for r in trace.step_records())
    _emit(args, "\n".join(lines) + "\n")
    return 0


def _run_campaign(args, parser, kind: str, grid) -> int:
    seed = _resolve_seed(args, parser, required=True)
    config = ExperimentConfig(
        kind=kind, n=args.n, grid=tuple(grid), samples=args.samples,
        seed=seed, primes=_resolve_primes(args),
    )
    records = run_experiment(config, workers=max(1, args.workers))
    if args.out:
        persist(records, args.out)
        summary = [r for r in records if r["record"] in ("cell", "summary", "notice")]
        sys.stdout.write(to_jsonl(summary))
    else:
        sys.stdout.write(to_jsonl(records))
    plot_dir = getattr(args, "emit_plot", None)
    if plot_dir:
        artifact = emit_plot_script(records)
        os.makedirs(plot_dir, exist_ok=True)
        csv_path = os.path.join(plot_dir, f"{kind}.csv")
        script_path = os.path.join(plot_dir, f"plot_{kind.replace('-', '_')}.py")
        with open(csv_path, "w", encoding="utf-8") as fh:
            fh.write(artifact.csv)
        with open(script_path, "w", encoding="utf-8") as fh:
            fh.write(artifact.script)
        sys.stderr.write(f"plot data: {csv_path}\nplot script: {script_path}\n")
    return 0


def _cmd_lo(args, parser) -> int:
    seed = _resolve_seed(args, parser, required=False)
    families = tuple(f for f in args.families.split(",") if f)
    table = lo_scaling_experiment(
        _parse_floats(args.n), _parse_floats(args.p), families=families,
        quadratic=not args.no_quadratic, mc_samples=args.samples, seed=seed,
    )
    config = {
        "command": "lo", "n": _parse_floats(args.n), "p": _parse_floats(args.p),
        "families": list(families), "samples": args.samples, "seed": seed,
    }
    header = ["n", "p", "q", "atom_all_ones", "scaled_all_ones", "atom_ramp",
              "scaled_ramp", "atom_quadratic", "scaled_quadratic", "quadratic_ci"]
    if args.format == "json":
        payload = {
            "config": config,
            "rows": [
                {h: getattr(r, h) for h in header} for r in table.rows
            ],
            "skipped": [{"n": n, "p": p, "reason": why} for n, p, why in table.skipped],
        }
        _emit(args, canonical_json(payload) + "\n")
        return 0
    lines = ["# config " + canonical_json(config)]
    lines.append(",".join(header))
    for r in table.rows:
        lines.append(",".join("" if getattr(r, h) is None else repr(getattr(r, h))
                              if isinstance(getattr(r, h), float) else str(getattr(r, h))
                              for h in header))
    for n, p, why in table.skipped:
        lines.append(f"# skipped n={n} p={p}: {why}")
    _emit(args, "\n".join(lines) + "\n")
    return 0


def dispatch(argv) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return 2
    if getattr(args, "format", None) is None:
        args.format = "csv" if args.command == "lo" else "json"
    try:
        if args.command == "rank":
            return _cmd_rank(args, parser)
        if args.command == "certify":
            return _cmd_certify(args, parser)
        if args.command == "trace":
            return _cmd_trace(args, parser)
        if args.command == "sweep":
            return _run_campaign(args, parser, THRESHOLD_SWEEP, _parse_floats(args.c))
        if args.command == "gofy":
            return _run_campaign(args, parser, G_OF_Y, _parse_floats(args.y))
        if args.command == "regular":
            return _run_campaign(args, parser, D_REGULAR, _parse_floats(args.d))
        if args.command == "lo":
            return _cmd_lo(args, parser)
        parser.error(f"unknown command {args.command!r}")
    except RankToolError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except OSError as exc:
        sys.stderr.write(f"error: {exc.strerror or exc}: {getattr(exc, 'filename', '')}\n")
        return 1
    return 0


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
