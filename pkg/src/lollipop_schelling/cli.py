"""Command-line entry point: ``lollipop-schelling <subcommand> ...``.

Exit codes: 0 when the run completed (Unsatisfiable and TimedOut are results),
2 for usage errors, 3 when a resource cap rejects the request.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import math
import statistics
import sys
from fractions import Fraction
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .bench import (ExperimentPlan, normalize_engine, plot_data, read_records, records_to_csv,
                    run_experiment, series_of, summarize)
from .core import Outcome, SchellingParams, Threshold
from .count_first import decide_clique, run_lollipop, simulate_path
from .fitting import estimate_exponents, fit_models, report_to_dict
from .oracle import DEFAULT_MAX_STATES, exact_expected_moves
from .qubo import MAX_ENCODE_VERTICES, brute_force_minimize, encode_qubo
from .topology import (LollipopSpec, ResourceCapError, build_clique, build_grid, build_lollipop,
                       build_path, build_welded_tree)
from .traditional import TraceOptions, simulate_traditional, write_trace_csv
from .walks import (hypercube_hitting_exact, hypercube_hitting_times, welded_tree_classical_walk,
                    welded_tree_expected_steps)

EXIT_OK, EXIT_USAGE, EXIT_CAP = 0, 2, 3


class UsageError(Exception):
    pass


def build_id() -> str:
    """Short digest of the package sources, so two builds with equal ids run the same code."""
    h = hashlib.sha256()
    root = resources.files(__package__)
    for path in sorted(Path(str(root)).glob("*.py")):
        h.update(path.name.encode())
        h.update(path.read_bytes())
    return h.hexdigest()[:12]


def version_string() -> str:
    return f"lollipop-schelling {__version__} (build {build_id()})"


def derive_seeds(seed: int, count: int) -> list[int]:
    """Independent per-trial seeds from one user seed."""
    return [int(np.random.SeedSequence(seed, spawn_key=(i,)).generate_state(1, np.uint64)[0])
            for i in range(count)]


def _tau(text: str) -> Threshold:
    try:
        return Threshold.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _grid(text: str) -> tuple[int, int]:
    try:
        r, c = (int(x) for x in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must look like RxC, got {text!r}") from None
    if r < 1 or c < 1:
        raise argparse.ArgumentTypeError("grid dimensions must be positive")
    return r, c


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _engine_list(text: str) -> list[str]:
    try:
        return [normalize_engine(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


# ---------------------------------------------------------------- topology flags

def _add_topology_flags(p, required=True):
    p.add_argument("--topology", choices=("lollipop", "clique", "path", "grid"), required=required)
    p.add_argument("--clique-size", type=int)
    p.add_argument("--path-length", type=int)
    p.add_argument("--grid", type=_grid, metavar="RxC")
    p.add_argument("--diagonal", action="store_true", help="8-neighborhood grid")
    p.add_argument("--agents-a", type=int, required=True)
    p.add_argument("--agents-b", type=int, required=True)
    p.add_argument("--tau", type=_tau, required=True, metavar="P/Q")


def _need(args, *names):
    for name in names:
        if getattr(args, name) is None:
            raise UsageError(f"--topology {args.topology} needs --{name.replace('_', '-')}")


def _topology(args):
    if args.topology == "lollipop":
        _need(args, "clique_size", "path_length")
        return build_lollipop(args.clique_size, args.path_length)
    if args.topology == "clique":
        _need(args, "clique_size")
        return build_clique(args.clique_size)
    if args.topology == "path":
        _need(args, "path_length")
        return build_path(args.path_length)
    _need(args, "grid")
    return build_grid(*args.grid, diagonal=args.diagonal)


def _params(args, vertex_count: int) -> SchellingParams:
    params = SchellingParams(args.agents_a, args.agents_b, args.tau,
                             getattr(args, "max_steps", None) or 10**7)
    params.validate_for(vertex_count)
    return params


# ---------------------------------------------------------------- subcommands

def cmd_simulate(args, out):
    if args.trials < 1:
        raise UsageError("--trials must be positive")
    if args.trace and args.trials != 1:
        raise UsageError("--trace needs --trials 1")
    count_first = args.engine == "count_first"
    if count_first and args.topology == "grid":
        raise UsageError("count-first supports lollipop, clique and path topologies only")
    if not count_first and (args.skip_clique_internal or args.exact_bridge):
        raise UsageError("--skip-clique-internal/--exact-bridge apply to the count-first engine")
    topo = _topology(args)
    params = _params(args, topo.vertex_count)
    seeds = derive_seeds(args.seed, args.trials)
    record = bool(args.trace)
    trials = []
    for i, seed in enumerate(seeds):
        if count_first and args.topology == "clique":
            res = decide_clique(params.count_a, params.count_b, params.tau)
        elif count_first and args.topology == "path":
            res = simulate_path(args.path_length, params.count_a, params.count_b, params.tau, seed,
                                params.max_steps, record=record)
        elif count_first:
            spec = LollipopSpec(args.clique_size, args.path_length)
            res = run_lollipop(spec, params, seed, exact_bridge=args.exact_bridge,
                               skip_clique_internal=args.skip_clique_internal, record=record).outcome
        else:
            res = simulate_traditional(topo, params, seed, TraceOptions() if record else None)
        if record and res.trace is not None:
            write_trace_csv(args.trace, res.trace)
        trials.append({"trial": i, "seed": seed, "outcome": res.result.value,
                       "T": res.steps, "wall_time": res.wall_time})
        out.line(f"trial {i} seed={seed} {res} wall={res.wall_time:.6f}s")

    result = {"trials": trials}
    if args.trials > 1:
        ok = [t for t in trials if t["outcome"] == Outcome.SATISFIED.value]
        steps = [t["T"] for t in ok]
        walls = [t["wall_time"] for t in ok]
        agg = {"satisfied": len(ok), "trials": len(trials),
               "mean_T": statistics.fmean(steps) if steps else None,
               "stdev_T": statistics.stdev(steps) if len(steps) > 1 else None,
               "mean_wall_time": statistics.fmean(walls) if walls else None,
               "stdev_wall_time": statistics.stdev(walls) if len(walls) > 1 else None}
        result["aggregate"] = agg
        out.line(f"satisfied: {agg['satisfied']}/{agg['trials']}")
        if steps:
            out.line(f"T mean={agg['mean_T']:.4f} stdev={_fmt(agg['stdev_T'])}")
            out.line(f"wall mean={agg['mean_wall_time']:.6f}s stdev={_fmt(agg['stdev_wall_time'])}")
    return result


def _fmt(x):
    return "n/a" if x is None else f"{x:.6g}"


def cmd_bench(args, out):
    plan = ExperimentPlan(sizes=args.sizes, trials_per_size=args.trials, density=args.density,
                          split=args.split, clique_fraction=args.clique_frac, tau=args.tau,
                          engines=tuple(args.engines), max_steps=args.max_steps,
                          master_seed=args.master_seed)

    def progress(engine, size, cell):
        ok = sum(r.outcome is Outcome.SATISFIED for r in cell)
        out.line(f"{engine} n={size}: {ok}/{len(cell)} satisfied")

    records = run_experiment(plan, jobs=args.jobs, progress=progress)
    Path(args.out).write_text(records_to_csv(records))
    summary = summarize(records)
    if args.plot_dir:
        pdir = Path(args.plot_dir)
        pdir.mkdir(parents=True, exist_ok=True)
        for engine, rows in summary.items():
            (pdir / f"{engine}.dat").write_text(plot_data(rows))
    result = {"records": len(records), "out": args.out, "summary": {
        engine: [{"size": s.size, "trials": s.trials, "satisfied": s.satisfied,
                  "timeout_fraction": s.timeout_fraction, "mean_runtime": s.mean_runtime,
                  "mean_T": s.mean_steps} for s in rows]
        for engine, rows in summary.items()}}
    for engine, rows in summary.items():
        for s in rows:
            out.line(f"{engine} n={s.size} mean_runtime={s.mean_runtime:.6g}s "
                     f"mean_T={s.mean_steps:.1f} timeouts={s.timeout_fraction:.3f}")
    out.line(f"wrote {len(records)} records to {args.out}")
    return result


def load_series(path) -> dict[str | None, list[tuple[float, float]]]:
    """Read a results CSV (one series per engine) or a two-column ``size value`` file."""
    text = Path(path).read_text()
    first = text.lstrip().splitlines()[0] if text.strip() else ""
    if first.startswith("engine,"):
        return {engine: series_of(rows) for engine, rows in summarize(read_records(path)).items()}
    series = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.replace(",", " ").split()
        try:
            series.append((float(parts[0]), float(parts[1])))
        except (ValueError, IndexError):
            if not series:  # tolerate one header line
                continue
            raise UsageError(f"cannot parse series line {line!r}") from None
    return {None: series}


def cmd_fit(args, out):
    docs = []
    for engine, series in load_series(args.input).items():
        fit = fit_models(series)
        exps = estimate_exponents(series) if len(series) >= 2 else None
        extra = {"engine": engine} if engine else {}
        doc = report_to_dict(fit, exps, **extra)
        if exps is not None and exps.nls_error:
            doc["exponents"]["nls_error"] = exps.nls_error
        docs.append(doc)
        label = f"{engine}: " if engine else ""
        power = fit.model("Power")
        out.line(f"{label}best model: {fit.best_model}")
        for m in fit.models:
            coeffs = " ".join(f"{k}={v:.6g}" for k, v in m.coeffs.items())
            out.line(f"{label}  {m.name:<13} {coeffs:<28} rmse={_fmt(m.rmse)} r2={_fmt(m.r2)}")
        if "b" in power.coeffs:
            out.line(f"{label}power exponent: {power.coeffs['b']:.6g}")
        if exps is not None:
            out.line(f"{label}exponents: polyfit={exps.polyfit_loglog:.6g} "
                     f"nls={_fmt(exps.nonlinear_ls)} local={exps.local_exponent:.6g}")
    payload = docs[0] if len(docs) == 1 else docs
    if args.out:
        Path(args.out).write_text(json.dumps(_clean(payload), indent=2) + "\n")
        out.line(f"wrote {args.out}")
    return {"fits": docs}


def _qubo_topology(args):
    if args.grid:
        return build_grid(*args.grid, diagonal=args.diagonal)
    if args.clique is not None:
        return build_clique(args.clique)
    return build_lollipop(*args.lollipop)


def cmd_qubo(args, out):
    topo = _qubo_topology(args)
    params = SchellingParams(args.agents_a, args.agents_b, Threshold(1, 2))
    problem, report = encode_qubo(topo, params, max_vertices=args.max_vertices)
    out.line(f"qubits: {report.num_qubits}")
    out.line(f"terms: {report.term_count}")
    out.line(f"encode time: {report.encode_wall_time:.6f}s")
    result = {"num_qubits": report.num_qubits, "term_count": report.term_count,
              "encode_wall_time": report.encode_wall_time, "penalty": problem.penalty}
    if args.out:
        Path(args.out).write_text(problem.to_json())
        out.line(f"wrote {args.out}")
    if args.brute_force:
        bits, energy = brute_force_minimize(problem)
        out.line(f"minimum: {bits} energy={energy}")
        result["minimum"] = {"bits": bits, "energy": energy}
    return result


def cmd_walks_hypercube(args, out):
    result = {"n": args.n}
    if args.exact:
        exact = hypercube_hitting_exact(args.n)
        result["exact"] = str(exact)
        result["exact_float"] = float(exact)
        out.line(f"exact: {exact}" + ("" if exact.denominator == 1 else f" ({float(exact):.6f})"))
    if args.trials:
        times = hypercube_hitting_times(args.n, args.trials, args.seed, args.max_steps)
        hit = times[times >= 0]
        if args.per_trial:
            for i, t in enumerate(times.tolist()):
                out.line(f"trial {i} steps={t if t >= 0 else 'capped'}")
        agg = {"trials": args.trials, "hit": int(hit.size),
               "mean": float(hit.mean()) if hit.size else None,
               "median": float(np.median(hit)) if hit.size else None,
               "stderr": float(hit.std(ddof=1) / math.sqrt(hit.size)) if hit.size > 1 else None}
        result["simulated"] = agg
        if args.per_trial:
            result["per_trial"] = times.tolist()
        out.line(f"simulated: mean={_fmt(agg['mean'])} stderr={_fmt(agg['stderr'])} "
                 f"median={_fmt(agg['median'])} hit={agg['hit']}/{agg['trials']}")
    return result


def welded_tree_trials(height: int, seeds, max_queries: int):
    """One fresh random weld and one walk per seed; returns per-trial dicts."""
    rows = []
    for i, seed in enumerate(seeds):
        tree_seed, walk_seed = np.random.SeedSequence(seed).spawn(2)
        tree, _ = build_welded_tree(height, tree_seed)
        res = welded_tree_classical_walk(tree, walk_seed, max_queries)
        rows.append({"trial": i, "seed": seed, "queries": res.steps_or_queries, "found": res.found})
    return rows


def cmd_walks_welded(args, out):
    seeds = derive_seeds(args.seed, args.trials)
    rows = welded_tree_trials(args.height, seeds, args.max_queries)
    for r in rows:
        out.line(f"trial {r['trial']} seed={r['seed']} queries={r['queries']} "
                 f"{'found' if r['found'] else 'capped'}")
    q = [r["queries"] for r in rows]
    expected = 1 + 2 * welded_tree_expected_steps(args.height)
    agg = {"trials": len(rows), "found": sum(r["found"] for r in rows),
           "median_queries": float(np.median(q)), "mean_queries": float(np.mean(q)),
           "expected_queries": expected}
    out.line(f"median queries: {agg['median_queries']:g} mean: {agg['mean_queries']:.2f} "
             f"expected: {expected:.2f} found: {agg['found']}/{agg['trials']}")
    return {"height": args.height, "trials": rows, "aggregate": agg}


def cmd_oracle(args, out):
    topo = _topology(args)
    params = _params(args, topo.vertex_count)
    res = exact_expected_moves(topo, params, exact=True if args.exact else None,
                               max_states=args.max_states)
    result = {"state_count": res.state_count, "unsatisfiable": res.unsatisfiable}
    if res.unsatisfiable:
        out.line("unsatisfiable")
        return result
    if math.isinf(res.mean):
        stuck = sum(math.isinf(v) for v in res.per_state.values())
        out.line(f"infinite: {stuck} of {res.state_count} start states never settle")
        result.update(mean=None, never_settle=stuck)
        return result
    result["mean"] = res.mean
    if res.mean_exact is not None:
        result["exact"] = str(res.mean_exact)
        out.line(f"exact: {res.mean_exact}")
    out.line(f"approx: {res.mean:.10g}")
    return result


# ---------------------------------------------------------------- plumbing

class Output:
    def __init__(self, as_json: bool, stream):
        self.as_json = as_json
        self.stream = stream
        self.config: dict = {}

    def line(self, text: str):
        if not self.as_json:
            print(text, file=self.stream)


def _clean(x):
    """Make a payload JSON-safe (Fractions to strings, non-finite floats to null)."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, Threshold):
        return str(x)
    if isinstance(x, float) and not math.isfinite(x):
        return None
    if isinstance(x, np.generic):
        return _clean(x.item())
    return x


def build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="emit one JSON document on stdout")
    common.add_argument("--config", metavar="FILE", help="JSON file whose keys mirror the flags")

    parser = argparse.ArgumentParser(prog="lollipop-schelling",
                                     description="Schelling segregation engines on lollipop networks")
    parser.add_argument("--version", action="version", version=version_string())
    sub = parser.add_subparsers(dest="command", required=True)
    leaves: dict[str, argparse.ArgumentParser] = {}

    p = sub.add_parser("simulate", parents=[common], help="run one engine for K trials")
    _add_topology_flags(p)
    p.add_argument("--engine", type=normalize_engine, default="traditional",
                   metavar="{traditional,count-first}")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-steps", type=int, default=10**7)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--skip-clique-internal", action="store_true")
    p.add_argument("--exact-bridge", action="store_true")
    p.add_argument("--trace", metavar="FILE")
    p.set_defaults(func=cmd_simulate)
    leaves["simulate"] = p

    p = sub.add_parser("bench", parents=[common], help="trial farm over sizes; writes results CSV")
    p.add_argument("--sizes", type=_int_list, required=True)
    p.add_argument("--trials", type=int, default=500)
    p.add_argument("--density", type=float, default=0.8)
    p.add_argument("--split", type=float, default=0.5)
    p.add_argument("--clique-frac", type=float, default=0.1)
    p.add_argument("--tau", type=_tau, default=Threshold(1, 2), metavar="P/Q")
    p.add_argument("--engines", type=_engine_list, default=["traditional", "count_first"])
    p.add_argument("--master-seed", type=int, default=0)
    p.add_argument("--max-steps", type=int, default=10**8)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True)
    p.add_argument("--plot-dir", help="write two-column size/mean-runtime files per engine here")
    p.set_defaults(func=cmd_bench)
    leaves["bench"] = p

    p = sub.add_parser("fit", parents=[common], help="six-model regression and exponent estimates")
    p.add_argument("--input", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_fit)
    leaves["fit"] = p

    p = sub.add_parser("qubo", parents=[common], help="encode a placement problem as a QUBO")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--grid", type=_grid, metavar="RxC")
    g.add_argument("--clique", type=int, metavar="K")
    g.add_argument("--lollipop", type=_int_list, metavar="K,L")
    p.add_argument("--diagonal", action="store_true", help="8-neighborhood grid")
    p.add_argument("--agents-a", type=int, required=True)
    p.add_argument("--agents-b", type=int, required=True)
    p.add_argument("--out")
    p.add_argument("--brute-force", action="store_true")
    p.add_argument("--max-vertices", type=int, default=MAX_ENCODE_VERTICES)
    p.set_defaults(func=cmd_qubo)
    leaves["qubo"] = p

    walks = sub.add_parser("walks", help="random-walk contrast cases")
    wsub = walks.add_subparsers(dest="walk", required=True)
    p = wsub.add_parser("hypercube", parents=[common])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--trials", type=int, default=0)
    p.add_argument("--exact", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-steps", type=int, default=10**9)
    p.add_argument("--per-trial", action="store_true")
    p.set_defaults(func=cmd_walks_hypercube)
    leaves["walks hypercube"] = p
    p = wsub.add_parser("welded-tree", parents=[common])
    p.add_argument("--height", type=int, required=True)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--max-queries", type=int, default=10**7)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_walks_welded)
    leaves["walks welded-tree"] = p

    p = sub.add_parser("oracle", parents=[common], help="exact expected moves on a tiny instance")
    _add_topology_flags(p)
    p.add_argument("--exact", action="store_true", help="force rational arithmetic")
    p.add_argument("--max-states", type=int, default=DEFAULT_MAX_STATES)
    p.set_defaults(func=cmd_oracle)
    leaves["oracle"] = p
    return parser, leaves


_FLAG_TYPES = {"tau": _tau, "grid": _grid, "sizes": _int_list, "engines": _engine_list,
               "lollipop": _int_list, "engine": normalize_engine}


def _apply_config(argv, parser, leaves):
    """Re-parse with defaults taken from ``--config`` so explicit flags still win."""
    tokens = list(sys.argv[1:] if argv is None else argv)
    if not any(t == "--config" or t.startswith("--config=") for t in tokens):
        return parser.parse_args(tokens)
    # first pass only locates the subcommand and the config file
    required = [a for leaf in leaves.values() for a in leaf._actions if a.required]
    groups = [g for leaf in leaves.values() for g in leaf._mutually_exclusive_groups if g.required]
    for item in required + groups:
        item.required = False
    args = parser.parse_args(tokens)
    for item in required + groups:
        item.required = True
    try:
        doc = json.loads(Path(args.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        parser.error(f"cannot read config {args.config}: {exc}")
    if not isinstance(doc, dict):
        parser.error("config file must hold a JSON object")
    key = args.command if args.command != "walks" else f"walks {args.walk}"
    leaf = leaves[key]
    known = {a.dest for a in leaf._actions}
    defaults = {}
    for k, v in doc.items():
        dest = k.lstrip("-").replace("-", "_")
        if dest not in known:
            parser.error(f"unknown config key {k!r}")
        if dest in _FLAG_TYPES and isinstance(v, str):
            v = _FLAG_TYPES[dest](v)
        elif dest in _FLAG_TYPES and isinstance(v, list) and dest in ("sizes", "lollipop"):
            v = [int(x) for x in v]
        defaults[dest] = v
    leaf.set_defaults(**defaults)
    # required flags supplied by the config are no longer required on the command line
    for action in leaf._actions:
        if action.dest in defaults:
            action.required = False
    for group in leaf._mutually_exclusive_groups:
        if any(a.dest in defaults for a in group._group_actions):
            group.required = False
    return parser.parse_args(tokens)


def _resolved_config(args) -> dict:
    skip = {"func", "json", "config"}
    cfg = {k: v for k, v in vars(args).items() if k not in skip}
    if args.command == "simulate" or getattr(args, "walk", None) == "welded-tree":
        cfg["trial_seeds"] = derive_seeds(args.seed, max(0, args.trials))
    if args.command == "bench":
        cfg["seed_scheme"] = "SeedSequence(master_seed, spawn_key=(engine_index, size, trial))"
    return _clean(cfg)


def main(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    parser, leaves = build_parser()
    try:
        args = _apply_config(argv, parser, leaves)
    except SystemExit as exc:  # argparse usage errors, --help and --version
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    out = Output(args.json, stdout)
    out.config = _resolved_config(args)
    command = args.command if args.command != "walks" else f"walks {args.walk}"
    if not args.json:
        out.line(f"config: {json.dumps(out.config, sort_keys=True)}")
    try:
        result = args.func(args, out)
    except ResourceCapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.json:
        doc = {"command": command, "version": version_string(), "config": out.config,
               "result": result}
        print(json.dumps(_clean(doc), indent=2), file=stdout)
    return EXIT_OK


def load_schema(command: str) -> dict:
    name = command.replace(" ", "_").replace("-", "_") + ".schema.json"
    return json.loads(resources.files(__package__).joinpath("schemas", name).read_text())


def main_exit() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_exit()
