"""``risbeam`` command line.

Exit codes: 0 success, 2 configuration error, 3 oracle or transport failure,
4 a ``--check`` threshold was missed.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from importlib.resources import files
from pathlib import Path

from . import __version__
from .channel import OracleError, Scenario, ScenarioError, SimulatedOracle, load_scenario
from .codebook import AngleGrid, CodebookFormatError
from .geometry import PhaseStateSet
from .harness import (
    AlgorithmSpec,
    ConfigError,
    algorithm_from_dict,
    compare_algorithms,
    geometry_from_dict,
    grid_from_dict,
    load_json,
    run_algorithm,
    run_pattern,
)
from .harness import run_scenario as run_sweep

log = logging.getLogger("risbeam")

EXIT_OK, EXIT_CONFIG, EXIT_ORACLE, EXIT_CHECK = 0, 2, 3, 4


def _shipped(kind: str, ref: str) -> Path:
    """A file path as given, or a shipped data file when ``ref`` is a bare name."""
    p = Path(ref)
    if p.suffix or p.exists():
        return p
    shipped = files("risbeam").joinpath(kind, f"{ref}.json")
    if not shipped.is_file():
        raise ConfigError(kind, f"no such file or shipped {kind[:-1]}: {ref}")
    return Path(str(shipped))


def _scenario(ref: str) -> Scenario:
    path = _shipped("scenarios", ref)
    if not path.exists():
        raise ConfigError("scenario", f"file not found: {path}")
    return load_scenario(path)


def _seed(args, scenario: Scenario | None = None) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("RISBEAM_SEED")
    if env is not None:
        if not env.isdigit():
            raise ConfigError("RISBEAM_SEED", "must be a non-negative integer")
        return int(env)
    return scenario.rng_seed if scenario is not None else 0


def _grid(ref: str | None) -> AngleGrid:
    if ref is None:
        return AngleGrid.default()
    return grid_from_dict(load_json(_shipped("grids", ref), "grid"))


def _angles(text: str) -> list[float]:
    try:
        vals = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise ConfigError("angles", f"expected comma-separated degrees, got {text!r}") from None
    if not vals:
        raise ConfigError("angles", "no angles given")
    return vals


def _states(name: str | None, scenario: Scenario | None = None) -> PhaseStateSet | None:
    if name is None:
        return scenario.ris.phase_states if scenario is not None else None
    return {"continuous": PhaseStateSet.continuous, "1bit": PhaseStateSet.one_bit}[name]()


# --- subcommands ------------------------------------------------------------------

def cmd_pattern(args) -> int:
    geom = geometry_from_dict(load_json(_shipped("geometries", args.geom), "geom"))
    commands = _angles(args.angles)
    run = run_pattern(geom, commands, args.out, element_factor=not args.no_element_factor,
                      quantize=_states(args.states))
    sys.stdout.write(run.metrics_csv())
    summary = run.summary()
    print(json.dumps(summary, indent=2))
    if args.check:
        failures = []
        for c in commands:
            m = run.metrics[c]
            if m is None or abs(m.peak_angle_deg - c) > 0.5:
                failures.append(f"peak for {c:g} deg off by more than 0.5 deg")
        if summary["peak_fluctuation_db"] is None or summary["peak_fluctuation_db"] > 3.0:
            failures.append(f"peak fluctuation {summary['peak_fluctuation_db']} dB exceeds 3 dB")
        return _report_check(failures)
    return EXIT_OK


def cmd_search(args) -> int:
    scenario = _scenario(args.scenario)
    seed = _seed(args, scenario)
    states = _states(args.states, scenario)
    spec = AlgorithmSpec(args.algo, args.states or "scenario", _grid(args.grid), sweeps=args.sweeps,
                         group=args.group, repeats=args.repeats)
    if args.remote:
        from .protocol import RemoteOracle
        oracle = RemoteOracle(args.remote, timeout=args.timeout,
                              states=states if states.is_discrete else PhaseStateSet.one_bit())
        if args.seed is not None or "RISBEAM_SEED" in os.environ:
            oracle.reset(seed)
    else:
        oracle = SimulatedOracle(scenario, seed)
    try:
        result = run_algorithm(spec, scenario, oracle)
    finally:
        if args.remote:
            oracle.close()
    meta = {"scenario": scenario.name, "algorithm": spec.describe(), "seed": seed, "version": __version__,
            "best_power_dbm": round(result.best_power_dbm, 4), "queries": result.query_count}
    if result.selected_angles is not None:
        meta["selected_deg"] = [None if a is None else round(math.degrees(a), 6) for a in result.selected_angles]
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "trace.csv").write_text(result.trace_csv(), newline="\n")
        (out / "search.json").write_text(json.dumps(meta, indent=2) + "\n", newline="\n")
    print(json.dumps(meta, indent=2))
    return EXIT_OK


def _sweep_doc(ref: str) -> dict:
    doc = load_json(_shipped("sweeps", ref), "sweep")
    if not isinstance(doc, dict):
        raise ConfigError("sweep", "expected an object")
    return doc


def cmd_scenario(args) -> int:
    scenario = _scenario(args.file)
    sweep = _sweep_doc(args.sweep)
    algo_doc = dict(sweep.get("algorithm", {}))
    if args.algo:
        algo_doc["name"] = args.algo
    if args.states:
        algo_doc["states"] = args.states
    spec = algorithm_from_dict(algo_doc)
    report = run_sweep(scenario, spec, sweep, _seed(args, scenario))
    csv_path, json_path = report.write(args.out, args.stem)
    print(f"{len(report.records)} records -> {csv_path}, {json_path}")
    print(json.dumps(report.summary(), indent=2))
    if args.min_gain is not None:
        low = [r for r in report.records if r.gain_db < args.min_gain]
        return _report_check([f"record {r.index} ({r.label}) gain {r.gain_db:.2f} dB < {args.min_gain:g} dB"
                              for r in low])
    return EXIT_OK


def cmd_compare(args) -> int:
    scenario = _scenario(args.scenario)
    sweep = _sweep_doc(args.sweep) if args.sweep else None
    seeds = [int(s) for s in args.seeds.split(",")] if args.seeds else [_seed(args, scenario)]
    cmp = compare_algorithms(scenario, _grid(args.grid), seeds, sweep, states=args.states or "scenario")
    sys.stdout.write(cmp.to_csv())
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "compare.csv").write_text(cmp.to_csv(), newline="\n")
        meta = {"scenario": scenario.name, "seeds": seeds, "version": __version__,
                "rows": [{"algorithm": r.algorithm, "mean_gain_db": round(r.mean_gain_db, 4),
                          "queries_per_point": r.queries_per_point} for r in cmp.rows]}
        (out / "compare.json").write_text(json.dumps(meta, indent=2) + "\n", newline="\n")
    if args.check:
        a2, dft, ts = cmp.row("angle2d"), cmp.row("dft"), cmp.row("two-step")
        failures = []
        if a2.mean_gain_db < dft.mean_gain_db:
            failures.append(f"angle2d {a2.mean_gain_db:.2f} dB below DFT {dft.mean_gain_db:.2f} dB")
        if abs(a2.mean_gain_db - ts.mean_gain_db) > 0.5:
            failures.append(f"two-step {ts.mean_gain_db:.2f} dB not within 0.5 dB of angle2d {a2.mean_gain_db:.2f} dB")
        return _report_check(failures)
    return EXIT_OK


def cmd_serve(args) -> int:
    from .protocol import RisServer
    scenario = _scenario(args.scenario)
    server = RisServer(scenario, args.listen, _seed(args, scenario))
    print(f"serving {scenario.name} on {server.endpoint}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return EXIT_OK


def _report_check(failures: list[str]) -> int:
    for f in failures:
        print(f"CHECK FAILED: {f}", file=sys.stderr)
    return EXIT_CHECK if failures else EXIT_OK


# --- parser -------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="risbeam", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"risbeam {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def seeded(sp):
        sp.add_argument("--seed", type=int, default=None, help="RNG seed (default: $RISBEAM_SEED, then the scenario's)")

    sp = sub.add_parser("pattern", help="azimuth cuts and metrics for steered codewords")
    sp.add_argument("--geom", required=True, help="geometry JSON file or shipped name")
    sp.add_argument("--angles", default="0,10,20,30,40,50,60", help="commanded azimuths in degrees")
    sp.add_argument("--out", default=None, help="directory for per-angle CSVs and metrics")
    sp.add_argument("--no-element-factor", action="store_true")
    sp.add_argument("--states", choices=("continuous", "1bit"), default=None)
    sp.add_argument("--check", action="store_true", help="exit 4 unless peaks track commands and stay flat")
    sp.set_defaults(func=cmd_pattern)

    sp = sub.add_parser("search", help="run one beam search against a scenario or a remote oracle")
    sp.add_argument("--scenario", required=True)
    sp.add_argument("--algo", choices=("exhaustive", "two-step", "greedy", "dft", "optimal"), default="two-step")
    sp.add_argument("--grid", default=None, help="angle grid JSON file or shipped name")
    sp.add_argument("--states", choices=("continuous", "1bit"), default=None)
    sp.add_argument("--sweeps", type=int, default=2)
    sp.add_argument("--group", choices=("column", "element"), default="column")
    sp.add_argument("--repeats", type=int, default=1)
    sp.add_argument("--remote", default=None, help="host:port of a running 'risbeam serve'")
    sp.add_argument("--timeout", type=float, default=5.0)
    sp.add_argument("--out", default=None)
    seeded(sp)
    sp.set_defaults(func=cmd_search)

    sp = sub.add_parser("scenario", help="replicate an experiment over a sweep of receiver positions")
    sp.add_argument("--file", required=True, help="scenario JSON file or shipped name")
    sp.add_argument("--sweep", required=True, help="sweep JSON file or shipped name")
    sp.add_argument("--out", required=True)
    sp.add_argument("--algo", default=None, help="override the sweep's algorithm name")
    sp.add_argument("--states", choices=("scenario", "continuous", "1bit"), default=None)
    sp.add_argument("--stem", default="report")
    sp.add_argument("--min-gain", type=float, default=None, help="exit 4 if any record's gain is below this")
    seeded(sp)
    sp.set_defaults(func=cmd_scenario)

    sp = sub.add_parser("compare", help="DFT vs angle-grid exhaustive vs two-step over an RX arc")
    sp.add_argument("--scenario", required=True)
    sp.add_argument("--grid", default=None)
    sp.add_argument("--sweep", default=None, help="RX positions (default: 30-60 deg arc at the scenario's RX range)")
    sp.add_argument("--seeds", default=None, help="comma-separated seeds")
    sp.add_argument("--states", choices=("scenario", "continuous", "1bit"), default=None)
    sp.add_argument("--out", default=None)
    sp.add_argument("--check", action="store_true")
    seeded(sp)
    sp.set_defaults(func=cmd_compare)

    sp = sub.add_parser("serve", help="expose a scenario's power oracle over the line protocol")
    sp.add_argument("--scenario", required=True)
    sp.add_argument("--listen", default="127.0.0.1:7878")
    seeded(sp)
    sp.set_defaults(func=cmd_serve)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigError, ScenarioError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CodebookFormatError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OracleError as exc:
        print(f"oracle error: {exc}", file=sys.stderr)
        return EXIT_ORACLE
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
