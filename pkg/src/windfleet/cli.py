"""Command-line interface.

Subcommands:
    simulate      one scenario file, full trace/event output
    batch         seeded batch statistics for one policy
    compare       division stack vs greedy baseline on shared seeds
    scenario gen  write a random scenario file
    bench         time the compiled kernels against the pure fallback

Exit status is nonzero when a plan record violates its validity invariants.
"""

import argparse
import sys
from dataclasses import replace

from . import _kernels
from .errors import WindfleetError
from .harness import (
    AREA_PRESETS,
    WIND_PRESETS,
    ExperimentConfig,
    batch_csv,
    compare_policies,
    events_csv,
    generate_scenario,
    run_batch,
    trace_csv,
)
from .mission import Mission, MissionConfig
from .scenario import Scenario


def _add_experiment_args(p: argparse.ArgumentParser):
    p.add_argument("--area", default="52x30", help="WxH meters or preset small/medium/large")
    p.add_argument("--nodes", type=int, default=30)
    p.add_argument("--uavs", type=int, default=4)
    p.add_argument("--obstacles", type=int, default=0)
    p.add_argument("--wind", default="low", help="low (2 m/s), high (8 m/s), none, or a number")
    p.add_argument("--nd", default="10", help="node-redivision period in seconds, or 'off'")
    p.add_argument("--op", default="on", choices=["on", "off"], help="online replanning")
    p.add_argument("--runs", type=int, default=20)
    p.add_argument("--seed", type=int, default=1)


def _parse_area(text):
    if text in AREA_PRESETS:
        return AREA_PRESETS[text]
    w, h = text.lower().split("x")
    return float(w), float(h)


def _experiment_config(args) -> ExperimentConfig:
    width, height = _parse_area(args.area)
    wind = WIND_PRESETS.get(args.wind, None)
    if wind is None:
        wind = float(args.wind)
    nd = None if args.nd == "off" else float(args.nd)
    return ExperimentConfig(
        width_m=width,
        height_m=height,
        n_nodes=args.nodes,
        n_uavs=args.uavs,
        n_obstacles=args.obstacles,
        wind_speed=wind,
        nd_period_s=nd,
        op_enabled=args.op == "on",
        runs=args.runs,
        seed=args.seed,
    )


def _write(path, text):
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_simulate(args) -> int:
    scenario = Scenario.load(args.scenario)
    cfg = MissionConfig()
    if args.nd is not None:
        cfg = replace(cfg, nd_period_s=None if args.nd == "off" else float(args.nd))
    if args.op is not None:
        cfg = replace(cfg, op_enabled=args.op == "on")
    mission = Mission(scenario, cfg, policy=args.policy, collect_trace=bool(args.trace))
    result = mission.run()
    print(
        f"policy={args.policy} total_energy={result.total_energy:.1f} J "
        f"sim_time={result.sim_time_s:.1f} s visits={len(result.record.visits)}"
    )
    if args.trace:
        _write(args.trace, trace_csv(result, cfg.t_s))
    if args.events:
        _write(args.events, events_csv(result, cfg.t_s))
    try:
        result.record.validate(set(scenario.grid.nodes))
    except WindfleetError as exc:
        print(f"plan validity violated: {exc}", file=sys.stderr)
        return 1
    return 0


def cmd_batch(args) -> int:
    cfg = _experiment_config(args)
    result = run_batch(cfg, policy=args.policy)
    print(result.summary())
    if args.out:
        _write(args.out, batch_csv([result]))
    return 1 if result.failures else 0


def cmd_compare(args) -> int:
    cfg = _experiment_config(args)
    result = compare_policies(cfg)
    print(result.summary())
    if args.out:
        _write(args.out, batch_csv([result.division, result.greedy]))
    return 1 if result.division.failures or result.greedy.failures else 0


def cmd_scenario_gen(args) -> int:
    cfg = _experiment_config(args)
    scenario = generate_scenario(cfg, args.seed)
    scenario.save(args.out)
    print(f"wrote {args.out}")
    return 0


def cmd_bench(args) -> int:
    from benchmarks import bench_kernels  # pragma: no cover - thin wrapper

    bench_kernels.main()
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="windfleet", description=__doc__)
    parser.add_argument(
        "--backend-info", action="store_true", help="print the kernel backend and exit"
    )
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("simulate", help="run one scenario file")
    p.add_argument("scenario")
    p.add_argument("--policy", default="division", choices=["division", "greedy"])
    p.add_argument("--nd", default=None, help="override redivision period (seconds or 'off')")
    p.add_argument("--op", default=None, choices=["on", "off"])
    p.add_argument("--trace", default=None, help="write per-tick CSV here")
    p.add_argument("--events", default=None, help="write event-log CSV here")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("batch", help="seeded batch for one policy")
    _add_experiment_args(p)
    p.add_argument("--policy", default="division", choices=["division", "greedy"])
    p.add_argument("--out", default=None, help="write per-run CSV here")
    p.set_defaults(func=cmd_batch)

    p = sub.add_parser("compare", help="division stack vs greedy baseline")
    _add_experiment_args(p)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_compare)

    p_scn = sub.add_parser("scenario", help="scenario file tools")
    sub_scn = p_scn.add_subparsers(dest="scenario_command", required=True)
    p = sub_scn.add_parser("gen", help="generate a random scenario file")
    _add_experiment_args(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_scenario_gen)

    p = sub.add_parser("bench", help="kernel benchmark (compiled vs pure)")
    p.set_defaults(func=cmd_bench)

    args = parser.parse_args(argv)
    if args.backend_info:
        print(f"kernel backend: {_kernels.BACKEND}")
        return 0
    if not getattr(args, "func", None):
        parser.print_help()
        return 2
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
