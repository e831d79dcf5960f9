"""Command line entry points.

Subcommands:
    run         full evaluation suite from a run config file
    build-tree  plan corpus -> serialized vote tree
    execute     tree + scene -> execution trace
    metrics     recompute the summary table from persisted artifacts
    diff        side-by-side comparison of two trace files
    record      drive the configured provider to populate replay fixtures
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import VoteTreeError
from .executor import ExecutionMode, ExecutionTrace, StepRecord, execute_tree, serialize_trace
from .harness import (
    RunConfig,
    load_dataset,
    plan_diff_report,
    recompute_metrics,
    record_suite,
    run_suite,
)
from .metrics import format_table
from .plans import Command, parse_plan_text, split_corpus
from .tree import SelectionStrategy, build_vote_tree, render_outline, tree_from_dict, tree_to_dict
from .world import ActionCatalog, World, WorldState, load_scene


def _cmd_run(args: argparse.Namespace) -> int:
    config = RunConfig.from_file(args.config)
    if args.master_seed is not None:
        config.master_seed = args.master_seed
    if args.output_dir:
        config.output_dir = args.output_dir
    result = run_suite(config)
    sys.stdout.write(format_table([result.row]))
    if result.output_dir:
        print(f"artifacts written to {result.output_dir}")
    return 0


def _cmd_build_tree(args: argparse.Namespace) -> int:
    text = Path(args.corpus).read_text(encoding="utf-8")
    plans = []
    for k, body in enumerate(split_corpus(text)):
        plan, _ = parse_plan_text(body, provenance="generated", sample_index=k)
        if plan.commands:
            plans.append(plan)
    root = build_vote_tree(plans)
    doc = json.dumps(tree_to_dict(root), indent=2, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(doc, encoding="utf-8")
        print(f"tree with {len(plans)} plans written to {args.out}")
    else:
        sys.stdout.write(doc)
    if args.outline:
        print(render_outline(root))
    return 0


def _load_trace(path: str) -> ExecutionTrace:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    steps = tuple(
        StepRecord(
            index=s["idx"],
            command=Command.parse(s["command"]),
            ok=s["outcome"] == "success",
            reason=s.get("reason"),
            node_path=(),
        )
        for s in doc["steps"]
    )
    return ExecutionTrace(steps=steps, final_state=WorldState(), termination=doc.get("termination", "completed"))


def _cmd_execute(args: argparse.Namespace) -> int:
    root = tree_from_dict(json.loads(Path(args.tree).read_text(encoding="utf-8")))
    scene = load_scene(args.scene)
    catalog = ActionCatalog.from_file(args.actions) if args.actions else load_dataset().catalog
    world = World(catalog, scene.objects)
    mode = ExecutionMode(
        kind=args.mode,
        selection=SelectionStrategy(kind=args.selection, rng_seed=args.seed),
    )
    trace = execute_tree(root, world.execute, scene.initial_state, mode, args.step_limit)
    doc = {"termination": trace.termination, "steps": serialize_trace(trace)}
    out = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(out, encoding="utf-8")
    else:
        sys.stdout.write(out)
    return 0


def _cmd_metrics(args: argparse.Namespace) -> int:
    row = recompute_metrics(args.results)
    sys.stdout.write(format_table([row]))
    return 0


def _cmd_diff(args: argparse.Namespace) -> int:
    trace_a = _load_trace(args.trace_a)
    trace_b = _load_trace(args.trace_b)
    report = plan_diff_report(trace_a, trace_b, labels=(args.label_a, args.label_b))
    sys.stdout.write(report.render())
    return 0


def _cmd_record(args: argparse.Namespace) -> int:
    config = RunConfig.from_file(args.config)
    if args.master_seed is not None:
        config.master_seed = args.master_seed
    written = record_suite(config)
    print(f"recorded {len(written)} fixture stage(s) under {config.fixtures_dir}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="votetree", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run the full evaluation suite")
    p.add_argument("--config", required=True)
    p.add_argument("--master-seed", type=int, default=None)
    p.add_argument("--output-dir", default=None)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("build-tree", help="aggregate a plan corpus into a vote tree")
    p.add_argument("--corpus", required=True, help="plan file or multi-plan document")
    p.add_argument("--out", default=None)
    p.add_argument("--outline", action="store_true", help="also print an indented outline")
    p.set_defaults(func=_cmd_build_tree)

    p = sub.add_parser("execute", help="execute a serialized tree against a scene")
    p.add_argument("--tree", required=True)
    p.add_argument("--scene", required=True)
    p.add_argument("--actions", default=None, help="action catalog (default: bundled)")
    p.add_argument("--mode", default="with_correction",
                   choices=["with_correction", "no_correction"])
    p.add_argument("--selection", default="max_vote", choices=["max_vote", "random"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--step-limit", type=int, default=50)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_execute)

    p = sub.add_parser("metrics", help="recompute the summary from artifacts")
    p.add_argument("--results", required=True, help="results directory with metrics.jsonl")
    p.set_defaults(func=_cmd_metrics)

    p = sub.add_parser("diff", help="compare two execution traces")
    p.add_argument("--trace-a", required=True)
    p.add_argument("--trace-b", required=True)
    p.add_argument("--label-a", default="a")
    p.add_argument("--label-b", default="b")
    p.set_defaults(func=_cmd_diff)

    p = sub.add_parser("record", help="populate replay fixtures from a provider")
    p.add_argument("--config", required=True)
    p.add_argument("--master-seed", type=int, default=None)
    p.set_defaults(func=_cmd_record)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except VoteTreeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
