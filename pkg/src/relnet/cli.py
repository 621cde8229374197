"""Command-line entry points.

Subcommands:
  gen      generate a graph and write it as an edge list
  metrics  print structural metrics for an edge-list file
  import   load a connectome edge list (optionally sample / ER-match)
  train    train a single model on one graph
  sweep    run a parameter sweep from a JSON spec into a CSV
  report   aggregate a sweep CSV and fit error against one parameter
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import asdict

from .connectome import ConnectomeSource, import_connectome, matched_er, sample_subgraph
from .errors import RelnetError
from .generators import FAMILIES, GeneratorSpec, generate_with_info
from .graphs import compute_metrics, read_edge_list, write_edge_list
from .model import init_model, save_checkpoint
from .seeding import child_seed
from .sweep import (
    SweepSpec,
    aggregate,
    build_dataset,
    correlation_report,
    existing_keys,
    read_records_csv,
    run_sweep,
    write_aggregate_csv,
    write_records_csv,
)
from .training import SCHEDULES, PRECISIONS, TrainConfig, train

_GRAPH_STREAM = 101
_MODEL_STREAM = 102
_SHUFFLE_STREAM = 103


def _add_generator_flags(parser: argparse.ArgumentParser, require_family: bool) -> None:
    parser.add_argument("--family", choices=FAMILIES, required=require_family)
    parser.add_argument("--n", type=int, default=128)
    parser.add_argument("--p", type=float, default=None)
    parser.add_argument("--gamma", type=float, default=None)
    parser.add_argument("--m", type=float, default=None)
    parser.add_argument("--communities", type=int, default=None)
    parser.add_argument("--mu", type=float, default=None)
    parser.add_argument("--base", choices=("er", "static_sf"), default=None)


def _generator_spec(args, seed: int) -> GeneratorSpec:
    return GeneratorSpec(
        family=args.family,
        n=args.n,
        p=args.p,
        gamma=args.gamma,
        m=args.m,
        communities=args.communities,
        mu=args.mu,
        base=args.base,
        seed=seed,
    )


def _metrics_dict(graph) -> dict:
    metrics = compute_metrics(graph)
    out = asdict(metrics)
    out["nodes"] = graph.node_count
    out["edges"] = len(graph.edges)
    return out


def _cmd_gen(args) -> int:
    spec = _generator_spec(args, args.seed)
    graph, info = generate_with_info(spec)
    write_edge_list(graph, args.out)
    summary = _metrics_dict(graph)
    summary["bridges"] = info.bridge_edges
    summary["community_sizes"] = list(info.community_sizes)
    print(json.dumps(summary))
    return 0


def _cmd_metrics(args) -> int:
    graph = read_edge_list(args.edges)
    print(json.dumps(_metrics_dict(graph)))
    return 0


def _cmd_import(args) -> int:
    source = ConnectomeSource(args.edges, declared_nodes=args.expect_nodes)
    graph = import_connectome(source)
    if args.sample is not None:
        graph = sample_subgraph(graph, args.sample, args.seed)
    if args.matched_er:
        graph = matched_er(graph, args.seed)
    write_edge_list(graph, args.out)
    print(json.dumps(_metrics_dict(graph)))
    return 0


def _cmd_train(args) -> int:
    if (args.edges is None) == (args.family is None):
        raise ValueError("train needs exactly one of --edges or --family")
    config = TrainConfig(
        epochs=args.epochs,
        batch_size=args.batch_size,
        learning_rate=args.lr,
        momentum=args.momentum,
        weight_decay=args.weight_decay,
        lr_schedule=args.schedule,
        seed=child_seed(args.seed, _SHUFFLE_STREAM),
        precision=args.precision,
    )
    dspec = {"kind": args.dataset}
    if args.dataset == "cifar10":
        if args.data_dir is None:
            raise ValueError("--dataset cifar10 requires --data-dir")
        dspec["dir"] = args.data_dir
    else:
        dspec.update(
            classes=args.blob_classes,
            dim=args.blob_dim,
            n_per_class=args.blob_per_class,
        )
    train_ds, test_ds = build_dataset(dspec, dtype=config.dtype)

    if args.edges is not None:
        graph = read_edge_list(args.edges)
    else:
        graph = generate_with_info(
            _generator_spec(args, child_seed(args.seed, _GRAPH_STREAM))
        )[0]

    model = init_model(
        graph,
        width=args.width,
        rounds=args.rounds,
        in_dim=train_ds.dim,
        out_dim=train_ds.n_classes,
        seed=child_seed(args.seed, _MODEL_STREAM),
        dtype=config.dtype,
        use_bias=not args.no_bias,
    )
    tic = time.perf_counter()
    result, log = train(model, train_ds, test_ds, config)
    wall_ms = (time.perf_counter() - tic) * 1000.0

    if args.log is not None:
        with open(args.log, "w") as fh:
            for entry in log:
                fh.write(json.dumps(entry) + "\n")
    if args.ckpt_out is not None:
        save_checkpoint(model, args.ckpt_out)
    print(
        json.dumps(
            {
                "top1_error": result.top1_error_percent,
                "loss": result.loss,
                "n_examples": result.n_examples,
                "nodes": graph.node_count,
                "edges": len(graph.edges),
                "wall_ms": wall_ms,
            }
        )
    )
    return 0


def _cmd_sweep(args) -> int:
    spec = SweepSpec.from_json(args.spec)
    skip = existing_keys(args.out) if args.resume else set()
    if not args.resume:
        write_records_csv([], args.out)  # fresh header

    done = {"ok": 0, "failed": 0}

    def progress(record):
        write_records_csv([record], args.out, append=True)
        if record.status == "ok":
            done["ok"] += 1
        else:
            done["failed"] += 1

    run_sweep(spec, workers=args.workers, skip_keys=skip, progress=progress)
    print(
        json.dumps(
            {"ok": done["ok"], "failed": done["failed"], "skipped": len(skip)}
        )
    )
    return 0


def _cmd_report(args) -> int:
    records = read_records_csv(args.csv)
    rows = aggregate(records)
    if args.aggregate_out is not None:
        write_aggregate_csv(rows, args.aggregate_out)
    report = correlation_report(records, x_field=args.x)
    print(
        json.dumps(
            {
                "x_field": report.x_field,
                "coefficients": list(report.coefficients),
                "points": [list(p) for p in report.points],
                "cells": len(rows),
            }
        )
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="relnet")
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("gen", help="generate a graph edge list")
    _add_generator_flags(p_gen, require_family=True)
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--out", required=True)
    p_gen.set_defaults(func=_cmd_gen)

    p_metrics = sub.add_parser("metrics", help="print metrics for an edge list")
    p_metrics.add_argument("--edges", required=True)
    p_metrics.set_defaults(func=_cmd_metrics)

    p_import = sub.add_parser("import", help="import a connectome edge list")
    p_import.add_argument("--edges", required=True)
    p_import.add_argument("--expect-nodes", type=int, default=None)
    p_import.add_argument("--sample", type=int, default=None)
    p_import.add_argument("--seed", type=int, default=0)
    p_import.add_argument("--matched-er", action="store_true")
    p_import.add_argument("--out", required=True)
    p_import.set_defaults(func=_cmd_import)

    p_train = sub.add_parser("train", help="train one model on one graph")
    p_train.add_argument("--edges", default=None)
    _add_generator_flags(p_train, require_family=False)
    p_train.add_argument("--width", type=int, default=512)
    p_train.add_argument("--rounds", type=int, default=5)
    p_train.add_argument("--no-bias", action="store_true")
    p_train.add_argument("--dataset", choices=("blobs", "cifar10"), default="blobs")
    p_train.add_argument("--data-dir", default=None)
    p_train.add_argument("--blob-classes", type=int, default=10)
    p_train.add_argument("--blob-dim", type=int, default=48)
    p_train.add_argument("--blob-per-class", type=int, default=500)
    p_train.add_argument("--epochs", type=int, default=200)
    p_train.add_argument("--batch-size", type=int, default=128)
    p_train.add_argument("--lr", type=float, default=0.1)
    p_train.add_argument("--momentum", type=float, default=0.9)
    p_train.add_argument("--weight-decay", type=float, default=5e-4)
    p_train.add_argument("--schedule", choices=SCHEDULES, default="cosine")
    p_train.add_argument("--precision", choices=PRECISIONS, default="single")
    p_train.add_argument("--seed", type=int, default=0)
    p_train.add_argument("--log", default=None, help="JSONL per-epoch log path")
    p_train.add_argument("--ckpt-out", default=None)
    p_train.set_defaults(func=_cmd_train)

    p_sweep = sub.add_parser("sweep", help="run a sweep spec into a CSV")
    p_sweep.add_argument("--spec", required=True)
    p_sweep.add_argument("--out", required=True)
    p_sweep.add_argument("--workers", type=int, default=1)
    p_sweep.add_argument("--resume", action="store_true")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_report = sub.add_parser("report", help="aggregate a sweep CSV")
    p_report.add_argument("--csv", required=True)
    p_report.add_argument("--x", default="mu")
    p_report.add_argument("--aggregate-out", default=None)
    p_report.set_defaults(func=_cmd_report)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (RelnetError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
