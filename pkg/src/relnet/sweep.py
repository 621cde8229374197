"""Experiment sweeps: build graphs over a parameter grid, train over seeds,
and emit analysis-ready CSV.

A sweep spec (JSON) names a base family, up to two swept parameter axes, a
list of community counts, and the seed list; every cell of the Cartesian
product (axis1 x axis2 x communities x seeds) trains one model. Cell
failures become error rows, never aborts, so long sweeps stay resumable.
"""

from __future__ import annotations

import csv
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace

import numpy as np

from .datasets import Dataset, load_cifar10, synthetic_blobs
from .errors import FitError, RelnetError
from .generators import GeneratorSpec, generate_with_info
from .graphs import compute_metrics
from .model import init_model
from .seeding import child_seed
from .training import TrainConfig, train

AXIS_NAMES = ("p", "gamma", "m", "mu")
SWEEP_FAMILIES = ("er", "static_sf")

# Per-run child streams: one run seed fans out into independent graph,
# model-init, and shuffle seeds.
_GRAPH_STREAM = 101
_MODEL_STREAM = 102
_SHUFFLE_STREAM = 103

CSV_HEADER = [
    "family",
    "communities",
    "p",
    "gamma",
    "m",
    "mu",
    "width",
    "rounds",
    "seed",
    "status",
    "nodes_realized",
    "bridges",
    "mean_degree",
    "clustering",
    "avg_path_len",
    "modularity",
    "cross_density",
    "top1_error",
    "wall_ms",
]

KEY_FIELDS = CSV_HEADER[:9]  # identifies a (grid cell, seed) pair
GROUP_FIELDS = KEY_FIELDS[:8]  # identifies a grid cell across seeds

AGG_HEADER = GROUP_FIELDS + [
    "n_seeds",
    "n_failed",
    "top1_mean",
    "top1_std",
    "mean_degree",
    "clustering",
    "avg_path_len",
    "modularity",
    "cross_density",
]


@dataclass(frozen=True)
class Axis:
    name: str
    values: tuple[float, ...]


@dataclass(frozen=True)
class SweepSpec:
    family: str
    n: int
    axis1: Axis
    axis2: Axis | None
    communities: tuple[int, ...]
    seeds: tuple[int, ...]
    fixed: dict
    width: int = 512
    rounds: int = 5
    use_bias: bool = True
    train: TrainConfig = TrainConfig()
    dataset: dict | None = None

    def validate(self) -> None:
        if self.family not in SWEEP_FAMILIES:
            raise ValueError(f"sweep family must be one of {SWEEP_FAMILIES}")
        axes = [self.axis1] + ([self.axis2] if self.axis2 else [])
        for axis in axes:
            if axis.name not in AXIS_NAMES:
                raise ValueError(f"axis {axis.name!r} not one of {AXIS_NAMES}")
            if not axis.values:
                raise ValueError(f"axis {axis.name!r} has no values")
            if axis.name in self.fixed:
                raise ValueError(f"{axis.name!r} both swept and fixed")
        if self.axis2 and self.axis2.name == self.axis1.name:
            raise ValueError("axis1 and axis2 sweep the same parameter")
        if not self.communities:
            raise ValueError("communities list is empty")
        if not self.seeds:
            raise ValueError("seeds list is empty")
        self.train.validate()

    @classmethod
    def from_dict(cls, d: dict) -> "SweepSpec":
        model = d.get("model", {})
        axis2 = d.get("axis2")
        spec = cls(
            family=d["family"],
            n=int(d.get("n", 128)),
            axis1=Axis(d["axis1"]["name"], tuple(d["axis1"]["values"])),
            axis2=Axis(axis2["name"], tuple(axis2["values"])) if axis2 else None,
            communities=tuple(d.get("communities", [1])),
            seeds=tuple(d.get("seeds", [0, 1, 2, 3, 4])),
            fixed=dict(d.get("fixed", {})),
            width=int(model.get("width", 512)),
            rounds=int(model.get("rounds", 5)),
            use_bias=bool(model.get("use_bias", True)),
            train=TrainConfig(**d.get("train", {})),
            dataset=d.get("dataset"),
        )
        spec.validate()
        return spec

    @classmethod
    def from_json(cls, path) -> "SweepSpec":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


@dataclass(frozen=True)
class ExperimentRecord:
    """One (grid cell, seed) training outcome; mirrors the CSV columns."""

    family: str
    communities: int
    p: float | None
    gamma: float | None
    m: float | None
    mu: float | None
    width: int
    rounds: int
    seed: int
    status: str
    nodes_realized: int | None
    bridges: int | None
    mean_degree: float | None
    clustering: float | None
    avg_path_len: float | None
    modularity: float | None
    cross_density: float | None
    top1_error: float | None
    wall_ms: float


@dataclass(frozen=True)
class CellTask:
    """Self-contained description of one sweep cell; picklable for workers."""

    family: str
    n: int
    communities: int
    p: float | None
    gamma: float | None
    m: float | None
    mu: float | None
    width: int
    rounds: int
    use_bias: bool
    seed: int
    train: TrainConfig


def build_dataset(dspec: dict | None, dtype=np.float32) -> tuple[Dataset, Dataset]:
    """Materialize (train, test) from a dataset spec dict.

    kinds: "cifar10" {dir, normalize?} and "blobs" {classes?, dim?,
    n_per_class?, test_n_per_class?, spread?, seed?}. Default: desk-scale
    blobs.
    """
    dspec = dict(dspec or {"kind": "blobs"})
    kind = dspec.get("kind", "blobs")
    if kind == "cifar10":
        return load_cifar10(
            dspec["dir"], normalize=dspec.get("normalize", "standard"), dtype=dtype
        )
    if kind == "blobs":
        classes = int(dspec.get("classes", 10))
        dim = int(dspec.get("dim", 48))
        spread = float(dspec.get("spread", 1.0))
        seed = int(dspec.get("seed", 1234))
        train_ds = synthetic_blobs(
            int(dspec.get("n_per_class", 500)), classes, dim, spread, seed, dtype=dtype
        )
        test_ds = synthetic_blobs(
            int(dspec.get("test_n_per_class", 100)),
            classes,
            dim,
            spread,
            child_seed(seed, 1),
            dtype=dtype,
        )
        return train_ds, test_ds
    raise ValueError(f"unknown dataset kind {kind!r}")


def _cell_tasks(spec: SweepSpec) -> list[CellTask]:
    tasks = []
    axis2_values = list(spec.axis2.values) if spec.axis2 else [None]
    for v1 in spec.axis1.values:
        for v2 in axis2_values:
            params = dict(spec.fixed)
            params[spec.axis1.name] = v1
            if spec.axis2:
                params[spec.axis2.name] = v2
            for k in spec.communities:
                for seed in spec.seeds:
                    tasks.append(
                        CellTask(
                            family=spec.family,
                            n=spec.n,
                            communities=int(k),
                            p=params.get("p"),
                            gamma=params.get("gamma"),
                            m=params.get("m"),
                            mu=params.get("mu"),
                            width=spec.width,
                            rounds=spec.rounds,
                            use_bias=spec.use_bias,
                            seed=int(seed),
                            train=spec.train,
                        )
                    )
    return tasks


def _execute_cell(task: CellTask, train_ds: Dataset, test_ds: Dataset) -> ExperimentRecord:
    base = dict(
        family=task.family,
        communities=task.communities,
        p=task.p,
        gamma=task.gamma,
        m=task.m,
        mu=task.mu,
        width=task.width,
        rounds=task.rounds,
        seed=task.seed,
    )
    tic = time.perf_counter()
    try:
        gspec = GeneratorSpec(
            family="community",
            n=task.n,
            communities=task.communities,
            mu=task.mu if task.mu is not None else 0.0,
            base=task.family,
            p=task.p,
            gamma=task.gamma,
            m=task.m,
            seed=child_seed(task.seed, _GRAPH_STREAM),
        )
        graph, info = generate_with_info(gspec)
        metrics = compute_metrics(graph)
        config = replace(task.train, seed=child_seed(task.seed, _SHUFFLE_STREAM))
        model = init_model(
            graph,
            width=task.width,
            rounds=task.rounds,
            in_dim=train_ds.dim,
            out_dim=train_ds.n_classes,
            seed=child_seed(task.seed, _MODEL_STREAM),
            dtype=config.dtype,
            use_bias=task.use_bias,
        )
        result, _ = train(model, train_ds, test_ds, config)
        return ExperimentRecord(
            **base,
            status="ok",
            nodes_realized=graph.node_count,
            bridges=info.bridge_edges,
            mean_degree=metrics.mean_degree,
            clustering=metrics.clustering,
            avg_path_len=metrics.avg_path_length,
            modularity=metrics.modularity,
            cross_density=metrics.cross_density,
            top1_error=result.top1_error_percent,
            wall_ms=(time.perf_counter() - tic) * 1000.0,
        )
    except (RelnetError, ValueError) as exc:
        return ExperimentRecord(
            **base,
            status=f"error:{type(exc).__name__}",
            nodes_realized=None,
            bridges=None,
            mean_degree=None,
            clustering=None,
            avg_path_len=None,
            modularity=None,
            cross_density=None,
            top1_error=None,
            wall_ms=(time.perf_counter() - tic) * 1000.0,
        )


_WORKER_DATA: tuple[Dataset, Dataset] | None = None


def _worker_init(dataset_spec: dict | None, precision: str) -> None:
    global _WORKER_DATA
    dtype = np.float64 if precision == "double" else np.float32
    _WORKER_DATA = build_dataset(dataset_spec, dtype=dtype)


def _worker_run(task: CellTask) -> ExperimentRecord:
    assert _WORKER_DATA is not None
    return _execute_cell(task, *_WORKER_DATA)


def record_key(record: ExperimentRecord) -> tuple[str, ...]:
    """Formatted (grid cell, seed) identity; stable across CSV round-trips."""
    row = _record_to_row(record)
    return tuple(row[f] for f in KEY_FIELDS)


def _task_key(task: CellTask) -> tuple[str, ...]:
    values = {
        "family": task.family,
        "communities": task.communities,
        "p": task.p,
        "gamma": task.gamma,
        "m": task.m,
        "mu": task.mu,
        "width": task.width,
        "rounds": task.rounds,
        "seed": task.seed,
    }
    return tuple(_fmt(values[f]) for f in KEY_FIELDS)


def run_sweep(
    spec: SweepSpec,
    workers: int = 1,
    skip_keys: set[tuple[str, ...]] | None = None,
    progress=None,
) -> list[ExperimentRecord]:
    """Execute every cell of the sweep; returns records in grid order.

    skip_keys (from record_key of prior rows) supports resumption;
    `progress`, when given, is called with each finished record.
    """
    spec.validate()
    tasks = _cell_tasks(spec)
    if skip_keys:
        tasks = [t for t in tasks if _task_key(t) not in skip_keys]
    records: list[ExperimentRecord] = []
    if workers <= 1:
        dtype = spec.train.dtype
        train_ds, test_ds = build_dataset(spec.dataset, dtype=dtype)
        for task in tasks:
            record = _execute_cell(task, train_ds, test_ds)
            records.append(record)
            if progress:
                progress(record)
    else:
        with ProcessPoolExecutor(
            max_workers=workers,
            initializer=_worker_init,
            initargs=(spec.dataset, spec.train.precision),
        ) as pool:
            for record in pool.map(_worker_run, tasks):
                records.append(record)
                if progress:
                    progress(record)
    return records


# ---------------------------------------------------------------------------
# Aggregation and reporting


def aggregate(records: list[ExperimentRecord]) -> list[dict]:
    """Per-cell rows grouped over seeds, stably sorted by the group fields.

    Error rows are excluded from means and counted in n_failed; top1_std is
    the sample standard deviation (0.0 for a single seed).
    """
    groups: dict[tuple, list[ExperimentRecord]] = {}
    for rec in records:
        key = tuple(getattr(rec, f) for f in GROUP_FIELDS)
        groups.setdefault(key, []).append(rec)

    def sort_key(key):
        return tuple((v is None, v) for v in key)

    rows = []
    for key in sorted(groups, key=sort_key):
        recs = groups[key]
        ok = [r for r in recs if r.status == "ok"]
        row = dict(zip(GROUP_FIELDS, key))
        row["n_seeds"] = len(ok)
        row["n_failed"] = len(recs) - len(ok)
        errors = [r.top1_error for r in ok]
        row["top1_mean"] = float(np.mean(errors)) if errors else None
        if len(errors) > 1:
            row["top1_std"] = float(np.std(errors, ddof=1))
        else:
            row["top1_std"] = 0.0 if errors else None
        for metric in ("mean_degree", "clustering", "avg_path_len",
                       "modularity", "cross_density"):
            values = [getattr(r, metric) for r in ok if getattr(r, metric) is not None]
            row[metric] = float(np.mean(values)) if values else None
        rows.append(row)
    return rows


@dataclass(frozen=True)
class CorrelationReport:
    """(x, mean top-1 error) pairs plus quadratic fit y = a x^2 + b x + c."""

    x_field: str
    points: tuple[tuple[float, float], ...]
    coefficients: tuple[float, float, float]


def correlation_report(
    records: list[ExperimentRecord], x_field: str = "mu"
) -> CorrelationReport:
    """Relate one parameter to performance across grid cells.

    Takes the per-cell seed-averaged errors, pairs them with the cell's
    x_field value, and fits a quadratic by least squares (normal equations).
    """
    rows = aggregate(records)
    points = [
        (float(row[x_field]), float(row["top1_mean"]))
        for row in rows
        if row.get(x_field) is not None and row["top1_mean"] is not None
    ]
    xs = np.array([p[0] for p in points])
    ys = np.array([p[1] for p in points])
    if len(set(xs.tolist())) < 3:
        raise FitError(
            f"quadratic fit needs >= 3 distinct {x_field} values, "
            f"got {len(set(xs.tolist()))}"
        )
    design = np.stack([xs**2, xs, np.ones_like(xs)], axis=1)
    lhs = design.T @ design
    rhs = design.T @ ys
    try:
        coeffs = np.linalg.solve(lhs, rhs)
    except np.linalg.LinAlgError as exc:
        raise FitError(f"normal equations singular: {exc}") from exc
    return CorrelationReport(
        x_field=x_field,
        points=tuple(points),
        coefficients=tuple(float(c) for c in coeffs),
    )


# ---------------------------------------------------------------------------
# CSV


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _record_to_row(record: ExperimentRecord) -> dict:
    d = asdict(record)
    return {
        "family": d["family"],
        "communities": _fmt(d["communities"]),
        "p": _fmt(d["p"]),
        "gamma": _fmt(d["gamma"]),
        "m": _fmt(d["m"]),
        "mu": _fmt(d["mu"]),
        "width": _fmt(d["width"]),
        "rounds": _fmt(d["rounds"]),
        "seed": _fmt(d["seed"]),
        "status": d["status"],
        "nodes_realized": _fmt(d["nodes_realized"]),
        "bridges": _fmt(d["bridges"]),
        "mean_degree": _fmt(d["mean_degree"]),
        "clustering": _fmt(d["clustering"]),
        "avg_path_len": _fmt(d["avg_path_len"]),
        "modularity": _fmt(d["modularity"]),
        "cross_density": _fmt(d["cross_density"]),
        "top1_error": _fmt(d["top1_error"]),
        "wall_ms": _fmt(d["wall_ms"]),
    }


def write_records_csv(records: list[ExperimentRecord], path, append: bool = False) -> None:
    mode = "a" if append else "w"
    write_header = not append or not os.path.exists(path) or os.path.getsize(path) == 0
    with open(path, mode, newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_HEADER)
        if write_header:
            writer.writeheader()
        for rec in records:
            writer.writerow(_record_to_row(rec))


def read_records_csv(path) -> list[ExperimentRecord]:
    def as_int(s):
        return int(s) if s else None

    def as_float(s):
        return float(s) if s else None

    records = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            records.append(
                ExperimentRecord(
                    family=row["family"],
                    communities=int(row["communities"]),
                    p=as_float(row["p"]),
                    gamma=as_float(row["gamma"]),
                    m=as_float(row["m"]),
                    mu=as_float(row["mu"]),
                    width=int(row["width"]),
                    rounds=int(row["rounds"]),
                    seed=int(row["seed"]),
                    status=row["status"],
                    nodes_realized=as_int(row["nodes_realized"]),
                    bridges=as_int(row["bridges"]),
                    mean_degree=as_float(row["mean_degree"]),
                    clustering=as_float(row["clustering"]),
                    avg_path_len=as_float(row["avg_path_len"]),
                    modularity=as_float(row["modularity"]),
                    cross_density=as_float(row["cross_density"]),
                    top1_error=as_float(row["top1_error"]),
                    wall_ms=as_float(row["wall_ms"]) or 0.0,
                )
            )
    return records


def existing_keys(path) -> set[tuple[str, ...]]:
    """Keys of rows already present in a records CSV (for --resume)."""
    if not os.path.exists(path):
        return set()
    return {record_key(rec) for rec in read_records_csv(path)}


def write_aggregate_csv(rows: list[dict], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=AGG_HEADER)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _fmt(row.get(k)) for k in AGG_HEADER})
