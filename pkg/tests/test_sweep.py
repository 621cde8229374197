import itertools
import json
import math
from dataclasses import replace

import numpy as np
import pytest

from relnet.errors import FitError
from relnet.sweep import (
    AGG_HEADER,
    CSV_HEADER,
    Axis,
    ExperimentRecord,
    SweepSpec,
    aggregate,
    build_dataset,
    correlation_report,
    existing_keys,
    read_records_csv,
    record_key,
    run_sweep,
    write_aggregate_csv,
    write_records_csv,
)
from relnet.training import TrainConfig

TINY_TRAIN = TrainConfig(epochs=1, batch_size=64, learning_rate=0.05, seed=0)
TINY_DATASET = {
    "kind": "blobs",
    "classes": 3,
    "dim": 6,
    "n_per_class": 20,
    "test_n_per_class": 10,
}


def tiny_spec(**overrides):
    fields = dict(
        family="er",
        n=8,
        axis1=Axis("p", (0.4, 0.8)),
        axis2=Axis("mu", (0.0, 0.5)),
        communities=(2,),
        seeds=(0, 1),
        fixed={},
        width=16,
        rounds=1,
        train=TINY_TRAIN,
        dataset=TINY_DATASET,
    )
    fields.update(overrides)
    return SweepSpec(**fields)


def make_record(**overrides):
    fields = dict(
        family="er",
        communities=1,
        p=0.5,
        gamma=None,
        m=None,
        mu=0.0,
        width=16,
        rounds=1,
        seed=0,
        status="ok",
        nodes_realized=8,
        bridges=0,
        mean_degree=3.5,
        clustering=0.4,
        avg_path_len=1.6,
        modularity=0.0,
        cross_density=0.0,
        top1_error=30.0,
        wall_ms=12.5,
    )
    fields.update(overrides)
    return ExperimentRecord(**fields)


class TestSweepSpec:
    def test_valid(self):
        tiny_spec().validate()

    def test_bad_family(self):
        with pytest.raises(ValueError, match="sweep family"):
            tiny_spec(family="complete").validate()

    def test_bad_axis_name(self):
        with pytest.raises(ValueError, match="axis 'q'"):
            tiny_spec(axis1=Axis("q", (1.0,))).validate()

    def test_empty_axis(self):
        with pytest.raises(ValueError, match="has no values"):
            tiny_spec(axis1=Axis("p", ())).validate()

    def test_swept_and_fixed_conflict(self):
        with pytest.raises(ValueError, match="both swept and fixed"):
            tiny_spec(fixed={"p": 0.5}).validate()

    def test_duplicate_axes(self):
        with pytest.raises(ValueError, match="same parameter"):
            tiny_spec(axis2=Axis("p", (0.1,))).validate()

    def test_empty_communities(self):
        with pytest.raises(ValueError, match="communities"):
            tiny_spec(communities=()).validate()

    def test_empty_seeds(self):
        with pytest.raises(ValueError, match="seeds"):
            tiny_spec(seeds=()).validate()

    def test_train_config_validated(self):
        bad = TrainConfig(epochs=0)
        with pytest.raises(ValueError, match="epochs"):
            tiny_spec(train=bad).validate()

    def test_from_dict_defaults(self):
        spec = SweepSpec.from_dict(
            {"family": "er", "axis1": {"name": "p", "values": [0.2, 0.4]}}
        )
        assert spec.n == 128
        assert spec.axis2 is None
        assert spec.communities == (1,)
        assert spec.seeds == (0, 1, 2, 3, 4)
        assert spec.width == 512 and spec.rounds == 5
        assert spec.train == TrainConfig()

    def test_from_json_round_trip(self, tmp_path):
        payload = {
            "family": "static_sf",
            "n": 64,
            "axis1": {"name": "gamma", "values": [2.2, 3.0]},
            "axis2": {"name": "mu", "values": [0.1]},
            "fixed": {"m": 3},
            "communities": [1, 2],
            "seeds": [7],
            "model": {"width": 32, "rounds": 2},
            "train": {"epochs": 2, "batch_size": 16},
            "dataset": {"kind": "blobs", "classes": 4, "dim": 8},
        }
        path = tmp_path / "spec.json"
        path.write_text(json.dumps(payload))
        spec = SweepSpec.from_json(path)
        assert spec.family == "static_sf"
        assert spec.axis1 == Axis("gamma", (2.2, 3.0))
        assert spec.fixed == {"m": 3}
        assert spec.width == 32
        assert spec.train.epochs == 2


class TestRunSweep:
    def test_record_count_and_grid_order(self):
        spec = tiny_spec()
        records = run_sweep(spec)
        assert len(records) == 2 * 2 * 1 * 2
        observed = [(r.p, r.mu, r.communities, r.seed) for r in records]
        expected = [
            (p, mu, k, s)
            for p, mu, k, s in itertools.product(
                (0.4, 0.8), (0.0, 0.5), (2,), (0, 1)
            )
        ]
        assert observed == expected
        assert all(r.status == "ok" for r in records)
        assert all(r.top1_error is not None for r in records)
        assert all(r.family == "er" and r.width == 16 for r in records)
        assert len({record_key(r) for r in records}) == len(records)

    def test_metrics_populated(self):
        records = run_sweep(tiny_spec(seeds=(0,)))
        for r in records:
            assert r.nodes_realized is not None and r.nodes_realized <= 8
            assert r.bridges is not None
            assert r.mean_degree is not None
            assert r.wall_ms > 0

    def test_deterministic_up_to_wall_ms(self):
        spec = tiny_spec()
        a = [replace(r, wall_ms=0.0) for r in run_sweep(spec)]
        b = [replace(r, wall_ms=0.0) for r in run_sweep(spec)]
        assert a == b

    def test_infeasible_cells_become_error_rows(self):
        spec = tiny_spec(
            family="static_sf",
            n=12,
            axis1=Axis("gamma", (2.5,)),
            axis2=Axis("mu", (0.0,)),
            fixed={"m": 6},
            communities=(2,),
            seeds=(0, 1),
        )
        records = run_sweep(spec)
        assert len(records) == 2
        assert all(r.status == "error:ValueError" for r in records)
        assert all(r.top1_error is None for r in records)
        assert all(r.nodes_realized is None for r in records)

    def test_error_rows_do_not_abort_mixed_sweeps(self):
        spec = tiny_spec(
            family="static_sf",
            n=12,
            axis1=Axis("m", (2, 6)),
            axis2=Axis("gamma", (2.5,)),
            fixed={},
            communities=(2,),
            seeds=(0,),
        )
        records = run_sweep(spec)
        statuses = [r.status for r in records]
        assert statuses == ["ok", "error:ValueError"]

    def test_skip_keys_resume(self):
        spec = tiny_spec()
        records = run_sweep(spec)
        done = {record_key(r) for r in records[:5]}
        rest = run_sweep(spec, skip_keys=done)
        assert len(rest) == len(records) - 5
        assert [record_key(r) for r in rest] == [
            record_key(r) for r in records[5:]
        ]

    def test_skip_all_yields_nothing(self):
        spec = tiny_spec(seeds=(0,))
        records = run_sweep(spec)
        again = run_sweep(spec, skip_keys={record_key(r) for r in records})
        assert again == []

    def test_progress_callback_sees_every_record(self):
        seen = []
        records = run_sweep(tiny_spec(seeds=(0,)), progress=seen.append)
        assert seen == records

    def test_workers_match_inline(self):
        spec = tiny_spec(axis2=None, seeds=(0, 1))
        inline = [replace(r, wall_ms=0.0) for r in run_sweep(spec, workers=1)]
        pooled = [replace(r, wall_ms=0.0) for r in run_sweep(spec, workers=2)]
        assert inline == pooled


class TestAggregate:
    def test_identical_seeds_zero_std(self):
        rows = aggregate([make_record(seed=s, top1_error=30.0) for s in range(5)])
        assert len(rows) == 1
        assert rows[0]["n_seeds"] == 5
        assert rows[0]["n_failed"] == 0
        assert rows[0]["top1_mean"] == 30.0
        assert rows[0]["top1_std"] == 0.0

    def test_two_seed_std(self):
        rows = aggregate(
            [
                make_record(seed=0, top1_error=30.0),
                make_record(seed=1, top1_error=32.0),
            ]
        )
        assert rows[0]["top1_mean"] == 31.0
        assert math.isclose(rows[0]["top1_std"], math.sqrt(2), rel_tol=1e-12)

    def test_single_seed_std_zero(self):
        rows = aggregate([make_record()])
        assert rows[0]["top1_std"] == 0.0

    def test_failed_rows_counted_not_averaged(self):
        rows = aggregate(
            [
                make_record(seed=0, top1_error=20.0),
                make_record(
                    seed=1,
                    status="error:ValueError",
                    top1_error=None,
                    nodes_realized=None,
                    mean_degree=None,
                    clustering=None,
                    avg_path_len=None,
                    modularity=None,
                    cross_density=None,
                    bridges=None,
                ),
            ]
        )
        assert rows[0]["n_seeds"] == 1
        assert rows[0]["n_failed"] == 1
        assert rows[0]["top1_mean"] == 20.0

    def test_all_failed_cell(self):
        rows = aggregate(
            [make_record(status="error:EdgeSaturation", top1_error=None)]
        )
        assert rows[0]["n_seeds"] == 0
        assert rows[0]["top1_mean"] is None
        assert rows[0]["top1_std"] is None

    def test_input_order_invariance(self):
        records = [
            make_record(p=p, seed=s, top1_error=10.0 * s + p)
            for p in (0.2, 0.8, 0.5)
            for s in (0, 1)
        ]
        rows_a = aggregate(records)
        rows_b = aggregate(list(reversed(records)))
        assert rows_a == rows_b

    def test_sorted_by_group_fields(self):
        records = [make_record(p=p) for p in (0.8, 0.2, 0.5)]
        rows = aggregate(records)
        assert [row["p"] for row in rows] == [0.2, 0.5, 0.8]

    def test_none_valued_params_sort_last(self):
        records = [make_record(p=None, gamma=2.5), make_record(p=0.1)]
        rows = aggregate(records)
        assert rows[0]["p"] == 0.1
        assert rows[1]["p"] is None

    def test_metric_means(self):
        rows = aggregate(
            [
                make_record(seed=0, clustering=0.2),
                make_record(seed=1, clustering=0.4),
            ]
        )
        assert math.isclose(rows[0]["clustering"], 0.3, rel_tol=1e-12)


class TestCorrelationReport:
    def test_recovers_parabola(self):
        records = [
            make_record(mu=x, top1_error=float(x) ** 2, seed=0) for x in (0.0, 0.5, 1.0, 2.0)
        ]
        report = correlation_report(records, x_field="mu")
        a, b, c = report.coefficients
        assert abs(a - 1.0) <= 1e-9
        assert abs(b) <= 1e-9
        assert abs(c) <= 1e-9
        assert report.x_field == "mu"
        assert report.points == ((0.0, 0.0), (0.5, 0.25), (1.0, 1.0), (2.0, 4.0))

    def test_constant_data(self):
        records = [make_record(p=x, top1_error=7.0) for x in (0.1, 0.2, 0.3)]
        a, b, c = correlation_report(records, x_field="p").coefficients
        assert abs(a) <= 1e-9 and abs(b) <= 1e-9
        assert abs(c - 7.0) <= 1e-9

    def test_seed_averaging_feeds_fit(self):
        records = [
            make_record(mu=x, seed=s, top1_error=float(x) ** 2 + d)
            for x in (0.0, 1.0, 2.0)
            for s, d in ((0, -1.0), (1, 1.0))
        ]
        report = correlation_report(records, x_field="mu")
        assert abs(report.coefficients[0] - 1.0) <= 1e-9

    def test_too_few_distinct_x(self):
        records = [make_record(mu=x, top1_error=1.0) for x in (0.1, 0.1, 0.4)]
        with pytest.raises(FitError, match="needs >= 3 distinct"):
            correlation_report(records, x_field="mu")


class TestCsv:
    def sample_records(self):
        return [
            make_record(seed=0),
            make_record(seed=1, top1_error=28.75),
            make_record(
                seed=2,
                status="error:ValueError",
                top1_error=None,
                nodes_realized=None,
                bridges=None,
                mean_degree=None,
                clustering=None,
                avg_path_len=None,
                modularity=None,
                cross_density=None,
            ),
            make_record(p=None, gamma=2.5, m=3.0, family="static_sf", seed=0),
        ]

    def test_round_trip_exact(self, tmp_path):
        path = tmp_path / "records.csv"
        records = self.sample_records()
        write_records_csv(records, path)
        assert read_records_csv(path) == records

    def test_header_order(self, tmp_path):
        path = tmp_path / "records.csv"
        write_records_csv(self.sample_records(), path)
        first = path.read_text().splitlines()[0]
        assert first == ",".join(CSV_HEADER)

    def test_append_keeps_single_header(self, tmp_path):
        path = tmp_path / "records.csv"
        records = self.sample_records()
        write_records_csv(records[:2], path)
        write_records_csv(records[2:], path, append=True)
        lines = path.read_text().splitlines()
        assert lines.count(",".join(CSV_HEADER)) == 1
        assert read_records_csv(path) == records

    def test_append_to_fresh_file_writes_header(self, tmp_path):
        path = tmp_path / "new.csv"
        write_records_csv(self.sample_records(), path, append=True)
        assert read_records_csv(path) == self.sample_records()

    def test_existing_keys(self, tmp_path):
        path = tmp_path / "records.csv"
        records = self.sample_records()
        write_records_csv(records, path)
        keys = existing_keys(path)
        assert keys == {record_key(r) for r in records}
        assert existing_keys(tmp_path / "absent.csv") == set()

    def test_aggregate_csv(self, tmp_path):
        path = tmp_path / "agg.csv"
        rows = aggregate(self.sample_records())
        write_aggregate_csv(rows, path)
        lines = path.read_text().splitlines()
        assert lines[0] == ",".join(AGG_HEADER)
        assert len(lines) == 1 + len(rows)


class TestBuildDataset:
    def test_blobs_defaults(self):
        train, test = build_dataset(None)
        assert train.features.shape == (5000, 48)
        assert test.features.shape == (1000, 48)
        assert train.n_classes == 10
        assert train.features.dtype == np.float32

    def test_blobs_custom(self):
        train, test = build_dataset(TINY_DATASET, dtype=np.float64)
        assert train.features.shape == (60, 6)
        assert test.features.shape == (30, 6)
        assert train.features.dtype == np.float64

    def test_train_test_disjoint_draws(self):
        train, test = build_dataset(TINY_DATASET)
        assert not np.array_equal(train.features[:30], test.features)

    def test_unknown_kind(self):
        with pytest.raises(ValueError, match="unknown dataset kind"):
            build_dataset({"kind": "mnist"})
