import csv
import io
import math

import numpy as np
import pytest

from stegafly import bench
from stegafly.errors import ConfigError


@pytest.mark.parametrize("fn", bench.standard_suite(30), ids=lambda f: f.name)
def test_known_optimum(fn):
    assert fn(fn.optimum_point()) == pytest.approx(fn.known_optimum, abs=1e-9)
    lo = fn(np.full(fn.dimension, fn.lower))
    assert lo > fn.known_optimum


def test_function_values_by_hand():
    assert bench.sphere(np.array([1.0, 2.0])) == 5.0
    assert bench.rosenbrock(np.array([0.0, 0.0])) == 1.0
    assert bench.rastrigin(np.array([1.0])) == pytest.approx(1.0, abs=1e-12)
    assert bench.ackley(np.zeros(5)) == pytest.approx(0.0, abs=1e-12)


def test_suite_bounds():
    b = {f.name: (f.lower, f.upper) for f in bench.standard_suite()}
    assert b == {"sphere": (-5.12, 5.12), "rosenbrock": (-5.0, 10.0),
                 "rastrigin": (-5.12, 5.12), "ackley": (-32.768, 32.768)}


def test_experiment_config_validation():
    with pytest.raises(ConfigError, match="FA, DE, HFA"):
        bench.ExperimentSpec(algorithms=["PSO"])
    with pytest.raises(ConfigError, match="sphere"):
        bench.ExperimentSpec(functions=["griewank"])
    with pytest.raises(ConfigError):
        bench.ExperimentSpec(runs=0)


def test_stable_seed():
    assert bench.stable_seed(1, "FA", "sphere", 0) == bench.stable_seed(1, "FA", "sphere", 0)
    assert bench.stable_seed(1, "FA", "sphere", 0) != bench.stable_seed(1, "DE", "sphere", 0)
    assert 0 <= bench.stable_seed("x") < 2**64


def _rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_minimal_shape():
    spec = bench.ExperimentSpec(runs=1, iterations=1, population=4, dimension=3)
    res = bench.run_experiment(spec)
    summary = _rows(bench.summary_csv(res))
    assert len(summary) == 12
    assert list(summary[0]) == bench.SUMMARY_COLUMNS
    assert all(len(r.trace.best_per_iteration) == 1 for r in res.records)
    conv = _rows(bench.convergence_csv(res))
    assert list(conv[0]) == bench.CONVERGENCE_COLUMNS and len(conv) == 12
    assert len(_rows(bench.runs_csv(res))) == 12


def test_paired_initial_populations():
    spec = bench.ExperimentSpec(functions=["sphere"], runs=2, iterations=1, population=4, dimension=3)
    res = bench.run_experiment(spec)
    for run in range(2):
        initial = {r.algorithm: r.trace.initial_best for r in res.records if r.run == run}
        assert len(set(initial.values())) == 1


def test_final_is_last_and_minimum():
    spec = bench.ExperimentSpec(runs=2, iterations=15, population=6, dimension=4)
    res = bench.run_experiment(spec)
    for r in res.records:
        h = r.trace.best_per_iteration
        assert r.trace.final_best == h[-1] == min(h)


def test_sphere_hfa_improves():
    spec = bench.ExperimentSpec(algorithms=["HFA"], functions=["sphere"], runs=3,
                                iterations=50, population=10, dimension=10)
    res = bench.run_experiment(spec)
    initial = np.mean([r.trace.initial_best for r in res.records])
    final = res.summary()[0]["mean_final"]
    assert final < initial


def test_csv_determinism_and_workers(tmp_path):
    spec = bench.ExperimentSpec(runs=2, iterations=5, population=6, dimension=3, base_seed=42)
    a = bench.write_csvs(bench.run_experiment(spec), tmp_path / "a")
    b = bench.write_csvs(bench.run_experiment(spec, workers=4), tmp_path / "b")
    for name in bench.CSV_FILES:
        assert a[name].read_bytes() == b[name].read_bytes()


def test_failed_cell_is_flagged():
    def broken(x):
        raise RuntimeError("nope")

    spec = bench.ExperimentSpec(functions=["sphere"], runs=1, iterations=2, population=4, dimension=2)
    fn = bench.BenchmarkFunction("sphere", broken, -1.0, 1.0, 2)
    rec = bench._run_cell(("HFA", fn, 0, spec))
    assert not rec.ok and "nope" in rec.error
    res = bench.ExperimentResult(spec, [rec])
    row = _rows(bench.runs_csv(res))[0]
    assert row["status"] == "failed"
    summary = res.summary()
    assert summary[0]["runs"] == 0 and math.isnan(summary[0]["mean_final"])
