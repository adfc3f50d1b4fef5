"""FA / DE / HFA comparison on standard continuous benchmark functions.

Each (algorithm, function, run) cell is seeded from a stable hash of the
experiment's base seed, so the whole result table is a pure function of the
:class:`ExperimentSpec`.  The initial population of run ``r`` on a function
is shared by every algorithm (paired comparison); the operator streams are
not.
"""

from __future__ import annotations

import csv
import hashlib
import io
import math
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigError
from .optimize import ALGORITHMS, HfaConfig, Orientation, OptimizationTrace


def sphere(x: np.ndarray) -> float:
    return float(np.dot(x, x))


def rosenbrock(x: np.ndarray) -> float:
    a, b = x[:-1], x[1:]
    return float(np.sum(100.0 * (b - a * a) ** 2 + (1.0 - a) ** 2))


def rastrigin(x: np.ndarray) -> float:
    return float(10.0 * x.size + np.sum(x * x - 10.0 * np.cos(2 * np.pi * x)))


def ackley(x: np.ndarray) -> float:
    d = x.size
    s1 = np.sum(x * x) / d
    s2 = np.sum(np.cos(2 * np.pi * x)) / d
    return float(-20.0 * np.exp(-0.2 * np.sqrt(s1)) - np.exp(s2) + 20.0 + math.e)


@dataclass(frozen=True)
class BenchmarkFunction:
    name: str
    evaluate: Callable[[np.ndarray], float]
    lower: float
    upper: float
    dimension: int = 30
    known_optimum: float = 0.0
    optimum_coordinate: float = 0.0

    @property
    def bounds(self) -> list[list[float]]:
        return [[self.lower, self.upper]] * self.dimension

    def optimum_point(self) -> np.ndarray:
        return np.full(self.dimension, self.optimum_coordinate)

    def __call__(self, x) -> float:
        return self.evaluate(np.asarray(x, dtype=float))


def standard_suite(dimension: int = 30) -> list[BenchmarkFunction]:
    return [
        BenchmarkFunction("sphere", sphere, -5.12, 5.12, dimension),
        BenchmarkFunction("rosenbrock", rosenbrock, -5.0, 10.0, dimension, optimum_coordinate=1.0),
        BenchmarkFunction("rastrigin", rastrigin, -5.12, 5.12, dimension),
        BenchmarkFunction("ackley", ackley, -32.768, 32.768, dimension),
    ]


FUNCTION_NAMES = tuple(f.name for f in standard_suite(2))
ALGORITHM_NAMES = tuple(ALGORITHMS)

SUMMARY_COLUMNS = ["algorithm", "function", "runs", "mean_final", "std_final",
                   "best_final", "worst_final", "mean_evaluations"]
CONVERGENCE_COLUMNS = ["algorithm", "function", "run", "iteration", "best_fitness"]
RUNS_COLUMNS = ["algorithm", "function", "run", "seed", "initial_best", "final_best",
                "evaluations", "status", "error"]


@dataclass
class ExperimentSpec:
    algorithms: Sequence[str] = ALGORITHM_NAMES
    functions: Sequence[str] = FUNCTION_NAMES
    runs: int = 30
    iterations: int = 2000
    population: int = 40
    base_seed: int = 0
    dimension: int = 30

    def __post_init__(self):
        self.algorithms = tuple(a.upper() for a in self.algorithms)
        self.functions = tuple(f.lower() for f in self.functions)
        bad = [a for a in self.algorithms if a not in ALGORITHMS]
        if bad:
            raise ConfigError(f"unknown algorithm(s) {bad}; valid: {', '.join(ALGORITHM_NAMES)}")
        bad = [f for f in self.functions if f not in FUNCTION_NAMES]
        if bad:
            raise ConfigError(f"unknown function(s) {bad}; valid: {', '.join(FUNCTION_NAMES)}")
        if not self.algorithms or not self.functions:
            raise ConfigError("need at least one algorithm and one function")
        if self.runs < 1:
            raise ConfigError("runs must be >= 1")

    def suite(self) -> list[BenchmarkFunction]:
        by_name = {f.name: f for f in standard_suite(self.dimension)}
        return [by_name[name] for name in self.functions]


def stable_seed(*parts) -> int:
    """64-bit seed from a stable hash of ``parts``."""
    digest = hashlib.blake2b("|".join(map(str, parts)).encode(), digest_size=8).digest()
    return int.from_bytes(digest, "big")


@dataclass
class RunRecord:
    algorithm: str
    function: str
    run: int
    seed: int
    trace: OptimizationTrace | None = None
    error: str = ""

    @property
    def ok(self) -> bool:
        return self.trace is not None


@dataclass
class ExperimentResult:
    spec: ExperimentSpec
    records: list[RunRecord] = field(default_factory=list)

    def cell(self, algorithm: str, function: str) -> list[RunRecord]:
        return [r for r in self.records if r.algorithm == algorithm and r.function == function]

    def summary(self) -> list[dict]:
        rows = []
        for a in self.spec.algorithms:
            for f in self.spec.functions:
                ok = [r for r in self.cell(a, f) if r.ok]
                finals = np.array([r.trace.final_best for r in ok], dtype=float)
                evals = np.array([r.trace.evaluations for r in ok], dtype=float)
                nan = math.nan
                rows.append({
                    "algorithm": a,
                    "function": f,
                    "runs": len(ok),
                    "mean_final": float(finals.mean()) if ok else nan,
                    "std_final": float(finals.std(ddof=1)) if len(ok) > 1 else (0.0 if ok else nan),
                    "best_final": float(finals.min()) if ok else nan,
                    "worst_final": float(finals.max()) if ok else nan,
                    "mean_evaluations": float(evals.mean()) if ok else nan,
                })
        return rows


def _run_cell(args) -> RunRecord:
    algorithm, fn, run, spec = args
    seed = stable_seed(spec.base_seed, algorithm, fn.name, run)
    record = RunRecord(algorithm, fn.name, run, seed)
    config = HfaConfig(
        dimension=fn.dimension,
        bounds=fn.bounds,
        population_size=spec.population,
        max_iterations=spec.iterations,
        rng_seed=seed,
        orientation=Orientation.MINIMIZE,
        init_seed=stable_seed(spec.base_seed, "init", fn.name, run),
    )
    try:
        record.trace = ALGORITHMS[algorithm](config, fn)
    except Exception as exc:  # a failed cell is reported, not fatal
        record.error = f"{type(exc).__name__}: {exc}"
    return record


def run_experiment(spec: ExperimentSpec, workers: int = 1) -> ExperimentResult:
    """Run every (algorithm, function, run) cell; ``workers > 1`` uses processes."""
    jobs = [
        (a, fn, r, spec)
        for a in spec.algorithms
        for fn in spec.suite()
        for r in range(spec.runs)
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_run_cell, jobs))
    else:
        records = [_run_cell(job) for job in jobs]
    return ExperimentResult(spec, records)


def _csv_text(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
    return buf.getvalue()


def summary_csv(result: ExperimentResult) -> str:
    return _csv_text(SUMMARY_COLUMNS, result.summary())


def convergence_csv(result: ExperimentResult) -> str:
    rows = (
        {"algorithm": r.algorithm, "function": r.function, "run": r.run,
         "iteration": k, "best_fitness": float(v)}
        for r in result.records if r.ok
        for k, v in enumerate(r.trace.best_per_iteration)
    )
    return _csv_text(CONVERGENCE_COLUMNS, rows)


def runs_csv(result: ExperimentResult) -> str:
    rows = []
    for r in result.records:
        t = r.trace
        rows.append({
            "algorithm": r.algorithm, "function": r.function, "run": r.run, "seed": r.seed,
            "initial_best": float(t.initial_best) if t else math.nan,
            "final_best": float(t.final_best) if t else math.nan,
            "evaluations": t.evaluations if t else 0,
            "status": "ok" if r.ok else "failed",
            "error": r.error,
        })
    return _csv_text(RUNS_COLUMNS, rows)


CSV_FILES = {
    "summary.csv": summary_csv,
    "convergence.csv": convergence_csv,
    "runs.csv": runs_csv,
}


def write_csvs(result: ExperimentResult, out_dir) -> dict[str, Path]:
    """Write the three CSVs into ``out_dir``; each file is replaced atomically."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    texts = {name: render(result) for name, render in CSV_FILES.items()}
    paths = {}
    for name, text in texts.items():
        fd, tmp = tempfile.mkstemp(dir=out, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", newline="") as fh:
                fh.write(text)
            os.replace(tmp, out / name)
        except BaseException:
            Path(tmp).unlink(missing_ok=True)
            raise
        paths[name] = out / name
    return paths
