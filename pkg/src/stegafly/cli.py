"""Command-line interface: ``stegafly {embed,extract,metrics,bench}``.

Results are printed as ``key=value`` lines.  Failures print a single
``error=<code> msg=<text>`` line to stderr and exit 1 (bad input) or 2
(runtime failure, corrupted data, wrong passphrase).
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys
import tempfile
from pathlib import Path

from . import __version__, bench, engine, metrics
from .errors import (
    CapacityError,
    ConfigError,
    CorruptionError,
    FormatError,
    ShapeError,
    WrongKeyError,
)
from .images import load_image, save_png

PASSPHRASE_ENV = "STEGAFLY_PASSPHRASE"
EXIT_OK, EXIT_INPUT, EXIT_RUNTIME = 0, 1, 2


class CliError(Exception):
    def __init__(self, code: str, msg: str, exit_code: int = EXIT_INPUT):
        super().__init__(msg)
        self.code, self.msg, self.exit_code = code, msg, exit_code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError("usage", message)


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError(f"{text} is not an unsigned 64-bit integer")
    return v


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"{text} must be >= 1")
    return v


def _csv_list(text: str) -> list[str]:
    return [p.strip() for p in text.split(",") if p.strip()]


def _fmt(v) -> str:
    if isinstance(v, float):
        return "nan" if math.isnan(v) else repr(v)
    return str(v)


def _emit(pairs) -> None:
    for k, v in pairs:
        print(f"{k}={_fmt(v)}")


def _passphrase(args) -> str:
    p = args.passphrase if args.passphrase is not None else os.environ.get(PASSPHRASE_ENV)
    if not p:
        raise CliError("passphrase", f"no passphrase given (use --passphrase or {PASSPHRASE_ENV})")
    return p


def _read_bytes(path) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise CliError("io", f"cannot read {path}: {exc.strerror or exc}") from exc


def _load(path):
    try:
        return load_image(path)
    except FileNotFoundError as exc:
        raise CliError("io", f"cannot read {path}: file not found") from exc
    except OSError as exc:
        raise CliError("io", f"cannot read {path}: {exc}") from exc
    except FormatError as exc:
        raise CliError("format", str(exc)) from exc


def _write_bytes_atomic(path, data: bytes) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def cmd_embed(args) -> int:
    passphrase = _passphrase(args)
    cover = _load(args.cover)
    payload = _read_bytes(args.payload)
    if Path(args.out).suffix.lower() != ".png":
        raise CliError("format", f"{args.out}: output must be a .png file")
    try:
        result = engine.embed(
            cover, payload, passphrase,
            population_size=args.population, max_iterations=args.iterations,
            seed=args.seed, workers=args.workers,
        )
    except CapacityError as exc:
        raise CliError("capacity", f"{exc} (max payload bytes={exc.capacity})") from exc
    except (ValueError, ConfigError) as exc:
        raise CliError("config", str(exc)) from exc
    try:
        save_png(args.out, result.stego)
    except OSError as exc:
        raise CliError("io", f"cannot write {args.out}: {exc}") from exc
    r, t, h = result.report, result.trace, result.header
    _emit([
        ("out", args.out),
        ("mse", r.mse), ("psnr_db", r.psnr_db), ("ssim", r.ssim),
        ("q_index", r.q_index), ("fitness_z", r.fitness_z),
        ("payload_bytes", len(payload)), ("ciphertext_bytes", h.payload_len),
        ("capacity_bytes", engine.capacity(cover)),
        ("scan_start", h.scan_start), ("scan_stride", h.scan_stride),
        ("best_fitness", t.best_solution.fitness), ("baseline_fitness", result.baseline_fitness),
        ("iterations", len(t.best_per_iteration)), ("evaluations", t.evaluations),
    ])
    return EXIT_OK


def cmd_extract(args) -> int:
    passphrase = _passphrase(args)
    stego = _load(args.stego)
    try:
        data = engine.extract(stego, passphrase)
    except FormatError as exc:
        raise CliError("format", f"not a stego image: {exc}") from exc
    except CorruptionError as exc:
        raise CliError("corrupted", f"corrupted: {exc}", EXIT_RUNTIME) from exc
    except WrongKeyError as exc:
        raise CliError("decrypt", f"decryption failed: {exc}", EXIT_RUNTIME) from exc
    try:
        _write_bytes_atomic(args.out, data)
    except OSError as exc:
        raise CliError("io", f"cannot write {args.out}: {exc}") from exc
    _emit([("out", args.out), ("payload_bytes", len(data))])
    return EXIT_OK


def cmd_metrics(args) -> int:
    cover = _load(args.cover)
    stego = _load(args.stego)
    try:
        report = metrics.quality_report(cover, stego)
    except (ShapeError, ConfigError) as exc:
        raise CliError("shape", str(exc)) from exc
    fields = report.as_dict()
    if args.csv:
        w = csv.DictWriter(sys.stdout, fieldnames=list(fields), lineterminator="\n")
        w.writeheader()
        w.writerow({k: _fmt(v) for k, v in fields.items()})
    else:
        _emit(fields.items())
    return EXIT_OK


def cmd_bench(args) -> int:
    try:
        spec = bench.ExperimentSpec(
            algorithms=args.algorithms, functions=args.functions, runs=args.runs,
            iterations=args.iterations, population=args.population,
            base_seed=args.seed, dimension=args.dimension,
        )
        result = bench.run_experiment(spec, workers=args.workers)
    except ConfigError as exc:
        raise CliError("config", str(exc)) from exc
    try:
        paths = bench.write_csvs(result, args.out_dir)
    except OSError as exc:
        raise CliError("io", f"cannot write to {args.out_dir}: {exc}") from exc
    for name, path in paths.items():
        print(f"{Path(name).stem}_csv={path}")
    for row in result.summary():
        print(" ".join(f"{k}={_fmt(v)}" for k, v in row.items()))
    failed = sum(not r.ok for r in result.records)
    print(f"failed_runs={failed}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(
        prog="stegafly",
        description="Hide encrypted payloads in images and benchmark the placement optimizer.",
    )
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    e = sub.add_parser("embed", help="hide an encrypted payload in a cover image")
    e.add_argument("--cover", required=True, help="PNG or BMP cover image")
    e.add_argument("--payload", required=True, help="file to hide")
    e.add_argument("--out", required=True, help="stego image to write (.png)")
    e.add_argument("--passphrase", help=f"defaults to ${PASSPHRASE_ENV}")
    e.add_argument("--seed", type=_u64, help="fixes the IV and the search")
    e.add_argument("--population", type=_positive, default=engine.DEFAULT_POPULATION,
                   help="optimizer population (even, >= 4)")
    e.add_argument("--iterations", type=_positive, default=engine.DEFAULT_ITERATIONS,
                   help="optimizer iterations")
    e.add_argument("--workers", type=_positive, default=1,
                   help="2+ runs the two groups on threads; output is unchanged")
    e.set_defaults(func=cmd_embed)

    x = sub.add_parser("extract", help="recover a payload from a stego image")
    x.add_argument("--stego", required=True, help="stego PNG")
    x.add_argument("--out", required=True, help="where to write the payload")
    x.add_argument("--passphrase", help=f"defaults to ${PASSPHRASE_ENV}")
    x.set_defaults(func=cmd_extract)

    m = sub.add_parser("metrics", help="compare a cover and a stego image")
    m.add_argument("--cover", required=True)
    m.add_argument("--stego", required=True)
    m.add_argument("--csv", action="store_true", help="print a CSV header and row")
    m.set_defaults(func=cmd_metrics)

    b = sub.add_parser("bench", help="run the FA/DE/HFA benchmark comparison")
    b.add_argument("--algorithms", type=_csv_list, default=list(bench.ALGORITHM_NAMES),
                   help="comma list from " + ",".join(bench.ALGORITHM_NAMES))
    b.add_argument("--functions", type=_csv_list, default=list(bench.FUNCTION_NAMES),
                   help="comma list from " + ",".join(bench.FUNCTION_NAMES))
    b.add_argument("--runs", type=_positive, default=30)
    b.add_argument("--iterations", type=_positive, default=2000)
    b.add_argument("--population", type=_positive, default=40)
    b.add_argument("--dimension", type=_positive, default=30)
    b.add_argument("--seed", type=_u64, default=0)
    b.add_argument("--out-dir", required=True, help="directory for the CSV files")
    b.add_argument("--workers", type=_positive, default=1, help="worker processes")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except CliError as exc:
        print(f"error={exc.code} msg={' '.join(exc.msg.split())}", file=sys.stderr)
        return exc.exit_code
    except Exception as exc:
        print(f"error=runtime msg={type(exc).__name__}: {' '.join(str(exc).split())}",
              file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
