"""Acceptance criteria, one PASS/FAIL line per criterion.

Lines are collected in ``conftest.ACCEPTANCE_LINES`` and printed in the
terminal summary.  ``STEGAFLY_FULL_PROTOCOL=1`` additionally runs the
full-scale benchmark protocol (slow: roughly an hour on one core).
"""

import math
import os
import time

import numpy as np
import pytest

from stegafly import bench, codec, engine, metrics
from stegafly.errors import CorruptionError
from stegafly.optimize import DeParams, HfaConfig, Orientation, de_generation, de_run
from stegafly.optimize.hybrid import ALGORITHMS

from conftest import random_image
from de_trace import (
    EXPECTED_EVENTS,
    EXPECTED_FITNESS,
    EXPECTED_POPULATIONS,
    INITIAL,
    SCRIPT,
    ScriptedRng,
    sphere,
)
from test_codec import BLOWFISH_VECTORS

LSB_PSNR_FLOOR = 48.1308
ROUNDTRIP_TRIALS = 100
ROUNDTRIP_BUDGET = dict(population_size=8, max_iterations=10)


def _record(log, number, name, ok, detail):
    log.append(f"[{'PASS' if ok else 'FAIL'}] {number}. {name}: {detail}")
    assert ok, detail


@pytest.fixture(scope="module")
def roundtrip_trials():
    """Shared randomized embed/extract trials for criteria 1, 2 and 8."""
    rng = np.random.default_rng(20240601)
    trials = []
    t0 = time.perf_counter()
    for _ in range(ROUNDTRIP_TRIALS):
        h, w = (int(v) for v in rng.integers(64, 513, size=2))
        cover = random_image(rng, h, w)
        cap = engine.capacity(cover)
        payload = rng.bytes(int(rng.integers(1, cap // 2 + 1)))
        passphrase = rng.bytes(12).hex()
        seed = int(rng.integers(0, 2**63))
        res = engine.embed(cover, payload, passphrase, seed=seed, **ROUNDTRIP_BUDGET)
        trials.append(dict(cover=cover, payload=payload, passphrase=passphrase, result=res,
                           recovered=engine.extract(res.stego, passphrase)))
    return trials, time.perf_counter() - t0


@pytest.mark.slow
def test_criterion_1_roundtrip(roundtrip_trials, acceptance_log):
    trials, elapsed = roundtrip_trials
    failures = sum(t["recovered"] != t["payload"] for t in trials)
    ok = failures == 0 and len(trials) == ROUNDTRIP_TRIALS and elapsed <= 600
    _record(acceptance_log, 1, "roundtrip exactness", ok,
            f"{len(trials)} trials, {failures} failures, {elapsed:.1f}s (limit 600s)")


@pytest.mark.slow
def test_criterion_2_distortion_floor(roundtrip_trials, acceptance_log):
    trials, _ = roundtrip_trials
    worst_psnr, bad = math.inf, 0
    for t in trials:
        cover, stego = t["cover"], t["result"].stego
        p = metrics.psnr(cover, stego)
        L = codec.HEADER_BITS + 8 * t["result"].header.payload_len
        worst_psnr = min(worst_psnr, p)
        if not (p >= LSB_PSNR_FLOOR and metrics.mse(cover, stego) <= L / cover.size):
            bad += 1
    _record(acceptance_log, 2, "analytic distortion floor", bad == 0,
            f"{bad} violations, min psnr {worst_psnr:.4f} dB (floor {LSB_PSNR_FLOOR})")


def test_criterion_3_metric_identities(acceptance_log):
    rng = np.random.default_rng(3)
    problems = []
    for _ in range(10):
        a = random_image(rng, int(rng.integers(8, 80)), int(rng.integers(8, 80)))
        if metrics.mse(a, a) != 0.0:
            problems.append("mse(a,a)")
        if metrics.psnr(a, a) != 100.0:
            problems.append("psnr cap")
        if abs(metrics.ssim(a, a) - 1.0) > 1e-12:
            problems.append("ssim(a,a)")
        if metrics.fitness_z(a, a) != 1.0:
            problems.append("fitness_z(a,a)")
    worst = 0.0
    for _ in range(50):
        h, w = int(rng.integers(8, 80)), int(rng.integers(8, 80))
        a, b = random_image(rng, h, w), random_image(rng, h, w)
        worst = max(worst, abs(metrics.ssim(a, b) - metrics.ssim(b, a)))
    if worst > 1e-12:
        problems.append("ssim symmetry")
    _record(acceptance_log, 3, "metric identities", not problems,
            f"failed: {problems}" if problems else f"all hold, max ssim asymmetry {worst:.1e}")


def _hand_trace_ok():
    pos = np.array(INITIAL)
    fit = np.array([sphere(p) for p in pos])
    params = DeParams(f_scale=0.5, crossover_rate=0.5)
    bounds = np.array([[-10.0, 10.0]] * 2)
    for g, events in enumerate(SCRIPT):
        log = []
        rng = ScriptedRng(events)
        pos, fit, _ = de_generation(pos, fit, range(4), sphere, rng, params=params,
                                    bounds=bounds, orientation=Orientation.MINIMIZE,
                                    generation=g, recorder=log.append)
        for ev, (mutant, trial, accepted) in zip(log, EXPECTED_EVENTS[g]):
            if not (np.array_equal(ev.mutant, mutant) and np.array_equal(ev.trial, trial)
                    and ev.accepted == accepted):
                return False
        if not (rng.exhausted() and np.array_equal(pos, EXPECTED_POPULATIONS[g])
                and np.array_equal(fit, EXPECTED_FITNESS[g])):
            return False
    return True


def _monotone_violations():
    bad = 0
    for fn in bench.standard_suite(10):
        for name, run in ALGORITHMS.items():
            for seed in range(30):
                cfg = HfaConfig(dimension=fn.dimension, bounds=fn.bounds, population_size=10,
                                max_iterations=40, rng_seed=seed)
                trace = run(cfg, fn)
                h = np.array(trace.best_per_iteration)
                if np.any(np.diff(h) > 0) or h[0] > trace.initial_best:
                    bad += 1
    return bad


class _EventAudit:
    def __init__(self, n):
        self.n, self.events, self.violations = n, 0, 0

    def __call__(self, ev):
        self.events += 1
        r = set(ev.donors)
        ok = (len(r) == 3 and ev.target not in r and all(0 <= i < self.n for i in r)
              and ev.mask[ev.forced_index]
              and ev.trial[ev.forced_index] == ev.mutant[ev.forced_index]
              and np.array_equal(ev.trial, np.where(ev.mask, ev.mutant, ev.target_position)))
        self.violations += not ok


@pytest.mark.slow
def test_criterion_4_optimizer_oracles(acceptance_log):
    hand = _hand_trace_ok()
    mono_bad = _monotone_violations()
    audit = _EventAudit(40)
    cfg = HfaConfig(dimension=10, bounds=[-5.12, 5.12], population_size=40,
                    max_iterations=2500, rng_seed=4)
    de_run(cfg, bench.rastrigin, recorder=audit)
    ok = hand and mono_bad == 0 and audit.events >= 10**5 and audit.violations == 0
    _record(acceptance_log, 4, "optimizer oracles", ok,
            f"(a) hand trace {'ok' if hand else 'MISMATCH'}; (b) {mono_bad} non-monotone traces "
            f"of 360; (c) {audit.violations} violations in {audit.events} DE events")


@pytest.mark.slow
def test_criterion_5_protocol_smoke(tmp_path, acceptance_log):
    spec = bench.ExperimentSpec(runs=5, iterations=200, population=20, dimension=30, base_seed=5)
    t0 = time.perf_counter()
    result = bench.run_experiment(spec)
    paths = bench.write_csvs(result, tmp_path)
    elapsed = time.perf_counter() - t0
    summary = result.summary()
    n_conv = len(paths["convergence.csv"].read_text().splitlines()) - 1
    complete = (
        all(r.ok for r in result.records)
        and len(summary) == 12
        and all(not math.isnan(row["mean_final"]) for row in summary)
        and n_conv == 12 * 5 * 200
    )
    means = {(r["algorithm"], r["function"]): r["mean_final"] for r in summary}
    wins = [f for f in spec.functions
            if means["HFA", f] <= min(means["FA", f], means["DE", f])]
    _record(acceptance_log, 5, "protocol smoke run", complete and elapsed <= 300,
            f"{len(result.records)} runs, csv complete={complete}, {elapsed:.1f}s (limit 300s); "
            f"soft: HFA <= min(FA, DE) on {len(wins)}/4 {wins}")


@pytest.mark.full_protocol
@pytest.mark.skipif(os.environ.get("STEGAFLY_FULL_PROTOCOL") != "1",
                    reason="set STEGAFLY_FULL_PROTOCOL=1 to run the full-scale protocol")
def test_criterion_5_full_protocol(tmp_path, acceptance_log):
    out = os.environ.get("STEGAFLY_PROTOCOL_OUT") or tmp_path
    spec = bench.ExperimentSpec(runs=30, iterations=2000, population=40, dimension=30)
    result = bench.run_experiment(spec, workers=os.cpu_count() or 1)
    bench.write_csvs(result, out)
    means = {(r["algorithm"], r["function"]): r["mean_final"] for r in result.summary()}
    wins = [f for f in spec.functions
            if means["HFA", f] <= min(means["FA", f], means["DE", f])]
    complete = all(r.ok for r in result.records)
    _record(acceptance_log, "5*", "full protocol", complete,
            f"{len(result.records)} runs, csv in {out}; soft: HFA <= min(FA, DE) on {len(wins)}/4")


@pytest.mark.slow
def test_criterion_6_determinism(acceptance_log):
    rng = np.random.default_rng(6)
    embed_diff = bench_diff = 0
    for trial in range(10):
        cover = random_image(rng, int(rng.integers(64, 129)), int(rng.integers(64, 129)))
        payload = rng.bytes(int(rng.integers(1, 400)))
        a = engine.embed(cover, payload, "pw", seed=trial, population_size=8,
                         max_iterations=8, workers=1)
        b = engine.embed(cover, payload, "pw", seed=trial, population_size=8,
                         max_iterations=8, workers=4)
        embed_diff += not (np.array_equal(a.stego, b.stego)
                           and a.trace.best_per_iteration == b.trace.best_per_iteration)
        spec = bench.ExperimentSpec(runs=2, iterations=5, population=6, dimension=5,
                                    base_seed=trial)
        r1, r4 = bench.run_experiment(spec, 1), bench.run_experiment(spec, 4)
        bench_diff += any(render(r1) != render(r4) for render in bench.CSV_FILES.values())
    _record(acceptance_log, 6, "determinism under concurrency", embed_diff == bench_diff == 0,
            f"10 trials each at 1 vs 4 workers: {embed_diff} embed and {bench_diff} bench mismatches")


def test_criterion_7_codec_oracles(acceptance_log):
    vec_bad = sum(
        codec.cbc_encrypt(bytes.fromhex(k), bytes(8), bytes.fromhex(p)).hex().upper() != c
        for k, p, c in BLOWFISH_VECTORS
    )
    rng = np.random.default_rng(7)
    hdr_bad = 0
    for _ in range(10**4):
        h = codec.StegoHeader(
            payload_len=int(rng.integers(1, 2**32)),
            scan_start=int(rng.integers(0, 2**32)),
            scan_stride=int(rng.integers(1, 2**32)),
            iv=rng.bytes(8),
            crc32=int(rng.integers(0, 2**32)),
        )
        hdr_bad += codec.parse_header(codec.serialize_header(h)) != h
    misses = 0
    for _ in range(10**4):
        ct = rng.bytes(8 * int(rng.integers(1, 64)))
        iv = rng.bytes(8)
        crc = codec.crc32(ct)
        bit = int(rng.integers(len(ct) * 8))
        bad = bytearray(ct)
        bad[bit // 8] ^= 0x80 >> (bit % 8)
        try:
            codec.decrypt_payload(codec.CipherPayload(bytes(bad), iv, crc), "pw")
            misses += 1
        except CorruptionError:
            pass
        except Exception:
            misses += 1
    ok = vec_bad == 0 and hdr_bad == 0 and misses == 0
    _record(acceptance_log, 7, "codec oracles", ok,
            f"{len(BLOWFISH_VECTORS) - vec_bad}/{len(BLOWFISH_VECTORS)} Blowfish vectors, "
            f"{hdr_bad} header mismatches in 10^4, {misses} CRC misses in 10^4")


def _baseline_stego(cover, result):
    h = result.header
    base = codec.StegoHeader(h.payload_len, 0, 1, h.iv, h.crc32)
    perm = engine.PixelPermutation(0, 1, cover.size - codec.HEADER_BITS, 8 * h.payload_len)
    flat = engine.embed_at(cover, perm, engine.extract_bits(result.stego, h)).reshape(-1)
    flat[: codec.HEADER_BITS] = (flat[: codec.HEADER_BITS] & 0xFE) | codec.serialize_header(base)
    return flat.reshape(cover.shape)


@pytest.mark.slow
def test_criterion_8_baseline_dominance(roundtrip_trials, acceptance_log):
    trials, _ = roundtrip_trials
    below = below_full = 0
    for t in trials:
        res = t["result"]
        below += res.trace.best_solution.fitness < res.baseline_fitness
        full_base = metrics.fitness_z(t["cover"], _baseline_stego(t["cover"], res))
        below_full += res.report.fitness_z < full_base
    _record(acceptance_log, 8, "baseline dominance", below == 0 and below_full == 0,
            f"{below} placements below the sequential scan (objective), "
            f"{below_full} below it on the whole stego image, over {len(trials)} trials")
