"""Embedding and extraction.

Slot space: every channel sample of an ``(H, W, 3)`` cover holds one LSB
slot, numbered in row-major order with R, G, B per pixel, ``N = H*W*3``
slots in total.  Slots ``[0, 240)`` carry the stego header; the remaining
``E = N - 240`` eligible slots carry the ciphertext along an affine scan
``240 + (s + i*t) mod E`` with ``gcd(t, E) = 1``.

The hybrid optimizer searches the two scan parameters (as a point in the
unit square) to maximize the fidelity score of the stego image; the winning
``(s, t)`` travel in the header, so extraction is a direct read.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import codec
from .errors import CapacityError, FormatError
from .images import check_image
from .metrics import (
    DEFAULT_WINDOW,
    QualityReport,
    WindowGrid,
    combine_fitness,
    moments_from_sums,
    psnr_from_mse,
    quality_report,
    ssim_map,
)
from .optimize import DeParams, FireflyParams, HfaConfig, OptimizationTrace, Orientation, hfa_run

HEADER_SLOTS = codec.HEADER_BITS
CIPHER_OVERHEAD = 16
DEFAULT_POPULATION = 40
DEFAULT_ITERATIONS = 200
SEQUENTIAL_SCAN = (0.0, 0.0)


@dataclass(frozen=True)
class PixelPermutation:
    """Affine coprime scan over the eligible slots."""

    start: int
    stride: int
    eligible: int
    length: int

    def __post_init__(self):
        if self.length > self.eligible:
            raise CapacityError(f"{self.length} bits do not fit in {self.eligible} slots")
        if self.eligible and math.gcd(self.stride, self.eligible) != 1:
            raise ValueError(f"stride {self.stride} is not coprime with {self.eligible}")

    def slots(self) -> np.ndarray:
        """Absolute slot indices, in embedding order."""
        i = np.arange(self.length, dtype=np.int64)
        return HEADER_SLOTS + (self.start + i * self.stride) % self.eligible


@dataclass
class EmbedResult:
    stego: np.ndarray
    report: QualityReport
    trace: OptimizationTrace
    header: codec.StegoHeader
    baseline_fitness: float


def total_slots(img) -> int:
    return int(np.asarray(img).size)


def capacity(cover) -> int:
    """Largest plaintext size in bytes that is guaranteed to fit."""
    n = total_slots(check_image(cover))
    if n < HEADER_SLOTS:
        raise CapacityError(f"image has {n} slots, fewer than the {HEADER_SLOTS}-bit header", 0)
    return max(0, (n - HEADER_SLOTS) // 8 - CIPHER_OVERHEAD)


def coprime_at_least(start: int, modulus: int) -> int:
    t = max(1, start)
    while math.gcd(t, modulus) != 1:
        t += 1
    return t


def candidate_to_permutation(x, eligible: int, length: int) -> PixelPermutation:
    """Map a point of the unit square to scan parameters.

    ``s = floor(x0 * E)`` clamped to ``[0, E-1]``; ``t`` is the smallest
    integer ``>= max(1, floor(x1 * E / 2))`` coprime with ``E``.
    """
    s = min(max(int(math.floor(x[0] * eligible)), 0), max(eligible - 1, 0))
    t = coprime_at_least(int(math.floor(x[1] * eligible / 2)), eligible)
    return PixelPermutation(s, t, eligible, length)


def _write_lsbs(flat: np.ndarray, slots: np.ndarray, bits: np.ndarray) -> None:
    flat[slots] = (flat[slots] & 0xFE) | bits


def embed_at(cover, perm: PixelPermutation, bits) -> np.ndarray:
    """Copy of ``cover`` with ``bits`` written into the LSBs of the scan slots."""
    cover = check_image(cover)
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.shape != (perm.length,):
        raise ValueError(f"expected {perm.length} bits, got {bits.shape}")
    if perm.eligible + HEADER_SLOTS != cover.size:
        raise ValueError("permutation was built for a different image size")
    out = cover.copy()
    _write_lsbs(out.reshape(-1), perm.slots(), bits)
    return out


class PlacementFitness:
    """Fitness of embedding a fixed bitstream along a candidate scan.

    Equivalent to ``fitness_z(cover, embed_at(cover, perm(x), bits))`` but
    computed from per-window sum updates: writing one LSB moves a sample
    by -1, 0 or +1, so only the touched windows' sums change.  Scores are
    memoized per ``(start, stride)``.
    """

    def __init__(self, cover, bits, window: int = DEFAULT_WINDOW, cache_size: int = 8192):
        cover = check_image(cover)
        h, w, c = cover.shape
        self.flat = cover.reshape(-1)
        self.bits = np.asarray(bits, dtype=np.uint8)
        self.total = cover.size
        self.eligible = self.total - HEADER_SLOTS
        self.length = self.bits.size
        grid = WindowGrid(h, w, window)
        nw = grid.shape[0] * grid.shape[1]
        self.channels = c
        self.window_of = (grid.window_index()[:, :, None] + np.arange(c) * nw).reshape(-1)
        self.nwin = nw * c
        u = np.moveaxis(cover, -1, 0).astype(np.float64)
        self.counts = np.tile(grid.counts.reshape(-1), c)
        self.su = grid.sums(u).reshape(-1)
        self.suu = grid.sums(u * u).reshape(-1)
        self.score = lru_cache(maxsize=cache_size)(self._score)

    def permutation(self, x) -> PixelPermutation:
        return candidate_to_permutation(x, self.eligible, self.length)

    def __call__(self, x) -> float:
        p = self.permutation(x)
        return self.score(p.start, p.stride)

    def _score(self, start: int, stride: int) -> float:
        slots = PixelPermutation(start, stride, self.eligible, self.length).slots()
        u = self.flat[slots]
        delta = ((u & 0xFE) | self.bits).astype(np.int16) - u
        hit = delta != 0
        win = self.window_of[slots[hit]]
        d = delta[hit].astype(np.float64)
        ud = u[hit] * d
        k = self.nwin
        sd = np.bincount(win, weights=d, minlength=k)
        sud = np.bincount(win, weights=ud, minlength=k)
        sdd = np.bincount(win, minlength=k).astype(np.float64)  # d*d == 1
        sv = self.su + sd
        svv = self.suu + 2 * sud + sdd
        suv = self.suu + sud
        st = moments_from_sums(self.counts, self.su, sv, self.suu, svv, suv)
        per_window = ssim_map(st).reshape(self.channels, -1)
        ssim_value = float(np.mean([float(np.mean(row)) for row in per_window]))
        mse_value = int(np.count_nonzero(hit)) / self.total
        return combine_fitness(ssim_value, psnr_from_mse(mse_value))


def _seed_int(ss: np.random.SeedSequence) -> int:
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def embed(
    cover,
    payload: bytes,
    passphrase: str,
    *,
    population_size: int = DEFAULT_POPULATION,
    max_iterations: int = DEFAULT_ITERATIONS,
    seed: int | None = None,
    workers: int = 1,
    firefly: FireflyParams | None = None,
    de: DeParams | None = None,
) -> EmbedResult:
    """Encrypt ``payload`` and hide it in ``cover`` at an optimized placement.

    The sequential scan ``(s=0, t=1)`` is injected into the initial
    population, so the chosen placement never scores below it.
    """
    cover = check_image(cover)
    if not payload:
        raise ValueError("payload must be non-empty")
    cap = capacity(cover)
    if len(payload) > cap:
        raise CapacityError(
            f"payload of {len(payload)} bytes exceeds capacity of {cap} bytes", cap
        )
    iv_ss, opt_ss = np.random.SeedSequence(seed).spawn(2)
    cp = codec.encrypt_payload(payload, passphrase, np.random.default_rng(iv_ss))
    bits = codec.bytes_to_bits(cp.ciphertext)

    objective = PlacementFitness(cover, bits)
    config = HfaConfig(
        dimension=2,
        bounds=[[0.0, 1.0], [0.0, 1.0]],
        population_size=population_size,
        max_iterations=max_iterations,
        rng_seed=_seed_int(opt_ss),
        firefly=firefly or FireflyParams(),
        de=de or DeParams(),
        orientation=Orientation.MAXIMIZE,
    )
    trace = hfa_run(config, objective, initial=[SEQUENTIAL_SCAN], workers=workers)
    perm = objective.permutation(trace.best_solution.position)

    header = codec.StegoHeader(
        payload_len=len(cp.ciphertext),
        scan_start=perm.start,
        scan_stride=perm.stride,
        iv=cp.iv,
        crc32=cp.crc32,
    )
    stego = cover.copy()
    flat = stego.reshape(-1)
    _write_lsbs(flat, np.arange(HEADER_SLOTS), codec.serialize_header(header))
    _write_lsbs(flat, perm.slots(), bits)
    return EmbedResult(
        stego=stego,
        report=quality_report(cover, stego),
        trace=trace,
        header=header,
        baseline_fitness=objective(SEQUENTIAL_SCAN),
    )


def read_header(stego) -> codec.StegoHeader:
    stego = check_image(stego)
    if stego.size <= HEADER_SLOTS:
        raise FormatError("not a stego image: too small to hold a header")
    return codec.parse_header(stego.reshape(-1)[:HEADER_SLOTS] & 1)


def extract_bits(stego, header: codec.StegoHeader) -> np.ndarray:
    """Ciphertext bits along the scan described by ``header``."""
    stego = check_image(stego)
    eligible = stego.size - HEADER_SLOTS
    length = header.payload_len * 8
    if (
        length > eligible
        or header.scan_start >= eligible
        or header.scan_stride < 1
        or math.gcd(header.scan_stride, eligible) != 1
    ):
        raise FormatError("not a stego image: header placement is inconsistent with image size")
    perm = PixelPermutation(header.scan_start, header.scan_stride, eligible, length)
    return stego.reshape(-1)[perm.slots()] & 1


def extract(stego, passphrase: str) -> bytes:
    """Recover the payload hidden by :func:`embed`."""
    stego = check_image(stego)
    header = read_header(stego)
    bits = extract_bits(stego, header)
    cp = codec.CipherPayload(codec.bits_to_bytes(bits), header.iv, header.crc32)
    return codec.decrypt_payload(cp, passphrase)
