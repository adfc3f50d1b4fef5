"""Image fidelity metrics between a cover and a stego image.

Images are ``uint8`` arrays of shape ``(H, W)`` or ``(H, W, C)``.  SSIM and
the Q index are computed on non-overlapping square windows per channel
(trailing partial windows keep their actual size), averaged per channel and
then across channels.  Window statistics use population (1/n) moments and
are formed from exact integer sums, so identical inputs give exactly 1.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import ConfigError, ShapeError, UndefinedMetricError

MAX_VALUE = 255
PSNR_CAP = 100.0
FITNESS_WEIGHT = 0.5
DEFAULT_WINDOW = 8
C1 = (0.01 * MAX_VALUE) ** 2
C2 = (0.03 * MAX_VALUE) ** 2
# 20*log10(255): PSNR lower bound for any 1-LSB embedding (MSE <= 1)
LSB_PSNR_FLOOR = 20 * math.log10(MAX_VALUE)


@dataclass
class SsimWindowStats:
    """Per-window moments for one channel; each field is a 2-D array."""

    mean_u: np.ndarray
    mean_v: np.ndarray
    var_u: np.ndarray
    var_v: np.ndarray
    cov_uv: np.ndarray
    c1: float = C1
    c2: float = C2


@dataclass
class QualityReport:
    mse: float
    psnr_db: float
    ssim: float
    q_index: float
    fitness_z: float

    def as_dict(self) -> dict:
        return asdict(self)


def _pair(cover, stego):
    a = np.asarray(cover)
    b = np.asarray(stego)
    if a.shape != b.shape:
        raise ShapeError(f"image shapes differ: {a.shape} vs {b.shape}")
    if a.size == 0:
        raise ShapeError("empty image")
    return a, b


def _channels(a: np.ndarray) -> np.ndarray:
    """View as ``(C, H, W)`` float64."""
    if a.ndim == 2:
        return a[np.newaxis].astype(np.float64)
    if a.ndim == 3:
        return np.moveaxis(a, -1, 0).astype(np.float64)
    raise ShapeError(f"expected a 2-D or 3-D image, got {a.ndim} dimensions")


def mse(cover, stego) -> float:
    """Mean squared difference over every channel sample."""
    a, b = _pair(cover, stego)
    diff = a.astype(np.float64) - b.astype(np.float64)
    return float(np.mean(diff * diff))


def psnr_from_mse(value: float, max_value: int = MAX_VALUE) -> float:
    if value == 0:
        return PSNR_CAP
    return 20 * math.log10(max_value) - 10 * math.log10(value)


def psnr(cover, stego, max_value: int = MAX_VALUE) -> float:
    """Peak signal-to-noise ratio in dB, capped at 100 dB for identical images."""
    return psnr_from_mse(mse(cover, stego), max_value)


class WindowGrid:
    """Non-overlapping ``window x window`` tiling of an ``(H, W)`` plane."""

    def __init__(self, height: int, width: int, window: int = DEFAULT_WINDOW):
        if window < 2:
            raise ConfigError(f"window must be >= 2, got {window}")
        if window > height or window > width:
            raise ConfigError(f"window {window} larger than image {height}x{width}")
        self.height, self.width, self.window = height, width, window
        self.row_starts = np.arange(0, height, window)
        self.col_starts = np.arange(0, width, window)
        rows = np.minimum(self.row_starts + window, height) - self.row_starts
        cols = np.minimum(self.col_starts + window, width) - self.col_starts
        self.counts = np.outer(rows, cols).astype(np.float64)

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.row_starts), len(self.col_starts)

    def sums(self, plane: np.ndarray) -> np.ndarray:
        """Block sums of a 2-D array (or a stack ``(C, H, W)``)."""
        s = np.add.reduceat(plane, self.row_starts, axis=-2)
        return np.add.reduceat(s, self.col_starts, axis=-1)

    def window_index(self) -> np.ndarray:
        """Flat window id of every pixel, shape ``(H, W)``."""
        r = np.arange(self.height) // self.window
        c = np.arange(self.width) // self.window
        return r[:, None] * len(self.col_starts) + c[None, :]


def moments_from_sums(n, su, sv, suu, svv, suv) -> SsimWindowStats:
    """Window moments from raw sums; exact for integer-valued data."""
    n2 = n * n
    return SsimWindowStats(
        mean_u=su / n,
        mean_v=sv / n,
        var_u=(n * suu - su * su) / n2,
        var_v=(n * svv - sv * sv) / n2,
        cov_uv=(n * suv - su * sv) / n2,
    )


def ssim_map(st: SsimWindowStats) -> np.ndarray:
    num = (2 * st.mean_u * st.mean_v + st.c1) * (2 * st.cov_uv + st.c2)
    den = (st.mean_u * st.mean_u + st.mean_v * st.mean_v + st.c1) * (st.var_u + st.var_v + st.c2)
    return num / den


def window_stats(cover, stego, window: int = DEFAULT_WINDOW) -> list[SsimWindowStats]:
    """Per-channel window moments of an image pair."""
    a, b = _pair(cover, stego)
    u, v = _channels(a), _channels(b)
    grid = WindowGrid(u.shape[1], u.shape[2], window)
    n = grid.counts
    su, sv = grid.sums(u), grid.sums(v)
    suu, svv, suv = grid.sums(u * u), grid.sums(v * v), grid.sums(u * v)
    return [
        moments_from_sums(n, su[c], sv[c], suu[c], svv[c], suv[c])
        for c in range(u.shape[0])
    ]


def ssim(cover, stego, window: int = DEFAULT_WINDOW) -> float:
    """Mean structural similarity over non-overlapping windows and channels."""
    per_channel = [float(np.mean(ssim_map(st))) for st in window_stats(cover, stego, window)]
    return float(np.mean(per_channel))


def q_index_detail(cover, stego, window: int = DEFAULT_WINDOW) -> tuple[float, int]:
    """Universal quality index and the number of windows skipped.

    Windows whose denominator ``(mu_u^2 + mu_v^2)(var_u + var_v)`` is zero are
    skipped.  Raises :class:`UndefinedMetricError` when every window is.
    """
    channel_means = []
    skipped = 0
    for st in window_stats(cover, stego, window):
        den = (st.mean_u**2 + st.mean_v**2) * (st.var_u + st.var_v)
        ok = den != 0
        skipped += int(np.count_nonzero(~ok))
        if np.any(ok):
            q = 4 * st.cov_uv[ok] * st.mean_u[ok] * st.mean_v[ok] / den[ok]
            channel_means.append(float(np.mean(q)))
    if not channel_means:
        raise UndefinedMetricError("Q index undefined: every window has zero variance or mean")
    return float(np.mean(channel_means)), skipped


def q_index(cover, stego, window: int = DEFAULT_WINDOW) -> float:
    return q_index_detail(cover, stego, window)[0]


def combine_fitness(ssim_value: float, psnr_db: float, weight: float = FITNESS_WEIGHT) -> float:
    """``weight * ssim + (1 - weight) * psnr / 100``."""
    return weight * ssim_value + (1 - weight) * psnr_db / 100


def fitness_z(cover, stego, window: int = DEFAULT_WINDOW) -> float:
    return combine_fitness(ssim(cover, stego, window), psnr(cover, stego))


def quality_report(cover, stego, window: int = DEFAULT_WINDOW) -> QualityReport:
    """All metrics at once; ``q_index`` is NaN when undefined."""
    m = mse(cover, stego)
    p = psnr_from_mse(m)
    s = ssim(cover, stego, window)
    try:
        q = q_index(cover, stego, window)
    except UndefinedMetricError:
        q = math.nan
    return QualityReport(m, p, s, q, combine_fitness(s, p))
