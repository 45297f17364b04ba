"""Additive Gaussian noise with the SSIM level as the controlled variable.

Each cell gets a fixed unit-variance noise pattern (one per image drawn
from a seeded counter-based generator); only the amplitude is tuned. Mean
SSIM against the originals decreases monotonically in the amplitude, so a
bracketing bisection lands the measured mean within the inner tolerance.
Images are clipped back to [0, 1] after perturbation.
"""

from __future__ import annotations

import hashlib

import numpy as np
from skimage.metrics import structural_similarity

WIN_SIZE = 7  # largest odd window that fits the 8x8 digit images
INNER_TOL = 0.005
MAX_AMPLITUDE = 16.0


class SsimUnreachable(RuntimeError):
    """Amplitude search failed to bracket or reach the target mean SSIM."""


def cell_rng(seed: int, tag: str) -> np.random.Generator:
    digest = hashlib.sha256(f"{seed}/{tag}".encode("utf-8")).digest()[:16]
    return np.random.Generator(np.random.Philox(key=np.frombuffer(digest, np.uint64)))


def mean_ssim(originals: np.ndarray, perturbed: np.ndarray) -> float:
    scores = [
        structural_similarity(o, p, data_range=1.0, win_size=WIN_SIZE)
        for o, p in zip(originals, perturbed)
    ]
    return float(np.mean(scores))


def _apply(images: np.ndarray, pattern: np.ndarray, amplitude: float) -> np.ndarray:
    return np.clip(images + amplitude * pattern, 0.0, 1.0)


def perturb_to_ssim(
    images: np.ndarray, target: float, rng: np.random.Generator
) -> tuple[np.ndarray, float, float]:
    """Return (noisy images, achieved mean SSIM, amplitude).

    target = 1.0 means no perturbation (identity, SSIM exactly 1).
    """
    if target >= 1.0:
        return images.copy(), 1.0, 0.0
    pattern = rng.standard_normal(images.shape)

    lo, lo_ssim = 0.0, 1.0
    hi = 0.05
    hi_ssim = mean_ssim(images, _apply(images, pattern, hi))
    while hi_ssim > target:
        hi *= 2.0
        if hi > MAX_AMPLITUDE:
            raise SsimUnreachable(
                f"amplitude {hi:.1f} still above target {target} (mean {hi_ssim:.3f})"
            )
        hi_ssim = mean_ssim(images, _apply(images, pattern, hi))

    for _ in range(60):
        mid = (lo + hi) / 2.0
        mid_ssim = mean_ssim(images, _apply(images, pattern, mid))
        if abs(mid_ssim - target) <= INNER_TOL:
            return _apply(images, pattern, mid), mid_ssim, mid
        if mid_ssim > target:
            lo, lo_ssim = mid, mid_ssim
        else:
            hi, hi_ssim = mid, mid_ssim
    # brackets collapsed without meeting the inner tolerance
    for amp, ssim in ((lo, lo_ssim), (hi, hi_ssim)):
        if abs(ssim - target) <= INNER_TOL:
            return _apply(images, pattern, amp), ssim, amp
    raise SsimUnreachable(
        f"bisection stalled at [{lo:.4f}, {hi:.4f}] around target {target}"
    )
