"""Restoration quality metrics: band-wise PSNR/SSIM and pixel-wise spectral angle."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import correlate

from .tensor_ops import validate_cube

PSNR_CAP_DB = 100.0

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


@dataclass(frozen=True)
class MetricsReport:
    """Per-band and aggregate quality figures for one reference/test pair."""

    psnr_per_band: np.ndarray
    ssim_per_band: np.ndarray
    mpsnr: float
    mssim: float
    msam: float  # mean spectral angle over pixels, radians
    sam_min: float
    sam_max: float


def _check_band(ref: np.ndarray, test: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    ref = np.asarray(ref, dtype=np.float64)
    test = np.asarray(test, dtype=np.float64)
    if ref.shape != test.shape:
        raise ValueError(f"shape mismatch: {ref.shape} vs {test.shape}")
    return ref, test


def psnr(ref_band: np.ndarray, test_band: np.ndarray, peak: float = 1.0) -> float:
    """Peak signal-to-noise ratio in dB, capped at 100 dB for exact matches."""
    if peak <= 0:
        raise ValueError(f"peak must be positive, got {peak}")
    ref, test = _check_band(ref_band, test_band)
    mse = float(np.mean((ref - test) ** 2))
    if mse == 0.0:
        return PSNR_CAP_DB
    return min(10.0 * np.log10(peak**2 / mse), PSNR_CAP_DB)


def _gaussian_kernel() -> np.ndarray:
    half = SSIM_WINDOW // 2
    x = np.arange(-half, half + 1, dtype=np.float64)
    g = np.exp(-(x**2) / (2.0 * SSIM_SIGMA**2))
    k = np.outer(g, g)
    return k / k.sum()


def ssim(ref_band: np.ndarray, test_band: np.ndarray, peak: float = 1.0) -> float:
    """Mean local SSIM with an 11x11 Gaussian window (sigma 1.5).

    Local means, variances and the covariance are Gaussian-weighted; only
    windows fully inside the image contribute to the mean.
    """
    ref, test = _check_band(ref_band, test_band)
    if ref.ndim != 2:
        raise ValueError(f"expected 2-D bands, got ndim={ref.ndim}")
    if min(ref.shape) < SSIM_WINDOW:
        raise ValueError(f"bands must be at least {SSIM_WINDOW}x{SSIM_WINDOW}, got {ref.shape}")
    kernel = _gaussian_kernel()
    half = SSIM_WINDOW // 2
    crop = (slice(half, -half), slice(half, -half))

    mu_r = correlate(ref, kernel)[crop]
    mu_t = correlate(test, kernel)[crop]
    e_rr = correlate(ref * ref, kernel)[crop]
    e_tt = correlate(test * test, kernel)[crop]
    e_rt = correlate(ref * test, kernel)[crop]
    var_r = e_rr - mu_r**2
    var_t = e_tt - mu_t**2
    cov = e_rt - mu_r * mu_t

    c1 = (SSIM_K1 * peak) ** 2
    c2 = (SSIM_K2 * peak) ** 2
    ssim_map = ((2.0 * mu_r * mu_t + c1) * (2.0 * cov + c2)) / (
        (mu_r**2 + mu_t**2 + c1) * (var_r + var_t + c2)
    )
    return float(np.mean(ssim_map))


def sam(ref_spectrum: np.ndarray, test_spectrum: np.ndarray) -> float:
    """Spectral angle between two spectra, in radians.

    Computed as ``2*arcsin(|u - v| / 2)`` on the normalized spectra, which is
    exact for identical inputs and well conditioned at small angles.  Two zero
    vectors are assigned angle 0; exactly one zero vector gives pi/2.
    """
    ref, test = _check_band(ref_spectrum, test_spectrum)
    nr = float(np.linalg.norm(ref))
    nt = float(np.linalg.norm(test))
    if nr == 0.0 and nt == 0.0:
        return 0.0
    if nr == 0.0 or nt == 0.0:
        return float(np.pi / 2.0)
    u = ref / nr
    v = test / nt
    chord = min(float(np.linalg.norm(u - v)), 2.0)
    if float(np.dot(u, v)) >= 0.0:
        return float(2.0 * np.arcsin(0.5 * chord))
    anti = min(float(np.linalg.norm(u + v)), 2.0)
    return float(np.pi - 2.0 * np.arcsin(0.5 * anti))


def _sam_map(ref: np.ndarray, test: np.ndarray) -> np.ndarray:
    nr = np.linalg.norm(ref, axis=2)
    nt = np.linalg.norm(test, axis=2)
    safe_r = np.where(nr > 0, nr, 1.0)[:, :, None]
    safe_t = np.where(nt > 0, nt, 1.0)[:, :, None]
    u = ref / safe_r
    v = test / safe_t
    chord = np.minimum(np.linalg.norm(u - v, axis=2), 2.0)
    anti = np.minimum(np.linalg.norm(u + v, axis=2), 2.0)
    obtuse = np.sum(u * v, axis=2) < 0.0
    angles = np.where(
        obtuse, np.pi - 2.0 * np.arcsin(0.5 * anti), 2.0 * np.arcsin(0.5 * chord)
    )
    both_zero = (nr == 0) & (nt == 0)
    one_zero = ((nr == 0) | (nt == 0)) & ~both_zero
    angles[both_zero] = 0.0
    angles[one_zero] = np.pi / 2.0
    return angles


def evaluate(ref: np.ndarray, test: np.ndarray, peak: float = 1.0) -> MetricsReport:
    """Assemble per-band PSNR/SSIM, the pixel-wise spectral-angle summary, and their means."""
    ref = validate_cube(ref, "ref")
    test = validate_cube(test, "test")
    if ref.shape != test.shape:
        raise ValueError(f"shape mismatch: {ref.shape} vs {test.shape}")
    bands = ref.shape[2]
    psnr_pb = np.array([psnr(ref[:, :, b], test[:, :, b], peak) for b in range(bands)])
    ssim_pb = np.array([ssim(ref[:, :, b], test[:, :, b], peak) for b in range(bands)])
    sam_map = _sam_map(ref, test)
    return MetricsReport(
        psnr_per_band=psnr_pb,
        ssim_per_band=ssim_pb,
        mpsnr=float(np.mean(psnr_pb)),
        mssim=float(np.mean(ssim_pb)),
        msam=float(np.mean(sam_map)),
        sam_min=float(np.min(sam_map)),
        sam_max=float(np.max(sam_map)),
    )
