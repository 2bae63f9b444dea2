"""Adaptive estimation of per-direction gradient-prior exponents.

The gradients of a clean cube are modeled as hyper-Laplacian,
``density(x) ~ exp(-k * |x|**p)``, while the observed gradients carry extra
Gaussian noise.  Per direction we (1) estimate the noise scale robustly from
the observed difference field, (2) build a normalized discrete histogram of
the observed gradients, and (3) search (k, p) so that the model histogram
convolved with the noise histogram matches the observed one in least squares.
A small Nelder-Mead simplex does the search; the exponents feed the shrinkage
step of the solver.

Conventions used throughout:

* Differencing i.i.d. noise of standard deviation ``sigma`` yields noise of
  standard deviation ``sigma * sqrt(2)`` in the difference field.
  :func:`estimate_noise_sigma` reports the *original* (image-domain) sigma;
  :func:`fit_direction` takes the sigma of the noise actually present in the
  samples it is given.  :func:`estimate_p` bridges the two.
* Histograms use an odd number of uniform bins symmetric about zero (so zero
  is a bin center) with out-of-range samples clamped into the edge bins.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.special import erf

from .priors import TvWeights, diff_forward
from .tensor_ops import validate_cube

HIST_BINS = 255
HIST_HALF_RANGE = 1.0

FIT_K_BOUNDS = (0.5, 500.0)
FIT_P_BOUNDS = (0.1, 1.0)
FIT_START = (10.0, 0.7)

# MAD of a centered Gaussian is 0.6745 of its standard deviation.
_MAD_TO_SIGMA = 0.6744897501960817


@dataclass(frozen=True)
class Histogram:
    """Normalized histogram on a uniform grid symmetric about zero."""

    edges: np.ndarray
    masses: np.ndarray

    def __post_init__(self) -> None:
        if len(self.edges) != len(self.masses) + 1:
            raise ValueError("edges must have one more entry than masses")
        if len(self.masses) % 2 == 0 or len(self.masses) < 3:
            raise ValueError(f"bin count must be odd and >= 3, got {len(self.masses)}")

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    def same_grid(self, other: "Histogram") -> bool:
        return self.edges.shape == other.edges.shape and np.array_equal(
            self.edges, other.edges
        )


@dataclass(frozen=True)
class DirectionFit:
    """Fitted parameters for one difference direction."""

    sigma: float  # Gaussian noise std in the image domain (intensity units)
    k: float  # hyper-Laplacian scale
    p: float  # hyper-Laplacian exponent, in (0, 1]
    residual: float  # squared histogram mismatch at the optimum


@dataclass(frozen=True)
class HyperLaplacianFit:
    """Per-direction fits for the height, width and band differences."""

    height: DirectionFit
    width: DirectionFit
    band: DirectionFit

    @property
    def p_values(self) -> tuple[float, float, float]:
        return (self.height.p, self.width.p, self.band.p)

    @property
    def sigmas(self) -> tuple[float, float, float]:
        return (self.height.sigma, self.width.sigma, self.band.sigma)


def estimate_noise_sigma(g: np.ndarray) -> float:
    """Robust std estimate of the image-domain Gaussian noise from a difference field.

    MAD/0.6745 estimates the std of the (differenced) noise in ``g``; the
    sqrt(2) factor converts back to the std of the original i.i.d. noise.
    Piecewise-flat image content contributes mostly zero differences, which
    the median absolute deviation ignores.
    """
    g = np.asarray(g, dtype=np.float64)
    if g.size == 0:
        raise ValueError("cannot estimate noise from an empty array")
    flat = g.ravel()
    mad = np.median(np.abs(flat - np.median(flat)))
    return float(mad / _MAD_TO_SIGMA / np.sqrt(2.0))


def histogram(
    values: Sequence[float] | np.ndarray,
    half_range: float = HIST_HALF_RANGE,
    bins: int = HIST_BINS,
) -> Histogram:
    """Normalized histogram of ``values`` on ``[-half_range, half_range]``.

    Samples beyond the range are clamped into the edge bins.
    """
    if half_range <= 0:
        raise ValueError(f"half_range must be positive, got {half_range}")
    if bins < 3 or bins % 2 == 0:
        raise ValueError(f"bins must be odd and >= 3, got {bins}")
    values = np.asarray(values, dtype=np.float64).ravel()
    if values.size == 0:
        raise ValueError("cannot build a histogram from no samples")
    edges = np.linspace(-half_range, half_range, bins + 1)
    clipped = np.clip(values, -half_range, half_range)
    counts, _ = np.histogram(clipped, bins=edges)
    return Histogram(edges, counts / counts.sum())


def hyper_laplacian_histogram(k: float, p: float, template: Histogram) -> Histogram:
    """Model histogram with masses proportional to ``exp(-k*|x|**p)`` at bin centers."""
    if not np.isfinite(k) or k <= 0:
        raise ValueError(f"k must be positive, got {k}")
    if not 0.0 < p <= 1.0:
        raise ValueError(f"p must lie in (0, 1], got {p}")
    masses = np.exp(-k * np.abs(template.centers) ** p)
    return Histogram(template.edges, masses / masses.sum())


def gaussian_histogram(sigma: float, template: Histogram) -> Histogram:
    """Histogram of a centered Gaussian integrated per bin, tails clamped into the edge bins.

    ``sigma=0`` degenerates to a unit mass at the center bin.
    """
    if sigma < 0:
        raise ValueError(f"sigma must be nonnegative, got {sigma}")
    n = len(template.masses)
    if sigma == 0.0:
        masses = np.zeros(n)
        masses[n // 2] = 1.0
        return Histogram(template.edges, masses)
    cdf = 0.5 * (1.0 + erf(template.edges / (sigma * np.sqrt(2.0))))
    cdf[0] = 0.0
    cdf[-1] = 1.0
    return Histogram(template.edges, np.diff(cdf))


def convolve_hist(a: Histogram, b: Histogram) -> Histogram:
    """Discrete convolution of two histograms, truncated to their shared grid."""
    if not a.same_grid(b):
        raise ValueError("histograms must share the same bin grid")
    full = np.convolve(a.masses, b.masses)
    half = (len(a.masses) - 1) // 2
    masses = full[half : half + len(a.masses)]
    return Histogram(a.edges, masses / masses.sum())


def nelder_mead(
    objective: Callable[[np.ndarray], float],
    start: Sequence[float],
    lower: Sequence[float],
    upper: Sequence[float],
    value_tol: float = 1e-8,
    max_iter: int = 500,
) -> tuple[np.ndarray, float]:
    """Nelder-Mead simplex search with box projection.

    Standard coefficients (reflection 1, expansion 2, contraction 0.5, shrink
    0.5); candidate points are clipped into the box before evaluation.  Stops
    when the spread of the simplex values falls below ``value_tol`` or after
    ``max_iter`` iterations.  Returns the best vertex and its value.
    """
    lower = np.asarray(lower, dtype=np.float64)
    upper = np.asarray(upper, dtype=np.float64)
    start = np.asarray(start, dtype=np.float64)
    if np.any(lower >= upper):
        raise ValueError(f"degenerate bounds: lower={lower}, upper={upper}")
    if np.any(start < lower) or np.any(start > upper):
        raise ValueError(f"start {start} outside bounds [{lower}, {upper}]")

    def project(x: np.ndarray) -> np.ndarray:
        return np.clip(x, lower, upper)

    n = len(start)
    sim = [start.copy()]
    for i in range(n):
        v = start.copy()
        v[i] = v[i] * 1.05 if v[i] != 0 else 2.5e-4
        sim.append(project(v))
    fvals = [float(objective(v)) for v in sim]

    for _ in range(max_iter):
        order = np.argsort(fvals, kind="stable")
        sim = [sim[i] for i in order]
        fvals = [fvals[i] for i in order]
        if fvals[-1] - fvals[0] < value_tol:
            break
        centroid = np.mean(sim[:-1], axis=0)
        reflected = project(centroid + (centroid - sim[-1]))
        f_ref = float(objective(reflected))
        if f_ref < fvals[0]:
            expanded = project(centroid + 2.0 * (centroid - sim[-1]))
            f_exp = float(objective(expanded))
            if f_exp < f_ref:
                sim[-1], fvals[-1] = expanded, f_exp
            else:
                sim[-1], fvals[-1] = reflected, f_ref
        elif f_ref < fvals[-2]:
            sim[-1], fvals[-1] = reflected, f_ref
        else:
            contracted = project(centroid + 0.5 * (sim[-1] - centroid))
            f_con = float(objective(contracted))
            if f_con < fvals[-1]:
                sim[-1], fvals[-1] = contracted, f_con
            else:
                best = sim[0]
                for i in range(1, n + 1):
                    sim[i] = project(best + 0.5 * (sim[i] - best))
                    fvals[i] = float(objective(sim[i]))
    i_best = int(np.argmin(fvals))
    return sim[i_best].copy(), fvals[i_best]


def fit_direction(
    y_gradients: np.ndarray,
    sigma: float,
    half_range: float = HIST_HALF_RANGE,
    bins: int = HIST_BINS,
) -> tuple[float, float, float]:
    """Fit (k, p) so the noise-convolved model matches the observed gradient histogram.

    ``sigma`` is the std of the Gaussian noise carried by the samples
    themselves.  The observed histogram is symmetrized before fitting, making
    the result invariant to a global sign flip of the data.  Returns
    ``(k, p, residual)`` with the residual equal to the squared mismatch at
    the returned point.
    """
    if sigma < 0:
        raise ValueError(f"sigma must be nonnegative, got {sigma}")
    h_obs = histogram(y_gradients, half_range=half_range, bins=bins)
    sym = 0.5 * (h_obs.masses + h_obs.masses[::-1])
    h_obs = Histogram(h_obs.edges, sym)
    h_noise = gaussian_histogram(sigma, h_obs)

    def objective(v: np.ndarray) -> float:
        model = convolve_hist(hyper_laplacian_histogram(v[0], v[1], h_obs), h_noise)
        return float(np.sum((h_obs.masses - model.masses) ** 2))

    (k, p), residual = nelder_mead(
        objective,
        FIT_START,
        (FIT_K_BOUNDS[0], FIT_P_BOUNDS[0]),
        (FIT_K_BOUNDS[1], FIT_P_BOUNDS[1]),
    )
    return float(k), float(p), float(residual)


def fit_gradient_field(field: np.ndarray) -> DirectionFit:
    """Estimate the noise scale of one difference field, then fit its (k, p)."""
    sigma = estimate_noise_sigma(field)
    k, p, residual = fit_direction(np.asarray(field).ravel(), sigma * np.sqrt(2.0))
    return DirectionFit(sigma=sigma, k=k, p=p, residual=residual)


def estimate_p(y: np.ndarray) -> HyperLaplacianFit:
    """Fit the three direction exponents from the unweighted circular differences of ``y``."""
    y = validate_cube(y, "y")
    if min(y.shape) < 2:
        raise ValueError(f"every mode must have size >= 2, got shape {y.shape}")
    g = diff_forward(y, TvWeights(1.0, 1.0, 1.0))
    return HyperLaplacianFit(
        height=fit_gradient_field(g.gh),
        width=fit_gradient_field(g.gw),
        band=fit_gradient_field(g.gp),
    )
