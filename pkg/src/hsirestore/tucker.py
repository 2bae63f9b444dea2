"""Fixed-rank Tucker approximation by higher-order orthogonal iteration.

The solver re-enters this fit on every outer iteration (once for the image
estimate, once for the stripe estimate), so the default inner budget is
deliberately small: a truncated-HOSVD start followed by a few alternating
sweeps is accurate enough and keeps the outer loop cheap.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tensor_ops import (
    fro_norm,
    leading_left_singular_vectors,
    mode_product,
    multi_mode_product,
    unfold,
)


@dataclass(frozen=True)
class TuckerRanks:
    """Target multilinear rank, one entry per mode."""

    r1: int
    r2: int
    r3: int

    def __post_init__(self) -> None:
        for r in self.as_tuple():
            if int(r) != r or r < 1:
                raise ValueError(f"ranks must be positive integers, got {self.as_tuple()}")

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.r1, self.r2, self.r3)

    def validate_for(self, shape: tuple[int, int, int]) -> None:
        for r, d in zip(self.as_tuple(), shape):
            if r > d:
                raise ValueError(f"rank {self.as_tuple()} exceeds tensor shape {shape}")


def feasible_ranks(ranks: TuckerRanks, shape: tuple[int, int, int]) -> TuckerRanks:
    """Clamp a rank triple to a consistent multilinear rank.

    Each mode rank can never exceed the product of the other two (nor its own
    dimension); the approximation sets of the requested and clamped triples
    are identical.
    """
    r = [min(rk, d) for rk, d in zip(ranks.as_tuple(), shape)]
    changed = True
    while changed:
        changed = False
        for n in range(3):
            cap = r[(n + 1) % 3] * r[(n + 2) % 3]
            if r[n] > cap:
                r[n] = cap
                changed = True
    return TuckerRanks(*r)


@dataclass
class TuckerFactors:
    """Core tensor plus three column-orthonormal factor matrices."""

    core: np.ndarray
    factors: tuple[np.ndarray, np.ndarray, np.ndarray]


def reconstruct(f: TuckerFactors) -> np.ndarray:
    """Expand ``core x1 F1 x2 F2 x3 F3`` back to a full cube."""
    core = np.asarray(f.core)
    if core.ndim != 3 or len(f.factors) != 3:
        raise ValueError("expected a 3-D core and three factor matrices")
    for i, m in enumerate(f.factors):
        if m.ndim != 2 or m.shape[1] != core.shape[i]:
            raise ValueError(
                f"factor {i + 1} of shape {m.shape} does not match core shape {core.shape}"
            )
    out = core
    for i, m in enumerate(f.factors):
        out = mode_product(out, m, i + 1)
    return out


def hosvd_init(t: np.ndarray, ranks: TuckerRanks) -> TuckerFactors:
    """Truncated HOSVD: per-mode leading singular vectors and the induced core."""
    t = np.asarray(t, dtype=np.float64)
    ranks.validate_for(t.shape)
    factors = tuple(
        leading_left_singular_vectors(unfold(t, n), r)
        for n, r in zip((1, 2, 3), ranks.as_tuple())
    )
    core = multi_mode_product(t, factors, transpose=True)
    return TuckerFactors(core, factors)


def hooi(
    t: np.ndarray,
    ranks: TuckerRanks,
    max_iter: int = 10,
    tol: float = 1e-4,
    return_errors: bool = False,
):
    """Alternating HOOI sweeps from a truncated-HOSVD start.

    Each sweep replaces every factor with the leading left singular vectors of
    the tensor contracted with the other two factors, so the reconstruction
    error is non-increasing and never exceeds the HOSVD error.  Stops when the
    relative change of the error drops below ``tol`` or after ``max_iter``
    sweeps.

    Returns the fitted :class:`TuckerFactors`; with ``return_errors=True``
    also returns the per-sweep reconstruction errors (HOSVD error first).
    """
    t = np.asarray(t, dtype=np.float64)
    if max_iter < 1:
        raise ValueError(f"max_iter must be >= 1, got {max_iter}")
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    ranks.validate_for(t.shape)
    ranks = feasible_ranks(ranks, t.shape)
    fit = hosvd_init(t, ranks)
    factors = list(fit.factors)
    norm_t = fro_norm(t)
    errors = [fro_norm(t - reconstruct(fit))]
    for _ in range(max_iter):
        for n in range(3):
            others = [(m + 1, factors[m]) for m in range(3) if m != n]
            y = t
            for mode, fac in others:
                y = mode_product(y, fac.T, mode)
            factors[n] = leading_left_singular_vectors(unfold(y, n + 1), ranks.as_tuple()[n])
        core = multi_mode_product(t, tuple(factors), transpose=True)
        fit = TuckerFactors(core, tuple(factors))
        err = fro_norm(t - reconstruct(fit))
        prev = errors[-1]
        errors.append(err)
        if err <= 1e-13 * norm_t:
            break
        if abs(prev - err) < tol * max(prev, 1e-300):
            break
    if return_errors:
        return fit, errors
    return fit
