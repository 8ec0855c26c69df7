"""Numerical substrate: PD factorization with jitter recovery, linear
solves, finite-difference Hessians, normal quantiles/CDF, and the
deterministic random-stream contract used by every stochastic operation.

All functions are pure; returned arrays are fresh and safe to share.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import ndtr, ndtri

from .errors import (
    DimensionMismatch,
    NonFiniteEvaluation,
    NotPositiveDefinite,
    NotSymmetric,
    OutOfRange,
)

_MASK64 = (1 << 64) - 1

# Diagonal inflation schedule: jitter_start * 10**k for k = 0..8, with a
# plain (jitter-free) attempt first.
_JITTER_STEPS = 8


@dataclass(frozen=True)
class CholeskyFactor:
    """Lower-triangular factor of ``A + jitter_used * I``.

    ``lower @ lower.T`` reconstructs the (possibly inflated) input within
    1e-8 relative.
    """

    lower: np.ndarray
    jitter_used: float

    @property
    def size(self) -> int:
        return self.lower.shape[0]


@dataclass(frozen=True)
class RngStream:
    """Named, reproducible random stream.

    Identical ``(seed, stream_id)`` pairs produce bitwise-identical draw
    sequences across runs and platforms; the underlying generator is
    counter-based (Philox), so distinct streams may be consumed
    concurrently without interaction. Use one stream per (chain, purpose)
    pair and derive sub-streams rather than sharing a generator.
    """

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        """Fresh generator positioned at the start of this stream."""
        key = (self.seed & _MASK64) | ((self.stream_id & _MASK64) << 64)
        return np.random.Generator(np.random.Philox(key=key))

    def derive(self, child: int) -> "RngStream":
        """Deterministically derive a sub-stream for a new purpose."""
        mixed = (self.stream_id * 0x9E3779B97F4A7C15 + child + 1) & _MASK64
        return RngStream(self.seed, mixed)


def _as_square_matrix(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    return a


def cholesky_with_jitter(a, jitter_start: float = 1e-10) -> CholeskyFactor:
    """Factor a symmetric positive (semi)definite matrix.

    Tries a plain Cholesky first, then inflates the diagonal by
    ``jitter_start * 10**k`` for k = 0..8 and returns the factor for the
    smallest jitter that succeeds.

    Raises
    ------
    NotSymmetric
        If ``max|a - a.T|`` exceeds 1e-10 (scaled by the matrix magnitude).
    NotPositiveDefinite
        If every jitter level in the schedule fails.
    """
    a = _as_square_matrix(a)
    scale = max(1.0, float(np.abs(a).max())) if a.size else 1.0
    if a.size and float(np.abs(a - a.T).max()) > 1e-10 * scale:
        raise NotSymmetric("matrix is not symmetric within 1e-10")
    a = (a + a.T) / 2.0

    jitters = [0.0] + [jitter_start * 10.0**k for k in range(_JITTER_STEPS + 1)]
    for jitter in jitters:
        try:
            lower = np.linalg.cholesky(a + jitter * np.eye(a.shape[0]))
        except np.linalg.LinAlgError:
            continue
        return CholeskyFactor(lower=lower, jitter_used=jitter)
    raise NotPositiveDefinite(
        f"Cholesky failed for all jitters up to {jitters[-1]:g}"
    )


def solve_psd(factor: CholeskyFactor, b) -> np.ndarray:
    """Solve ``(A + jitter * I) x = b`` given the factor of A.

    ``b`` may be a vector or a matrix of right-hand sides; the result has
    the same shape.
    """
    b = np.asarray(b, dtype=float)
    n = factor.size
    if b.shape[0] != n:
        raise DimensionMismatch(
            f"rhs has leading dimension {b.shape[0]}, factor is {n}x{n}"
        )
    lower = factor.lower
    y = np.linalg.solve(lower, b.reshape(n, -1))
    x = np.linalg.solve(lower.T, y)
    return x.reshape(b.shape)


def finite_diff_hessian(
    f: Callable[[np.ndarray], float], theta, h: float | None = None
) -> np.ndarray:
    """Central-difference Hessian of ``f`` at ``theta``, symmetrized.

    The default step is ``1e-4 * max(1, |theta_i|)`` per coordinate,
    balancing truncation against cancellation at typical parameter
    scales.

    Raises NonFiniteEvaluation if any stencil point evaluates to NaN or
    infinity.
    """
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    p = theta.size
    if h is None:
        steps = 1e-4 * np.maximum(1.0, np.abs(theta))
    else:
        steps = np.broadcast_to(np.asarray(h, dtype=float), (p,)).copy()

    def eval_at(t):
        try:
            value = float(f(t))
        except (ArithmeticError, ValueError) as exc:
            raise NonFiniteEvaluation(f"stencil evaluation failed at {t}") from exc
        if not np.isfinite(value):
            raise NonFiniteEvaluation(f"non-finite stencil value at {t}")
        return value

    hess = np.empty((p, p))
    f0 = eval_at(theta)
    for i in range(p):
        ei = np.zeros(p)
        ei[i] = steps[i]
        hess[i, i] = (eval_at(theta + ei) - 2.0 * f0 + eval_at(theta - ei)) / steps[i] ** 2
        for j in range(i + 1, p):
            ej = np.zeros(p)
            ej[j] = steps[j]
            hess[i, j] = hess[j, i] = (
                eval_at(theta + ei + ej)
                - eval_at(theta + ei - ej)
                - eval_at(theta - ei + ej)
                + eval_at(theta - ei - ej)
            ) / (4.0 * steps[i] * steps[j])
    return (hess + hess.T) / 2.0


def normal_quantile(p: float) -> float:
    """Inverse standard-normal CDF, accurate to 1e-9."""
    p = float(p)
    if not 0.0 < p < 1.0:
        raise OutOfRange(f"quantile level must be in (0, 1), got {p}")
    return float(ndtri(p))


def std_normal_cdf(z):
    """Standard-normal CDF; accepts scalars or arrays."""
    out = ndtr(np.asarray(z, dtype=float))
    return float(out) if np.isscalar(z) or np.ndim(z) == 0 else out
