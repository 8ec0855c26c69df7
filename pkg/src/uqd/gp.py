"""Exact Gaussian-process regression with a zero-mean prior and the
variance split into its aleatoric and epistemic parts.

The predictive distribution at a query x_q is Gaussian with

    mu      = K(x_q, X) (K(X, X) + noise * I)^-1 y
    sigma^2 = k(x_q, x_q) + noise - K(x_q, X) (K(X, X) + noise * I)^-1 K(X, x_q)

The observation-noise variance is the irreducible (aleatoric) part of
sigma^2; the remainder shrinks toward zero as training data accumulate
near the query. Hyperparameters are always user-supplied, never learned,
so adding a training point can only reduce the predictive variance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import numkit
from .errors import DimensionMismatch, InvalidParameter, OutOfRange
from .numkit import CholeskyFactor, RngStream
from .report import UncertaintyReport

_KINDS = ("rbf", "linear", "constant")

# Variances this close to zero (from float cancellation) are reported as 0.
_EPI_FLOOR = 1e-10

_PRIOR_NUGGET = 1e-10  # added to prior Gram matrices before sampling

_MAX_SAMPLE_POINTS = 500


@dataclass(frozen=True)
class Kernel:
    """Covariance function: squared-exponential, linear, or constant."""

    kind: str
    signal_variance: float = 1.0
    lengthscale: float | None = None
    bias: float | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise InvalidParameter(f"unknown kernel kind {self.kind!r}")
        if not np.isfinite(self.signal_variance) or self.signal_variance < 0.0:
            raise InvalidParameter("signal_variance must be a nonnegative real")
        if self.kind == "rbf":
            if self.lengthscale is None or self.lengthscale <= 0.0:
                raise InvalidParameter("rbf kernel needs lengthscale > 0")
        elif self.lengthscale is not None:
            raise InvalidParameter(f"{self.kind} kernel takes no lengthscale")
        if self.kind == "linear":
            if self.bias is not None and self.bias < 0.0:
                raise InvalidParameter("linear-kernel bias must be nonnegative")
        elif self.bias is not None:
            raise InvalidParameter(f"{self.kind} kernel takes no bias")


def rbf(signal_variance: float = 1.0, lengthscale: float = 1.0) -> Kernel:
    return Kernel("rbf", signal_variance=signal_variance, lengthscale=lengthscale)


def linear(signal_variance: float = 1.0, bias: float = 0.0) -> Kernel:
    return Kernel("linear", signal_variance=signal_variance, bias=bias)


def constant(value: float) -> Kernel:
    return Kernel("constant", signal_variance=value)


@dataclass(frozen=True)
class GpModel:
    """Immutable fitted model; concurrent predictions are safe."""

    train_x: np.ndarray  # (n, d)
    train_y: np.ndarray  # (n,)
    kernel: Kernel
    noise_variance: float
    factor: CholeskyFactor | None  # None for the n = 0 prior model
    alpha: np.ndarray | None  # (K + noise I)^-1 y, cached

    @property
    def n_train(self) -> int:
        return self.train_x.shape[0]


@dataclass(frozen=True)
class GpPosterior:
    mean: float
    variance: float
    noise_variance: float


def _as_points(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim == 1:
        a = a.reshape(-1, 1)
    if a.ndim != 2:
        raise DimensionMismatch(f"points must be 1-D or 2-D, got shape {a.shape}")
    return a


def gram(kernel: Kernel, a, b) -> np.ndarray:
    """Cross-covariance matrix with entry (i, j) = k(a_i, b_j)."""
    a = _as_points(a)
    b = _as_points(b)
    if a.shape[1] != b.shape[1]:
        raise DimensionMismatch(
            f"point dimensions differ: {a.shape[1]} vs {b.shape[1]}"
        )
    if kernel.kind == "constant":
        return np.full((a.shape[0], b.shape[0]), kernel.signal_variance)
    if kernel.kind == "linear":
        return kernel.signal_variance * (a @ b.T) + (kernel.bias or 0.0)
    sq = (
        (a * a).sum(axis=1)[:, None]
        + (b * b).sum(axis=1)[None, :]
        - 2.0 * (a @ b.T)
    )
    np.maximum(sq, 0.0, out=sq)
    return kernel.signal_variance * np.exp(-sq / (2.0 * kernel.lengthscale**2))


def gp_fit(train_x, train_y, kernel: Kernel, noise_variance: float) -> GpModel:
    """Factor the regularized Gram matrix once; prediction reuses it.

    ``noise_variance`` may be zero; rank deficiency is then absorbed by
    the jitter schedule and surfaced via ``model.factor.jitter_used``.
    """
    train_x = _as_points(train_x)
    train_y = np.asarray(train_y, dtype=float).ravel()
    if train_x.shape[0] != train_y.shape[0]:
        raise DimensionMismatch(
            f"{train_x.shape[0]} feature rows vs {train_y.shape[0]} targets"
        )
    if not (np.all(np.isfinite(train_x)) and np.all(np.isfinite(train_y))):
        raise InvalidParameter("training data must be finite")
    if not np.isfinite(noise_variance) or noise_variance < 0.0:
        raise InvalidParameter("noise_variance must be a nonnegative real")

    if train_x.shape[0] == 0:
        return GpModel(train_x, train_y, kernel, float(noise_variance), None, None)

    k_xx = gram(kernel, train_x, train_x)
    factor = numkit.cholesky_with_jitter(
        k_xx + noise_variance * np.eye(train_x.shape[0])
    )
    alpha = numkit.solve_psd(factor, train_y)
    return GpModel(train_x, train_y, kernel, float(noise_variance), factor, alpha)


def gp_predict(model: GpModel, query) -> GpPosterior:
    """Posterior predictive mean and variance at a single query point."""
    q = np.asarray(query, dtype=float).ravel()
    d = model.train_x.shape[1] if model.n_train else q.size
    if q.size != d:
        raise DimensionMismatch(f"query has dimension {q.size}, model expects {d}")
    q_row = q.reshape(1, -1)
    k_qq = float(gram(model.kernel, q_row, q_row)[0, 0])

    if model.n_train == 0:
        return GpPosterior(0.0, k_qq + model.noise_variance, model.noise_variance)

    k_qx = gram(model.kernel, q_row, model.train_x)[0]
    mean = float(k_qx @ model.alpha)
    var = k_qq + model.noise_variance - float(k_qx @ numkit.solve_psd(model.factor, k_qx))
    return GpPosterior(mean, max(var, 0.0), model.noise_variance)


def gp_predict_batch(model: GpModel, queries) -> list[GpPosterior]:
    """Convenience wrapper: one posterior per row of ``queries``."""
    return [gp_predict(model, row) for row in _as_points(queries)]


def gp_decompose(post: GpPosterior) -> UncertaintyReport:
    """Split the predictive variance: noise is aleatoric, the rest is
    epistemic (floored at zero when cancellation leaves it within
    -1e-10)."""
    epistemic = post.variance - post.noise_variance
    if -_EPI_FLOOR <= epistemic < 0.0:
        epistemic = 0.0
    aleatoric = post.noise_variance
    return UncertaintyReport(
        total=aleatoric + epistemic,
        aleatoric=aleatoric,
        epistemic=epistemic,
        unit="variance",
    )


def gp_prior_sample(kernel: Kernel, points, rng: RngStream) -> np.ndarray:
    """One draw of prior function values at ``points``.

    Samples N(0, Gram + 1e-10 I) through its Cholesky factor; the same
    stream always reproduces the same draw.
    """
    points = _as_points(points)
    n = points.shape[0]
    if n > _MAX_SAMPLE_POINTS:
        raise OutOfRange(f"at most {_MAX_SAMPLE_POINTS} points, got {n}")
    cov = gram(kernel, points, points) + _PRIOR_NUGGET * np.eye(n)
    factor = numkit.cholesky_with_jitter(cov)
    z = rng.generator().standard_normal(n)
    return factor.lower @ z
