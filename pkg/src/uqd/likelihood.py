"""Maximum-likelihood estimation with its two epistemic-uncertainty
indicators: the information matrix (how sharply the data pin down the
parameters) and AIC (how well the chosen family can match the data at
all).

Three closed-form families ship: ``bernoulli`` (one success probability),
``gaussian`` (mean and variance, with the biased variance MLE), and
``categorical`` over C labels (C-1 free probabilities). For the gaussian
family the parameter vector is ``(mu, sigma2)``; for the categorical
family ``theta`` is the full C-vector of probabilities while information
matrices and confidence regions are over the C-1 free coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import chi2

from . import numkit
from .errors import (
    DegenerateData,
    InvalidParameter,
    InvalidSample,
    NonFiniteEvaluation,
    OutOfRange,
    SingularInformation,
)

_KINDS = ("bernoulli", "gaussian", "categorical")


@dataclass(frozen=True)
class ParametricFamily:
    """A closed-form-estimable distribution family."""

    kind: str
    n_labels: int | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise InvalidParameter(f"unknown family kind {self.kind!r}")
        if self.kind == "categorical":
            if self.n_labels is None or self.n_labels < 2:
                raise InvalidParameter("categorical family needs n_labels >= 2")
        elif self.n_labels is not None:
            raise InvalidParameter(f"{self.kind} family takes no n_labels")

    @property
    def param_dim(self) -> int:
        """Count of free parameters (the AIC penalty dimension)."""
        if self.kind == "bernoulli":
            return 1
        if self.kind == "gaussian":
            return 2
        return self.n_labels - 1


def bernoulli() -> ParametricFamily:
    return ParametricFamily("bernoulli")


def gaussian() -> ParametricFamily:
    return ParametricFamily("gaussian")


def categorical(n_labels: int) -> ParametricFamily:
    return ParametricFamily("categorical", n_labels=n_labels)


@dataclass(frozen=True)
class MleResult:
    theta_hat: np.ndarray
    loglik_at_max: float
    fisher: np.ndarray  # observed information at theta_hat, p x p
    aic: float


@dataclass(frozen=True)
class ConfidenceRegion:
    level: float
    intervals: list[tuple[float, float]]  # per-axis Wald intervals
    ellipsoid_radius: float  # sqrt of the chi-square quantile, p dof


def _check_sample(family: ParametricFamily, data) -> np.ndarray:
    data = np.asarray(data, dtype=float).ravel()
    if data.size == 0:
        raise InvalidSample("sample is empty")
    if not np.all(np.isfinite(data)):
        raise InvalidSample("sample contains non-finite values")
    if family.kind == "bernoulli":
        if not np.all((data == 0.0) | (data == 1.0)):
            raise InvalidSample("bernoulli observations must be 0 or 1")
    elif family.kind == "categorical":
        labels = data.astype(int)
        if not np.all(labels == data):
            raise InvalidSample("categorical observations must be integer labels")
        if labels.min() < 0 or labels.max() >= family.n_labels:
            raise InvalidSample(
                f"labels must lie in [0, {family.n_labels}), got "
                f"[{labels.min()}, {labels.max()}]"
            )
    return data


def _check_theta(family: ParametricFamily, theta) -> np.ndarray:
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    if not np.all(np.isfinite(theta)):
        raise InvalidParameter("theta contains non-finite entries")
    if family.kind == "bernoulli":
        if theta.size != 1 or not 0.0 < theta[0] < 1.0:
            raise InvalidParameter("bernoulli theta must be a scalar in (0, 1)")
    elif family.kind == "gaussian":
        if theta.size != 2 or theta[1] <= 0.0:
            raise InvalidParameter("gaussian theta is (mu, sigma2) with sigma2 > 0")
    else:
        if theta.size != family.n_labels:
            raise InvalidParameter(
                f"categorical theta must have {family.n_labels} entries"
            )
        if np.any(theta < 0.0) or abs(theta.sum() - 1.0) > 1e-9:
            raise InvalidParameter("categorical theta must lie in the simplex")
    return theta


def log_likelihood(family: ParametricFamily, theta, data) -> float:
    """Sum of log densities of the sample under ``theta``.

    Returns ``-inf`` (an explicit value, not an error) when an
    observation has zero density, which can only happen for categorical
    parameters on the simplex boundary.
    """
    theta = _check_theta(family, theta)
    data = _check_sample(family, data)
    n = data.size

    if family.kind == "bernoulli":
        s = float(data.sum())
        return s * math.log(theta[0]) + (n - s) * math.log1p(-theta[0])

    if family.kind == "gaussian":
        mu, sigma2 = theta
        resid = data - mu
        return -0.5 * n * math.log(2.0 * math.pi * sigma2) - float(
            resid @ resid
        ) / (2.0 * sigma2)

    counts = np.bincount(data.astype(int), minlength=family.n_labels).astype(float)
    hit_zero = (counts > 0) & (theta == 0.0)
    if np.any(hit_zero):
        return float("-inf")
    active = counts > 0
    return float(counts[active] @ np.log(theta[active]))


def mle_fit(family: ParametricFamily, data) -> MleResult:
    """Closed-form maximum-likelihood fit with information and AIC.

    Raises DegenerateData when the maximizer lies on the parameter
    boundary (all-equal bernoulli data, zero-variance gaussian data, an
    unobserved categorical label); the Wald machinery is invalid there
    and the condition is reported rather than clamped away.
    """
    data = _check_sample(family, data)
    n = data.size

    if family.kind == "bernoulli":
        s = float(data.sum())
        if s == 0.0 or s == n:
            raise DegenerateData("all observations equal; MLE on the boundary")
        theta_hat = np.array([s / n])
    elif family.kind == "gaussian":
        if n < 2:
            raise DegenerateData("gaussian fit needs at least 2 observations")
        mu = float(data.mean())
        sigma2 = float(((data - mu) ** 2).mean())
        if sigma2 == 0.0:
            raise DegenerateData("zero-variance data; MLE on the boundary")
        theta_hat = np.array([mu, sigma2])
    else:
        counts = np.bincount(data.astype(int), minlength=family.n_labels)
        if np.any(counts == 0):
            raise DegenerateData("a label was never observed; MLE on the boundary")
        theta_hat = counts / n

    loglik = log_likelihood(family, theta_hat, data)
    fisher = fisher_information(family, theta_hat, data, mode="observed")
    return MleResult(
        theta_hat=theta_hat,
        loglik_at_max=loglik,
        fisher=fisher,
        aic=-2.0 * loglik + 2.0 * family.param_dim,
    )


def _free_to_full(family: ParametricFamily, free: np.ndarray) -> np.ndarray:
    if family.kind == "categorical":
        return np.append(free, 1.0 - free.sum())
    return free


def _full_to_free(family: ParametricFamily, theta: np.ndarray) -> np.ndarray:
    if family.kind == "categorical":
        return theta[:-1]
    return theta


def fisher_information(
    family: ParametricFamily, theta, data, mode: str = "observed"
) -> np.ndarray:
    """Information matrix over the family's free parameters.

    ``observed`` returns the negative Hessian of the sample
    log-likelihood at ``theta`` via central finite differences — the
    quantity computable from a single dataset. ``expected`` returns the
    sample size times the analytic per-observation expected information
    at ``theta``.
    """
    theta = _check_theta(family, theta)
    data = _check_sample(family, data)
    n = data.size

    if mode == "observed":

        def objective(free):
            full = _free_to_full(family, np.asarray(free, dtype=float))
            try:
                return log_likelihood(family, full, data)
            except InvalidParameter:
                return float("nan")  # stencil left the valid region

        free = _full_to_free(family, theta)
        hess = numkit.finite_diff_hessian(objective, free)
        return -hess

    if mode != "expected":
        raise OutOfRange(f"mode must be 'observed' or 'expected', got {mode!r}")

    if family.kind == "bernoulli":
        t = theta[0]
        return np.array([[n / (t * (1.0 - t))]])
    if family.kind == "gaussian":
        mu, sigma2 = theta
        return np.diag([n / sigma2, n / (2.0 * sigma2**2)])
    # Categorical over the C-1 free probabilities; the mass of the last
    # label couples every pair of coordinates.
    probs = theta
    last = probs[-1]
    if np.any(probs == 0.0):
        raise NonFiniteEvaluation("expected information diverges at the boundary")
    free = probs[:-1]
    return n * (np.diag(1.0 / free) + 1.0 / last)


def aic(family: ParametricFamily, result: MleResult, data=None) -> float:
    """Akaike information criterion, ``-2 * max-loglik + 2p``.

    Lower is better when ranking families on the same data; the ranking
    itself is left to callers.
    """
    expected_dim = family.param_dim if family.kind != "categorical" else family.n_labels
    if result.theta_hat.size != expected_dim:
        raise InvalidParameter("result does not belong to this family")
    return -2.0 * result.loglik_at_max + 2.0 * family.param_dim


def confidence_region(result: MleResult, level: float) -> ConfidenceRegion:
    """Wald confidence region from the information matrix at the MLE.

    Per-axis intervals are ``theta_i +/- z * sqrt((I^-1)_ii)`` with
    ``z`` the two-sided normal quantile; the joint ellipsoid
    ``(theta - theta_hat)' I (theta - theta_hat) <= r^2`` has radius
    ``r = sqrt(chi2_p(level))``. The larger the region, the larger the
    parametric uncertainty.
    """
    level = float(level)
    if not 0.0 < level < 1.0:
        raise OutOfRange(f"level must be in (0, 1), got {level}")
    fisher = np.asarray(result.fisher, dtype=float)
    p = fisher.shape[0]
    try:
        lower = np.linalg.cholesky(fisher)
    except np.linalg.LinAlgError as exc:
        raise SingularInformation("information matrix is not positive definite") from exc
    inv = np.linalg.solve(lower.T, np.linalg.solve(lower, np.eye(p)))
    z = numkit.normal_quantile((1.0 + level) / 2.0)
    half = z * np.sqrt(np.diag(inv))
    centers = result.theta_hat[:p]
    intervals = [(float(c - h), float(c + h)) for c, h in zip(centers, half)]
    return ConfidenceRegion(
        level=level,
        intervals=intervals,
        ellipsoid_radius=float(np.sqrt(chi2.ppf(level, df=p))),
    )
