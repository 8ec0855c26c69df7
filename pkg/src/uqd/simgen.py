"""Seeded synthetic scenarios for exercising the decomposition tools,
plus a bootstrap-ensemble builder for classification data.

Three scenario kinds ship, each with documented default parameters (the
defaults are this package's own choices):

``fig3a_regression``
    One-dimensional regression with a dense high-noise region on the
    left, a dense low-noise region on the right, and a gap with no
    training points in between. Noise dominates where data overlap;
    ignorance dominates inside the gap.
``fig3b_classification``
    Two Gaussian class clouds in the plane whose inner tails mix (label
    noise) while regions far from both clouds stay empty (ignorance).
``fig7_gp_demo``
    A smooth function plus homoscedastic noise, sparser on the left.
    Datasets of different sizes at the same seed are nested: the first
    n points never change, which supports shrinking-variance checks.

Generators know the ground truth; estimators only ever receive the
generated :class:`~uqd.dataset.Dataset`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import likelihood
from .dataset import Dataset
from .entropy import PosteriorEnsemble
from .errors import DegenerateData, DegenerateResample, InvalidParameter
from .numkit import RngStream

KINDS = ("fig3a_regression", "fig3b_classification", "fig7_gp_demo")

_MAX_REDRAWS = 10

_FIG3A_DEFAULTS = {
    "trend_amp": 0.8,
    "trend_freq": 1.3,
    "noisy_region": (-3.0, -1.0),
    "quiet_region": (1.0, 3.0),
    "gap": (-1.0, 1.0),
    "noise_sd_noisy": 0.7,
    "noise_sd_quiet": 0.1,
}

_FIG3B_DEFAULTS = {
    "mean_0": (-1.5, 0.0),
    "mean_1": (1.5, 0.0),
    "sd": 0.9,
    # expected fraction of points whose true class posterior is in
    # (0.25, 0.75); a generated draw should land inside this band
    "overlap_band": (0.01, 0.2),
    "empty_zone_center": (0.0, 4.0),
}

_FIG7_DEFAULTS = {
    "x_max": 6.0,
    "noise_sd": 0.2,
}


@dataclass(frozen=True, eq=False)
class Scenario:
    """A generator recipe: kind, ground-truth parameters, size, seed."""

    kind: str
    true_params: dict
    n_points: int
    seed: int

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidParameter(f"unknown scenario kind {self.kind!r}")
        if self.n_points < 1:
            raise InvalidParameter("n_points must be positive")


def _with_overrides(defaults: dict, overrides: dict) -> dict:
    unknown = set(overrides) - set(defaults)
    if unknown:
        raise InvalidParameter(f"unknown scenario parameters: {sorted(unknown)}")
    merged = dict(defaults)
    merged.update(overrides)
    return merged


def _intervals_overlap(a, b) -> bool:
    return a[0] < b[1] and b[0] < a[1]


def fig3a(n_points: int, seed: int, **overrides) -> Scenario:
    p = _with_overrides(_FIG3A_DEFAULTS, overrides)
    if p["noise_sd_noisy"] <= 0.0 or p["noise_sd_quiet"] <= 0.0:
        raise InvalidParameter("noise standard deviations must be positive")
    gap = p["gap"]
    if _intervals_overlap(p["noisy_region"], gap) or _intervals_overlap(p["quiet_region"], gap):
        raise InvalidParameter("sampling regions must not intersect the gap")
    return Scenario("fig3a_regression", p, n_points, seed)


def fig3b(n_points: int, seed: int, **overrides) -> Scenario:
    p = _with_overrides(_FIG3B_DEFAULTS, overrides)
    if p["sd"] <= 0.0:
        raise InvalidParameter("cloud standard deviation must be positive")
    return Scenario("fig3b_classification", p, n_points, seed)


def fig7(n_points: int, seed: int, **overrides) -> Scenario:
    p = _with_overrides(_FIG7_DEFAULTS, overrides)
    if p["noise_sd"] <= 0.0 or p["x_max"] <= 0.0:
        raise InvalidParameter("noise_sd and x_max must be positive")
    return Scenario("fig7_gp_demo", p, n_points, seed)


def make_scenario(kind: str, n_points: int, seed: int, **overrides) -> Scenario:
    factory = {"fig3a_regression": fig3a, "fig3b_classification": fig3b, "fig7_gp_demo": fig7}
    if kind not in factory:
        raise InvalidParameter(f"unknown scenario kind {kind!r}")
    return factory[kind](n_points, seed, **overrides)


def fig3a_trend(scenario: Scenario, x) -> np.ndarray:
    p = scenario.true_params
    return p["trend_amp"] * np.sin(p["trend_freq"] * np.asarray(x, dtype=float))


def fig7_trend(x) -> np.ndarray:
    return np.sin(np.asarray(x, dtype=float))


def generate(scenario: Scenario) -> Dataset:
    """Materialize a scenario; bitwise-identical for identical seeds."""
    if scenario.kind == "fig3a_regression":
        return _generate_fig3a(scenario)
    if scenario.kind == "fig3b_classification":
        return _generate_fig3b(scenario)
    return _generate_fig7(scenario)


def _generate_fig3a(sc: Scenario) -> Dataset:
    p = sc.true_params
    n_noisy = sc.n_points // 2
    n_quiet = sc.n_points - n_noisy
    x_noisy = RngStream(sc.seed, 1).generator().uniform(*p["noisy_region"], n_noisy)
    e_noisy = RngStream(sc.seed, 2).generator().standard_normal(n_noisy)
    x_quiet = RngStream(sc.seed, 3).generator().uniform(*p["quiet_region"], n_quiet)
    e_quiet = RngStream(sc.seed, 4).generator().standard_normal(n_quiet)
    x = np.concatenate([x_noisy, x_quiet])
    noise = np.concatenate(
        [p["noise_sd_noisy"] * e_noisy, p["noise_sd_quiet"] * e_quiet]
    )
    y = fig3a_trend(sc, x) + noise
    return Dataset(x=x.reshape(-1, 1), y=y)


def _generate_fig3b(sc: Scenario) -> Dataset:
    p = sc.true_params
    n0 = sc.n_points // 2
    n1 = sc.n_points - n0
    cloud0 = np.asarray(p["mean_0"]) + p["sd"] * RngStream(sc.seed, 1).generator().standard_normal((n0, 2))
    cloud1 = np.asarray(p["mean_1"]) + p["sd"] * RngStream(sc.seed, 2).generator().standard_normal((n1, 2))
    x = np.vstack([cloud0, cloud1])
    labels = np.concatenate([np.zeros(n0, dtype=int), np.ones(n1, dtype=int)])
    return Dataset(x=x, labels=labels)


def _generate_fig7(sc: Scenario) -> Dataset:
    p = sc.true_params
    # per-point draws come from dedicated streams so that the first n
    # points are identical for every dataset size at the same seed
    u = RngStream(sc.seed, 1).generator().random(sc.n_points)
    eps = RngStream(sc.seed, 2).generator().standard_normal(sc.n_points)
    x = p["x_max"] * np.sqrt(u)  # density increases toward the right
    y = fig7_trend(x) + p["noise_sd"] * eps
    return Dataset(x=x.reshape(-1, 1), y=y)


def fig3b_true_posterior(scenario: Scenario, points) -> np.ndarray:
    """Probability of class 1 under the generating parameters (equal
    class priors, isotropic equal-variance clouds)."""
    p = scenario.true_params
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    d0 = ((pts - np.asarray(p["mean_0"])) ** 2).sum(axis=1)
    d1 = ((pts - np.asarray(p["mean_1"])) ** 2).sum(axis=1)
    logit = (d0 - d1) / (2.0 * p["sd"] ** 2)
    return 1.0 / (1.0 + np.exp(-logit))


def fig3b_zone_queries(scenario: Scenario) -> dict[str, np.ndarray]:
    """Representative query points for the scenario's regimes: the
    between-cloud overlap band, the interiors of each cloud (pure /
    dense), and a region far from all training data (empty)."""
    p = scenario.true_params
    m0 = np.asarray(p["mean_0"], dtype=float)
    m1 = np.asarray(p["mean_1"], dtype=float)
    mid = (m0 + m1) / 2.0
    across = np.linspace(-0.8, 0.8, 5)
    overlap = np.column_stack([np.full(5, mid[0]), mid[1] + across])
    offsets = np.array([[0.0, 0.0], [-0.2, 0.2], [0.2, -0.2], [0.0, 0.4], [0.0, -0.4]])
    pure = m0 + offsets
    dense = np.vstack([m0 + offsets, m1 + offsets])
    ez = np.asarray(p["empty_zone_center"], dtype=float)
    empty = ez + np.column_stack([np.linspace(-1.0, 1.0, 5), np.zeros(5)])
    return {"overlap": overlap, "pure": pure, "dense": dense, "empty": empty}


def bootstrap_ensemble(dataset: Dataset, n_members: int, query_points, seed: int) -> list[PosteriorEnsemble]:
    """Posterior-style ensembles from bootstrap refits.

    Each member is a Gaussian class-conditional classifier (diagonal
    covariances, class priors and per-feature moments fitted by
    maximum likelihood) trained on one bootstrap resample; its label
    posterior at each query becomes one ensemble member. Returns one
    ensemble per query row. Resamples that miss a class or collapse a
    feature variance are redrawn up to 10 times, then reported.
    """
    if dataset.labels is None:
        raise InvalidParameter("bootstrap_ensemble needs a labeled dataset")
    labels = dataset.labels
    classes = np.unique(labels)
    n_classes = classes.size
    if n_classes < 2:
        raise InvalidParameter("need at least 2 labels")
    if n_members < 1:
        raise InvalidParameter("n_members must be positive")
    x = dataset.x
    n = x.shape[0]
    queries = np.atleast_2d(np.asarray(query_points, dtype=float))
    if queries.shape[1] != x.shape[1]:
        raise InvalidParameter("query dimension does not match the dataset")

    gen = RngStream(seed, 1).generator()
    cat = likelihood.categorical(n_classes)
    gauss = likelihood.gaussian()

    member_probs = np.empty((n_members, queries.shape[0], n_classes))
    for m in range(n_members):
        for attempt in range(_MAX_REDRAWS + 1):
            idx = gen.integers(0, n, n)
            try:
                fit = _fit_classifier(x[idx], labels[idx], classes, cat, gauss)
            except DegenerateData:
                continue
            break
        else:
            raise DegenerateResample(
                f"member {m}: {_MAX_REDRAWS} redraws all degenerate"
            )
        member_probs[m] = _classifier_posterior(fit, queries)

    return [
        PosteriorEnsemble(member_probs[:, qi, :])
        for qi in range(queries.shape[0])
    ]


def _fit_classifier(x, labels, classes, cat, gauss):
    compact = np.searchsorted(classes, labels)
    prior_fit = likelihood.mle_fit(cat, compact)
    log_prior = np.log(prior_fit.theta_hat)
    means = np.empty((classes.size, x.shape[1]))
    variances = np.empty_like(means)
    for ci in range(classes.size):
        rows = x[compact == ci]
        for j in range(x.shape[1]):
            fit = likelihood.mle_fit(gauss, rows[:, j])
            means[ci, j], variances[ci, j] = fit.theta_hat
    return log_prior, means, variances


def _classifier_posterior(fit, queries) -> np.ndarray:
    log_prior, means, variances = fit
    # log joint per class, diagonal Gaussian likelihood
    diff = queries[:, None, :] - means[None, :, :]
    log_lik = -0.5 * (
        np.log(2.0 * np.pi * variances)[None, :, :] + diff**2 / variances[None, :, :]
    ).sum(axis=2)
    scores = log_prior[None, :] + log_lik
    scores -= scores.max(axis=1, keepdims=True)
    probs = np.exp(scores)
    return probs / probs.sum(axis=1, keepdims=True)
