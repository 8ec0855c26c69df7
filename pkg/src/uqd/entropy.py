"""Entropy decomposition of posterior predictive ensembles over a finite
label set.

An ensemble holds one predictive distribution per posterior parameter
sample. The entropy of the mixture is the total uncertainty; the
weighted average of member entropies is the aleatoric part; their
difference — the mutual information between outcome and parameters — is
the epistemic part. All values are in bits, and the three-way additivity
holds bit-for-bit because the parts are computed from the same
intermediates.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidDistribution
from .report import UncertaintyReport

_SUM_TOL = 1e-9

_SINGLE_MEMBER_NOTE = (
    "single-member ensemble: disagreement is unobservable, epistemic "
    "uncertainty is reported as zero"
)


def _normalize_rows(rows: np.ndarray, what: str) -> np.ndarray:
    if not np.all(np.isfinite(rows)):
        raise InvalidDistribution(f"{what} contains non-finite entries")
    if np.any(rows < 0.0):
        raise InvalidDistribution(f"{what} contains negative entries")
    sums = rows.sum(axis=-1, keepdims=True)
    if np.any(np.abs(sums - 1.0) > _SUM_TOL):
        worst = float(np.abs(sums - 1.0).max())
        raise InvalidDistribution(
            f"{what} sums deviate from 1 by {worst:.3g} (> {_SUM_TOL:g}); "
            "refusing to mask an upstream bug"
        )
    return rows / sums


class ProbVector:
    """Finite discrete distribution over class labels.

    Entries within 1e-9 of summing to one are renormalized on
    construction; anything worse is rejected.
    """

    __slots__ = ("probs",)

    def __init__(self, probs):
        p = np.asarray(probs, dtype=float).ravel()
        if p.size < 1:
            raise InvalidDistribution("need at least one label")
        p = _normalize_rows(p, "probability vector")
        p.flags.writeable = False
        self.probs = p

    @property
    def n_labels(self) -> int:
        return self.probs.size

    def __repr__(self):
        return f"ProbVector({self.probs.tolist()})"


class PosteriorEnsemble:
    """M predictive distributions over one shared label set.

    ``weights`` default to uniform; they must be nonnegative and sum to
    one within 1e-9.
    """

    __slots__ = ("member_probs", "weights")

    def __init__(self, members, weights=None):
        if isinstance(members, np.ndarray) and members.ndim == 2:
            probs = np.array(members, dtype=float)
        else:
            rows = [m.probs if isinstance(m, ProbVector) else np.asarray(m, float) for m in members]
            if not rows:
                raise InvalidDistribution("ensemble needs at least one member")
            widths = {r.size for r in rows}
            if len(widths) != 1:
                raise InvalidDistribution("members disagree on the label count")
            probs = np.vstack(rows)
        if probs.shape[0] < 1 or probs.shape[1] < 1:
            raise InvalidDistribution("ensemble needs at least one member and label")
        probs = _normalize_rows(probs, "ensemble member")
        probs.flags.writeable = False

        if weights is None:
            w = np.full(probs.shape[0], 1.0 / probs.shape[0])
        else:
            w = np.asarray(weights, dtype=float).ravel()
            if w.size != probs.shape[0]:
                raise InvalidDistribution(
                    f"{w.size} weights for {probs.shape[0]} members"
                )
            w = _normalize_rows(w, "member weights")
        w.flags.writeable = False

        self.member_probs = probs
        self.weights = w

    @property
    def n_members(self) -> int:
        return self.member_probs.shape[0]

    @property
    def n_labels(self) -> int:
        return self.member_probs.shape[1]


def _entropy_bits(p: np.ndarray) -> float:
    nz = p[p > 0.0]
    return -float(nz @ np.log2(nz)) + 0.0  # +0.0 normalizes -0.0


def predictive_mixture(ens: PosteriorEnsemble) -> ProbVector:
    """Weight-averaged predictive distribution, renormalized exactly."""
    return ProbVector(ens.weights @ ens.member_probs)


def entropy(p: ProbVector) -> float:
    """Shannon entropy in bits, with 0 * log 0 taken as 0."""
    return _entropy_bits(p.probs)


def expected_conditional_entropy(ens: PosteriorEnsemble) -> float:
    """Weighted average of member entropies — the aleatoric part."""
    per_member = np.array([_entropy_bits(row) for row in ens.member_probs])
    return float(ens.weights @ per_member) + 0.0


def mutual_information(ens: PosteriorEnsemble) -> float:
    """Mixture entropy minus expected member entropy — the epistemic
    part. Tiny negatives from float rounding are reported raw rather
    than clamped."""
    if ens.n_members == 1:
        return 0.0  # the mixture of one member is that member
    return entropy(predictive_mixture(ens)) - expected_conditional_entropy(ens)


def decompose(ens: PosteriorEnsemble) -> UncertaintyReport:
    """Total / aleatoric / epistemic report for an ensemble.

    ``epistemic`` is computed as ``total - aleatoric`` from the same
    intermediates, so the additivity identity holds bit-for-bit.
    """
    aleatoric = expected_conditional_entropy(ens)
    if ens.n_members == 1:
        return UncertaintyReport(
            total=aleatoric,
            aleatoric=aleatoric,
            epistemic=0.0,
            note=_SINGLE_MEMBER_NOTE,
        )
    total = entropy(predictive_mixture(ens))
    return UncertaintyReport(
        total=total,
        aleatoric=aleatoric,
        epistemic=total - aleatoric,
    )
