"""Plain tabular dataset container passed between generators, parsers,
and estimators. Estimators only ever see this view, never a scenario's
ground truth."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Dataset:
    """Rows of features plus either a real target or an integer label.

    ``x`` is always 2-D with shape (n, d). ``base_pred`` optionally holds
    per-row base-predictor outputs with shape (n, k) for ensemble models.
    """

    x: np.ndarray
    y: np.ndarray | None = None
    labels: np.ndarray | None = None
    base_pred: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "x", np.atleast_2d(np.asarray(self.x, dtype=float)))
        if self.y is not None:
            object.__setattr__(self, "y", np.asarray(self.y, dtype=float).ravel())
        if self.labels is not None:
            object.__setattr__(self, "labels", np.asarray(self.labels, dtype=int).ravel())
        if self.base_pred is not None:
            object.__setattr__(
                self, "base_pred", np.atleast_2d(np.asarray(self.base_pred, dtype=float))
            )

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def d(self) -> int:
        return self.x.shape[1]
