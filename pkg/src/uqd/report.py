"""The shared uncertainty-report container.

``total`` always equals ``aleatoric + epistemic`` exactly as computed;
when the parametric / structural breakdown is present, those three
fields sum to ``epistemic`` exactly as computed. Values are entropies in
bits for ensemble-based decompositions and variances for Gaussian-process
ones; ``unit`` records which.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class UncertaintyReport:
    total: float
    aleatoric: float
    epistemic: float
    parametric: float | None = None
    structural_delta: float | None = None
    structural_g: float | None = None
    note: str | None = None
    unit: str = "bits"

    def to_dict(self) -> dict:
        """JSON-ready mapping; optional fields are omitted when unset."""
        out = {
            "total": self.total,
            "aleatoric": self.aleatoric,
            "epistemic": self.epistemic,
            "unit": self.unit,
        }
        if self.parametric is not None:
            out["parametric"] = self.parametric
        if self.structural_delta is not None:
            out["structural_delta"] = self.structural_delta
        if self.structural_g is not None:
            out["structural_g"] = self.structural_g
        if self.note is not None:
            out["note"] = self.note
        return out
