"""Result record shared by the exact, Monte Carlo and RDSP engines."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .censoring import Design

FIELDS = ("psi", "p_awo", "p_aw", "p_r", "e_d", "e_eta", "l_w")
CSV_HEADER = ("n", "r", "t0") + FIELDS


@dataclass(frozen=True)
class PlanEvaluation:
    design: Design
    psi: float
    p_awo: float
    p_aw: float
    p_r: float
    e_d: float
    e_eta: float
    l_w: float
    se: dict | None = None
    extras: dict = field(default_factory=dict, compare=False)

    @property
    def probabilities(self) -> tuple[float, float, float]:
        return (self.p_awo, self.p_aw, self.p_r)

    def to_dict(self) -> dict:
        n, r, t0 = self.design
        out = {"design": [n, r, t0], **{k: getattr(self, k) for k in FIELDS}}
        if self.se is not None:
            out["se"] = dict(self.se)
        if self.extras:
            out["extras"] = dict(self.extras)
        return out

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    def csv_row(self) -> list:
        n, r, t0 = self.design
        return [n, r, t0] + [getattr(self, k) for k in FIELDS]
