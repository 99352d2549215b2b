"""Estimate reports and the tolerance policy that turns them into verdicts."""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Optional

__all__ = ["EstimateReport", "mc_verdict", "closed_form_verdict", "config_hash"]

PASS, FAIL, ASYMPTOTIC = "pass", "fail", "asymptotic-only"


def mc_verdict(estimate, se, target, rel=0.05, k=4.0):
    """Pass when ``|estimate - target| <= k * se + rel * |target|``."""
    ok = abs(estimate - target) <= k * se + rel * abs(target)
    return PASS if ok else FAIL


def closed_form_verdict(estimate, target, rel=1e-6):
    return PASS if abs(estimate - target) <= rel * abs(target) else FAIL


def config_hash(cfg: dict) -> str:
    blob = json.dumps(cfg, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


@dataclass
class EstimateReport:
    """Outcome of one check.

    ``tolerance`` describes the rule behind ``verdict``; ``details`` holds any
    secondary numbers (sequences, z-scores, diagnostics).
    """

    name: str
    paper_ref: str
    estimate: float
    se: float
    n_samples: int
    target: Optional[float] = None
    verdict: str = PASS
    runtime: float = 0.0
    tolerance: str = ""
    details: dict = field(default_factory=dict)
    seed: Optional[int] = None
    config_hash: str = ""

    @property
    def passed(self) -> bool:
        return self.verdict in (PASS, ASYMPTOTIC)

    def to_json(self, include_runtime=True) -> str:
        row = {
            "name": self.name,
            "paper_ref": self.paper_ref,
            "estimate": _clean(self.estimate),
            "se": _clean(self.se),
            "target": _clean(self.target),
            "verdict": self.verdict,
            "n": int(self.n_samples),
            "seed": self.seed,
            "config_hash": self.config_hash,
            "tolerance": self.tolerance,
            "details": _clean(self.details),
        }
        if include_runtime:
            row["runtime_s"] = round(self.runtime, 3)
        return json.dumps(row, sort_keys=False)

    def summary(self) -> str:
        tgt = "" if self.target is None else f" target={self.target:.6g}"
        return f"{self.name}: {self.verdict} estimate={self.estimate:.6g} se={self.se:.3g}{tgt}"


def _clean(x):
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if hasattr(x, "tolist"):
        return _clean(x.tolist())
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    return x
