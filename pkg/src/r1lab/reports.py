"""Plain result containers shared by the verifiers and the CLI."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def jsonable(obj):
    """Convert numpy scalars/arrays (and complex numbers) into JSON-safe values."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if hasattr(obj, "to_json"):
        return obj.to_json()
    return obj


@dataclass
class VerificationReport:
    name: str
    passed: bool
    failures: list[dict] = field(default_factory=list)
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return jsonable({"name": self.name, "passed": self.passed,
                         "failures": self.failures, "details": self.details})
