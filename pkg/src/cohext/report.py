"""Machine-readable run reports: command, input hashes, per-check outcomes
with witnesses.  Reports are byte-identical across runs with the same
inputs and seed; wall-clock timing is opt-in because it would break that."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path


@dataclass
class Check:
    name: str
    passed: bool
    witness: str | None = None
    data: dict | None = None


@dataclass
class Report:
    command: str
    inputs: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)
    seed: int | None = None
    timing_ms: float | None = None

    def add_input(self, path):
        p = Path(path)
        self.inputs[str(p)] = hashlib.sha256(p.read_bytes()).hexdigest()

    def check(self, name, passed, witness=None, **data):
        self.checks.append(Check(name, bool(passed), witness, data or None))
        return passed

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json(self) -> dict:
        out = {
            "command": self.command,
            "inputs": dict(sorted(self.inputs.items())),
            "checks": [
                {
                    "name": c.name,
                    "pass": c.passed,
                    **({"witness": c.witness} if c.witness else {}),
                    **({"data": c.data} if c.data else {}),
                }
                for c in self.checks
            ],
            "pass": self.passed,
        }
        if self.seed is not None:
            out["seed"] = self.seed
        if self.timing_ms is not None:
            out["timing_ms"] = self.timing_ms
        return out

    def render(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=False) + "\n"
