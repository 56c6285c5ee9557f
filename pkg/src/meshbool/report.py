"""Structured run report for a boolean evaluation.

Every stage contributes a flat dict of counters and timings; the report is
JSON-serializable as-is and is the payload behind the CLI ``--report`` flag
and the service's ``report`` messages.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field


@dataclass
class RunReport:
    op: str = ""
    n_inputs: int = 0
    preprocess: dict = field(default_factory=dict)
    arrangement: dict = field(default_factory=dict)
    classification: dict = field(default_factory=dict)
    booleans: dict = field(default_factory=dict)
    kernel: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)

    def to_dict(self):
        return {
            "op": self.op,
            "n_inputs": self.n_inputs,
            "preprocess": dict(self.preprocess),
            "arrangement": dict(self.arrangement),
            "classification": dict(self.classification),
            "booleans": dict(self.booleans),
            "kernel": dict(self.kernel),
            "output": dict(self.output),
            "timings": dict(self.timings),
            "warnings": list(self.warnings),
        }

    def to_json(self, indent=2):
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)
