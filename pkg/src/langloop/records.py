"""Per-step interaction records and their canonical JSONL encoding.

The step log is part of the replay-stability contract: the same episode
replayed from a transcript must produce byte-identical lines, so records
hold only deterministic content (no wall-clock fields) and serialize with
sorted keys.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any


@dataclass
class StepRecord:
    """Everything produced by one iteration of the control loop."""

    step: int
    prompt_digest: str = ""
    query: str = ""
    observations: list[tuple[str, str]] = field(default_factory=list)
    reasoning: str = ""
    action: str = ""
    params: dict[str, float] = field(default_factory=dict)
    ack: str = ""
    proprio: dict[str, Any] = field(default_factory=dict)
    memory: dict[str, Any] = field(default_factory=dict)
    flags: list[str] = field(default_factory=list)
    phases: list[str] = field(default_factory=list)

    def mark_phase(self, name: str) -> None:
        self.phases.append(name)

    def to_dict(self) -> dict[str, Any]:
        return {
            "step": self.step,
            "prompt_digest": self.prompt_digest,
            "query": self.query,
            "observations": [[cam, text] for cam, text in self.observations],
            "reasoning": self.reasoning,
            "action": self.action,
            "params": dict(sorted(self.params.items())),
            "ack": self.ack,
            "proprio": self.proprio,
            "memory": self.memory,
            "flags": list(self.flags),
            "phases": list(self.phases),
        }

    def to_json_line(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
