"""Serializable description of one run."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

from .game import GameParams
from .perception import IDENTITY, PerceptionSpec, spec_from_dict, spec_to_dict


@dataclass
class RunConfig:
    command: str
    params: GameParams = field(default_factory=GameParams)
    spec: PerceptionSpec = IDENTITY
    options: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "params": self.params.to_dict(),
            "perception": spec_to_dict(self.spec),
            "options": dict(self.options),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        return cls(
            command=data["command"],
            params=GameParams.from_dict(data.get("params", {})),
            spec=spec_from_dict(data.get("perception", {"kind": "identity"})),
            options=dict(data.get("options", {})),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        return cls.from_dict(json.loads(text))
