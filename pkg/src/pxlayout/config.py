"""Engine configuration: seeds, budgets, knobs shared across stages."""
from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from typing import Optional


@dataclass
class EngineConfig:
    seed: int = 1
    max_px: int = 100_000            # default upper bound for every pixel variable
    independence_threshold: int = 300
    stride: int = 1                  # preview sweep stride
    budget_ms: float = 10.0          # local search budget before complete fallback
    max_steps: int = 200_000
    tenure: int = 3
    walk_prob: float = 0.01
    solver_cmd: Optional[list[str]] = None  # external SMT-LIB2 executable + args
    timeout_s: float = 30.0
    audit_dir: Optional[str] = None
    dev_backend: str = "external"    # development-end complete backend: external | oracle

    def config_hash(self) -> str:
        payload = json.dumps(asdict(self), sort_keys=True, default=str)
        return hashlib.sha256(payload.encode()).hexdigest()[:16]
