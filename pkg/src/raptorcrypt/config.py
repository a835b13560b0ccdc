"""Run configuration: defaults, optional JSON file, command-line overrides."""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, fields, replace
from typing import Optional

from .commitment import DEFAULT_PRIME_BITS
from .errors import InvalidParameter
from .fountain import DEFAULT_C, DEFAULT_DELTA
from .receipt import DEFAULT_RECEIPT_BITS
from .threshold import DEFAULT_OVERHEAD_HI, DEFAULT_OVERHEAD_LO

ENV_VAR = "RAPTOR_THRESHOLD_CONFIG"


@dataclass(frozen=True)
class Config:
    overhead_hi: float = DEFAULT_OVERHEAD_HI
    overhead_lo: float = DEFAULT_OVERHEAD_LO
    c: float = DEFAULT_C
    delta: float = DEFAULT_DELTA
    prime_bits: int = DEFAULT_PRIME_BITS
    receipt_bits: int = DEFAULT_RECEIPT_BITS
    symbol_size: int = 1
    seed: Optional[int] = None

    def __post_init__(self):
        if not self.overhead_hi > self.overhead_lo > 0:
            raise InvalidParameter("config needs overhead_hi > overhead_lo > 0")
        for name in ("prime_bits", "receipt_bits", "symbol_size"):
            if getattr(self, name) < 1:
                raise InvalidParameter(f"config {name} must be >= 1")
        if self.seed is not None and not 0 <= self.seed < 1 << 64:
            raise InvalidParameter("seed must be an unsigned 64-bit integer")

    def updated(self, **overrides) -> "Config":
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})


def load_config(path: Optional[str] = None) -> Config:
    """Defaults, overlaid with ``path`` or else the file named by the env var."""
    path = path or os.environ.get(ENV_VAR)
    if not path:
        return Config()
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    known = {f.name for f in fields(Config)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise InvalidParameter(f"unknown config keys in {path}: {', '.join(unknown)}")
    return Config(**data)
