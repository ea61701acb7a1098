"""Pass/fail ledger entries. Every entry carries a numeric margin (>= 0 means pass)."""
from __future__ import annotations

from dataclasses import dataclass
import math


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    margin: float
    detail: str = ""

    def line(self) -> str:
        status = "pass" if self.passed else "FAIL"
        text = f"{self.name} = {status} margin={format_float(self.margin)}"
        if self.detail:
            text += f" ({self.detail})"
        return text


def format_float(x: float, digits: int = 6) -> str:
    x = float(x) + 0.0
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:+.{digits}e}"


def format_vector(v) -> str:
    return "(" + ", ".join(f"{float(x):.12g}" for x in v) + ")"
