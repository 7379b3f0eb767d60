"""Per-scenario evaluation results."""

from __future__ import annotations

from dataclasses import dataclass, field

from fusionbench.metrics import MetricHexagon


@dataclass(frozen=True)
class ScenarioResult:
    name: str
    model: str
    train: tuple[str, ...]
    test: str
    map: str
    labels: tuple[str, ...]
    confusion: tuple[tuple[int, ...], ...]
    hexagon: MetricHexagon
    per_class: tuple[tuple[str, MetricHexagon], ...]
    aggregation: str = "pooled"
    curves: dict | None = None
    seed: int = 0
    timing: dict = field(default_factory=dict, compare=False)

    @property
    def key(self) -> str:
        return f"{self.name}:{self.test}"
