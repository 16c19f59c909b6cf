"""Run traces: one event for the initial solution plus one per delegation step."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field


@dataclass(frozen=True)
class StepRecord:
    step: int
    time: float
    cost: float
    accepted: bool
    delta: float | None = None
    calls: int = 0
    center_route: int | None = None
    signature: str | None = None
    n_candidates: int = 0
    error: str | None = None


@dataclass
class RunTrace:
    events: list[StepRecord] = field(default_factory=list)
    instance_id: str = ""
    method: str = ""
    seed: int = 0

    @property
    def init_cost(self) -> float:
        return self.events[0].cost

    @property
    def final_cost(self) -> float:
        return self.events[-1].cost

    def append(self, rec: StepRecord) -> None:
        self.events.append(rec)

    def to_jsonl(self) -> str:
        head = {"instance_id": self.instance_id, "method": self.method, "seed": self.seed}
        lines = [json.dumps({**head, **asdict(e)}) for e in self.events]
        return "\n".join(lines) + "\n"

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_jsonl())

    @classmethod
    def from_jsonl(cls, text: str) -> "RunTrace":
        trace = cls()
        names = set(StepRecord.__dataclass_fields__)
        for line in text.splitlines():
            if not line.strip():
                continue
            row = json.loads(line)
            trace.instance_id = row.get("instance_id", trace.instance_id)
            trace.method = row.get("method", trace.method)
            trace.seed = row.get("seed", trace.seed)
            trace.events.append(StepRecord(**{k: v for k, v in row.items() if k in names}))
        return trace

    @classmethod
    def load(cls, path) -> "RunTrace":
        with open(path) as fh:
            return cls.from_jsonl(fh.read())
