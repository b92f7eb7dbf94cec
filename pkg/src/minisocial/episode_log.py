"""Episode logs: one JSONL header line, one line per step, one footer line.

Step lines carry `t` and `agents:[{id,x,y,psi,v,action,reward,coll,succ}]`;
`coll` is the sorted list of collision-partner entity ids (-1 = wall). A
`humans` key appears on step lines only when pedestrians are present. The
byte stream is a pure function of the run (no timestamps), so identical runs
produce identical files.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field


@dataclass
class EpisodeLog:
    header: dict
    steps: list[dict] = field(default_factory=list)
    footer: dict | None = None

    @property
    def k(self) -> int:
        return self.header["k"]

    @property
    def scenario_id(self) -> str:
        return self.header["scenario"]

    @property
    def length(self) -> int:
        return len(self.steps)

    def append_step(
        self,
        t: int,
        agents: list[dict],
        humans: list[dict] | None = None,
    ) -> None:
        record: dict = {"t": t, "agents": agents}
        if humans:
            record["humans"] = humans
        self.steps.append(record)

    def close(self, reason: str) -> None:
        self.footer = {"reason": reason, "length": len(self.steps)}

    def validate(self) -> None:
        for i, step in enumerate(self.steps):
            if step["t"] != i:
                raise ValueError(f"step records not contiguous: expected t={i}, got {step['t']}")
        if self.footer is not None and self.footer["length"] != len(self.steps):
            raise ValueError("footer length does not match step count")


def _line(obj: dict) -> str:
    return json.dumps(obj, separators=(",", ":"))


def dumps(log: EpisodeLog) -> str:
    if log.footer is None:
        raise ValueError("cannot serialize an unterminated episode log")
    lines = [_line(log.header)]
    lines += [_line(step) for step in log.steps]
    lines.append(_line(log.footer))
    return "\n".join(lines) + "\n"


def write_jsonl(log: EpisodeLog, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(dumps(log))


def loads(text: str) -> EpisodeLog:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if len(lines) < 2:
        raise ValueError("episode log needs at least a header and a footer")
    log = EpisodeLog(header=json.loads(lines[0]))
    for ln in lines[1:-1]:
        log.steps.append(json.loads(ln))
    log.footer = json.loads(lines[-1])
    log.validate()
    return log


def read_jsonl(path: str) -> EpisodeLog:
    with open(path, "r", encoding="utf-8") as f:
        return loads(f.read())
