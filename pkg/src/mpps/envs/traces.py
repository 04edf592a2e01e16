"""Newline-delimited JSON episode traces.

Each file opens with a self-describing header record followed by one record
per step carrying (t, action, agent_pos, inventory delta, mask delta); replay
verification reconstructs the episode from these plus the map fixture.
"""

from __future__ import annotations

import json

from ..objects import ACTION_NAMES

TRACE_FORMAT = "mpps-trace"
TRACE_VERSION = 1


class TraceWriter:
    def __init__(self, domain: str, map_text: str, goal: str, extra: dict | None = None):
        self.records: list[dict] = [{
            "format": TRACE_FORMAT,
            "version": TRACE_VERSION,
            "domain": domain,
            "map": map_text,
            "goal": goal,
            **(extra or {}),
        }]

    def step(self, t: int, action: int, agent_pos, inv_delta: dict,
             mask_delta: list) -> None:
        self.records.append({
            "t": t,
            "action": ACTION_NAMES[action],
            "pos": list(agent_pos),
            "inv_delta": inv_delta,
            "mask_delta": [list(cell) for cell in mask_delta],
        })

    def replan(self, t: int, program: list[str] | None, worlds_digest: str,
               objective: float | None) -> None:
        self.records.append({
            "replan_at": t,
            "program": program,
            "worlds": worlds_digest,
            "objective": objective,
        })

    def finish(self, success: bool, steps: int) -> None:
        self.records.append({"result": "success" if success else "failure",
                             "steps": steps})

    def dumps(self) -> str:
        return "\n".join(json.dumps(r, sort_keys=True) for r in self.records) + "\n"

    def save(self, path: str) -> None:
        with open(path, "w") as fh:
            fh.write(self.dumps())


def read_trace(path: str) -> list[dict]:
    with open(path) as fh:
        records = [json.loads(line) for line in fh if line.strip()]
    if not records or records[0].get("format") != TRACE_FORMAT:
        raise ValueError(f"{path} is not an mpps trace")
    return records


def action_code(name: str) -> int:
    return ACTION_NAMES.index(name)
