"""Fog-of-war observation bookkeeping shared by both gridworld domains."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..objects import CELL_UNKNOWN


@dataclass
class Observation:
    """The agent's accumulated view of the world.

    ``known`` holds current cell values where ``seen`` is true and
    CELL_UNKNOWN elsewhere.  ``first_seen`` freezes the value each cell had
    when it first entered the mask; since the agent is the only thing that
    mutates the map and it only acts on cells inside its own view window,
    ``first_seen`` equals the initial map on the mask.  The pair therefore
    encodes the full modification history (picks, cleared obstacles, opened
    locks) without a separate event log.
    """

    domain: str
    seen: np.ndarray          # bool HxW
    known: np.ndarray         # uint8 HxW, CELL_UNKNOWN where unseen
    first_seen: np.ndarray    # uint8 HxW, initial cell value where seen
    agent_pos: tuple[int, int]
    start_pos: tuple[int, int]
    t: int
    # craft payload
    inventory: dict[str, int] = field(default_factory=dict)
    # box-world payload
    held_key: int | None = None
    obtained: frozenset = frozenset()

    def copy(self) -> "Observation":
        return Observation(
            domain=self.domain,
            seen=self.seen.copy(),
            known=self.known.copy(),
            first_seen=self.first_seen.copy(),
            agent_pos=self.agent_pos,
            start_pos=self.start_pos,
            t=self.t,
            inventory=dict(self.inventory),
            held_key=self.held_key,
            obtained=self.obtained,
        )

    @property
    def shape(self) -> tuple[int, int]:
        return self.seen.shape

    def fully_observed(self) -> bool:
        return bool(self.seen.all())


def blank_observation(domain: str, shape: tuple[int, int]) -> Observation:
    h, w = shape
    return Observation(
        domain=domain,
        seen=np.zeros((h, w), dtype=bool),
        known=np.full((h, w), CELL_UNKNOWN, dtype=np.uint8),
        first_seen=np.full((h, w), CELL_UNKNOWN, dtype=np.uint8),
        agent_pos=(0, 0),
        start_pos=(0, 0),
        t=0,
    )


def reveal_window(obs: Observation, grid: np.ndarray, pos: tuple[int, int], radius: int) -> None:
    """Grow the mask by the square window centered on ``pos`` (clipped)."""
    h, w = grid.shape
    r, c = pos
    r0, r1 = max(0, r - radius), min(h, r + radius + 1)
    c0, c1 = max(0, c - radius), min(w, c + radius + 1)
    window = np.zeros_like(obs.seen)
    window[r0:r1, c0:c1] = True
    newly = window & ~obs.seen
    obs.first_seen[newly] = grid[newly]
    obs.seen |= window
    obs.known[obs.seen] = grid[obs.seen]


def refresh_known(obs: Observation, grid: np.ndarray) -> None:
    """Resync current values on already-seen cells (after the agent edits one)."""
    obs.known[obs.seen] = grid[obs.seen]
