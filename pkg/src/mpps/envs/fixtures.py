"""Textual map fixtures: one character per cell plus a commented header.

The format round-trips both domains losslessly; the exactly-one loose key of
box-world is marked ``*`` in the grid with its color named in the header.
"""

from __future__ import annotations

import numpy as np

from ..objects import (
    BOX_COLORS, CELL_EMPTY, CELL_FACTORY, CELL_GEM, CELL_GOLD, CELL_GRASS,
    CELL_IRON, CELL_STONE, CELL_TOOLSHED, CELL_WATER, CELL_WOOD, CELL_WORKBENCH,
    CRAFT_OBJECTS, boxkey_cell, cell_color, is_boxkey, is_lock, is_loose_key,
    lock_cell, loose_cell,
)
from .boxworld import BoxWorld
from .craft import CraftWorld, empty_inventory

CRAFT_CHARS = {
    CELL_EMPTY: ".", CELL_WOOD: "w", CELL_IRON: "i", CELL_GRASS: "g",
    CELL_GOLD: "o", CELL_GEM: "m", CELL_WATER: "~", CELL_STONE: "#",
    CELL_FACTORY: "F", CELL_WORKBENCH: "B", CELL_TOOLSHED: "T",
}
CRAFT_CODES = {ch: code for code, ch in CRAFT_CHARS.items()}

COLOR_CHARS = ("r", "g", "b", "y", "p", "o", "c", "m", "n", "k", "l", "t")
COLOR_OF_CHAR = {ch: i for i, ch in enumerate(COLOR_CHARS)}


def dump_map(world) -> str:
    lines = ["# mpps-map v1"]
    if isinstance(world, CraftWorld):
        lines.append("# domain: craft")
        lines.append(f"# agent: {world.agent_pos[0]} {world.agent_pos[1]}")
        lines.append(f"# start: {world.start_pos[0]} {world.start_pos[1]}")
        lines.append(f"# t: {world.t}")
        lines.append(f"# facing: {world.facing}")
        inv = " ".join(f"{k}={v}" for k, v in world.inventory.items() if v)
        lines.append(f"# inventory: {inv}".rstrip())
        for row in world.grid:
            lines.append("".join(CRAFT_CHARS[int(code)] for code in row))
    elif isinstance(world, BoxWorld):
        lines.append("# domain: box")
        lines.append(f"# agent: {world.agent_pos[0]} {world.agent_pos[1]}")
        lines.append(f"# start: {world.start_pos[0]} {world.start_pos[1]}")
        lines.append(f"# t: {world.t}")
        lines.append(f"# facing: {world.facing}")
        held = BOX_COLORS[world.held_key] if world.held_key is not None else "none"
        lines.append(f"# held: {held}")
        obtained = ",".join(sorted(BOX_COLORS[c] for c in world.obtained)) or "none"
        lines.append(f"# obtained: {obtained}")
        lines.append(f"# goal: {BOX_COLORS[world.goal_color]}")
        lines.append(f"# goal_length: {world.goal_length}")
        lines.append(f"# distractors: {world.distractors}")
        loose_color = "none"
        for r in range(world.grid.shape[0]):
            for c in range(world.grid.shape[1]):
                if is_loose_key(int(world.grid[r, c])):
                    loose_color = BOX_COLORS[cell_color(int(world.grid[r, c]))]
        lines.append(f"# loose: {loose_color}")
        for row in world.grid:
            chars = []
            for code in row:
                code = int(code)
                if code == CELL_EMPTY:
                    chars.append(".")
                elif is_lock(code):
                    chars.append(COLOR_CHARS[cell_color(code)].upper())
                elif is_boxkey(code):
                    chars.append(COLOR_CHARS[cell_color(code)])
                elif is_loose_key(code):
                    chars.append("*")
                else:
                    raise ValueError(f"cell code {code} not dumpable")
            lines.append("".join(chars))
    else:
        raise TypeError(f"cannot dump {type(world)!r}")
    return "\n".join(lines) + "\n"


def load_map(text: str):
    header: dict[str, str] = {}
    rows: list[str] = []
    for line in text.strip().splitlines():
        if line.startswith("#"):
            body = line[1:].strip()
            if ":" in body:
                key, _, value = body.partition(":")
                header[key.strip()] = value.strip()
        elif line.strip():
            rows.append(line.strip())
    domain = header.get("domain", "craft")
    size = len(rows)
    agent = tuple(int(x) for x in header["agent"].split())
    start = tuple(int(x) for x in header.get("start", header["agent"]).split())
    t = int(header.get("t", 0))
    facing = int(header.get("facing", 1))
    if domain == "craft":
        grid = np.zeros((size, len(rows[0])), dtype=np.uint8)
        for r, row in enumerate(rows):
            for c, ch in enumerate(row):
                grid[r, c] = CRAFT_CODES[ch]
        inventory = empty_inventory()
        inv_text = header.get("inventory", "")
        for item in inv_text.split():
            name, _, count = item.partition("=")
            if name in CRAFT_OBJECTS:
                inventory[name] = int(count)
        return CraftWorld(grid=grid, agent_pos=agent, inventory=inventory,
                          t=t, facing=facing, start_pos=start)
    if domain == "box":
        loose = header.get("loose", "none")
        grid = np.zeros((size, len(rows[0])), dtype=np.uint8)
        for r, row in enumerate(rows):
            for c, ch in enumerate(row):
                if ch == ".":
                    grid[r, c] = CELL_EMPTY
                elif ch == "*":
                    grid[r, c] = loose_cell(BOX_COLORS.index(loose))
                elif ch.isupper():
                    grid[r, c] = lock_cell(COLOR_OF_CHAR[ch.lower()])
                else:
                    grid[r, c] = boxkey_cell(COLOR_OF_CHAR[ch])
        held = header.get("held", "none")
        obtained_text = header.get("obtained", "none")
        obtained = frozenset(
            BOX_COLORS.index(name) for name in obtained_text.split(",")
            if name and name != "none"
        )
        return BoxWorld(
            grid=grid, agent_pos=agent,
            held_key=None if held == "none" else BOX_COLORS.index(held),
            obtained=obtained, goal_color=BOX_COLORS.index(header["goal"]),
            t=t, facing=facing, start_pos=start,
            goal_length=int(header.get("goal_length", 1)),
            distractors=int(header.get("distractors", 0)),
        )
    raise ValueError(f"unknown domain {domain!r}")


def save_map(world, path: str) -> None:
    with open(path, "w") as fh:
        fh.write(dump_map(world))


def load_map_file(path: str):
    with open(path) as fh:
        return load_map(fh.read())
