"""Shared vocabulary: cell codes, object registries, actions, colors.

Everything downstream (environments, abstraction, synthesis) indexes objects
by their position in these canonical tuples, so the order here is load-bearing
and pinned by tests.
"""

from __future__ import annotations

# ---------------------------------------------------------------------------
# Craft domain

RESOURCES = ("wood", "iron", "grass", "gold", "gem")
WORKSHOPS = ("factory", "workbench", "toolshed")
TOOLS = ("bridge", "axe")
ARTIFACTS = ("bridge", "axe", "plank", "stick", "cloth", "rope", "bed", "shears", "ladder")

# Inventory slots: resources first, then artifacts. 14 objects total.
CRAFT_OBJECTS = RESOURCES + ARTIFACTS

RESOURCE_INDEX = {name: i for i, name in enumerate(RESOURCES)}
WORKSHOP_INDEX = {name: i for i, name in enumerate(WORKSHOPS)}
OBJECT_INDEX = {name: i for i, name in enumerate(CRAFT_OBJECTS)}

# Grid cell codes (uint8). 255 marks an unobserved cell in known-grids.
CELL_EMPTY = 0
CELL_WOOD = 1
CELL_IRON = 2
CELL_GRASS = 3
CELL_GOLD = 4
CELL_GEM = 5
CELL_WATER = 6
CELL_STONE = 7
CELL_FACTORY = 8
CELL_WORKBENCH = 9
CELL_TOOLSHED = 10
CELL_UNKNOWN = 255

RESOURCE_CELLS = {CELL_WOOD: "wood", CELL_IRON: "iron", CELL_GRASS: "grass",
                  CELL_GOLD: "gold", CELL_GEM: "gem"}
WORKSHOP_CELLS = {CELL_FACTORY: "factory", CELL_WORKBENCH: "workbench",
                  CELL_TOOLSHED: "toolshed"}
OBSTACLE_CELLS = (CELL_WATER, CELL_STONE)

CELL_OF_RESOURCE = {name: code for code, name in RESOURCE_CELLS.items()}
CELL_OF_WORKSHOP = {name: code for code, name in WORKSHOP_CELLS.items()}

# Obstacle type crossed by each tool.
TOOL_CLEARS = {"bridge": CELL_WATER, "axe": CELL_STONE}

# Boundary classification codes between zones.
B_CONNECTED = 0
B_WATER = 1
B_STONE = 2
B_NOT_ADJACENT = 3

BOUNDARY_NAMES = ("connected", "water", "stone", "not-adjacent")
BOUNDARY_OF_OBSTACLE = {CELL_WATER: B_WATER, CELL_STONE: B_STONE}

# ---------------------------------------------------------------------------
# Actions

A_UP, A_DOWN, A_LEFT, A_RIGHT, A_USE = 0, 1, 2, 3, 4
CRAFT_ACTIONS = (A_UP, A_DOWN, A_LEFT, A_RIGHT, A_USE)
BOX_ACTIONS = (A_UP, A_DOWN, A_LEFT, A_RIGHT)
ACTION_NAMES = ("up", "down", "left", "right", "use")
ACTION_DELTAS = {A_UP: (-1, 0), A_DOWN: (1, 0), A_LEFT: (0, -1), A_RIGHT: (0, 1)}

# ---------------------------------------------------------------------------
# Box-world domain

BOX_COLORS = ("red", "green", "blue", "yellow", "purple", "orange",
              "cyan", "magenta", "brown", "pink", "lime", "teal")
COLOR_INDEX = {name: i for i, name in enumerate(BOX_COLORS)}

# Box-world cell codes: lock / boxed key / loose key blocks indexed by color.
BOX_LOCK_BASE = 20
BOX_KEY_BASE = 60
BOX_LOOSE_BASE = 100


def lock_cell(color: int) -> int:
    return BOX_LOCK_BASE + color


def boxkey_cell(color: int) -> int:
    return BOX_KEY_BASE + color


def loose_cell(color: int) -> int:
    return BOX_LOOSE_BASE + color


def cell_color(code: int) -> int:
    """Color index of a lock / boxed-key / loose-key cell."""
    if BOX_LOCK_BASE <= code < BOX_LOCK_BASE + len(BOX_COLORS):
        return code - BOX_LOCK_BASE
    if BOX_KEY_BASE <= code < BOX_KEY_BASE + len(BOX_COLORS):
        return code - BOX_KEY_BASE
    if BOX_LOOSE_BASE <= code < BOX_LOOSE_BASE + len(BOX_COLORS):
        return code - BOX_LOOSE_BASE
    raise ValueError(f"cell code {code} carries no color")


def is_lock(code: int) -> bool:
    return BOX_LOCK_BASE <= code < BOX_LOCK_BASE + len(BOX_COLORS)


def is_boxkey(code: int) -> bool:
    return BOX_KEY_BASE <= code < BOX_KEY_BASE + len(BOX_COLORS)


def is_loose_key(code: int) -> bool:
    return BOX_LOOSE_BASE <= code < BOX_LOOSE_BASE + len(BOX_COLORS)


# Count cap shared by the abstraction, generator and synthesizer bit-blasting.
COUNT_CAP = 4
