from .config import BoxGenParams, CraftGenParams, EnvConfig, load_config, save_config
from .craft import (
    CraftSim, CraftStructure, CraftWorld, check_craft_world, empty_inventory,
    enumerate_structures, generate_craft_map, reset_craft, step_craft, zone_partition,
)
from .boxworld import (
    BoxSim, BoxWorld, check_box_world, generate_box_map, goal_reached_box,
    list_boxes, reset_box, step_box,
)
from .observe import Observation, blank_observation, reveal_window
from .fixtures import dump_map, load_map, load_map_file, save_map
from .traces import TraceWriter, read_trace

__all__ = [
    "BoxGenParams", "BoxSim", "BoxWorld", "CraftGenParams", "CraftSim",
    "CraftStructure", "CraftWorld", "EnvConfig", "Observation", "TraceWriter",
    "blank_observation", "check_box_world", "check_craft_world", "dump_map",
    "empty_inventory", "enumerate_structures", "generate_box_map",
    "generate_craft_map", "goal_reached_box", "list_boxes", "load_config",
    "load_map", "load_map_file", "read_trace", "reset_box", "reset_craft",
    "reveal_window", "save_config", "save_map", "step_box", "step_craft",
    "zone_partition",
]
