"""QAOA-assisted UAV path planning with classical baselines."""
from .baselines import AStarConfig, RrtConfig, astar_plan, dijkstra_oracle, rrt_plan, smooth_path
from .cost import CostConfig, CostVector, assign_costs
from .geo import GeoPoint, ObstaclePolygon, Segment, UtmPoint, project_to_utm, unproject_from_utm
from .qaoa import (QaoaParams, QaoaProblem, build_circuit, decode_path, evaluate_loss, optimize,
                   parameter_shift_grad)

__version__ = "0.1.0"

__all__ = [
    "AStarConfig", "RrtConfig", "astar_plan", "dijkstra_oracle", "rrt_plan", "smooth_path",
    "CostConfig", "CostVector", "assign_costs",
    "GeoPoint", "ObstaclePolygon", "Segment", "UtmPoint", "project_to_utm", "unproject_from_utm",
    "QaoaParams", "QaoaProblem", "build_circuit", "decode_path", "evaluate_loss", "optimize",
    "parameter_shift_grad",
]
