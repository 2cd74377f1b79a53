"""Rectangular treemap layouts, metrics, and an exact perimeter optimizer."""

from .geometry import Layout, Rect, Vec2, aspect_ratio, full_perimeter, hausdorff_distance
from .treemodel import AreaList, WeightedTree, parse_tree

__version__ = "0.1.0"

__all__ = ["AreaList", "Layout", "Rect", "Vec2", "WeightedTree", "aspect_ratio", "full_perimeter",
           "hausdorff_distance", "parse_tree"]
