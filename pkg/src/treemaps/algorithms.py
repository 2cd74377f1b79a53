"""Algorithm ids shared by the CLI, the study runner and hierarchical layouts."""

from __future__ import annotations

from .geometry import Layout, Rect
from .spiral import SpiralConfig, SpiralUsageError, square_bundle_spiral, strip_bundle_spiral, symmetric_spiral
from .subdivision import dc_baseline, dynamic_prog, modified_dc, squarified
from .treemodel import AreaList

SUBDIVISION = ("squarified", "dc", "mdc", "dp", "opt")
SPIRALS = ("sspiral", "sqbundle", "stbundle")
ALGORITHMS = SUBDIVISION + SPIRALS


def needs_container(name: str) -> bool:
    return name in SUBDIVISION


def run_algorithm(name: str, areas: AreaList, container: Rect | None = None, c: float = 2.0,
                  rho: float = 2.0, alpha: int = 0, beta: float = 0.0, strict: bool = False,
                  **opt_config) -> Layout:
    """Run one algorithm by id; subdivision ids need a container, spirals refuse one."""
    if name not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {name!r}")
    if name in SPIRALS:
        if container is not None:
            raise SpiralUsageError("spiral layouts construct their own container")
        fn = {"sspiral": symmetric_spiral, "sqbundle": square_bundle_spiral,
              "stbundle": strip_bundle_spiral}[name]
        return fn(areas, SpiralConfig(rho))
    if container is None:
        raise ValueError(f"algorithm {name!r} needs a container")
    if name == "squarified":
        return squarified(container, areas, strict=strict)
    if name == "dc":
        return dc_baseline(container, areas, strict=strict)
    if name == "mdc":
        return modified_dc(container, areas, c, strict=strict)
    if name == "dp":
        return dynamic_prog(container, areas, strict=strict)
    from .optimizer import ModelParams, build_model, solve
    from .treemodel import fit_areas
    areas = fit_areas(areas, container.area, strict=strict)
    model = build_model(container, areas, ModelParams(alpha=alpha, beta=beta))
    return solve(model, opt_config or None).to_layout(model)
