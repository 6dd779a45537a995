"""Finite-volume discretisation of layered constructions."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..building import Construction


@dataclass(frozen=True)
class WallGrid:
    """Nodes of one construction, per square metre of wall.

    Nodes sit on control-volume faces, so a construction split into ``k``
    volumes has ``k + 1`` nodes; node 0 is the exterior face and node -1 the
    interior face. Each node carries half the capacity of each adjacent
    volume.
    """

    positions: np.ndarray     # m from the exterior face
    capacities: np.ndarray    # J/(K m2)
    conductances: np.ndarray  # W/(K m2), between node i and i+1

    @property
    def n_nodes(self) -> int:
        return len(self.positions)

    @property
    def n_volumes(self) -> int:
        return len(self.conductances)

    @property
    def resistance(self) -> float:
        return float(np.sum(1.0 / self.conductances))


def _volume_count(thickness: float, max_node_thickness: float) -> int:
    # guard against 0.15/0.03 = 5.000000000000001
    return max(1, math.ceil(thickness / max_node_thickness - 1e-9))


def discretize(construction: Construction, max_node_thickness: float = 0.03) -> WallGrid:
    if max_node_thickness <= 0:
        raise ValueError("max_node_thickness must be positive")
    positions = [0.0]
    capacities = [0.0]
    conductances = []
    x = 0.0
    for layer in construction.layers:
        mat = layer.material
        n = 1 if mat.resistive_only else _volume_count(layer.thickness, max_node_thickness)
        dx = layer.thickness / n
        half_cap = 0.0 if mat.resistive_only else 0.5 * mat.density * mat.specific_heat * dx
        for _ in range(n):
            conductances.append(mat.conductivity / dx)
            capacities[-1] += half_cap
            x += dx
            positions.append(x)
            capacities.append(half_cap)
    return WallGrid(np.array(positions), np.array(capacities), np.array(conductances))
