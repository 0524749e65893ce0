"""Shared orchestration: build, mesh, assemble and solve one surface."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from . import DEFAULT_SEED
from .collar import surface_I
from .errors import ProfileError
from .meshing import mesh_surface
from .pants import assemble_surface
from .sharpness import sharpness_layout
from .spectral import assemble_fem, default_k_cut, lowest_eigenpairs


@dataclass
class SurfaceRun:
    """One fully computed surface: model, mesh, FEM system and spectrum."""

    name: str
    model: object
    mesh: object
    fem: object
    spectrum: object
    I_geo: float
    I_int: float
    h: float
    seed: int
    params: dict = field(default_factory=dict)

    @property
    def is_sharpness(self) -> bool:
        try:
            sharpness_layout(self.model.graph)
            return True
        except ProfileError:
            return False


def heat_safe_k(volume: float, genus: int) -> int:
    """Eigenpair count keeping the heat-trace truncation flag clear at t = 1.

    Weyl-scaled: enough pairs that lambda_k reaches ~12, with headroom."""
    weyl = math.ceil(1.3 * volume * 12.0 / (4.0 * math.pi)) + 8
    return max(default_k_cut(genus), weyl)


def compute_surface(name: str, graph, h: float, k: int = None,
                    seed: int = DEFAULT_SEED, tol: float = 0.0,
                    for_heat: bool = False, params: dict = None) -> SurfaceRun:
    """Assemble, mesh and eigensolve a pants graph.

    `k` counts requested eigenpairs including the zero mode; `for_heat`
    raises it so heat traces at t >= 1 are truncation-safe.
    """
    model = assemble_surface(graph)
    mesh = mesh_surface(model, h, seed=seed)
    fem = assemble_fem(mesh)
    if k is None:
        k = default_k_cut(model.genus) + 1
    if for_heat:
        k = max(k, heat_safe_k(model.volume, model.genus) + 1)
    spectrum = lowest_eigenpairs(fem, k, tol=tol, seed=seed)
    return SurfaceRun(
        name=name, model=model, mesh=mesh, fem=fem, spectrum=spectrum,
        I_geo=surface_I(model, "geodesic"),
        I_int=surface_I(model, "integral", mesh),
        h=h, seed=seed, params=params or {},
    )
