"""Surface-spec ingestion: JSON-shaped format with a published schema.

Validation reports every violation with its JSON path; nonzero twists are
an explicit unsupported feature (the builder only glues without twists).
serialize(parse(text)) is the identity on canonical text.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources

import jsonschema

from . import DEFAULT_SEED
from .errors import SpecValidationError, UnsupportedFeatureError
from .pants import Gluing, PantsGraph, sharpness_family

_SCHEMA = None


def schema() -> dict:
    global _SCHEMA
    if _SCHEMA is None:
        text = resources.files("hyplab.schemas").joinpath(
            "surface_spec.schema.json").read_text()
        _SCHEMA = json.loads(text)
    return _SCHEMA


@dataclass
class SurfaceSpec:
    """Validated description of one surface plus solve settings."""

    name: str
    generator: dict | None = None
    pants: int | None = None
    gluings: list | None = None
    mesh_h: float = 0.1
    solver: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)

    @property
    def seed(self) -> int:
        return int(self.solver.get("seed", DEFAULT_SEED))

    @property
    def k_cut(self):
        return self.solver.get("k_cut")

    @property
    def tol(self) -> float:
        return float(self.solver.get("tol", 0.0))

    def to_graph(self) -> PantsGraph:
        if self.generator is not None:
            params = self.generator["sharpness"]
            return sharpness_family(int(params["n"]), float(params["epsilon"]))
        gl = [Gluing(a=tuple(g["a"]), b=tuple(g["b"]), length=float(g["length"]))
              for g in self.gluings]
        return PantsGraph(num_pants=int(self.pants), gluings=gl)

    def to_payload(self) -> dict:
        payload = {"name": self.name, "mesh_h": self.mesh_h}
        if self.generator is not None:
            payload["generator"] = self.generator
        else:
            payload["pants"] = self.pants
            payload["gluings"] = self.gluings
        if self.solver:
            payload["solver"] = self.solver
        if self.outputs:
            payload["outputs"] = self.outputs
        return payload


def _json_path(err) -> str:
    parts = []
    for p in err.absolute_path:
        parts.append(f"[{p}]" if isinstance(p, int) else f".{p}")
    return "spec" + "".join(parts)


def parse_spec(text: str) -> SurfaceSpec:
    """Parse and validate a spec document; collects all schema violations."""
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecValidationError(
            f"malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from exc
    validator = jsonschema.Draft7Validator(schema())
    violations = [f"{_json_path(e)}: {e.message}"
                  for e in sorted(validator.iter_errors(payload), key=_json_path)]
    if violations:
        raise SpecValidationError("schema violations", violations=violations)

    has_gen = "generator" in payload
    has_explicit = "pants" in payload or "gluings" in payload
    checks = []
    if has_gen == has_explicit:
        checks.append("spec: exactly one of generator or pants+gluings required")
    if has_explicit and ("pants" not in payload or "gluings" not in payload):
        checks.append("spec: explicit surfaces need both pants and gluings")
    mesh_h = payload.get("mesh_h", 0.1)
    if not 0 < mesh_h <= 0.3:
        checks.append(f"spec.mesh_h: must lie in (0, 0.3], got {mesh_h}")
    for i, g in enumerate(payload.get("gluings", []) or []):
        if g.get("length", 0) <= 0:
            checks.append(f"spec.gluings[{i}].length: must be positive, "
                          f"got {g.get('length')}")
        twist = g.get("twist", 0.0)
        if twist != 0.0:
            raise UnsupportedFeatureError(
                f"spec.gluings[{i}].twist: nonzero Fenchel-Nielsen twists are "
                "not supported (zero-twist gluings only)",
                violations=[f"spec.gluings[{i}].twist = {twist}"],
            )
    if checks:
        raise SpecValidationError("invalid surface spec", violations=checks)

    return SurfaceSpec(
        name=payload["name"],
        generator=payload.get("generator"),
        pants=payload.get("pants"),
        gluings=payload.get("gluings"),
        mesh_h=float(mesh_h),
        solver=dict(payload.get("solver", {})),
        outputs=dict(payload.get("outputs", {})),
    )


def serialize_spec(spec: SurfaceSpec) -> str:
    """Canonical text form (sorted keys, two-space indent, trailing newline)."""
    return json.dumps(spec.to_payload(), indent=2, sort_keys=True) + "\n"


@dataclass
class SweepSpec:
    """Sweep configuration: a list of surface specs plus shared grids."""

    surfaces: list
    k_list: list
    t_grid: list
    mesh_h: float
    seed: int


def parse_sweep(text: str) -> SweepSpec:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecValidationError(
            f"malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(payload, dict) or "sweep" not in payload:
        raise SpecValidationError("sweep config needs a top-level 'sweep' array")
    mesh_h = float(payload.get("mesh_h", 0.1))
    surfaces = []
    for i, entry in enumerate(payload["sweep"]):
        entry = dict(entry)
        entry.setdefault("mesh_h", mesh_h)
        try:
            surfaces.append(parse_spec(json.dumps(entry)))
        except SpecValidationError as exc:
            raise SpecValidationError(
                f"sweep[{i}]: {exc}", violations=getattr(exc, "violations", [])
            ) from exc
    return SweepSpec(
        surfaces=surfaces,
        k_list=[int(k) for k in payload.get("k_list", [1, 2, 3])],
        t_grid=[float(t) for t in payload.get("t_grid",
                [1.0, 1.8, 3.2, 5.6, 10.0, 18.0, 32.0, 56.0, 100.0])],
        mesh_h=mesh_h,
        seed=int(payload.get("seed", DEFAULT_SEED)),
    )
