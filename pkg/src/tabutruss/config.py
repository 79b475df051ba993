"""Run configuration files.

A config is a JSON object with the blocks ``problem``, ``objective``,
``search`` and ``output``; see ``docs/config-schema.md``. Unknown keys are
rejected. Missing search parameters take the engine defaults, and the
resolved values are echoed into every report.
"""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass, field, fields, replace
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np

from .engine import SearchConfig
from .fem import G_IN_PER_S2, MASS_MATRIX_KINDS, TrussModel, standard_ten_bar_model
from .objectives import (COMPOUND_FORMS, DISPLACEMENT_MODES, KINDS, ConstraintSet, NormalizationConstants,
                         ObjectiveSpec)

UNIT_SYSTEMS = ("metric", "imperial")
# Converts the configured density to a mass density consistent with the force unit:
# metric configs use kN, m and kg/m^3 (so tonnes), imperial ones lbf, in and lb/in^3.
DYNAMIC_MASS_FACTORS = {"metric": 1e-3, "imperial": 1.0 / G_IN_PER_S2}

_TOP_KEYS = {"description", "problem", "objective", "search", "output"}
_PROBLEM_KEYS = {"type", "unit_system", "notes", "length", "youngs_modulus", "density", "load",
                 "nodes", "members", "supports", "loads", "area_unit_scale", "mass_matrix",
                 "dynamic_mass_factor"}
_STANDARD_REQUIRED = {"length", "youngs_modulus", "density", "load"}
_GENERIC_REQUIRED = {"nodes", "members", "supports", "loads", "youngs_modulus", "density"}
_OBJECTIVE_KEYS = {"kind", "sigma_max", "delta_max", "a_min", "a_max", "displacement_mode",
                   "compound_form", "normalization", "normalization_max_evaluations"}
_SEARCH_EXTRA = {"start", "min_step"}
_SEARCH_KEYS = {f.name for f in fields(SearchConfig)} | _SEARCH_EXTRA
_OUTPUT_KEYS = {"directory", "trace_file"}


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending key."""


@dataclass
class RunConfig:
    model: TrussModel
    objective: ObjectiveSpec | None
    constraints: ConstraintSet
    search: SearchConfig
    start: np.ndarray
    min_step: float
    unit_system: str
    output_dir: Path
    trace_file: str = "trace.csv"
    normalization_source: Any = None
    normalization_max_evaluations: int | None = None
    resolved: dict = field(default_factory=dict)
    path: Path | None = None

    @property
    def kind(self) -> str:
        return self.resolved["objective"]["kind"]

    @property
    def config_hash(self) -> str:
        text = json.dumps(self.resolved, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]

    def with_overrides(self, seed: int | None = None, max_evaluations: int | None = None) -> "RunConfig":
        """Copy with command-line overrides folded into the search block."""
        out = copy.copy(self)
        out.resolved = copy.deepcopy(self.resolved)
        changes = {}
        if seed is not None:
            changes["rng_seed"] = seed
        if max_evaluations is not None:
            changes["max_evaluations"] = max_evaluations
        if changes:
            out.search = replace(self.search, **changes)
            out.resolved["search"].update(changes)
        return out


def _check_keys(block: dict, allowed: set, where: str) -> None:
    if not isinstance(block, dict):
        raise ConfigError(f"{where} must be a JSON object")
    unknown = sorted(set(block) - allowed)
    if unknown:
        raise ConfigError(f"unknown key {where}.{unknown[0]}")


def _positive(block: dict, key: str, where: str) -> float:
    if key not in block:
        raise ConfigError(f"missing key {where}.{key}")
    v = block[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not v > 0:
        raise ConfigError(f"{where}.{key} must be a positive number, got {v!r}")
    return float(v)


def _build_model(p: dict) -> TrussModel:
    kind = p.get("type", "standard_ten_bar")
    unit_system = p.get("unit_system")
    if unit_system not in UNIT_SYSTEMS:
        raise ConfigError(f"problem.unit_system must be one of {UNIT_SYSTEMS}, got {unit_system!r}")
    mass_matrix = p.get("mass_matrix", "consistent")
    if mass_matrix not in MASS_MATRIX_KINDS:
        raise ConfigError(f"problem.mass_matrix must be one of {MASS_MATRIX_KINDS}")
    extra = {
        "mass_matrix": mass_matrix,
        "area_scale": _positive(p, "area_unit_scale", "problem") if "area_unit_scale" in p else 1.0,
        "dynamic_mass_factor": (_positive(p, "dynamic_mass_factor", "problem") if "dynamic_mass_factor" in p
                                else DYNAMIC_MASS_FACTORS[unit_system]),
    }
    if kind == "standard_ten_bar":
        for key in sorted(_GENERIC_REQUIRED - _STANDARD_REQUIRED):
            if key in p:
                raise ConfigError(f"problem.{key} is not allowed with type standard_ten_bar")
        return standard_ten_bar_model(*(_positive(p, k, "problem") for k in
                                        ("length", "youngs_modulus", "density", "load")), **extra)
    if kind != "truss":
        raise ConfigError(f"problem.type must be 'standard_ten_bar' or 'truss', got {kind!r}")
    for key in sorted(_GENERIC_REQUIRED):
        if key not in p:
            raise ConfigError(f"missing key problem.{key}")
    try:
        loads = {int(k): tuple(v) for k, v in p["loads"].items()}
        return TrussModel(nodes=np.array(p["nodes"], dtype=float), members=[tuple(m) for m in p["members"]],
                          supports=frozenset(p["supports"]), loads=loads,
                          youngs_modulus=_positive(p, "youngs_modulus", "problem"),
                          density=_positive(p, "density", "problem"), **extra)
    except (TypeError, ValueError, AttributeError) as exc:
        raise ConfigError(f"problem: {exc}") from exc


def parse_config(data: dict, path: Path | None = None) -> RunConfig:
    """Validate a decoded config object and resolve defaults."""
    _check_keys(data, _TOP_KEYS, "config")
    for block in ("problem", "objective"):
        if block not in data:
            raise ConfigError(f"missing block {block}")
    problem = data["problem"]
    _check_keys(problem, _PROBLEM_KEYS, "problem")
    model = _build_model(problem)

    obj = data["objective"]
    _check_keys(obj, _OBJECTIVE_KEYS, "objective")
    kind = obj.get("kind", "mass")
    if kind not in KINDS:
        raise ConfigError(f"objective.kind must be one of {KINDS}, got {kind!r}")
    if obj.get("displacement_mode", "component") not in DISPLACEMENT_MODES:
        raise ConfigError(f"objective.displacement_mode must be one of {DISPLACEMENT_MODES}")
    if obj.get("compound_form", "normalized") not in COMPOUND_FORMS:
        raise ConfigError(f"objective.compound_form must be one of {COMPOUND_FORMS}")
    try:
        constraints = ConstraintSet(
            sigma_max=_positive(obj, "sigma_max", "objective"),
            delta_max=_positive(obj, "delta_max", "objective"),
            a_min=_positive(obj, "a_min", "objective"),
            a_max=_positive(obj, "a_max", "objective"),
            displacement_mode=obj.get("displacement_mode", "component"),
        )
    except ValueError as exc:
        raise ConfigError(f"objective: {exc}") from exc
    norm_source = obj.get("normalization")
    spec = None
    if kind != "compound":
        spec = ObjectiveSpec(kind, constraints)
    elif isinstance(norm_source, dict):
        try:
            spec = ObjectiveSpec(kind, constraints, NormalizationConstants.from_dict(norm_source),
                                 obj.get("compound_form", "normalized"))
        except ValueError as exc:
            raise ConfigError(f"objective.normalization: {exc}") from exc
    elif norm_source is not None and not isinstance(norm_source, str):
        raise ConfigError("objective.normalization must be an object, a file path or null")

    search_block = dict(data.get("search", {}))
    _check_keys(search_block, _SEARCH_KEYS, "search")
    min_step = _positive(search_block, "min_step", "search") if "min_step" in search_block else None
    if min_step is None:
        raise ConfigError("missing key search.min_step")
    start = search_block.pop("start", None)
    search_block.pop("min_step")
    try:
        search = SearchConfig(**search_block)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"search: {exc}") from exc
    if start is None:
        start_arr = np.full(model.n_members, constraints.a_max)
    else:
        start_arr = np.broadcast_to(np.asarray(start, dtype=float), (model.n_members,)).copy()

    out = data.get("output", {})
    _check_keys(out, _OUTPUT_KEYS, "output")
    out_dir = Path(out.get("directory", "runs"))
    nmax = obj.get("normalization_max_evaluations")
    if nmax is not None and (isinstance(nmax, bool) or not isinstance(nmax, int) or nmax < 1):
        raise ConfigError("objective.normalization_max_evaluations must be a positive integer")

    resolved = copy.deepcopy(data)
    resolved["search"] = {**search.to_dict(), "start": start_arr.tolist(), "min_step": min_step}
    resolved["objective"] = {"displacement_mode": "component", "compound_form": "normalized", **obj, "kind": kind}
    resolved["output"] = {"directory": str(out_dir), "trace_file": out.get("trace_file", "trace.csv")}
    return RunConfig(
        model=model, objective=spec, constraints=constraints, search=search, start=start_arr,
        min_step=min_step, unit_system=problem["unit_system"],
        output_dir=out_dir,
        trace_file=resolved["output"]["trace_file"], normalization_source=norm_source,
        normalization_max_evaluations=nmax, resolved=resolved, path=path,
    )


def load_config(path) -> RunConfig:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: JSON parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return parse_config(data, path)


def shipped_config_path(name: str) -> Path:
    """Path of a config bundled with the package (``bland.json``, ``bd.json``)."""
    return Path(str(resources.files("tabutruss") / "configs" / name))
