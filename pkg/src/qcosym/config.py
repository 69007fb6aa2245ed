"""JSON run configuration for the ``qcosym`` command line.

Top-level keys are ``command``, ``scenario``, ``integrator`` and ``output``;
anything else is rejected.  ``scenario`` is either a built-in name or an
object.  See ``configs/README.md`` for the full schema.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

from .fastslow import CASES, REFERENCE_X0, POTENTIALS, ScenarioConfig
from .flow import METHODS, IntegratorConfig

COMMANDS = ("validate", "simulate", "average", "compare", "brackets")
STRUCTURES = ("standard-example", "fast-slow", "non-closed-example")
BUILTIN_SCENARIOS = ("case-a", "case-b", "case-b-averaged", "standard-example")


class ConfigParseError(ValueError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None,
                 field: str | None = None):
        where = []
        if line is not None:
            where.append(f"line {line}" + (f", column {column}" if column is not None else ""))
        if field is not None:
            where.append(f"field {field!r}")
        super().__init__(f"{message}" + (f" ({'; '.join(where)})" if where else ""))
        self.line, self.column, self.field = line, column, field


class ConfigValidationError(ValueError):
    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


@dataclass(frozen=True)
class StructureConfig:
    structure: str = "standard-example"
    n: int = 1
    q: int = 1
    points: int = 64
    box: tuple[float, float] = (-2.0, 2.0)
    seed: int = 0
    pairs: tuple[tuple[str, str], ...] = ()
    eps: float = 0.05


@dataclass(frozen=True)
class OutputConfig:
    dir: str = "out"
    svg: bool = False
    csv_precision: int = 12


@dataclass(frozen=True)
class CliConfig:
    command: str
    scenario: ScenarioConfig | StructureConfig
    output: OutputConfig = field(default_factory=OutputConfig)


def _adaptive(t_max: float) -> IntegratorConfig:
    return IntegratorConfig(method="rk45-adaptive", t_max=t_max, dt=1e-2, rtol=1e-9, atol=1e-12, record_every=1)


def _fixed(t_max: float, dt: float = 1e-2, record_every: int = 10) -> IntegratorConfig:
    return IntegratorConfig(method="rk4-fixed", t_max=t_max, dt=dt, record_every=record_every)


def builtin_scenario(name: str) -> ScenarioConfig | StructureConfig:
    """Scenarios that pin the published parameters (eps = 0.05, T = 200, x0 = (1, 0, 1, 0))."""
    if name == "case-a":
        return ScenarioConfig(case="case-a", eps=0.05, x0=REFERENCE_X0, t_max=200.0, integrator=_adaptive(200.0))
    if name == "case-b":
        return ScenarioConfig(case="case-b", eps=0.05, x0=REFERENCE_X0, t_max=200.0, integrator=_fixed(200.0))
    if name == "case-b-averaged":
        return ScenarioConfig(case="case-b-averaged", eps=0.05, x0=REFERENCE_X0, t_max=200.0,
                              integrator=_fixed(200.0, dt=0.1, record_every=1), secular_tau_average=True)
    if name == "standard-example":
        return StructureConfig()
    raise ConfigValidationError("scenario", f"unknown built-in scenario {name!r}")


_SCENARIO_KEYS = {"case", "eps", "x0", "t_max", "seed", "omega0", "frequency", "potential", "I0",
                  "secular_tau_average", "nodes"}
_STRUCTURE_KEYS = {"structure", "n", "q", "points", "box", "seed", "pairs", "eps"}
_INTEGRATOR_KEYS = {"method", "dt", "rtol", "atol", "record_every"}
_OUTPUT_KEYS = {"dir", "svg", "csv_precision"}


def _reject_unknown(obj: dict, allowed: set, where: str):
    extra = sorted(set(obj) - allowed)
    if extra:
        raise ConfigParseError(f"unknown key {extra[0]!r}", field=f"{where}.{extra[0]}" if where else extra[0])


def _expect(obj: dict, key: str, types, where: str):
    v = obj[key]
    if isinstance(v, bool) and bool not in (types if isinstance(types, tuple) else (types,)):
        raise ConfigParseError(f"expected {types}, got bool", field=f"{where}.{key}")
    if not isinstance(v, types):
        raise ConfigParseError(f"expected {getattr(types, '__name__', types)}, got {type(v).__name__}",
                               field=f"{where}.{key}")
    return v


def _number(obj, key, where):
    return float(_expect(obj, key, (int, float), where))


def _integer(obj, key, where):
    return int(_expect(obj, key, int, where))


def _parse_integrator(obj: dict | None, base: IntegratorConfig) -> IntegratorConfig:
    if obj is None:
        return base
    if not isinstance(obj, dict):
        raise ConfigParseError("expected an object", field="integrator")
    _reject_unknown(obj, _INTEGRATOR_KEYS, "integrator")
    kw: dict[str, Any] = {}
    if "method" in obj:
        kw["method"] = _expect(obj, "method", str, "integrator")
        if kw["method"] not in METHODS:
            raise ConfigValidationError("integrator.method", f"must be one of {METHODS}")
    for k in ("dt", "rtol", "atol"):
        if k in obj:
            kw[k] = _number(obj, k, "integrator")
            if not kw[k] > 0:
                raise ConfigValidationError(f"integrator.{k}", "must be positive")
    if "record_every" in obj:
        kw["record_every"] = _integer(obj, "record_every", "integrator")
        if kw["record_every"] < 1:
            raise ConfigValidationError("integrator.record_every", "must be >= 1")
    return replace(base, **kw)


def _parse_scenario(obj: dict, integrator: dict | None) -> ScenarioConfig:
    _reject_unknown(obj, _SCENARIO_KEYS, "scenario")
    case = obj.get("case", "case-b")
    if not isinstance(case, str) or case not in CASES:
        raise ConfigValidationError("scenario.case", f"must be one of {CASES}")
    base = builtin_scenario(case) if case != "custom" else ScenarioConfig(case="custom", integrator=_adaptive(200.0))
    kw: dict[str, Any] = {"case": case}
    for k in ("eps", "t_max", "omega0"):
        if k in obj:
            kw[k] = _number(obj, k, "scenario")
    if kw.get("eps", 0.0) < 0:
        raise ConfigValidationError("scenario.eps", "must be >= 0")
    if "t_max" in kw and not kw["t_max"] > 0:
        raise ConfigValidationError("scenario.t_max", "must be positive")
    if "omega0" in kw and not kw["omega0"] > 0:
        raise ConfigValidationError("scenario.omega0", "must be positive")
    if "x0" in obj:
        x0 = _expect(obj, "x0", list, "scenario")
        if len(x0) != 6 or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in x0):
            raise ConfigValidationError("scenario.x0", "must be six numbers (t, tau, q, p, Q, P)")
        kw["x0"] = tuple(float(v) for v in x0)
    if "seed" in obj:
        kw["seed"] = _integer(obj, "seed", "scenario")
    if "I0" in obj and obj["I0"] is not None:
        kw["I0"] = _number(obj, "I0", "scenario")
        if kw["I0"] < 0:
            raise ConfigValidationError("scenario.I0", "must be >= 0")
    if "frequency" in obj:
        kw["frequency"] = _expect(obj, "frequency", str, "scenario")
        if kw["frequency"] not in ("constant", "sqrt-one-plus-q2"):
            raise ConfigValidationError("scenario.frequency", "must be 'constant' or 'sqrt-one-plus-q2'")
    if "potential" in obj:
        kw["potential"] = _expect(obj, "potential", str, "scenario")
        if kw["potential"] not in POTENTIALS:
            raise ConfigValidationError("scenario.potential", f"must be one of {sorted(POTENTIALS)}")
    if "secular_tau_average" in obj:
        kw["secular_tau_average"] = _expect(obj, "secular_tau_average", bool, "scenario")
    if "nodes" in obj:
        kw["nodes"] = _integer(obj, "nodes", "scenario")
        if kw["nodes"] < 8 or kw["nodes"] % 2:
            raise ConfigValidationError("scenario.nodes", "must be an even integer >= 8")
    t_max = kw.get("t_max", base.t_max)
    # parse against a horizon long enough for any step, then check dt < t_max explicitly
    icfg = _parse_integrator(integrator, replace(base.integrator, t_max=float("inf")))
    if not icfg.dt < t_max:
        raise ConfigValidationError("integrator.dt", "must be smaller than scenario.t_max")
    kw["integrator"] = replace(icfg, t_max=t_max)
    return replace(base, **kw)


def _parse_structure(obj: dict) -> StructureConfig:
    _reject_unknown(obj, _STRUCTURE_KEYS, "scenario")
    kw: dict[str, Any] = {}
    name = obj.get("structure", "standard-example")
    if name not in STRUCTURES:
        raise ConfigValidationError("scenario.structure", f"must be one of {STRUCTURES}")
    kw["structure"] = name
    for k in ("n", "q", "points", "seed"):
        if k in obj:
            kw[k] = _integer(obj, k, "scenario")
            if k != "seed" and kw[k] < 1:
                raise ConfigValidationError(f"scenario.{k}", "must be >= 1")
    if "eps" in obj:
        kw["eps"] = _number(obj, "eps", "scenario")
        if kw["eps"] < 0:
            raise ConfigValidationError("scenario.eps", "must be >= 0")
    if "box" in obj:
        box = _expect(obj, "box", list, "scenario")
        if len(box) != 2 or not all(isinstance(v, (int, float)) for v in box) or not box[0] < box[1]:
            raise ConfigValidationError("scenario.box", "must be [lo, hi] with lo < hi")
        kw["box"] = (float(box[0]), float(box[1]))
    if "pairs" in obj:
        pairs = _expect(obj, "pairs", list, "scenario")
        if not all(isinstance(p, list) and len(p) == 2 and all(isinstance(v, str) for v in p) for p in pairs):
            raise ConfigValidationError("scenario.pairs", "must be a list of [f, g] name pairs")
        kw["pairs"] = tuple((a, b) for a, b in pairs)
    return StructureConfig(**kw)


def _parse_output(obj: dict | None) -> OutputConfig:
    if obj is None:
        return OutputConfig()
    if not isinstance(obj, dict):
        raise ConfigParseError("expected an object", field="output")
    _reject_unknown(obj, _OUTPUT_KEYS, "output")
    kw: dict[str, Any] = {}
    if "dir" in obj:
        kw["dir"] = _expect(obj, "dir", str, "output")
    if "svg" in obj:
        kw["svg"] = _expect(obj, "svg", bool, "output")
    if "csv_precision" in obj:
        kw["csv_precision"] = _integer(obj, "csv_precision", "output")
        if not 6 <= kw["csv_precision"] <= 17:
            raise ConfigValidationError("output.csv_precision", "must lie in [6, 17]")
    return OutputConfig(**kw)


def parse_config(text: str, env: dict | None = None) -> CliConfig:
    """Parse and validate a JSON configuration document.

    ``QCOSYM_SEED`` in ``env`` (default ``os.environ``) overrides the seed.
    """
    env = os.environ if env is None else env
    if not text.strip():
        raise ConfigParseError("empty configuration document", line=1, column=1)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigParseError(exc.msg, line=exc.lineno, column=exc.colno) from exc
    if not isinstance(doc, dict):
        raise ConfigParseError("top level must be a JSON object")
    _reject_unknown(doc, {"command", "scenario", "integrator", "output"}, "")
    if "command" not in doc:
        raise ConfigParseError("missing required key", field="command")
    command = doc["command"]
    if command not in COMMANDS:
        raise ConfigValidationError("command", f"must be one of {COMMANDS}")

    raw = doc.get("scenario", "standard-example" if command in ("validate", "brackets") else "case-b")
    integrator = doc.get("integrator")
    if isinstance(raw, str):
        if raw not in BUILTIN_SCENARIOS and raw not in STRUCTURES:
            raise ConfigValidationError("scenario", f"unknown built-in scenario {raw!r}")
        if raw in STRUCTURES:
            scenario: ScenarioConfig | StructureConfig = StructureConfig(structure=raw)
        else:
            scenario = builtin_scenario(raw)
            if integrator is not None and isinstance(scenario, ScenarioConfig):
                icfg = _parse_integrator(integrator, replace(scenario.integrator, t_max=float("inf")))
                if not icfg.dt < scenario.t_max:
                    raise ConfigValidationError("integrator.dt", "must be smaller than scenario.t_max")
                scenario = replace(scenario, integrator=replace(icfg, t_max=scenario.t_max))
    elif isinstance(raw, dict):
        try:
            if command in ("validate", "brackets") or "structure" in raw:
                scenario = _parse_structure(raw)
            else:
                scenario = _parse_scenario(raw, integrator)
        except (ConfigParseError, ConfigValidationError):
            raise
        except ValueError as exc:
            raise ConfigValidationError("scenario", str(exc)) from exc
    else:
        raise ConfigParseError("expected a name or an object", field="scenario")

    if command in ("simulate", "average", "compare") and not isinstance(scenario, ScenarioConfig):
        raise ConfigValidationError("scenario", f"command {command!r} needs a fast-slow scenario")
    if command in ("validate", "brackets") and not isinstance(scenario, StructureConfig):
        raise ConfigValidationError("scenario", f"command {command!r} needs a structure descriptor")
    if command == "compare" and scenario.eps <= 0:
        raise ConfigValidationError("scenario.eps", "compare needs eps > 0")

    seed = env.get("QCOSYM_SEED")
    if seed is not None:
        try:
            scenario = replace(scenario, seed=int(seed))
        except ValueError as exc:
            raise ConfigValidationError("QCOSYM_SEED", "must be an integer") from exc

    return CliConfig(command, scenario, _parse_output(doc.get("output")))


def load_config(path: str | Path, env: dict | None = None) -> CliConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"), env)
