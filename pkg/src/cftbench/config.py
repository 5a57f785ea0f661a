"""Run configuration: dataclasses and parsing from a TOML document.

Layout::

    [scenario]
    kind = "pair"          # pair | symmetric | mirror | two_pairs | werner | coherent | custom
    alpha = "pi/4"         # numbers or simple expressions in pi
    beta = 0.785
    delta = 0.0

    [solver]
    grid = 2000
    restarts = 32
    seed = 0

    [output]
    format = "json"

Custom ensembles give ``priors`` plus ``inputs`` (kets as lists of ``[re, im]``
pairs) or ``inputs_bloch`` (qubit Bloch vectors), and either ``targets`` /
``targets_bloch`` or ``tau_prime`` (a matrix, or its diagonal as a list).
"""

from __future__ import annotations

import ast
import math
import operator
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .exceptions import ConfigError
from .io import load_toml, loads_toml, parse_kets, parse_matrix

QUBIT_KINDS = ("pair", "symmetric", "mirror", "two_pairs")
KINDS = QUBIT_KINDS + ("werner", "coherent", "custom")
SWEEPABLE = {
    "pair": ("alpha", "beta", "delta"),
    "symmetric": ("alpha", "beta"),
    "mirror": ("alpha",),
    "two_pairs": ("alpha", "beta"),
    "werner": ("d",),
    "coherent": ("eta", "g"),
    "custom": (),
}

_OPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Div: operator.truediv,
        ast.Pow: operator.pow}


def eval_number(value, where="value"):
    """A float from a number or an arithmetic string over ``pi`` (for example ``"3*pi/8"``)."""
    if isinstance(value, bool):
        raise ConfigError(f"{where}: expected a number, got a boolean")
    if isinstance(value, (int, float)):
        return float(value)
    if not isinstance(value, str):
        raise ConfigError(f"{where}: expected a number, got {value!r}")

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.BinOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        raise ValueError

    try:
        return float(ev(ast.parse(value, mode="eval")))
    except (SyntaxError, ValueError, ZeroDivisionError, TypeError):
        raise ConfigError(f"{where}: cannot evaluate {value!r} (numbers, pi and + - * / ** only)") from None


@dataclass(frozen=True)
class SolverOptions:
    grid: int = 2000
    refine: bool = True
    restarts: int = 32
    seed: int = 0
    truncation: int = 48
    radial: int = 64
    angular: int = 64
    workers: int = 0  # 0: one per CPU


@dataclass(frozen=True)
class OutputOptions:
    path: str | None = None
    format: str = "json"


@dataclass(frozen=True)
class ScenarioConfig:
    kind: str
    params: dict = field(default_factory=dict)
    custom: dict | None = None  # raw custom-ensemble tables, kept for the config echo


@dataclass(frozen=True)
class RunConfig:
    scenario: ScenarioConfig
    solver: SolverOptions = SolverOptions()
    output: OutputOptions = OutputOptions()

    def to_dict(self):
        return {
            "scenario": {"kind": self.scenario.kind, **self.scenario.params,
                         **({"custom": self.scenario.custom} if self.scenario.custom else {})},
            "solver": asdict(self.solver),
            "output": asdict(self.output),
        }

    def with_param(self, name, value):
        params = dict(self.scenario.params)
        params[name] = value
        return replace(self, scenario=replace(self.scenario, params=params))

    def with_solver(self, **kw):
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, solver=replace(self.solver, **kw)) if kw else self


_SCENARIO_KEYS = {
    "pair": {"alpha": math.pi / 4, "beta": math.pi / 4, "delta": 0.0},
    "symmetric": {"alpha": math.pi / 4, "beta": math.pi / 4, "n": 3},
    "mirror": {"alpha": math.pi / 4},
    "two_pairs": {"alpha": math.pi / 4, "beta": math.pi / 4},
    "werner": {"d": 2},
    "coherent": {"eta": 1.0, "g": 1.0},
    "custom": {},
}
_INT_KEYS = {"n", "d"}
_CUSTOM_KEYS = {"priors", "inputs", "inputs_bloch", "targets", "targets_bloch", "tau_prime"}


def _check_keys(table, allowed, section):
    unknown = sorted(set(table) - set(allowed))
    if unknown:
        raise ConfigError(f"[{section}]: unknown key(s) {', '.join(unknown)}; allowed: {', '.join(sorted(allowed))}")


def _int(value, where, minimum=None):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or int(value) != value:
        raise ConfigError(f"{where}: expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigError(f"{where}: must be at least {minimum}")
    return int(value)


def parse_config(doc):
    """Build a :class:`RunConfig` from a parsed TOML mapping."""
    _check_keys(doc, {"scenario", "solver", "output"}, "top level")
    sc = doc.get("scenario")
    if not isinstance(sc, dict) or "kind" not in sc:
        raise ConfigError("[scenario] section with a 'kind' key is required")
    kind = sc["kind"]
    if kind not in KINDS:
        raise ConfigError(f"[scenario].kind: unknown kind {kind!r}; expected one of {', '.join(KINDS)}")
    defaults = _SCENARIO_KEYS[kind]
    allowed = set(defaults) | {"kind"} | (_CUSTOM_KEYS if kind == "custom" else set())
    if kind == "mirror":
        allowed |= {"priors"}
    _check_keys(sc, allowed, "scenario")
    params = {}
    for key, default in defaults.items():
        raw = sc.get(key, default)
        params[key] = _int(raw, f"[scenario].{key}") if key in _INT_KEYS else eval_number(raw, f"[scenario].{key}")
    custom = None
    if kind == "mirror" and "priors" in sc:
        params["priors"] = [eval_number(p, "[scenario].priors") for p in sc["priors"]]
    if kind == "custom":
        custom = {k: sc[k] for k in sorted(_CUSTOM_KEYS) if k in sc}
        build_custom_ensemble(custom)  # validate early

    so = doc.get("solver", {})
    _check_keys(so, SolverOptions.__dataclass_fields__, "solver")
    solver = SolverOptions(
        grid=_int(so.get("grid", 2000), "[solver].grid", 8),
        refine=bool(so.get("refine", True)),
        restarts=_int(so.get("restarts", 32), "[solver].restarts", 1),
        seed=_int(so.get("seed", 0), "[solver].seed", 0),
        truncation=_int(so.get("truncation", 48), "[solver].truncation", 2),
        radial=_int(so.get("radial", 64), "[solver].radial", 1),
        angular=_int(so.get("angular", 64), "[solver].angular", 1),
        workers=_int(so.get("workers", 0), "[solver].workers", 0),
    )
    out = doc.get("output", {})
    _check_keys(out, {"path", "format"}, "output")
    fmt = out.get("format", "json")
    if fmt not in ("json", "csv"):
        raise ConfigError(f"[output].format: expected json or csv, got {fmt!r}")
    return RunConfig(ScenarioConfig(kind, params, custom), solver, OutputOptions(out.get("path"), fmt))


def load_config(path):
    return parse_config(load_toml(path))


def config_from_text(text):
    return parse_config(loads_toml(text))


def _bloch_kets(rows, where):
    from .bloch import ket_from_bloch

    try:
        vecs = np.array([[eval_number(v, where) for v in r] for r in rows], dtype=float)
    except TypeError:
        raise ConfigError(f"{where}: expected a list of 3-vectors") from None
    if vecs.ndim != 2 or vecs.shape[1] != 3:
        raise ConfigError(f"{where}: expected a list of 3-vectors")
    norms = np.linalg.norm(vecs, axis=1)
    if np.any(np.abs(norms - 1) > 1e-9):
        raise ConfigError(f"{where}: pure states need unit Bloch vectors")
    return np.array([ket_from_bloch(v / n) for v, n in zip(vecs, norms)])


def build_custom_ensemble(custom):
    """StateEnsemble from the raw custom tables (priors, inputs/targets or tau_prime)."""
    from .ensembles import StateEnsemble, targets_from_tau_prime
    from .exceptions import CftError

    if "priors" not in custom:
        raise ConfigError("[scenario].priors is required for a custom ensemble")
    priors = np.array([eval_number(p, "[scenario].priors") for p in custom["priors"]])
    if ("inputs" in custom) == ("inputs_bloch" in custom):
        raise ConfigError("give exactly one of [scenario].inputs or [scenario].inputs_bloch")
    if "inputs" in custom:
        inputs = parse_kets(custom["inputs"], "[scenario].inputs")
        inputs = inputs / np.linalg.norm(inputs, axis=1, keepdims=True)
    else:
        inputs = _bloch_kets(custom["inputs_bloch"], "[scenario].inputs_bloch")
    sources = [k for k in ("targets", "targets_bloch", "tau_prime") if k in custom]
    if len(sources) > 1:
        raise ConfigError("give at most one of targets, targets_bloch, tau_prime")
    try:
        if not sources:
            return StateEnsemble(priors, inputs, inputs)
        if sources[0] == "targets":
            targets = parse_kets(custom["targets"], "[scenario].targets")
            return StateEnsemble(priors, inputs, targets / np.linalg.norm(targets, axis=1, keepdims=True))
        if sources[0] == "targets_bloch":
            return StateEnsemble(priors, inputs, _bloch_kets(custom["targets_bloch"], "[scenario].targets_bloch"))
        raw = custom["tau_prime"]
        if isinstance(raw, list) and raw and all(isinstance(v, (int, float, str)) for v in raw):
            tp = np.array([eval_number(v, "[scenario].tau_prime") for v in raw])
        else:
            tp = parse_matrix(raw, "[scenario].tau_prime")
        return targets_from_tau_prime(priors, inputs, tp)
    except CftError as exc:
        raise ConfigError(f"[scenario]: invalid custom ensemble: {exc}") from None
