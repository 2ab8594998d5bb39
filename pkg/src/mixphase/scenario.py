"""Scenario files: JSON documents describing a decomposition and its evolution.

Top-level keys::

    name, description        free text (optional)
    parameters               {name: number}, referenced by expressions
    system_dim               N
    components               [{weight, density}]
    paths                    [{segments: [...]}] one per component, or
                             {shared: true, segments: [...]}
    steps_per_unit_time      default 1000
    tolerances               {phase: 1e-6, transport: 1e-8, trace: 1e-10}
    checks                   subset of gauge, transport, oracle, common_basis,
                             recombination
    seed                     integer, default 0

A density is a matrix, ``{"bloch": [x, y, z]}`` (qubits), ``{"diag": [...]}``
or ``{"pure": [...]}``. A Hamiltonian is a matrix, ``{"pauli": {"X": c, ...}}``
or ``{"diag": [...]}``. Any number may be written as a string expression
over the parameters, e.g. ``"r * sin(theta)"``; matrix entries may also be
``[re, im]`` pairs.
"""
from __future__ import annotations

import ast
import json
import operator
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import numkernel as nk
from .errors import MixPhaseError, ParseError, ValidationError
from .paths import DecompositionPath, path_from_hamiltonians
from .states import Decomposition, DensityOperator

CHECKS = ("gauge", "transport", "oracle", "common_basis", "recombination")
DEFAULT_TOLERANCES = {"phase": 1e-6, "transport": 1e-8, "trace": 1e-10}
TOP_LEVEL = {"name", "description", "parameters", "system_dim", "components", "paths",
             "steps_per_unit_time", "tolerances", "checks", "seed"}

_FUNCS = {name: getattr(np, name) for name in
          ("sin", "cos", "tan", "arcsin", "arccos", "arctan", "sqrt", "exp", "log", "abs")}
_CONSTS = {"pi": np.pi, "e": np.e}
_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_UNOPS = {ast.UAdd: operator.pos, ast.USub: operator.neg}


def evaluate(expr: str, params: dict):
    """Evaluate an arithmetic expression over ``params`` without ``eval``."""
    try:
        tree = ast.parse(expr, mode="eval")
    except SyntaxError as exc:
        raise ValidationError(f"bad expression {expr!r}: {exc.msg}") from None

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float, complex)):
            return node.value
        if isinstance(node, ast.Name):
            if node.id in params:
                return params[node.id]
            if node.id in _CONSTS:
                return _CONSTS[node.id]
            raise ValidationError(f"unknown name {node.id!r} in {expr!r}")
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNOPS:
            return _UNOPS[type(node.op)](ev(node.operand))
        if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
                and node.func.id in _FUNCS and not node.keywords):
            return _FUNCS[node.func.id](*[ev(a) for a in node.args])
        raise ValidationError(f"unsupported syntax in expression {expr!r}")

    return ev(tree)


def _number(x, params, where, allow_complex=False):
    if isinstance(x, bool):
        raise ValidationError(f"{where}: expected a number, got {x!r}")
    if isinstance(x, str):
        x = evaluate(x, params)
    if allow_complex and isinstance(x, list) and len(x) == 2:
        return complex(_number(x[0], params, where), _number(x[1], params, where))
    if not isinstance(x, (int, float, complex, np.number)):
        raise ValidationError(f"{where}: expected a number, got {x!r}")
    if isinstance(x, complex) or np.iscomplexobj(x):
        if not allow_complex:
            if abs(complex(x).imag) > 0:
                raise ValidationError(f"{where}: expected a real number, got {x!r}")
            x = complex(x).real
        else:
            return complex(x)
    return complex(x) if allow_complex else float(x)


def _matrix(x, params, dim, where):
    if not (isinstance(x, list) and len(x) == dim
            and all(isinstance(r, list) and len(r) == dim for r in x)):
        raise ValidationError(f"{where}: expected a {dim}x{dim} matrix")
    return np.array([[_number(v, params, where, allow_complex=True) for v in row] for row in x],
                    dtype=np.complex128)


def _vector(x, params, where, length=None, allow_complex=False):
    if not isinstance(x, list) or (length is not None and len(x) != length):
        raise ValidationError(f"{where}: expected a list of length {length or 'N'}")
    return np.array([_number(v, params, where, allow_complex) for v in x])


def _density(spec, params, dim, where):
    if isinstance(spec, list):
        return DensityOperator(_matrix(spec, params, dim, where))
    if not isinstance(spec, dict) or len(spec) != 1:
        raise ValidationError(f"{where}: density must be a matrix or one of bloch/diag/pure")
    (kind, val), = spec.items()
    if kind == "bloch":
        if dim != 2:
            raise ValidationError(f"{where}: bloch densities need system_dim 2")
        r = _vector(val, params, where, 3)
        if np.linalg.norm(r) > 1 + 1e-12:
            raise ValidationError(f"{where}: Bloch vector longer than 1")
        return DensityOperator.from_bloch(r)
    if kind == "diag":
        return DensityOperator.diagonal(_vector(val, params, where, dim))
    if kind == "pure":
        return DensityOperator.pure(_vector(val, params, where, dim, allow_complex=True))
    raise ValidationError(f"{where}: unknown density form {kind!r}")


def _hamiltonian(spec, params, dim, where):
    if isinstance(spec, list):
        return _matrix(spec, params, dim, where)
    if isinstance(spec, dict) and set(spec) == {"pauli"}:
        if dim != 2:
            raise ValidationError(f"{where}: pauli Hamiltonians need system_dim 2")
        coeffs = spec["pauli"]
        if not isinstance(coeffs, dict) or not set(coeffs) <= set(nk.PAULI):
            raise ValidationError(f"{where}: pauli coefficients keyed by I, X, Y, Z")
        return sum(_number(c, params, where) * nk.PAULI[k] for k, c in coeffs.items()) \
            + np.zeros((2, 2), dtype=np.complex128)
    if isinstance(spec, dict) and set(spec) == {"diag"}:
        return np.diag(_vector(spec["diag"], params, where, dim)).astype(np.complex128)
    raise ValidationError(f"{where}: Hamiltonian must be a matrix, pauli or diag")


def _segments(spec, params, dim, where):
    segs = spec.get("segments") if isinstance(spec, dict) else None
    if not isinstance(segs, list) or not segs:
        raise ValidationError(f"{where}: expected a non-empty 'segments' list")
    out = []
    for i, s in enumerate(segs):
        w = f"{where}.segments[{i}]"
        if not isinstance(s, dict) or set(s) != {"hamiltonian", "duration"}:
            raise ValidationError(f"{w}: segment needs exactly 'hamiltonian' and 'duration'")
        dur = _number(s["duration"], params, w)
        if not dur > 0:
            raise ValidationError(f"{w}: duration must be positive")
        H = _hamiltonian(s["hamiltonian"], params, dim, w)
        if nk.hermiticity_residual(H) > 1e-10 * max(1.0, np.abs(H).max()):
            raise ValidationError(f"{w}: Hamiltonian is not Hermitian")
        out.append((H, dur))
    return out


@dataclass
class Scenario:
    name: str
    decomposition: Decomposition
    path: DecompositionPath
    shared: bool
    steps_per_unit_time: int
    tolerances: dict
    checks: tuple
    seed: int
    parameters: dict = field(default_factory=dict)


def parse_text(text: str, source: str = "<scenario>") -> dict:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    if not isinstance(raw, dict):
        raise ParseError(f"{source}:1:1: top level must be a JSON object")
    return raw


def load(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise ParseError(f"{path}: cannot read scenario ({exc})") from None
    return parse_text(text, str(path))


def build(raw: dict, overrides: dict | None = None, steps_per_unit_time: int | None = None,
          seed: int | None = None, tol_phase: float | None = None) -> Scenario:
    """Validate a parsed scenario and construct its decomposition path."""
    unknown = set(raw) - TOP_LEVEL
    if unknown:
        raise ValidationError(f"unknown top-level keys: {sorted(unknown)}")
    params = raw.get("parameters", {})
    if not isinstance(params, dict):
        raise ValidationError("parameters must be an object")
    params = {k: _number(v, {}, f"parameters.{k}") for k, v in params.items()}
    for k, v in (overrides or {}).items():
        if k not in params:
            raise ValidationError(f"unknown parameter {k!r}; scenario defines {sorted(params)}")
        params[k] = float(v)

    dim = raw.get("system_dim")
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise ValidationError("system_dim must be a positive integer")
    comps = raw.get("components")
    if not isinstance(comps, list) or not comps:
        raise ValidationError("components must be a non-empty list")
    steps = steps_per_unit_time or raw.get("steps_per_unit_time", 1000)
    if not isinstance(steps, int) or isinstance(steps, bool) or steps < 1:
        raise ValidationError("steps_per_unit_time must be a positive integer")
    tol = dict(DEFAULT_TOLERANCES)
    tol_raw = raw.get("tolerances", {})
    if not isinstance(tol_raw, dict) or not set(tol_raw) <= set(DEFAULT_TOLERANCES):
        raise ValidationError(f"tolerances keys must be among {sorted(DEFAULT_TOLERANCES)}")
    tol.update({k: _number(v, params, f"tolerances.{k}") for k, v in tol_raw.items()})
    if tol_phase is not None:
        tol["phase"] = float(tol_phase)
    checks = raw.get("checks", list(CHECKS))
    if not isinstance(checks, list) or not set(checks) <= set(CHECKS):
        raise ValidationError(f"checks must be a list drawn from {list(CHECKS)}")
    sd = raw.get("seed", 0) if seed is None else seed
    if not isinstance(sd, int) or isinstance(sd, bool):
        raise ValidationError("seed must be an integer")

    try:
        weights, rhos = [], []
        for i, c in enumerate(comps):
            w = f"components[{i}]"
            if not isinstance(c, dict) or set(c) != {"weight", "density"}:
                raise ValidationError(f"{w}: component needs exactly 'weight' and 'density'")
            weights.append(_number(c["weight"], params, w))
            rhos.append(_density(c["density"], params, dim, w))
        d = Decomposition(weights, rhos)

        paths_raw = raw.get("paths")
        shared = isinstance(paths_raw, dict) and paths_raw.get("shared") is True
        if shared:
            extra = set(paths_raw) - {"shared", "segments"}
            if extra:
                raise ValidationError(f"paths: unknown keys {sorted(extra)}")
            p = path_from_hamiltonians(_segments(paths_raw, params, dim, "paths"),
                                       steps_per_unit_time=steps)
            dp = DecompositionPath.shared(d, p)
        elif isinstance(paths_raw, list) and len(paths_raw) == d.M:
            dp = DecompositionPath(d, tuple(
                path_from_hamiltonians(_segments(s, params, dim, f"paths[{i}]"),
                                       steps_per_unit_time=steps)
                for i, s in enumerate(paths_raw)))
        else:
            raise ValidationError(
                "paths must be {shared: true, segments: [...]} or one entry per component")
    except ValidationError:
        raise
    except MixPhaseError as exc:
        raise ValidationError(str(exc)) from None

    return Scenario(name=str(raw.get("name", "scenario")), decomposition=d, path=dp,
                    shared=shared, steps_per_unit_time=steps, tolerances=tol,
                    checks=tuple(checks), seed=sd, parameters=params)
