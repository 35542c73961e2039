"""YAML problem-definition files: loading with line-anchored diagnostics, and export.

See ``docs/problem_format.md`` for the schema.  Reals may be written as YAML
numbers or as decimal strings (PyYAML reads ``1e-9`` as a string).
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from pathlib import Path

import yaml

from .core import (
    DEFAULT_EPS_EQ,
    Assumptions,
    InstanceError,
    MappingF,
    PointSet,
    ProblemInstance,
    ProximityFunction,
)
from .expr import ExprError, ExprSyntaxError, UnboundVariableError, free_vars, parse

SCHEMA_VERSION = 1

_DECIMAL = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$")
_TOP_KEYS = {"schema_version", "name", "dimension", "sets", "phi", "F", "tolerances", "assumptions"}


@dataclass
class Diagnostic:
    line: int | None
    path: str
    message: str

    def __str__(self) -> str:
        where = f"line {self.line}" if self.line is not None else "file"
        return f"{where}: {self.path}: {self.message}" if self.path else f"{where}: {self.message}"


class ProblemFileError(Exception):
    def __init__(self, source: str, diagnostics: list):
        self.source = source
        self.diagnostics = diagnostics
        body = "\n".join(f"  {d}" for d in diagnostics)
        super().__init__(f"{source}: invalid problem file\n{body}")


def _line_map(node, path=(), out=None) -> dict:
    """Map each key/index path to its 1-based source line."""
    if out is None:
        out = {}
    out[path] = node.start_mark.line + 1
    if isinstance(node, yaml.MappingNode):
        for knode, vnode in node.value:
            key = knode.value
            out[path + (key,)] = knode.start_mark.line + 1
            _line_map(vnode, path + (key,), out)
            out[path + (key,)] = knode.start_mark.line + 1
    elif isinstance(node, yaml.SequenceNode):
        for i, item in enumerate(node.value):
            _line_map(item, path + (i,), out)
    return out


class _Validator:
    def __init__(self, source: str, lines: dict):
        self.source = source
        self.lines = lines
        self.diags: list = []

    def line(self, path):
        path = tuple(path)
        while path not in self.lines and path:
            path = path[:-1]
        return self.lines.get(path)

    def error(self, path, message):
        self.diags.append(Diagnostic(self.line(path), ".".join(str(p) for p in path), message))

    def real(self, value, path, positive=False, nonneg=False):
        if isinstance(value, bool) or value is None:
            self.error(path, f"expected a real number, found {value!r}")
            return None
        if isinstance(value, (int, float)):
            out = float(value)
        elif isinstance(value, str) and _DECIMAL.match(value.strip()):
            out = float(value.strip())
        else:
            self.error(path, f"expected a decimal literal, found {value!r}")
            return None
        if not math.isfinite(out):
            self.error(path, "value must be finite")
            return None
        if positive and out <= 0:
            self.error(path, f"must be > 0, found {out!r}")
            return None
        if nonneg and out < 0:
            self.error(path, f"must be >= 0, found {out!r}")
            return None
        return out

    def point(self, value, path, dim):
        if not isinstance(value, list):
            self.error(path, "a point must be a list of coordinates")
            return None
        coords = [self.real(c, path + (i,)) for i, c in enumerate(value)]
        if any(c is None for c in coords):
            return None
        if dim is not None and len(coords) != dim:
            self.error(path, f"point has {len(coords)} coordinates, dimension is {dim}")
            return None
        return tuple(coords)

    def expression(self, value, path, allowed):
        if not isinstance(value, str):
            if isinstance(value, (int, float)) and not isinstance(value, bool):
                value = repr(value)
            else:
                self.error(path, f"expected an expression string, found {value!r}")
                return None
        try:
            expr = parse(value)
        except ExprSyntaxError as exc:
            self.error(path, f"syntax error in {value!r}: {exc}")
            return None
        except ExprError as exc:
            self.error(path, str(exc))
            return None
        unbound = free_vars(expr) - set(allowed)
        if unbound:
            self.error(path, f"unbound variable(s) {', '.join(sorted(unbound))} in {value!r}; "
                             f"allowed: {', '.join(sorted(allowed))}")
            return None
        return value

    def point_set(self, value, path, dim, label):
        if not isinstance(value, dict):
            self.error(path, "a set must be a mapping with 'points' or 'segment'")
            return None
        keys = set(value)
        if keys == {"points"}:
            pts = value["points"]
            if not isinstance(pts, list) or not pts:
                self.error(path + ("points",), f"set {label} must be non-empty")
                return None
            parsed = [self.point(p, path + ("points", i), dim) for i, p in enumerate(pts)]
            if any(p is None for p in parsed):
                return None
            try:
                return PointSet.explicit(parsed, label)
            except InstanceError as exc:
                self.error(path, str(exc))
                return None
        if keys == {"segment"}:
            seg = value["segment"]
            spath = path + ("segment",)
            if not isinstance(seg, dict) or set(seg) - {"start", "end", "samples"} or not {"start", "end"} <= set(seg):
                self.error(spath, "segment needs 'start', 'end' and optional 'samples'")
                return None
            start = self.point(seg["start"], spath + ("start",), dim)
            end = self.point(seg["end"], spath + ("end",), dim)
            samples = seg.get("samples", 101)
            if isinstance(samples, bool) or not isinstance(samples, int) or samples < 1:
                self.error(spath + ("samples",), f"samples must be a positive integer, found {samples!r}")
                return None
            if start is None or end is None:
                return None
            try:
                return PointSet.segment(start, end, samples, label)
            except InstanceError as exc:
                self.error(spath, str(exc))
                return None
        self.error(path, "a set must have exactly one of 'points' or 'segment'")
        return None


def parse_problem(text: str, source: str = "<string>") -> ProblemInstance:
    """Validate problem-file text; raises :class:`ProblemFileError` with all diagnostics."""
    try:
        node = yaml.compose(text)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        raise ProblemFileError(source, [Diagnostic(line, "", f"YAML syntax: {getattr(exc, 'problem', exc)}")]) from None
    if node is None or not isinstance(data, dict):
        raise ProblemFileError(source, [Diagnostic(1, "", "problem file must be a YAML mapping")])

    v = _Validator(source, _line_map(node))
    for key in sorted(set(data) - _TOP_KEYS, key=str):
        v.error((key,), "unknown key")
    for key in ("schema_version", "dimension", "sets", "phi", "F"):
        if key not in data:
            v.error((), f"missing required key '{key}'")
    if v.diags:
        raise ProblemFileError(source, v.diags)

    if data["schema_version"] != SCHEMA_VERSION:
        v.error(("schema_version",), f"unsupported schema_version {data['schema_version']!r}; expected {SCHEMA_VERSION}")
    dim = data["dimension"]
    if isinstance(dim, bool) or not isinstance(dim, int) or dim < 1:
        v.error(("dimension",), f"dimension must be a positive integer, found {dim!r}")
        raise ProblemFileError(source, v.diags)
    a_names = [f"a{i + 1}" for i in range(dim)]
    b_names = [f"b{i + 1}" for i in range(dim)]

    sets = data["sets"]
    Re = Om = None
    if not isinstance(sets, dict) or set(sets) != {"Re", "Om"}:
        v.error(("sets",), "sets must contain exactly 'Re' and 'Om'")
    else:
        Re = v.point_set(sets["Re"], ("sets", "Re"), dim, "Re")
        Om = v.point_set(sets["Om"], ("sets", "Om"), dim, "Om")

    phi_src = v.expression(data["phi"], ("phi",), a_names + b_names)

    branches = []
    F = data["F"]
    if isinstance(F, list) and F and all(isinstance(b, dict) for b in F):
        for i, br in enumerate(F):
            path = ("F", i)
            extra = set(br) - {"when", "value"}
            if extra or "value" not in br:
                v.error(path, "each branch needs 'value' and an optional 'when'")
                continue
            vals = br["value"]
            if not isinstance(vals, list) or len(vals) != dim:
                v.error(path + ("value",), f"value must list {dim} component expression(s)")
                continue
            comps = [v.expression(c, path + ("value", j), a_names) for j, c in enumerate(vals)]
            when = None
            if br.get("when") is not None:
                when = v.expression(br["when"], path + ("when",), a_names)
                if when is None:
                    continue
            if all(c is not None for c in comps):
                branches.append((when, comps))
    else:
        v.error(("F",), "F must be a non-empty list of branches")

    tol = data.get("tolerances") or {}
    eps_eq, step_tol, range_tol = DEFAULT_EPS_EQ, None, None
    if not isinstance(tol, dict):
        v.error(("tolerances",), "tolerances must be a mapping")
    else:
        for key in sorted(set(tol) - {"eps_eq", "step_feas_tol", "range_tol"}):
            v.error(("tolerances", key), "unknown tolerance")
        if tol.get("eps_eq") is not None:
            eps_eq = v.real(tol["eps_eq"], ("tolerances", "eps_eq"), positive=True)
        if tol.get("step_feas_tol") is not None:
            step_tol = v.real(tol["step_feas_tol"], ("tolerances", "step_feas_tol"), nonneg=True)
        if tol.get("range_tol") is not None:
            range_tol = v.real(tol["range_tol"], ("tolerances", "range_tol"), nonneg=True)

    flags = data.get("assumptions") or {}
    assumptions = Assumptions()
    if not isinstance(flags, dict) or set(flags) - {"phi_complete", "approx_phi_compact"}:
        v.error(("assumptions",), "assumptions may only set phi_complete and approx_phi_compact")
    elif not all(isinstance(x, bool) for x in flags.values()):
        v.error(("assumptions",), "assumption flags must be true or false")
    else:
        assumptions = Assumptions(**flags)

    name = data.get("name") or ""
    if not isinstance(name, str):
        v.error(("name",), "name must be a string")

    if v.diags:
        raise ProblemFileError(source, v.diags)
    try:
        return ProblemInstance(
            Re, Om,
            MappingF.from_sources(branches, dim),
            ProximityFunction.from_source(phi_src, dim),
            eps_eq, assumptions, name, step_tol, range_tol,
        )
    except (InstanceError, UnboundVariableError) as exc:
        raise ProblemFileError(source, [Diagnostic(None, "", str(exc))]) from None


def validate_file(path) -> ProblemInstance:
    path = Path(path)
    text = path.read_text()
    return parse_problem(text, str(path))


def _set_doc(ps: PointSet) -> dict:
    if ps.source is not None:
        seg = ps.source
        return {"segment": {"start": list(seg.start), "end": list(seg.end), "samples": seg.samples}}
    return {"points": [list(p) for p in ps.points]}


def to_document(inst: ProblemInstance) -> dict:
    branches = []
    for br in inst.F.branches:
        doc = {}
        if br.when is not None:
            doc["when"] = br.when.source
        doc["value"] = [e.source for e in br.values]
        branches.append(doc)
    return {
        "schema_version": SCHEMA_VERSION,
        "name": inst.name,
        "dimension": inst.dim,
        "sets": {"Re": _set_doc(inst.Re), "Om": _set_doc(inst.Om)},
        "phi": inst.Phi.source,
        "F": branches,
        "tolerances": {
            "eps_eq": inst.eps_eq,
            "step_feas_tol": inst.step_feas_tol,
            "range_tol": inst.range_tol,
        },
        "assumptions": {
            "phi_complete": inst.assumptions.phi_complete,
            "approx_phi_compact": inst.assumptions.approx_phi_compact,
        },
    }


class _Dumper(yaml.SafeDumper):
    pass


def _list_repr(dumper, data):
    flow = all(not isinstance(x, (list, dict)) for x in data)
    return dumper.represent_sequence("tag:yaml.org,2002:seq", data, flow_style=flow)


_Dumper.add_representer(list, _list_repr)


def dump_instance(inst: ProblemInstance) -> str:
    return yaml.dump(to_document(inst), Dumper=_Dumper, sort_keys=False, width=100)


def export_file(inst: ProblemInstance, path) -> Path:
    path = Path(path)
    path.write_text(dump_instance(inst))
    return path
