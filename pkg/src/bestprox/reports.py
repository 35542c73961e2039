"""Text and structured (JSON) rendering of check, solve, oracle and corpus results.

Structured documents follow ``docs/report_format.md``; they are produced with
sorted keys and ``repr`` floats, so identical inputs give identical bytes.
"""
from __future__ import annotations

import json
import math

from .core import ProblemInstance, format_point

REPORT_SCHEMA_VERSION = 1


def _clean(value):
    """JSON-safe copy: tuples become lists, non-finite floats become strings."""
    if isinstance(value, float):
        return value if math.isfinite(value) else repr(value)
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if hasattr(value, "item") and not isinstance(value, (str, bytes)):
        return _clean(value.item())
    return value


def document(command: str, inst: ProblemInstance | None, body: dict) -> dict:
    doc = {"schema_version": REPORT_SCHEMA_VERSION, "command": command}
    if inst is not None:
        doc["instance"] = {"name": inst.name, "dimension": inst.dim,
                           "Re_size": len(inst.Re), "Om_size": len(inst.Om), "eps_eq": inst.eps_eq}
    doc.update(body)
    return _clean(doc)


def dumps(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, allow_nan=False) + "\n"


# ------------------------------------------------------------------ text


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.12g}"
    if isinstance(value, (list, tuple)) and value and all(isinstance(v, (int, float)) for v in value):
        return format_point(value)
    return str(value)


def check_text(rep: dict) -> list:
    lines = [f"{rep['definition']}: {rep['verdict']}"]
    if rep.get("min_c") is not None:
        lines.append(f"  min_c = {_fmt(rep['min_c'])}")
    if rep.get("witness"):
        parts = ", ".join(f"{k}={_fmt(v)}" for k, v in rep["witness"].items())
        lines.append(f"  witness: {parts}")
    if rep.get("lhs") is not None:
        lines.append(f"  lhs = {_fmt(rep['lhs'])}, rhs = {_fmt(rep['rhs'])}")
    lines.append(f"  pairs scanned: {rep['pairs_scanned']}")
    reason = rep.get("details", {}).get("reason")
    if reason:
        lines.append(f"  note: {reason}")
    return lines


def header_text(doc: dict) -> list:
    inst = doc.get("instance")
    if not inst:
        return []
    return [f"instance {inst['name'] or '<unnamed>'}: dimension {inst['dimension']}, "
            f"|Re| = {inst['Re_size']}, |Om| = {inst['Om_size']}, eps_eq = {inst['eps_eq']:g}"]


def render_text(doc: dict) -> str:
    lines = header_text(doc)
    cmd = doc["command"]
    if "d_phi" in doc:
        lines.append(f"D_Phi = {_fmt(doc['d_phi'])}")
    for w in doc.get("warnings", []):
        lines.append(f"warning: {w}")
    if cmd == "check":
        for rep in doc["reports"]:
            lines.extend(check_text(rep))
    elif cmd == "solve":
        s = doc["solve"]
        lines.append(f"status: {s['status']} after {s['iterations']} step(s)")
        lines.append(f"final point: {_fmt(s['final_point'])}")
        lines.append(f"final residual: {_fmt(s['final_residual'])}")
        if "rate" in s:
            r = s["rate"]
            lines.append(f"rate bound (factor {_fmt(r['factor'])}): {'holds' if r['holds'] else 'fails'}")
    elif cmd == "oracle":
        a = doc["oracle"]
        o = a["oracle"]
        lines.append(f"oracle: {o['verdict']} ({len(o['candidates'])} candidate(s))")
        for c in o["candidates"][:10]:
            lines.append(f"  {_fmt(c['point'])}  residual {_fmt(c['residual'])}")
        if len(o["candidates"]) > 10:
            lines.append(f"  ... {len(o['candidates']) - 10} more")
        lines.append(f"solver: {a['solver_status']} at {_fmt(a['solver_point'])}")
        lines.append(f"agreement: {a['verdict']}")
        for m in a["messages"]:
            lines.append(f"  {m}")
    elif cmd == "corpus":
        for e in doc["entries"]:
            lines.append(f"{e['name']}: {e['verdict']}")
            for r in e["results"]:
                if r["status"] != "pass":
                    lines.append(f"  {r['status']}: {r['op']} ({r['note']})")
                    if r["diff"]:
                        lines.append(f"    {r['diff']}")
            for note in e["discrepancies"]:
                lines.append(f"  note: {note}")
        s = doc["summary"]
        lines.append(f"{s['passed']} of {s['total']} entries pass")
    elif cmd == "validate":
        lines.append("valid")
    return "\n".join(lines) + "\n"
