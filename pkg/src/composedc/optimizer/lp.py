"""CPLEX LP export of the placement MILP, plus a small reader for replaying it.

Variables::

    x_<w>_<c>      workload w takes CPU module c
    y_<w>_<m>      workload w takes memory module m
    z_<w>_<c>_<m>  both of the above (linearised product)
    a_<c>, b_<m>   module is active

Numbers are written with Python's shortest round-trip repr so the file
reproduces the in-memory objective to the last bit.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from ..domain import Placement
from ..fabric import io_energy
from .model import MilpInstance

CONST_VAR = "ONE_VAR_CONSTANT"
MAX_LINE = 255
_WRAP = 200


def _num(v: float) -> str:
    v = float(v)
    if v == 0:
        return "0"
    if v.is_integer() and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def _terms(pairs) -> list[str]:
    out = []
    for coef, var in pairs:
        sign = "-" if coef < 0 else "+"
        out.append(f"{sign} {_num(abs(coef))} {var}")
    return out


def _wrap(head: str, tokens: list[str], tail: str = "") -> list[str]:
    lines, cur = [], head
    for tok in tokens:
        if len(cur) + 1 + len(tok) > _WRAP:
            lines.append(cur)
            cur = "   " + tok
        else:
            cur = f"{cur} {tok}" if cur else tok
    if tail:
        if len(cur) + 1 + len(tail) > _WRAP:
            lines.append(cur)
            cur = "   " + tail
        else:
            cur = f"{cur} {tail}"
    lines.append(cur)
    return lines


def export_lp(instance: MilpInstance) -> str:
    t = instance.topology
    cpus, mems = t.cpus, t.mems
    ws = instance.workloads
    paired = not t.kind.disaggregated

    obj = []
    for c in cpus:
        obj.append((c.spec.idle_power, f"a_{c.id}"))
    for m in mems:
        obj.append((m.spec.idle_power, f"b_{m.id}"))
    for w in ws:
        for c in cpus:
            obj.append((c.spec.dynamic_power / c.spec.capacity * w.cpu_demand, f"x_{w.id}_{c.id}"))
        for m in mems:
            obj.append((m.spec.dynamic_power / m.spec.capacity * w.mem_demand, f"y_{w.id}_{m.id}"))
        for c in cpus:
            for m in mems:
                obj.append((w.cpu_mem_rate * instance.pair_energy(c.id, m.id), f"z_{w.id}_{c.id}_{m.id}"))
    io_rate = 0.0
    for w in ws:
        io_rate += sum(v for k, v in w.flows.items() if not k.is_cpu_mem)
    obj.append((io_rate * io_energy(t, instance.policy), CONST_VAR))

    lines = ["Minimize"]
    lines += _wrap(" obj:", _terms(obj))
    lines.append("Subject To")

    def con(name: str, pairs, sense: str, rhs: float) -> None:
        lines.extend(_wrap(f" {name}:", _terms(pairs), f"{sense} {_num(rhs)}"))

    for w in ws:
        con(f"assign_cpu_{w.id}", [(1, f"x_{w.id}_{c.id}") for c in cpus], "=", 1)
        con(f"assign_mem_{w.id}", [(1, f"y_{w.id}_{m.id}") for m in mems], "=", 1)
    for c in cpus:
        con(f"cap_{c.id}", [(w.cpu_demand, f"x_{w.id}_{c.id}") for w in ws] + [(-c.spec.capacity, f"a_{c.id}")], "<=", 0)
    for m in mems:
        con(f"cap_{m.id}", [(w.mem_demand, f"y_{w.id}_{m.id}") for w in ws] + [(-m.spec.capacity, f"b_{m.id}")], "<=", 0)
    for w in ws:
        for c in cpus:
            for m in mems:
                z, x, y = f"z_{w.id}_{c.id}_{m.id}", f"x_{w.id}_{c.id}", f"y_{w.id}_{m.id}"
                con(f"lin_lo_{w.id}_{c.id}_{m.id}", [(1, z), (-1, x), (-1, y)], ">=", -1)
                con(f"lin_x_{w.id}_{c.id}_{m.id}", [(1, z), (-1, x)], "<=", 0)
                con(f"lin_y_{w.id}_{c.id}_{m.id}", [(1, z), (-1, y)], "<=", 0)
    if paired:
        for w in ws:
            for c in cpus:
                m = t.partner(c.id)
                con(f"coloc_{w.id}_{c.id}", [(1, f"y_{w.id}_{m.id}"), (-1, f"x_{w.id}_{c.id}")], "=", 0)
    elif not instance.allow_cross_rack:
        for w in ws:
            for c in cpus:
                for m in mems:
                    if not instance.pair_allowed(c.id, m.id):
                        con(f"local_{w.id}_{c.id}_{m.id}", [(1, f"x_{w.id}_{c.id}"), (1, f"y_{w.id}_{m.id}")], "<=", 1)

    lines.append("Bounds")
    lines.append(f" {CONST_VAR} = 1")
    lines.append("Binary")
    binaries = binary_names(instance)
    lines += _wrap("", binaries)
    lines.append("End")
    for line in lines:
        assert len(line) <= MAX_LINE, line
    return "\n".join(lines) + "\n"


def binary_names(instance: MilpInstance) -> list[str]:
    t = instance.topology
    names = []
    for w in instance.workloads:
        names += [f"x_{w.id}_{c.id}" for c in t.cpus]
        names += [f"y_{w.id}_{m.id}" for m in t.mems]
    names += [f"a_{c.id}" for c in t.cpus]
    names += [f"b_{m.id}" for m in t.mems]
    for w in instance.workloads:
        names += [f"z_{w.id}_{c.id}_{m.id}" for c in t.cpus for m in t.mems]
    return names


def indicator(instance: MilpInstance, placement: Placement) -> dict[str, float]:
    """0/1 value of every LP variable for a placement (unlisted variables are 0)."""
    values: dict[str, float] = {CONST_VAR: 1.0}
    used = set()
    for w in instance.workloads:
        c, m = placement[w.id]
        values[f"x_{w.id}_{c}"] = 1.0
        values[f"y_{w.id}_{m}"] = 1.0
        values[f"z_{w.id}_{c}_{m}"] = 1.0
        used.update((c, m))
    for mod in instance.topology.modules:
        if mod.id in used:
            values[("a_" if mod.kind.value == "cpu" else "b_") + mod.id] = 1.0
    return values


@dataclass
class LpModel:
    objective: dict[str, float] = field(default_factory=dict)
    constraints: list[tuple[str, dict[str, float], str, float]] = field(default_factory=list)
    bounds: list[str] = field(default_factory=list)
    binaries: list[str] = field(default_factory=list)


_TERM = re.compile(r"([+-])\s*(\S+)\s+([A-Za-z_][\w]*)")


def _parse_expr(text: str) -> dict[str, float]:
    out: dict[str, float] = {}
    for sign, coef, var in _TERM.findall(text):
        v = float(coef) * (-1.0 if sign == "-" else 1.0)
        out[var] = out.get(var, 0.0) + v
    return out


def parse_lp(text: str) -> LpModel:
    """Read back a document written by ``export_lp`` (not a general LP reader)."""
    model = LpModel()
    section = None
    chunks: dict[str, list[str]] = {"obj": [], "con": [], "bounds": [], "binary": []}
    for raw in text.split("\n"):
        line = raw.strip()
        if not line or line.startswith("\\"):
            continue
        low = line.lower()
        if low == "minimize":
            section = "obj"
        elif low == "subject to":
            section = "con"
        elif low == "bounds":
            section = "bounds"
        elif low == "binary":
            section = "binary"
        elif low == "end":
            section = None
        elif section is not None:
            chunks[section].append(line)

    obj = " ".join(chunks["obj"]).split(":", 1)[1]
    model.objective = _parse_expr(obj)
    for stmt in re.split(r"\s(?=[A-Za-z_]\w*:)", " ".join(chunks["con"])):
        name, body = stmt.split(":", 1)
        m = re.match(r"(.*)\s(<=|>=|=)\s(\S+)\s*$", body)
        model.constraints.append((name.strip(), _parse_expr(m.group(1)), m.group(2), float(m.group(3))))
    model.bounds = chunks["bounds"]
    model.binaries = " ".join(chunks["binary"]).split()
    return model


def evaluate_objective(model: LpModel, values: dict[str, float]) -> float:
    total = 0.0
    for var, coef in model.objective.items():
        total += coef * values.get(var, 0.0)
    return total


def violated_constraints(model: LpModel, values: dict[str, float], tol: float = 1e-9) -> list[str]:
    bad = []
    for name, expr, sense, rhs in model.constraints:
        lhs = sum(coef * values.get(var, 0.0) for var, coef in expr.items())
        ok = {"<=": lhs <= rhs + tol, ">=": lhs >= rhs - tol, "=": abs(lhs - rhs) <= tol}[sense]
        if not ok:
            bad.append(name)
    return bad
