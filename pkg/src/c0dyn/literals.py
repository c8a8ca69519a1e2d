"""Text literals for sets, group elements and rectangles.

Base sets::

    cyl 0:1 1:0 | 3:1        union of coordinate constraints
    cyl *                    the whole space;  ``cyl`` alone is empty
    arc 0/1 1/2; 2/3 5/6     union of half-open arcs;  ``arc`` alone is empty
    maj 3                    majority set on coordinates 0..6
    maj 3@2                  the same set translated by 2

Rectangles::

    rect head=[cyl 0:1;arc 0/1 1/2] tail=half(cyl 0:1)
    rect head=[] tail=schedule(2)

Every ``format_*`` output re-parses to an equal value.
"""

from __future__ import annotations

import re
from typing import List

from . import base
from .base import ArcUnion, BaseSet, CylinderUnion, MajoritySet, RotateBy, ShiftBy
from .product import HalfTail, Rectangle, ScheduleTail
from .rigor import format_rational, parse_rational


class LiteralError(ValueError):
    """Malformed literal; ``position`` is the offset of the offending text."""

    def __init__(self, message: str, text: str, position: int = 0):
        super().__init__(f"{message} at column {position + 1}: {text!r}")
        self.text = text
        self.position = position


_KEYWORDS = ("cyl", "arc", "maj")


def parse_base_set(text: str) -> BaseSet:
    src = text
    text = text.strip()
    offset = len(src) - len(src.lstrip())
    kind, _, body = text.partition(" ")
    body = body.strip()
    if kind == "cyl":
        return _parse_cyl(body, src, offset + 4)
    if kind == "arc":
        return _parse_arc(body, src, offset + 4)
    if kind == "maj":
        m = re.fullmatch(r"(\d+)(?:@(-?\d+))?", body)
        if not m:
            raise LiteralError("expected 'maj n' or 'maj n@d'", src, offset + 4)
        return MajoritySet(int(m.group(1)), int(m.group(2) or 0))
    raise LiteralError(f"unknown set kind {kind!r}", src, offset)


def _parse_cyl(body: str, src: str, pos: int) -> CylinderUnion:
    if not body:
        return CylinderUnion.empty()
    if body == "*":
        return CylinderUnion.full()
    clauses = []
    for clause in body.split("|"):
        assignment = {}
        for token in clause.split():
            m = re.fullmatch(r"(-?\d+):([01])", token)
            if not m:
                raise LiteralError(f"bad coordinate constraint {token!r}", src, src.find(token, pos))
            k, v = int(m.group(1)), int(m.group(2))
            if assignment.get(k, v) != v:
                raise LiteralError(f"coordinate {k} constrained twice", src, src.find(token, pos))
            assignment[k] = v
        if not assignment:
            raise LiteralError("empty clause", src, pos)
        clauses.append(assignment)
    return CylinderUnion.from_assignments(clauses)


def _parse_arc(body: str, src: str, pos: int) -> ArcUnion:
    if not body:
        return ArcUnion.empty()
    arcs = []
    for part in body.split(";"):
        ends = part.split()
        if len(ends) != 2:
            raise LiteralError("an arc needs two endpoints", src, src.find(part.strip(), pos))
        try:
            arcs.append((parse_rational(ends[0]), parse_rational(ends[1])))
        except ValueError as exc:
            raise LiteralError(str(exc), src, src.find(ends[0], pos)) from None
    try:
        return ArcUnion(tuple(arcs))
    except ValueError as exc:
        raise LiteralError(str(exc), src, pos) from None


def format_base_set(E: BaseSet) -> str:
    if isinstance(E, MajoritySet):
        return f"maj {E.n}" if E.offset == 0 else f"maj {E.n}@{E.offset}"
    if isinstance(E, ArcUnion):
        if not E.arcs:
            return "arc"
        return "arc " + "; ".join(f"{format_rational(a)} {format_rational(b)}" for a, b in E.arcs)
    if not E.clauses:
        return "cyl"
    if not E.support:
        return "cyl *"
    clauses = [" ".join(f"{k}:{v}" for k, v in sorted(a.items())) for a in E.assignments()]
    return "cyl " + " | ".join(clauses)


def parse_group_element(text: str, model: str = base.BERNOULLI):
    text = text.strip()
    if model == base.BERNOULLI:
        try:
            return ShiftBy(int(text))
        except ValueError:
            raise LiteralError("expected an integer shift", text) from None
    return RotateBy(parse_rational(text))


def format_group_element(g) -> str:
    return str(g.d) if isinstance(g, ShiftBy) else format_rational(g.theta)


def _split_head(body: str) -> List[str]:
    """Split on ``;`` but keep arc endpoint lists together."""
    if not body.strip():
        return []
    items: List[str] = []
    for part in body.split(";"):
        if part.strip().split(" ", 1)[0] in _KEYWORDS or not items:
            items.append(part)
        else:
            items[-1] += ";" + part
    return items


_RECT = re.compile(r"\s*rect\s+head=\[(?P<head>.*)\]\s+tail=(?P<tail>\w+)\((?P<arg>.*)\)\s*")


def parse_rectangle(text: str, schedule=None) -> Rectangle:
    m = _RECT.fullmatch(text)
    if not m:
        raise LiteralError("expected 'rect head=[...] tail=half(...)|schedule(m)'", text)
    head = tuple(parse_base_set(item) for item in _split_head(m.group("head")))
    kind, arg = m.group("tail"), m.group("arg").strip()
    if kind == "half":
        tail = HalfTail(parse_base_set(arg))
    elif kind == "schedule":
        if schedule is None:
            raise LiteralError("schedule tail needs a built schedule", text, m.start("tail"))
        sm = re.fullmatch(r"(\d+)(?:@(-?\d+))?", arg)
        if not sm:
            raise LiteralError("expected schedule(m) or schedule(m@d)", text, m.start("arg"))
        tail = ScheduleTail(schedule, int(sm.group(1)), int(sm.group(2) or 0))
    else:
        raise LiteralError(f"unknown tail kind {kind!r}", text, m.start("tail"))
    return Rectangle(head, tail)


def format_rectangle(R: Rectangle) -> str:
    head = ";".join(format_base_set(E) for E in R.head)
    if isinstance(R.tail, HalfTail):
        tail = f"half({format_base_set(R.tail.base)})"
    else:
        shift = f"@{R.tail.shift}" if R.tail.shift else ""
        tail = f"schedule({R.tail.m}{shift})"
    return f"rect head=[{head}] tail={tail}"
