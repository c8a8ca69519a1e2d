"""Concrete base probability G-spaces.

Two models are provided:

* ``bernoulli``: the integers acting on ``{0,1}^Z`` with the uniform product
  measure.  Sets are finite unions of cylinders (:class:`CylinderUnion`) or
  symbolic window-majority sets (:class:`MajoritySet`).
* ``circle``: the circle group acting on ``[0, 1)`` by rotation, with
  Lebesgue measure.  Sets are finite unions of half-open arcs
  (:class:`ArcUnion`).

Shift convention: ``ShiftBy(d)`` acts on points by ``(d.x)_k = x_{k-d}``, so
the image of a set has its support moved by ``+d``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional, Tuple, Union

from . import majority
from .rigor import as_rational

BERNOULLI = "bernoulli"
CIRCLE = "circle"

#: Largest window a symbolic majority set may be expanded into explicit clauses.
LOWERING_CAP = 18

OPS = ("intersect", "union", "diff", "symdiff")


class ModelMismatch(TypeError):
    pass


class LoweringCapExceeded(ValueError):
    pass


# --------------------------------------------------------------------------
# group elements and windows


@dataclass(frozen=True)
class ShiftBy:
    d: int

    model = BERNOULLI

    def __post_init__(self):
        if isinstance(self.d, bool) or not isinstance(self.d, int):
            raise TypeError(f"shift must be an integer, got {self.d!r}")

    @property
    def size(self) -> int:
        return abs(self.d)


@dataclass(frozen=True)
class RotateBy:
    theta: Fraction

    model = CIRCLE

    def __post_init__(self):
        object.__setattr__(self, "theta", as_rational(self.theta) % 1)


GroupElement = Union[ShiftBy, RotateBy]


def identity(model: str) -> GroupElement:
    if model == BERNOULLI:
        return ShiftBy(0)
    if model == CIRCLE:
        return RotateBy(Fraction(0))
    raise ValueError(f"unknown model {model!r}")


def is_identity(g: GroupElement) -> bool:
    return g == identity(g.model)


def compose(g: GroupElement, h: GroupElement) -> GroupElement:
    if g.model != h.model:
        raise ModelMismatch(f"cannot compose {g} and {h}")
    if isinstance(g, ShiftBy):
        return ShiftBy(g.d + h.d)
    return RotateBy(g.theta + h.theta)


def inverse(g: GroupElement) -> GroupElement:
    if isinstance(g, ShiftBy):
        return ShiftBy(-g.d)
    return RotateBy(-g.theta)


@dataclass(frozen=True)
class CompactWindow:
    """Symmetric compact neighbourhood of the identity.

    For the integers ``radius`` r means ``{-r, ..., r}``; for the circle group
    the whole group is compact and ``radius`` is ``None``.
    """

    radius: Optional[int]

    def __post_init__(self):
        if self.radius is not None and self.radius < 0:
            raise ValueError("window radius must be nonnegative")

    @property
    def model(self) -> str:
        return CIRCLE if self.radius is None else BERNOULLI

    def contains(self, g: GroupElement) -> bool:
        if isinstance(g, RotateBy):
            return self.radius is None
        return self.radius is not None and abs(g.d) <= self.radius

    def elements(self) -> Iterator[ShiftBy]:
        if self.radius is None:
            raise ValueError("the circle window is not finite")
        for d in range(-self.radius, self.radius + 1):
            yield ShiftBy(d)

    def grow(self) -> "CompactWindow":
        return self if self.radius is None else CompactWindow(self.radius + 1)


# --------------------------------------------------------------------------
# Bernoulli model sets


def _project_out(clauses: FrozenSet[int], i: int) -> FrozenSet[int]:
    low = (1 << i) - 1
    return frozenset(((c >> (i + 1)) << i) | (c & low) for c in clauses)


@dataclass(frozen=True)
class CylinderUnion:
    """Union of cylinders over a finite coordinate support.

    ``clauses`` are bitmasks over ``support``: bit ``i`` of a clause is the
    value of coordinate ``support[i]``.  Clauses are total on the support, so
    distinct clauses describe disjoint cylinders.  Construction canonicalizes
    (sorted support, coordinates the set does not depend on dropped), which
    makes ``==`` set equality.
    """

    support: Tuple[int, ...]
    clauses: FrozenSet[int]

    model = BERNOULLI

    def __post_init__(self):
        support = tuple(self.support)
        clauses = frozenset(self.clauses)
        if len(set(support)) != len(support):
            raise ValueError(f"repeated coordinate in support {support}")
        limit = 1 << len(support)
        for c in clauses:
            if not 0 <= c < limit:
                raise ValueError(f"clause {c} is not a map on a {len(support)}-point support")
        if list(support) != sorted(support):
            order = sorted(range(len(support)), key=support.__getitem__)
            clauses = frozenset(
                sum(((c >> old) & 1) << new for new, old in enumerate(order)) for c in clauses
            )
            support = tuple(support[i] for i in order)
        # drop coordinates the set is independent of
        i = 0
        while i < len(support):
            bit = 1 << i
            if all((c ^ bit) in clauses for c in clauses):
                clauses = _project_out(clauses, i)
                support = support[:i] + support[i + 1:]
            else:
                i += 1
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "clauses", clauses)

    @classmethod
    def empty(cls) -> "CylinderUnion":
        return cls((), frozenset())

    @classmethod
    def full(cls) -> "CylinderUnion":
        return cls((), frozenset({0}))

    @classmethod
    def from_assignments(cls, assignments: Iterable[Mapping[int, int]]) -> "CylinderUnion":
        """Union of (possibly partial, possibly overlapping) coordinate constraints."""
        assignments = [dict(a) for a in assignments]
        support = tuple(sorted({k for a in assignments for k in a}))
        pos = {k: i for i, k in enumerate(support)}
        clauses = set()
        for a in assignments:
            for k, v in a.items():
                if v not in (0, 1):
                    raise ValueError(f"coordinate {k} assigned non-bit {v!r}")
            fixed = sum(v << pos[k] for k, v in a.items())
            free = [pos[k] for k in support if k not in a]
            for bits in range(1 << len(free)):
                extra = sum(((bits >> j) & 1) << p for j, p in enumerate(free))
                clauses.add(fixed | extra)
        return cls(support, frozenset(clauses))

    def assignments(self) -> List[Dict[int, int]]:
        return [
            {k: (c >> i) & 1 for i, k in enumerate(self.support)}
            for c in sorted(self.clauses)
        ]

    def is_empty(self) -> bool:
        return not self.clauses


@dataclass(frozen=True)
class MajoritySet:
    """``{x : x_o + ... + x_{o+2n} >= n+1}`` for window offset ``o``."""

    n: int
    offset: int = 0

    model = BERNOULLI

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("majority window parameter must be positive")

    @property
    def support(self) -> Tuple[int, ...]:
        return tuple(range(self.offset, self.offset + 2 * self.n + 1))

    def is_empty(self) -> bool:
        return False

    def lower(self, cap: int = LOWERING_CAP) -> CylinderUnion:
        return _lower_majority(self.n, self.offset, cap)


@lru_cache(maxsize=64)
def _lower_majority(n: int, offset: int, cap: int) -> CylinderUnion:
    width = 2 * n + 1
    if width > cap:
        raise LoweringCapExceeded(
            f"majority set with window {width} exceeds the lowering cap {cap}"
        )
    clauses = frozenset(c for c in range(1 << width) if bin(c).count("1") >= n + 1)
    return CylinderUnion(tuple(range(offset, offset + width)), clauses)


# --------------------------------------------------------------------------
# circle model sets


@dataclass(frozen=True)
class ArcUnion:
    """Finite union of half-open arcs ``[a, b)`` with ``0 <= a < b <= 1``.

    Canonical form: arcs sorted, overlapping or touching arcs merged.
    """

    arcs: Tuple[Tuple[Fraction, Fraction], ...]

    model = CIRCLE

    def __post_init__(self):
        arcs = []
        for a, b in self.arcs:
            a, b = as_rational(a), as_rational(b)
            if not (0 <= a < 1 and a < b <= 1):
                raise ValueError(f"arc [{a}, {b}) is not a nonempty arc inside [0, 1)")
            arcs.append((a, b))
        object.__setattr__(self, "arcs", _merge(arcs))

    @classmethod
    def empty(cls) -> "ArcUnion":
        return cls(())

    @classmethod
    def full(cls) -> "ArcUnion":
        return cls(((Fraction(0), Fraction(1)),))

    def is_empty(self) -> bool:
        return not self.arcs


def _merge(arcs) -> Tuple[Tuple[Fraction, Fraction], ...]:
    out: List[Tuple[Fraction, Fraction]] = []
    for a, b in sorted(arcs):
        if out and a <= out[-1][1]:
            if b > out[-1][1]:
                out[-1] = (out[-1][0], b)
        else:
            out.append((a, b))
    return tuple(out)


def _arc_intersect(xs, ys):
    out = []
    i = j = 0
    while i < len(xs) and j < len(ys):
        a = max(xs[i][0], ys[j][0])
        b = min(xs[i][1], ys[j][1])
        if a < b:
            out.append((a, b))
        if xs[i][1] < ys[j][1]:
            i += 1
        else:
            j += 1
    return out


def _arc_complement(xs):
    out = []
    cursor = Fraction(0)
    for a, b in xs:
        if a > cursor:
            out.append((cursor, a))
        cursor = b
    if cursor < 1:
        out.append((cursor, Fraction(1)))
    return out


BaseSet = Union[CylinderUnion, ArcUnion, MajoritySet]


def model_of(x) -> str:
    return x.model


def full_set(model: str) -> BaseSet:
    return CylinderUnion.full() if model == BERNOULLI else ArcUnion.full()


def empty_set(model: str) -> BaseSet:
    return CylinderUnion.empty() if model == BERNOULLI else ArcUnion.empty()


# --------------------------------------------------------------------------
# operations


def nu(E: BaseSet) -> Fraction:
    """Exact probability of a base set."""
    if isinstance(E, CylinderUnion):
        return Fraction(len(E.clauses), 1 << len(E.support))
    if isinstance(E, ArcUnion):
        return sum((b - a for a, b in E.arcs), Fraction(0))
    if isinstance(E, MajoritySet):
        return majority.majority_measure(E.n)
    raise TypeError(f"not a base set: {E!r}")


def act(g: GroupElement, E: BaseSet) -> BaseSet:
    """Image ``gE`` of a base set."""
    if g.model != E.model:
        raise ModelMismatch(f"{g} cannot act on a {E.model} set")
    if isinstance(E, CylinderUnion):
        return CylinderUnion(tuple(k + g.d for k in E.support), E.clauses)
    if isinstance(E, MajoritySet):
        return MajoritySet(E.n, E.offset + g.d)
    theta = g.theta
    pieces = []
    for a, b in E.arcs:
        a2, b2 = a + theta, b + theta
        if b2 <= 1:
            pieces.append((a2, b2))
        elif a2 >= 1:
            pieces.append((a2 - 1, b2 - 1))
        else:
            pieces.append((a2, Fraction(1)))
            pieces.append((Fraction(0), b2 - 1))
    return ArcUnion(tuple(pieces))


def _expand(E: CylinderUnion, support: Tuple[int, ...]) -> FrozenSet[int]:
    """Clauses of ``E`` re-expressed as total maps on a larger ``support``."""
    pos = {k: i for i, k in enumerate(support)}
    own = [pos[k] for k in E.support]
    free = [i for i, k in enumerate(support) if k not in set(E.support)]
    base = [sum(((c >> j) & 1) << p for j, p in enumerate(own)) for c in E.clauses]
    out = set()
    for bits in range(1 << len(free)):
        extra = sum(((bits >> j) & 1) << p for j, p in enumerate(free))
        out.update(b | extra for b in base)
    return frozenset(out)


def _as_cylinder(E: BaseSet, cap: int) -> CylinderUnion:
    return E.lower(cap) if isinstance(E, MajoritySet) else E


def boolean(op: str, E: BaseSet, F: BaseSet, *, cap: int = LOWERING_CAP) -> BaseSet:
    """Canonical base set for ``E op F``; majority operands are lowered first."""
    if op not in OPS:
        raise ValueError(f"unknown boolean operation {op!r}")
    if E.model != F.model:
        raise ModelMismatch(f"cannot combine a {E.model} set with a {F.model} set")
    if E.model == CIRCLE:
        xs, ys = E.arcs, F.arcs
        if op == "intersect":
            return ArcUnion(tuple(_arc_intersect(xs, ys)))
        if op == "union":
            return ArcUnion(xs + ys)
        if op == "diff":
            return ArcUnion(tuple(_arc_intersect(xs, _arc_complement(ys))))
        left = _arc_intersect(xs, _arc_complement(ys))
        right = _arc_intersect(ys, _arc_complement(xs))
        return ArcUnion(tuple(left + right))
    if E == F:
        return {"intersect": E, "union": E}.get(op, CylinderUnion.empty())
    e, f = _as_cylinder(E, cap), _as_cylinder(F, cap)
    support = tuple(sorted(set(e.support) | set(f.support)))
    a, b = _expand(e, support), _expand(f, support)
    if op == "intersect":
        clauses = a & b
    elif op == "union":
        clauses = a | b
    elif op == "diff":
        clauses = a - b
    else:
        clauses = a ^ b
    return CylinderUnion(support, clauses)


def complement(E: BaseSet, *, cap: int = LOWERING_CAP) -> BaseSet:
    return boolean("diff", full_set(E.model), E, cap=cap)


@lru_cache(maxsize=1 << 16)
def nu_boolean(op: str, E: BaseSet, F: BaseSet) -> Fraction:
    """``nu(E op F)``, using the overlap formula for two same-size majority sets.

    Other combinations go through :func:`boolean`; this is the path that keeps
    large majority windows out of explicit clause enumeration.
    """
    if isinstance(E, MajoritySet) and isinstance(F, MajoritySet) and E.n == F.n:
        ov = majority.overlap(E.n, E.offset - F.offset)
        half = Fraction(1, 2)
        return {
            "intersect": ov,
            "union": 1 - ov,
            "diff": half - ov,
            "symdiff": 1 - 2 * ov,
        }[op]
    return nu(boolean(op, E, F))


def subset(E: BaseSet, F: BaseSet) -> bool:
    """Set inclusion; for both models a set is empty iff it has measure zero."""
    return nu_boolean("diff", E, F) == 0


def disjoint(E: BaseSet, F: BaseSet) -> bool:
    return nu_boolean("intersect", E, F) == 0


class NotMixingModel(ValueError):
    pass


def mixing_threshold(A: BaseSet, B: BaseSet) -> int:
    """Least r with ``supp(dA)`` and ``supp(B)`` disjoint for every ``|d| >= r``.

    From that point on, ``nu(dA & B) = nu(A) nu(B)`` holds exactly because the
    two sets depend on disjoint blocks of independent coordinates.
    """
    for X in (A, B):
        if X.model != BERNOULLI:
            raise NotMixingModel("rotations are not mixing; no threshold exists")
    sa, sb = A.support, B.support
    if not sa or not sb:
        return 0
    return max(max(sb) - min(sa), max(sa) - min(sb)) + 1
