"""Head-finite product sets over ``X = S x S x ...`` and the measure on them.

A :class:`Rectangle` has finitely many explicit head factors followed by a
tail whose factors all have base measure exactly 1/2.  Every tail factor then
contributes ``2 * 1/2 = 1`` to ``mu``, so the infinite product defining the
measure of a rectangle is its (finite) head product and stays exact.

Finite disjoint unions of rectangles (:class:`RingSet`) carry a disjointness
certificate for each pair of pieces: a coordinate at which the two factor
sets do not meet.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, List, Optional, Sequence, Tuple, Union

from . import base
from .base import BaseSet, GroupElement, ShiftBy, CompactWindow, nu, nu_boolean
from .rigor import Exact, Interval, MeasureValue, as_rational

HALF = Fraction(1, 2)


class TailMismatch(ValueError):
    pass


class ContainmentError(ValueError):
    pass


class DepthTooSmall(ValueError):
    pass


# --------------------------------------------------------------------------
# tails


@dataclass(frozen=True)
class HalfTail:
    """Every factor beyond the head is the same set ``base`` (``nu = 1/2``)."""

    base: BaseSet

    constant = True

    def __post_init__(self):
        if nu(self.base) != HALF:
            raise ValueError(f"tail set must have measure exactly 1/2, got {nu(self.base)}")

    @property
    def model(self) -> str:
        return self.base.model

    def factor(self, k: int) -> BaseSet:
        return self.base

    def act(self, g: GroupElement) -> "HalfTail":
        return HalfTail(base.act(g, self.base))


@dataclass(frozen=True)
class ScheduleTail:
    """Factor ``k`` is the majority set ``A_{n(k,m)}`` translated by ``shift``.

    ``schedule`` is anything with ``n(k, m)`` and ``k_max``; only the first
    ``k_max`` factors can be materialized.  The group element is recorded
    symbolically in ``shift`` rather than applied to infinitely many sets.
    """

    schedule: object
    m: int
    shift: int = 0

    constant = False
    model = base.BERNOULLI

    def factor(self, k: int) -> BaseSet:
        return base.MajoritySet(self.schedule.n(k, self.m), self.shift)

    def act(self, g: GroupElement) -> "ScheduleTail":
        if not isinstance(g, ShiftBy):
            raise base.ModelMismatch("schedule tails live in the Bernoulli model")
        return ScheduleTail(self.schedule, self.m, self.shift + g.d)

    @property
    def k_max(self) -> int:
        return self.schedule.k_max


Tail = Union[HalfTail, ScheduleTail]


# --------------------------------------------------------------------------
# rectangles


@dataclass(frozen=True)
class Rectangle:
    head: Tuple[BaseSet, ...]
    tail: Tail
    depth_hint: Optional[int] = field(default=None, compare=False)

    def __post_init__(self):
        head = tuple(self.head)
        for E in head:
            if E.model != self.tail.model:
                raise base.ModelMismatch("head and tail factors from different models")
        # a trailing head factor equal to the tail factor is redundant
        while head and _tail_factor_or_none(self.tail, len(head)) == head[-1]:
            head = head[:-1]
        object.__setattr__(self, "head", head)

    @property
    def h(self) -> int:
        return len(self.head)

    @property
    def model(self) -> str:
        return self.tail.model

    def factor(self, k: int) -> BaseSet:
        """Factor at coordinate ``k >= 1``."""
        if k < 1:
            raise IndexError("product coordinates start at 1")
        if k <= len(self.head):
            return self.head[k - 1]
        return self.tail.factor(k)

    def is_empty(self) -> bool:
        return any(E.is_empty() for E in self.head)


def _tail_factor_or_none(tail: Tail, k: int):
    try:
        return tail.factor(k)
    except (KeyError, IndexError):
        return None


def pure_tail(tail: Tail) -> Rectangle:
    return Rectangle((), tail)


def rect_measure(A: Rectangle) -> Fraction:
    """``mu(A) = prod 2 nu(A_k)`` over the head; tail factors contribute 1."""
    value = Fraction(1)
    for E in A.head:
        value *= 2 * nu(E)
    return value


def _same_tail(*rects: Rectangle) -> Tail:
    tail = rects[0].tail
    for R in rects[1:]:
        if R.tail != tail:
            raise TailMismatch("rectangles do not share a tail context")
    return tail


def rect_intersect(A: Rectangle, B: Rectangle) -> Rectangle:
    tail = _same_tail(A, B)
    H = max(A.h, B.h)
    head = tuple(base.boolean("intersect", A.factor(k), B.factor(k)) for k in range(1, H + 1))
    return Rectangle(head, tail)


def rect_diff(A: Rectangle, B: Rectangle) -> List[Rectangle]:
    """``A \\ B`` as disjoint rectangles, split one coordinate at a time.

    Piece ``k`` agrees with ``A & B`` before ``k``, with ``A_k \\ B_k`` at
    ``k`` and with ``A`` after ``k``.  Beyond both heads the factors
    coincide, so at most ``max(h_A, h_B)`` pieces are produced.
    """
    tail = _same_tail(A, B)
    if A.is_empty():
        return []
    H = max(A.h, B.h)
    meets = [base.boolean("intersect", A.factor(k), B.factor(k)) for k in range(1, H + 1)]
    if any(E.is_empty() for E in meets):
        return [A]
    pieces = []
    for k in range(1, H + 1):
        cut = base.boolean("diff", A.factor(k), B.factor(k))
        if cut.is_empty():
            continue
        head = tuple(meets[:k - 1]) + (cut,) + tuple(A.factor(j) for j in range(k + 1, H + 1))
        pieces.append(Rectangle(head, tail))
    return pieces


def rect_contains(B: Rectangle, A: Rectangle) -> bool:
    """``A`` is a subset of ``B`` (same tail required)."""
    _same_tail(A, B)
    if A.is_empty():
        return True
    H = max(A.h, B.h)
    return all(base.subset(A.factor(k), B.factor(k)) for k in range(1, H + 1))


def disjoint_at(A: Rectangle, B: Rectangle) -> Optional[int]:
    """First coordinate where the factors of ``A`` and ``B`` are disjoint."""
    H = max(A.h, B.h)
    for k in range(1, H + 1):
        if base.disjoint(A.factor(k), B.factor(k)):
            return k
    return None


def bounding_rectangle(pieces: Sequence[Rectangle], tail: Tail) -> Rectangle:
    """Rectangle of head-wise unions; it contains every piece."""
    if not pieces:
        return Rectangle((), tail)
    H = max(P.h for P in pieces)
    head = []
    for k in range(1, H + 1):
        acc = pieces[0].factor(k)
        for P in pieces[1:]:
            acc = base.boolean("union", acc, P.factor(k))
        head.append(acc)
    return Rectangle(tuple(head), tail)


# --------------------------------------------------------------------------
# ring of finite disjoint unions


@dataclass(frozen=True)
class DisjointnessCertificate:
    i: int
    j: int
    index: int


@dataclass(frozen=True)
class RingSet:
    pieces: Tuple[Rectangle, ...]
    tail: Tail
    certificates: Tuple[DisjointnessCertificate, ...] = ()

    @classmethod
    def build(cls, pieces: Iterable[Rectangle], tail: Tail) -> "RingSet":
        """Drop empty pieces, then certify pairwise disjointness."""
        kept = []
        for P in pieces:
            if P.tail != tail:
                raise TailMismatch("piece with a foreign tail context")
            if not P.is_empty():
                kept.append(P)
        certs = []
        for i, j in itertools.combinations(range(len(kept)), 2):
            k = disjoint_at(kept[i], kept[j])
            if k is None:
                raise ValueError(f"pieces {i} and {j} overlap")
            certs.append(DisjointnessCertificate(i, j, k))
        return cls(tuple(kept), tail, tuple(certs))

    @classmethod
    def of(cls, A: Rectangle) -> "RingSet":
        return cls.build([A], A.tail)

    @classmethod
    def empty(cls, tail: Tail) -> "RingSet":
        return cls((), tail, ())

    def __len__(self) -> int:
        return len(self.pieces)

    @property
    def model(self) -> str:
        return self.tail.model

    def verify(self) -> bool:
        """Re-check every stored certificate and that all pairs are covered."""
        n = len(self.pieces)
        if len(self.certificates) != n * (n - 1) // 2:
            return False
        for c in self.certificates:
            if not base.disjoint(self.pieces[c.i].factor(c.index), self.pieces[c.j].factor(c.index)):
                return False
        return True


def as_ringset(E) -> RingSet:
    if isinstance(E, RingSet):
        return E
    if isinstance(E, Rectangle):
        return RingSet.of(E)
    raise TypeError(f"not a product set: {E!r}")


def intersect(E, F) -> RingSet:
    E, F = as_ringset(E), as_ringset(F)
    _check_tails(E, F)
    return RingSet.build(
        (rect_intersect(P, Q) for P in E.pieces for Q in F.pieces), E.tail
    )


def difference(E, F) -> RingSet:
    E, F = as_ringset(E), as_ringset(F)
    _check_tails(E, F)
    out: List[Rectangle] = []
    for P in E.pieces:
        remaining = [P]
        for Q in F.pieces:
            remaining = [R for piece in remaining for R in rect_diff(piece, Q)]
        out.extend(remaining)
    return RingSet.build(out, E.tail)


def union(E, F) -> RingSet:
    E, F = as_ringset(E), as_ringset(F)
    _check_tails(E, F)
    rest = difference(F, E)
    return RingSet.build(E.pieces + rest.pieces, E.tail)


def _check_tails(E: RingSet, F: RingSet):
    if E.tail != F.tail:
        raise TailMismatch("product sets do not share a tail context")


@dataclass(frozen=True)
class Inter:
    left: object
    right: object


@dataclass(frozen=True)
class Diff:
    left: object
    right: object


@dataclass(frozen=True)
class Union_:
    left: object
    right: object


def ring_normalize(expr) -> RingSet:
    """Evaluate an ``Inter``/``Diff``/``Union_`` tree over rectangles."""
    if isinstance(expr, (Rectangle, RingSet)):
        return as_ringset(expr)
    if isinstance(expr, Inter):
        return intersect(ring_normalize(expr.left), ring_normalize(expr.right))
    if isinstance(expr, Diff):
        return difference(ring_normalize(expr.left), ring_normalize(expr.right))
    if isinstance(expr, Union_):
        return union(ring_normalize(expr.left), ring_normalize(expr.right))
    raise TypeError(f"not a set expression: {expr!r}")


def mu(E) -> Fraction:
    return sum((rect_measure(P) for P in as_ringset(E).pieces), Fraction(0))


def same_set(E, F) -> bool:
    """Set equality; nonempty ring sets always have positive measure."""
    return mu(difference(E, F)) == 0 and mu(difference(F, E)) == 0


def p_cond(B: Rectangle, E) -> Fraction:
    """Conditional product probability ``P_B(E)`` for ``E`` inside ``B``."""
    E = as_ringset(E)
    if E.tail != B.tail:
        raise TailMismatch("conditioning rectangle has a different tail")
    if any(nu(F) == 0 for F in B.head):
        raise ContainmentError("conditioning rectangle has a null head factor")
    total = Fraction(0)
    for P in E.pieces:
        if not rect_contains(B, P):
            raise ContainmentError("set is not contained in the conditioning rectangle")
        term = Fraction(1)
        for k in range(1, max(P.h, B.h) + 1):
            Bk = B.factor(k)
            term *= nu_boolean("intersect", P.factor(k), Bk) / nu(Bk)
        total += term
    return total


def diag_act(g: GroupElement, E):
    """Diagonal action on every coordinate, tail included."""
    if isinstance(E, Rectangle):
        if g.model != E.model:
            raise base.ModelMismatch(f"{g} cannot act on a {E.model} product set")
        return Rectangle(tuple(base.act(g, F) for F in E.head), E.tail.act(g), E.depth_hint)
    E = as_ringset(E)
    if g.model != E.model:
        raise base.ModelMismatch(f"{g} cannot act on a {E.model} product set")
    pieces = tuple(diag_act(g, P) for P in E.pieces)
    # a bijection keeps each certified coordinate disjoint
    return RingSet(pieces, E.tail.act(g), E.certificates)


# --------------------------------------------------------------------------
# C0 estimates


def overlap_factors(g: GroupElement, A: Rectangle, B: Rectangle, depth: int) -> List[Fraction]:
    """``2 nu(g A_k & B_k)`` for ``k = 1..depth``."""
    gA = diag_act(g, A)
    return [2 * nu_boolean("intersect", gA.factor(k), B.factor(k)) for k in range(1, depth + 1)]


def c0_eval(g: GroupElement, A: Rectangle, B: Rectangle, depth: int) -> Tuple[Fraction, MeasureValue]:
    """Truncated and infinite values of ``mu(gA & B)``.

    The truncated value multiplies the first ``depth`` coordinate factors.
    The infinite value is exact when the tail factors are constant (a half
    tail) or all equal to one (matching tails); otherwise only the partial
    product is known to bound it from above.
    """
    if depth < max(A.h, B.h):
        raise DepthTooSmall(f"depth {depth} is shorter than the head")
    factors = overlap_factors(g, A, B, depth)
    truncated = Fraction(1)
    for f in factors:
        truncated *= f
    if truncated == 0:
        return truncated, Exact(0)
    gA = diag_act(g, A)
    if gA.tail == B.tail:
        # every tail factor is 2 nu(T_k) = 1
        return truncated, Exact(truncated)
    if gA.tail.constant and B.tail.constant:
        c = 2 * nu_boolean("intersect", gA.tail.base, B.tail.base)
        if c < 1:
            return truncated, Exact(0)
        return truncated, Exact(truncated)
    return truncated, Interval(0, truncated)


def _factor_thresholds(A: Rectangle, B: Rectangle, depth: int) -> List[int]:
    return [base.mixing_threshold(A.factor(k), B.factor(k)) for k in range(1, depth + 1)]


@dataclass(frozen=True)
class C0Threshold:
    """Window outside of which the truncated coefficient is at most epsilon.

    ``window.radius`` is the least r with ``truncated(g) <= epsilon`` for all
    ``|g| >= r``, found by exhaustive scan below the largest factor mixing
    threshold.  The remaining fields are the constructive constants of the
    decay argument (``epsilon_prime``, ``delta``, ``first_index`` N,
    ``m``, ``proof_radius``), reported alongside.
    """

    window: CompactWindow
    floor: Fraction
    epsilon: Fraction
    epsilon_prime: Fraction
    delta: Fraction
    first_index: int
    m: int
    proof_radius: int
    proof_fits_depth: bool


def _proof_constants(A: Rectangle, B: Rectangle, epsilon: Fraction, epsilon_prime: Fraction):
    delta = HALF + epsilon_prime + epsilon_prime / (HALF - epsilon_prime)
    if delta >= 1:
        raise ValueError("epsilon' too large: delta must stay below 1")
    # tail factors have measure exactly 1/2, so every index past the heads qualifies
    first = max(A.h, B.h) + 1
    target = epsilon / rect_measure(A)
    m = 0
    power = delta
    while power >= target:
        power *= delta
        m += 1
    return delta, first, m


def c0_threshold_report(
    A: Rectangle,
    B: Rectangle,
    epsilon,
    depth: int,
    *,
    epsilon_prime=Fraction(1, 64),
) -> C0Threshold:
    epsilon = as_rational(epsilon)
    epsilon_prime = as_rational(epsilon_prime)
    if A.model != base.BERNOULLI:
        raise base.NotMixingModel("decay windows are only computable for the Bernoulli model")
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if rect_measure(A) <= 0:
        raise ValueError("mu(A) must be positive")
    if depth < max(A.h, B.h):
        raise DepthTooSmall(f"depth {depth} is shorter than the head")

    thresholds = _factor_thresholds(A, B, depth)
    top = max(thresholds, default=0)
    floor = Fraction(1)
    for k in range(1, depth + 1):
        floor *= 2 * nu(A.factor(k)) * nu(B.factor(k))
    if floor > epsilon:
        raise DepthTooSmall(
            f"at depth {depth} the decayed coefficient is {floor} > epsilon = {epsilon}"
        )

    def truncated(d: int) -> Fraction:
        value, _ = c0_eval(ShiftBy(d), A, B, depth)
        return value

    # beyond `top` every factor equals 2 nu(A_k) nu(B_k); scan the rest
    radius = 0
    for r in range(top - 1, -1, -1):
        if truncated(r) > epsilon or truncated(-r) > epsilon:
            radius = r + 1
            break

    delta, first, m = _proof_constants(A, B, epsilon, epsilon_prime)
    last = first + m
    proof_fits = last <= depth
    proof_radius = max(
        (base.mixing_threshold(A.factor(k), B.factor(k)) for k in range(first, last + 1)),
        default=0,
    )
    return C0Threshold(
        window=CompactWindow(radius),
        floor=floor,
        epsilon=epsilon,
        epsilon_prime=epsilon_prime,
        delta=delta,
        first_index=first,
        m=m,
        proof_radius=proof_radius,
        proof_fits_depth=proof_fits,
    )


def c0_threshold(A: Rectangle, B: Rectangle, epsilon, depth: int, **kw) -> CompactWindow:
    return c0_threshold_report(A, B, epsilon, depth, **kw).window


# --------------------------------------------------------------------------
# non-sigma-finiteness


DISJOINT_FAMILY_CAP = 10


def disjoint_family(N: int, A: BaseSet, *, cap: int = DISJOINT_FAMILY_CAP) -> RingSet:
    """The ``2**N`` rectangles with head ``A`` or its complement per coordinate.

    Each has measure 1 and any two differ by complementary factors somewhere,
    so the union has measure ``2**N``; letting N grow exhibits uncountably
    many disjoint sets of measure one.
    """
    if N < 1 or N > cap:
        raise ValueError(f"N must lie in 1..{cap}")
    if nu(A) != HALF:
        raise ValueError(f"base set must have measure exactly 1/2, got {nu(A)}")
    choices = (A, base.complement(A))
    tail = HalfTail(A)
    pieces = [
        Rectangle(tuple(choices[e] for e in signs), tail)
        for signs in itertools.product((0, 1), repeat=N)
    ]
    return RingSet.build(pieces, tail)
