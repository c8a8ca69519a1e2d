"""Almost-invariant unit vectors and the certificates behind their bounds.

For each ``m`` the vector ``xi_m`` is the indicator of
``X_m = A_{n(1,m)} x A_{n(2,m)} x ...`` where ``A_n`` are majority sets and
``n(k, m)`` is the least n whose symmetric difference with every translate
by ``|d| <= m`` is at most ``1 - exp(-1/(m 2^k))``.  Then every coordinate
factor ``2 nu(g A & A)`` of the coefficient ``<pi(g) xi_m, xi_m>`` is at
least ``exp(-1/(m 2^k))`` and the product over k is at least ``exp(-1/m)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from . import base, majority, product
from .base import CompactWindow, GroupElement, ShiftBy, RotateBy, nu, nu_boolean
from .product import HalfTail, Rectangle, ScheduleTail
from .rigor import (
    Enclosure,
    Exact,
    Interval,
    MeasureValue,
    as_rational,
    exp_neg_enclosure,
    format_rational,
    parse_rational,
)


class OutsideCertifiedWindow(ValueError):
    pass


class PreconditionViolation(ValueError):
    def __init__(self, message: str, index: int):
        super().__init__(f"{message} (index {index})")
        self.index = index


def default_width(k: int, m: int) -> Fraction:
    return Fraction(1, 2 ** (k + m + 4))


def exponent(k: int, m: int) -> Fraction:
    """``1 / (m 2^k)``; these sum to ``1/m`` over k."""
    return Fraction(1, m * 2 ** k)


# --------------------------------------------------------------------------
# schedule


@dataclass(frozen=True)
class ScheduleEntry:
    k: int
    m: int
    n: int
    enclosure: Enclosure      # of exp(-1/(m 2^k))
    threshold: Fraction       # admissible symmetric difference
    slack: Fraction           # exact max over |d| <= m of nu(d A_n ^ A_n)

    @property
    def factor_lower(self) -> Fraction:
        """Certified lower bound on ``2 nu(g A_n & A_n)`` for ``|g| <= m``."""
        return 1 - self.slack

    def to_record(self) -> dict:
        return {
            "k": self.k,
            "m": self.m,
            "n": self.n,
            "x": format_rational(exponent(self.k, self.m)),
            "slack": format_rational(self.slack),
            "threshold": format_rational(self.threshold),
            "enc_lo": format_rational(self.enclosure.lo),
            "enc_hi": format_rational(self.enclosure.hi),
        }

    @classmethod
    def from_record(cls, rec: dict) -> "ScheduleEntry":
        return cls(
            k=int(rec["k"]),
            m=int(rec["m"]),
            n=int(rec["n"]),
            enclosure=Enclosure(parse_rational(rec["enc_lo"]), parse_rational(rec["enc_hi"])),
            threshold=parse_rational(rec["threshold"]),
            slack=parse_rational(rec["slack"]),
        )


@dataclass(frozen=True)
class WitnessSchedule:
    k_max: int
    m_max: int
    entries: Tuple[ScheduleEntry, ...]
    _index: Dict[Tuple[int, int], ScheduleEntry] = field(
        default=None, init=False, repr=False, compare=False, hash=False
    )

    def __post_init__(self):
        object.__setattr__(self, "_index", {(e.k, e.m): e for e in self.entries})

    def entry(self, k: int, m: int) -> ScheduleEntry:
        try:
            return self._index[(k, m)]
        except KeyError:
            raise KeyError(f"schedule has no cell (k={k}, m={m})") from None

    def n(self, k: int, m: int) -> int:
        return self.entry(k, m).n

    def to_records(self) -> List[dict]:
        return [e.to_record() for e in self.entries]

    def dumps(self) -> str:
        return "".join(json.dumps(r, sort_keys=True) + "\n" for r in self.to_records())

    @classmethod
    def from_records(cls, records: Iterable[dict]) -> "WitnessSchedule":
        entries = tuple(ScheduleEntry.from_record(r) for r in records)
        k_max = max((e.k for e in entries), default=0)
        m_max = max((e.m for e in entries), default=0)
        return cls(k_max, m_max, entries)

    @classmethod
    def loads(cls, text: str) -> "WitnessSchedule":
        return cls.from_records(json.loads(line) for line in text.splitlines() if line.strip())


def build_schedule(
    k_max: int,
    m_max: int,
    *,
    cap: int = majority.DEFAULT_SEARCH_CAP,
    slack_override=None,
) -> WitnessSchedule:
    """Least-n schedule ``n(k, m)`` for windows ``{-m..m}``.

    The admissible symmetric difference is ``1 - hi`` where ``hi`` is the
    upper end of the enclosure of ``exp(-1/(m 2^k))``; that keeps
    ``2 nu(g A & A) >= hi >= exp(-1/(m 2^k))``.  ``slack_override`` replaces
    this threshold in every cell (used to force failures).
    """
    if k_max < 1 or m_max < 1:
        raise ValueError("k_max and m_max must be positive")
    override = None if slack_override is None else as_rational(slack_override)
    entries = []
    for m in range(1, m_max + 1):
        start, prev = 1, None
        for k in range(1, k_max + 1):
            enc = exp_neg_enclosure(exponent(k, m), default_width(k, m))
            threshold = 1 - enc.hi if override is None else override
            # a tighter threshold can only push the least n upwards
            if prev is None or threshold > prev:
                start = 1
            n = majority.ai_find(m, threshold, start=start, cap=cap)
            entries.append(
                ScheduleEntry(k, m, n, enc, threshold, majority.max_symdiff(n, m))
            )
            start, prev = n, threshold
    return WitnessSchedule(k_max, m_max, tuple(entries))


def verify_schedule(schedule: WitnessSchedule, *, check_minimal: bool = True) -> List[str]:
    """Independent re-verification; returns human-readable failures."""
    failures = []
    for e in schedule.entries:
        where = f"(k={e.k}, m={e.m})"
        x = exponent(e.k, e.m)
        # the stored enclosure must bracket exp(-x): check it against deeper partial sums
        fine = exp_neg_enclosure(x, e.enclosure.width / 1024)
        if not (e.enclosure.lo <= fine.lo and fine.hi <= e.enclosure.hi):
            failures.append(f"{where}: enclosure does not contain exp(-{x})")
        if e.enclosure.width > default_width(e.k, e.m):
            failures.append(f"{where}: enclosure wider than {default_width(e.k, e.m)}")
        if e.threshold > 1 - e.enclosure.hi:
            failures.append(f"{where}: threshold exceeds 1 - hi")
        exact = max(majority.symdiff_shift(e.n, d) for d in range(e.m + 1))
        if exact > e.slack:
            failures.append(f"{where}: stored slack {e.slack} below exact {exact}")
        if e.slack > e.threshold:
            failures.append(f"{where}: slack {e.slack} exceeds threshold {e.threshold}")
        if check_minimal:
            for smaller in range(1, e.n):
                if all(majority.symdiff_at_most(smaller, d, e.threshold) for d in range(e.m + 1)):
                    failures.append(f"{where}: n={smaller} < {e.n} already admissible")
                    break
    return failures


def witness_support(schedule: WitnessSchedule, m: int, shift: int = 0) -> Rectangle:
    """``X_m`` (translated by ``shift``); its measure is exactly 1."""
    return Rectangle((), ScheduleTail(schedule, m, shift))


# --------------------------------------------------------------------------
# coefficients


def coefficient(
    g: GroupElement,
    m: int,
    depth: int,
    schedule: WitnessSchedule,
    *,
    certified: bool = True,
) -> MeasureValue:
    """Enclosure of ``<pi(g) xi_m, xi_m> = prod_k 2 nu(g A_{n(k,m)} & A_{n(k,m)})``.

    The upper end is the exact product of the first ``depth`` factors.  The
    lower end multiplies it by the certified factor bounds of the remaining
    schedule cells and by ``exp(-1/(m 2^K))`` (lower enclosure end) for the
    cells beyond ``K = k_max``, valid whenever ``|g| <= m``.
    """
    if not isinstance(g, ShiftBy):
        raise base.ModelMismatch("the witness lives in the Bernoulli model")
    if not 1 <= depth <= schedule.k_max:
        raise ValueError(f"depth must lie in 1..{schedule.k_max}")
    if g.d == 0:
        return Exact(1)
    X = witness_support(schedule, m)
    factors = product.overlap_factors(g, X, X, depth)
    upper = Fraction(1)
    for f in factors:
        upper *= f
    if abs(g.d) > m:
        if certified:
            raise OutsideCertifiedWindow(f"|g| = {abs(g.d)} exceeds the certified window radius {m}")
        return Interval(0, upper)
    lower = upper
    for k in range(depth + 1, schedule.k_max + 1):
        lower *= schedule.entry(k, m).factor_lower
    lower *= tail_enclosure(m, schedule.k_max).lo
    return Interval(lower, upper)


def tail_enclosure(m: int, after: int) -> Enclosure:
    """Enclosure of ``prod_{k > after} exp(-1/(m 2^k)) = exp(-1/(m 2^after))``."""
    return exp_neg_enclosure(Fraction(1, m * 2 ** after), Fraction(1, 2 ** (after + m + 40)))


# --------------------------------------------------------------------------
# F_c certificates


@dataclass(frozen=True)
class FcCertificate:
    """Uniform tail-convergence certificate for a rectangle over a window.

    ``lower_bounds[k-1]`` bounds ``2 nu(g A_k & A_k)`` from below for all g in
    the window.  Beyond the explicit indices the defects ``1 - factor`` are
    bounded by ``tail_scale / 2^k`` (summable), so the tail product from
    index N on is at least ``1 - epsilon(N)`` with ``epsilon(N) -> 0``.
    """

    target: Rectangle
    window: CompactWindow
    lower_bounds: Tuple[Fraction, ...]
    tail_scale: Optional[Fraction]
    tail_lower: Fraction
    valid: bool
    refutation_index: Optional[int] = None
    note: str = ""

    def epsilon(self, N: int) -> Fraction:
        """Bound on ``sum_{k >= N} (1 - factor_k)``; tail product ``>= 1 - epsilon``."""
        if not self.valid or self.tail_scale is None:
            raise ValueError("no convergence bound for an invalid certificate")
        explicit = sum((1 - l for l in self.lower_bounds[N - 1:]), Fraction(0))
        last = max(len(self.lower_bounds), N - 1)
        return explicit + self.tail_scale / 2 ** last

    def partial_defects(self) -> List[Fraction]:
        """Partial sums of ``1 - l_k`` over the explicit indices."""
        out, acc = [], Fraction(0)
        for l in self.lower_bounds:
            acc += 1 - l
            out.append(acc)
        return out

    @property
    def product_lower(self) -> Fraction:
        value = self.tail_lower
        for l in self.lower_bounds:
            value *= l
        return value


def _window_min(A: base.BaseSet, window: CompactWindow) -> Fraction:
    return min(2 * nu_boolean("intersect", base.act(g, A), A) for g in window.elements())


def fc_check(A: Rectangle, window: CompactWindow, depth: Optional[int] = None) -> FcCertificate:
    """Certify or refute uniform convergence of the tail products of ``A``.

    Explicit indices run to ``depth`` (default: the whole schedule for
    schedule tails, one past the head for half tails).  A half tail whose
    factor drops below 1 somewhere in the window makes every tail product
    vanish, which is returned as a refutation.
    """
    if A.model != base.BERNOULLI or window.radius is None:
        raise base.ModelMismatch("certificates are computed for the integers with finite windows")
    tail = A.tail
    if depth is None:
        depth = tail.k_max if isinstance(tail, ScheduleTail) else A.h + 1
    if depth < A.h:
        raise product.DepthTooSmall("depth shorter than the head")
    lows = tuple(_window_min(A.factor(k), window) for k in range(1, depth + 1))

    if product.rect_measure(A) == 0:
        return FcCertificate(A, window, lows, Fraction(0), Fraction(1), True, note="null set")

    if isinstance(tail, HalfTail):
        c = _window_min(tail.base, window)
        if c == 1:
            return FcCertificate(A, window, lows, Fraction(0), Fraction(1), True,
                                 note="invariant tail factor")
        return FcCertificate(
            A, window, lows, None, Fraction(0), False,
            refutation_index=A.h + 1,
            note=f"constant tail factor {c} < 1 from index {A.h + 1}: every tail product is 0",
        )

    if window.radius > tail.m:
        return FcCertificate(
            A, window, lows, None, Fraction(0), False,
            note=f"window radius {window.radius} exceeds the schedule window {tail.m}",
        )
    if depth > tail.k_max:
        raise product.DepthTooSmall("depth beyond the built schedule")
    # 1 - exp(-x) <= x and sum_{k > N} 1/(m 2^k) = (1/m) / 2^N
    return FcCertificate(
        A, window, lows,
        tail_scale=Fraction(1, tail.m),
        tail_lower=tail_enclosure(tail.m, depth).lo,
        valid=True,
        note="schedule tail",
    )


def verify_certificate(cert: FcCertificate) -> bool:
    """Re-evaluate every explicit factor exactly over the window."""
    for k, l in enumerate(cert.lower_bounds, start=1):
        if _window_min(cert.target.factor(k), cert.window) < l:
            return False
    return True


def fc_intersect(cA: FcCertificate, cB: FcCertificate) -> FcCertificate:
    """Certificate for ``A & B`` assembled from certificates of ``A`` and ``B``.

    Per coordinate, ``C = A_k & B_k`` loses at most what ``A_k`` and ``B_k``
    lose under g: ``2 nu(gC & C) >= 2 nu(C) - (2 nu(A_k) - l_A) - (2 nu(B_k) - l_B)``.
    """
    if cA.window != cB.window:
        raise ValueError("certificates over different windows")
    if len(cA.lower_bounds) != len(cB.lower_bounds):
        raise ValueError("certificates with different explicit depths")
    A, B = cA.target, cB.target
    C = product.rect_intersect(A, B)
    if not (cA.valid and cB.valid):
        return FcCertificate(C, cA.window, (), None, Fraction(0), False, note="input not certified")
    lows = []
    for k, (la, lb) in enumerate(zip(cA.lower_bounds, cB.lower_bounds), start=1):
        Ak, Bk = A.factor(k), B.factor(k)
        bound = (2 * nu_boolean("intersect", Ak, Bk)
                 - (2 * nu(Ak) - la) - (2 * nu(Bk) - lb))
        lows.append(max(Fraction(0), bound))
    scale = cA.tail_scale + cB.tail_scale
    N = len(lows)
    # Weierstrass: prod (1 - a_k) >= 1 - sum a_k
    tail_lower = max(Fraction(0), 1 - scale / 2 ** N)
    return FcCertificate(C, cA.window, tuple(lows), scale, tail_lower, True,
                         note="intersection of certified rectangles")


# --------------------------------------------------------------------------
# the rotation counterexample


@dataclass(frozen=True)
class RotationReport:
    theta: Fraction
    depth: int
    overlap: Fraction          # nu(theta A & A)
    factor: Fraction           # 2 nu(theta A & A)
    truncated: Fraction        # factor ** depth
    infinite: MeasureValue
    at_identity: MeasureValue

    def to_json(self) -> dict:
        return {
            "theta": format_rational(self.theta),
            "depth": self.depth,
            "overlap": format_rational(self.overlap),
            "factor": format_rational(self.factor),
            "truncated": format_rational(self.truncated),
            "infinite": self.infinite.to_json(),
            "at_identity": self.at_identity.to_json(),
        }


def rotation_counterexample(theta, A: base.ArcUnion, depth: int) -> RotationReport:
    """``mu(theta B & B)`` for ``B = A x A x ...`` on the circle.

    Any rotation that moves ``A`` makes the factor ``2 nu(theta A & A)`` drop
    below one, so the infinite product is 0 even for tiny ``theta``, while it
    is 1 at the identity: the coefficient is discontinuous at ``e``.
    """
    if not isinstance(A, base.ArcUnion):
        raise base.ModelMismatch("the counterexample lives on the circle")
    if nu(A) != Fraction(1, 2):
        raise ValueError(f"arc set must have measure exactly 1/2, got {nu(A)}")
    g = RotateBy(as_rational(theta))
    B = product.pure_tail(HalfTail(A))
    ov = nu_boolean("intersect", base.act(g, A), A)
    truncated, infinite = product.c0_eval(g, B, B, depth)
    _, at_identity = product.c0_eval(base.identity(base.CIRCLE), B, B, depth)
    return RotationReport(g.theta, depth, ov, 2 * ov, truncated, infinite, at_identity)


# --------------------------------------------------------------------------
# sigma-finite cover (discrete case)


@dataclass(frozen=True)
class CoverReport:
    pieces: Tuple[Rectangle, ...]
    labels: Tuple[Tuple[int, int], ...]    # (g, m) per piece
    measures: Tuple[Fraction, ...]

    def __len__(self) -> int:
        return len(self.pieces)


def sigma_finite_cover(schedule: WitnessSchedule, radius: int, m_max: int) -> CoverReport:
    """The translates ``g X_m`` for ``|g| <= radius`` and ``m <= m_max``."""
    if m_max > schedule.m_max:
        raise ValueError(f"schedule only covers m <= {schedule.m_max}")
    pieces, labels, measures = [], [], []
    for m in range(1, m_max + 1):
        X = witness_support(schedule, m)
        for d in range(-radius, radius + 1):
            gX = product.diag_act(ShiftBy(d), X)
            pieces.append(gX)
            labels.append((d, m))
            measures.append(product.rect_measure(gX))
    return CoverReport(tuple(pieces), tuple(labels), tuple(measures))


# --------------------------------------------------------------------------
# product sandwich


@dataclass(frozen=True)
class SandwichRow:
    N: int
    lower: Fraction     # prod x_k (1 - a_k)^2
    middle: Fraction    # prod (x_k - a_k)
    upper: Fraction     # prod x_k

    @property
    def holds(self) -> bool:
        return self.lower <= self.middle <= self.upper


def convergence_lemma_check(x: Sequence, a: Sequence, start: int = 1) -> List[SandwichRow]:
    """Check ``prod x(1-a)^2 <= prod (x - a) <= prod x`` over ``k = N..len``.

    Sequences are 1-indexed; from ``start`` on they must satisfy
    ``x_k > 2/3`` and ``0 <= a_k < 1/2``.
    """
    xs = [as_rational(v) for v in x]
    as_ = [as_rational(v) for v in a]
    if len(xs) != len(as_):
        raise ValueError("sequences of different lengths")
    two_thirds, half = Fraction(2, 3), Fraction(1, 2)
    for k in range(start, len(xs) + 1):
        if not xs[k - 1] > two_thirds:
            raise PreconditionViolation(f"x_k = {xs[k - 1]} is not > 2/3", k)
        if not 0 <= as_[k - 1] < half:
            raise PreconditionViolation(f"a_k = {as_[k - 1]} is not in [0, 1/2)", k)
    rows = []
    lower = middle = upper = Fraction(1)
    # accumulate from the far end so each N reuses the previous products
    for k in range(len(xs), start - 1, -1):
        xk, ak = xs[k - 1], as_[k - 1]
        lower *= xk * (1 - ak) ** 2
        middle *= xk - ak
        upper *= xk
        rows.append(SandwichRow(k, lower, middle, upper))
    rows.reverse()
    return rows
