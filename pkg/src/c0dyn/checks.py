"""Self-checks run by ``c0dyn report``.

Each check compares a computed quantity against an independent route
(exhaustive enumeration, a closed form, or a different conditioning) and
returns a :class:`CheckResult`.  Randomized checks take an explicit seed so
reports are reproducible byte for byte.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Callable, List, Sequence

from . import base, majority, product, witness
from .base import ArcUnion, CompactWindow, CylinderUnion, MajoritySet, ShiftBy, nu
from .product import HalfTail, Rectangle
from .rigor import Exact, exp_neg_enclosure


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


# --------------------------------------------------------------------------
# brute-force oracles


def enumerate_overlap(n: int, d: int) -> Fraction:
    """``nu(d A_n & A_n)`` by listing every configuration of the relevant bits."""
    d = abs(d)
    width = 2 * n + 1
    span = width + min(d, width)
    hits = 0
    for bits in range(1 << span):
        first = sum((bits >> i) & 1 for i in range(width))
        if d >= width:
            second = sum((bits >> i) & 1 for i in range(width, 2 * width))
        else:
            second = sum((bits >> i) & 1 for i in range(d, d + width))
        if first >= n + 1 and second >= n + 1:
            hits += 1
    return Fraction(hits, 1 << span)


def enumerate_nu(E: CylinderUnion, coords: Sequence[int]) -> Fraction:
    """Probability of a cylinder union by listing all bits on ``coords``."""
    coords = list(coords)
    hits = 0
    for bits in range(1 << len(coords)):
        point = {k: (bits >> i) & 1 for i, k in enumerate(coords)}
        if any(all(point[k] == v for k, v in a.items()) for a in E.assignments()):
            hits += 1
    return Fraction(hits, 1 << len(coords))


def enumerate_mu(rects: Sequence[Rectangle], depth: int) -> Fraction:
    """``mu`` of a union of half-tail Bernoulli rectangles by atom enumeration.

    Coordinates ``1..depth`` are independent copies of the base space; each
    is cut into atoms (all bit patterns on the union of the supports used at
    that coordinate).  Coordinates past ``depth`` must carry the shared tail
    set in every rectangle and contribute a factor ``2 * 1/2 = 1``.
    """
    supports = []
    for k in range(1, depth + 1):
        coords = sorted({c for R in rects for c in R.factor(k).support})
        supports.append(coords)
    total = Fraction(0)
    per_coord = [list(range(1 << len(s))) for s in supports]
    for atoms in itertools.product(*per_coord):
        inside = False
        for R in rects:
            ok = True
            for k, (coords, atom) in enumerate(zip(supports, atoms), start=1):
                F = R.factor(k)
                point = {c: (atom >> i) & 1 for i, c in enumerate(coords)}
                if not any(all(point[c] == v for c, v in a.items()) for a in F.assignments()):
                    ok = False
                    break
            if ok:
                inside = True
                break
        if inside:
            weight = Fraction(1)
            for coords in supports:
                weight *= Fraction(2, 1 << len(coords))
            total += weight
    return total


# --------------------------------------------------------------------------
# random instances


def random_cylinder(rng: random.Random, coords: Sequence[int], *, nonempty: bool = False) -> CylinderUnion:
    coords = list(coords)
    while True:
        size = rng.randint(1, len(coords))
        support = sorted(rng.sample(coords, size))
        clauses = frozenset(c for c in range(1 << size) if rng.random() < 0.5)
        E = CylinderUnion(tuple(support), clauses)
        if not nonempty or not E.is_empty():
            return E


def random_rectangle(rng: random.Random, tail: HalfTail, depth: int, coords=(0, 1, 2), *, positive=False) -> Rectangle:
    h = rng.randint(0, depth)
    head = tuple(random_cylinder(rng, coords, nonempty=positive) for _ in range(h))
    return Rectangle(head, tail)


# --------------------------------------------------------------------------
# checks


def check_overlap_oracle(n_max: int = 3, d_max: int = 4) -> CheckResult:
    bad = [
        (n, d) for n in range(1, n_max + 1) for d in range(d_max + 1)
        if majority.overlap(n, d) != enumerate_overlap(n, d)
    ]
    return CheckResult("overlap_vs_enumeration", not bad, f"mismatches: {bad}" if bad else
                       f"n<={n_max}, d<={d_max}")


def check_majority_closed_forms(n_max: int = 8) -> CheckResult:
    bad = []
    for n in range(1, n_max + 1):
        if nu(MajoritySet(n)) != Fraction(1, 2):
            bad.append(f"nu(A_{n})")
        if majority.symdiff_shift(n, 1) != Fraction(comb(2 * n, n), 2 ** (2 * n + 1)):
            bad.append(f"symdiff({n},1)")
    return CheckResult("majority_closed_forms", not bad, ", ".join(bad) or f"n=1..{n_max}")


def check_strong_mixing(seed: int, pairs: int = 100) -> CheckResult:
    rng = random.Random(seed)
    bad = []
    for i in range(pairs):
        A = random_cylinder(rng, range(0, 4), nonempty=True)
        B = random_cylinder(rng, range(0, 4), nonempty=True)
        r = base.mixing_threshold(A, B)
        target = nu(A) * nu(B)
        for d in range(r, r + 4):
            for s in (d, -d):
                if base.nu_boolean("intersect", base.act(ShiftBy(s), A), B) != target:
                    bad.append(i)
    return CheckResult("strong_mixing", not bad, f"failing pairs {sorted(set(bad))}" if bad
                       else f"{pairs} pairs exact beyond threshold")


def check_conditional_well_defined(seed: int, triples: int = 100, depth: int = 6) -> CheckResult:
    rng = random.Random(seed)
    tail = HalfTail(CylinderUnion.from_assignments([{0: 1}]))
    bad = 0
    for _ in range(triples):
        B = random_rectangle(rng, tail, depth, positive=True)
        C = random_rectangle(rng, tail, depth, positive=True)
        R = random_rectangle(rng, tail, depth)
        A = product.ring_normalize(product.Inter(product.Inter(B, C), R))
        if product.p_cond(B, A) * product.rect_measure(B) != product.p_cond(C, A) * product.rect_measure(C):
            bad += 1
    return CheckResult("conditional_well_defined", bad == 0, f"{bad} of {triples} failed")


def check_ring_suite(seed: int, trials: int = 40) -> CheckResult:
    rng = random.Random(seed)
    tail = HalfTail(CylinderUnion.from_assignments([{0: 1}]))
    problems = []
    for t in range(trials):
        A = random_rectangle(rng, tail, 3, coords=(0, 1))
        B = random_rectangle(rng, tail, 3, coords=(0, 1))
        union = product.ring_normalize(product.Union_(A, B))
        inter = product.ring_normalize(product.Inter(A, B))
        diff = product.ring_normalize(product.Diff(A, B))
        if not (union.verify() and diff.verify()):
            problems.append(f"{t}: certificates")
        incl_excl = product.mu(A) + product.mu(B) - product.mu(inter)
        if product.mu(union) != incl_excl or product.mu(union) != enumerate_mu([A, B], 3):
            problems.append(f"{t}: inclusion-exclusion")
        if product.mu(diff) + product.mu(inter) != product.mu(A):
            problems.append(f"{t}: additivity")
        bound = product.bounding_rectangle(diff.pieces, tail)
        if not all(product.rect_contains(bound, P) for P in diff.pieces):
            problems.append(f"{t}: bounding rectangle")
        g = ShiftBy(rng.randint(-5, 5))
        if product.mu(product.diag_act(g, union)) != product.mu(union):
            problems.append(f"{t}: invariance")
    return CheckResult("ring_suite", not problems, "; ".join(problems) or f"{trials} trials")


def check_c0_decay(depth: int = 20) -> CheckResult:
    T = CylinderUnion.from_assignments([{0: 1}])
    X = product.pure_tail(HalfTail(T))
    floor = Fraction(1, 2 ** depth)
    problems = []
    r = base.mixing_threshold(T, T)
    for d in range(r, r + 5):
        for s in (d, -d):
            truncated, infinite = product.c0_eval(ShiftBy(s), X, X, depth)
            if truncated != floor or infinite != Exact(0):
                problems.append(f"g={s}")
    window = product.c0_threshold(X, X, floor, depth)
    scan_ok = all(
        product.c0_eval(ShiftBy(s), X, X, depth)[0] <= floor
        for s in range(-(window.radius + 30), window.radius + 31) if abs(s) >= window.radius
    )
    if not scan_ok:
        problems.append("threshold window not certified")
    return CheckResult("c0_decay", not problems, "; ".join(problems) or
                       f"depth {depth}, window radius {window.radius}")


def check_witness_bound(schedule: witness.WitnessSchedule) -> CheckResult:
    problems = []
    for m in range(1, schedule.m_max + 1):
        target = exp_neg_enclosure(Fraction(1, m), Fraction(1, 1024)).lo
        for d in range(-m, m + 1):
            for D in range(1, schedule.k_max + 1):
                c = witness.coefficient(ShiftBy(d), m, D, schedule)
                if c.lo < target:
                    problems.append(f"m={m} g={d} D={D}")
    return CheckResult("witness_bound", not problems, "; ".join(problems) or
                       f"K={schedule.k_max}, M={schedule.m_max}")


def check_schedule(schedule: witness.WitnessSchedule) -> CheckResult:
    failures = witness.verify_schedule(schedule)
    return CheckResult("schedule_certificates", not failures, "; ".join(failures) or
                       f"{len(schedule.entries)} cells")


def check_non_sigma_finite(N: int) -> CheckResult:
    A = CylinderUnion.from_assignments([{0: 1}])
    family = product.disjoint_family(N, A)
    ok = (
        len(family) == 2 ** N
        and all(product.rect_measure(P) == 1 for P in family.pieces)
        and family.verify()
        and product.mu(family) == 2 ** N
    )
    return CheckResult("non_sigma_finite", ok, f"{len(family)} rectangles, total measure {product.mu(family)}")


def check_rotation() -> CheckResult:
    A = ArcUnion(((Fraction(0), Fraction(1, 2)),))
    rep = witness.rotation_counterexample(Fraction(1, 3), A, 10)
    ok = (
        rep.overlap == Fraction(1, 6)
        and rep.truncated == Fraction(1, 3) ** 10
        and rep.infinite == Exact(0)
        and rep.at_identity == Exact(1)
    )
    return CheckResult("rotation_counterexample", ok, f"nu(theta A & A) = {rep.overlap}")


def check_convergence_and_closure(schedule: witness.WitnessSchedule) -> CheckResult:
    problems = []
    x = [1 - Fraction(1, 4 ** k) for k in range(1, 13)]
    a = [Fraction(1, 4 ** k) for k in range(1, 13)]
    if not all(row.holds for row in witness.convergence_lemma_check(x, a)):
        problems.append("sandwich")

    T = CylinderUnion.from_assignments([{0: 1}])
    refuted = witness.fc_check(product.pure_tail(HalfTail(T)), CompactWindow(1))
    if refuted.valid or refuted.refutation_index != 1:
        problems.append("constant rectangle not refuted")

    m = schedule.m_max
    X = witness.witness_support(schedule, m)
    cert = witness.fc_check(X, CompactWindow(m))
    target = exp_neg_enclosure(Fraction(1, m), Fraction(1, 1024)).lo
    if not (cert.valid and witness.verify_certificate(cert) and cert.product_lower >= target):
        problems.append("X_m not certified")

    # intersection of two schedule rectangles with explicit cylinder heads
    tail = X.tail
    K = schedule.k_max
    heads = [
        (CylinderUnion.from_assignments([{0: 1}, {1: 1}]), base.full_set(base.BERNOULLI)),
        (CylinderUnion.from_assignments([{0: 1}, {2: 0}]), CylinderUnion.from_assignments([{0: 0}, {0: 1, 1: 1}])),
    ]
    A = Rectangle(heads[0], tail)
    B = Rectangle(heads[1], tail)
    cA = witness.fc_check(A, CompactWindow(m), depth=K)
    cB = witness.fc_check(B, CompactWindow(m), depth=K)
    cC = witness.fc_intersect(cA, cB)
    if not (cC.valid and witness.verify_certificate(cC)):
        problems.append("intersection closure")
    return CheckResult("convergence_and_closure", not problems, "; ".join(problems) or "ok")


def run_all(schedule: witness.WitnessSchedule, *, seed: int, family_n: int, depth: int) -> List[CheckResult]:
    """Every check, with exceptions turned into failures."""
    jobs: List[Callable[[], CheckResult]] = [
        check_overlap_oracle,
        check_majority_closed_forms,
        lambda: check_strong_mixing(seed),
        lambda: check_conditional_well_defined(seed),
        lambda: check_ring_suite(seed),
        lambda: check_c0_decay(depth),
        lambda: check_witness_bound(schedule),
        lambda: check_schedule(schedule),
        lambda: check_non_sigma_finite(family_n),
        check_rotation,
        lambda: check_convergence_and_closure(schedule),
    ]
    results = []
    for job in jobs:
        try:
            results.append(job())
        except Exception as exc:  # noqa: BLE001 - a crashing check is a failing check
            name = getattr(job, "__name__", "check")
            results.append(CheckResult(name, False, f"{type(exc).__name__}: {exc}"))
    return results
