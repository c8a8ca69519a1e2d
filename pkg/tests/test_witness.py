from fractions import Fraction

import pytest

from c0dyn import majority, product, witness
from c0dyn.base import ArcUnion, CompactWindow, CylinderUnion, ModelMismatch, RotateBy, ShiftBy
from c0dyn.product import HalfTail, Rectangle
from c0dyn.rigor import Exact, exp_neg_enclosure

X0 = CylinderUnion.from_assignments([{0: 1}])


def test_schedule_values(schedule):
    assert [schedule.n(k, 1) for k in range(1, 7)] == [1, 2, 6, 22, 84, 331]
    assert [schedule.n(k, 3) for k in range(1, 7)] == [12, 44, 168, 659, 2606, 10367]
    assert witness.verify_schedule(schedule) == []


def test_schedule_cells_are_admissible(schedule):
    for e in schedule.entries:
        assert majority.max_symdiff(e.n, e.m) == e.slack <= e.threshold
        # factor bound implies the exponential bound
        assert e.factor_lower >= e.enclosure.hi
        assert e.enclosure.width <= witness.default_width(e.k, e.m)


def test_schedule_round_trip(schedule):
    text = schedule.dumps()
    again = witness.WitnessSchedule.loads(text)
    assert again == schedule
    assert again.dumps() == text
    assert len(text.splitlines()) == 18


def test_tampered_schedule_is_caught(schedule):
    records = schedule.to_records()
    records[4]["n"] += 1
    failures = witness.verify_schedule(witness.WitnessSchedule.from_records(records))
    assert failures


def test_forced_slack():
    loose = witness.build_schedule(2, 1, slack_override=Fraction(1, 2))
    assert any("threshold exceeds" in f for f in witness.verify_schedule(loose))
    with pytest.raises(majority.SearchCapExceeded):
        witness.build_schedule(2, 1, slack_override=Fraction(1, 10 ** 6), cap=100)


def test_missing_cell(schedule):
    with pytest.raises(KeyError):
        schedule.n(7, 1)


@pytest.mark.parametrize("m", [1, 2, 3])
def test_coefficient_bounds(schedule, m):
    target = exp_neg_enclosure(Fraction(1, m), Fraction(1, 1024)).lo
    for d in range(-m, m + 1):
        previous_hi = None
        for D in range(1, 7):
            c = witness.coefficient(ShiftBy(d), m, D, schedule)
            assert target <= c.lo <= c.hi <= 1
            if previous_hi is not None:
                assert c.hi <= previous_hi
            previous_hi = c.hi


def test_coefficient_identity_and_window(schedule):
    assert witness.coefficient(ShiftBy(0), 2, 3, schedule) == Exact(1)
    with pytest.raises(witness.OutsideCertifiedWindow):
        witness.coefficient(ShiftBy(3), 2, 3, schedule)
    loose = witness.coefficient(ShiftBy(3), 2, 3, schedule, certified=False)
    assert loose.lo == 0 and loose.hi < 1
    with pytest.raises(ValueError):
        witness.coefficient(ShiftBy(1), 1, 7, schedule)
    with pytest.raises(ModelMismatch):
        witness.coefficient(RotateBy(Fraction(1, 2)), 1, 1, schedule)


def test_coefficient_upper_is_exact_factor_product(schedule):
    c = witness.coefficient(ShiftBy(1), 1, 2, schedule)
    expected = 2 * majority.overlap(1, 1) * 2 * majority.overlap(2, 1)
    assert c.hi == expected


def test_tail_enclosure():
    enc = witness.tail_enclosure(2, 6)
    assert enc.lo <= exp_neg_enclosure(Fraction(1, 128), Fraction(1, 2 ** 60)).hi
    assert enc.hi >= exp_neg_enclosure(Fraction(1, 128), Fraction(1, 2 ** 60)).lo


def test_fc_refutes_constant_tail():
    cert = witness.fc_check(product.pure_tail(HalfTail(X0)), CompactWindow(1))
    assert not cert.valid and cert.refutation_index == 1
    with pytest.raises(ValueError):
        cert.epsilon(1)
    head = Rectangle((CylinderUnion.from_assignments([{1: 1}]),), HalfTail(X0))
    assert witness.fc_check(head, CompactWindow(1)).refutation_index == 2


def test_fc_trivial_window_certifies_constant_tail():
    cert = witness.fc_check(product.pure_tail(HalfTail(X0)), CompactWindow(0))
    assert cert.valid and cert.product_lower == 1


@pytest.mark.parametrize("m", [1, 2, 3])
def test_fc_certifies_witness_support(schedule, m):
    cert = witness.fc_check(witness.witness_support(schedule, m), CompactWindow(m))
    assert cert.valid and witness.verify_certificate(cert)
    eps = [cert.epsilon(N) for N in range(1, 8)]
    assert all(a >= b for a, b in zip(eps, eps[1:]))
    assert cert.product_lower >= exp_neg_enclosure(Fraction(1, m), Fraction(1, 1024)).lo


def test_fc_window_too_wide(schedule):
    cert = witness.fc_check(witness.witness_support(schedule, 1), CompactWindow(2))
    assert not cert.valid


def test_fc_intersection(schedule):
    tail = witness.witness_support(schedule, 1).tail
    A = Rectangle((CylinderUnion.from_assignments([{0: 1}, {1: 1}]),), tail)
    B = Rectangle((CylinderUnion.from_assignments([{1: 1}, {2: 1}]),), tail)
    cC = witness.fc_intersect(witness.fc_check(A, CompactWindow(1)), witness.fc_check(B, CompactWindow(1)))
    assert cC.valid and witness.verify_certificate(cC)
    assert cC.tail_scale == 2


def test_verify_certificate_rejects_inflated_bound(schedule):
    cert = witness.fc_check(witness.witness_support(schedule, 1), CompactWindow(1))
    bumped = witness.FcCertificate(cert.target, cert.window, (Fraction(1),) + cert.lower_bounds[1:],
                                   cert.tail_scale, cert.tail_lower, True)
    assert not witness.verify_certificate(bumped)


def test_rotation():
    A = ArcUnion(((Fraction(0), Fraction(1, 2)),))
    rep = witness.rotation_counterexample(Fraction(1, 3), A, 6)
    assert rep.overlap == Fraction(1, 6) and rep.truncated == Fraction(1, 729)
    assert rep.infinite == Exact(0) and rep.at_identity == Exact(1)
    tiny = witness.rotation_counterexample(Fraction(1, 10 ** 9), A, 3)
    assert tiny.infinite == Exact(0)
    assert rep.to_json()["overlap"] == "1/6"
    with pytest.raises(ValueError):
        witness.rotation_counterexample(Fraction(1, 3), ArcUnion(((Fraction(0), Fraction(1, 3)),)), 2)


def test_cover(schedule):
    cover = witness.sigma_finite_cover(schedule, 2, 3)
    assert len(cover) == 15
    assert all(m == 1 for m in cover.measures)
    assert cover.labels[0] == (-2, 1)
    with pytest.raises(ValueError):
        witness.sigma_finite_cover(schedule, 1, 4)


def test_sandwich():
    x = [Fraction(9, 10)] * 5
    a = [Fraction(1, 2 ** k) for k in range(2, 7)]
    rows = witness.convergence_lemma_check(x, a)
    assert [r.N for r in rows] == [1, 2, 3, 4, 5]
    assert all(r.holds for r in rows)
    assert rows[-1].middle == Fraction(9, 10) - Fraction(1, 64)


def test_sandwich_preconditions():
    with pytest.raises(witness.PreconditionViolation) as info:
        witness.convergence_lemma_check([Fraction(9, 10), Fraction(1, 2)], [0, 0])
    assert info.value.index == 2
    with pytest.raises(witness.PreconditionViolation):
        witness.convergence_lemma_check([Fraction(9, 10)], [Fraction(1, 2)])
