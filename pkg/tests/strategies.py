from fractions import Fraction

from hypothesis import strategies as st

from c0dyn.base import ArcUnion, CylinderUnion

COORDS = range(-2, 4)


@st.composite
def cylinders(draw, coords=COORDS, max_size=3):
    support = draw(st.lists(st.sampled_from(list(coords)), min_size=0, max_size=max_size, unique=True))
    support = tuple(sorted(support))
    clauses = draw(st.frozensets(st.integers(0, (1 << len(support)) - 1)))
    return CylinderUnion(support, clauses)


@st.composite
def arcs(draw, denominator=12):
    points = draw(st.lists(st.integers(0, denominator), min_size=0, max_size=6, unique=True))
    points.sort()
    pairs = [(Fraction(a, denominator), Fraction(b, denominator))
             for a, b in zip(points[::2], points[1::2])]
    return ArcUnion(tuple(pairs))
