"""Degree recursion, quartet-trade bookkeeping, and stable intersections.

The count of rational degree-d curves through 3d-1 general points obeys a
quadratic recursion; here it is checked against actual fibers.  Walking the
four-mark forgetful coordinate out two different rays trades one reducible
census for another, and `reducible_census` verifies a fiber realizes its
side of that trade entry by entry, multiplicity factorizations included.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Dict, List, Optional, Tuple

from .enumeration import (
    PI,
    FiberSolution,
    PointConfig,
    curve_multiplicity,
    decompose_reducible,
    fiber,
)
from .graph import MarkedAbstractCurve
from .moduli_maps import forget_points
from .plane import PlaneCurve, ZERO, cross, image_position, image_segments


class NonTransverse(RuntimeError):
    """The two curves meet in a way with no well-defined local crossing."""


class StructuralViolation(RuntimeError):
    """A fiber solution contradicts the reducible-census bookkeeping."""


@dataclass(frozen=True)
class NdTable:
    """counts[d] = number of rational degree-d curves through 3d-1 points."""

    counts: Tuple[int, ...]

    @property
    def d_max(self) -> int:
        return len(self.counts) - 1

    def __getitem__(self, d: int) -> int:
        if not 1 <= d <= self.d_max:
            raise KeyError(f"degree {d} outside table range 1..{self.d_max}")
        return self.counts[d]

    def items(self):
        return [(d, self.counts[d]) for d in range(1, len(self.counts))]


def recursion_nd(d_max: int) -> NdTable:
    """Table of curve counts for degrees 1..d_max via the quadratic recursion."""
    if d_max < 1:
        raise ValueError("d_max must be at least 1")
    n = [0] * (d_max + 1)
    n[1] = 1
    for d in range(2, d_max + 1):
        total = 0
        for d1 in range(1, d):
            d2 = d - d1
            total += (
                d1 * d1 * d2 * d2 * comb(3 * d - 4, 3 * d1 - 2)
                - d1**3 * d2 * comb(3 * d - 4, 3 * d1 - 1)
            ) * n[d1] * n[d2]
        n[d] = total
    return NdTable(tuple(n))


def wdvv_sides(d: int, nd: NdTable) -> Tuple[int, int]:
    """The two reducible-census totals whose equality is the recursion.

    Side A counts the fiber over a far point on ray A (irreducible term
    included), side B the fiber over ray B.  Both equal the common fiber
    degree of the combined map.
    """
    if d < 2:
        raise ValueError("the trade needs degree at least 2")
    lhs_a = nd[d]
    rhs_b = 0
    for d1 in range(1, d):
        d2 = d - d1
        nn = nd[d1] * nd[d2]
        lhs_a += d1**3 * d2 * comb(3 * d - 4, 3 * d1 - 1) * nn
        rhs_b += d1 * d1 * d2 * d2 * comb(3 * d - 4, 3 * d1 - 2) * nn
    return lhs_a, rhs_b


# ---------------------------------------------------------------------------
# stable intersection of two plane curves


def _collinear_overlap(p, u, lu, q, w, lw) -> None:
    """Raise if two collinear segments share more than nothing."""
    # parameters of the second segment measured in t-units of the first
    if u[0] != 0:
        t0 = Fraction(q[0] - p[0], u[0])
        lam = Fraction(w[0], u[0])
    else:
        t0 = Fraction(q[1] - p[1], u[1])
        lam = Fraction(w[1], u[1])
    t1 = None if lw is None else t0 + lam * lw
    if lam > 0:
        a2, b2 = t0, t1  # b2 None = +inf
    else:
        a2, b2 = t1, t0  # a2 None = -inf
    lo = Fraction(0) if a2 is None else max(Fraction(0), a2)
    if lu is None and b2 is None:
        hi = None
    elif lu is None:
        hi = b2
    elif b2 is None:
        hi = Fraction(lu)
    else:
        hi = min(Fraction(lu), b2)
    if hi is None or lo < hi:
        raise NonTransverse("curves share a segment")
    if lo == hi:
        raise NonTransverse("collinear pieces touch at a point")


def tropical_intersection(c1: PlaneCurve, c2: PlaneCurve):
    """Transverse crossings of two curves as [(point, multiplicity)].

    Each crossing contributes |det| of the two edge directions.  Any shared
    segment, endpoint contact, or crossing at a vertex of either curve
    raises NonTransverse.
    """
    hits: Dict[tuple, int] = {}
    segs2 = image_segments(c2)
    for p, u, lu in image_segments(c1):
        for q, w, lw in segs2:
            den = cross(u, w)
            dx = q[0] - p[0]
            dy = q[1] - p[1]
            if den == 0:
                if dx * u[1] - dy * u[0] == 0:
                    _collinear_overlap(p, u, lu, q, w, lw)
                continue
            t = Fraction(dx * w[1] - dy * w[0], den)
            s = Fraction(dx * u[1] - dy * u[0], den)
            if t < 0 or s < 0:
                continue
            if lu is not None and t > lu:
                continue
            if lw is not None and s > lw:
                continue
            if (
                t == 0
                or s == 0
                or (lu is not None and t == lu)
                or (lw is not None and s == lw)
            ):
                raise NonTransverse("crossing at a vertex of one of the curves")
            pt = (p[0] + t * u[0], p[1] + t * u[1])
            hits[pt] = hits.get(pt, 0) + abs(den)
    return sorted(hits.items())


# ---------------------------------------------------------------------------
# reducible census of a far-out fiber


_RAY_PARTNER = {"A": 1, "B": 2, "C": 3}  # mark sharing a side with mark 0


@dataclass(frozen=True)
class CensusEntry:
    case: str  # "a" or "b"
    mult: int
    solution: FiberSolution
    d1: int = 0
    d2: int = 0
    marks_on_first: Tuple[int, ...] = ()
    glue_point: Optional[Tuple[Fraction, Fraction]] = None
    factors: Tuple[int, ...] = ()  # (ev1, ev2, line1, line2, glue_det)


@dataclass(frozen=True)
class Census:
    d: int
    ray: str
    entries: Tuple[CensusEntry, ...]
    case_a_total: int
    b_totals: Tuple[Tuple[Tuple[int, int], int], ...]

    def total(self) -> int:
        return sum(e.mult for e in self.entries)

    def b_total_map(self) -> Dict[Tuple[int, int], int]:
        return dict(self.b_totals)


def _nonzero_dir_at(c: PlaneCurve, v: int):
    for f in c.graph.flags_at(v):
        if c.dirs[f] != ZERO:
            return c.dirs[f]
    raise StructuralViolation("expected a non-contracted edge at the vertex")


def _line_factor(c: PlaneCurve, mark_pos: int, axis: int) -> int:
    d = _nonzero_dir_at(c, c.mark_vertex(mark_pos))
    return abs(d[axis])


def _case_a_expected(c: PlaneCurve) -> int:
    # drop the first mark: its twin stays behind, pinned to the double point
    reordered = PlaneCurve(
        MarkedAbstractCurve(c.graph, c.marks[1:] + (c.marks[0],)),
        c.dirs,
        c.root,
        c.root_pos,
    )
    flattened = forget_points(reordered, len(c.marks) - 1)
    return curve_multiplicity(flattened)


def _census_case_b(s: FiberSolution, c: PlaneCurve, ray: str, d: int):
    g = c.graph
    edge = s.type.contracted_bounded_edges()[0]
    f1 = edge
    f2 = g.flag_partner[edge]
    side_verts = set()
    stack = [g.flag_vertex[f1]]
    while stack:
        u = stack.pop()
        if u in side_verts:
            continue
        side_verts.add(u)
        for f in g.flags_at(u):
            if f in (f1, f2):
                continue
            p = g.flag_partner[f]
            if p is not None:
                stack.append(g.flag_vertex[p])
    on_first = tuple(
        i for i in range(len(c.marks)) if g.flag_vertex[c.marks[i]] in side_verts
    )
    if 0 not in on_first:
        on_first = tuple(
            i for i in range(len(c.marks)) if i not in set(on_first)
        )

    partner = _RAY_PARTNER[ray]
    quartet_first = {0, partner}
    quartet_second = {1, 2, 3} - {partner}
    got_first = set(on_first) & {0, 1, 2, 3}
    if got_first != quartet_first:
        raise StructuralViolation(
            f"ray {ray} needs marks {sorted(quartet_first)} on the first side, "
            f"got {sorted(got_first)}"
        )
    if set(range(4)) - set(on_first) != quartet_second:
        raise StructuralViolation("quartet marks split wrongly across the sides")

    c1, c2 = decompose_reducible(c)
    d1 = len(c1.degree()) // 3
    d2 = len(c2.degree()) // 3
    if d1 + d2 != d:
        raise StructuralViolation("side degrees do not add up")
    extras = len([i for i in on_first if i >= 4])
    want = 3 * d1 - 1 if ray == "A" else 3 * d1 - 2
    if extras != want:
        raise StructuralViolation(
            f"first side should carry {want} point marks beyond the quartet, "
            f"has {extras}"
        )

    glue1 = image_position(c1, c1.mark_vertex(len(c1.marks) - 1))
    glue2 = image_position(c2, c2.mark_vertex(len(c2.marks) - 1))
    if glue1 != glue2:
        raise StructuralViolation("the two sides disagree on the glue point")

    ev1 = curve_multiplicity(c1)
    ev2 = curve_multiplicity(c2)
    # mark 0 is the lowest original mark on its side, so it sits first;
    # on the other side the same is true for the lowest of the rest
    line1 = _line_factor(c1, 0, 0)
    if ray == "A":
        line2 = _line_factor(c1, 1, 1)
    else:
        line2 = _line_factor(c2, 0, 1)
    u1 = _nonzero_dir_at(c1, c1.mark_vertex(len(c1.marks) - 1))
    u2 = _nonzero_dir_at(c2, c2.mark_vertex(len(c2.marks) - 1))
    glue_det = abs(cross(u1, u2))
    if glue_det == 0:
        raise StructuralViolation("sides glue along parallel directions")
    if s.mult != ev1 * ev2 * line1 * line2 * glue_det:
        raise StructuralViolation(
            f"multiplicity {s.mult} does not factor as "
            f"{ev1}*{ev2}*{line1}*{line2}*{glue_det}"
        )
    return CensusEntry(
        "b",
        s.mult,
        s,
        d1,
        d2,
        on_first,
        glue1,
        (ev1, ev2, line1, line2, glue_det),
    )


def reducible_census(d: int, cfg: PointConfig) -> Census:
    """Classify every solution of the far-out fiber and check the books.

    Every solution must have exactly one contracted bounded edge.  Case (a):
    the two line-constrained marks share a vertex; only ray A admits it, and
    the multiplicity must match the count through the resulting double
    point.  Case (b): the edge splits the curve into two components whose
    quartet marks, point-mark counts, and multiplicity factorization are
    all forced by the ray.  Totals must match the recursion terms.
    """
    if cfg.m4 is None or cfg.m4.ray not in _RAY_PARTNER:
        raise ValueError("census needs a configuration aimed along ray A, B, or C")
    ray = cfg.m4.ray
    sols = fiber(PI, d, cfg)
    nd = recursion_nd(d)

    entries: List[CensusEntry] = []
    for s in sols:
        if len(s.type.contracted_bounded_edges()) != 1:
            raise StructuralViolation(
                "a far-out solution must contract exactly one bounded edge"
            )
        c = s.curve()
        if c.mark_vertex(0) == c.mark_vertex(1):
            if ray != "A":
                raise StructuralViolation(
                    f"marks 1 and 2 collide on a ray-{ray} fiber"
                )
            expected = _case_a_expected(c)
            if s.mult != expected:
                raise StructuralViolation(
                    f"case-a multiplicity {s.mult} != double-point count {expected}"
                )
            entries.append(CensusEntry("a", s.mult, s))
        else:
            entries.append(_census_case_b(s, c, ray, d))

    case_a_total = sum(e.mult for e in entries if e.case == "a")
    expected_a = nd[d] if ray == "A" else 0
    if case_a_total != expected_a:
        raise StructuralViolation(
            f"case-a total {case_a_total}, recursion says {expected_a}"
        )

    per_set: Dict[tuple, int] = {}
    for e in entries:
        if e.case == "b":
            key = (e.d1, e.d2, e.marks_on_first)
            per_set[key] = per_set.get(key, 0) + e.mult
    b_totals: Dict[Tuple[int, int], int] = {}
    for (d1, d2, marks), tot in per_set.items():
        if ray == "A":
            want = d1**3 * d2 * nd[d1] * nd[d2]
        else:
            want = d1 * d1 * d2 * d2 * nd[d1] * nd[d2]
        if tot != want:
            raise StructuralViolation(
                f"split {(d1, d2)} with marks {marks} totals {tot}, expected {want}"
            )
        b_totals[(d1, d2)] = b_totals.get((d1, d2), 0) + tot
    for (d1, d2), tot in sorted(b_totals.items()):
        choose = (
            comb(3 * d - 4, 3 * d1 - 1) if ray == "A" else comb(3 * d - 4, 3 * d1 - 2)
        )
        coeff = d1**3 * d2 if ray == "A" else d1 * d1 * d2 * d2
        if tot != coeff * choose * nd[d1] * nd[d2]:
            raise StructuralViolation(
                f"split {(d1, d2)} grand total {tot} off the recursion term"
            )

    return Census(d, ray, tuple(entries), case_a_total, tuple(sorted(b_totals.items())))
