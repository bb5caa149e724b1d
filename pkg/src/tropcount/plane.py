"""Marked plane tropical curves: directions, balancing, degree, image.

A plane curve is an abstract marked curve plus an integer direction vector
per flag (opposite on the two flags of a bounded edge, zero on marked ends)
satisfying the balancing condition at every vertex, anchored to the plane
by a root vertex position.  On trees the internal directions are forced by
the end directions, so they are derived rather than free data.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .graph import (
    AbstractType,
    Graph,
    MarkedAbstractCurve,
    canonical_form,
    fraction_str,
    graph_from_json,
    graph_to_json,
    parse_fraction,
)

Direction = tuple  # (int, int)

ZERO = (0, 0)


def cross(u, v) -> int:
    """2x2 determinant det(u, v) of column vectors u, v."""
    return u[0] * v[1] - u[1] * v[0]


def vadd(u, v):
    return (u[0] + v[0], u[1] + v[1])


def vneg(u):
    return (-u[0], -u[1])


def projective_degree(d: int):
    """The degree-d multiset: (-1,0), (0,-1), (1,1) each d times."""
    if d < 1:
        raise ValueError("degree must be >= 1")
    return tuple([(-1, 0)] * d + [(0, -1)] * d + [(1, 1)] * d)


def _check_directions(graph: Graph, marks, dirs) -> None:
    if len(dirs) != graph.num_flags():
        raise ValueError("one direction per flag required")
    for f, p in enumerate(graph.flag_partner):
        fd = dirs[f]
        if not (isinstance(fd, tuple) and len(fd) == 2):
            raise ValueError("directions must be integer pairs")
        if not (isinstance(fd[0], int) and isinstance(fd[1], int)):
            raise ValueError("directions must be integer pairs")
        if p is not None and vadd(dirs[f], dirs[p]) != ZERO:
            raise ValueError(f"flags {f},{p} of a bounded edge must be opposite")
    for m in marks:
        if dirs[m] != ZERO:
            raise ValueError("marked ends must be contracted")
    for v in range(graph.num_vertices):
        total = (0, 0)
        for f in graph.flags_at(v):
            total = vadd(total, dirs[f])
        if total != ZERO:
            raise ValueError(f"balancing fails at vertex {v}")


@dataclass(frozen=True)
class PlaneType:
    """Combinatorial type of a plane curve: marked tree + directions."""

    abstract: AbstractType
    dirs: tuple

    def __post_init__(self):
        object.__setattr__(self, "dirs", tuple(tuple(d) for d in self.dirs))
        _check_directions(self.abstract.graph, self.abstract.marks, self.dirs)

    @property
    def graph(self) -> Graph:
        return self.abstract.graph

    @property
    def marks(self):
        return self.abstract.marks

    def codim(self) -> int:
        return self.abstract.codim()

    def degree(self):
        g = self.graph
        unmarked = [f for f in g.end_flags() if f not in self.marks]
        return tuple(sorted(self.dirs[f] for f in unmarked))

    def unmarked_ends(self):
        return tuple(f for f in self.graph.end_flags() if f not in self.marks)

    def contracted_bounded_edges(self):
        return tuple(e for e in self.graph.bounded_edges() if self.dirs[e] == ZERO)

    def with_lengths(self, lengths, root: int, root_pos) -> "PlaneCurve":
        g = self.graph
        curve = MarkedAbstractCurve(
            Graph(g.flag_vertex, g.flag_partner, lengths), self.marks
        )
        return PlaneCurve(curve, self.dirs, root, root_pos)


@dataclass(frozen=True)
class PlaneCurve:
    """Plane tropical curve: marked curve + directions + root position."""

    curve: MarkedAbstractCurve
    dirs: tuple
    root: int
    root_pos: tuple

    def __post_init__(self):
        object.__setattr__(self, "dirs", tuple(tuple(d) for d in self.dirs))
        object.__setattr__(
            self, "root_pos", (Fraction(self.root_pos[0]), Fraction(self.root_pos[1]))
        )
        g = self.curve.graph
        if not (0 <= self.root < g.num_vertices):
            raise ValueError("root out of range")
        _check_directions(g, self.curve.marks, self.dirs)

    @property
    def graph(self) -> Graph:
        return self.curve.graph

    @property
    def marks(self):
        return self.curve.marks

    def combinatorial_type(self) -> PlaneType:
        return PlaneType(self.curve.forget_lengths(), self.dirs)

    def degree(self):
        return self.combinatorial_type().degree()

    def mark_vertex(self, i: int) -> int:
        """Vertex of the i-th mark (0-based index into the mark order)."""
        return self.graph.flag_vertex[self.marks[i]]


def check_balancing(c) -> tuple:
    """(True, None) if balanced, else (False, first offending vertex)."""
    g = c.graph
    dirs = c.dirs
    for v in range(g.num_vertices):
        total = (0, 0)
        for f in g.flags_at(v):
            total = vadd(total, dirs[f])
        if total != ZERO:
            return False, v
    return True, None


def derive_directions(graph: Graph, marks, end_dirs: dict):
    """Directions for every flag of a tree from its end directions.

    end_dirs maps unmarked end flags to directions; marked ends get zero;
    bounded-edge directions are forced by balancing: the flag pointing into
    a side S carries minus the sum of end directions in S.
    """
    marks = set(marks)
    dirs = [None] * graph.num_flags()
    total = (0, 0)
    for f in graph.end_flags():
        if f in marks:
            dirs[f] = ZERO
        else:
            d = tuple(end_dirs[f])
            dirs[f] = d
            total = vadd(total, d)
    if total != ZERO:
        raise ValueError("end directions must sum to zero")

    # subtree end-sums below each downward flag, rooted at vertex 0
    def below(flag) -> tuple:
        # flag points from parent down into the subtree
        p = graph.flag_partner[flag]
        v = graph.flag_vertex[p]
        s = (0, 0)
        for f in graph.flags_at(v):
            if f == p:
                continue
            q = graph.flag_partner[f]
            if q is None:
                s = vadd(s, dirs[f])
            else:
                s = vadd(s, below(f))
        return s

    for e in graph.bounded_edges():
        f, p = graph.edge_flags(e)
        s = below(f)  # end-sum on the side of p's vertex
        dirs[f] = s
        dirs[p] = vneg(s)
    return tuple(dirs)


def image_position(c: PlaneCurve, v: int):
    """Image of vertex v: root position plus length-weighted path directions."""
    g = c.graph
    x, y = c.root_pos
    for f in g.path_flags(c.root, v):
        e = g.edge_of_flag(f)
        l = g.lengths[e]
        d = c.dirs[f]
        x += l * d[0]
        y += l * d[1]
    return (x, y)


def image_segments(c: PlaneCurve):
    """(start point, direction, length or None) per non-contracted edge.

    Contracted edges and marked ends emit nothing; unbounded ends have
    length None.
    """
    g = c.graph
    marks = set(c.marks)
    pos = {v: image_position(c, v) for v in range(g.num_vertices)}
    out = []
    for f in g.end_flags():
        if f in marks or c.dirs[f] == ZERO:
            continue
        out.append((pos[g.flag_vertex[f]], c.dirs[f], None))
    for e in g.bounded_edges():
        if c.dirs[e] == ZERO:
            continue
        out.append((pos[g.flag_vertex[e]], c.dirs[e], g.lengths[e]))
    return out


def cell_dimension_plane(t: PlaneType) -> int:
    """|Δ| - 1 + n - codim; always 2 + #bounded edges on the nose."""
    return len(t.unmarked_ends()) - 1 + len(t.marks) - t.codim()


def direction_classes(t: PlaneType):
    """Unmarked ends grouped by direction, in sorted direction order."""
    groups = {}
    for f in t.unmarked_ends():
        groups.setdefault(t.dirs[f], []).append(f)
    return tuple(tuple(groups[d]) for d in sorted(groups))


def canonical_plane_form(t: PlaneType):
    """Canonical key: isomorphism respecting marks and end directions."""
    return (t.degree(), canonical_form(t.abstract, direction_classes(t)))


def plane_curve_to_json(c: PlaneCurve) -> dict:
    return {
        "graph": graph_to_json(c.graph),
        "marks": list(c.marks),
        "directions": [list(d) for d in c.dirs],
        "root": c.root,
        "root_pos": [fraction_str(c.root_pos[0]), fraction_str(c.root_pos[1])],
    }


def plane_curve_from_json(data: dict) -> PlaneCurve:
    g = graph_from_json(data["graph"])
    curve = MarkedAbstractCurve(g, tuple(data["marks"]))
    dirs = tuple((int(a), int(b)) for a, b in data["directions"])
    root_pos = (
        parse_fraction(data["root_pos"][0]),
        parse_fraction(data["root_pos"][1]),
    )
    return PlaneCurve(curve, dirs, int(data["root"]), root_pos)
