"""Per-cell linear maps on moduli of marked plane curves.

Cells are indexed by combinatorial types; coordinates on a cell are the
root-vertex position plus one length per bounded edge.  Evaluation rows,
the four-mark forgetful coordinate, their stacked square map, and the
multiplicity |det| all live here, together with forgetting marks and
resolving a 4-valent vertex (wall crossing).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .graph import AbstractType, Graph, MarkedAbstractCurve
from .linalg import Matrix, det
from .plane import PlaneCurve, PlaneType, image_position, vadd, vneg

RAY_LABELS = ("A", "B", "C")

# quartet pairings by mark position: A = {1,2|3,4}, B = {1,3|2,4}, C = {1,4|2,3}
_PAIRINGS = (("A", (0, 1), (2, 3)), ("B", (0, 2), (1, 3)), ("C", (0, 3), (1, 2)))


@dataclass(frozen=True, order=True)
class M4Point:
    """Point of the 4-mark moduli fan: ray label and distance from the origin."""

    ray: str
    length: Fraction

    def __post_init__(self):
        object.__setattr__(self, "length", Fraction(self.length))
        if self.ray not in ("A", "B", "C", "D"):
            raise ValueError(f"unknown ray {self.ray!r}")
        if self.length < 0:
            raise ValueError("length must be nonnegative")
        if (self.ray == "D") != (self.length == 0):
            raise ValueError("ray D holds exactly the length-0 point")


@dataclass(frozen=True)
class CellCoordinates:
    """Coordinate order on a cell: root x, root y, then bounded-edge lengths."""

    root: int
    edges: tuple

    def __len__(self):
        return 2 + len(self.edges)

    def column_of(self, edge: int) -> int:
        return 2 + self.edges.index(edge)


def cell_coordinates(t, root: int = 0, edge_order=None) -> CellCoordinates:
    g = t.graph
    edges = tuple(edge_order) if edge_order is not None else g.bounded_edges()
    if sorted(edges) != sorted(g.bounded_edges()):
        raise ValueError("edge order must list exactly the bounded edges")
    if not (0 <= root < g.num_vertices):
        raise ValueError("root out of range")
    return CellCoordinates(root, edges)


@dataclass(frozen=True)
class CellMap:
    """Linear representative of a morphism on one cell, in chosen coordinates."""

    source: PlaneType
    coords: CellCoordinates
    matrix: Matrix
    target_dim: int
    m4_ray: str | None = None


def _ev_row(t: PlaneType, mark_index: int, coord: int, coords: CellCoordinates):
    g = t.graph
    if not (0 <= mark_index < len(t.marks)):
        raise ValueError(f"no mark with index {mark_index}")
    if coord not in (0, 1):
        raise ValueError("coordinate selector must be 0 or 1")
    row = [0] * len(coords)
    row[coord] = 1
    target = g.flag_vertex[t.marks[mark_index]]
    for f in g.path_flags(coords.root, target):
        row[coords.column_of(g.edge_of_flag(f))] += t.dirs[f][coord]
    return row


def ev_matrix(t: PlaneType, which=None, root: int = 0, edge_order=None) -> CellMap:
    """Evaluation rows for selected (mark index, coordinate) pairs.

    which defaults to all marks, both coordinates, in mark order.  Root
    columns are an identity block; a length column carries the direction
    component when its edge lies on the root-to-mark path.
    """
    coords = cell_coordinates(t, root, edge_order)
    if which is None:
        which = [(i, c) for i in range(len(t.marks)) for c in (0, 1)]
    rows = [_ev_row(t, i, c, coords) for i, c in which]
    return CellMap(t, coords, Matrix.from_rows(rows), len(rows), None)


def _median(g: Graph, a: int, b: int, c: int) -> int:
    common = (
        set(g.path_vertices(a, b))
        & set(g.path_vertices(a, c))
        & set(g.path_vertices(b, c))
    )
    (m,) = common
    return m


def _quartet(t):
    """Pairing of the first four marks plus the central-path endpoints."""
    g = t.graph
    vs = [g.flag_vertex[t.marks[i]] for i in range(4)]
    for ray, (i, j), (k, l) in _PAIRINGS:
        left = set(g.path_vertices(vs[i], vs[j]))
        right = set(g.path_vertices(vs[k], vs[l]))
        if not (left & right):
            u = _median(g, vs[i], vs[j], vs[k])
            w = _median(g, vs[k], vs[l], vs[i])
            return ray, u, w
    return "D", None, None


def ft4_coordinate(t: PlaneType, root: int = 0, edge_order=None):
    """(ray, row) of the forget-to-four-marks coordinate on this cell.

    The row has a 1 at each bounded edge of the central path between the
    quartet's two branch vertices; ray D (one-vertex quartet) gives the
    zero row.
    """
    if len(t.marks) < 4:
        raise ValueError("need at least 4 marks")
    coords = cell_coordinates(t, root, edge_order)
    row = [0] * len(coords)
    ray, u, w = _quartet(t)
    if ray != "D":
        g = t.graph
        for f in g.path_flags(u, w):
            row[coords.column_of(g.edge_of_flag(f))] = 1
    return ray, row


def m4_point(c: PlaneCurve) -> M4Point:
    """Image of a curve with >= 4 marks under forgetting down to four."""
    if len(c.marks) < 4:
        raise ValueError("need at least 4 marks")
    ray, u, w = _quartet(c)
    if ray == "D":
        return M4Point("D", 0)
    g = c.graph
    total = Fraction(0)
    for f in g.path_flags(u, w):
        total += g.lengths[g.edge_of_flag(f)]
    if total == 0:
        return M4Point("D", 0)
    return M4Point(ray, total)


def pi_matrix(t: PlaneType, d: int, root: int = 0, edge_order=None) -> CellMap:
    """First coordinate of mark 1, second of mark 2, both of the rest,
    then the ft4 row: square of size 2n-1 on 3-valent degree-d types."""
    n = len(t.marks)
    if n != 3 * d:
        raise ValueError(f"need n = 3d marks, got n={n}, d={d}")
    from .plane import projective_degree

    if t.degree() != tuple(sorted(projective_degree(d))):
        raise ValueError("type is not of projective degree d")
    coords = cell_coordinates(t, root, edge_order)
    rows = [_ev_row(t, 0, 0, coords), _ev_row(t, 1, 1, coords)]
    for i in range(2, n):
        rows.append(_ev_row(t, i, 0, coords))
        rows.append(_ev_row(t, i, 1, coords))
    ray, ft_row = ft4_coordinate(t, root, edge_order)
    rows.append(ft_row)
    return CellMap(t, coords, Matrix.from_rows(rows), 2 * n - 1, ray)


def multiplicity(cm: CellMap) -> int:
    if not cm.matrix.is_square():
        raise ValueError("multiplicity needs a square cell map")
    v = abs(det(cm.matrix))
    if v.denominator != 1:
        raise AssertionError("integer matrix produced a non-integer determinant")
    return int(v)


def forget_points(c: PlaneCurve, m: int) -> PlaneCurve:
    """Keep the first m marks; prune and straighten the rest away.

    Two-valent vertices left by a removed mark are straightened (their two
    edges merge, lengths adding); branches that carried only removed marks
    are pruned.  Image positions of everything that survives are unchanged.
    """
    if not (0 <= m <= len(c.marks)):
        raise ValueError("mark count out of range")
    if m == len(c.marks):
        return c
    g = c.graph
    nf = g.num_flags()
    alive = [True] * nf
    partner = list(g.flag_partner)
    vert = list(g.flag_vertex)
    dirs = list(c.dirs)
    elen = {}
    for e in g.bounded_edges():
        elen[frozenset((e, g.flag_partner[e]))] = g.lengths[e]
    for f in c.marks[m:]:
        alive[f] = False

    def live_flags(v):
        return [f for f in range(nf) if alive[f] and vert[f] == v]

    vertex_alive = [True] * g.num_vertices
    changed = True
    while changed:
        changed = False
        for v in range(g.num_vertices):
            if not vertex_alive[v]:
                continue
            fs = live_flags(v)
            if len(fs) == 1:
                (f,) = fs
                p = partner[f]
                if p is None:
                    raise ValueError("curve degenerates to a single end")
                alive[f] = alive[p] = False
                del elen[frozenset((f, p))]
                vertex_alive[v] = False
                changed = True
            elif len(fs) == 2:
                f1, f2 = fs
                p1, p2 = partner[f1], partner[f2]
                if p1 is None and p2 is None:
                    raise ValueError("curve degenerates to a single line")
                if p1 is None:
                    # merge the end f1 through the bounded edge (f2, p2)
                    vert[f1] = vert[p2]
                    alive[f2] = alive[p2] = False
                    del elen[frozenset((f2, p2))]
                elif p2 is None:
                    vert[f2] = vert[p1]
                    alive[f1] = alive[p1] = False
                    del elen[frozenset((f1, p1))]
                else:
                    l = elen.pop(frozenset((f1, p1))) + elen.pop(frozenset((f2, p2)))
                    elen[frozenset((p1, p2))] = l
                    partner[p1], partner[p2] = p2, p1
                    alive[f1] = alive[f2] = False
                vertex_alive[v] = False
                changed = True

    keep = [f for f in range(nf) if alive[f]]
    remap = {f: i for i, f in enumerate(keep)}
    vkeep = sorted({vert[f] for f in keep})
    vremap = {v: i for i, v in enumerate(vkeep)}
    fv = [vremap[vert[f]] for f in keep]
    fp = [None if partner[f] is None else remap[partner[f]] for f in keep]
    lengths = {}
    for pair, l in elen.items():
        a, b = pair
        lengths[min(remap[a], remap[b])] = l
    new_dirs = tuple(dirs[f] for f in keep)
    new_marks = tuple(remap[f] for f in c.marks[:m])
    graph = Graph(fv, fp, lengths)

    if c.root in vremap:
        root_old = c.root
    else:
        # nearest surviving vertex, breadth-first from the old root
        seen = {c.root}
        queue = [c.root]
        root_old = None
        while queue:
            v = queue.pop(0)
            if v in vremap:
                root_old = v
                break
            for f in g.flags_at(v):
                p = g.flag_partner[f]
                if p is not None and g.flag_vertex[p] not in seen:
                    seen.add(g.flag_vertex[p])
                    queue.append(g.flag_vertex[p])
        if root_old is None:
            raise AssertionError("no surviving vertex reachable from root")
    root_pos = image_position(c, root_old)
    return PlaneCurve(
        MarkedAbstractCurve(graph, new_marks), new_dirs, vremap[root_old], root_pos
    )


def contract_plane_edge(t: PlaneType, e: int) -> PlaneType:
    """Boundary type of the cell where bounded edge e shrinks to a point."""
    g = t.graph
    f1, f2 = g.edge_flags(e)
    keep = [f for f in range(g.num_flags()) if f not in (f1, f2)]
    remap = {f: i for i, f in enumerate(keep)}
    v_keep = min(g.flag_vertex[f1], g.flag_vertex[f2])
    v_drop = max(g.flag_vertex[f1], g.flag_vertex[f2])
    if v_keep == v_drop:
        raise ValueError("contracting a loop")
    fv = []
    fp = []
    for f in keep:
        v = g.flag_vertex[f]
        if v == v_drop:
            v = v_keep
        if v > v_drop:
            v -= 1
        fv.append(v)
        fp.append(None if g.flag_partner[f] is None else remap[g.flag_partner[f]])
    marks = tuple(remap[x] for x in t.marks)
    dirs = tuple(t.dirs[f] for f in keep)
    return PlaneType(AbstractType(Graph(fv, fp), marks), dirs)


def resolve_four_valent(t: PlaneType, v: int, pairing) -> tuple:
    """Split 4-valent vertex v, keeping the flags of `pairing` at v.

    All existing flag and edge ids are preserved; the new bounded edge gets
    the two fresh flags, its id being the first of them (largest edge id,
    so shared coordinate orders can list it last).  Returns (type, new edge).
    """
    g = t.graph
    at_v = g.flags_at(v)
    if len(at_v) != 4:
        raise ValueError("vertex is not 4-valent")
    stay = tuple(pairing)
    if len(stay) != 2 or any(f not in at_v for f in stay):
        raise ValueError("pairing must pick two flags at the vertex")
    move = [f for f in at_v if f not in stay]
    nf = g.num_flags()
    new_v = g.num_vertices
    fv = list(g.flag_vertex) + [v, new_v]
    fp = list(g.flag_partner) + [nf + 1, nf]
    for f in move:
        fv[f] = new_v
    stay_sum = vadd(t.dirs[stay[0]], t.dirs[stay[1]])
    dirs = list(t.dirs) + [vneg(stay_sum), stay_sum]
    marks = t.marks
    return PlaneType(AbstractType(Graph(fv, fp), marks), tuple(dirs)), nf


def four_valent_resolutions(t: PlaneType, v: int):
    """The three ways of splitting a 4-valent vertex, as (type, new edge)."""
    fs = t.graph.flags_at(v)
    return tuple(
        resolve_four_valent(t, v, (fs[0], fs[k])) for k in (1, 2, 3)
    )
