"""Combinatorial types and exact fibers of the evaluation-style maps.

The two fiber engines share one strategy: enumerate unmarked trivalent
image trees once per degree (cached), then insert contracted marked ends
edge-by-edge, pruning each partial placement with exact cone tests on the
input points before any linear algebra runs.  Everything is rational; a
degenerate input is reported as GeneralPositionViolation so the caller can
resample.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Tuple

from .graph import (
    AbstractType,
    Graph,
    MarkedAbstractCurve,
    fraction_str,
    parse_fraction,
    trivalent_trees_on_leaves,
)
from .linalg import Matrix, det, solve
from .moduli_maps import M4Point, ev_matrix, ft4_coordinate, multiplicity, pi_matrix
from .plane import (
    PlaneCurve,
    PlaneType,
    ZERO,
    canonical_plane_form,
    cross,
    derive_directions,
    image_position,
    vneg,
)

EV = "ev"
PI = "pi"

_DIRECTION_CLASSES = ((-1, 0), (0, -1), (1, 1))
_ATTEMPT_CAP = 20


class GeneralPositionViolation(RuntimeError):
    """The sampled input sits on a measure-zero locus; resample it."""


class InvarianceViolation(RuntimeError):
    """Fiber degrees that must agree did not."""


Point = Tuple[Fraction, Fraction]


@dataclass(frozen=True)
class PointConfig:
    """Input data for a fiber computation.

    For the evaluation map all points constrain fully.  For the combined
    map the first point contributes only its x-coordinate (a vertical
    line), the second only its y-coordinate, and m4 fixes the image of the
    four-mark forgetful coordinate.
    """

    points: Tuple[Point, ...]
    m4: Optional[M4Point] = None

    def __post_init__(self):
        pts = tuple(
            (Fraction(x), Fraction(y)) for x, y in self.points
        )
        object.__setattr__(self, "points", pts)

    @property
    def line_x(self) -> Fraction:
        return self.points[0][0]

    @property
    def line_y(self) -> Fraction:
        return self.points[1][1]

    def to_json(self) -> dict:
        data = {
            "points": [[fraction_str(x), fraction_str(y)] for x, y in self.points]
        }
        if self.m4 is not None:
            data["m4"] = {
                "ray": self.m4.ray,
                "length": fraction_str(self.m4.length),
            }
        return data

    @classmethod
    def from_json(cls, data: dict) -> "PointConfig":
        pts = tuple(
            (parse_fraction(x), parse_fraction(y)) for x, y in data["points"]
        )
        m4 = None
        if "m4" in data and data["m4"] is not None:
            m4 = M4Point(data["m4"]["ray"], parse_fraction(data["m4"]["length"]))
        return cls(pts, m4)


@dataclass(frozen=True)
class FiberSolution:
    """One curve in a fiber: its type, exact cell coordinates, multiplicity.

    coords = (root x, root y, bounded-edge lengths in ascending edge order),
    the same column order the cell matrices use with default arguments.
    """

    type: PlaneType
    coords: Tuple[Fraction, ...]
    mult: int

    def curve(self) -> PlaneCurve:
        edges = self.type.graph.bounded_edges()
        lengths = dict(zip(edges, self.coords[2:]))
        return self.type.with_lengths(lengths, 0, (self.coords[0], self.coords[1]))


# ---------------------------------------------------------------------------
# sampling


def _prime_list(count: int) -> Tuple[int, ...]:
    primes: List[int] = []
    k = 2
    while len(primes) < count:
        if all(k % p for p in primes):
            primes.append(k)
        k += 1
    return tuple(primes)


_PRIMES = _prime_list(64)


def _rng(seed: int, attempt: int, salt: int) -> random.Random:
    return random.Random((seed * 1_000_003 + attempt) * 65_537 + salt)


def sample_points(n: int, seed: int, attempt: int = 0) -> Tuple[Point, ...]:
    """n random rational points, one distinct prime denominator per coordinate."""
    rng = _rng(seed, attempt, 0)
    pts = []
    for i in range(n):
        coords = []
        for j in (0, 1):
            p = _PRIMES[(2 * i + j) % len(_PRIMES)]
            num = rng.randint(-(10**6), 10**6)
            while num == 0 or num % p == 0:
                num = rng.randint(-(10**6), 10**6)
            coords.append(Fraction(num, p))
        pts.append(tuple(coords))
    return tuple(pts)


def large_length(d: int, points) -> Fraction:
    """A forgetful-coordinate value beyond every bounded-fiber value.

    4 * (configuration diameter) * (largest direction entry over the
    degree-d image trees) + 1; the suite separately checks stability under
    doubling this.
    """
    diam = Fraction(0)
    for (ax, ay), (bx, by) in itertools.combinations(points, 2):
        diam = max(diam, abs(ax - bx) + abs(ay - by))
    m = max(
        abs(comp)
        for t in base_trees(d)
        for v in t.dirs
        for comp in v
    )
    return 4 * diam * m + 1


def ev_config(d: int, seed: int, attempt: int = 0) -> PointConfig:
    return PointConfig(sample_points(3 * d - 1, seed, attempt))


def pi_config(
    d: int, seed: int, ray: str, scale: int = 1, attempt: int = 0
) -> PointConfig:
    pts = sample_points(3 * d, seed, attempt)
    return PointConfig(pts, M4Point(ray, scale * large_length(d, pts)))


# ---------------------------------------------------------------------------
# combinatorial types


_BASE_TREES: Dict[int, Tuple[PlaneType, ...]] = {}


def _marked_type_stream(d: int, n: int) -> Iterator[PlaneType]:
    # Labeled-tree enumeration visits every leaf permutation, so one fixed
    # assignment of labels to marks and direction classes is complete.
    seen = set()
    for g, leaves in trivalent_trees_on_leaves(3 * d + n):
        marks = tuple(leaves[:n])
        end_dirs = {
            f: _DIRECTION_CLASSES[j // d] for j, f in enumerate(leaves[n:])
        }
        dirs = derive_directions(g, marks, end_dirs)
        t = PlaneType(AbstractType(g, marks), dirs)
        key = canonical_plane_form(t)
        if key in seen:
            continue
        seen.add(key)
        yield t


def base_trees(d: int) -> Tuple[PlaneType, ...]:
    """Unmarked trivalent image trees of projective degree d, one per class."""
    if d not in _BASE_TREES:
        _BASE_TREES[d] = tuple(_marked_type_stream(d, 0))
    return _BASE_TREES[d]


def enumerate_plane_types(d: int, n: int) -> Iterator[PlaneType]:
    """Every trivalent n-marked plane type of degree d, exactly once per class.

    Complete but exhaustive over labeled trees on 3d+n leaves; meant for
    small inputs and cross-checks.  The fiber engines below insert marks
    incrementally instead of consuming this stream.
    """
    if d < 1:
        raise ValueError("degree must be at least 1")
    if n < 0:
        raise ValueError("mark count must be nonnegative")
    if n == 0:
        yield from base_trees(d)
    else:
        yield from _marked_type_stream(d, n)


# ---------------------------------------------------------------------------
# strings and vertex multiplicities


def _graph_and_marks(c):
    return c.graph, c.marks


def find_string(c):
    """A leaf-to-leaf path avoiding the closed marked ends, or None.

    Removing the closures of the marked ends cuts the curve at every mark
    vertex; a surviving component with two unbounded ends yields the path.
    Returned as a flag tuple (end flag, bounded flags oriented along the
    walk, end flag).
    """
    g, marks = _graph_and_marks(c)
    mark_vertices = {g.flag_vertex[f] for f in marks}
    comp: Dict[int, int] = {}
    for v in range(g.num_vertices):
        if v in mark_vertices or v in comp:
            continue
        stack = [v]
        comp[v] = v
        while stack:
            u = stack.pop()
            for f in g.flags_at(u):
                p = g.flag_partner[f]
                if p is None:
                    continue
                w = g.flag_vertex[p]
                if w in mark_vertices or w in comp:
                    continue
                comp[w] = v
                stack.append(w)
    ends_by_comp: Dict[int, List[int]] = {}
    for f in g.end_flags():
        if f in marks:
            continue
        v = g.flag_vertex[f]
        if v in comp:
            ends_by_comp.setdefault(comp[v], []).append(f)
    for flags in ends_by_comp.values():
        if len(flags) >= 2:
            e1, e2 = flags[0], flags[1]
            walk = g.path_flags(g.flag_vertex[e1], g.flag_vertex[e2])
            return (e1,) + tuple(walk) + (e2,)
    return None


def curve_multiplicity(c) -> int:
    """Product of |det| over vertices away from all marks; 0 when a string exists."""
    if find_string(c) is not None:
        return 0
    g, marks = _graph_and_marks(c)
    mark_vertices = {g.flag_vertex[f] for f in marks}
    result = 1
    for v in range(g.num_vertices):
        if v in mark_vertices:
            continue
        f1, f2 = g.flags_at(v)[:2]
        result *= abs(cross(c.dirs[f1], c.dirs[f2]))
    return result


# ---------------------------------------------------------------------------
# exact cone tests

# A sector is None (whole plane) or a pair (lo, hi) of integer vectors with
# angular span at most a half turn; it stands for all positive combinations
# of the path directions between two host edges.


def _dot(u, v) -> int:
    return u[0] * v[0] + u[1] * v[1]


def _sector_has(sec, x) -> bool:
    if sec is None:
        return True
    lo, hi = sec
    c1 = cross(lo, x)
    c2 = cross(x, hi)
    if c1 < 0 or c2 < 0:
        return False
    return c1 > 0 or c2 > 0 or _dot(lo, x) > 0 or _dot(hi, x) > 0


def _sector(gens):
    gens = [g for g in gens if g != ZERO]
    lo = hi = gens[0]
    for g in gens[1:]:
        if _sector_has((lo, hi), g):
            continue
        cl = cross(lo, g)
        if (cl > 0 or (cl == 0 and _dot(lo, g) < 0)) and cross(hi, g) >= 0:
            hi = g
            continue
        ch = cross(g, hi)
        if (ch > 0 or (ch == 0 and _dot(g, hi) < 0)) and cross(g, lo) >= 0:
            lo = g
            continue
        return None
    return (lo, hi)


def _sector_reverse(sec):
    # point reflection keeps orientation: the negated cone runs -lo to -hi
    if sec is None:
        return None
    lo, hi = sec
    return (vneg(lo), vneg(hi))


def _sector_meets_vertical(sec, dx) -> bool:
    """Is any (dx, y) inside the sector?  Conservative on boundaries."""
    if sec is None:
        return True
    lo, hi = sec
    lower, upper = None, None
    # cross(lo, (dx, y)) >= 0  and  cross((dx, y), hi) >= 0
    for vx, vy, sign in ((lo[0], lo[1], 1), (hi[0], hi[1], -1)):
        # sign=+1: vx*y - vy*dx >= 0 ; sign=-1: vy*dx - vx*y >= 0
        coeff = sign * vx
        const = sign * vy * dx
        if coeff > 0:
            bound = Fraction(const, coeff)
            lower = bound if lower is None else max(lower, bound)
        elif coeff < 0:
            bound = Fraction(const, coeff)
            upper = bound if upper is None else min(upper, bound)
        elif const > 0:
            return False
    return lower is None or upper is None or lower <= upper


def _swap(v):
    return (v[1], v[0])


def _sector_meets_horizontal(sec, dy) -> bool:
    if sec is None:
        return True
    lo, hi = sec
    return _sector_meets_vertical((_swap(hi), _swap(lo)), dy)


# ---------------------------------------------------------------------------
# per-tree search structures


@dataclass
class _Comp:
    verts: frozenset
    ends: Tuple[int, ...]
    boundary: Tuple[Tuple[int, int], ...]  # (cut bounded edge, flag on this side)


@dataclass
class _TreeData:
    t: PlaneType
    contracted: Tuple[int, ...] = ()
    collinear: bool = False
    handles: Tuple[int, ...] = ()
    _sectors: Optional[dict] = field(default=None, repr=False)
    _cuts: Optional[dict] = field(default=None, repr=False)

    def __post_init__(self):
        g = self.t.graph
        dirs = self.t.dirs
        self.contracted = tuple(
            e for e in g.bounded_edges() if dirs[e] == ZERO
        )
        self.collinear = self._has_collinear_vertex()
        skip = set(self.contracted)
        self.handles = tuple(
            e for e in g.bounded_edges() if e not in skip
        ) + g.end_flags()

    def _has_collinear_vertex(self) -> bool:
        g = self.t.graph
        dirs = self.t.dirs
        for v in range(g.num_vertices):
            nz = [dirs[f] for f in g.flags_at(v) if dirs[f] != ZERO]
            if len(nz) >= 2 and all(cross(nz[0], w) == 0 for w in nz[1:]):
                return True
        return False

    def _endpoints(self, h):
        g = self.t.graph
        p = g.flag_partner[h]
        if p is None:
            return (g.flag_vertex[h],)
        return (g.flag_vertex[h], g.flag_vertex[p])

    def _host_flag_at(self, h, v):
        g = self.t.graph
        if g.flag_vertex[h] == v:
            return h
        return g.flag_partner[h]

    def _path_dirs(self, h1, h2):
        g = self.t.graph
        dirs = self.t.dirs
        sources = self._endpoints(h1)
        targets = set(self._endpoints(h2))
        parent = {v: None for v in sources}
        queue = list(sources)
        hit = None
        qi = 0
        while qi < len(queue):
            u = queue[qi]
            qi += 1
            if u in targets:
                hit = u
                break
            for f in g.flags_at(u):
                p = g.flag_partner[f]
                if p is None:
                    continue
                w = g.flag_vertex[p]
                if w not in parent:
                    parent[w] = (u, f)
                    queue.append(w)
        assert hit is not None
        walk = []
        u = hit
        while parent[u] is not None:
            prev, f = parent[u]
            walk.append(dirs[f])
            u = prev
        walk.reverse()
        first = vneg(dirs[self._host_flag_at(h1, u)])
        last = dirs[self._host_flag_at(h2, hit)]
        return [first] + walk + [last]

    def sectors(self) -> dict:
        if self._sectors is None:
            s = {}
            hs = self.handles
            for i, h1 in enumerate(hs):
                for h2 in hs[i + 1 :]:
                    sec = _sector(self._path_dirs(h1, h2))
                    s[(h1, h2)] = sec
                    s[(h2, h1)] = _sector_reverse(sec)
            self._sectors = s
        return self._sectors

    def cut_structures(self):
        """(B, components) for every cut set of bounded edges that leaves
        each component at least one unbounded end."""
        if self._cuts is None:
            g = self.t.graph
            bounded = g.bounded_edges()
            out = []
            for r in range(len(bounded) + 1):
                for B in itertools.combinations(bounded, r):
                    cut = set(B)
                    comp = list(range(g.num_vertices))

                    def find(x):
                        while comp[x] != x:
                            comp[x] = comp[comp[x]]
                            x = comp[x]
                        return x

                    for e in bounded:
                        if e in cut:
                            continue
                        a = g.flag_vertex[e]
                        b = g.flag_vertex[g.flag_partner[e]]
                        comp[find(a)] = find(b)
                    groups: Dict[int, List[int]] = {}
                    for v in range(g.num_vertices):
                        groups.setdefault(find(v), []).append(v)
                    ends: Dict[int, List[int]] = {k: [] for k in groups}
                    for f in g.end_flags():
                        ends[find(g.flag_vertex[f])].append(f)
                    if any(not es for es in ends.values()):
                        continue
                    boundary: Dict[int, List[Tuple[int, int]]] = {
                        k: [] for k in groups
                    }
                    for e in B:
                        p = g.flag_partner[e]
                        boundary[find(g.flag_vertex[e])].append((e, e))
                        boundary[find(g.flag_vertex[p])].append((e, p))
                    comps = tuple(
                        _Comp(
                            frozenset(groups[k]),
                            tuple(ends[k]),
                            tuple(boundary[k]),
                        )
                        for k in sorted(groups)
                    )
                    out.append((B, comps))
            self._cuts = out
        return self._cuts


_EV_TREES: Dict[int, List[_TreeData]] = {}
_PI_TREES: Dict[int, List[_TreeData]] = {}


def _ev_tree_data(d: int) -> List[_TreeData]:
    # A contracted bounded edge gives a zero column, a vertex with parallel
    # directions a zero vertex factor; either kills every ev determinant.
    if d not in _EV_TREES:
        _EV_TREES[d] = [
            td
            for td in (_TreeData(t) for t in base_trees(d))
            if not td.contracted and not td.collinear
        ]
    return _EV_TREES[d]


def _pi_tree_data(d: int) -> List[_TreeData]:
    # Two contracted bounded edges give two columns supported only on the
    # single forgetful row, hence determinant zero.
    if d not in _PI_TREES:
        _PI_TREES[d] = [
            td
            for td in (_TreeData(t) for t in base_trees(d))
            if len(td.contracted) <= 1
        ]
    return _PI_TREES[d]


# ---------------------------------------------------------------------------
# inserting marks into a tree


def _subdivide(tree: PlaneType, placements: dict, n: int):
    """Insert mark vertices (and at most one two-mark cluster) into edges.

    placements maps a host handle (bounded edge id, or end flag) to its
    ordered items, nearest the handle's own flag first; an item is
    ("mark", i) or ("cluster", (i, j)).  Returns the marked type plus, per
    host, the bounded piece edge ids in walk order.
    """
    g = tree.graph
    fv = list(g.flag_vertex)
    fp = list(g.flag_partner)
    dd = list(tree.dirs)
    marks: List[Optional[int]] = [None] * n
    piece_ids: Dict[int, List[int]] = {}

    def new_flag(v, partner, direction):
        fv.append(v)
        fp.append(partner)
        dd.append(direction)
        return len(fv) - 1

    nv = g.num_vertices
    for h in sorted(placements):
        items = placements[h]
        far = fp[h]
        d = dd[h]
        open_flag = h
        ids = []
        for item in items:
            w = nv
            nv += 1
            back = new_flag(w, open_flag, vneg(d))
            fp[open_flag] = back
            ids.append(min(open_flag, back))
            if item[0] == "mark":
                marks[item[1]] = new_flag(w, None, ZERO)
            else:
                cv = new_flag(w, None, ZERO)
                wv = nv
                nv += 1
                cw = new_flag(wv, cv, ZERO)
                fp[cv] = cw
                for mi in item[1]:
                    marks[mi] = new_flag(wv, None, ZERO)
            open_flag = new_flag(w, None, d)
        if far is None:
            pass  # tail stays unbounded
        else:
            fp[open_flag] = far
            fp[far] = open_flag
            ids.append(min(open_flag, far))
        piece_ids[h] = ids
    assert all(m is not None for m in marks)
    t = PlaneType(AbstractType(Graph(fv, fp), tuple(marks)), tuple(dd))
    return t, piece_ids


# ---------------------------------------------------------------------------
# evaluation-map fiber


def _comp_plan(td: _TreeData, comp: _Comp, kept_end: int):
    """Postorder solve plan for one component, rooted at its kept end."""
    g = td.t.graph
    cut_edges = {e for e, _ in comp.boundary}
    cut_ends = set(comp.ends) - {kept_end}
    plan = []

    def visit(u, entry_flag):
        branches = []
        for f in g.flags_at(u):
            if f == entry_flag:
                continue
            p = g.flag_partner[f]
            if p is None:
                assert f in cut_ends
                branches.append(("m", f, f, None))
            else:
                e = min(f, p)
                if e in cut_edges:
                    branches.append(("m", e, f, None))
                else:
                    w = g.flag_vertex[p]
                    visit(w, p)
                    branches.append(("c", w, p, e))
        assert len(branches) == 2
        plan.append((u, branches[0], branches[1]))

    visit(g.flag_vertex[kept_end], kept_end)
    return plan


def _run_plan(plan, dirs, assign, pts, pos, lens):
    """Solve one component bottom-up; returns written keys or None.

    Each vertex is the intersection of two lines anchored below it; both
    intersection parameters are lengths and must be positive.  An exact
    zero is a cell-boundary hit: the input is degenerate.
    """
    written = []

    def line(br):
        kind, a, f, e = br
        if kind == "m":
            q = pts[assign[a]]
            return q, vneg(dirs[f]), ("p", f)
        return pos[("v", a)], dirs[f], ("e", e)

    for u, b1, b2 in plan:
        q1, u1, k1 = line(b1)
        q2, u2, k2 = line(b2)
        den = cross(u1, u2)
        assert den != 0
        wx = q2[0] - q1[0]
        wy = q2[1] - q1[1]
        s1 = Fraction(wx * u2[1] - wy * u2[0], den)
        s2 = Fraction(wx * u1[1] - wy * u1[0], den)
        if s1 == 0 or s2 == 0:
            raise GeneralPositionViolation(
                "solution on a cell boundary (zero edge length)"
            )
        if s1 < 0 or s2 < 0:
            for key in written:
                del (pos if key[0] == "v" else lens)[key]
            return None
        pos[("v", u)] = (q1[0] + s1 * u1[0], q1[1] + s1 * u1[1])
        lens[k1] = s1
        lens[k2] = s2
        written.extend((k1, k2, ("v", u)))
    return written


def _emit_ev_solution(td, assign, pos, lens, found, n):
    g = td.t.graph
    placements = {h: [("mark", m)] for h, m in assign.items()}
    mt, piece_ids = _subdivide(td.t, placements, n)
    key = canonical_plane_form(mt)
    if key in found:
        return
    lengths = {}
    for k, v in lens.items():
        if k[0] == "e":
            lengths[k[1]] = v
    for h, ids in piece_ids.items():
        far = g.flag_partner[h]
        lengths[ids[0]] = lens[("p", h)]
        if far is not None:
            lengths[ids[1]] = lens[("p", far)]
    root_pos = pos[("v", 0)]
    curve = mt.with_lengths(lengths, 0, root_pos)
    mult = multiplicity(ev_matrix(mt))
    # the vertex-product route must agree with the determinant route
    assert mult == curve_multiplicity(curve) and mult > 0
    coords = (root_pos[0], root_pos[1]) + tuple(
        lengths[e] for e in mt.graph.bounded_edges()
    )
    found[key] = FiberSolution(mt, coords, mult)


def _ev_search_tree(td: _TreeData, pts, ipts, found, n):
    secs = td.sectors()
    for B, comps in td.cut_structures():
        for kept in itertools.product(*(c.ends for c in comps)):
            hosts_of = [
                tuple(e for e in c.ends if e != kept[i])
                + tuple(e for e, _ in c.boundary)
                for i, c in enumerate(comps)
            ]
            order = sorted(range(len(comps)), key=lambda i: (len(hosts_of[i]), i))
            host_seq: List[int] = []
            completes: Dict[int, List[int]] = {}
            seen = set()
            for ci in order:
                for h in hosts_of[ci]:
                    if h not in seen:
                        seen.add(h)
                        host_seq.append(h)
                completes.setdefault(len(host_seq) - 1, []).append(ci)
            assert len(host_seq) == n
            plans = {
                ci: _comp_plan(td, comps[ci], kept[ci]) for ci in range(len(comps))
            }
            assign: Dict[int, int] = {}
            placed: List[Tuple[int, int]] = []
            pos: dict = {}
            lens: dict = {}
            used = [False] * n

            def rec(k):
                if k == n:
                    _emit_ev_solution(td, assign, pos, lens, found, n)
                    return
                h = host_seq[k]
                for m in range(n):
                    if used[m]:
                        continue
                    im = ipts[m]
                    ok = True
                    for h2, m2 in placed:
                        i2 = ipts[m2]
                        if not _sector_has(
                            secs[(h2, h)], (im[0] - i2[0], im[1] - i2[1])
                        ):
                            ok = False
                            break
                    if not ok:
                        continue
                    assign[h] = m
                    placed.append((h, m))
                    used[m] = True
                    solved = []
                    feasible = True
                    for ci in completes.get(k, ()):
                        written = _run_plan(plans[ci], td.t.dirs, assign, pts, pos, lens)
                        if written is None:
                            feasible = False
                            break
                        solved.append(written)
                    if feasible:
                        rec(k + 1)
                    for written in solved:
                        for key in written:
                            del (pos if key[0] == "v" else lens)[key]
                    used[m] = False
                    placed.pop()
                    del assign[h]

            rec(0)


def _ev_fiber(d: int, cfg: PointConfig) -> List[FiberSolution]:
    n = 3 * d - 1
    if len(cfg.points) != n:
        raise ValueError(f"evaluation fiber at degree {d} needs {n} points")
    pts = cfg.points
    den = math.lcm(*(c.denominator for p in pts for c in p))
    ipts = [(int(x * den), int(y * den)) for x, y in pts]
    found: dict = {}
    for td in _ev_tree_data(d):
        _ev_search_tree(td, pts, ipts, found, n)
    return [found[k] for k in sorted(found, key=repr)]


# ---------------------------------------------------------------------------
# combined-map fiber


def _pi_leaf(td, occupancy, cfg, d, found):
    n = 3 * d
    placements = {h: list(items) for h, items in occupancy.items() if items}
    mt, _ = _subdivide(td.t, placements, n)
    ray, _row = ft4_coordinate(mt)
    if ray != cfg.m4.ray:
        return
    cm = pi_matrix(mt, d)
    rhs: List[Fraction] = [cfg.line_x, cfg.line_y]
    for p in cfg.points[2:]:
        rhs.extend(p)
    rhs.append(cfg.m4.length)
    res = solve(cm.matrix, rhs)
    if res.status == "inconsistent":
        return
    if res.status == "underdetermined":
        raise GeneralPositionViolation(
            "rank-deficient consistent system: input in special position"
        )
    xs = res.solution
    lens = xs[2:]
    if any(v < 0 for v in lens):
        return
    if any(v == 0 for v in lens):
        raise GeneralPositionViolation(
            "solution on a cell boundary (zero edge length)"
        )
    key = canonical_plane_form(mt)
    if key in found:
        return
    mult = multiplicity(cm)
    assert mult > 0
    found[key] = FiberSolution(mt, tuple(xs), mult)


def _pi_search_tree(td: _TreeData, cfg: PointConfig, d: int, ipts, found):
    n = 3 * d
    secs = td.sectors()
    hosts = td.handles
    g = td.t.graph
    dirs = td.t.dirs
    a_num = cfg.line_x
    b_num = cfg.line_y
    occupancy: Dict[int, list] = {h: [] for h in hosts}
    where: Dict[int, int] = {}
    insertion = list(range(2, n)) + [0, 1]

    def cut_marks(h):
        return [it[1] for it in occupancy[h] if it[0] == "mark"]

    def pair_ok_pinned(m, h):
        im = ipts[m]
        for m2, h2 in where.items():
            if m2 < 2:
                continue
            i2 = ipts[m2]
            delta = (im[0] - i2[0], im[1] - i2[1])
            if h2 == h:
                # both on one edge: displacement must ride the edge direction
                if cross(delta, dirs[h]) != 0:
                    return False
            elif not _sector_has(secs[(h2, h)], delta):
                return False
        return True

    def line_ok(m, h):
        # first mark sees a vertical line, second a horizontal one
        for m2, h2 in where.items():
            if m2 < 2:
                continue
            if h2 == h:
                dh = dirs[h]
                if m == 0 and dh[0] == 0 and a_num != cfg.points[m2][0]:
                    return False
                if m == 1 and dh[1] == 0 and b_num != cfg.points[m2][1]:
                    return False
                continue
            sec = secs[(h2, h)]
            if m == 0:
                dx = a_num - cfg.points[m2][0]
                if not _sector_meets_vertical(sec, dx):
                    return False
            else:
                dy = b_num - cfg.points[m2][1]
                if not _sector_meets_horizontal(sec, dy):
                    return False
        return True

    def quota_ok(h, m):
        cuts = cut_marks(h)
        if len(cuts) < 2:
            return True
        # a third cut on one edge survives only with both line-constrained
        # marks aboard
        return len(cuts) == 2 and {0, 1} <= set(cuts + [m])

    def rec(k):
        if k == len(insertion):
            _pi_leaf(td, occupancy, cfg, d, found)
            return
        m = insertion[k]
        for h in hosts:
            if not quota_ok(h, m):
                continue
            if m >= 2:
                if not pair_ok_pinned(m, h):
                    continue
            else:
                if not line_ok(m, h):
                    continue
            occ = occupancy[h]
            for slot in range(len(occ) + 1):
                occ.insert(slot, ("mark", m))
                where[m] = h
                rec(k + 1)
                occ.pop(slot)
                del where[m]
        if m == 1 and not td.contracted:
            # the two line-constrained marks may share one vertex hanging
            # off a host by a contracted edge
            h1 = where.get(0)
            if h1 is not None:
                occ = occupancy[h1]
                for slot, it in enumerate(occ):
                    if it == ("mark", 0):
                        occ[slot] = ("cluster", (0, 1))
                        where[1] = h1
                        rec(k + 1)
                        occ[slot] = ("mark", 0)
                        del where[1]
                        break

    rec(0)


def _pi_fiber(d: int, cfg: PointConfig) -> List[FiberSolution]:
    n = 3 * d
    if len(cfg.points) != n:
        raise ValueError(f"combined-map fiber at degree {d} needs {n} points")
    if cfg.m4 is None:
        raise ValueError("combined-map fiber needs an m4 target value")
    pts = cfg.points
    den = math.lcm(*(c.denominator for p in pts for c in p))
    ipts = [(int(x * den), int(y * den)) for x, y in pts]
    found: dict = {}
    for td in _pi_tree_data(d):
        _pi_search_tree(td, cfg, d, ipts, found)
    return [found[k] for k in sorted(found, key=repr)]


# ---------------------------------------------------------------------------
# public fiber interface


def fiber(map_kind: str, d: int, cfg: PointConfig) -> List[FiberSolution]:
    """All curves mapping to cfg, with multiplicities; raises
    GeneralPositionViolation when the input shows up degenerate."""
    kind = map_kind.lower()
    if kind == EV:
        return _ev_fiber(d, cfg)
    if kind == PI:
        return _pi_fiber(d, cfg)
    raise ValueError(f"unknown map kind: {map_kind!r}")


def degree(map_kind: str, d: int, cfg: PointConfig) -> int:
    return sum(s.mult for s in fiber(map_kind, d, cfg))


def sampled_fiber(
    map_kind: str, d: int, seed: int, ray: str = "A", scale: int = 1
):
    """Sample a configuration and compute its fiber, resampling on
    degeneracy up to the attempt cap.  Returns (cfg, solutions)."""
    kind = map_kind.lower()
    last = None
    for attempt in range(_ATTEMPT_CAP):
        cfg = (
            ev_config(d, seed, attempt)
            if kind == EV
            else pi_config(d, seed, ray, scale, attempt)
        )
        try:
            return cfg, fiber(kind, d, cfg)
        except GeneralPositionViolation as exc:
            last = exc
    raise GeneralPositionViolation(
        f"no general-position sample in {_ATTEMPT_CAP} attempts: {last}"
    )


def sampled_degree(map_kind: str, d: int, seed: int, ray: str = "A", scale: int = 1):
    cfg, sols = sampled_fiber(map_kind, d, seed, ray, scale)
    return sum(s.mult for s in sols), cfg


@dataclass(frozen=True)
class InvarianceReport:
    d: int
    trials: int
    degree: int
    checks: Tuple[Tuple[str, Fraction, int], ...]  # (ray, length, degree)


def invariance_check(d: int, trials: int, seed: int = 0) -> InvarianceReport:
    """Degrees of the combined map over rays A, B, C at two large lengths
    each, for `trials` random configurations; they must all agree."""
    if d < 2:
        raise ValueError("invariance needs degree at least 2")
    checks = []
    for t in range(trials):
        for ray in ("A", "B", "C"):
            for scale in (1, 2):
                deg, cfg = sampled_degree(PI, d, seed + t, ray, scale)
                checks.append((ray, cfg.m4.length, deg))
    degrees = {deg for _, _, deg in checks}
    if len(degrees) != 1:
        raise InvarianceViolation(
            f"fiber degree of the combined map varies across rays/lengths: {checks}"
        )
    return InvarianceReport(d, trials, degrees.pop(), tuple(checks))


# ---------------------------------------------------------------------------
# splitting reducible curves


def decompose_reducible(c: PlaneCurve, edge: Optional[int] = None):
    """Split a curve at its contracted bounded edge into two curves.

    Each side keeps its own marks (original order) and gains one new
    contracted end at the split point, appended as its last mark.  The
    side carrying the lowest original mark index comes first.
    """
    g = c.graph
    contracted = [
        e for e in g.bounded_edges() if c.dirs[e] == ZERO
    ]
    if edge is None:
        if len(contracted) != 1:
            raise ValueError(
                f"expected exactly one contracted bounded edge, found {len(contracted)}"
            )
        edge = contracted[0]
    else:
        if g.flag_partner[edge] is None:
            raise ValueError("split edge must be bounded")
        if c.dirs[edge] != ZERO:
            raise ValueError("split edge must be contracted")

    e1, e2 = g.edge_flags(edge)
    curves = []
    side_min_mark = []
    for start_flag, dropped in ((e1, e2), (e2, e1)):
        v0 = g.flag_vertex[start_flag]
        verts = {v0}
        stack = [v0]
        while stack:
            u = stack.pop()
            for f in g.flags_at(u):
                if f in (e1, e2):
                    continue
                p = g.flag_partner[f]
                if p is None:
                    continue
                w = g.flag_vertex[p]
                if w not in verts:
                    verts.add(w)
                    stack.append(w)

        vmap = {v: i for i, v in enumerate(sorted(verts))}
        kept = [
            f
            for f in range(g.num_flags())
            if g.flag_vertex[f] in verts and f != dropped
        ]
        fmap = {f: i for i, f in enumerate(kept)}
        fv = [vmap[g.flag_vertex[f]] for f in kept]
        fp = []
        for f in kept:
            p = g.flag_partner[f]
            fp.append(fmap[p] if p in fmap else None)
        dd = [c.dirs[f] for f in kept]

        lengths = {}
        for e in g.bounded_edges():
            if e == edge:
                continue
            f1, f2 = g.edge_flags(e)
            if g.flag_vertex[f1] in verts:
                lengths[min(fmap[f1], fmap[f2])] = g.lengths[e]
        if not lengths:
            raise ValueError("each side of the split needs a bounded edge")

        old_marks = [m for m in c.marks if g.flag_vertex[m] in verts]
        marks = tuple(fmap[m] for m in old_marks) + (fmap[start_flag],)
        if g.flag_vertex[c.root] in verts:
            root_v, root_pos = vmap[c.root], c.root_pos
        else:
            root_v = vmap[v0]
            root_pos = image_position(c, v0)
        side = PlaneCurve(
            MarkedAbstractCurve(Graph(fv, fp, lengths), marks),
            tuple(dd),
            root_v,
            root_pos,
        )
        curves.append(side)
        side_min_mark.append(
            min((c.marks.index(m) for m in old_marks), default=len(c.marks))
        )
    if side_min_mark[1] < side_min_mark[0]:
        curves.reverse()
    return curves[0], curves[1]
