from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from tropcount.graph import (
    AbstractType,
    Graph,
    MarkedAbstractCurve,
    canonical_form,
    cell_dimension_abstract,
    codim,
    contract_edge_type,
    enumerate_abstract_types,
    fraction_str,
    genus,
    graph_from_json,
    graph_to_json,
    parse_fraction,
    trivalent_trees_on_leaves,
)


def star3():
    return Graph([0, 0, 0], [None, None, None])


def two_vertex_path():
    # v0: ends 0,1 and bond 2; v1: bond 3 and ends 4,5
    return Graph([0, 0, 0, 1, 1, 1], [None, None, 3, 2, None, None])


def star4():
    return Graph([0, 0, 0, 0], [None, None, None, None])


def double_edge():
    return Graph([0, 0, 1, 1], [2, 3, 0, 1])


def relabel(g: Graph, marks, flag_perm, vertex_perm):
    """Apply a flag and vertex relabeling, the isomorphism used as oracle."""
    nf = g.num_flags()
    fv = [0] * nf
    fp = [None] * nf
    for f in range(nf):
        fv[flag_perm[f]] = vertex_perm[g.flag_vertex[f]]
        p = g.flag_partner[f]
        fp[flag_perm[f]] = None if p is None else flag_perm[p]
    return Graph(fv, fp), tuple(flag_perm[m] for m in marks)


def test_fraction_string_roundtrip():
    # serialized values always carry an explicit denominator
    assert fraction_str(Fraction(-7, 2)) == "-7/2"
    assert fraction_str(Fraction(3)) == "3/1"
    assert parse_fraction("-7/2") == Fraction(-7, 2)
    assert parse_fraction("5") == 5
    assert parse_fraction(fraction_str(Fraction(22, 4))) == Fraction(11, 2)


def test_genus_examples():
    assert star3().genus() == 0
    assert two_vertex_path().genus() == 0
    assert double_edge().genus() == 1


def test_genus_disconnected_rejected():
    g = Graph([0, 0, 1, 1], [1, 0, 3, 2])
    with pytest.raises(ValueError):
        genus(g)


def test_partner_must_be_involution():
    with pytest.raises(ValueError):
        Graph([0, 0, 0], [1, None, None])


def test_vertex_ids_must_be_contiguous():
    with pytest.raises(ValueError):
        Graph([0, 0, 2], [None, None, None])


def test_lengths_must_cover_bounded_edges():
    fv = [0, 0, 0, 1, 1, 1]
    fp = [None, None, 3, 2, None, None]
    with pytest.raises(ValueError):
        Graph(fv, fp, {})
    with pytest.raises(ValueError):
        Graph(fv, fp, {2: 1, 0: 1})
    with pytest.raises(ValueError):
        Graph(fv, fp, {2: 0})
    g = Graph(fv, fp, {2: Fraction(5, 3)})
    assert g.length(2) == Fraction(5, 3)


def test_path_flags_oriented_away_from_start():
    g = two_vertex_path()
    assert g.path_flags(0, 1) == (2,)
    assert g.path_flags(1, 0) == (3,)
    assert g.path_flags(0, 0) == ()


def test_marked_curve_requires_lengths_and_shape():
    g = two_vertex_path()
    with pytest.raises(ValueError):
        MarkedAbstractCurve(g, (0, 1, 4, 5))
    gl = Graph(g.flag_vertex, g.flag_partner, {2: 1})
    c = MarkedAbstractCurve(gl, (0, 1, 4, 5))
    assert c.forget_lengths().graph.lengths is None
    with pytest.raises(ValueError):
        AbstractType(gl, (0, 1, 4, 5))
    with pytest.raises(ValueError):
        MarkedAbstractCurve(gl, (0, 0, 4, 5))
    with pytest.raises(ValueError):
        MarkedAbstractCurve(gl, (0, 1, 2, 5))


def test_two_valent_vertices_rejected():
    # path of two bounded edges through a 2-valent middle vertex
    fv = [0, 0, 0, 1, 1, 2, 2, 2]
    fp = [None, None, 3, 2, 5, 4, None, None]
    with pytest.raises(ValueError):
        AbstractType(Graph(fv, fp), (0, 1, 6, 7))


def test_codim_examples():
    assert AbstractType(star3(), (0, 1, 2)).codim() == 0
    assert codim(AbstractType(star4(), (0, 1, 2, 3))) == 1
    five = Graph([0] * 5, [None] * 5)
    assert AbstractType(five, tuple(range(5))).codim() == 2


def test_cell_dimension_abstract():
    assert cell_dimension_abstract(AbstractType(star3(), (0, 1, 2)), 3) == 0
    g = two_vertex_path()
    caterpillar = AbstractType(g, (0, 1, 4, 5))
    assert cell_dimension_abstract(caterpillar, 4) == 1
    assert cell_dimension_abstract(AbstractType(star4(), (0, 1, 2, 3)), 4) == 0
    with pytest.raises(ValueError):
        cell_dimension_abstract(AbstractType(star3(), (0, 1, 2)), 2)
    with pytest.raises(ValueError):
        cell_dimension_abstract(caterpillar, 5)


def test_labeled_trivalent_tree_counts():
    # (2n-5)!! labeled trivalent trees on n leaves
    for n, expect in [(3, 1), (4, 3), (5, 15), (6, 105)]:
        assert sum(1 for _ in trivalent_trees_on_leaves(n)) == expect
    with pytest.raises(ValueError):
        next(trivalent_trees_on_leaves(2))


def test_trivalent_trees_are_trivalent_trees():
    for g, leaves in trivalent_trees_on_leaves(5):
        assert g.genus() == 0
        assert len(leaves) == 5
        assert all(g.valence(v) == 3 for v in range(g.num_vertices))
        assert set(leaves) == set(g.end_flags())


def test_enumerate_abstract_types_four_marks():
    types = list(enumerate_abstract_types(4))
    assert len(types) == 4
    trivalent = [t for t in types if t.codim() == 0]
    assert len(trivalent) == 3
    keys = {canonical_form(t) for t in types}
    assert len(keys) == 4


def test_enumerate_abstract_types_five_marks():
    # 15 trivalent + 10 one-bond splits + the 5-valent star
    types = list(enumerate_abstract_types(5))
    by_codim = {}
    for t in types:
        by_codim.setdefault(t.codim(), []).append(t)
    assert sorted(by_codim) == [0, 1, 2]
    assert len(by_codim[0]) == 15
    assert len(by_codim[1]) == 10
    assert len(by_codim[2]) == 1


def test_contract_edge_gives_expected_star():
    g = two_vertex_path()
    t = AbstractType(g, (0, 1, 4, 5))
    e = g.bounded_edges()[0]
    c = contract_edge_type(t, e)
    assert c.graph.num_vertices == 1
    assert c.codim() == 1
    star = AbstractType(star4(), (0, 1, 2, 3))
    assert canonical_form(c) == canonical_form(star)


@settings(max_examples=50, deadline=None)
@given(st.permutations(list(range(6))), st.permutations([0, 1]))
def test_canonical_form_relabel_invariant(fperm, vperm):
    g = two_vertex_path()
    marks = (0, 1, 4, 5)
    g2, marks2 = relabel(g, marks, fperm, vperm)
    t1 = AbstractType(g, marks)
    t2 = AbstractType(g2, marks2)
    assert canonical_form(t1) == canonical_form(t2)


def test_canonical_form_separates_mark_splits():
    g = two_vertex_path()
    ab_cd = AbstractType(g, (0, 1, 4, 5))
    ac_bd = AbstractType(g, (0, 4, 1, 5))
    assert canonical_form(ab_cd) != canonical_form(ac_bd)


def test_canonical_form_interchangeable_ends():
    # one mark at v0, unmarked ends P=1 (v0), Q=4 and R=5 (v1)
    g = two_vertex_path()
    t = AbstractType(g, (0,))
    # grouping P with either of v1's ends is the same by the v1 symmetry
    assert canonical_form(t, ((1, 4),)) == canonical_form(t, ((1, 5),))
    # grouping the two v1 ends instead changes which vertex holds the
    # singleton class, so the types differ
    assert canonical_form(t, ((1, 4),)) != canonical_form(t, ((4, 5),))


def test_canonical_form_detects_swapped_singleton_ends():
    g = two_vertex_path()
    t1 = AbstractType(g, (0,))
    t2 = AbstractType(g, (4,))
    assert canonical_form(t1) != canonical_form(t2)
    assert canonical_form(t1, ((1, 4), (5,))) != canonical_form(
        t2, ((1, 0), (5,))
    )


def test_graph_json_roundtrip():
    g = Graph(
        [0, 0, 0, 1, 1, 1],
        [None, None, 3, 2, None, None],
        {2: Fraction(7, 3)},
    )
    back = graph_from_json(graph_to_json(g))
    assert back == g
    bare = star3()
    assert graph_from_json(graph_to_json(bare)) == bare
