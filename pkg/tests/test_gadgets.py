import pytest

from oracles import all_graph_edge_sets, graph_masks, mis_profile

from cqa.denial import ConstraintSet
from cqa.errors import FormatError, SchemaMismatch
from cqa.gadgets import (
    SimpleGraph,
    block,
    format_graph,
    graph_to_database,
    parse_graph_text,
    rhombus_extension,
    twin_extension,
)
from cqa.model import DbTuple
from cqa.repairs import c_repairs
from cqa.solve import alpha_size, in_all_maximum_is, in_some_maximum_is


def path3():
    return SimpleGraph.build(3, [(0, 1), (1, 2)])


def five_cycle():
    return SimpleGraph.build(5, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)])


def brute_profile(g):
    n, masks = graph_masks(g)
    return mis_profile(n, masks)


class TestSimpleGraph:
    def test_no_self_loops(self):
        with pytest.raises(SchemaMismatch):
            SimpleGraph.build(2, [(0, 0)])

    def test_round_trip_format(self):
        g = five_cycle()
        parsed, markers = parse_graph_text(format_graph(g))
        assert parsed == g and markers == {}

    def test_markers_round_trip(self):
        text = format_graph(path3(), {"t": 1})
        parsed, markers = parse_graph_text(text)
        assert parsed == path3() and markers == {"t": 1}

    def test_edge_outside_range(self):
        with pytest.raises(FormatError):
            parse_graph_text("2\n0 5\n")


class TestTwinExtension:
    def test_endpoint_of_path(self):
        g = path3()
        out = twin_extension(g, 0)
        assert set(out.vertices) == {0, 1, 2, 3}
        assert out.neighbors(3) == g.neighbors(0)
        a_before, _, _ = brute_profile(g)
        a_after, _, inter = brute_profile(out)
        assert (a_before, a_after) == (2, 3)
        assert inter >> 0 & 1  # 0 now in every maximum independent set

    def test_isolated_vertex(self):
        g = SimpleGraph.build(2, [])
        out = twin_extension(g, 1)
        assert out.edges == frozenset()
        assert brute_profile(out)[0] == brute_profile(g)[0] + 1

    def test_middle_of_path(self):
        g = path3()
        out = twin_extension(g, 1)
        a_before, _, _ = brute_profile(g)
        a_after, _, inter = brute_profile(out)
        assert a_before == a_after == 2
        assert not inter >> 1 & 1

    def test_three_way_equivalence_exhaustive_small(self):
        for n in range(1, 5):
            for edges in all_graph_edge_sets(n):
                g = SimpleGraph.build(n, edges)
                a_g, union_g, _ = brute_profile(g)
                for v in range(n):
                    ext = twin_extension(g, v)
                    a_e, _, inter_e = brute_profile(ext)
                    in_some = bool(union_g >> v & 1)
                    in_all_ext = bool(inter_e >> v & 1)
                    assert in_some == in_all_ext == (a_e - a_g == 1)


class TestRhombusExtension:
    def test_single_vertex(self):
        g = SimpleGraph.build(1, [])
        out = rhombus_extension(g, 0)
        assert len(out.vertices) == 4
        _, union, inter = brute_profile(g)
        _, union_out, _ = brute_profile(out)
        assert bool(inter >> 0 & 1) == bool(union_out >> 0 & 1)

    def test_shape(self):
        out = rhombus_extension(SimpleGraph.build(1, []), 0)
        assert out.edges == frozenset({
            frozenset({0, 1}), frozenset({0, 2}),
            frozenset({1, 3}), frozenset({2, 3}),
        })

    def test_biconditional_exhaustive_small(self):
        for n in range(1, 5):
            for edges in all_graph_edge_sets(n):
                g = SimpleGraph.build(n, edges)
                _, _, inter_g = brute_profile(g)
                for v in range(n):
                    ext = rhombus_extension(g, v)
                    _, union_e, _ = brute_profile(ext)
                    assert bool(inter_g >> v & 1) == bool(union_e >> v & 1)


class TestBlock:
    def test_five_cycle_calibrated(self):
        g = five_cycle()  # alpha = 2
        blk = block(g, 2)
        h = blk.graph.to_hypergraph()
        assert in_all_maximum_is(h, blk.t)
        # cross-check by exhaustive enumeration over all block subsets
        _, _, inter = brute_profile(blk.graph)
        assert inter >> blk.t & 1

    def test_five_cycle_miscalibrated(self):
        blk = block(five_cycle(), 1)
        assert not in_all_maximum_is(blk.graph.to_hypergraph(), blk.t)
        _, _, inter = brute_profile(blk.graph)
        assert not inter >> blk.t & 1

    def test_two_isolated_vertices(self):
        g = SimpleGraph.build(2, [])  # alpha = 2
        blk = block(g, 2)
        assert in_all_maximum_is(blk.graph.to_hypergraph(), blk.t)

    def test_structure(self):
        g = path3()
        blk = block(g, 2)
        gr = blk.graph
        assert frozenset({blk.t, blk.b}) in gr.edges
        for w in blk.indep_k:
            assert frozenset({w, blk.t}) in gr.edges
            for u in blk.copy_a:
                assert frozenset({u, w}) in gr.edges
        for w in blk.indep_k1:
            assert frozenset({w, blk.b}) in gr.edges
            for u in blk.copy_b:
                assert frozenset({u, w}) in gr.edges
        # the two stable sets are internally edgeless
        for part in (blk.indep_k, blk.indep_k1):
            for a in part:
                for b in part:
                    assert frozenset({a, b}) not in gr.edges

    def test_biconditional_small_graphs(self):
        for n in range(1, 4):
            for edges in all_graph_edge_sets(n):
                g = SimpleGraph.build(n, edges)
                a_g = brute_profile(g)[0]
                for k in range(1, 5):
                    blk = block(g, k)
                    got = in_all_maximum_is(blk.graph.to_hypergraph(), blk.t)
                    assert got == (a_g == k)


class TestGraphToDatabase:
    def test_single_edge_padding(self):
        g = SimpleGraph.build(2, [(0, 1)])
        inst, constraint = graph_to_database(g)
        vertex = {t for t in inst.tuples if t.relation == "Vertex"}
        edges = {t for t in inst.tuples if t.relation == "Edges"}
        assert vertex == {DbTuple.of("Vertex", 0), DbTuple.of("Vertex", 1)}
        assert edges == {DbTuple.of("Edges", 0, 1, 1), DbTuple.of("Edges", 0, 1, 2)}
        reps = c_repairs(inst, ConstraintSet((constraint,)))
        retained_vertices = {frozenset(t.args[0].value for t in r.retained
                                       if t.relation == "Vertex") for r in reps}
        assert retained_vertices == {frozenset({0}), frozenset({1})}
        assert all(len([t for t in r.retained if t.relation == "Edges"]) == 2
                   for r in reps)

    def test_edgeless_graph_consistent(self):
        inst, constraint = graph_to_database(SimpleGraph.build(3, []))
        reps = c_repairs(inst, ConstraintSet((constraint,)))
        assert len(reps) == 1 and reps[0].retained == inst.tuples

    def test_three_path_unique_maximum(self):
        inst, constraint = graph_to_database(path3())
        reps = c_repairs(inst, ConstraintSet((constraint,)))
        assert len(reps) == 1
        kept = {t.args[0].value for t in reps[0].retained if t.relation == "Vertex"}
        assert kept == {0, 2}

    def test_bijection_exhaustive_small(self):
        for n in range(1, 4):
            for edges in all_graph_edge_sets(n):
                g = SimpleGraph.build(n, edges)
                n_bits, masks = graph_masks(g)
                maxima = _maximum_sets(n_bits, masks)
                inst, constraint = graph_to_database(g)
                reps = c_repairs(inst, ConstraintSet((constraint,)))
                got = {frozenset(t.args[0].value for t in r.retained
                                 if t.relation == "Vertex") for r in reps}
                assert got == maxima
                assert len(reps) == len(maxima)


def _maximum_sets(n, masks):
    alpha, _, _ = mis_profile(n, masks)
    out = set()
    for mask in range(1 << n):
        if bin(mask).count("1") != alpha:
            continue
        if all(mask & e != e for e in masks):
            out.add(frozenset(i for i in range(n) if mask >> i & 1))
    return out


class TestRouteConsistency:
    def test_twin_route_matches_direct_in_some(self):
        for n in range(1, 5):
            for edges in all_graph_edge_sets(n):
                g = SimpleGraph.build(n, edges)
                h = g.to_hypergraph()
                for v in range(n):
                    direct = in_some_maximum_is(h, v)
                    ext = twin_extension(g, v)
                    via_gadget = in_all_maximum_is(ext.to_hypergraph(), v)
                    assert direct == via_gadget
