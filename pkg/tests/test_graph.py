import itertools

import networkx as nx
import pytest
from hypothesis import given, settings, strategies as st

from crossworld import genrand
from crossworld.graph import (
    CausalGraph,
    GraphError,
    NodeKind,
    Path,
    all_paths,
    ancestors,
    backdoor_admissible,
    d_separated,
    descendants,
    path_blocked,
)
from crossworld.worlds import Intervention, build_teleporter, build_twin, model_graph

from conftest import dags, queries

FIG2 = CausalGraph.from_edges([("U", "C"), ("C", "A"), ("C", "B"), ("A", "D"), ("B", "D")], exogenous=["U"])


def chain(*names):
    return CausalGraph.from_edges(list(zip(names, names[1:])))


class TestConstruction:
    def test_rejects_cycle(self):
        with pytest.raises(GraphError):
            CausalGraph.from_edges([("A", "B"), ("B", "A")])

    def test_rejects_exogenous_parent(self):
        with pytest.raises(GraphError):
            CausalGraph.from_edges([("A", "U")], exogenous=["U"])

    def test_rejects_unknown_endpoint(self):
        with pytest.raises(GraphError):
            CausalGraph((("A", NodeKind.ENDOGENOUS),), (("A", "B"),))

    def test_kind_and_neighbours(self):
        assert FIG2.kind("U") is NodeKind.EXOGENOUS
        assert sorted(FIG2.neighbours("C")) == ["A", "B", "U"]


class TestDescendants:
    def test_fig2(self):
        assert descendants(FIG2, "A") == {"D"}

    def test_leaf(self):
        assert descendants(FIG2, "D") == set()

    def test_chain(self):
        assert descendants(chain("A", "B", "C"), "A") == {"B", "C"}

    def test_ancestors(self):
        assert ancestors(FIG2, "D") == {"A", "B", "C", "U"}

    def test_unknown(self):
        with pytest.raises(GraphError):
            descendants(FIG2, "Q")


class TestDSeparation:
    def test_fig2_teleporter_examples(self, fig):
        tele = build_teleporter(fig("fig2"), Intervention("A", "a"))
        da = tele.duplicates["D"]
        assert d_separated(tele.graph, "A", da, {"B"}).separated
        v = d_separated(tele.graph, "A", da, {"D", "C"})
        assert not v.separated
        assert "D" in v.witness.nodes and "D" in v.witness.colliders()

    def test_isolated(self):
        g = CausalGraph((("A", NodeKind.ENDOGENOUS), ("B", NodeKind.ENDOGENOUS)), ())
        v = d_separated(g, "A", "B")
        assert v.separated and v.witness is None

    def test_collider_descendant_opens(self):
        g = CausalGraph.from_edges([("A", "C"), ("B", "C"), ("C", "D")])
        assert d_separated(g, "A", "B")
        assert not d_separated(g, "A", "B", {"D"})

    def test_endpoint_in_cond(self):
        with pytest.raises(GraphError, match="conditioning"):
            d_separated(FIG2, "A", "D", {"A"})

    def test_same_endpoints(self):
        with pytest.raises(GraphError):
            d_separated(FIG2, "A", "A")

    def test_unknown_node(self):
        with pytest.raises(GraphError):
            d_separated(FIG2, "A", "Q")

    @settings(max_examples=300, deadline=None)
    @given(st.data())
    def test_matches_path_oracle_and_networkx(self, data):
        g = data.draw(dags())
        a, b, cond = data.draw(queries(g))
        verdict = d_separated(g, a, b, cond)
        oracle = all(p.blocked for p in all_paths(g, a, b, cond))
        assert verdict.separated == oracle
        nxg = nx.DiGraph(list(g.edges))
        nxg.add_nodes_from(g.names)
        assert verdict.separated == nx.is_d_separator(nxg, {a}, {b}, set(cond))
        if not verdict.separated:
            w = verdict.witness
            assert w.nodes[0] == a and w.nodes[-1] == b
            assert len(set(w.nodes)) == len(w.nodes)
            assert not path_blocked(g, w, cond)

    @settings(max_examples=200, deadline=None)
    @given(st.data())
    def test_symmetry(self, data):
        g = data.draw(dags())
        a, b, cond = data.draw(queries(g))
        assert d_separated(g, a, b, cond).separated == d_separated(g, b, a, cond).separated

    @settings(max_examples=200, deadline=None)
    @given(st.data())
    def test_edge_removal_monotone(self, data):
        g = data.draw(dags())
        a, b, cond = data.draw(queries(g))
        if not g.edges:
            return
        edge = data.draw(st.sampled_from(list(g.edges)))
        if d_separated(g, a, b, cond):
            assert d_separated(g.without_edges([edge]), a, b, cond)


class TestAllPaths:
    def test_fig3_one_open_path(self, fig):
        tele = build_teleporter(fig("fig3"), Intervention("X", "x"))
        yx = tele.duplicates["Y"]
        paths = all_paths(tele.graph, "X", yx)
        open_paths = [str(p.path) for p in paths if not p.blocked]
        assert open_paths == [f"X←C→Z→T→{yx}"]
        assert all(p.blocked for p in paths if str(p.path) not in open_paths)

    def test_chain(self):
        paths = all_paths(chain("A", "B", "C"), "A", "C")
        assert [str(p.path) for p in paths] == ["A→B→C"]
        assert not paths[0].blocked

    def test_fig2_twin(self, fig):
        twin = build_twin(fig("fig2"), Intervention("A", "a"))
        s = {p.path.ascii() for p in all_paths(twin.graph, "A", twin.duplicates["D"])}
        assert "A <- C <- U -> C_do_A=a -> B_do_A=a -> D_do_A=a" in s

    def test_deterministic_order(self, fig):
        twin = build_twin(fig("fig2"), Intervention("A", "a"))
        paths = all_paths(twin.graph, "A", twin.duplicates["D"], {"B"})
        assert [p.path.nodes for p in paths] == sorted(p.path.nodes for p in paths)

    def test_same_endpoint(self):
        with pytest.raises(GraphError):
            all_paths(FIG2, "A", "A")


class TestBackdoor:
    def test_fig2(self):
        assert backdoor_admissible(FIG2, "A", "D", {"B"})
        assert backdoor_admissible(FIG2, "A", "D", {"C"})
        assert not backdoor_admissible(FIG2, "A", "D", set())

    def test_descendant_excluded(self):
        g = CausalGraph.from_edges([("C", "A"), ("A", "M"), ("M", "D"), ("C", "D")])
        assert backdoor_admissible(g, "A", "D", {"C"})
        assert not backdoor_admissible(g, "A", "D", {"C", "M"})

    def test_endpoint_in_z(self):
        with pytest.raises(GraphError):
            backdoor_admissible(FIG2, "A", "D", {"A"})

    def test_implies_teleporter_separation(self):
        checked = 0
        for seed in range(150):
            model = genrand.random_scm(genrand.GenConfig(seed=seed, n_endogenous=5))
            g = model_graph(model)
            for x in model.endogenous_names:
                iv = Intervention(x, "0")
                tele = build_teleporter(model, iv)
                pool = [v for v in model.endogenous_names if v in tele.teleporters()]
                for y in tele.duplicates:
                    if y == x:
                        continue
                    for k in range(3):
                        for z in itertools.combinations(pool, k):
                            if backdoor_admissible(g, x, y, z):
                                checked += 1
                                assert d_separated(tele.graph, x, tele.duplicates[y], z), (seed, x, y, z)
        assert checked > 100


class TestPath:
    def test_rendering(self):
        p = Path(("A", "B", "C"), (True, False))
        assert str(p) == "A→B←C"
        assert p.ascii() == "A -> B <- C"
        assert p.colliders() == ["B"]
