import json
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from crossworld import genrand
from crossworld.scm import (
    CapExceededError,
    ModelError,
    ModelSyntaxError,
    ProbabilisticSCM,
    endogenous,
    exogenous,
    observational_joint,
    parse_model,
    render_model,
    solve,
    solutions,
    validate,
)


def coin(name="U", p="1/2"):
    p = Fraction(p)
    return exogenous(name, "01", (1 - p, p))


def identity_model():
    return ProbabilisticSCM((coin(),), (endogenous("X", "01", ["U"], {("0",): "0", ("1",): "1"}),))


def doc(model):
    return json.loads(render_model(model))


class TestParse:
    def test_fig1_structure(self, fig):
        m = fig("fig1")
        assert set(m.endogenous_names) == {"Z", "X", "Y"}
        assert set(m.exogenous_names) == {"U_Z", "U_X", "U_Y"}
        endo_edges = {(a, b) for a, b in m.edges() if not m.is_exogenous(a)}
        assert endo_edges == {("Z", "X"), ("Z", "Y"), ("X", "Y")}

    def test_identity_two_nodes(self):
        text = json.dumps(
            {
                "exogenous": [{"name": "U", "domain": [0, 1], "marginal": ["1/2", "1/2"]}],
                "endogenous": [
                    {"name": "X", "domain": [0, 1], "parents": ["U"], "table": [
                        {"given": [0], "then": 0}, {"given": [1], "then": 1}]}
                ],
            }
        )
        m = parse_model(text)
        assert m.names == ("U", "X")
        assert m["X"].lookup == {("0",): "0", ("1",): "1"}

    def test_incomplete_table(self):
        d = doc(identity_model())
        d["endogenous"][0]["table"].pop()
        with pytest.raises(ModelError, match="incomplete equation table"):
            parse_model(json.dumps(d))

    def test_syntax_error_position(self):
        with pytest.raises(ModelSyntaxError) as info:
            parse_model('{"exogenous": [,]}')
        assert info.value.line == 1 and info.value.column is not None

    def test_missing_field(self):
        with pytest.raises(ModelSyntaxError, match="endogenous"):
            parse_model('{"exogenous": []}')

    @pytest.mark.parametrize("p", ["1/2", "2/4", 0, "0/3"])
    def test_rational_forms_accepted(self, p):
        d = doc(identity_model())
        d["exogenous"][0]["marginal"] = [p, "1/2"] if Fraction(p) == Fraction(1, 2) else [p, 1]
        parse_model(json.dumps(d))

    def test_render_lowest_terms(self):
        d = doc(identity_model())
        d["exogenous"][0]["marginal"] = ["2/4", "3/6"]
        assert doc(parse_model(json.dumps(d)))["exogenous"][0]["marginal"] == ["1/2", "1/2"]

    @pytest.mark.parametrize("name", ["fig1", "fig2", "fig3", "fig4", "fig5"])
    def test_fixture_round_trip(self, fig, name):
        m = fig(name)
        text = render_model(m)
        assert parse_model(text) == m
        assert render_model(parse_model(text)) == text

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32), st.integers(2, 5))
    def test_random_round_trip(self, seed, n):
        m = genrand.random_scm(genrand.GenConfig(seed=seed, n_endogenous=n))
        assert parse_model(render_model(m)) == m


class TestValidate:
    def test_fixture_clean(self, fig):
        assert validate(fig("fig1")).violations == ()

    def test_cycle(self):
        m = ProbabilisticSCM(
            (coin(),),
            (
                endogenous("X", "01", ["U", "Y"], {(u, y): y for u in "01" for y in "01"}),
                endogenous("Y", "01", ["X"], {(x,): x for x in "01"}),
            ),
        )
        assert "graph contains a cycle" in validate(m).violations

    def test_marginal_not_normalized(self):
        m = ProbabilisticSCM((exogenous("U", "01", ["1/2", "2/5"]),), identity_model().endogenous)
        assert any("marginal not normalized" in v for v in validate(m).violations)

    @pytest.mark.parametrize(
        "mutate, message",
        [
            (lambda d: d["exogenous"][0].update(domain=[]), "empty domain"),
            (lambda d: d["exogenous"][0].update(domain=["0", "0"]), "duplicate domain labels"),
            (lambda d: d["exogenous"][0].update(marginal=["3/2", "-1/2"]), "negative probability"),
            (lambda d: d["endogenous"][0].update(parents=["U", "U"]), "duplicate parents"),
            (lambda d: d["endogenous"][0].update(parents=["V"]), "unknown parents"),
            (lambda d: d["endogenous"][0]["table"].append({"given": ["0"], "then": "1"}), "duplicate equation rows"),
            (lambda d: d["endogenous"][0]["table"][0].update(then="7"), "outside domain"),
            (lambda d: d["endogenous"][0].update(name="U"), "duplicate variable name"),
            (lambda d: d["endogenous"][0].update(name="X_do_A=1"), "invalid variable name"),
            (lambda d: d["endogenous"][0].update(name="X_do_A"), "_do_"),
        ],
    )
    def test_violations(self, mutate, message):
        d = doc(identity_model())
        mutate(d)
        report = validate(parse_model(json.dumps(d), check_model=False))
        assert not report.ok
        assert any(message in v for v in report.violations), report.violations

    def test_no_exogenous_ancestor(self):
        m = ProbabilisticSCM((coin(),), (endogenous("X", "01", [], {(): "0"}),))
        assert any("no exogenous ancestor" in v for v in validate(m).violations)

    def test_report_collects_everything(self):
        d = doc(identity_model())
        d["exogenous"][0]["marginal"] = ["1/2", "1/3"]
        d["endogenous"][0]["table"].pop()
        assert len(validate(parse_model(json.dumps(d), check_model=False)).violations) == 2


class TestSolve:
    def test_fig1_zero_context(self, fig):
        # Z = U_Z = 0, X = Z ^ U_X = 0, Y = (X & Z) ^ U_Y = 0
        assert solve(fig("fig1"), {"U_Z": "0", "U_X": "0", "U_Y": "0"}) == {
            "U_Z": "0", "U_X": "0", "U_Y": "0", "Z": "0", "X": "0", "Y": "0"
        }

    def test_fig1_by_hand(self, fig):
        v = solve(fig("fig1"), {"U_Z": "1", "U_X": "0", "U_Y": "1"})
        assert (v["Z"], v["X"], v["Y"]) == ("1", "1", "0")

    def test_identity(self):
        assert solve(identity_model(), {"U": 1})["X"] == "1"

    def test_constant(self):
        m = ProbabilisticSCM((coin(),), (endogenous("X", "01", ["U"], {("0",): "0", ("1",): "0"}),))
        assert all(v["X"] == "0" for _, v in solutions(m))

    def test_missing_exogenous(self, fig):
        with pytest.raises(ModelError, match="missing exogenous assignment"):
            solve(fig("fig1"), {"U_Z": "0"})

    @pytest.mark.parametrize("name", ["fig1", "fig2", "fig3", "fig4", "fig5"])
    def test_fixed_point(self, fig, name):
        m = fig(name)
        for _, v in solutions(m):
            for var in m.endogenous:
                assert var.lookup[tuple(v[p] for p in var.parents)] == v[var.name]

    def test_order_ties_follow_declaration(self):
        m = ProbabilisticSCM(
            (coin("U"),),
            (
                endogenous("B", "01", ["U"], {("0",): "0", ("1",): "1"}),
                endogenous("A", "01", ["U"], {("0",): "0", ("1",): "1"}),
            ),
        )
        assert m.order == ("B", "A")


class TestObservational:
    def test_fair_coin(self):
        t = observational_joint(identity_model(), ["X"])
        assert t.rows == {("0",): Fraction(1, 2), ("1",): Fraction(1, 2)}

    def test_fig1_truncated_sum(self, fig):
        m = fig("fig1")
        pz1, px1, py1 = Fraction(3, 5), Fraction(1, 4), Fraction(1, 6)
        pz = {"0": 1 - pz1, "1": pz1}
        t = observational_joint(m, ["X", "Y"])
        for x in "01":
            for y in "01":
                expected = Fraction(0)
                for z in "01":
                    p_x = px1 if int(x) != int(z) else 1 - px1
                    base = int(x) & int(z)
                    p_y = py1 if int(y) != base else 1 - py1
                    expected += pz[z] * p_x * p_y
                assert t.prob({"X": x, "Y": y}) == expected

    def test_empty_vars(self, fig):
        t = observational_joint(fig("fig1"), [])
        assert t.rows == {(): Fraction(1)}

    def test_unknown(self, fig):
        with pytest.raises(ModelError, match="unknown variable"):
            observational_joint(fig("fig1"), ["Q"])

    @pytest.mark.parametrize("name", ["fig3", "fig4"])
    def test_marginal_consistency(self, fig, name):
        m = fig(name)
        full = observational_joint(m, m.endogenous_names)
        assert full.total() == 1
        assert all(p > 0 for p in full.rows.values())
        keep = m.endogenous_names[1:]
        assert full.marginal(keep) == observational_joint(m, keep)

    def test_cap(self, fig):
        with pytest.raises(CapExceededError):
            observational_joint(fig("fig3"), ["Y"], cap=8)
