from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cpl import catalog
from cpl.atomic_types import enumerate_types
from cpl.errors import BoundExceededError, CriticalFormulaError
from cpl.evaluator import evaluate
from cpl.eliminator import (
    Eliminator, analyze_comparison, cost_report, eliminate, eliminate_comparison, eliminate_existential,
    limit_probability, limit_table, parse_pattern, quantifier_free_network,
)
from cpl.formula import (
    TRUE, Compare, Eq, Not, Side, disj, free_vars, is_quantifier_free, length, neq, parse, render,
)
from cpl.generators import corpus
from cpl.network import build
from cpl.tables import truth_table
from cpl.worlds import exact_probability, sample_batches

from conftest import all_structures

PQ_R = catalog.PQ_THRESHOLD


class TestGolden:
    @pytest.mark.parametrize("name,text,want", [
        ("netcoin", "exists y : (P(y) & y!=x)", "true"),
        ("netsure", "exists y : ~P(y)", "~true"),
        ("netcoin", "[ ||P(y) : y=y||{y} >= 1/3 ]", "true"),
        ("netgraph", "exists y : R(x,y)", "true"),
        ("netcoin", "exists y : (P(y) & y=x)", "P(x)"),
        ("netgraph", "exists x,y : (x!=y & R(x,y) & ~R(y,x))", "true"),
    ])
    def test_eliminate(self, name, text, want):
        assert render(eliminate(catalog.get(name), parse(text))) == want

    @pytest.mark.parametrize("name,body,xs,want", [
        ("netgraph", "R(x,y)", ("x",), "true"),
        ("netcoin", "P(y) & ~P(y)", (), "~true"),
        ("netcoin", "P(y) & y=x", ("x",), "P(x)"),
    ])
    def test_existential(self, name, body, xs, want):
        assert render(eliminate_existential(catalog.get(name), parse(body), "y", xs)) == want

    @pytest.mark.parametrize("name,text,want", [
        ("netcoin", "[ ||P(y) : y=y||{y} >= 1/3 ]", "true"),
        ("netcoin", "[ ||P(y) : y=y||{y} >= 2/3 ]", "~true"),
        ("netpq", f"[ ||Q(y) : P(y)||{{y}} >= {PQ_R} ]", "true"),
    ])
    def test_comparison(self, name, text, want):
        f = parse(text)
        assert render(eliminate_comparison(catalog.get(name), f, free_vars(f))) == want

    def test_tautology_is_all_types(self):
        # the cosmetic `true` stands for the disjunction of every complete type over x
        el = Eliminator(catalog.coin())
        sig, xs, types = el.eliminate_types(parse("exists y : (P(y) & y!=x)"))
        assert xs == ("x",) and len(types) == len(enumerate_types(sig, xs)) == 2

    def test_pq_output_is_type_disjunction(self):
        out = eliminate(catalog.pq(), parse("Q(x) & exists y : (x!=y & P(y))"))
        assert render(out) == "~P(x) & Q(x) | P(x) & Q(x)"


class TestAnalysis:
    def test_gamma_values(self):
        an = analyze_comparison(catalog.pq(), parse(f"[ ||Q(y) : P(y)||{{y}} >= {PQ_R} ]"), ())
        (g,) = an.gamma.values()
        (gs,) = an.gamma_star.values()
        assert (g, gs) == (Fraction(3, 4), Fraction(0))
        assert len(an.index_set) == 1

    def test_empty_denominator(self):
        an = analyze_comparison(catalog.coin(), parse("[ ||P(y) : y!=y||{y} >= 1/3 ]"), ())
        assert an.result == Not(TRUE) and an.index_set == []

    def test_dimension_zero_counts(self):
        # proportion over y pinned to x is 0 or 1, so the comparison is exactly P(x)
        f = parse("[ ||P(y) : y=x||{y} >= 10/29 ]")
        assert render(eliminate(catalog.coin(), f)) == "P(x)"

    def test_left_side(self):
        f = parse("[ 3/29 + ||P(y) : y=y||{y} >= ||~P(y) : y=y||{y} ]")
        assert render(eliminate(catalog.coin(), f)) == "true"
        g = parse("[ ||P(y) : y=y||{y} >= ||~P(y) : y=y||{y} + 3/29 ]")
        assert render(eliminate(catalog.coin(), g)) == "~true"

    @pytest.mark.parametrize("text", [f"[ ||Q(y) : P(y)||{{y}} >= {PQ_R} ]",
                                      "[ ||Q(y) & x!=y : P(x) | P(y)||{y} >= 70/131 ]"])
    def test_gamma_in_unit_interval(self, text):
        f = parse(text)
        an = analyze_comparison(catalog.pq(), f, free_vars(f))
        assert all(0 <= v <= 1 for v in list(an.gamma.values()) + list(an.gamma_star.values()))
        for groups in an.groups.values():
            for grp in groups.values():
                assert all(m > 0 for m in grp.masses)


class TestErrors:
    def test_critical(self):
        with pytest.raises(CriticalFormulaError, match=r"r=1/2, alpha=1/2, beta=0"):
            eliminate(catalog.coin(), parse("[ ||P(y) : y=y||{y} >= 1/2 ]"))

    def test_bound(self):
        with pytest.raises(BoundExceededError):
            eliminate(catalog.coin(), parse("exists y,z,w,v : (P(x) & P(y) & P(z) & P(w) & P(v))"))
        assert render(eliminate(catalog.coin(), parse("exists y,z : (P(x) & P(y) & P(z))"), k=4)) == "P(x)"

    def test_critical_guard(self):
        g = "[ ||R(x1,y) : y=y||{y} >= 1/2 ]"
        net = build([("R", 2, [], [("true", "1/2")]), ("Q", 1, ["R"], [(g, "3/4"), (f"~{g}", "1/4")])])
        with pytest.raises(CriticalFormulaError, match="guard of Q"):
            quantifier_free_network(net)


class TestQuantifierFreeNetwork:
    def test_fixpoint(self):
        for name in ("netpq", "netchain", "netfriends"):
            net = catalog.get(name)
            assert quantifier_free_network(net) == net

    def _guards(self, net):
        return [render(r.guard) for r in quantifier_free_network(net).rules["Q"]]

    def test_exists_guard(self):
        assert self._guards(catalog.exists_guard()) == ["true", "~true"]

    def test_threshold_guard(self):
        assert self._guards(catalog.threshold_guard()) == ["true", "~true"]

    def test_probabilities_and_dag_kept(self):
        net = catalog.exists_guard()
        star = quantifier_free_network(net)
        assert star.parents == net.parents
        assert [r.prob for r in star.rules["Q"]] == [r.prob for r in net.rules["Q"]]
        assert all(is_quantifier_free(r.guard) for rs in star.rules.values() for r in rs)

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_exact_gap(self, n):
        # Q's guard differs from its replacement only when element 1 has no R-successor: probability 2^-n
        net = catalog.exists_guard()
        star = quantifier_free_network(net)
        f = parse("Q(x)")
        gap = exact_probability(star, n, f, {"x": 1}) - exact_probability(net, n, f, {"x": 1})
        assert gap == Fraction(1, 2) * Fraction(1, 2) ** n
        assert exact_probability(star, n, parse("R(x,x)"), {"x": 1}) == Fraction(1, 2)


class TestLimits:
    def test_examples(self):
        assert limit_probability(catalog.pq(), parse("Q(x)")) == Fraction(1, 2)
        assert limit_probability(catalog.graph(), parse("exists x,y : (x!=y & R(x,y) & ~R(y,x))")) == 1
        assert limit_probability(catalog.coin(), parse("x!=x")) == 0

    def test_patterns(self):
        f = parse("R(x,y)")
        g = catalog.graph()
        assert parse_pattern("distinct", ("x", "y")) == (0, 1)
        assert parse_pattern("x=y", ("x", "y")) == (0, 0)
        assert limit_probability(g, f, "x=y") == limit_probability(g, f, "distinct") == Fraction(1, 2)
        assert limit_probability(g, parse("x=y"), "x=y") == 1
        assert limit_table(g, parse("x=y")) == {(0, 0): 1, (0, 1): 0}
        with pytest.raises(ValueError):
            parse_pattern("x=w", ("x", "y"))

    def test_three_variable_pattern(self):
        assert parse_pattern("x=z", ("x", "y", "z")) == (0, 1, 0)
        assert parse_pattern("z=y", ("x", "y", "z")) == (0, 1, 1)

    @pytest.mark.parametrize("name", ["netcoin", "netpq", "netgraph", "netfriends"])
    def test_complement(self, name):
        net = catalog.get(name)
        for f in corpus(11, 8, net.sig, qr=2, free=("x",)):
            assert limit_probability(net, f) + limit_probability(net, Not(f)) == 1

    @pytest.mark.parametrize("name", ["netcoin", "netgraph"])
    def test_zero_one_law(self, name):
        net = catalog.get(name)
        for f in corpus(13, 10, net.sig, qr=3):
            assert limit_probability(net, f) in (0, 1)

    def test_limit_is_critical(self):
        from cpl.asymptotics import critical_numbers
        pq = catalog.pq()
        crit = critical_numbers(pq, 1)
        for f in corpus(17, 10, pq.sig, qr=1, free=("x",)):
            assert limit_probability(pq, f) in crit


class TestProperties:
    @settings(max_examples=30)
    @given(st.sampled_from(["netcoin", "netpq", "netgraph"]), st.integers(0, 10 ** 6))
    def test_idempotent(self, name, seed):
        net = catalog.get(name)
        (f,) = corpus(seed, 1, net.sig, qr=2, free=("x",))
        once = eliminate(net, f)
        assert is_quantifier_free(once)
        assert eliminate(net, once) == once

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_dimension_zero_exact_on_all_worlds(self, n):
        net = catalog.coin()
        cases = [parse("exists y : (P(y) & y=x)"), parse("[ ||P(y) : y=x||{y} >= 10/29 ]"),
                 parse("exists y : (y=x & ~P(x) & ~P(y))")]
        for f in cases:
            g = eliminate(net, f)
            for A in all_structures(net.sig, n):
                for a in range(1, n + 1):
                    assert evaluate(A, f, {"x": a}) == evaluate(A, g, {"x": a})

    def test_almost_sure_on_random_formulas(self):
        g = catalog.graph()
        disagreements = 0
        for i, f in enumerate(corpus(5, 30, g.sig, qr=2, free=("x",))):
            star = eliminate(g, f)
            for batch in sample_batches(g, 60, i, 5):
                a = truth_table(batch, f, ("x",))
                b = truth_table(batch, star, ("x",))
                disagreements += int((a != b).reshape(batch.size, -1).any(axis=1).sum())
        assert disagreements == 0


class TestCost:
    def test_trivial_comparison(self):
        f = parse("[ ||P(y) : y=y||{y} >= 1/3 ]")
        an = analyze_comparison(catalog.coin(), f, ())
        tallies = cost_report(an)
        mass = sum(p.size + 1 for grps in an.groups.values() for grp in grps.values() for p in grp.exts)
        assert all(v >= 0 for v in tallies) and sum(tallies) >= 1
        assert sum(tallies) <= 4 * (mass + len(an.gamma) + len(an.gamma_star) + 1)

    def test_doubling_types(self):
        g = catalog.graph()
        types = enumerate_types(g.sig, ("x", "y"))
        prev = None
        for t in (1, 2, 4, 8, 16):
            num = disj(p.to_formula() for p in types[:t])
            comp = Compare(Fraction(13, 37), Side.RIGHT, num, TRUE, neq("y", "y"), Eq("y", "y"), ("y",))
            tally = sum(cost_report(analyze_comparison(g, comp, ("x",))))
            if prev is not None:
                assert tally <= 2 * prev
            prev = tally

    def test_ladder_within_quadratic(self):
        from cpl.acceptance import cost_ladder
        rows = cost_ladder()
        c = max(t / s ** 2 for s, t in rows[:1])
        assert all(t <= 2 * c * s ** 2 for s, t in rows)
        assert [s for s, _ in rows] == sorted(s for s, _ in rows)

    def test_counter_aggregates(self):
        el = Eliminator(catalog.coin())
        el.eliminate(parse("[ ||P(y) : y=y||{y} >= 1/3 ] & [ ||~P(y) : y=y||{y} >= 1/3 ]"))
        assert len(el.analyses) == 2
        assert el.ops.as_tuple() == tuple(sum(col) for col in zip(*(cost_report(a) for a in el.analyses)))
