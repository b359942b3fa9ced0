import math
from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cpl import catalog
from cpl.asymptotics import (
    TypeProbTable, critical_numbers, epsilon_margin, farey, is_noncritical, margin_holds, msf_p, msf_p_cond,
    subset_ratios, zero_dimension_pairs,
)
from cpl.atomic_types import enumerate_types, restrict, type_satisfies
from cpl.errors import BoundExceededError, CriticalFormulaError, NetworkError, ZeroMassError
from cpl.formula import Signature, parse
from cpl.network import strata
from cpl.worlds import exact_probability

# networks whose guards are quantifier-free and only look at the tuple itself
LOCAL = ("netcoin", "netpq", "netgraph", "netsure", "netchain", "netfriends")


def type_with(sig, vars, text):
    f = parse(text)
    (p,) = [p for p in enumerate_types(sig, vars) if type_satisfies(p, f)]
    return p


def powerset_ratios(masses):
    """Every sum(S')/sum(S) for nonempty S' inside S, by listing subsets."""
    items = [m for m in masses if m > 0]
    out = set()
    for size in range(1, len(items) + 1):
        for S in combinations(range(len(items)), size):
            total = sum(items[i] for i in S)
            for k in range(1, size + 1):
                for T in combinations(S, k):
                    out.add(sum(items[i] for i in T) / total)
    return out


def brute_force_critical(net, m):
    """Clause (a) ratios by exhaustive subsets, plus 0 and 1."""
    sig = net.sig
    vars = tuple(f"v{i}" for i in range(1, m + 1))
    out = {Fraction(0), Fraction(1)}
    for k in range(1, m + 1):
        for d in range(k):
            for q in enumerate_types(sig, vars[:d]):
                mq = msf_p(net, q)
                if mq == 0:
                    continue
                exts = [p for p in enumerate_types(sig, vars[:k]) if restrict(p, sig, vars[:d]) == q]
                out |= powerset_ratios([msf_p(net, p) / mq for p in exts])
    return out


class TestMsfP:
    def test_pq_values(self):
        pq = catalog.pq()
        assert msf_p(pq, type_with(pq.sig, ("x",), "P(x) & Q(x)")) == Fraction(3, 8)
        assert msf_p(pq, type_with(pq.sig, ("x",), "P(x) & ~Q(x)")) == Fraction(1, 8)
        assert msf_p(pq, type_with(pq.sig, ("x",), "~P(x) & Q(x)")) == Fraction(1, 8)

    def test_empty_signature(self):
        p = enumerate_types(Signature(()), ("x", "y"))[1]
        assert msf_p(catalog.pq(), p) == 1

    @pytest.mark.parametrize("name", LOCAL)
    @pytest.mark.parametrize("vars", [("x",), ("x", "y")])
    def test_equals_exact_probability(self, name, vars):
        # with guards that only read the tuple itself the limit is already reached at every n
        net = catalog.get(name)
        for p in enumerate_types(net.sig, vars):
            asg = {v: p.block_of(v) + 1 for v in vars}
            for n in range(p.n_classes, 3):
                assert exact_probability(net, n, p.to_formula(), asg) == msf_p(net, p), (name, str(p), n)

    @pytest.mark.parametrize("name", sorted(catalog.CATALOG))
    @pytest.mark.parametrize("k", [1, 2, 3])
    def test_sums_to_one(self, name, k):
        net = catalog.get(name)
        table = TypeProbTable(net)
        vars = ("x", "y", "z")[:k]
        # a fixed tuple of elements fixes the identity pattern; the types sharing it split mass 1
        by_pattern = {}
        for p in enumerate_types(net.sig, vars):
            by_pattern[p.blocks] = by_pattern.get(p.blocks, 0) + table.msf_p(p)
        assert set(by_pattern.values()) == {1}

    @pytest.mark.parametrize("name", sorted(catalog.CATALOG))
    def test_restriction_to_strata_increases_mass(self, name):
        net = catalog.get(name)
        table = TypeProbTable(net)
        for p in enumerate_types(net.sig, ("x", "y")):
            for layer in strata(net):
                assert table.msf_p(restrict(p, layer, p.vars)) >= table.msf_p(p)

    def test_quantified_guard_is_limit(self):
        net = catalog.exists_guard()
        p = type_with(net.sig.restrict(["Q", "R"]), ("x",), "Q(x) & R(x,x)")
        q = type_with(net.sig.restrict(["Q", "R"]), ("x",), "Q(x) & ~R(x,x)")
        assert msf_p(net, p) == msf_p(net, q) == Fraction(3, 8)
        # exact probabilities of Q(x) approach the limit 3/4 from below
        exact = [exact_probability(net, n, parse("Q(x)"), {"x": 1}) for n in (1, 2, 3)]
        assert exact == [Fraction(1, 2), Fraction(5, 8), Fraction(11, 16)]

    def test_signature_must_be_parent_closed(self):
        pq = catalog.pq()
        p = enumerate_types(Signature.of(Q=1), ("x",))[0]
        with pytest.raises(NetworkError):
            msf_p(pq, p)


class TestConditional:
    def test_coin(self):
        coin = catalog.coin()
        p = type_with(coin.sig, ("x", "y"), "x!=y & P(x) & P(y)")
        q = type_with(coin.sig, ("x",), "P(x)")
        assert msf_p_cond(coin, p, q) == Fraction(1, 2)
        assert msf_p_cond(coin, q, q) == 1

    def test_pq(self):
        pq = catalog.pq()
        p = type_with(pq.sig, ("x", "y"), "x!=y & P(x) & Q(x) & P(y) & ~Q(y)")
        q = type_with(pq.sig, ("x",), "P(x) & Q(x)")
        assert msf_p(pq, p) == Fraction(3, 64)
        assert msf_p_cond(pq, p, q) == Fraction(1, 8)

    def test_zero_mass(self):
        sure = catalog.sure()
        q = type_with(sure.sig, ("x",), "~P(x)")
        p = type_with(sure.sig, ("x", "y"), "x!=y & ~P(x) & P(y)")
        with pytest.raises(ZeroMassError):
            msf_p_cond(sure, p, q)

    def test_not_a_restriction(self):
        coin = catalog.coin()
        p = type_with(coin.sig, ("x", "y"), "x!=y & P(x) & P(y)")
        q = type_with(coin.sig, ("x",), "~P(x)")
        with pytest.raises(ValueError):
            msf_p_cond(coin, p, q)

    @given(st.sampled_from(LOCAL), st.data())
    def test_extensions_sum_to_one(self, name, data):
        net = catalog.get(name)
        q = data.draw(st.sampled_from(enumerate_types(net.sig, ("x",))))
        if msf_p(net, q) == 0:
            return
        exts = [p for p in enumerate_types(net.sig, ("x", "y")) if restrict(p, net.sig, ("x",)) == q]
        assert sum(msf_p_cond(net, p, q) for p in exts) == 2  # one unit for y=x, one for y!=x


class TestCriticalNumbers:
    def test_contains_zero_and_one(self):
        for name in sorted(catalog.CATALOG):
            crit = critical_numbers(catalog.get(name), 1)
            assert 0 in crit and 1 in crit

    def test_examples(self):
        assert {Fraction(0), Fraction(1, 2), Fraction(1)} <= set(critical_numbers(catalog.coin(), 1))
        assert {Fraction(1, 4), Fraction(1, 2), Fraction(3, 4)} <= set(critical_numbers(catalog.pq(), 1))

    @pytest.mark.parametrize("name,m", [("netcoin", 1), ("netcoin", 2), ("netpq", 1), ("netgraph", 1),
                                        ("netsure", 2)])
    def test_explicit_part_matches_brute_force(self, name, m):
        net = catalog.get(name)
        assert critical_numbers(net, m).explicit == brute_force_critical(net, m)

    @pytest.mark.parametrize("name", ["netcoin", "netpq", "netgraph", "netchain"])
    def test_monotone_in_m(self, name):
        net = catalog.get(name)
        one, two = critical_numbers(net, 1), critical_numbers(net, 2)
        assert one.explicit <= two.explicit and one.farey_order <= two.farey_order

    def test_bound(self):
        with pytest.raises(BoundExceededError):
            critical_numbers(catalog.coin(), 5)

    def test_zero_dimension_pairs(self):
        # m=2, d=1: one class, two atoms choices for P(x), one way for y to coincide with x
        assert zero_dimension_pairs(Signature.of(P=1), 2) == 2
        assert zero_dimension_pairs(Signature.of(P=1), 1) == 0

    @given(st.lists(st.fractions(min_value=0, max_value=1, max_denominator=6), min_size=1, max_size=5))
    def test_subset_ratios_match_powerset(self, masses):
        assert subset_ratios(masses) == powerset_ratios(masses)

    def test_farey(self):
        assert sorted(farey(3)) == [Fraction(a) for a in ("0", "1/3", "1/2", "2/3", "1")]


class TestNoncritical:
    def test_half_is_critical(self):
        ok, wit = is_noncritical(catalog.coin(), parse("[ ||P(y) : y=y||{y} >= 1/2 ]"))
        assert not ok and wit[0] == (Fraction(1, 2), Fraction(1, 2), Fraction(0))
        assert all(r == a - b for r, a, b in wit)

    def test_third_is_noncritical(self):
        assert is_noncritical(catalog.coin(), parse("[ ||P(y) : y=y||{y} >= 1/3 ]")) == (True, [])

    @pytest.mark.parametrize("text", ["exists x : P(x)", "forall x : exists y : (x!=y & P(y))", "P(x)"])
    def test_first_order(self, text):
        assert is_noncritical(catalog.coin(), parse(text))[0]

    def test_pq_threshold(self):
        pq = catalog.pq()
        assert not is_noncritical(pq, parse("[ ||Q(y) : P(y)||{y} >= 5/8 ]"))[0]
        assert is_noncritical(pq, parse(f"[ ||Q(y) : P(y)||{{y}} >= {catalog.PQ_THRESHOLD} ]"))[0]

    def test_level_bound(self):
        f = parse("exists a,b,c : exists d,e : (a=b & c=d & d=e & [ ||P(y) : y=y||{y} >= 1/3 ])")
        with pytest.raises(BoundExceededError):
            is_noncritical(catalog.coin(), f)


class TestEpsilonMargin:
    f = parse("[ ||P(y) : y=y||{y} >= 1/3 ]")

    def test_first_order_unbounded(self):
        assert epsilon_margin(catalog.coin(), parse("exists x : P(x)")) == math.inf

    def test_positive_and_tight(self):
        coin = catalog.coin()
        eps = epsilon_margin(coin, self.f)
        values = critical_numbers(coin, 1).values
        assert isinstance(eps, Fraction) and eps > 0
        assert margin_holds(values, [self.f.r], eps)
        assert not margin_holds(values, [self.f.r], 2 * eps)

    def test_critical_refused(self):
        with pytest.raises(CriticalFormulaError):
            epsilon_margin(catalog.coin(), parse("[ ||P(y) : y=y||{y} >= 1/2 ]"))
