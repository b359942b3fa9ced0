from fractions import Fraction
from itertools import permutations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cpl import catalog
from cpl.errors import BoundExceededError, EvaluationError, InvalidNetworkError
from cpl.evaluator import FiniteStructure, evaluate
from cpl.formula import Not, parse
from cpl.network import build
from cpl.worlds import (
    Sampler, all_worlds, estimate_probability, exact_probability, sample, sample_batches, world_distribution,
    world_probability,
)

from conftest import formulas

NETS = ("netcoin", "netpq", "netgraph")


def reference_probability(net, n, f, asg=None):
    """Sum of world probabilities over the worlds satisfying f, via the recursive evaluator."""
    return sum((world_probability(net, A) for A in all_worlds(net, n) if evaluate(A, f, asg or {})), Fraction(0))


class TestWorldProbability:
    def test_pq_world(self):
        assert world_probability(catalog.pq(), FiniteStructure(1, {"P": [1], "Q": [1]})) == Fraction(3, 8)

    def test_coin_worlds_uniform(self):
        assert {world_probability(catalog.coin(), A) for A in all_worlds(catalog.coin(), 2)} == {Fraction(1, 4)}

    def test_zero(self):
        assert world_probability(catalog.sure(), FiniteStructure(1, {"P": []})) == 0

    @pytest.mark.parametrize("name", NETS + ("netchain", "netfriends", "netexists"))
    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_sums_to_one(self, name, n):
        net = catalog.get(name)
        if sum(n ** a for _, a in net.sig) > 12:
            pytest.skip("too many worlds for the reference route")
        assert sum((world_probability(net, A) for A in all_worlds(net, n)), Fraction(0)) == 1

    def test_invalid_network_detected(self):
        net = build([("P", 1, [], [("true", "1/2")]), ("Q", 1, ["P"], [("P(x1)", "1/2"), ("true", "1/2")])])
        with pytest.raises(InvalidNetworkError):
            world_probability(net, FiniteStructure(1, {"P": [1], "Q": []}))
        with pytest.raises(InvalidNetworkError):
            exact_probability(net, 1, parse("Q(x)"), {"x": 1})


class TestExactProbability:
    def test_examples(self):
        assert exact_probability(catalog.coin(), 2, parse("exists x : P(x)")) == Fraction(3, 4)
        assert exact_probability(catalog.pq(), 1, parse("Q(x)"), {"x": 1}) == Fraction(1, 2)
        f = parse("exists x,y : (x!=y & R(x,y) & ~R(y,x))")
        assert exact_probability(catalog.graph(), 3, f) == Fraction(7, 8)

    def test_distribution_matches_reference(self):
        for name in NETS:
            net = catalog.get(name)
            for n in (1, 2):
                assert world_distribution(net, n) == [world_probability(net, A) for A in all_worlds(net, n)]

    @settings(max_examples=25)
    @given(st.sampled_from(NETS), st.integers(1, 2), st.data())
    def test_agrees_with_reference(self, name, n, data):
        net = catalog.get(name)
        f = data.draw(formulas(net.sig, ("x", "y")))
        asg = {"x": 1, "y": n}
        assert exact_probability(net, n, f, asg) == reference_probability(net, n, f, asg)

    @settings(max_examples=25)
    @given(st.sampled_from(NETS), st.data())
    def test_complement(self, name, data):
        net = catalog.get(name)
        f = data.draw(formulas(net.sig, ("x", "y")))
        asg = {"x": 1, "y": 2}
        assert exact_probability(net, 2, f, asg) + exact_probability(net, 2, Not(f), asg) == 1

    @pytest.mark.parametrize("text", ["R(x,y) & ~R(y,z)", "exists w : (R(x,w) & R(w,y) & z!=w)"])
    def test_permutation_invariance(self, text):
        net, f = catalog.graph(), parse(text)
        base = exact_probability(net, 3, f, {"x": 1, "y": 2, "z": 3})
        for perm in permutations((1, 2, 3)):
            assert exact_probability(net, 3, f, dict(zip("xyz", perm))) == base

    def test_threads_do_not_change_result(self):
        f = parse("exists x : forall y : (x=y | R(x,y))")
        net = catalog.graph()
        assert exact_probability(net, 3, f, threads=4) == exact_probability(net, 3, f)

    def test_cap(self):
        with pytest.raises(BoundExceededError):
            exact_probability(catalog.graph(), 5, parse("true"))
        with pytest.raises(BoundExceededError):
            exact_probability(catalog.graph(), 3, parse("true"), cap_bits=8)

    def test_assignment_checked(self):
        with pytest.raises(EvaluationError):
            exact_probability(catalog.coin(), 2, parse("P(x)"))
        with pytest.raises(ValueError):
            exact_probability(catalog.coin(), 2, parse("P(x)"), {"x": 3})


class TestSampling:
    def test_deterministic(self):
        net = catalog.pq()
        assert sample(net, 6, 99) == sample(net, 6, 99)
        assert sample(net, 6, 99) != sample(net, 6, 100)

    def test_chunks_continue_one_stream(self):
        net = catalog.graph()
        whole = Sampler(net, 4, 5).draw(10)
        s = Sampler(net, 4, 5)
        parts = [s.draw(3), s.draw(7)]
        joined = np.concatenate([p.rels["R"] for p in parts])
        assert np.array_equal(joined, whole.rels["R"])

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_coin_frequency(self, seed):
        A = sample(catalog.coin(), 10000, seed)
        assert abs(len(A.interp["P"]) / 10000 - 0.5) < 0.02

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_pq_conditional_frequency(self, seed):
        A = sample(catalog.pq(), 10000, seed)
        p = {t[0] for t in A.interp["P"]}
        q = {t[0] for t in A.interp["Q"]}
        assert abs(len(p & q) / len(p) - 0.75) < 0.03

    def test_sampled_worlds_have_positive_probability(self):
        net = catalog.chain()
        for batch in sample_batches(net, 3, 4, 50, chunk=20):
            for w in range(batch.size):
                assert world_probability(net, batch.structure(w)) > 0

    def test_sure_relation(self):
        A = sample(catalog.sure(), 50, 3)
        assert len(A.interp["P"]) == 50


class TestEstimate:
    def test_coin(self):
        p, hw = estimate_probability(catalog.coin(), 2, parse("exists x : P(x)"), samples=100000, seed=1)
        assert abs(p - 0.75) < 0.01 and 0 < hw < 0.01

    def test_trivial(self):
        assert estimate_probability(catalog.pq(), 3, parse("true"), samples=100) == (1.0, 0.0)
        assert estimate_probability(catalog.pq(), 3, parse("x!=x"), {"x": 1}, samples=100)[0] == 0.0

    def test_samples_checked(self):
        with pytest.raises(ValueError):
            estimate_probability(catalog.coin(), 2, parse("true"), samples=0)
