import os
from fractions import Fraction
from itertools import product

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from cpl import catalog
from cpl.evaluator import FiniteStructure
from cpl.formula import And, Atom, Compare, Eq, Exists, Iff, Implies, Not, Or, Side, Signature, TRUE

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", max_examples=500, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

SIG = Signature.of(P=1, R=2)
VARS = ("x", "y", "z")


@pytest.fixture
def coin():
    return catalog.coin()


@pytest.fixture
def pq():
    return catalog.pq()


@pytest.fixture
def graph():
    return catalog.graph()


def atoms(sig=SIG, vars=VARS):
    rel_atoms = [st.tuples(*(st.sampled_from(vars) for _ in range(a))).map(lambda t, r=r: Atom(r, t))
                 for r, a in sig]
    eqs = st.tuples(st.sampled_from(vars), st.sampled_from(vars)).map(lambda t: Eq(*t))
    return st.one_of(*rel_atoms, eqs, st.just(TRUE))


def qf_formulas(sig=SIG, vars=VARS, max_leaves=8):
    binary = st.sampled_from([And, Or, Implies, Iff])

    def extend(children):
        return st.one_of(children.map(Not), st.tuples(binary, children, children).map(lambda t: t[0](t[1], t[2])))

    return st.recursive(atoms(sig, vars), extend, max_leaves=max_leaves)


thresholds = st.fractions(min_value=0, max_value=1, max_denominator=12)


def formulas(sig=SIG, vars=VARS, max_leaves=8):
    """CPL formulas, including both comparison shapes."""
    binary = st.sampled_from([And, Or, Implies, Iff])
    bounds = st.lists(st.sampled_from(vars), min_size=1, max_size=2, unique=True).map(tuple)

    def extend(children):
        return st.one_of(
            children.map(Not),
            st.tuples(binary, children, children).map(lambda t: t[0](t[1], t[2])),
            st.tuples(bounds, children).map(lambda t: Exists(*t)),
            st.builds(Compare, thresholds, st.sampled_from(list(Side)), children, children, children, children,
                      bounds),
        )

    return st.recursive(atoms(sig, vars), extend, max_leaves=max_leaves)


@st.composite
def structures(draw, sig=SIG, max_n=3):
    n = draw(st.integers(1, max_n))
    interp = {}
    for rel, a in sig:
        tuples = list(product(range(1, n + 1), repeat=a))
        interp[rel] = draw(st.sets(st.sampled_from(tuples))) if tuples else set()
    return FiniteStructure(n, interp)


def all_structures(sig, n):
    ground = [(rel, t) for rel, a in sig for t in product(range(1, n + 1), repeat=a)]
    for bits in product((False, True), repeat=len(ground)):
        interp = {rel: set() for rel in sig.names}
        for (rel, t), b in zip(ground, bits):
            if b:
                interp[rel].add(t)
        yield FiniteStructure(n, interp)


def frac(text):
    return Fraction(text)
