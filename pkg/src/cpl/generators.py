"""Seeded random formula families for corpora, property checks and cost ladders."""
import random
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from .formula import (
    And, Atom, Compare, Eq, Exists, Formula, Iff, Implies, Not, Or, Side, Signature, conj, disj, length,
    proportion_at_least,
)


def random_atom(rng: random.Random, sig: Signature, scope: Sequence[str]) -> Formula:
    if not sig or rng.random() < 0.2:
        return Eq(rng.choice(scope), rng.choice(scope))
    rel, arity = rng.choice(sig.relations)
    return Atom(rel, tuple(rng.choice(scope) for _ in range(arity)))


def random_qf(rng: random.Random, sig: Signature, scope: Sequence[str], depth: int) -> Formula:
    if depth <= 0 or rng.random() < 0.3:
        atom = random_atom(rng, sig, scope)
        return Not(atom) if rng.random() < 0.4 else atom
    kind = rng.choice((Not, And, Or, Implies, Iff))
    if kind is Not:
        return Not(random_qf(rng, sig, scope, depth - 1))
    return kind(random_qf(rng, sig, scope, depth - 1), random_qf(rng, sig, scope, depth - 1))


def random_fo(rng: random.Random, sig: Signature, scope: Sequence[str], pool: Sequence[str],
              qr: int, depth: int = 3) -> Formula:
    """A first-order formula over ``pool`` with free variables in ``scope`` and rank at most ``qr``.

    Bound variables are drawn from ``pool`` and may be reused, so the width stays at |pool|.
    """
    if not scope or (qr > 0 and rng.random() < 0.5):
        if qr == 0:
            return random_qf(rng, sig, scope or pool[:1], depth)
        v = rng.choice(pool)
        inner = tuple(sorted(set(scope) | {v}))
        body = random_fo(rng, sig, inner, pool, qr - 1, depth)
        q = Exists((v,), body)
        return Not(Exists((v,), Not(body))) if rng.random() < 0.5 else q
    if depth <= 0 or rng.random() < 0.3:
        return random_qf(rng, sig, scope, 1)
    kind = rng.choice((Not, And, Or))
    if kind is Not:
        return Not(random_fo(rng, sig, scope, pool, qr, depth - 1))
    return kind(random_fo(rng, sig, scope, pool, qr, depth - 1),
                random_fo(rng, sig, scope, pool, qr, depth - 1))


def random_sentence(rng: random.Random, sig: Signature, pool: Sequence[str] = ("x", "y"),
                    qr: int = 2) -> Formula:
    v = rng.choice(pool)
    body = random_fo(rng, sig, (v,), pool, qr - 1)
    return Exists((v,), body) if rng.random() < 0.5 else Not(Exists((v,), Not(body)))


def dnf(rng: random.Random, sig: Signature, scope: Sequence[str], terms: int, width: int) -> Formula:
    return disj(conj(random_atom(rng, sig, scope) if rng.random() < 0.6 else Not(random_atom(rng, sig, scope))
                     for _ in range(width)) for _ in range(terms))


def comparison_chain(rng: random.Random, sig: Signature, xs: Tuple[str, ...], ys: Tuple[str, ...],
                     target: int, thresholds: Sequence[Fraction], terms: int = 2, width: int = 2) -> Formula:
    """A conjunction of comparisons with DNF subformulas, grown until its length reaches ``target``."""
    scope = xs + ys
    parts: List[Formula] = []
    while not parts or length(conj(parts)) < target:
        num = dnf(rng, sig, scope, terms, width)
        den = dnf(rng, sig, scope, terms, width)
        r = rng.choice(thresholds)
        if rng.random() < 0.5:
            parts.append(proportion_at_least(num, den, ys, r))
        else:
            num2 = dnf(rng, sig, scope, terms, width)
            parts.append(Compare(r, Side.LEFT, num, den, num2, den, ys))
    return conj(parts)


def corpus(seed: int, count: int, sig: Signature, pool: Sequence[str] = ("x", "y"), qr: int = 2,
           free: Optional[Sequence[str]] = None) -> List[Formula]:
    rng = random.Random(seed)
    if free is None:
        return [random_sentence(rng, sig, pool, qr) for _ in range(count)]
    return [random_fo(rng, sig, tuple(free), pool, qr) for _ in range(count)]
