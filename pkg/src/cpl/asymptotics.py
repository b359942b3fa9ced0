"""Limit probabilities of complete types, critical numbers, noncriticality.

``msf_p(p)`` is the limit, as the domain grows, of the probability that a
tuple of distinct-as-required elements realizes the complete type p.  It is a
finite product: one factor per relation atom over the classes of p, equal to
mu or 1 - mu of the unique rule whose (quantifier-free) guard holds of that
atom's argument classes in p.
"""
import math
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .atomic_types import (
    CompleteAtomicType, class_atoms, compile_qf, enumerate_types, restrict, set_partitions,
)
from .errors import BoundExceededError, CriticalFormulaError, InvalidNetworkError, NetworkError, ZeroMassError
from .formula import Formula, Signature, free_vars, is_quantifier_free, quantifier_rank, threshold_constants
from .network import LiftedNetwork, guard_vars, topological_order

MAX_CRITICAL_M = 4
DP_CELL_BUDGET = 1 << 22
RATIO_BUDGET = 1 << 20


class TypeProbTable:
    """Memoised msfP values for one network, with its guards in quantifier-free form."""

    def __init__(self, net: LiftedNetwork, k: int = 4):
        topological_order(net)
        self.net = net
        self.k = k
        self.memo: Dict[tuple, Fraction] = {}
        self._guards: Dict[str, Tuple[Formula, ...]] = {}
        self._compiled: Dict[str, tuple] = {}
        self._closed: Dict[Signature, bool] = {}

    def qf_guards(self, rel: str) -> Tuple[Formula, ...]:
        """The guards of ``rel`` with quantifiers eliminated against the ancestors of ``rel``."""
        if rel not in self._guards:
            from .eliminator import Eliminator
            out = []
            for rule in self.net.rules[rel]:
                g = rule.guard
                if not is_quantifier_free(g):
                    g = Eliminator(self.net, k=self.k, table=self).eliminate_guard(rel, g)
                out.append(g)
            self._guards[rel] = tuple(out)
        return self._guards[rel]

    def _rule_predicates(self, rel: str):
        if rel not in self._compiled:
            index = {x: j for j, x in enumerate(guard_vars(self.net.arity(rel)))}
            self._compiled[rel] = tuple(compile_qf(g, index) for g in self.qf_guards(rel))
        return self._compiled[rel]

    def _check_sig(self, sig: Signature) -> None:
        if sig not in self._closed:
            ok = sig.issubset(self.net.sig) and all(self.net.parents[r] <= set(sig.names) for r in sig.names)
            self._closed[sig] = ok
        if not self._closed[sig]:
            raise NetworkError(f"type signature {sig} is not a parent-closed part of the network")

    def msf_p(self, p: CompleteAtomicType) -> Fraction:
        key = p.key
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        self._check_sig(p.sig)
        prob = Fraction(1)
        for rel in self.net.order():
            if rel not in p.sig or prob == 0:
                continue
            preds = self._rule_predicates(rel)
            rules = self.net.rules[rel]
            for t in product(range(p.n_classes), repeat=self.net.arity(rel)):
                hits = [i for i, pred in enumerate(preds) if pred(t, p.true_atoms)]
                if len(hits) != 1:
                    raise InvalidNetworkError(
                        f"{len(hits)} guards of {rel} hold for classes {t} of the type {p}")
                mu = rules[hits[0]].prob
                prob *= mu if (rel, t) in p.true_atoms else 1 - mu
                if prob == 0:
                    break
        self.memo[key] = prob
        return prob

    def msf_p_cond(self, p: CompleteAtomicType, q: CompleteAtomicType) -> Fraction:
        if restrict(p, q.sig, q.vars) != q:
            raise ValueError(f"{q} is not the restriction of {p}")
        mq = self.msf_p(q)
        if mq == 0:
            raise ZeroMassError(f"the type {q} has limit probability 0")
        return self.msf_p(p) / mq


def _as_table(source) -> TypeProbTable:
    return source if isinstance(source, TypeProbTable) else TypeProbTable(source)


def msf_p(source, p: CompleteAtomicType) -> Fraction:
    """msfP of ``p``; ``source`` is a TypeProbTable or a network."""
    return _as_table(source).msf_p(p)


def msf_p_cond(source, p: CompleteAtomicType, q: CompleteAtomicType) -> Fraction:
    return _as_table(source).msf_p_cond(p, q)


# ---------------------------------------------------------- critical numbers


@dataclass(frozen=True)
class CriticalSet:
    """Ratios of subset sums of conditional type masses, plus every l'/l with l <= farey_order."""

    m: int
    explicit: FrozenSet[Fraction]
    farey_order: int

    def __contains__(self, a) -> bool:
        a = Fraction(a)
        return a in self.explicit or (0 <= a <= 1 and a.denominator <= self.farey_order)

    @property
    def values(self) -> Tuple[Fraction, ...]:
        if self.farey_order > 2000:
            raise BoundExceededError(f"refusing to list the Farey sequence of order {self.farey_order}")
        return tuple(sorted(self.explicit | farey(self.farey_order)))

    def __iter__(self):
        return iter(self.values)

    def __len__(self):
        return len(self.values)


def farey(order: int) -> FrozenSet[Fraction]:
    return frozenset(Fraction(a, b) for b in range(1, order + 1) for a in range(b + 1))


def subset_ratios(values: Sequence[Fraction]) -> FrozenSet[Fraction]:
    """Every a / (a + c) where a, c are sums over disjoint subsets, the a-subset nonempty."""
    values = [v for v in values if v > 0]
    if not values:
        return frozenset()
    den = math.lcm(*(v.denominator for v in values))
    weights = sorted(int(v * den) for v in values)
    total = sum(weights)
    if (total + 1) ** 2 > DP_CELL_BUDGET:
        raise BoundExceededError(f"subset-sum table of {(total + 1) ** 2} cells exceeds the budget")
    reach = np.zeros((total + 1, total + 1), dtype=bool)
    reach[0, 0] = True
    counts = defaultdict(int)
    for w in weights:
        counts[w] += 1
    for w, c in sorted(counts.items()):
        for _ in range(c):
            new = reach.copy()
            new[w:, :] |= reach[:-w, :]
            new[:, w:] |= reach[:, :-w]
            if np.array_equal(new, reach):
                break
            reach = new
    a, c = np.nonzero(reach)
    keep = a > 0
    a, b = a[keep], a[keep] + c[keep]
    g = np.gcd(a, b)
    pairs = np.unique(np.stack([a // g, b // g], axis=1), axis=0)
    if len(pairs) > RATIO_BUDGET:
        raise BoundExceededError(f"{len(pairs)} distinct ratios exceed the budget")
    return frozenset(Fraction(int(x), int(y)) for x, y in pairs)


def zero_dimension_pairs(sig: Signature, m: int) -> int:
    """Count of pairs (p over x1..xm', q = p restricted to x1..xd), d < m' <= m, adding no new element."""
    total = 0
    for m2 in range(2, m + 1):
        for d in range(1, m2):
            for blocks in set_partitions(d):
                c = max(blocks) + 1
                total += (1 << len(class_atoms(sig, c))) * c ** (m2 - d)
    return total


def critical_numbers(net: LiftedNetwork, m: int, sig: Optional[Signature] = None,
                     table: Optional[TypeProbTable] = None, bound: int = MAX_CRITICAL_M) -> CriticalSet:
    if m > bound:
        raise BoundExceededError(f"m={m} exceeds the bound {bound}")
    sig = net.sig if sig is None else sig
    table = table or TypeProbTable(net)
    found = {Fraction(0), Fraction(1)}
    vars = tuple(f"v{i}" for i in range(1, m + 1))
    done = set()
    for k in range(1, m + 1):
        types = enumerate_types(sig, vars[:k])
        for d in range(k):
            groups = defaultdict(list)
            for p in types:
                groups[restrict(p, sig, vars[:d])].append(p)
            for q, ps in groups.items():
                mq = table.msf_p(q)
                if mq == 0:
                    continue
                masses = tuple(sorted(table.msf_p(p) / mq for p in ps))
                if masses not in done:
                    done.add(masses)
                    found |= subset_ratios(masses)
    return CriticalSet(m, frozenset(found), max(1, zero_dimension_pairs(sig, m)))


def _witnesses(crit: CriticalSet, r: Fraction) -> List[Tuple[Fraction, Fraction, Fraction]]:
    out = set()
    for alpha in crit.explicit:
        if alpha - r in crit:
            out.add((r, alpha, alpha - r))
    for beta in crit.explicit:
        if beta + r in crit:
            out.add((r, beta + r, beta))
    if not out:
        order = crit.farey_order
        for b in range(1, order + 1):
            for a in range(b + 1):
                alpha = Fraction(a, b)
                if alpha.denominator == b and alpha - r in crit:
                    out.add((r, alpha, alpha - r))
                    break
            if out:
                break
    return sorted(out)


def formula_level(f: Formula) -> int:
    return len(free_vars(f)) + quantifier_rank(f)


def is_noncritical(net: LiftedNetwork, f: Formula, sig: Optional[Signature] = None,
                   table: Optional[TypeProbTable] = None, level: Optional[int] = None):
    """(ok, witnesses); each witness (r, alpha, beta) has r = alpha - beta with both critical."""
    rs = threshold_constants(f)
    if not rs:
        return True, []
    level = formula_level(f) if level is None else level
    crit = critical_numbers(net, level, sig=sig, table=table)
    out = []
    for r in sorted(rs):
        out.extend(_witnesses(crit, r))
    return not out, out


def _margin_bounds(r: Fraction, alphas: np.ndarray, betas: np.ndarray) -> np.ndarray:
    """Upper limits on u = (1+2e)^2 from every pair, as floats; inf where a pair imposes none."""
    disc = np.sqrt(r * r + 4 * alphas * betas)
    with np.errstate(divide="ignore", invalid="ignore"):
        first = np.where((r + alphas > betas) & (betas > 0), (r + disc) / (2 * betas), np.inf)
        second = np.where((alphas > betas + r) & (betas > 0), (disc - r) / (2 * betas), np.inf)
        if r > 0:
            second = np.where((alphas > betas + r) & (betas == 0), alphas / r, second)
    return np.minimum(first, second)


def _sqrt_below(x: Fraction, bits: int = 80) -> Fraction:
    scale = 1 << bits
    return Fraction(math.isqrt(x.numerator * x.denominator * scale * scale), x.denominator * scale)


def _exact_bound(r: Fraction, alpha: Fraction, beta: Fraction) -> Optional[Fraction]:
    """A rational slightly below the exact limit on u imposed by (alpha, beta)."""
    limits = []
    root = _sqrt_below(r * r + 4 * alpha * beta)
    if r + alpha > beta and beta > 0:
        limits.append((r + root) / (2 * beta))
    if alpha > beta + r:
        if beta > 0:
            limits.append((root - r) / (2 * beta))
        elif r > 0:
            limits.append(alpha / r)
    return min(limits) if limits else None


def margin_holds(values: Iterable[Fraction], rs: Iterable[Fraction], eps: Fraction) -> bool:
    """Both implications of the epsilon condition at ``eps``, checked exactly."""
    u = (1 + 2 * Fraction(eps)) ** 2
    values = list(values)
    for r in rs:
        for alpha in values:
            for beta in values:
                if r + alpha > beta and not r + alpha / u > beta * u:
                    return False
                if alpha > beta + r and not alpha / u > beta * u + r:
                    return False
    return True


def epsilon_margin(net: LiftedNetwork, f: Formula, sig: Optional[Signature] = None,
                   table: Optional[TypeProbTable] = None):
    """A rational e in (sup/2, sup), where sup is the largest admissible epsilon; inf without thresholds."""
    rs = sorted(threshold_constants(f))
    if not rs:
        return math.inf
    ok, wit = is_noncritical(net, f, sig=sig, table=table)
    if not ok:
        raise CriticalFormulaError("formula is critical", wit)
    crit = critical_numbers(net, formula_level(f), sig=sig, table=table)
    values = crit.values
    fa = np.array([float(v) for v in values])
    alphas, betas = np.meshgrid(fa, fa, indexing="ij")
    best: Optional[Fraction] = None
    for r in rs:
        bounds = _margin_bounds(float(r), alphas, betas)
        low = bounds.min()
        if not np.isfinite(low):
            continue
        for i, j in np.argwhere(bounds <= low * (1 + 1e-9) + 1e-12):
            u = _exact_bound(r, values[i], values[j])
            if u is not None and (best is None or u < best):
                best = u
    if best is None:
        return math.inf
    eps_sup = (_sqrt_below(best) - 1) / 2
    scale = 1 << 48
    return Fraction(math.floor(eps_sup * scale * (1 - Fraction(1, 1 << 20))), scale)
