"""The distribution a lifted network induces on worlds of size n.

Three routes: ``world_probability`` multiplies the defining factors for one
structure using the reference evaluator; ``exact_probability`` enumerates
every world in vectorised batches and sums exact rationals; ``sample``
draws worlds forward, parents first.
"""
import math
import zlib
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from itertools import product
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

from .errors import BoundExceededError, EvaluationError, InvalidNetworkError
from .evaluator import Assignment, FiniteStructure, evaluate
from .formula import Formula, free_vars
from .network import LiftedNetwork, guard_vars
from .tables import WorldBatch, enumerate_batch, truth_at, truth_table, width

DEFAULT_CAP_BITS = 24
CELL_BUDGET = 1 << 23
_MASK64 = (1 << 64) - 1


def world_bits(net: LiftedNetwork, n: int) -> int:
    return sum(n ** a for _, a in net.sig)


def all_worlds(net: LiftedNetwork, n: int) -> Iterator[FiniteStructure]:
    """Every structure on [n], in world-index order."""
    ground = [(rel, t) for rel, a in net.sig for t in product(range(1, n + 1), repeat=a)]
    for idx in range(1 << len(ground)):
        interp = {rel: set() for rel in net.sig.names}
        for j, (rel, t) in enumerate(ground):
            if idx >> j & 1:
                interp[rel].add(t)
        yield FiniteStructure(n, interp)


def _unique_guard(net: LiftedNetwork, A: FiniteStructure, rel: str, asg: Dict[str, int]) -> int:
    hits = [i for i, rule in enumerate(net.rules[rel]) if evaluate(A, rule.guard, asg)]
    if len(hits) != 1:
        raise InvalidNetworkError(f"{len(hits)} guards of {rel} hold at {tuple(asg.values())}")
    return hits[0]


def world_probability(net: LiftedNetwork, A: FiniteStructure) -> Fraction:
    prob = Fraction(1)
    for rel in net.order():
        xs = guard_vars(net.arity(rel))
        for t in product(range(1, A.n + 1), repeat=len(xs)):
            rule = net.rules[rel][_unique_guard(net, A, rel, dict(zip(xs, t)))]
            prob *= rule.prob if t in A.interp.get(rel, ()) else 1 - rule.prob
            if prob == 0:
                return prob
    return prob


def _exponents(net: LiftedNetwork, batch: WorldBatch) -> np.ndarray:
    """Per world and rule, how many tuples satisfy the guard with R true, and with R false."""
    cols = []
    for rel in net.sig.names:
        xs = guard_vars(net.arity(rel))
        arr = batch.rels[rel].reshape(batch.size, -1)
        hits = np.zeros(arr.shape, dtype=np.int8)
        for rule in net.rules[rel]:
            g = truth_table(batch, rule.guard, xs).reshape(batch.size, -1)
            hits += g
            cols.append((g & arr).sum(axis=1))
            cols.append((g & ~arr).sum(axis=1))
        bad = np.argwhere(hits != 1)
        if len(bad):
            w, t = bad[0]
            raise InvalidNetworkError(
                f"{int(hits[w, t])} guards of {rel} hold in world {batch.structure(int(w)).dumps()}")
    return np.stack(cols, axis=1)


def _factors(net: LiftedNetwork) -> List[Tuple[Fraction, Fraction]]:
    return [(rule.prob, 1 - rule.prob) for rel in net.sig.names for rule in net.rules[rel]]


def _mass(factors, exps) -> Fraction:
    out = Fraction(1)
    for (mu, nu), k1, k0 in zip(factors, exps[0::2], exps[1::2]):
        out *= mu ** int(k1) * nu ** int(k0)
    return out


def _chunk_size(net: LiftedNetwork, n: int, f: Optional[Formula]) -> int:
    w = max([width(f) if f is not None else 0]
            + [max(width(r.guard), net.arity(rel)) for rel in net.sig.names for r in net.rules[rel]])
    return max(1, CELL_BUDGET // (n ** max(w, 1)))


def _check_cap(net: LiftedNetwork, n: int, cap_bits: int) -> int:
    bits = world_bits(net, n)
    if bits > cap_bits:
        raise BoundExceededError(f"2^{bits} worlds at n={n} exceeds the cap 2^{cap_bits}")
    return bits


def _ranges(total: int, chunk: int):
    return [(s, min(s + chunk, total)) for s in range(0, total, chunk)]


def exact_probability(net: LiftedNetwork, n: int, f: Formula, asg: Assignment = None,
                      cap_bits: int = DEFAULT_CAP_BITS, threads: int = 1) -> Fraction:
    asg = dict(asg or {})
    bits = _check_cap(net, n, cap_bits)
    for v in free_vars(f):
        if v not in asg:
            raise EvaluationError(f"unassigned free variable {v}")
        if not 1 <= asg[v] <= n:
            raise ValueError(f"{v}={asg[v]} is outside [1..{n}]")

    def work(span):
        batch = enumerate_batch(net.sig.relations, n, *span)
        exps = _exponents(net, batch)[truth_at(batch, f, asg)]
        rows, counts = np.unique(exps, axis=0, return_counts=True) if len(exps) else ([], [])
        return Counter({tuple(int(v) for v in r): int(c) for r, c in zip(rows, counts)})

    total = Counter()
    spans = _ranges(1 << bits, _chunk_size(net, n, f))
    with ThreadPoolExecutor(max(1, threads)) as pool:
        for part in pool.map(work, spans):
            total.update(part)
    factors = _factors(net)
    return sum((c * _mass(factors, r) for r, c in total.items()), Fraction(0))


def world_distribution(net: LiftedNetwork, n: int, cap_bits: int = 16) -> List[Fraction]:
    """Exact probability of every world, indexed as in :func:`cpl.tables.enumerate_batch`."""
    bits = _check_cap(net, n, cap_bits)
    factors = _factors(net)
    out: List[Fraction] = []
    for span in _ranges(1 << bits, _chunk_size(net, n, None)):
        exps = _exponents(net, enumerate_batch(net.sig.relations, n, *span))
        cache: Dict[tuple, Fraction] = {}
        for row in exps:
            key = tuple(int(v) for v in row)
            if key not in cache:
                cache[key] = _mass(factors, key)
            out.append(cache[key])
    return out


# ---------------------------------------------------------------- sampling


class Sampler:
    """Forward sampler with one counter-based stream per relation.

    The stream for relation R is keyed by (seed, R); world w, tuple a reads
    position w * n^k + index(a), so successive ``draw`` calls continue the
    same sequence of worlds.
    """

    def __init__(self, net: LiftedNetwork, n: int, seed: int):
        self.net, self.n = net, n
        self.streams = {
            rel: np.random.Generator(np.random.Philox(
                np.random.SeedSequence([seed & _MASK64, zlib.crc32(rel.encode())])))
            for rel in net.sig.names}

    def draw(self, count: int) -> WorldBatch:
        n, rels = self.n, {}
        batch = WorldBatch(n, rels, count)
        for rel in self.net.order():
            k = self.net.arity(rel)
            xs = guard_vars(k)
            u = self.streams[rel].random((count,) + (n,) * k)
            prob = np.zeros(u.shape)
            hits = np.zeros(u.shape, dtype=np.int8)
            for rule in self.net.rules[rel]:
                g = truth_table(batch, rule.guard, xs)
                hits += g
                prob[g] = float(rule.prob)
            if (hits != 1).any():
                raise InvalidNetworkError(f"guards of {rel} are not exclusive and exhaustive in a sampled world")
            rels[rel] = u < prob
        return batch


def sample(net: LiftedNetwork, n: int, seed: int) -> FiniteStructure:
    return Sampler(net, n, seed).draw(1).structure(0)


def sample_batches(net: LiftedNetwork, n: int, seed: int, total: int,
                   chunk: Optional[int] = None, f: Optional[Formula] = None) -> Iterator[WorldBatch]:
    sampler = Sampler(net, n, seed)
    chunk = chunk or _chunk_size(net, n, f)
    done = 0
    while done < total:
        size = min(chunk, total - done)
        yield sampler.draw(size)
        done += size


def estimate_probability(net: LiftedNetwork, n: int, f: Formula, asg: Assignment = None,
                         samples: int = 10000, seed: int = 0) -> Tuple[float, float]:
    if samples < 1:
        raise ValueError("samples must be at least 1")
    asg = dict(asg or {})
    hits = 0
    for batch in sample_batches(net, n, seed, samples, f=f):
        hits += int(truth_at(batch, f, asg).sum())
    p = hits / samples
    return p, 1.96 * math.sqrt(p * (1 - p) / samples)
