"""Vectorised evaluation of CPL formulas over batches of worlds.

A batch holds B structures of the same domain size n; relation R of arity k
is a boolean array of shape (B, n, ..., n).  ``truth_table`` returns, for a
formula and a tuple of variables, the boolean array of shape
(B, n, ..., n) whose entry [w, a1, ..., am] is the truth value in world w
under the assignment vars[i] -> ai + 1.

Internally every intermediate table carries its own free variables in
lexicographic order; axes of size 1 broadcast.
"""
from dataclasses import dataclass
from typing import Dict, Sequence, Tuple

import numpy as np

from .errors import EvaluationError
from .evaluator import FiniteStructure
from .formula import (
    And, Atom, Compare, Eq, Exists, Formula, Iff, Implies, Not, Or, Side, Top,
    free_vars, subformulas,
)

Table = Tuple[Tuple[str, ...], np.ndarray]

_INT_LIMIT = 1 << 62


@dataclass
class WorldBatch:
    n: int
    rels: Dict[str, np.ndarray]
    size: int

    def structure(self, w: int) -> FiniteStructure:
        interp = {rel: [tuple(int(i) + 1 for i in idx) for idx in zip(*np.nonzero(arr[w]))]
                  for rel, arr in self.rels.items()}
        return FiniteStructure(self.n, interp)

    @classmethod
    def from_structures(cls, structures: Sequence[FiniteStructure], arities: Dict[str, int]) -> "WorldBatch":
        n = structures[0].n
        rels = {}
        for rel, k in arities.items():
            arr = np.zeros((len(structures),) + (n,) * k, dtype=bool)
            for w, A in enumerate(structures):
                for t in A.interp.get(rel, ()):
                    arr[(w,) + tuple(a - 1 for a in t)] = True
            rels[rel] = arr
        return cls(n, rels, len(structures))


def bit_layout(arities: Sequence[Tuple[str, int]], n: int) -> Tuple[Tuple[str, int, int], ...]:
    """(relation, first bit, number of bits) for the world encoding at size n.

    Relations are taken in name order and tuples in lexicographic order.
    """
    out, offset = [], 0
    for rel, k in sorted(arities):
        out.append((rel, offset, n ** k))
        offset += n ** k
    return tuple(out)


def enumerate_batch(arities: Sequence[Tuple[str, int]], n: int, start: int, stop: int) -> WorldBatch:
    """Worlds with indices start..stop-1; bit j of the index is the j-th ground atom."""
    layout = bit_layout(arities, n)
    total = sum(c for _, _, c in layout)
    idx = np.arange(start, stop, dtype=np.int64)
    bits = ((idx[:, None] >> np.arange(total, dtype=np.int64)) & 1).astype(bool)
    arity = dict(arities)
    rels = {rel: bits[:, off:off + cnt].reshape((len(idx),) + (n,) * arity[rel])
            for rel, off, cnt in layout}
    return WorldBatch(n, rels, len(idx))


def world_indices(batch: WorldBatch, arities: Sequence[Tuple[str, int]]) -> np.ndarray:
    """Inverse of :func:`enumerate_batch`."""
    out = np.zeros(batch.size, dtype=np.int64)
    for rel, off, cnt in bit_layout(arities, batch.n):
        flat = batch.rels[rel].reshape(batch.size, cnt).astype(np.int64)
        out |= (flat << (off + np.arange(cnt, dtype=np.int64))).sum(axis=1)
    return out


def width(f: Formula) -> int:
    """Largest number of variables any intermediate table of f ranges over."""
    best = 0
    for g in subformulas(f):
        extra = g.bound if isinstance(g, Compare) else g.vars if isinstance(g, Exists) else ()
        best = max(best, len(set(free_vars(g)) | set(extra)))
    return best


def _align(table: Table, target: Tuple[str, ...]) -> np.ndarray:
    vs, arr = table
    perm = [0] + [1 + vs.index(v) for v in target if v in vs]
    arr = arr.transpose(perm)
    shape, it = [arr.shape[0]], iter(arr.shape[1:])
    for v in target:
        shape.append(next(it) if v in vs else 1)
    return arr.reshape(shape)


def _conjoin(s: Table, t: Table) -> Table:
    vs = tuple(sorted(set(s[0]) | set(t[0])))
    return vs, _align(s, vs) & _align(t, vs)


class _Tabulator:
    def __init__(self, batch: WorldBatch):
        self.batch = batch
        self.n = batch.n
        self.memo: Dict[int, Table] = {}

    def table(self, f: Formula) -> Table:
        hit = self.memo.get(id(f))
        if hit is None:
            hit = self.memo[id(f)] = self._table(f)
        return hit

    def _index(self, j: int, k: int) -> np.ndarray:
        shape = [1] * k
        shape[j] = self.n
        return np.arange(self.n).reshape(shape)

    def _table(self, f: Formula) -> Table:
        n = self.n
        if isinstance(f, Atom):
            if f.rel not in self.batch.rels:
                raise EvaluationError(f"batch does not interpret {f.rel}")
            vs = tuple(sorted(set(f.args)))
            idx = {v: self._index(j, len(vs)) for j, v in enumerate(vs)}
            arr = self.batch.rels[f.rel][(slice(None),) + tuple(idx[a] for a in f.args)]
            return vs, arr.reshape((arr.shape[0],) + (n,) * len(vs))
        if isinstance(f, Eq):
            if f.left == f.right:
                return (), np.ones((1,), dtype=bool)
            vs = tuple(sorted((f.left, f.right)))
            return vs, np.eye(n, dtype=bool)[None]
        if isinstance(f, Top):
            return (), np.ones((1,), dtype=bool)
        if isinstance(f, Not):
            vs, arr = self.table(f.arg)
            return vs, ~arr
        if isinstance(f, (And, Or, Implies, Iff)):
            left, right = self.table(f.left), self.table(f.right)
            vs = tuple(sorted(set(left[0]) | set(right[0])))
            a, b = _align(left, vs), _align(right, vs)
            if isinstance(f, And):
                return vs, a & b
            if isinstance(f, Or):
                return vs, a | b
            if isinstance(f, Implies):
                return vs, ~a | b
            return vs, a == b
        if isinstance(f, Exists):
            vs, arr = self.table(f.body)
            gone = [1 + vs.index(v) for v in set(f.vars) if v in vs]
            if gone:
                arr = arr.any(axis=tuple(gone))
            return tuple(v for v in vs if v not in f.vars), arr
        if isinstance(f, Compare):
            return self._compare(f)
        raise TypeError(f"not a formula: {f!r}")

    def _count(self, table: Table, target: Tuple[str, ...], bound: Tuple[str, ...]) -> np.ndarray:
        arr = _align(table, target)
        axes = tuple(1 + target.index(y) for y in bound)
        missing = sum(1 for ax in axes if arr.shape[ax] == 1)
        counts = arr.sum(axis=axes, dtype=np.int64)
        return counts * (self.n ** missing)

    def _compare(self, f: Compare) -> Table:
        out_vars = free_vars(f)
        target = out_vars + tuple(f.bound)
        num1, den1 = self.table(f.num1), self.table(f.den1)
        num2, den2 = self.table(f.num2), self.table(f.den2)
        a = self._count(_conjoin(num1, den1), target, f.bound)
        b = self._count(den1, target, f.bound)
        c = self._count(_conjoin(num2, den2), target, f.bound)
        d = self._count(den2, target, f.bound)
        p, q = f.r.numerator, f.r.denominator
        biggest = self.n ** len(f.bound)
        if max(p, q) * biggest * biggest * 2 >= _INT_LIMIT:
            a, b, c, d = (x.astype(object) for x in (a, b, c, d))
        if f.side is Side.LEFT:
            holds = p * b * d + q * a * d >= q * c * b
        else:
            holds = q * a * d >= q * c * b + p * b * d
        holds = np.asarray(holds, dtype=bool) & (b > 0) & (d > 0)
        return out_vars, holds


def truth_table(batch: WorldBatch, f: Formula, vars: Sequence[str] = None) -> np.ndarray:
    """Truth values of f for every world and every assignment to ``vars``.

    ``vars`` defaults to the free variables of f and must include them.
    """
    vars = tuple(free_vars(f) if vars is None else vars)
    missing = set(free_vars(f)) - set(vars)
    if missing:
        raise EvaluationError(f"unassigned free variables {sorted(missing)}")
    table = _Tabulator(batch).table(f)
    arr = _align(table, vars)
    return np.broadcast_to(arr, (batch.size,) + (batch.n,) * len(vars))


def truth_at(batch: WorldBatch, f: Formula, asg: Dict[str, int]) -> np.ndarray:
    """Per-world truth of f under an assignment of its free variables (elements 1..n)."""
    vars = free_vars(f)
    for v in vars:
        if v not in asg:
            raise EvaluationError(f"unassigned free variable {v}")
    arr = truth_table(batch, f, vars)
    return arr[(slice(None),) + tuple(asg[v] - 1 for v in vars)]
