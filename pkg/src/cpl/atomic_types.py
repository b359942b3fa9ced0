"""Complete atomic types over a tuple of variables.

A type is stored as a set partition of its variables (restricted-growth
string, one class index per variable) together with the set of relation
atoms over class indices that it makes true.  Every other atom over class
indices is false.  Literals about non-representative variables follow by
substituting equals for equals, so they are derived rather than stored.
"""
from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import Callable, Dict, FrozenSet, Iterator, List, Optional, Sequence, Tuple

from .errors import BoundExceededError, EvaluationError, SignatureError
from .evaluator import FiniteStructure
from .formula import (
    FALSE, TRUE, And, Atom, Compare, Eq, Exists, Formula, Iff, Implies, Not, Or, Signature,
    Top, conj, disj, free_vars, relations,
)

MAX_TYPES = 1 << 22

ClassAtom = Tuple[str, Tuple[int, ...]]


@dataclass(frozen=True)
class Literal:
    positive: bool
    atom: Formula

    def formula(self) -> Formula:
        return self.atom if self.positive else Not(self.atom)


@dataclass(frozen=True)
class CompleteAtomicType:
    sig: Signature
    vars: Tuple[str, ...]
    blocks: Tuple[int, ...]
    true_atoms: FrozenSet[ClassAtom]

    @property
    def n_classes(self) -> int:
        return max(self.blocks) + 1 if self.blocks else 0

    @property
    def classes(self) -> Tuple[Tuple[str, ...], ...]:
        out = [[] for _ in range(self.n_classes)]
        for v, b in zip(self.vars, self.blocks):
            out[b].append(v)
        return tuple(tuple(c) for c in out)

    @property
    def key(self):
        """Identifies the type up to renaming of its variables."""
        return (self.sig, self.blocks, self.true_atoms)

    def representative(self, c: int) -> str:
        return self.vars[self.blocks.index(c)]

    def block_of(self, var: str) -> int:
        return self.blocks[self.vars.index(var)]

    def holds(self, rel: str, args: Sequence[str]) -> bool:
        return (rel, tuple(self.block_of(a) for a in args)) in self.true_atoms

    def equal(self, x: str, y: str) -> bool:
        return self.block_of(x) == self.block_of(y)

    def representative_literals(self) -> List[Literal]:
        """Identity literals for every variable pair, then relation literals on representatives."""
        out = []
        for i in range(len(self.vars)):
            for j in range(i + 1, len(self.vars)):
                out.append(Literal(self.blocks[i] == self.blocks[j], Eq(self.vars[i], self.vars[j])))
        for rel, t in class_atoms(self.sig, self.n_classes):
            atom = Atom(rel, tuple(self.representative(c) for c in t))
            out.append(Literal((rel, t) in self.true_atoms, atom))
        return out

    def literals(self) -> FrozenSet[Literal]:
        """The full literal set over ``vars``, equality substitutions included."""
        out = set()
        for x in self.vars:
            for y in self.vars:
                out.add(Literal(self.equal(x, y), Eq(x, y)))
        for rel, arity in self.sig:
            for args in product(self.vars, repeat=arity):
                out.add(Literal(self.holds(rel, args), Atom(rel, args)))
        return frozenset(out)

    @property
    def size(self) -> int:
        return len(self.representative_literals())

    def to_formula(self) -> Formula:
        lits = self.representative_literals()
        if not lits:
            return Eq(self.vars[0], self.vars[0]) if self.vars else TRUE
        return conj(l.formula() for l in lits)

    def __str__(self) -> str:
        return str(self.to_formula())


def set_partitions(k: int) -> Iterator[Tuple[int, ...]]:
    """Restricted-growth strings of length k in lexicographic order."""
    def rec(prefix, top):
        if len(prefix) == k:
            yield tuple(prefix)
            return
        for b in range(top + 2):
            yield from rec(prefix + [b], max(top, b))
    if k == 0:
        yield ()
    else:
        yield from rec([0], 0)


@lru_cache(maxsize=None)
def class_atoms(sig: Signature, n_classes: int) -> Tuple[ClassAtom, ...]:
    return tuple((rel, t) for rel, arity in sig for t in product(range(n_classes), repeat=arity))


def count_types(sig: Signature, k: int) -> int:
    return sum(1 << len(class_atoms(sig, max(bl) + 1 if bl else 0)) for bl in set_partitions(k))


@lru_cache(maxsize=64)
def enumerate_types(sig: Signature, vars: Tuple[str, ...]) -> Tuple[CompleteAtomicType, ...]:
    vars = tuple(vars)
    if len(set(vars)) != len(vars):
        raise ValueError(f"variables must be distinct: {vars}")
    total = count_types(sig, len(vars))
    if total > MAX_TYPES:
        raise BoundExceededError(f"{total} complete types over {len(vars)} variables exceeds {MAX_TYPES}")
    out = []
    for blocks in set_partitions(len(vars)):
        atoms = class_atoms(sig, max(blocks) + 1 if blocks else 0)
        for mask in range(1 << len(atoms)):
            true = frozenset(a for j, a in enumerate(atoms) if mask >> j & 1)
            out.append(CompleteAtomicType(sig, vars, blocks, true))
    return tuple(out)


def dimension(p: CompleteAtomicType, ys: Sequence[str]) -> int:
    ys = set(ys)
    fresh = {b for v, b in zip(p.vars, p.blocks) if v in ys}
    fresh -= {b for v, b in zip(p.vars, p.blocks) if v not in ys}
    return len(fresh)


def restrict(p: CompleteAtomicType, sig: Signature, xs: Sequence[str]) -> CompleteAtomicType:
    if not sig.issubset(p.sig):
        raise SignatureError(f"{sig} is not contained in {p.sig}")
    remap: Dict[int, int] = {}
    blocks = []
    for x in xs:
        b = p.block_of(x)
        blocks.append(remap.setdefault(b, len(remap)))
    true = frozenset((rel, tuple(remap[c] for c in t)) for rel, t in p.true_atoms
                     if rel in sig and all(c in remap for c in t))
    return CompleteAtomicType(sig, tuple(xs), tuple(blocks), true)


def compile_qf(f: Formula, index: Dict[str, int]) -> Callable:
    """Turn a quantifier-free formula into a predicate on (blocks, true_atoms)."""
    if isinstance(f, Atom):
        rel, pos = f.rel, tuple(index[a] for a in f.args)
        return lambda bl, at: (rel, tuple(bl[i] for i in pos)) in at
    if isinstance(f, Eq):
        i, j = index[f.left], index[f.right]
        return lambda bl, at: bl[i] == bl[j]
    if isinstance(f, Top):
        return lambda bl, at: True
    if isinstance(f, Not):
        g = compile_qf(f.arg, index)
        return lambda bl, at: not g(bl, at)
    if isinstance(f, (Exists, Compare)):
        raise EvaluationError(f"quantified formula where a quantifier-free one is required: {f}")
    g, h = compile_qf(f.left, index), compile_qf(f.right, index)
    if isinstance(f, And):
        return lambda bl, at: g(bl, at) and h(bl, at)
    if isinstance(f, Or):
        return lambda bl, at: g(bl, at) or h(bl, at)
    if isinstance(f, Implies):
        return lambda bl, at: (not g(bl, at)) or h(bl, at)
    if isinstance(f, Iff):
        return lambda bl, at: g(bl, at) == h(bl, at)
    raise TypeError(f"not a formula: {f!r}")


def _index(p_vars: Sequence[str], f: Formula, rename: Optional[Dict[str, str]]) -> Dict[str, int]:
    pos = {v: i for i, v in enumerate(p_vars)}
    index = {}
    for v in free_vars(f):
        target = rename.get(v, v) if rename else v
        if target not in pos:
            raise EvaluationError(f"variable {v} is not among the type's variables {tuple(p_vars)}")
        index[v] = pos[target]
    return index


def type_satisfies(p: CompleteAtomicType, f: Formula, rename: Optional[Dict[str, str]] = None) -> bool:
    """Truth of quantifier-free f in the canonical structure of p.

    ``rename`` maps free variables of f onto variables of p.
    """
    for rel in relations(f):
        if rel not in p.sig:
            raise SignatureError(f"relation {rel} is not in {p.sig}")
    return compile_qf(f, _index(p.vars, f, rename))(p.blocks, p.true_atoms)


def to_type_disjunction(f: Formula, sig: Signature, vars: Sequence[str]) -> List[CompleteAtomicType]:
    vars = tuple(vars)
    for rel in relations(f):
        if rel not in sig:
            raise SignatureError(f"relation {rel} is not in {sig}")
    pred = compile_qf(f, _index(vars, f, None))
    return [p for p in enumerate_types(sig, vars) if pred(p.blocks, p.true_atoms)]


def types_formula(types: Sequence[CompleteAtomicType], sig: Signature, vars: Sequence[str]) -> Formula:
    """Disjunction of types, shown as ``true`` when it covers every type and ``~true`` when empty."""
    if not types:
        return FALSE
    if len(types) == len(enumerate_types(sig, tuple(vars))):
        return TRUE
    order = {p: i for i, p in enumerate(enumerate_types(sig, tuple(vars)))}
    return disj(p.to_formula() for p in sorted(set(types), key=order.__getitem__))


def canonical_structure(p: CompleteAtomicType) -> Tuple[FiniteStructure, Dict[str, int]]:
    """One element per class (class c is element c+1) and the assignment realizing p."""
    interp = {rel: set() for rel in p.sig.names}
    for rel, t in p.true_atoms:
        interp[rel].add(tuple(c + 1 for c in t))
    asg = {v: b + 1 for v, b in zip(p.vars, p.blocks)}
    return FiniteStructure(p.n_classes, interp), asg


def realized_type(A: FiniteStructure, sig: Signature, vars: Sequence[str],
                  asg: Dict[str, int]) -> CompleteAtomicType:
    """The unique complete type that ``asg`` realizes in A."""
    remap: Dict[int, int] = {}
    blocks = tuple(remap.setdefault(asg[v], len(remap)) for v in vars)
    elem = {c: a for a, c in remap.items()}
    true = frozenset((rel, t) for rel, t in class_atoms(sig, len(remap))
                     if tuple(elem[c] for c in t) in A.interp.get(rel, ()))
    return CompleteAtomicType(sig, tuple(vars), blocks, true)

