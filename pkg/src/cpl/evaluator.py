"""Reference semantics of CPL on finite structures.

Straightforward recursive evaluation with exact rational ratios.  This is
the oracle; :mod:`cpl.tables` is the vectorised route used at scale.
"""
import json
from fractions import Fraction
from itertools import product
from typing import Dict, FrozenSet, Iterable, Mapping, Set, Tuple

from .errors import EvaluationError
from .formula import (
    And, Atom, Compare, Eq, Exists, Formula, Iff, Implies, Not, Or, Side, Top, free_vars,
)

Assignment = Mapping[str, int]


class FiniteStructure:
    """A structure on the domain {1, ..., n}."""

    def __init__(self, n: int, interp: Mapping[str, Iterable] = ()):
        if n < 1:
            raise ValueError("domain size must be at least 1")
        self.n = n
        self.interp: Dict[str, FrozenSet[Tuple[int, ...]]] = {}
        for rel, tuples in dict(interp).items():
            ts = frozenset(tuple(t) if isinstance(t, (tuple, list)) else (t,) for t in tuples)
            for t in ts:
                if not all(isinstance(a, int) and 1 <= a <= n for a in t):
                    raise ValueError(f"tuple {t} of {rel} is outside the domain [1..{n}]")
            if len({len(t) for t in ts}) > 1:
                raise ValueError(f"tuples of {rel} have mixed lengths")
            self.interp[rel] = ts

    def __eq__(self, other):
        return isinstance(other, FiniteStructure) and (self.n, self.interp) == (other.n, other.interp)

    def __repr__(self):
        return f"FiniteStructure({self.n}, {self.to_json()['relations']})"

    def to_json(self) -> dict:
        return {"n": self.n,
                "relations": {rel: [list(t) for t in sorted(ts)] for rel, ts in sorted(self.interp.items())}}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    @classmethod
    def from_json(cls, data) -> "FiniteStructure":
        if isinstance(data, str):
            data = json.loads(data)
        return cls(int(data["n"]), data.get("relations", {}))


class _Evaluator:
    def __init__(self, A: FiniteStructure):
        self.A = A
        self.memo: Dict[tuple, bool] = {}
        self.fv: Dict[int, Tuple[str, ...]] = {}

    def free(self, f: Formula) -> Tuple[str, ...]:
        out = self.fv.get(id(f))
        if out is None:
            out = self.fv[id(f)] = free_vars(f)
        return out

    def truth(self, f: Formula, asg: Assignment) -> bool:
        try:
            key = (id(f), tuple(asg[v] for v in self.free(f)))
        except KeyError as e:
            raise EvaluationError(f"unassigned free variable {e.args[0]}") from None
        hit = self.memo.get(key)
        if hit is None:
            hit = self.memo[key] = self._truth(f, asg)
        return hit

    def _truth(self, f: Formula, asg: Assignment) -> bool:
        if isinstance(f, Atom):
            if f.rel not in self.A.interp:
                raise EvaluationError(f"structure does not interpret {f.rel}")
            return tuple(asg[a] for a in f.args) in self.A.interp[f.rel]
        if isinstance(f, Eq):
            return asg[f.left] == asg[f.right]
        if isinstance(f, Top):
            return True
        if isinstance(f, Not):
            return not self.truth(f.arg, asg)
        if isinstance(f, And):
            return self.truth(f.left, asg) and self.truth(f.right, asg)
        if isinstance(f, Or):
            return self.truth(f.left, asg) or self.truth(f.right, asg)
        if isinstance(f, Implies):
            return (not self.truth(f.left, asg)) or self.truth(f.right, asg)
        if isinstance(f, Iff):
            return self.truth(f.left, asg) == self.truth(f.right, asg)
        if isinstance(f, Exists):
            return any(self.truth(f.body, {**asg, **dict(zip(f.vars, b))})
                       for b in self.tuples(len(f.vars)))
        if isinstance(f, Compare):
            return self.compare(f, asg)
        raise TypeError(f"not a formula: {f!r}")

    def tuples(self, k: int):
        return product(range(1, self.A.n + 1), repeat=k)

    def compare(self, f: Compare, asg: Assignment) -> bool:
        a = b = c = d = 0
        for t in self.tuples(len(f.bound)):
            ext = {**asg, **dict(zip(f.bound, t))}
            if self.truth(f.den1, ext):
                b += 1
                a += self.truth(f.num1, ext)
            if self.truth(f.den2, ext):
                d += 1
                c += self.truth(f.num2, ext)
        if b == 0 or d == 0:
            return False
        left, right = Fraction(a, b), Fraction(c, d)
        if f.side is Side.LEFT:
            return f.r + left >= right
        return left >= right + f.r


def evaluate(A: FiniteStructure, f: Formula, asg: Assignment = None) -> bool:
    return _Evaluator(A).truth(f, dict(asg or {}))


def solution_set(A: FiniteStructure, f: Formula, asg: Assignment, ys: Tuple[str, ...]) -> Set[Tuple[int, ...]]:
    ev = _Evaluator(A)
    asg = dict(asg or {})
    return {t for t in ev.tuples(len(ys)) if ev.truth(f, {**asg, **dict(zip(ys, t))})}
