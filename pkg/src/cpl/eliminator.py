"""Almost-sure quantifier elimination relative to a lifted network.

Every quantified subformula is replaced, bottom-up, by a disjunction of
complete atomic types over its free variables.  The types are taken over
the smallest parent-closed signature containing the relations of the input
formula, so their limit probabilities are those of the matching subnetwork.
"""
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .asymptotics import TypeProbTable, formula_level, is_noncritical
from .atomic_types import (
    CompleteAtomicType, dimension, enumerate_types, restrict, to_type_disjunction, types_formula,
)
from .errors import BoundExceededError, CriticalFormulaError
from .formula import (
    FALSE, TRUE, And, Compare, Exists, Formula, Iff, Implies, Not, Or, Side, Signature, free_vars,
    relations,
)
from .network import LiftedNetwork, Rule

DEFAULT_K = 4


@dataclass
class OpCounter:
    arith: int = 0
    num_cmp: int = 0
    lit_cmp: int = 0

    def add(self, other: "OpCounter") -> None:
        self.arith += other.arith
        self.num_cmp += other.num_cmp
        self.lit_cmp += other.lit_cmp

    def as_tuple(self) -> Tuple[int, int, int]:
        return self.arith, self.num_cmp, self.lit_cmp


@dataclass
class Group:
    """A type t over the free variables with its retained extensions over the bound ones."""

    t: CompleteAtomicType
    exts: List[CompleteAtomicType]
    dims: List[int]
    masses: List[Fraction]

    @property
    def top_dim(self) -> int:
        return max(self.dims)

    def top_mass(self) -> Fraction:
        d = self.top_dim
        return sum((m for m, e in zip(self.masses, self.dims) if e == d), Fraction(0))

    def top_count(self) -> int:
        return sum(1 for e in self.dims if e == self.top_dim)


@dataclass
class ComparisonAnalysis:
    comparison: Compare
    xs: Tuple[str, ...]
    groups: Dict[str, Dict[CompleteAtomicType, Group]] = field(default_factory=dict)
    gamma: Dict[CompleteAtomicType, Fraction] = field(default_factory=dict)
    gamma_star: Dict[CompleteAtomicType, Fraction] = field(default_factory=dict)
    index_set: List[CompleteAtomicType] = field(default_factory=list)
    ops: OpCounter = field(default_factory=OpCounter)
    result: Formula = FALSE


def cost_report(analysis: ComparisonAnalysis) -> Tuple[int, int, int]:
    return analysis.ops.as_tuple()


class Eliminator:
    def __init__(self, net: LiftedNetwork, k: int = DEFAULT_K, table: Optional[TypeProbTable] = None):
        self.net = net
        self.k = k
        self.table = table or TypeProbTable(net, k)
        self.ops = OpCounter()
        self.analyses: List[ComparisonAnalysis] = []

    # ------------------------------------------------------------- driver

    def _signature(self, f: Formula) -> Signature:
        return self.net.closure(relations(f))

    def _check(self, f: Formula, sig: Signature, level: Optional[int] = None) -> None:
        lvl = formula_level(f) if level is None else level
        if lvl > self.k:
            raise BoundExceededError(f"|free variables| + quantifier rank = {lvl} exceeds k={self.k}")
        ok, wit = is_noncritical(self.net, f, sig=sig, table=self.table, level=lvl)
        if not ok:
            raise CriticalFormulaError("formula is critical", wit)

    def eliminate_types(self, f: Formula, sig: Optional[Signature] = None
                        ) -> Tuple[Signature, Tuple[str, ...], List[CompleteAtomicType]]:
        """The complete types over free_vars(f) whose disjunction is the eliminated form."""
        sig = self._signature(f) if sig is None else sig
        self._check(f, self.net.sig)
        xs = free_vars(f)
        qf = self._elim(f, sig)
        return sig, xs, to_type_disjunction(qf, sig, xs)

    def eliminate(self, f: Formula) -> Formula:
        sig, xs, types = self.eliminate_types(f)
        return types_formula(types, sig, xs)

    def eliminate_guard(self, rel: str, guard: Formula) -> Formula:
        """Eliminate a guard against the subnetwork of its relation's ancestors."""
        sig = self.net.closure(relations(guard))
        level = self.net.arity(rel) + formula_level(guard) - len(free_vars(guard))
        try:
            self._check(guard, sig, level)
        except CriticalFormulaError as e:
            raise CriticalFormulaError(f"guard of {rel} is critical", e.witnesses) from None
        xs = free_vars(guard)
        types = to_type_disjunction(self._elim(guard, sig), sig, xs)
        return types_formula(types, sig, xs)

    def _elim(self, f: Formula, sig: Signature) -> Formula:
        if isinstance(f, Not):
            return Not(self._elim(f.arg, sig))
        if isinstance(f, (And, Or, Implies, Iff)):
            return type(f)(self._elim(f.left, sig), self._elim(f.right, sig))
        if isinstance(f, Exists):
            body = self._elim(f.body, sig)
            for y in reversed(f.vars):
                xs = free_vars(Exists((y,), body))
                body = self.eliminate_existential(body, y, xs, sig)
            return body
        if isinstance(f, Compare):
            subs = [self._elim(g, sig) for g in (f.num1, f.den1, f.num2, f.den2)]
            comp = Compare(f.r, f.side, *subs, f.bound)
            return self.eliminate_comparison(comp, free_vars(comp), sig).result
        return f

    # ---------------------------------------------------------- existential

    def eliminate_existential(self, body: Formula, y: str, xs: Sequence[str],
                              sig: Optional[Signature] = None) -> Formula:
        sig = self._signature(body) if sig is None else sig
        xs = tuple(xs)
        keep = []
        for q, exts in self._decompose(body, xs, (y,), sig).items():
            if any(self.table.msf_p(p) > 0 for p in exts):
                keep.append(q)
        return types_formula(keep, sig, xs)

    def _decompose(self, f: Formula, xs: Tuple[str, ...], ys: Tuple[str, ...], sig: Signature
                   ) -> Dict[CompleteAtomicType, List[CompleteAtomicType]]:
        """Types of f over xs+ys grouped by their restriction to xs; zero-mass types dropped."""
        groups: Dict[CompleteAtomicType, List[CompleteAtomicType]] = {}
        for p in to_type_disjunction(f, sig, xs + ys):
            q = restrict(p, sig, xs)
            if self.table.msf_p(q) == 0:
                continue
            groups.setdefault(q, [])
            if self.table.msf_p(p) > 0:
                groups[q].append(p)
        return {q: ps for q, ps in groups.items() if ps}

    # ----------------------------------------------------------- comparison

    def _groups(self, f: Formula, xs, ys, sig, ops: OpCounter) -> Dict[CompleteAtomicType, Group]:
        out = {}
        for t, exts in self._decompose(f, xs, ys, sig).items():
            mt = self.table.msf_p(t)
            masses, dims = [], []
            for p in exts:
                # msfP(p) is a product with one factor per relation literal, then one division
                ops.arith += p.size + 1
                masses.append(self.table.msf_p(p) / mt)
                dims.append(dimension(p, ys))
            out[t] = Group(t, exts, dims, masses)
        return out

    def _gamma(self, num: Dict, den: Dict, t: CompleteAtomicType, ops: OpCounter) -> Fraction:
        s = den[t]
        ops.num_cmp += len(s.dims)
        if t not in num:
            return Fraction(0)
        p = num[t]
        ops.num_cmp += len(p.dims) + 1
        if p.top_dim < s.top_dim:
            return Fraction(0)
        if s.top_dim == 0:
            ops.arith += 1
            return Fraction(p.top_count(), s.top_count())
        ops.arith += len(p.masses) + len(s.masses) + 1
        return p.top_mass() / s.top_mass()

    def eliminate_comparison(self, comp: Compare, xs: Sequence[str],
                             sig: Optional[Signature] = None) -> ComparisonAnalysis:
        xs = tuple(xs)
        ys = tuple(comp.bound)
        sig = self._signature(comp) if sig is None else sig
        an = ComparisonAnalysis(comp, xs)
        self.analyses.append(an)
        ops = an.ops
        theta = self._groups(comp.den1, xs, ys, sig, ops)
        theta_star = self._groups(comp.den2, xs, ys, sig, ops)
        if not theta or not theta_star:
            an.result = FALSE
            self.ops.add(ops)
            return an
        psi = self._groups(And(comp.num1, comp.den1), xs, ys, sig, ops)
        psi_star = self._groups(And(comp.num2, comp.den2), xs, ys, sig, ops)
        an.groups = {"psi": psi, "theta": theta, "psi_star": psi_star, "theta_star": theta_star}
        for t in theta:
            an.gamma[t] = self._gamma(psi, theta, t, ops)
        for t in theta_star:
            an.gamma_star[t] = self._gamma(psi_star, theta_star, t, ops)
        r = comp.r
        for t, g in an.gamma.items():
            ops.lit_cmp += t.size
            if t not in an.gamma_star:
                continue
            gs = an.gamma_star[t]
            ops.arith += 1
            ops.num_cmp += 1
            if comp.side is Side.LEFT:
                lhs, rhs, wit = r + g, gs, (r, gs, g)
            else:
                lhs, rhs, wit = g, gs + r, (r, g, gs)
            if lhs == rhs:
                raise CriticalFormulaError("comparison sits exactly on its threshold", [wit])
            if lhs > rhs:
                an.index_set.append(t)
        an.result = types_formula(an.index_set, sig, xs)
        self.ops.add(ops)
        return an


# ---------------------------------------------------------- module-level API


def eliminate(net: LiftedNetwork, f: Formula, k: int = DEFAULT_K,
              table: Optional[TypeProbTable] = None) -> Formula:
    return Eliminator(net, k, table).eliminate(f)


def eliminate_existential(net: LiftedNetwork, body: Formula, y: str, xs: Sequence[str],
                          table: Optional[TypeProbTable] = None) -> Formula:
    return Eliminator(net, table=table).eliminate_existential(body, y, xs)


def analyze_comparison(net: LiftedNetwork, comp: Compare, xs: Sequence[str],
                       table: Optional[TypeProbTable] = None, check: bool = True) -> ComparisonAnalysis:
    """The full analysis behind one comparison whose four subformulas are quantifier-free."""
    el = Eliminator(net, table=table)
    if check:
        el._check(comp, net.sig, len(xs) + formula_level(comp) - len(free_vars(comp)))
    return el.eliminate_comparison(comp, xs)


def eliminate_comparison(net: LiftedNetwork, comp: Compare, xs: Sequence[str],
                         table: Optional[TypeProbTable] = None, check: bool = True) -> Formula:
    return analyze_comparison(net, comp, xs, table, check).result


def parse_pattern(text: Optional[str], xs: Sequence[str]) -> Tuple[int, ...]:
    """``"distinct"`` or groups like ``"x=y,z=w"``; unnamed variables stay alone."""
    xs = tuple(xs)
    parent = {x: x for x in xs}

    def find(x):
        while parent[x] != x:
            x = parent[x]
        return x

    if text and text.strip() != "distinct":
        for group in text.split(","):
            names = [s.strip() for s in group.split("=") if s.strip()]
            for name in names:
                if name not in parent:
                    raise ValueError(f"pattern mentions {name}, which is not free in the formula")
            for a, b in zip(names, names[1:]):
                ra, rb = find(a), find(b)
                if ra != rb:
                    parent[max(ra, rb, key=xs.index)] = min(ra, rb, key=xs.index)
    remap: Dict[str, int] = {}
    return tuple(remap.setdefault(find(x), len(remap)) for x in xs)


def limit_probability(net: LiftedNetwork, f: Formula, pattern=None, k: int = DEFAULT_K,
                      table: Optional[TypeProbTable] = None) -> Fraction:
    """Limit of P_n(f(a)) for tuples a whose equalities follow ``pattern`` (default: all distinct)."""
    el = Eliminator(net, k, table)
    sig, xs, types = el.eliminate_types(f)
    blocks = pattern if isinstance(pattern, tuple) else parse_pattern(pattern, xs)
    return sum((el.table.msf_p(p) for p in types if p.blocks == blocks), Fraction(0))


def limit_table(net: LiftedNetwork, f: Formula, k: int = DEFAULT_K,
                table: Optional[TypeProbTable] = None) -> Dict[Tuple[int, ...], Fraction]:
    """Limit probability for every identity pattern of the free variables."""
    el = Eliminator(net, k, table)
    sig, xs, types = el.eliminate_types(f)
    out: Dict[Tuple[int, ...], Fraction] = defaultdict(Fraction)
    for p in enumerate_types(sig.restrict(()), xs):
        out[p.blocks] = Fraction(0)
    for p in types:
        out[p.blocks] += el.table.msf_p(p)
    return dict(out)


def quantifier_free_network(net: LiftedNetwork, k: int = DEFAULT_K) -> LiftedNetwork:
    table = TypeProbTable(net, k)
    rules = {rel: tuple(Rule(g, rule.prob) for g, rule in zip(table.qf_guards(rel), net.rules[rel]))
             for rel in net.order()}
    return LiftedNetwork(net.sig, net.parents, rules)
