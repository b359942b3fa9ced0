"""Lifted Bayesian networks: loading, validation, ranks and strata.

Strata are ordered parents first: stratum r holds every relation whose
longest chain of ancestors has length at most r, so each stratum is closed
under taking parents.  ``mp_rank`` reports the longest path leaving a
relation, which runs the other way.
"""
import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .atomic_types import enumerate_types, type_satisfies
from .errors import NetworkError, ParseError, SignatureError
from .formula import Formula, Signature, free_vars, is_quantifier_free, parse, relations, render
from .tables import enumerate_batch, truth_table

WORLD_CAP_BITS = 20


@dataclass(frozen=True)
class Rule:
    guard: Formula
    prob: Fraction


def guard_vars(arity: int) -> Tuple[str, ...]:
    return tuple(f"x{i}" for i in range(1, arity + 1))


def parse_probability(text) -> Fraction:
    try:
        p = Fraction(str(text))
    except (ValueError, ZeroDivisionError):
        raise NetworkError(f"bad probability {text!r}") from None
    if not 0 <= p <= 1:
        raise NetworkError(f"probability {p} outside [0,1]")
    return p


@dataclass(frozen=True, eq=False)
class LiftedNetwork:
    sig: Signature
    parents: Mapping[str, FrozenSet[str]]
    rules: Mapping[str, Tuple[Rule, ...]]

    def __post_init__(self):
        names = set(self.sig.names)
        if set(self.parents) != names or set(self.rules) != names:
            raise NetworkError("parents and rules must be given for every relation")
        object.__setattr__(self, "parents", {r: frozenset(self.parents[r]) for r in sorted(names)})
        object.__setattr__(self, "rules", {r: tuple(self.rules[r]) for r in sorted(names)})
        for rel in names:
            if not self.parents[rel] <= names:
                raise NetworkError(f"{rel} has undeclared parents {sorted(self.parents[rel] - names)}")
            if not self.rules[rel]:
                raise NetworkError(f"{rel} has no rules")
            for rule in self.rules[rel]:
                if not 0 <= rule.prob <= 1:
                    raise NetworkError(f"probability {rule.prob} of {rel} outside [0,1]")
                problem = scope_problem(self, rel, rule.guard)
                if problem:
                    raise NetworkError(problem)

    def __eq__(self, other):
        return (isinstance(other, LiftedNetwork) and self.sig == other.sig
                and self.parents == other.parents and self.rules == other.rules)

    def arity(self, rel: str) -> int:
        return self.sig.arity(rel)

    @cached_property
    def children(self) -> Dict[str, FrozenSet[str]]:
        return {r: frozenset(c for c in self.sig.names if r in self.parents[c]) for r in self.sig.names}

    @cached_property
    def depth(self) -> Dict[str, int]:
        """Length of the longest chain of ancestors above each relation."""
        out: Dict[str, int] = {}
        for rel in topological_order(self):
            out[rel] = max((out[p] + 1 for p in self.parents[rel]), default=0)
        return out

    def order(self) -> List[str]:
        """Parents first, then by name within a level."""
        return sorted(self.sig.names, key=lambda r: (self.depth[r], r))

    def ancestors(self, rel: str) -> FrozenSet[str]:
        out, stack = set(), list(self.parents[rel])
        while stack:
            p = stack.pop()
            if p not in out:
                out.add(p)
                stack.extend(self.parents[p])
        return frozenset(out)

    def closure(self, names: Iterable[str]) -> Signature:
        """Smallest parent-closed signature containing ``names``."""
        keep = set(names)
        for rel in list(keep):
            keep |= self.ancestors(rel)
        return self.sig.restrict(keep)

    def to_dict(self) -> dict:
        return {"relations": [
            {"name": rel, "arity": self.arity(rel), "parents": sorted(self.parents[rel]),
             "rules": [{"guard": render(r.guard), "prob": str(r.prob)} for r in self.rules[rel]]}
            for rel in self.order()]}

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def scope_problem(net: LiftedNetwork, rel: str, guard: Formula) -> Optional[str]:
    outside = relations(guard) - net.parents[rel]
    if outside:
        return f"guard {render(guard)} of {rel} mentions non-parent relations {sorted(outside)}"
    stray = set(free_vars(guard)) - set(guard_vars(net.arity(rel)))
    if stray:
        return f"guard {render(guard)} of {rel} has free variables {sorted(stray)} outside x1..x{net.arity(rel)}"
    return None


def from_dict(data: Mapping) -> LiftedNetwork:
    try:
        entries = data["relations"]
        sig = Signature(tuple((e["name"], int(e["arity"])) for e in entries))
    except (KeyError, TypeError, ValueError, SignatureError) as e:
        raise NetworkError(f"schema violation: {e}") from None
    parents, rules = {}, {}
    for e in entries:
        name = e["name"]
        if not isinstance(e.get("parents", []), list) or not isinstance(e.get("rules"), list):
            raise NetworkError(f"schema violation in relation {name}")
        parents[name] = frozenset(e.get("parents", []))
        rules[name] = []
        for item in e["rules"]:
            if not isinstance(item, Mapping) or "guard" not in item or "prob" not in item:
                raise NetworkError(f"schema violation in a rule of {name}")
            try:
                guard = parse(str(item["guard"]), sig)
            except ParseError as err:
                raise NetworkError(f"guard of {name} does not parse: {err}") from None
            rules[name].append(Rule(guard, parse_probability(item["prob"])))
    return LiftedNetwork(sig, parents, rules)


def loads(text: str) -> LiftedNetwork:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise NetworkError(f"not valid JSON: {e}") from None
    return from_dict(data)


def load(path) -> LiftedNetwork:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def find_cycle(net: LiftedNetwork) -> Optional[List[str]]:
    colour: Dict[str, int] = {}
    path: List[str] = []

    def visit(rel):
        colour[rel] = 1
        path.append(rel)
        for child in sorted(net.children[rel]):
            if colour.get(child) == 1:
                return path[path.index(child):] + [child]
            if child not in colour:
                found = visit(child)
                if found:
                    return found
        colour[rel] = 2
        path.pop()
        return None

    for rel in net.sig.names:
        if rel not in colour:
            found = visit(rel)
            if found:
                return found
    return None


def topological_order(net: LiftedNetwork) -> List[str]:
    cycle = find_cycle(net)
    if cycle:
        raise NetworkError(f"parent graph has a cycle: {' -> '.join(cycle)}")
    done, out = set(), []

    def visit(rel):
        if rel in done:
            return
        done.add(rel)
        for p in sorted(net.parents[rel]):
            visit(p)
        out.append(rel)

    for rel in net.sig.names:
        visit(rel)
    return out


def mp_rank(net: LiftedNetwork, rel: Optional[str] = None) -> int:
    """Length of the longest directed path starting at ``rel`` (or the maximum over relations)."""
    ranks: Dict[str, int] = {}
    for r in reversed(topological_order(net)):
        ranks[r] = max((ranks[c] + 1 for c in net.children[r]), default=0)
    if rel is None:
        return max(ranks.values(), default=0)
    return ranks[rel]


def strata(net: LiftedNetwork) -> List[Signature]:
    top = max(net.depth.values(), default=0)
    return [net.sig.restrict(r for r in net.sig.names if net.depth[r] <= level)
            for level in range(top + 1)]


def subnetwork(net: LiftedNetwork, sig: Signature) -> LiftedNetwork:
    if not sig.issubset(net.sig):
        raise NetworkError(f"{sig} is not part of the network signature")
    for rel in sig.names:
        if not net.parents[rel] <= set(sig.names):
            raise NetworkError(f"{sig} is not parent-closed: {rel} needs {sorted(net.parents[rel])}")
    return LiftedNetwork(sig, {r: net.parents[r] for r in sig.names}, {r: net.rules[r] for r in sig.names})


# -------------------------------------------------------------- validation


@dataclass(frozen=True)
class Violation:
    relation: str
    kind: str
    witness: str


@dataclass
class ValidationReport:
    violations: List[Violation] = field(default_factory=list)
    checked_sizes: Dict[str, int] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.violations


def _check_qf_guards(net: LiftedNetwork, rel: str) -> List[Violation]:
    psig = net.sig.restrict(net.parents[rel])
    xs = guard_vars(net.arity(rel))
    for p in enumerate_types(psig, xs):
        hits = [i for i, rule in enumerate(net.rules[rel]) if type_satisfies(p, rule.guard)]
        if len(hits) != 1:
            kind = "gap" if not hits else "overlap"
            detail = f"type {p}" + (f" satisfies guards {hits}" if hits else " satisfies no guard")
            return [Violation(rel, kind, detail)]
    return []


def _check_guards_by_enumeration(net: LiftedNetwork, rel: str, n_check: int,
                                 report: ValidationReport) -> List[Violation]:
    psig = net.sig.restrict(net.parents[rel])
    xs = guard_vars(net.arity(rel))
    for n in range(1, n_check + 1):
        bits = sum(n ** a for _, a in psig)
        if bits > WORLD_CAP_BITS:
            break
        batch = enumerate_batch(psig.relations, n, 0, 1 << bits)
        hits = sum(truth_table(batch, rule.guard, xs).astype(np.int8) for rule in net.rules[rel])
        bad = np.argwhere(hits != 1)
        report.checked_sizes[rel] = n
        if len(bad):
            w, *tup = (int(v) for v in bad[0])
            kind = "gap" if hits[tuple(bad[0])] == 0 else "overlap"
            A = batch.structure(w)
            tup = tuple(a + 1 for a in tup)
            return [Violation(rel, kind, f"structure {A.dumps()} tuple {tup}")]
    return []


def validate(net: LiftedNetwork, n_check: int = 4) -> ValidationReport:
    if n_check < 1:
        raise ValueError("n_check must be at least 1")
    report = ValidationReport()
    cycle = find_cycle(net)
    if cycle:
        report.violations.append(Violation(cycle[0], "cycle", " -> ".join(cycle)))
    for rel in net.sig.names:
        scoped = True
        for rule in net.rules[rel]:
            problem = scope_problem(net, rel, rule.guard)
            if problem:
                report.violations.append(Violation(rel, "scope", problem))
                scoped = False
        if not scoped:
            continue
        if all(is_quantifier_free(r.guard) for r in net.rules[rel]):
            report.violations.extend(_check_qf_guards(net, rel))
        else:
            report.violations.extend(_check_guards_by_enumeration(net, rel, n_check, report))
    return report


def build(entries: Sequence[Tuple[str, int, Sequence[str], Sequence[Tuple[str, object]]]]) -> LiftedNetwork:
    """Build from ``[(name, arity, parents, [(guard text, prob), ...]), ...]``."""
    return from_dict({"relations": [
        {"name": name, "arity": arity, "parents": list(parents),
         "rules": [{"guard": g, "prob": str(p)} for g, p in rules]}
        for name, arity, parents, rules in entries]})
