"""CPL formulas: signature, AST, parser, printer and syntactic analysis.

Concrete syntax (loosest binding first)::

    formula := iff
    iff     := imp ( "<->" imp )*
    imp     := or ( "->" imp )?
    or      := and ( "|" and )*
    and     := unary ( "&" unary )*
    unary   := "~" unary | ("exists" | "forall") var ("," var)* ":" unary | primary
    primary := ident "(" var ("," var)* ")" | var "=" var | var "!=" var
             | "true" | "(" formula ")" | compare
    compare := "[" rat "+" ratio ">=" ratio "]"
             | "[" ratio ">=" ratio "+" rat "]"
             | "[" ratio ">=" rat "]"
    ratio   := "||" formula ":" formula "||" "{" var ("," var)* "}"
"""
import re
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Tuple

from .errors import ParseError, SignatureError

KEYWORDS = frozenset({"exists", "forall", "true"})


@dataclass(frozen=True)
class Signature:
    """A finite relational signature, kept sorted by relation name."""

    relations: Tuple[Tuple[str, int], ...] = ()

    def __post_init__(self):
        rels = tuple(sorted((str(n), int(a)) for n, a in self.relations))
        names = [n for n, _ in rels]
        if len(set(names)) != len(names):
            raise SignatureError(f"duplicate relation names in {names}")
        for n, a in rels:
            if a < 1:
                raise SignatureError(f"relation {n} has arity {a} < 1")
            if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_']*", n) or n in KEYWORDS:
                raise SignatureError(f"bad relation name {n!r}")
        object.__setattr__(self, "relations", rels)

    @classmethod
    def of(cls, **arities: int) -> "Signature":
        return cls(tuple(arities.items()))

    @classmethod
    def parse(cls, text: str) -> "Signature":
        """Read ``"P/1,R/2"``."""
        rels = []
        for item in filter(None, (s.strip() for s in text.split(","))):
            name, _, arity = item.partition("/")
            if not arity.isdigit():
                raise SignatureError(f"bad signature entry {item!r}")
            rels.append((name.strip(), int(arity)))
        return cls(tuple(rels))

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(n for n, _ in self.relations)

    def arity(self, name: str) -> int:
        for n, a in self.relations:
            if n == name:
                return a
        raise SignatureError(f"unknown relation {name}")

    def __contains__(self, name) -> bool:
        return any(n == name for n, _ in self.relations)

    def __iter__(self) -> Iterator[Tuple[str, int]]:
        return iter(self.relations)

    def __len__(self) -> int:
        return len(self.relations)

    def restrict(self, names: Iterable[str]) -> "Signature":
        keep = set(names)
        return Signature(tuple((n, a) for n, a in self.relations if n in keep))

    def issubset(self, other: "Signature") -> bool:
        return set(self.relations) <= set(other.relations)

    def __str__(self) -> str:
        return "{" + ",".join(f"{n}/{a}" for n, a in self.relations) + "}"


class Side(str, Enum):
    """LEFT: r + ||a:b|| >= ||c:d||.  RIGHT: ||a:b|| >= ||c:d|| + r."""

    LEFT = "left"
    RIGHT = "right"


class Formula:
    __slots__ = ()

    def __str__(self) -> str:
        return render(self)


@dataclass(frozen=True)
class Atom(Formula):
    rel: str
    args: Tuple[str, ...]


@dataclass(frozen=True)
class Eq(Formula):
    left: str
    right: str


@dataclass(frozen=True)
class Top(Formula):
    pass


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Iff(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Exists(Formula):
    vars: Tuple[str, ...]
    body: Formula


@dataclass(frozen=True)
class Compare(Formula):
    r: Fraction
    side: Side
    num1: Formula
    den1: Formula
    num2: Formula
    den2: Formula
    bound: Tuple[str, ...]


TRUE = Top()
FALSE = Not(TRUE)
BINARY = (And, Or, Implies, Iff)


def neq(x: str, y: str) -> Formula:
    return Not(Eq(x, y))


def forall(vs: Iterable[str], body: Formula) -> Formula:
    return Not(Exists(tuple(vs), Not(body)))


def conj(parts: Iterable[Formula]) -> Formula:
    out = None
    for p in parts:
        out = p if out is None else And(out, p)
    return TRUE if out is None else out


def disj(parts: Iterable[Formula]) -> Formula:
    out = None
    for p in parts:
        out = p if out is None else Or(out, p)
    return FALSE if out is None else out


def proportion_at_least(num: Formula, den: Formula, bound: Tuple[str, ...], r) -> Compare:
    """``[ ||num : den||{bound} >= r ]`` written out as a full comparison."""
    y = bound[0]
    return Compare(Fraction(r), Side.RIGHT, num, den, neq(y, y), Eq(y, y), tuple(bound))


# ---------------------------------------------------------------- analysis


def children(f: Formula) -> Tuple[Formula, ...]:
    if isinstance(f, Not):
        return (f.arg,)
    if isinstance(f, BINARY):
        return (f.left, f.right)
    if isinstance(f, Exists):
        return (f.body,)
    if isinstance(f, Compare):
        return (f.num1, f.den1, f.num2, f.den2)
    return ()


def subformulas(f: Formula) -> Iterator[Formula]:
    stack = [f]
    while stack:
        g = stack.pop()
        yield g
        stack.extend(reversed(children(g)))


def _free(f: Formula) -> FrozenSet[str]:
    if isinstance(f, Atom):
        return frozenset(f.args)
    if isinstance(f, Eq):
        return frozenset((f.left, f.right))
    if isinstance(f, Exists):
        return _free(f.body) - set(f.vars)
    if isinstance(f, Compare):
        out = frozenset()
        for g in children(f):
            out |= _free(g)
        return out - set(f.bound)
    out = frozenset()
    for g in children(f):
        out |= _free(g)
    return out


def free_vars(f: Formula) -> Tuple[str, ...]:
    """Free variables in lexicographic order."""
    return tuple(sorted(_free(f)))


def variables(f: Formula) -> FrozenSet[str]:
    """Every variable occurring anywhere in f, bound or free."""
    out = set()
    for g in subformulas(f):
        if isinstance(g, Atom):
            out.update(g.args)
        elif isinstance(g, Eq):
            out.update((g.left, g.right))
        elif isinstance(g, Exists):
            out.update(g.vars)
        elif isinstance(g, Compare):
            out.update(g.bound)
    return frozenset(out)


def quantifier_rank(f: Formula) -> int:
    if isinstance(f, Exists):
        return len(f.vars) + quantifier_rank(f.body)
    if isinstance(f, Compare):
        return len(f.bound) + max(quantifier_rank(g) for g in children(f))
    return max((quantifier_rank(g) for g in children(f)), default=0)


def threshold_constants(f: Formula) -> FrozenSet[Fraction]:
    return frozenset(g.r for g in subformulas(f) if isinstance(g, Compare))


def relations(f: Formula) -> FrozenSet[str]:
    return frozenset(g.rel for g in subformulas(f) if isinstance(g, Atom))


def is_quantifier_free(f: Formula) -> bool:
    return not any(isinstance(g, (Exists, Compare)) for g in subformulas(f))


def length(f: Formula) -> int:
    """Symbol count: one per connective, quantified variable, relation symbol and argument."""
    if isinstance(f, Atom):
        return 1 + len(f.args)
    if isinstance(f, Eq):
        return 3
    if isinstance(f, Top):
        return 1
    if isinstance(f, Exists):
        return len(f.vars) + length(f.body)
    if isinstance(f, Compare):
        return 1 + len(f.bound) + sum(length(g) for g in children(f))
    return 1 + sum(length(g) for g in children(f))


def check_signature(f: Formula, sig: Signature) -> None:
    for g in subformulas(f):
        if isinstance(g, Atom):
            if g.rel not in sig:
                raise SignatureError(f"unknown relation {g.rel}")
            if sig.arity(g.rel) != len(g.args):
                raise SignatureError(
                    f"arity mismatch for {g.rel}: expected {sig.arity(g.rel)}, got {len(g.args)}")


def rename_free(f: Formula, mapping: Dict[str, str]) -> Formula:
    """Substitute free variables; the caller guarantees no capture."""
    if not mapping:
        return f
    if isinstance(f, Atom):
        return Atom(f.rel, tuple(mapping.get(a, a) for a in f.args))
    if isinstance(f, Eq):
        return Eq(mapping.get(f.left, f.left), mapping.get(f.right, f.right))
    if isinstance(f, Top):
        return f
    if isinstance(f, Not):
        return Not(rename_free(f.arg, mapping))
    if isinstance(f, BINARY):
        return type(f)(rename_free(f.left, mapping), rename_free(f.right, mapping))
    inner = {k: v for k, v in mapping.items()
             if k not in (f.vars if isinstance(f, Exists) else f.bound)}
    if isinstance(f, Exists):
        return Exists(f.vars, rename_free(f.body, inner))
    return Compare(f.r, f.side, *(rename_free(g, inner) for g in children(f)), f.bound)


# ------------------------------------------------------------------ render

_PREC = {Iff: 1, Implies: 2, Or: 3, And: 4, Not: 5, Exists: 5}
_OPS = {Iff: "<->", Implies: "->", Or: "|", And: "&"}


def _prec(f: Formula) -> int:
    if isinstance(f, Not) and isinstance(f.arg, Eq):
        return 6
    return _PREC.get(type(f), 6)


def _wrap(f: Formula, tight: bool) -> str:
    s = render(f)
    return f"({s})" if tight else s


def render_rational(r: Fraction) -> str:
    r = Fraction(r)
    return str(r.numerator) if r.denominator == 1 else f"{r.numerator}/{r.denominator}"


def render(f: Formula) -> str:
    if isinstance(f, Atom):
        return f"{f.rel}({','.join(f.args)})"
    if isinstance(f, Eq):
        return f"{f.left}={f.right}"
    if isinstance(f, Top):
        return "true"
    if isinstance(f, Not):
        if isinstance(f.arg, Eq):
            return f"{f.arg.left}!={f.arg.right}"
        return "~" + _wrap(f.arg, _prec(f.arg) < 5)
    if isinstance(f, BINARY):
        p = _PREC[type(f)]
        if isinstance(f, Implies):
            left_tight, right_tight = _prec(f.left) <= p, _prec(f.right) < p
        else:
            left_tight, right_tight = _prec(f.left) < p, _prec(f.right) <= p
        return f"{_wrap(f.left, left_tight)} {_OPS[type(f)]} {_wrap(f.right, right_tight)}"
    if isinstance(f, Exists):
        return f"exists {', '.join(f.vars)} : " + _wrap(f.body, _prec(f.body) < 5)
    if isinstance(f, Compare):
        ys = "{" + ",".join(f.bound) + "}"
        r = render_rational(f.r)
        a = f"||{render(f.num1)} : {render(f.den1)}||{ys}"
        y = f.bound[0]
        if f.side is Side.RIGHT and f.num2 == neq(y, y) and f.den2 == Eq(y, y):
            return f"[ {a} >= {r} ]"
        b = f"||{render(f.num2)} : {render(f.den2)}||{ys}"
        if f.side is Side.LEFT:
            return f"[ {r} + {a} >= {b} ]"
        return f"[ {a} >= {b} + {r} ]"
    raise TypeError(f"not a formula: {f!r}")


# ------------------------------------------------------------------- parse

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<IFF><->) | (?P<IMP>->) | (?P<DBAR>\|\|) | (?P<BAR>\|) | (?P<AND>&)
  | (?P<NEQ>!=) | (?P<GE>>=) | (?P<EQ>=) | (?P<NOT>~) | (?P<PLUS>\+) | (?P<MINUS>-)
  | (?P<LP>\() | (?P<RP>\)) | (?P<LB>\[) | (?P<RB>\]) | (?P<LC>\{) | (?P<RC>\})
  | (?P<COMMA>,) | (?P<COLON>:) | (?P<SLASH>/)
  | (?P<NUM>\d+(?:\.\d+)?) | (?P<ID>[A-Za-z_][A-Za-z0-9_']*)
""", re.VERBOSE)


def _tokenize(text: str) -> List[Tuple[str, str, int]]:
    out, pos = [], 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        if m.lastgroup != "ws":
            out.append((m.lastgroup, m.group(), pos))
        pos = m.end()
    out.append(("EOF", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str, sig: Optional[Signature]):
        self.toks = _tokenize(text)
        self.i = 0
        self.sig = sig
        self.seen_arity: Dict[str, int] = {}

    @property
    def kind(self) -> str:
        return self.toks[self.i][0]

    def peek(self, k: int = 1) -> str:
        return self.toks[min(self.i + k, len(self.toks) - 1)][0]

    def error(self, message: str):
        raise ParseError(message, self.toks[self.i][2])

    def take(self, kind: str) -> str:
        if self.kind != kind:
            found = self.toks[self.i][1] or "end of input"
            self.error(f"expected {kind}, found {found!r}")
        value = self.toks[self.i][1]
        self.i += 1
        return value

    def accept(self, kind: str) -> bool:
        if self.kind == kind:
            self.i += 1
            return True
        return False

    def var(self) -> str:
        if self.kind == "ID" and self.toks[self.i][1] in KEYWORDS:
            self.error(f"keyword {self.toks[self.i][1]!r} used as a variable")
        return self.take("ID")

    def var_list(self, distinct: bool) -> Tuple[str, ...]:
        start = self.toks[self.i][2]
        vs = [self.var()]
        while self.accept("COMMA"):
            vs.append(self.var())
        if distinct and len(set(vs)) != len(vs):
            raise ParseError(f"repeated bound variable in {vs}", start)
        return tuple(vs)

    def formula(self) -> Formula:
        left = self.imp()
        while self.accept("IFF"):
            left = Iff(left, self.imp())
        return left

    def imp(self) -> Formula:
        left = self.or_()
        if self.accept("IMP"):
            return Implies(left, self.imp())
        return left

    def or_(self) -> Formula:
        left = self.and_()
        while self.accept("BAR"):
            left = Or(left, self.and_())
        return left

    def and_(self) -> Formula:
        left = self.unary()
        while self.accept("AND"):
            left = And(left, self.unary())
        return left

    def unary(self) -> Formula:
        if self.accept("NOT"):
            return Not(self.unary())
        if self.kind == "ID" and self.toks[self.i][1] in ("exists", "forall"):
            universal = self.take("ID") == "forall"
            vs = self.var_list(distinct=True)
            self.take("COLON")
            body = self.unary()
            return forall(vs, body) if universal else Exists(vs, body)
        return self.primary()

    def primary(self) -> Formula:
        if self.accept("LP"):
            f = self.formula()
            self.take("RP")
            return f
        if self.kind == "LB":
            return self.compare()
        if self.kind != "ID":
            self.error(f"unexpected {self.toks[self.i][1] or 'end of input'!r}")
        name = self.toks[self.i][1]
        if name == "true":
            self.i += 1
            return TRUE
        if self.peek() == "LP":
            return self.atom()
        x = self.var()
        if self.accept("EQ"):
            return Eq(x, self.var())
        if self.accept("NEQ"):
            return neq(x, self.var())
        self.error(f"expected '=', '!=' or '(' after {x!r}")

    def atom(self) -> Formula:
        pos = self.toks[self.i][2]
        name = self.take("ID")
        self.take("LP")
        args = self.var_list(distinct=False)
        self.take("RP")
        if self.sig is not None:
            if name not in self.sig:
                raise ParseError(f"unknown relation {name}", pos)
            if self.sig.arity(name) != len(args):
                raise ParseError(
                    f"arity mismatch for {name}: expected {self.sig.arity(name)}, got {len(args)}", pos)
        elif self.seen_arity.setdefault(name, len(args)) != len(args):
            raise ParseError(f"arity mismatch for {name}", pos)
        return Atom(name, args)

    def rational(self) -> Fraction:
        if self.kind == "MINUS":
            self.error("negative threshold")
        text = self.take("NUM")
        if "." in text:
            return Fraction(text)
        if self.accept("SLASH"):
            den = int(self.take("NUM"))
            if den == 0:
                self.error("zero denominator")
            return Fraction(int(text), den)
        return Fraction(int(text))

    def ratio(self):
        self.take("DBAR")
        num = self.formula()
        self.take("COLON")
        den = self.formula()
        self.take("DBAR")
        self.take("LC")
        bound = self.var_list(distinct=True)
        self.take("RC")
        return num, den, bound

    def compare(self) -> Formula:
        self.take("LB")
        if self.kind in ("NUM", "MINUS"):
            r = self.rational()
            self.take("PLUS")
            n1, d1, b1 = self.ratio()
            self.take("GE")
            pos = self.toks[self.i][2]
            n2, d2, b2 = self.ratio()
            side = Side.LEFT
        else:
            n1, d1, b1 = self.ratio()
            self.take("GE")
            if self.kind in ("NUM", "MINUS"):
                r = self.rational()
                self.take("RB")
                return proportion_at_least(n1, d1, b1, r)
            pos = self.toks[self.i][2]
            n2, d2, b2 = self.ratio()
            if self.kind == "MINUS":
                self.error("negative threshold")
            self.take("PLUS")
            r = self.rational()
            side = Side.RIGHT
        self.take("RB")
        if b1 != b2:
            raise ParseError(f"both ratios must bind the same variables, got {b1} and {b2}", pos)
        return Compare(r, side, n1, d1, n2, d2, b1)


def parse(text: str, sig: Optional[Signature] = None) -> Formula:
    """Parse text; with ``sig`` given, relation names and arities are checked against it."""
    p = _Parser(text, sig)
    f = p.formula()
    if p.kind != "EOF":
        p.error(f"unexpected {p.toks[p.i][1]!r}")
    return f
