"""``cpl``: command-line access to parsing, elimination, exact and sampled probabilities.

Exit status is 0 on success, 1 on a domain error (critical formula, invalid
network, exceeded bound) and 2 on a usage error, which includes formula text
that does not parse against the network's signature.
"""
import argparse
import json
import os
import sys
from fractions import Fraction
from typing import Dict, List, Optional, Sequence

from . import catalog
from .acceptance import CHECKS, run_all
from .asymptotics import critical_numbers, epsilon_margin, is_noncritical
from .eliminator import DEFAULT_K, Eliminator, cost_report, limit_table, parse_pattern, quantifier_free_network
from .errors import CPLError, ParseError, SignatureError
from .formula import free_vars, parse, quantifier_rank, render
from .network import LiftedNetwork, load, validate
from .worlds import DEFAULT_CAP_BITS, estimate_probability, exact_probability, sample


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _num(value, as_float: bool):
    if isinstance(value, Fraction):
        return float(value) if as_float else str(value)
    if isinstance(value, float):
        return "inf" if value == float("inf") else value
    return value


def _load_network(ref: Optional[str]) -> LiftedNetwork:
    if ref is None:
        raise UsageError("--network is required")
    if os.path.exists(ref):
        return load(ref)
    name = os.path.splitext(os.path.basename(ref))[0]
    if name in catalog.CATALOG:
        return catalog.get(name)
    raise UsageError(f"no network file {ref!r} (built-in names: {', '.join(sorted(catalog.CATALOG))})")


def _formula_text(args) -> str:
    if args.formula_file:
        with open(args.formula_file, encoding="utf-8") as fh:
            return fh.read().strip()
    if args.formula is None:
        raise UsageError("one of --formula or --formula-file is required")
    return args.formula


def _formula(args, net: Optional[LiftedNetwork] = None):
    return parse(_formula_text(args), net.sig if net is not None else None)


def _assignment(text: Optional[str]) -> Dict[str, int]:
    out: Dict[str, int] = {}
    for item in (text or "").split(","):
        if not item.strip():
            continue
        var, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"--assign expects var=element, got {item!r}")
        try:
            out[var.strip()] = int(value)
        except ValueError:
            raise UsageError(f"--assign element {value!r} is not an integer") from None
    return out


def _require(args, *names):
    for name in names:
        if getattr(args, name) is None:
            raise UsageError(f"--{name.replace('_', '-')} is required")


# ----------------------------------------------------------- subcommands


def cmd_parse(args):
    net = _load_network(args.network) if args.network else None
    f = _formula(args, net)
    return render(f), {"result": render(f), "free_vars": list(free_vars(f)), "qr": quantifier_rank(f)}


def cmd_qr(args):
    f = _formula(args)
    return str(quantifier_rank(f)), {"result": quantifier_rank(f)}


def cmd_eliminate(args):
    net = _load_network(args.network)
    f = _formula(args, net)
    el = Eliminator(net, k=args.k)
    out = el.eliminate(f)
    lines = [render(out)]
    data = {"result": render(out)}
    if args.show_cost:
        arith, num_cmp, lit_cmp = el.ops.as_tuple()
        lines.append(f"cost: arith={arith} num_cmp={num_cmp} lit_cmp={lit_cmp} comparisons={len(el.analyses)}")
        data["cost"] = {"arith": arith, "num_cmp": num_cmp, "lit_cmp": lit_cmp,
                        "comparisons": [list(cost_report(a)) for a in el.analyses]}
    if args.limit or args.pattern:
        xs = free_vars(f)
        blocks = parse_pattern(args.pattern, xs)
        table = limit_table(net, f, k=args.k, table=el.table)
        d = table.get(blocks, Fraction(0))
        lines.append(f"limit: {_num(d, args.float)}")
        data["limit"] = _num(d, args.float)
        data["pattern"] = list(blocks)
    return "\n".join(lines), data


def _witness_text(w) -> str:
    r, a, b = w
    return f"(r={r}, alpha={a}, beta={b})"


def cmd_check(args):
    net = _load_network(args.network)
    f = _formula(args, net)
    ok, witnesses = is_noncritical(net, f)
    if not ok:
        text = "critical\n" + "\n".join(_witness_text(w) for w in witnesses)
        data = {"result": "critical", "witnesses": [[str(v) for v in w] for w in witnesses]}
        return text, data, 1
    eps = epsilon_margin(net, f)
    return (f"noncritical\nepsilon: {_num(eps, args.float)}",
            {"result": "noncritical", "epsilon": _num(eps, args.float)})


def cmd_critical(args):
    net = _load_network(args.network)
    crit = critical_numbers(net, args.m)
    values = sorted(crit.explicit)
    lines = [" ".join(str(_num(v, args.float)) for v in values),
             f"plus every l'/l with 0 <= l' <= l <= {crit.farey_order}"]
    data = {"result": [_num(v, args.float) for v in values], "farey_order": crit.farey_order, "m": args.m}
    return "\n".join(lines), data


def cmd_prob(args):
    _require(args, "n")
    net = _load_network(args.network)
    f = _formula(args, net)
    p = exact_probability(net, args.n, f, _assignment(args.assign), cap_bits=args.cap, threads=args.threads)
    return str(_num(p, args.float)), {"result": _num(p, args.float)}


def cmd_sample(args):
    _require(args, "n")
    net = _load_network(args.network)
    A = sample(net, args.n, args.seed)
    return A.dumps(), {"result": A.to_json()}


def cmd_estimate(args):
    _require(args, "n")
    net = _load_network(args.network)
    f = _formula(args, net)
    p, hw = estimate_probability(net, args.n, f, _assignment(args.assign), samples=args.samples, seed=args.seed)
    return f"{p:.6f} +/- {hw:.6f}", {"result": p, "half_width": hw, "samples": args.samples}


def cmd_qfnet(args):
    net = _load_network(args.network)
    out = quantifier_free_network(net, k=args.k)
    return out.dumps(), {"result": out.to_dict()}


def cmd_validate(args):
    net = _load_network(args.network)
    report = validate(net, n_check=args.n or 4)
    lines = [f"{v.relation}: {v.kind}: {v.witness}" for v in report.violations] or ["ok"]
    data = {"result": "ok" if report.ok else "invalid",
            "violations": [{"relation": v.relation, "kind": v.kind, "witness": v.witness}
                           for v in report.violations]}
    return "\n".join(lines), data, 0 if report.ok else 1


def cmd_verify(args):
    numbers = range(1, len(CHECKS) + 1)
    if args.only:
        try:
            numbers = [int(s) for s in args.only.split(",")]
        except ValueError:
            raise UsageError("--only expects a comma-separated list of criterion numbers") from None
        if any(not 1 <= i <= len(CHECKS) for i in numbers):
            raise UsageError(f"criteria are numbered 1..{len(CHECKS)}")
    results = run_all(numbers)
    data = {"result": all(r.passed for r in results),
            "criteria": [{"number": r.number, "name": r.name, "passed": r.passed, "detail": r.detail}
                         for r in results]}
    return "\n".join(r.line() for r in results), data, 0 if data["result"] else 1


COMMANDS = {
    "parse": (cmd_parse, "parse a formula and print it in canonical form"),
    "qr": (cmd_qr, "print the quantifier rank of a formula"),
    "eliminate": (cmd_eliminate, "almost-sure quantifier elimination"),
    "check": (cmd_check, "noncriticality check with witnesses"),
    "critical": (cmd_critical, "list the m-critical numbers"),
    "prob": (cmd_prob, "exact probability at domain size n"),
    "sample": (cmd_sample, "draw one world"),
    "estimate": (cmd_estimate, "Monte-Carlo probability estimate"),
    "qfnet": (cmd_qfnet, "asymptotically equivalent quantifier-free network"),
    "validate": (cmd_validate, "check guards for gaps and overlaps"),
    "verify": (cmd_verify, "run the acceptance suite"),
}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--network", help="network JSON file or a built-in name such as netcoin")
    group = common.add_mutually_exclusive_group()
    group.add_argument("--formula")
    group.add_argument("--formula-file")
    common.add_argument("--n", type=int)
    common.add_argument("--assign", help="var=element,...")
    common.add_argument("--pattern", help='"distinct" or equalities like "x=y"')
    common.add_argument("--limit", action="store_true", help="also print the limit probability")
    common.add_argument("--show-cost", action="store_true")
    common.add_argument("--m", type=int, default=2)
    common.add_argument("--k", type=int, default=DEFAULT_K)
    common.add_argument("--samples", type=int, default=10000)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--json", action="store_true")
    common.add_argument("--float", action="store_true")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--cap", type=int, default=DEFAULT_CAP_BITS, help="world-count cap exponent")
    common.add_argument("--only", help="verify: comma-separated criterion numbers")
    parser = _Parser(prog="cpl", description="Conditional probability logic over lifted Bayesian networks.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, (_, help_text) in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=help_text)
    return parser


def run(argv: Sequence[str], out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv))
        result = COMMANDS[args.command][0](args)
    except UsageError as e:
        print(f"cpl: usage error: {e}", file=err)
        return 2
    except (OSError, ValueError, ParseError, SignatureError) as e:
        print(f"cpl: {e}", file=err)
        return 2
    except CPLError as e:
        if "--json" in argv:
            payload = {"result": None, "error": type(e).__name__, "message": str(e)}
            print(json.dumps(payload), file=out)
        print(f"cpl: {type(e).__name__}: {e}", file=err)
        return 1
    text, data, *rest = result
    code = rest[0] if rest else 0
    if args.json:
        print(json.dumps({"command": args.command, **data}, sort_keys=True), file=out)
    else:
        print(text, file=out)
    return code


def main(argv: Optional[List[str]] = None) -> None:
    sys.exit(run(sys.argv[1:] if argv is None else argv))


if __name__ == "__main__":
    main()
