"""Exact and sampled P_n for a few formulas next to their limits."""
import argparse

from cpl import catalog
from cpl.eliminator import limit_probability
from cpl.formula import parse
from cpl.worlds import estimate_probability, exact_probability

CASES = [
    ("netgraph", "exists x,y : (x!=y & R(x,y) & ~R(y,x))", {}),
    ("netpq", "Q(x) & exists y : (x!=y & P(y) & ~Q(y))", {"x": 1}),
    ("netcoin", "[ ||P(y) : y=y||{y} >= 1/3 ]", {}),
    ("netexists", "Q(x)", {"x": 1}),
]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--exact-max", type=int, default=4)
    ap.add_argument("--sizes", type=int, nargs="+", default=[10, 40, 160])
    ap.add_argument("--samples", type=int, default=4000)
    args = ap.parse_args()
    for name, text, asg in CASES:
        net = catalog.get(name)
        f = parse(text, net.sig)
        print(f"{name}: {text}")
        print(f"  limit  {limit_probability(net, f)}")
        for n in range(1, args.exact_max + 1):
            print(f"  n={n:<4} exact  {float(exact_probability(net, n, f, asg)):.6f}")
        for n in args.sizes:
            p, hw = estimate_probability(net, n, f, asg, samples=args.samples, seed=n)
            print(f"  n={n:<4} sample {p:.6f} +/- {hw:.6f}")


if __name__ == "__main__":
    main()
