"""Count sampled worlds where a random formula and its elimination disagree, by domain size."""
import argparse

from cpl import catalog
from cpl.acceptance import failure_rate
from cpl.eliminator import eliminate
from cpl.generators import corpus


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--network", default="netgraph", choices=sorted(catalog.CATALOG))
    ap.add_argument("--count", type=int, default=40)
    ap.add_argument("--qr", type=int, default=2)
    ap.add_argument("--worlds", type=int, default=200)
    ap.add_argument("--sizes", type=int, nargs="+", default=[5, 10, 20, 40])
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    net = catalog.get(args.network)
    pairs = [(f, eliminate(net, f)) for f in corpus(args.seed, args.count, net.sig, qr=args.qr, free=("x",))]
    for n in args.sizes:
        rates = [failure_rate(net, f, g, n, args.worlds, seed=1000 * n + i) for i, (f, g) in enumerate(pairs)]
        print(f"n={n:<4} mean {sum(rates) / len(rates):.4f}  worst {max(rates):.4f}")


if __name__ == "__main__":
    main()
