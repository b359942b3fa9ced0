"""Elimination cost tallies against formula length on the comparison-chain ladder."""
import argparse
import math

from cpl.acceptance import cost_ladder


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, nargs="+", default=[7, 8, 9])
    args = ap.parse_args()
    for seed in args.seeds:
        rows = cost_ladder(seed)
        print(f"seed {seed}")
        for size, tally in rows:
            print(f"  |phi|={size:<5} tally={tally:<6} tally/|phi|^2={tally / size ** 2:.4f}")
        (s0, t0), (s1, t1) = rows[0], rows[-1]
        print(f"  log-log slope {math.log(t1 / t0) / math.log(s1 / s0):.2f}")


if __name__ == "__main__":
    main()
