"""Overlap deficit of each approximation against the exact state along a line of constant AS."""
import argparse

from sgsim import SimParams, overlap, suggest_n_basis
from sgsim.approximations import APPROXIMATIONS
from sgsim.observables import RunPair
from sgsim.runs import approximation_pair, exact_records


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--AS", type=float, default=2.0)
    ap.add_argument("--z0", type=float, default=4.0)
    ap.add_argument("--A", type=float, nargs="+", default=[0.1, 0.25, 0.5, 1.0])
    args = ap.parse_args()

    names = list(APPROXIMATIONS)
    print("A       S       n   " + "  ".join(f"{n:>16s}" for n in names))
    for A in args.A:
        S = args.AS / A
        params = SimParams(A, S, args.z0, n_basis=suggest_n_basis(A, S))
        plus, minus = exact_records(params, False)
        exact = RunPair(plus.final_grid, minus.final_grid)
        deficits = [1 - overlap(exact, approximation_pair(n, params)) for n in names]
        ordered = all(a > b for a, b in zip(deficits, deficits[1:]))
        row = "  ".join(f"{d:16.3e}" for d in deficits)
        print(f"{A:<7g} {S:<7g} {params.n_basis:<3d} {row}  {'ordered' if ordered else 'NOT ordered'}")


if __name__ == "__main__":
    main()
