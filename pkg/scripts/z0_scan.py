"""Exact spin-flip probability versus z0 next to the semiclassical estimate 1/(4 z0^2)."""
import argparse

from sgsim import SimParams, semiclassical_spin_flip, spin_flip_probability
from sgsim.runs import exact_records


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--A", type=float, default=0.5)
    ap.add_argument("--S", type=float, default=4.0)
    ap.add_argument("--z0", type=float, nargs="+", default=[3, 4, 6, 8, 16])
    args = ap.parse_args()

    print("z0     p(+->-)   p(-->+)   1/(4z0^2)  ratio+  ratio-")
    for z0 in args.z0:
        plus, minus = exact_records(SimParams(args.A, args.S, z0), False)
        up = spin_flip_probability(plus.final_grid, 0.5)
        down = spin_flip_probability(minus.final_grid, -0.5)
        ref = semiclassical_spin_flip(z0)
        print(f"{z0:<6g} {up:.5f}   {down:.5f}   {ref:.5f}    {up / ref:.3f}   {down / ref:.3f}")


if __name__ == "__main__":
    main()
