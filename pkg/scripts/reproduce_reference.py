"""Reference run at A=0.5, S=4, z0=4: spin flips, overlaps, flip-map peak, lobe widths."""
import argparse
import time

import numpy as np

from sgsim import SimParams, drift_time, free_drift, lobe_moments, overlap, probability_density
from sgsim import spin_flip_density, spin_flip_probability
from sgsim.approximations import APPROXIMATIONS
from sgsim.observables import RunPair
from sgsim.runs import approximation_pair, exact_records


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--A", type=float, default=0.5)
    ap.add_argument("--S", type=float, default=4.0)
    ap.add_argument("--z0", type=float, default=4.0)
    ap.add_argument("--n-basis", type=int, default=40)
    args = ap.parse_args()

    params = SimParams(args.A, args.S, args.z0, n_basis=args.n_basis)
    start = time.perf_counter()
    plus, minus = exact_records(params)
    pair = RunPair(plus.final_grid, minus.final_grid)
    print(f"exact evolution: {time.perf_counter() - start:.2f} s")
    print(f"p(+1/2 -> -1/2) = {spin_flip_probability(pair.plus, 0.5):.5f}")
    print(f"p(-1/2 -> +1/2) = {spin_flip_probability(pair.minus, -0.5):.5f}")

    print("\noverlap deficits 1 - O at t = 1")
    for name in APPROXIMATIONS:
        print(f"  {name:18s} {1 - overlap(pair, approximation_pair(name, params)):.5f}")

    td = drift_time(params)
    drifted = RunPair(free_drift(pair.plus, td, params), free_drift(pair.minus, td, params))
    flip = spin_flip_density(drifted.plus, 0.5)
    ix = int(np.argmin(np.abs(drifted.x)))
    print(f"\nafter drift (t_d = {td:g}): flip density max {flip.max():.3e}, on x=0 {flip[ix].max():.1e}")
    lobes = lobe_moments(probability_density(drifted), drifted.x, drifted.z, drifted.cell_area)
    for side in ("upper", "lower"):
        m = lobes[side]
        print(f"  {side} lobe: <z> = {m.mean_z:+.3f}, Var_z = {m.var_z:.4f}, Var_x = {m.var_x:.4f}")


if __name__ == "__main__":
    main()
