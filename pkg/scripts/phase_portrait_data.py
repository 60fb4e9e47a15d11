#!/usr/bin/env python3
"""Dump the {H = 0} separatrix and a pair of captured trajectories, the raw
data behind the phase-plane picture.

Example:
    python scripts/phase_portrait_data.py --lambda 0.5 2.0 --out portrait
"""

import argparse

from diracshoot import Params, Tolerances, attraction_report, level_set


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--m", type=float, default=1.0)
    ap.add_argument("--omega", type=float, default=0.5)
    ap.add_argument("--lambda", dest="lambdas", type=float, nargs="*", default=[0.5, 2.0])
    ap.add_argument("--out", default="portrait")
    args = ap.parse_args()

    p = Params(args.m, args.omega)
    ls = level_set(0.0, p)
    with open(f"{args.out}_separatrix.csv", "w") as fh:
        fh.write("piece,u,v\n")
        for i, piece in enumerate(ls.pieces):
            for u, v in piece:
                fh.write(f"{i},{u:.17g},{v:.17g}\n")
    print(f"separatrix ({sum(len(x) for x in ls.pieces)} points) -> {args.out}_separatrix.csv")

    for lam in args.lambdas:
        rep = attraction_report(lam, p, Tolerances())
        path = f"{args.out}_lambda{lam:g}.csv"
        with open(path, "w") as fh:
            fh.write("r,u,v,H\n")
            t = rep.trajectory
            for row in zip(t.r, t.u, t.v, t.H):
                fh.write(",".join(format(x, ".17g") for x in row) + "\n")
        print(
            f"lambda={lam:g}: captured at r={rep.entered_at:.3g}, "
            f"ends {rep.terminal_distance:.2e} from {rep.nearest_equilibrium}, "
            f"{rep.u_sign_alternations} u-sign alternations -> {path}"
        )


if __name__ == "__main__":
    main()
