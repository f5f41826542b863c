"""Ball-and-line support comparison: localized kernel vs Gaussian KDE.

The dataset is a dense disk next to a sparse segment.  Thresholding the
localized Phi_n^2 density keeps the two structures apart; a Gaussian KDE
at a comparable bandwidth smears them into one blob and sweeps many more
points over the threshold.
"""
import argparse

import numpy as np

from cac import (KernelConfig, Schedule, build_eta_graph,
                 connected_components, default_eta_constant, density_field,
                 eta_for, gaussian_kde_baseline, gen_ball_line, support_set)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--m", type=int, default=1000)
    ap.add_argument("--delta", type=float, default=0.2,
                    help="gap between the disk and the segment")
    ap.add_argument("--seed", type=int, default=9)
    ap.add_argument("--n", type=float, default=7.0)
    ap.add_argument("--theta", type=float, default=0.25)
    ap.add_argument("--bandwidth", type=float, default=0.25)
    args = ap.parse_args()

    ds = gen_ball_line(args.m, args.delta, seed=args.seed)
    cfg = KernelConfig(n=args.n, q=2)

    field = density_field(ds.points, cfg)
    sup = support_set(field, args.theta)
    sched = Schedule(n_start=args.n, n_max=args.n, theta_init=args.theta)
    eta = eta_for(args.n, args.theta, default_eta_constant(ds.points, sched))
    comps = connected_components(
        build_eta_graph(ds.points, sup.members, eta))

    kde = gaussian_kde_baseline(ds.points, args.bandwidth)
    kde_sup = support_set(kde, args.theta)

    print(f"{args.m} points, disk + segment separated by delta={args.delta}")
    print(f"threshold {args.theta} * sample max, n={args.n}, "
          f"eta={eta:.3f}")
    print()
    print(f"  localized kernel: {len(sup.members):4d} members, "
          f"{len(comps)} graph components")
    print(f"  gaussian KDE    : {len(kde_sup.members):4d} members "
          f"(bandwidth {args.bandwidth})")
    print()
    per_comp = ", ".join(str(len(c.members)) for c in comps)
    print(f"component sizes: {per_comp}")
    print("the KDE keeps the low-density bridge region above threshold;")
    print("the localized kernel drops it, so the two shapes separate.")


if __name__ == "__main__":
    main()
