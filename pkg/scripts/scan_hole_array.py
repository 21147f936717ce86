#!/usr/bin/env python3
"""Scan hole-array periods and report the SPP resonance per lattice mode.

Useful for picking a geometry whose substrate-side resonance lands on the
source wavelength.
"""

import argparse

import numpy as np

from spp_teleport import channel


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--period-start", type=float, default=600.0)
    parser.add_argument("--period-stop", type=float, default=800.0)
    parser.add_argument("--period-step", type=float, default=25.0)
    parser.add_argument("--hole-diameter", type=float, default=200.0)
    parser.add_argument("--eps-substrate", type=float, default=2.25)
    parser.add_argument("--modes", default="1,1;1,0",
                        help="semicolon-separated m1,m2 pairs")
    args = parser.parse_args()

    modes = []
    for part in args.modes.split(";"):
        m1, m2 = (int(x) for x in part.split(","))
        modes.append((m1, m2))

    table = channel.gold_dielectric_table()
    print(f"{'period_nm':>10} {'mode':>7} {'lambda_nm':>10} {'k_spp (rad/nm)':>15}")
    for period in np.arange(args.period_start, args.period_stop + args.period_step / 2,
                            args.period_step):
        for mode in modes:
            geom = channel.HoleArrayGeometry(
                period_nm=float(period),
                hole_diameter_nm=args.hole_diameter,
                mode=mode,
                eps_substrate=args.eps_substrate,
                metal=table,
            )
            try:
                lam = channel.resonance_wavelength(geom, interface="substrate")
            except channel.ResonanceSolveError as exc:
                print(f"{period:10.0f} {str(mode):>7} {'--':>10}  ({exc})")
                continue
            k = np.linalg.norm(channel.dispersion_match(geom, (0.0, 0.0)))
            print(f"{period:10.0f} {str(mode):>7} {lam:10.2f} {k:15.5f}")


if __name__ == "__main__":
    main()
