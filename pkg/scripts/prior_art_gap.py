#!/usr/bin/env python3
"""Tabulate how far the leakage bound sits below the earlier energy and time bounds.

Prints, for a range of cutoffs at fixed coupling and time, the log10 of the
loose amplitude bound, its square, the earlier combined probability bound
and their ratio. Everything is evaluated in log space, so cutoffs in the
hundreds are fine.

    python scripts/prior_art_gap.py --g 1.7320508 --t 8 --lams 10 25 50 100
"""
import argparse
import math

from lgtrunc.bounds import loose_amplitude_bound, tong_combined, tong_energy_bound


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--g", type=float, default=math.sqrt(3))
    p.add_argument("--t", type=float, default=8.0)
    p.add_argument("--lam0", type=int, default=0)
    p.add_argument("--lams", type=int, nargs="+", default=[10, 25, 50, 75, 100])
    args = p.parse_args()

    print("lam,log10_amplitude,log10_probability,log10_prior_energy,log10_prior_combined,log10_gap")
    for lam in args.lams:
        amp = loose_amplitude_bound(args.g, lam, args.lam0).value
        prob = amp * amp
        energy = tong_energy_bound(args.g, lam).value
        prior = tong_combined(args.g, lam, args.t).value
        print(f"{lam},{amp.log10:.3f},{prob.log10:.3f},{energy.log10:.3f},{prior.log10:.3f},"
              f"{prior.log10 - prob.log10:.1f}")


if __name__ == "__main__":
    main()
