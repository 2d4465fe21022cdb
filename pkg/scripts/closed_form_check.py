"""Closed-form G against sampled time averages on random instances."""

import argparse

import numpy as np

from qergodic.hilbert import build_projector_overlaps
from qergodic.normality import deviation_G, deviation_G_empirical
from qergodic.sampling import SeedSpec, uniform_decomposition, uniform_state
from qergodic.spectra import generate_nonresonant_spectrum, time_horizon


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--instances", type=int, default=20)
    ap.add_argument("--max-dim", type=int, default=50)
    ap.add_argument("--cycles", type=int, default=1000)
    ap.add_argument("--samples", type=int, default=2 ** 17)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    print("  D    d  closed          empirical       rel_err")
    for i in range(args.instances):
        s = SeedSpec(1, i)
        D = int(rng.integers(3, args.max_dim + 1))
        d = int(rng.integers(1, D))
        spec = generate_nonresonant_spectrum(D, s.spawn(0))
        P = build_projector_overlaps(uniform_decomposition([d, D - d], s.spawn(1)), 0)
        psi = uniform_state(D, s.spawn(2))
        _, T = time_horizon(spec, args.cycles)
        g = deviation_G(psi, P)
        e = deviation_G_empirical(psi, spec, P, d, D, T, args.samples, s.spawn(3))
        print(f"{D:3d}  {d:3d}  {g:.8e}  {e:.8e}  {abs(e - g) / g:.2e}")


if __name__ == "__main__":
    main()
