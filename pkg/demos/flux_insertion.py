"""Spectral flow under flux insertion: gap closing versus exact invariance.

Threading a flux theta through the ring (a single twisted cut) drags the
low levels of the spin-1/2 Heisenberg antiferromagnet into a crossing near
theta = pi, while the balanced two-cut family with angles (theta, -theta)
is unitarily equivalent to the untwisted ring for every theta: its
spectrum does not move at all.
"""

import numpy as np

from glt.lsm import flux_insertion_study
from glt.models import heisenberg_chain


def main():
    ham, charge = heisenberg_chain(8, 0.5, 1.0)
    grid = np.linspace(0.0, 2 * np.pi, 33)
    rep = flux_insertion_study(ham, charge, grid, k=3)

    print("single twist H(theta, 0): lowest levels\n")
    print(f"{'theta/pi':>9} {'E0':>10} {'E1':>10} {'gap':>9}")
    for i in range(0, len(grid), 4):
        e = rep.flow_single.results[i].energies
        print(f"{grid[i] / np.pi:>9.3f} {e[0]:>10.5f} {e[1]:>10.5f} {e[1] - e[0]:>9.5f}")

    print(f"\ngap at theta=0:        {rep.gap_at_zero:.5f}")
    print(f"minimum gap over flux: {rep.min_gap_single:.2e} "
          f"(ratio {rep.gap_ratio:.4f}; level crossing near theta = pi)")
    print(f"\nbalanced family H(theta, -theta):")
    print(f"  max spectrum deviation from H:  {rep.balanced_spectrum_deviation:.2e}")
    print(f"  H(2 pi, 0) vs H as matrices:    {rep.full_turn_matrix_deviation:.2e}")


if __name__ == "__main__":
    main()
