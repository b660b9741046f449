"""Exponential clustering in a gapped chain, extracted two ways.

The exact connected correlator <Z_0 Z_l> - <Z_0><Z_l> of the gapped test
chain decays exponentially.  The step-filtered extraction reproduces it
within its advertised error 2 exp(-gap^2 / 4 alpha) at every separation,
and a log-linear fit of the exact values yields the decay length.
"""

import numpy as np

from glt.filters_qa import (connected_correlation, decay_fit,
                            filtered_correlation, filtered_correlation_error_bound)
from glt.models import gapped_test_chain
from glt.operators import embed, spin_matrices
from glt.spectral import full_spectrum


def main():
    ham, _ = gapped_test_chain(10, 2.0)
    spec = full_spectrum(ham)
    print(f"gapped test chain L=10, h=2: gap = {spec.gap:.4f}")
    alpha = spec.gap ** 2 / 8
    print(f"filter width alpha = gap^2/8 = {alpha:.4f}\n")

    z = 2.0 * spin_matrices(0.5)[2].real  # Pauli Z
    print(f"{'l':>3} {'connected':>13} {'filtered':>13} {'|diff|':>10} {'bound':>10}")
    mags = []
    for l in range(1, 6):
        a = embed(z, [0], ham.indexer)
        b = embed(z, [l], ham.indexer)
        conn = connected_correlation(a, b, spec).real
        filt = filtered_correlation(a, b, spec, alpha).real
        bound = filtered_correlation_error_bound(a, b, spec.gap, alpha)
        mags.append(abs(conn))
        print(f"{l:>3} {conn:>13.4e} {filt:>13.4e} {abs(filt - conn):>10.1e} "
              f"{bound:>10.1e}")

    fit = decay_fit(np.arange(1, 6), mags)
    print(f"\nlog-linear fit: decay length xi = {fit.correlation_length:.3f}, "
          f"normalized residual = {fit.residual:.3f}")
    print("(on a ring of 10 the l=5 point already feels the other arc; "
          "larger rings fit cleaner)")


if __name__ == "__main__":
    main()
