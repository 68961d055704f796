"""Degrees-of-freedom augmentation from mutual coupling.

Whitening a sub-Nyquist array's correlation by its (regularized) coupling
matrix lifts the evanescent tail of the eigenvalue staircase: superdirective
modes that the uncoupled model buries below the noise floor become usable.
The lighter the diagonal loading rho, the more modes clear the threshold.
"""

import numpy as np

from holomimo import (build_upa, coupled_correlation_exact, coupling_closed_form,
                      exact_correlation, isotropic_spectrum, regularize)


def count_above(ev, threshold_db):
    ev = np.clip(ev.real, 0.0, None)
    return int(np.count_nonzero(ev > ev.max() * 10.0 ** (threshold_db / 10.0)))


def main():
    g = build_upa(21, 21, 0.25)  # 5-wavelength aperture, quarter-wavelength spacing
    threshold_db = -40.0
    spectrum = isotropic_spectrum()

    corr = exact_correlation(g, spectrum)
    base = count_above(corr.eigenvalues(), threshold_db)
    print(f"{g.n_antennas} antennas on a {g.aperture[0]:g}-wavelength aperture, "
          f"threshold {threshold_db:g} dB below the top eigenvalue")
    print(f"\nuncoupled correlation: {base} eigenvalues above threshold")

    coupling = coupling_closed_form(g)
    print(f"\n{'rho':>8} {'above threshold':>16} {'gain':>6}")
    for rho in (0.1, 0.01, 0.001):
        white = coupled_correlation_exact(corr, regularize(coupling, rho))
        n = count_above(white.eigenvalues(), threshold_db)
        print(f"{rho:8g} {n:16d} {n - base:+6d}")
    print("\ncoupling-aware whitening adds usable spatial modes; the count grows")
    print("as rho shrinks because less loading preserves more superdirectivity")


if __name__ == "__main__":
    main()
