"""Spatial correlation matrices and random channel realizations.

The exact correlation is the upper-hemisphere average of the plane-wave outer
product under the angular spectrum; coupling enters as a whitening of that
matrix.  The Fourier model replaces the exact correlation by independent
beamspace entries with the per-cell variances, which is what makes large
apertures tractable.  All randomness flows through counter-based Philox
substreams keyed by (seed, realization index), so draws are reproducible and
order-independent.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._kernels import phase_kernel
from .coupling import CouplingMatrix, spd_inv_sqrt, spd_sqrt
from .fourier import FourierBasis, dof_prime
from .geometry import CONSTANTS, ArrayGeometry, PhysicalConstants
from .spectra import AngularSpectrum, HemisphereQuadrature, quadrature_for

__all__ = [
    "CorrelationMatrix",
    "ChannelModel",
    "exact_correlation",
    "coupled_correlation_exact",
    "fourier_correlation",
    "fourier_model",
    "exact_model",
    "iid_model",
    "sample_fourier_channel",
    "sample_exact_channel",
    "substream",
    "complex_normal",
]


def substream(seed: int, index: int = 0) -> np.random.Generator:
    """Independent generator for realization ``index`` of stream ``seed``."""
    return np.random.Generator(np.random.Philox(key=int(seed)).jumped(int(index)))


def complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    """Standard circularly symmetric complex normal entries."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


@dataclass(frozen=True)
class CorrelationMatrix:
    """Hermitian N x N spatial correlation with provenance."""

    matrix: np.ndarray
    kind: str  # "exact" | "coupled-exact" | "fourier-uncoupled" | "fourier-coupled"
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def n_antennas(self) -> int:
        return self.matrix.shape[0]

    def eigenvalues(self) -> np.ndarray:
        """Real eigenvalues in decreasing order."""
        return np.linalg.eigvalsh(self.matrix)[::-1]


def exact_correlation(geometry: ArrayGeometry, spectrum: AngularSpectrum,
                      quadrature: HemisphereQuadrature | None = None,
                      constants: PhysicalConstants = CONSTANTS) -> CorrelationMatrix:
    """Upper-hemisphere correlation (1/2pi) * integral of E exp(i k . (r - s)).

    The diagonal equals the spectrum's upper-hemisphere mass over 2pi: one for
    hemisphere-balanced spectra, two for one-sided caps (all the power arrives
    from above).
    """
    q = quadrature if quadrature is not None else quadrature_for(spectrum)
    theta, phi = q.grids()
    w = q.weights() * spectrum(theta, phi) / (2.0 * np.pi)
    kx = constants.wavenumber * np.sin(theta) * np.cos(phi)
    ky = constants.wavenumber * np.sin(theta) * np.sin(phi)
    m = phase_kernel(geometry.positions, kx, ky, w)
    m = 0.5 * (m + m.conj().T)
    return CorrelationMatrix(m, "exact", {"spectrum": spectrum.name})


def coupled_correlation_exact(correlation: CorrelationMatrix,
                              coupling: CouplingMatrix) -> CorrelationMatrix:
    """Coupling-whitened correlation C^{-1/2} R C^{-1/2}."""
    f = spd_inv_sqrt(coupling)
    m = f @ correlation.matrix @ f
    m = 0.5 * (m + m.conj().T)
    meta = dict(correlation.meta)
    meta["rho"] = coupling.rho
    return CorrelationMatrix(m, "coupled-exact", meta)


def fourier_correlation(basis: FourierBasis) -> CorrelationMatrix:
    """Low-rank model correlation V diag(N sigma2) V^H."""
    lam = basis.n_antennas * basis.variances
    m = (basis.matrix * lam) @ basis.matrix.conj().T
    m = 0.5 * (m + m.conj().T)
    return CorrelationMatrix(m, f"fourier-{basis.flavor}", {"spectrum": basis.spectrum.name})


@dataclass
class ChannelModel:
    """A recipe for drawing i.i.d.-in-time channel realizations.

    kind "fourier" draws beamspace matrices diag(sqrt(N_r sigma_r)) W
    diag(sqrt(N_t sigma_t)); kind "exact" right-multiplies an i.i.d. matrix by
    a fixed transmit shaping factor; kind "iid" is the white reference.
    """

    kind: str
    n_rx: int
    n_tx: int
    label: str = ""
    rx_basis: FourierBasis | None = None
    tx_basis: FourierBasis | None = None
    tx_shaping: np.ndarray | None = None

    def realize(self, seed: int, index: int = 0) -> np.ndarray:
        rng = substream(seed, index)
        if self.kind == "fourier":
            amp_r = np.sqrt(self.rx_basis.n_antennas * self.rx_basis.variances)
            amp_t = np.sqrt(self.tx_basis.n_antennas * self.tx_basis.variances)
            w = complex_normal(rng, (amp_r.size, amp_t.size))
            return amp_r[:, None] * w * amp_t[None, :]
        if self.kind == "iid":
            return complex_normal(rng, (self.n_rx, self.n_tx))
        if self.kind == "exact":
            g = complex_normal(rng, (self.n_rx, self.tx_shaping.shape[0]))
            return g @ self.tx_shaping
        raise ValueError(f"unknown channel kind {self.kind!r}")

    def predicted_dof(self) -> int:
        """Spatial multiplexing gain the model supports at high SNR."""
        if self.kind == "fourier":
            return min(dof_prime(self.rx_basis.lattice, self.rx_basis.spectrum),
                       dof_prime(self.tx_basis.lattice, self.tx_basis.spectrum))
        return min(self.n_rx, self.n_tx)


def fourier_model(rx_basis: FourierBasis, tx_basis: FourierBasis,
                  label: str = "") -> ChannelModel:
    """Beamspace channel with independent entries of the per-cell variances."""
    return ChannelModel("fourier", rx_basis.n_points, tx_basis.n_points,
                        label or f"fourier-{tx_basis.flavor}",
                        rx_basis=rx_basis, tx_basis=tx_basis)


def iid_model(n_rx: int, n_tx: int) -> ChannelModel:
    return ChannelModel("iid", n_rx, n_tx, "iid")


def exact_model(tx_correlation: CorrelationMatrix,
                coupling: CouplingMatrix | None = None,
                n_rx: int | None = None,
                normalize: str = "transmit",
                element_factor: float = 1.0,
                label: str = "") -> ChannelModel:
    """i.i.d.-receive channel with transmit correlation and optional coupling.

    The transmit shaping is R^{1/2} C^{-1/2}(rho).  With ``normalize
    "transmit"`` the shaping is used as is (power is referred to the matched
    uncoupled transmitter); ``"receive"`` rescales it so the average delivered
    power tr(T^H T) equals the antenna count, which compares coupled and
    uncoupled arrays at equal received power.
    """
    r = tx_correlation.matrix
    t = spd_sqrt(r).astype(complex)
    if coupling is not None:
        t = t @ spd_inv_sqrt(coupling)
    if normalize == "receive":
        t = t * np.sqrt(t.shape[0] / np.trace(t.conj().T @ t).real)
    elif normalize != "transmit":
        raise ValueError(f"normalize must be 'transmit' or 'receive', got {normalize!r}")
    t = t * float(element_factor)
    n_t = r.shape[0]
    return ChannelModel("exact", int(n_rx) if n_rx is not None else n_t, n_t,
                        label or "exact", tx_shaping=t)


def sample_fourier_channel(rx_basis: FourierBasis, tx_basis: FourierBasis,
                           seed: int, index: int = 0, lift: bool = False) -> np.ndarray:
    """One beamspace realization; ``lift`` maps it to the antenna domain."""
    h = fourier_model(rx_basis, tx_basis).realize(seed, index)
    if lift:
        h = rx_basis.matrix @ h @ tx_basis.matrix.conj().T
    return h


def sample_exact_channel(tx_correlation: CorrelationMatrix,
                         coupling: CouplingMatrix | None = None,
                         seed: int = 0, n_rx: int | None = None, index: int = 0,
                         normalize: str = "transmit",
                         radiation_resistance: float | None = None) -> np.ndarray:
    """One exact-model realization G R^{1/2} C^{-1/2}.

    ``radiation_resistance`` carries the physical element gain 2/R explicitly
    instead of folding it into the SNR definition; precoded mutual information
    is invariant to it because the matching power constraint scales inversely.
    """
    factor = 1.0 if radiation_resistance is None else np.sqrt(2.0 / radiation_resistance)
    model = exact_model(tx_correlation, coupling, n_rx, normalize, factor)
    return model.realize(seed, index)
