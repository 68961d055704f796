"""Waterfilling, ergodic capacity, and coupling-aware precoding.

SNR throughout is the total transmit power constraint on the composite
precoder (identity noise covariance), so capacities are in bits per channel
use and the waterfilling budget equals the SNR.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .channel import ChannelModel, complex_normal, substream
from .coupling import CouplingMatrix, SingularCouplingError, spd_inv_sqrt, spd_sqrt

__all__ = [
    "WaterfillingAllocation",
    "CapacityCurve",
    "PrecoderMatrix",
    "BoundCheck",
    "DofCheck",
    "waterfill",
    "low_snr_allocation",
    "mutual_information_bits",
    "precoded_mutual_information",
    "ergodic_capacity",
    "optimal_precoder",
    "los_precoder",
    "matched_filter_precoder",
    "low_snr_bound_check",
    "high_snr_dof_check",
]


@dataclass(frozen=True)
class WaterfillingAllocation:
    """Optimal power split over parallel channels.

    ``powers`` is aligned with the input eigenvalue order; ``capacity_bits``
    is the resulting mutual information.
    """

    powers: np.ndarray
    water_level: float
    n_active: int
    capacity_bits: float


def waterfill(eigenvalues, snr: float) -> WaterfillingAllocation:
    """Exact waterfilling by sort and threshold scan.

    Power on channel i is max(0, nu - 1/lambda_i) with nu chosen so the powers
    sum to ``snr``; exactly tied eigenvalues receive equal power.
    """
    lam = np.asarray(eigenvalues, dtype=float).ravel()
    if lam.size == 0:
        raise ValueError("need at least one eigenvalue")
    if snr <= 0.0:
        raise ValueError("snr must be positive")
    scale = max(lam.max(initial=0.0), 1.0)
    if np.any(lam < -1e-12 * scale):
        raise ValueError(f"eigenvalues must be nonnegative (min {lam.min():.3e})")
    lam = np.clip(lam, 0.0, None)
    if not np.any(lam > 0.0):
        raise ValueError("all eigenvalues are zero")
    order = np.argsort(-lam, kind="stable")
    lam_sorted = lam[order]
    n_pos = int(np.count_nonzero(lam_sorted > 0.0))
    inv = 1.0 / lam_sorted[:n_pos]
    cum = np.cumsum(inv)
    counts = np.arange(1, n_pos + 1)
    nu = (snr + cum) / counts
    k = int(np.nonzero(nu > inv)[0].max()) + 1
    level = float(nu[k - 1])
    p_sorted = np.zeros_like(lam_sorted)
    p_sorted[:k] = level - inv[:k]
    powers = np.empty_like(p_sorted)
    powers[order] = p_sorted
    cap = float(np.sum(np.log2(level * lam_sorted[:k])))
    return WaterfillingAllocation(powers, level, k, cap)


def low_snr_allocation(eigenvalues, snr: float, tie_tol: float = 1e-3) -> WaterfillingAllocation:
    """Low-SNR limit of waterfilling: equal split across the near-maximal set.

    Eigenvalues within ``tie_tol`` (relative) of the maximum share the budget
    equally; everything else gets zero.
    """
    lam = np.asarray(eigenvalues, dtype=float).ravel()
    if snr <= 0.0:
        raise ValueError("snr must be positive")
    top = lam.max()
    if top <= 0.0:
        raise ValueError("all eigenvalues are zero")
    tied = lam >= (1.0 - tie_tol) * top
    k = int(np.count_nonzero(tied))
    powers = np.where(tied, snr / k, 0.0)
    cap = mutual_information_bits(lam, powers)
    return WaterfillingAllocation(powers, float(snr / k + 1.0 / top), k, cap)


def mutual_information_bits(eigenvalues, powers) -> float:
    lam = np.asarray(eigenvalues, dtype=float)
    p = np.asarray(powers, dtype=float)
    return float(np.sum(np.log2(1.0 + p * lam)))


def precoded_mutual_information(h: np.ndarray, composite: np.ndarray) -> float:
    """log2 det(I + H F F^H H^H) for a composite precoder F."""
    g = h @ composite
    k = np.eye(g.shape[0]) + g @ g.conj().T
    sign, logdet = np.linalg.slogdet(k)
    if sign.real <= 0:
        raise RuntimeError("mutual-information determinant is not positive")
    return float(logdet / np.log(2.0))


def _capacity_grid(lam_desc: np.ndarray, snr_lin: np.ndarray) -> np.ndarray:
    """Waterfilling capacity for one positive, descending spectrum on a grid."""
    inv = 1.0 / lam_desc
    cum = np.cumsum(inv)
    counts = np.arange(1, lam_desc.size + 1)
    nu = (snr_lin[:, None] + cum[None, :]) / counts[None, :]
    active = np.count_nonzero(nu > inv[None, :], axis=1)
    idx = active - 1
    level = nu[np.arange(snr_lin.size), idx]
    log_lam_cum = np.cumsum(np.log2(lam_desc))
    return active * np.log2(level) + log_lam_cum[idx]


@dataclass(frozen=True)
class CapacityCurve:
    """Ergodic capacity versus SNR with Monte-Carlo error bars."""

    snr_db: np.ndarray
    capacity_bits: np.ndarray
    stderr: np.ndarray
    n_mc: int
    label: str = ""


def ergodic_capacity(model: ChannelModel, snr_db, n_mc: int = 200,
                     seed: int = 0) -> CapacityCurve:
    """Mean waterfilling capacity over ``n_mc`` realizations of the model.

    Realization ``i`` uses the Philox substream (seed, i), so curves computed
    with the same seed share their random draws point for point (common random
    numbers), which makes curve crossings statistically stable.
    """
    snr_db = np.asarray(snr_db, dtype=float).ravel()
    if snr_db.size == 0:
        raise ValueError("empty SNR grid")
    if n_mc < 1:
        raise ValueError("n_mc must be positive")
    snr_lin = 10.0 ** (snr_db / 10.0)
    caps = np.empty((n_mc, snr_db.size))
    for i in range(n_mc):
        h = model.realize(seed, i)
        s = np.linalg.svd(h, compute_uv=False)
        lam = s * s
        lam = lam[lam > lam[0] * 1e-30] if lam[0] > 0 else lam[:1] + 1e-300
        caps[i] = _capacity_grid(lam, snr_lin)
    mean = caps.mean(axis=0)
    if np.any(np.diff(mean) < -1e-9):
        raise RuntimeError("ergodic capacity failed to be nondecreasing in SNR")
    stderr = caps.std(axis=0, ddof=1) / np.sqrt(n_mc) if n_mc > 1 else np.zeros_like(mean)
    return CapacityCurve(snr_db, mean, stderr, n_mc, model.label)


@dataclass(frozen=True)
class PrecoderMatrix:
    """Precoder in antenna coordinates plus its composite (power-bearing) form.

    ``matrix`` drives the antenna currents; ``composite`` is C^{1/2} matrix,
    whose squared norm is the constrained power.  For beamspace channels the
    composite lives in beamspace and ``matrix`` equals it.
    """

    matrix: np.ndarray
    composite: np.ndarray
    power: float
    allocation: WaterfillingAllocation | None = None


def optimal_precoder(h: np.ndarray, snr: float,
                     coupling: CouplingMatrix | None = None) -> PrecoderMatrix:
    """Capacity-achieving precoder for one realization of the effective channel.

    ``h`` is the effective channel seen by the composite precoder (for exact
    models, G R^{1/2} C^{-1/2}; for beamspace models, the beamspace matrix).
    Waterfilling runs on its squared singular values; the composite power
    equals ``snr`` exactly.  With ``coupling`` given, ``matrix`` is mapped
    back to antenna currents through C^{-1/2}.
    """
    u, s, vh = np.linalg.svd(h, full_matrices=False)
    alloc = waterfill(s * s, snr)
    composite = vh.conj().T * np.sqrt(alloc.powers)
    matrix = composite if coupling is None else spd_inv_sqrt(coupling) @ composite
    power = float(np.sum(alloc.powers))
    return PrecoderMatrix(matrix, composite, power, alloc)


def _steering_vector(steering) -> np.ndarray:
    a = np.asarray(steering, dtype=complex).ravel()
    if a.size == 0:
        raise ValueError("empty steering vector")
    return a


def los_precoder(coupling: CouplingMatrix, steering, snr: float) -> PrecoderMatrix:
    """Line-of-sight beamformer maximizing received power under coupling.

    Solves max |a^H f|^2 subject to the composite constraint f^H C f <= snr;
    the optimum is proportional to C^{-1} a and strictly beats the conjugate
    (matched) beamformer whenever C is not a scaled identity.
    """
    a = _steering_vector(steering)
    if snr <= 0.0:
        raise ValueError("snr must be positive")
    try:
        x = scipy.linalg.solve(coupling.matrix, a, assume_a="pos")
    except np.linalg.LinAlgError as exc:
        raise SingularCouplingError(
            f"coupling matrix is not positive definite (rho={coupling.rho:g}); "
            f"increase the regularization rho") from exc
    gain = float(np.real(np.vdot(a, x)))
    if gain <= 0.0:
        raise SingularCouplingError("steering vector has nonpositive whitened gain")
    f = np.sqrt(snr / gain) * x
    composite = spd_sqrt(coupling).astype(complex) @ f
    return PrecoderMatrix(f, composite, float(np.real(np.vdot(composite, composite))))


def matched_filter_precoder(coupling: CouplingMatrix, steering, snr: float) -> PrecoderMatrix:
    """Conjugate beamformer under the same composite power constraint."""
    a = _steering_vector(steering)
    if snr <= 0.0:
        raise ValueError("snr must be positive")
    gain = float(np.real(np.vdot(a, coupling.matrix @ a)))
    if gain <= 0.0:
        raise SingularCouplingError("steering vector has nonpositive coupled gain")
    f = np.sqrt(snr / gain) * a
    composite = spd_sqrt(coupling).astype(complex) @ f
    return PrecoderMatrix(f, composite, float(np.real(np.vdot(composite, composite))))


@dataclass(frozen=True)
class BoundCheck:
    """Monte-Carlo audit of the top-eigenvalue product bound."""

    lhs_mean: float
    rhs_mean: float
    ratio: float
    holds: bool
    violations: int
    stderr_lhs: float
    n_mc: int


def low_snr_bound_check(model: ChannelModel, n_mc: int = 2000, seed: int = 0) -> BoundCheck:
    """Check E lam_max(H H^H) <= max(N_r sigma_r^2) max(N_t sigma_t^2) E lam_max(W W^H).

    The inequality holds draw by draw (submultiplicativity of the spectral
    norm), so ``holds`` requires every draw to satisfy it as well as the
    means.  It is an equality for a one-cell lattice on each end.
    """
    if model.kind != "fourier":
        raise ValueError("bound check applies to Fourier-model channels")
    amp_r = np.sqrt(model.rx_basis.n_antennas * model.rx_basis.variances)
    amp_t = np.sqrt(model.tx_basis.n_antennas * model.tx_basis.variances)
    top = float((amp_r.max() * amp_t.max()) ** 2)
    lhs = np.empty(n_mc)
    wtop = np.empty(n_mc)
    for i in range(n_mc):
        w = complex_normal(substream(seed, i), (amp_r.size, amp_t.size))
        h = amp_r[:, None] * w * amp_t[None, :]
        lhs[i] = np.linalg.svd(h, compute_uv=False)[0] ** 2
        wtop[i] = np.linalg.svd(w, compute_uv=False)[0] ** 2
    per_draw = lhs <= top * wtop * (1.0 + 1e-12)
    lhs_mean = float(lhs.mean())
    rhs_mean = float(top * wtop.mean())
    # The same relative slack applies to the means: in exact-equality
    # configurations (one-cell lattices) the two sides differ only by roundoff.
    return BoundCheck(
        lhs_mean, rhs_mean, lhs_mean / rhs_mean,
        bool(per_draw.all() and lhs_mean <= rhs_mean * (1.0 + 1e-12)),
        int(np.count_nonzero(~per_draw)),
        float(lhs.std(ddof=1) / np.sqrt(n_mc)) if n_mc > 1 else 0.0, n_mc,
    )


@dataclass(frozen=True)
class DofCheck:
    """Measured high-SNR capacity slope against the support-area prediction."""

    slope: float
    predicted: int
    ratio: float


def high_snr_dof_check(model: ChannelModel, window_db=(30.0, 45.0),
                       n_mc: int = 300, seed: int = 0) -> DofCheck:
    """High-SNR capacity slope in bits per octave of SNR (log2 scale)."""
    lo, hi = float(window_db[0]), float(window_db[1])
    if hi <= lo:
        raise ValueError("window must be increasing")
    curve = ergodic_capacity(model, np.array([lo, hi]), n_mc, seed)
    slope = float(np.diff(curve.capacity_bits)[0] / ((hi - lo) / 10.0 * np.log2(10.0)))
    predicted = model.predicted_dof()
    return DofCheck(slope, predicted, slope / predicted)
