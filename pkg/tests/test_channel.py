import numpy as np
import pytest

from holomimo import (build_fourier_basis, build_upa, cap_spectrum, coupled_correlation_exact,
                      coupling_closed_form, coupling_general, exact_correlation, exact_model,
                      fourier_correlation, fourier_model, iid_model, isotropic_spectrum,
                      matched_pattern, omni_pattern, regularize, sample_exact_channel,
                      sample_fourier_channel, spd_inv_sqrt)
from holomimo.channel import complex_normal, substream


def test_isotropic_correlation_is_sinc():
    # with isotropic scattering the correlation coincides with the coupling kernel
    g = build_upa(6, 6, 0.5)
    r = exact_correlation(g, isotropic_spectrum()).matrix
    c = coupling_closed_form(g).matrix
    assert np.abs(r - c).max() < 1e-10
    assert np.abs(r.imag).max() < 1e-12


def test_correlation_diagonal():
    g = build_upa(4, 4, 0.4)
    assert np.allclose(np.diag(exact_correlation(g, isotropic_spectrum()).matrix).real, 1.0,
                       atol=1e-10)
    # one-sided caps put all the power above the plane: ++ diagonal of 2
    assert np.allclose(np.diag(exact_correlation(g, cap_spectrum(0.8)).matrix).real, 2.0,
                       atol=1e-8)


def test_correlation_translation_invariant_and_psd():
    g = build_upa(5, 3, 0.45)
    r0 = exact_correlation(g, cap_spectrum(np.pi / 3)).matrix
    r1 = exact_correlation(g.translated([0.7, -4.1, 0.0]), cap_spectrum(np.pi / 3)).matrix
    assert np.abs(r0 - r1).max() < 1e-10
    assert np.abs(r0 - r0.conj().T).max() < 1e-14
    assert np.linalg.eigvalsh(r0)[0] > -1e-9


def test_whitening_identity_matched_isotropic():
    # matched pattern under isotropic scattering: C and R are the same operator
    g = build_upa(6, 6, 0.4)
    r = exact_correlation(g, isotropic_spectrum())
    c = coupling_general(g, matched_pattern(isotropic_spectrum()))
    w = coupled_correlation_exact(r, c).matrix
    assert np.abs(w - np.eye(36)).max() < 1e-6


def test_whitening_matched_cap_gives_twice_identity():
    # a one-sided cap spectrum has twice the upper-hemisphere mass of its
    # matched full-sphere-normalized pattern, so whitening yields 2I
    g = build_upa(5, 5, 0.4)
    cap = cap_spectrum(np.pi / 3)
    r = exact_correlation(g, cap)
    c = coupling_general(g, matched_pattern(cap))
    w = coupled_correlation_exact(r, c).matrix
    assert np.abs(w - 2.0 * np.eye(25)).max() < 1e-6


def test_fourier_correlation_structure():
    g = build_upa(7, 7, 0.4)
    b = build_fourier_basis(g, isotropic_spectrum())
    r = fourier_correlation(b)
    ev = np.linalg.eigvalsh(r.matrix)
    assert ev[0] > -1e-9
    assert np.trace(r.matrix).real == pytest.approx(49 * b.variances.sum(), rel=1e-12)
    assert np.linalg.matrix_rank(r.matrix, tol=1e-9) <= b.n_points


def test_substreams_are_reproducible_and_independent():
    draws = {i: complex_normal(substream(42, i), 8) for i in (0, 1, 5)}
    # recomputing any index gives the same numbers, regardless of order
    assert np.array_equal(complex_normal(substream(42, 5), 8), draws[5])
    assert not np.allclose(draws[0], draws[1])
    assert not np.allclose(complex_normal(substream(43, 0), 8), draws[0])


def test_complex_normal_unit_variance():
    w = complex_normal(substream(7), 200_000)
    assert np.mean(np.abs(w) ** 2) == pytest.approx(1.0, rel=5e-3)
    assert abs(np.mean(w)) < 5e-3
    # real and imaginary parts carry half the power each
    assert np.mean(w.real**2) == pytest.approx(0.5, rel=1e-2)


def test_fourier_sampling_shapes_and_lift():
    g = build_upa(6, 6, 0.4)
    b = build_fourier_basis(g, isotropic_spectrum())
    h = sample_fourier_channel(b, b, seed=3, index=1)
    assert h.shape == (b.n_points, b.n_points)
    lifted = sample_fourier_channel(b, b, seed=3, index=1, lift=True)
    assert lifted.shape == (36, 36)
    assert np.allclose(lifted, b.matrix @ h @ b.matrix.conj().T)


def test_fourier_model_covariance():
    g = build_upa(5, 5, 0.4)
    b = build_fourier_basis(g, isotropic_spectrum())
    model = fourier_model(b, b)
    lam_r = 25 * b.variances
    second = np.zeros((b.n_points, b.n_points))
    n_mc = 400
    for i in range(n_mc):
        h = model.realize(11, i)
        second += np.abs(h) ** 2
    second /= n_mc
    expect = np.outer(lam_r, lam_r)
    assert np.abs(second - expect).max() / expect.max() < 0.12


def test_exact_model_covariance():
    g = build_upa(3, 3, 0.5)
    r = exact_correlation(g, isotropic_spectrum())
    c = regularize(coupling_closed_form(g), 0.05)
    target = coupled_correlation_exact(r, c).matrix
    model = exact_model(r, c, n_rx=16)
    acc = np.zeros((9, 9), dtype=complex)
    n_mc = 600
    for i in range(n_mc):
        h = model.realize(5, i)
        acc += h.conj().T @ h
    acc /= n_mc * 16
    assert np.abs(acc - target).max() / np.abs(target).max() < 0.1


def test_exact_model_receive_normalization():
    g = build_upa(4, 4, 0.4)
    r = exact_correlation(g, isotropic_spectrum())
    c = regularize(coupling_closed_form(g), 0.1)
    m = exact_model(r, c, normalize="receive")
    assert np.trace(m.tx_shaping.conj().T @ m.tx_shaping).real == pytest.approx(16.0, rel=1e-12)
    # uncoupled shaping already delivers tr R = N, so the scale is a no-op
    mu = exact_model(r, None, normalize="receive")
    mt = exact_model(r, None, normalize="transmit")
    assert np.abs(mu.tx_shaping - mt.tx_shaping).max() < 1e-9
    with pytest.raises(ValueError):
        exact_model(r, None, normalize="both")


def test_sampling_functions_deterministic():
    g = build_upa(3, 3, 0.5)
    r = exact_correlation(g, isotropic_spectrum())
    c = regularize(coupling_closed_form(g), 0.1)
    h1 = sample_exact_channel(r, c, seed=9, index=2)
    h2 = sample_exact_channel(r, c, seed=9, index=2)
    assert np.array_equal(h1, h2)
    assert not np.allclose(h1, sample_exact_channel(r, c, seed=9, index=3))


def test_radiation_resistance_scaling_cancels():
    # carrying the element gain explicitly scales H by sqrt(2/R); the matching
    # power adjustment restores the same mutual information
    g = build_upa(3, 3, 0.5)
    r = exact_correlation(g, isotropic_spectrum())
    c = regularize(coupling_closed_form(g), 0.1)
    base = sample_exact_channel(r, c, seed=4)
    kappa = 2 * np.pi
    for rr in (2.0, kappa**2 * 120 * np.pi / (4 * np.pi)):
        h = sample_exact_channel(r, c, seed=4, radiation_resistance=rr)
        assert np.allclose(h, np.sqrt(2.0 / rr) * base)
        f = np.sqrt(rr / 2.0) * np.eye(9)  # inverse power scaling
        mi_base = np.linalg.slogdet(np.eye(9) + base @ base.conj().T)[1]
        mi = np.linalg.slogdet(np.eye(9) + (h @ f) @ (h @ f).conj().T)[1]
        assert mi == pytest.approx(mi_base, rel=1e-12)


def test_predicted_dof():
    g = build_upa(13, 13, 0.25)
    iso = isotropic_spectrum()
    cap = cap_spectrum(np.pi / 6)
    bi = build_fourier_basis(g, iso)
    bc = build_fourier_basis(g, cap)
    assert fourier_model(bi, bi).predicted_dof() == 29
    assert fourier_model(bi, bc).predicted_dof() == 8
    assert iid_model(6, 9).predicted_dof() == 6


def test_iid_model_draws():
    m = iid_model(4, 7)
    h = m.realize(0, 0)
    assert h.shape == (4, 7)
    assert np.array_equal(h, iid_model(4, 7).realize(0, 0))
