import numpy as np
import pytest

from rismimo.codebook import assemble_precoder, build_beam_grid
from rismimo.errors import RankDeficientError
from rismimo.linalg import herm
from rismimo.link import (LinkMetrics, achievable_rate, average_snr, link_metrics,
                          per_layer_snr, zf_matrix)

REFERENCE_PATH_LOSS = 482184421045.77655


def random_complex(rng, rows, cols):
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)


def test_zf_identity_channel():
    np.testing.assert_allclose(zf_matrix(np.eye(3), np.eye(3), 1.0), np.eye(3), atol=1e-12)


def test_zf_diagonal_channel():
    f = np.diag([2.0, 1.0]).astype(complex)
    np.testing.assert_allclose(zf_matrix(f, np.eye(2), 1.0), np.diag([0.5, 1.0]), atol=1e-12)


def test_zf_inverts_scaled_forward_channel():
    # Multiplication oracle: the equalizer applied to the path-loss-scaled
    # channel restores the identity on the layer space.
    rng = np.random.default_rng(0)
    for _ in range(20):
        f = random_complex(rng, 4, 4)
        w = random_complex(rng, 4, 2)
        pl = float(rng.uniform(1.0, 1e6))
        wzf = zf_matrix(f, w, pl)
        restored = wzf @ (np.sqrt(1.0 / pl) * f @ w)
        assert np.linalg.norm(restored - np.eye(2)) < 1e-8


def test_zf_accepts_precoder_objects():
    grid = build_beam_grid(2, 1, 4, 1)
    w = assemble_precoder(grid.beam(0, 0), grid.beam(4, 0), 0, 2, 4)
    rng = np.random.default_rng(1)
    f = random_complex(rng, 4, 4)
    out = zf_matrix(f, w, 2.0)
    assert out.shape == (2, 4)


def test_zf_rejects_rank_deficient():
    f = np.ones((3, 3), dtype=complex)  # rank one
    with pytest.raises(RankDeficientError):
        zf_matrix(f, np.eye(3), 1.0)


def test_per_layer_snr_unit_gram():
    w = np.array([[1.0], [0.0]], dtype=complex)
    out = per_layer_snr(np.eye(2), w, 7.5)
    np.testing.assert_allclose(out, [7.5])


def test_per_layer_snr_diagonal_gram():
    f = np.eye(2)
    w = np.diag([2.0, 1.0]).astype(complex)  # column norms squared (4, 1)
    np.testing.assert_allclose(per_layer_snr(f, w, 3.0), [12.0, 3.0])


def test_per_layer_snr_monte_carlo_oracle():
    # Simulate the equalized link and estimate the error variance per layer
    # over 1e5 noise draws; the closed form must agree within 2%.
    rng = np.random.default_rng(2)
    for _ in range(20):
        f = random_complex(rng, 4, 4)
        w = random_complex(rng, 4, 2)
        gram = herm(f @ w) @ (f @ w)
        if np.linalg.cond(gram) > 1e6:
            continue
        sigma2 = 0.3
        snr = per_layer_snr(f, w, 1.0 / sigma2)
        eq = np.linalg.solve(gram, herm(f @ w))
        noise = (rng.standard_normal((4, 100_000)) + 1j * rng.standard_normal((4, 100_000)))
        noise *= np.sqrt(sigma2 / 2.0)
        err = eq @ noise
        mc_snr = 1.0 / np.mean(np.abs(err) ** 2, axis=1)
        np.testing.assert_allclose(snr, mc_snr, rtol=0.02)


def test_rate_zero_snr():
    rng = np.random.default_rng(3)
    f = random_complex(rng, 3, 4)
    w = random_complex(rng, 4, 2)
    assert achievable_rate(f, w, 0.0) == 0.0


def test_rate_single_layer_scalar():
    f = np.eye(2)
    w = np.array([[np.sqrt(5.0)], [0.0]], dtype=complex)  # Gram diagonal 5
    assert achievable_rate(f, w, 1.0) == pytest.approx(np.log2(6.0))


def test_rate_two_layer_example():
    f = np.eye(2)
    w = np.diag([np.sqrt(3.0), 1.0]).astype(complex)  # Gram diag (3, 1)
    assert achievable_rate(f, w, 1.0) == pytest.approx(3.0)


def test_rate_monotone_in_snr():
    rng = np.random.default_rng(4)
    f = random_complex(rng, 4, 4)
    w = random_complex(rng, 4, 3)
    rates = [achievable_rate(f, w, s) for s in (0.1, 1.0, 10.0, 100.0)]
    assert all(b > a for a, b in zip(rates, rates[1:]))


def test_rate_exceeds_equalized_sum_unless_diagonal():
    # Gram-diagonal rate vs post-equalization rate: the first dominates, with
    # equality exactly when the Gram is diagonal.
    rng = np.random.default_rng(5)
    for _ in range(30):
        f = random_complex(rng, 4, 4)
        w = random_complex(rng, 4, 2)
        gram = herm(f @ w) @ (f @ w)
        if np.linalg.cond(gram) > 1e9:
            continue
        rho = 3.0
        gram_rate = achievable_rate(f, w, rho)
        zf_rate = float(np.log2(1.0 + per_layer_snr(f, w, rho)).sum())
        assert gram_rate >= zf_rate - 1e-9
    # Equality for a diagonal Gram.
    f = np.eye(3)
    w = np.diag([1.0, 2.0, 0.5]).astype(complex)
    assert achievable_rate(f, w, 2.0) == pytest.approx(
        float(np.log2(1.0 + per_layer_snr(f, w, 2.0)).sum()))


def test_average_snr_examples():
    assert average_snr(1.0, 1.0, 1, 1.0) == pytest.approx(1.0)
    assert average_snr(2.0, 1.0, 4, 1.0) == pytest.approx(average_snr(2.0, 1.0, 2, 1.0) / 2.0)


def test_average_snr_with_reference_path_loss():
    # Composition with the frozen reference loss value.
    got = average_snr(1.0, 1e-12, 4, REFERENCE_PATH_LOSS)
    assert got == pytest.approx(1.0 / (1e-12 * 4 * REFERENCE_PATH_LOSS), rel=1e-12)


def test_average_snr_validation():
    with pytest.raises(ValueError):
        average_snr(0.0, 1.0, 1, 1.0)
    with pytest.raises(ValueError):
        average_snr(1.0, -1.0, 1, 1.0)
    with pytest.raises(ValueError):
        average_snr(1.0, 1.0, 0, 1.0)


def test_link_metrics_consistency():
    rng = np.random.default_rng(6)
    f = random_complex(rng, 4, 4)
    w = random_complex(rng, 4, 2)
    m = link_metrics(f, w, 5.0)
    assert isinstance(m, LinkMetrics)
    assert m.rate_bps_hz == pytest.approx(achievable_rate(f, w, 5.0), rel=1e-9)
    np.testing.assert_allclose(m.per_layer_snr, per_layer_snr(f, w, 5.0), rtol=1e-9)
    assert m.avg_snr == 5.0
