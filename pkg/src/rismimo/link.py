"""Receiver-side metrics: zero-forcing equalization, per-layer SNR, rate.

Both SNR and rate are driven by the effective-channel Gram matrix
W^H F^H F W. The per-layer SNR of the zero-forcing receiver reads the
diagonal of the INVERSE Gram (noise enhancement included); the achievable
rate reads the Gram diagonal directly. The two only coincide when the Gram
is diagonal, and the rate is the larger of the two otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import RankDeficientError
from .linalg import CONDITION_LIMIT, as_matrix, herm, hermitian_condition, hermitian_solve


def _precoder_array(w) -> np.ndarray:
    # Accepts a PrecoderMatrix or a plain array.
    return as_matrix(getattr(w, "matrix", w))


def _gram(f: np.ndarray, w: np.ndarray) -> np.ndarray:
    if w.shape[0] != f.shape[1]:
        raise ValueError(f"precoder rows {w.shape[0]} do not match channel columns {f.shape[1]}")
    fw = f @ w
    return herm(fw) @ fw


def zf_matrix(f, w, pl_ris: float) -> np.ndarray:
    """Zero-forcing equalizer sqrt(PL) * (W^H F^H F W)^-1 W^H F^H.

    Applied to the path-loss-scaled forward channel it restores the identity
    on the layer subspace. Raises RankDeficientError when the effective
    channel does not have full column rank.
    """
    f = as_matrix(f)
    w = _precoder_array(w)
    if pl_ris <= 0.0:
        raise ValueError(f"path loss must be positive, got {pl_ris}")
    gram = _gram(f, w)
    cond = hermitian_condition(gram)
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        raise RankDeficientError(
            f"effective channel is rank deficient (condition estimate {cond:.3e})")
    return math.sqrt(pl_ris) * hermitian_solve(gram, herm(w) @ herm(f))


def per_layer_snr(f, w, avg_snr: float) -> np.ndarray:
    """Post-equalization SNR of each layer: avg_snr / diag(inverse Gram)."""
    f = as_matrix(f)
    w = _precoder_array(w)
    if avg_snr < 0.0:
        raise ValueError(f"avg_snr must be >= 0, got {avg_snr}")
    gram = _gram(f, w)
    cond = hermitian_condition(gram)
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        raise RankDeficientError(
            f"effective channel is rank deficient (condition estimate {cond:.3e})")
    inv_diag = np.diag(hermitian_solve(gram, np.eye(gram.shape[0], dtype=np.complex128))).real
    return avg_snr / inv_diag


def achievable_rate(f, w, avg_snr: float) -> float:
    """Sum over layers of log2(1 + avg_snr * diag(W^H F^H F W)_r), bits/s/Hz."""
    f = as_matrix(f)
    w = _precoder_array(w)
    if avg_snr < 0.0:
        raise ValueError(f"avg_snr must be >= 0, got {avg_snr}")
    d = np.clip(np.diag(_gram(f, w)).real, 0.0, None)
    return float(np.log2(1.0 + avg_snr * d).sum())


def average_snr(p_t: float, sigma2: float, n_t: int, pl_ris: float) -> float:
    """Average receive SNR P_T / (sigma^2 * N_T * PL)."""
    if min(p_t, sigma2, pl_ris) <= 0.0 or n_t < 1:
        raise ValueError("transmit power, noise variance, antenna count and path loss must be positive")
    return p_t / (sigma2 * n_t * pl_ris)


@dataclass(frozen=True)
class LinkMetrics:
    per_layer_snr: tuple[float, ...]
    rate_bps_hz: float
    avg_snr: float


def link_metrics(f, w, avg_snr: float) -> LinkMetrics:
    """Bundle the per-layer SNRs and the rate for one channel/precoder pair."""
    snrs = per_layer_snr(f, w, avg_snr)
    rate = achievable_rate(f, w, avg_snr)
    return LinkMetrics(per_layer_snr=tuple(float(s) for s in snrs),
                       rate_bps_hz=rate, avg_snr=float(avg_snr))
