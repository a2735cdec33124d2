"""Stochastic channel generation and the cascaded reflective link.

Small-scale fading uses a simplified clustered model: each cluster is a
rank-one outer product of array steering vectors weighted by a complex
Gaussian gain, normalized to unit average entry power. Cluster delays turn
into per-subband phase rotations, which is what makes per-subband co-phasing
meaningful. With a single cluster the model degenerates to i.i.d. Rayleigh
entries (isotropic scattering), which is also the fastest way to get a
full-rank random channel in tests.

Large-scale attenuation is kept out of the fading matrices: the far-field
reflective path loss is a scalar computed separately and applied by the
link-budget layer.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .ris import RisConfiguration


@dataclass(frozen=True)
class ChannelSet:
    """Per-subband realizations of the two hops of the reflective link.

    h: (n_subbands, n_ris, p_csirs) transmitter-to-surface hop
    g: (n_subbands, n_r, n_ris)     surface-to-receiver hop
    """

    h: np.ndarray
    g: np.ndarray
    seed: int

    def __post_init__(self):
        if self.h.ndim != 3 or self.g.ndim != 3:
            raise ValueError("h and g must have shape (n_subbands, rows, cols)")
        if self.h.shape[0] != self.g.shape[0]:
            raise ValueError("h and g must agree on the subband count")
        if self.g.shape[2] != self.h.shape[1]:
            raise ValueError(
                f"surface size mismatch: g has {self.g.shape[2]} columns, h has {self.h.shape[1]} rows")

    @property
    def n_subbands(self) -> int:
        return self.h.shape[0]

    @property
    def n_ris(self) -> int:
        return self.h.shape[1]

    @property
    def p_csirs(self) -> int:
        return self.h.shape[2]

    @property
    def n_r(self) -> int:
        return self.g.shape[1]


def _steering(n: int, spatial_freq: float) -> np.ndarray:
    # Half-wavelength ULA response, unit-modulus entries.
    return np.exp(1j * np.pi * spatial_freq * np.arange(n))


def _panel_steering(shape: tuple[int, ...], freqs: tuple[float, ...]) -> np.ndarray:
    vec = np.ones(1, dtype=np.complex128)
    for n, f in zip(shape, freqs):
        vec = np.kron(vec, _steering(n, f))
    return vec


def _load_tap_profile(profile) -> list[dict]:
    if isinstance(profile, str):
        with open(profile, "r", encoding="utf-8") as fh:
            profile = json.load(fh)
    taps = list(profile)
    if not taps:
        raise ValueError("tap profile must contain at least one cluster")
    for tap in taps:
        for key in ("delay_ns", "power_db", "aod_deg", "aoa_deg"):
            if key not in tap:
                raise ValueError(f"tap profile entry missing '{key}': {tap}")
    return taps


def _cluster_params(rng: np.random.Generator, n_clusters: int, delay_spread_s: float,
                    profile: list[dict] | None):
    """Delays (s), normalized linear powers and per-side spatial frequencies.

    Each cluster carries a pair of frequencies per side; the second one is
    only consumed by planar (two-axis) arrays.
    """
    if profile is not None:
        delays = np.array([t["delay_ns"] * 1e-9 for t in profile])
        powers = 10.0 ** (np.array([t["power_db"] for t in profile]) / 10.0)
        zoa = np.array([math.sin(math.radians(t.get("zoa_deg", 0.0))) for t in profile])
        tx = np.stack([np.array([math.sin(math.radians(t["aod_deg"])) for t in profile]), zoa], axis=1)
        rx = np.stack([np.array([math.sin(math.radians(t["aoa_deg"])) for t in profile]), zoa], axis=1)
    else:
        delays = rng.exponential(delay_spread_s, size=n_clusters)
        # Exponential power-delay profile: late clusters are weak, which gives
        # the channel the uneven spectrum of measured multipath profiles.
        powers = np.exp(-delays / delay_spread_s) if delay_spread_s > 0 else np.ones(n_clusters)
        tx = rng.uniform(-1.0, 1.0, size=(n_clusters, 2))
        rx = rng.uniform(-1.0, 1.0, size=(n_clusters, 2))
    powers = powers / powers.sum()
    return delays, powers, tx, rx


def _link_matrix(rng: np.random.Generator, rx_shape: tuple[int, ...], tx_shape: tuple[int, ...],
                 n_clusters: int, delay_spread_s: float, f_offsets: np.ndarray,
                 profile: list[dict] | None) -> np.ndarray:
    """One hop as a (n_subbands, n_rx, n_tx) stack with unit average entry power."""
    n_rx = int(np.prod(rx_shape))
    n_tx = int(np.prod(tx_shape))
    n_sub = f_offsets.shape[0]

    if profile is None and n_clusters == 1:
        # Isotropic single-cluster case: i.i.d. circularly-symmetric Gaussian
        # entries, frequency-flat up to the common tap phase.
        w = (rng.standard_normal((n_rx, n_tx)) + 1j * rng.standard_normal((n_rx, n_tx))) / math.sqrt(2.0)
        delay = rng.exponential(delay_spread_s)
        ramp = np.exp(-2j * np.pi * f_offsets * delay)
        return ramp[:, None, None] * w[None, :, :]

    delays, powers, tx_f, rx_f = _cluster_params(rng, n_clusters, delay_spread_s, profile)
    gains = (rng.standard_normal(len(delays)) + 1j * rng.standard_normal(len(delays))) / math.sqrt(2.0)

    out = np.zeros((n_sub, n_rx, n_tx), dtype=np.complex128)
    for c in range(len(delays)):
        a_rx = _panel_steering(rx_shape, tuple(rx_f[c]))
        a_tx = _panel_steering(tx_shape, tuple(tx_f[c]))
        base = gains[c] * math.sqrt(powers[c]) * np.outer(a_rx, np.conj(a_tx))
        ramp = np.exp(-2j * np.pi * f_offsets * delays[c])
        out += ramp[:, None, None] * base[None, :, :]
    return out


def subband_frequency_offsets(n_subbands: int, bandwidth_hz: float) -> np.ndarray:
    """Subband center frequencies relative to the carrier."""
    t = np.arange(n_subbands)
    return ((t + 0.5) / n_subbands - 0.5) * bandwidth_hz


def generate_channels(scenario, seed: int) -> ChannelSet:
    """Draw one independent realization of both hops for the given scenario.

    The scenario object supplies the dimensions and fading parameters
    (n_ris_x, n_ris_y, p_csirs, n_r, n3, clusters, delay_spread_ns,
    bandwidth_hz, tap_profile). Deterministic for a fixed seed; the two hops
    use independent RNG streams.
    """
    from .errors import ConfigError

    n_ris_x, n_ris_y = int(scenario.n_ris_x), int(scenario.n_ris_y)
    p_csirs, n_r = int(scenario.p_csirs), int(scenario.n_r)
    n3 = int(scenario.n3)
    if min(n_ris_x, n_ris_y, p_csirs, n_r, n3) < 1:
        raise ConfigError("all antenna/element/subband counts must be >= 1")
    clusters = int(getattr(scenario, "clusters", 3))
    if clusters < 1:
        raise ConfigError("cluster count must be >= 1")
    delay_spread_s = float(getattr(scenario, "delay_spread_ns", 300.0)) * 1e-9
    bandwidth = float(scenario.bandwidth_hz)
    profile = getattr(scenario, "tap_profile", None)
    taps = _load_tap_profile(profile) if profile is not None else None

    f_offsets = subband_frequency_offsets(n3, bandwidth)
    ss = np.random.SeedSequence(int(seed))
    rng_h, rng_g = [np.random.default_rng(child) for child in ss.spawn(2)]

    h = _link_matrix(rng_h, (n_ris_x, n_ris_y), (p_csirs,), clusters, delay_spread_s, f_offsets, taps)
    g = _link_matrix(rng_g, (n_r,), (n_ris_x, n_ris_y), clusters, delay_spread_s, f_offsets, taps)
    return ChannelSet(h=h, g=g, seed=int(seed))


def _check_surface(channels: ChannelSet, n_coeff: int):
    if n_coeff != channels.n_ris:
        raise ValueError(
            f"configuration has {n_coeff} elements, channels expect {channels.n_ris}")


def cascade_subbands(channels: ChannelSet, cfg: RisConfiguration) -> np.ndarray:
    """Per-subband cascaded matrices G_t diag(coeffs) H_t, shape (n3, n_r, p)."""
    coeffs = cfg.reflection_coefficients()
    _check_surface(channels, coeffs.shape[0])
    return channels.g @ (coeffs[None, :, None] * channels.h)


def cascade(channels: ChannelSet, cfg: RisConfiguration) -> np.ndarray:
    """Wideband cascaded channel: the subband average of G_t diag(coeffs) H_t.

    With a single subband this is exactly G diag(coeffs) H.
    """
    return cascade_subbands(channels, cfg).mean(axis=0)


def cascade_many(channels: ChannelSet, coeffs: np.ndarray) -> np.ndarray:
    """Wideband cascade for a whole batch of reflection coefficient vectors.

    coeffs has shape (k, n_ris); returns (k, n_r, p). Matches `cascade`
    applied row by row, but in one einsum.
    """
    coeffs = np.asarray(coeffs, dtype=np.complex128)
    _check_surface(channels, coeffs.shape[1])
    out = np.einsum("tan,kn,tnb->kab", channels.g, coeffs, channels.h, optimize=True)
    return out / channels.n_subbands


@dataclass(frozen=True)
class PathLossParams:
    """Geometry and gains of the far-field reflective path-loss model."""

    d_t: float = 38.0
    d_r: float = 20.0
    d_x: float = 0.015
    d_y: float = 0.015
    z: float = 0.075
    g_t: float = 1.0
    g_r: float = 1.0
    alpha_t: float = math.radians(10.0)
    alpha_r: float = math.radians(10.0)
    beta_t: float = 0.0
    beta_r: float = 0.0
    a_n: float = 1.0
    n_ris: int = 64

    def validate(self):
        if min(self.d_t, self.d_r, self.d_x, self.d_y, self.z) <= 0.0:
            raise ValueError("distances and wavelength must be strictly positive")
        if self.g_t <= 0.0 or self.g_r <= 0.0:
            raise ValueError("antenna gains must be positive")
        if not 0.0 <= self.a_n <= 1.0:
            raise ValueError(f"amplitude response must be in [0, 1], got {self.a_n}")
        if self.n_ris < 1:
            raise ValueError("n_ris must be >= 1")

    def to_json(self) -> dict:
        return {k: getattr(self, k) for k in (
            "d_t", "d_r", "d_x", "d_y", "z", "g_t", "g_r",
            "alpha_t", "alpha_r", "beta_t", "beta_r", "a_n", "n_ris")}

    @classmethod
    def from_json(cls, data: dict) -> "PathLossParams":
        return cls(**{k: (int(v) if k == "n_ris" else float(v)) for k, v in data.items()})


def radiation_pattern(alpha: float, beta: float) -> float:
    """Normalized element pattern: cos^3(alpha) on the front hemisphere, else 0."""
    if not 0.0 <= alpha <= math.pi:
        raise ValueError(f"elevation must be in [0, pi], got {alpha}")
    if not 0.0 <= beta <= 2.0 * math.pi:
        raise ValueError(f"azimuth must be in [0, 2*pi], got {beta}")
    if alpha >= math.pi / 2.0:
        return 0.0
    return math.cos(alpha) ** 3


def path_loss(p: PathLossParams) -> float:
    """Far-field reflective path loss as a linear power ratio (>= 1 loss factor).

    64*pi^3*(d_t*d_r)^2 over the product of antenna gains, per-element
    scattering gain 4*pi*d_x*d_y/z^2, squared element count, element area,
    z^2, both radiation patterns and the squared amplitude response.
    """
    p.validate()
    f_t = radiation_pattern(p.alpha_t, p.beta_t)
    f_r = radiation_pattern(p.alpha_r, p.beta_r)
    if f_t * f_r == 0.0 or p.a_n == 0.0:
        raise ValueError("zero radiation pattern or amplitude: path loss is infinite")
    g_s = 4.0 * math.pi * p.d_x * p.d_y / p.z**2
    numerator = 64.0 * math.pi**3 * (p.d_t * p.d_r) ** 2
    denominator = (p.g_t * p.g_r * g_s * p.n_ris**2 * p.d_x * p.d_y * p.z**2
                   * f_t * f_r * p.a_n**2)
    return numerator / denominator
