"""Quantized RIS reflection model.

Phases live on the b-bit grid {2*pi*k / 2**b : k = 0..2**b-1}. Configurations
store the integer grid indices and materialize radians on demand, so discrete
search moves (element swaps between configurations) stay exact and never
drift off the grid.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

MAX_BITS = 16


def phase_set(bits: int) -> np.ndarray:
    """The 2**bits equally spaced reflection phases starting at 0 rad."""
    if not 1 <= bits <= MAX_BITS:
        raise ValueError(f"bits must be in [1, {MAX_BITS}], got {bits}")
    levels = 2**bits
    return 2.0 * np.pi * np.arange(levels) / levels


@dataclass(frozen=True)
class RisConfiguration:
    """Phase-grid indices plus the common amplitude of all unit cells."""

    indices: tuple[int, ...]
    bits: int
    amplitude: float = 1.0

    def __post_init__(self):
        if not 1 <= self.bits <= MAX_BITS:
            raise ValueError(f"bits must be in [1, {MAX_BITS}], got {self.bits}")
        levels = 2**self.bits
        if any(not 0 <= k < levels for k in self.indices):
            raise ValueError(f"phase indices must be in [0, {levels})")
        if not 0.0 <= self.amplitude <= 1.0:
            raise ValueError(f"amplitude must be in [0, 1], got {self.amplitude}")
        object.__setattr__(self, "indices", tuple(int(k) for k in self.indices))

    @property
    def n_elements(self) -> int:
        return len(self.indices)

    @property
    def thetas(self) -> np.ndarray:
        return 2.0 * np.pi * np.asarray(self.indices, dtype=np.float64) / 2**self.bits

    def reflection_coefficients(self) -> np.ndarray:
        """Per-element coefficients A * exp(j*theta)."""
        return self.amplitude * np.exp(1j * self.thetas)

    def to_json(self) -> dict:
        return {"bits": self.bits, "amplitude": self.amplitude, "indices": list(self.indices)}

    @classmethod
    def from_json(cls, data: dict) -> "RisConfiguration":
        return cls(indices=tuple(data["indices"]), bits=int(data["bits"]),
                   amplitude=float(data.get("amplitude", 1.0)))

    def dumps(self) -> str:
        return json.dumps(self.to_json())

    @classmethod
    def loads(cls, text: str) -> "RisConfiguration":
        return cls.from_json(json.loads(text))


def reflection_matrix(cfg: RisConfiguration) -> np.ndarray:
    """Diagonal reflection matrix diag(A * exp(j*theta_n))."""
    return np.diag(cfg.reflection_coefficients())


def sample_configurations(count: int, n_ris: int, bits: int, seed: int) -> list[RisConfiguration]:
    """Draw `count` configurations with phases uniform over the b-bit grid.

    At least two are required because the crossover search needs two parents.
    """
    if count < 2:
        raise ValueError(f"need at least 2 configurations, got {count}")
    if n_ris < 1:
        raise ValueError(f"n_ris must be >= 1, got {n_ris}")
    phase_set(bits)  # validates bits
    rng = np.random.default_rng(seed)
    draws = rng.integers(0, 2**bits, size=(count, n_ris))
    return [RisConfiguration(indices=tuple(row), bits=bits) for row in draws]
