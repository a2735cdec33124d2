"""Single-panel Type-I codebook: oversampled DFT beam grid and precoder assembly.

Beams are indexed (l, m) over the oversampled horizontal/vertical grid; a
precoder stacks one or two beams over the two polarizations with a quantized
co-phasing scalar. Layer 2-4 structures (valid for port counts below 16)
reuse the beams with alternating co-phase signs so that columns stay pairwise
orthogonal whenever the two beams are orthogonal.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import kronecker

# Second-beam index offsets, as multiples of (o1, o2), keyed by panel shape
# and rank group. Kept as data so a different release's co-scheduling rules
# can be swapped in. Rank 2 may reuse the primary beam (zero offset, the
# orthogonal co-phasing keeps the columns independent); ranks 3-4 must pick a
# distinct beam, which for these offsets is always orthogonal to the primary.
SECOND_BEAM_OFFSETS_1D = ((0, 0), (1, 0), (2, 0), (3, 0))
SECOND_BEAM_OFFSETS_1D_HIGH_RANK = ((1, 0), (2, 0), (3, 0))
SECOND_BEAM_OFFSETS_2D = ((0, 0), (1, 0), (0, 1), (1, 1))
SECOND_BEAM_OFFSETS_2D_HIGH_RANK = ((1, 0), (0, 1), (1, 1))


@dataclass(frozen=True)
class BeamGrid:
    """Oversampled DFT grid of beams, each of length n1*n2 with unit-modulus entries."""

    n1: int
    n2: int
    o1: int
    o2: int
    beams: np.ndarray  # (n1*o1, n2*o2, n1*n2)

    @property
    def l_size(self) -> int:
        return self.n1 * self.o1

    @property
    def m_size(self) -> int:
        return self.n2 * self.o2

    @property
    def n_beams(self) -> int:
        return self.l_size * self.m_size

    def beam(self, l: int, m: int) -> np.ndarray:
        if not (0 <= l < self.l_size and 0 <= m < self.m_size):
            raise ValueError(f"beam index ({l}, {m}) outside grid {self.l_size}x{self.m_size}")
        return self.beams[l, m]

    def indices(self):
        """All (l, m) pairs in row-major order (l outer, m inner)."""
        for l in range(self.l_size):
            for m in range(self.m_size):
                yield (l, m)

    def flat(self) -> np.ndarray:
        """Beams as a (n_beams, n1*n2) matrix in `indices()` order."""
        return self.beams.reshape(self.n_beams, self.n1 * self.n2)


def horizontal_beam(l: int, n1: int, o1: int) -> np.ndarray:
    p = np.arange(n1)
    return np.exp(2j * np.pi * l * p / (o1 * n1))


def vertical_beam(m: int, n2: int, o2: int) -> np.ndarray:
    q = np.arange(n2)
    return np.exp(2j * np.pi * m * q / (o2 * n2))


def build_beam_grid(n1: int, n2: int, o1: int, o2: int) -> BeamGrid:
    """All n1*o1 x n2*o2 beams, each the Kronecker product of the two axis beams."""
    if min(n1, n2, o1, o2) < 1:
        raise ValueError("grid parameters must all be >= 1")
    beams = np.empty((n1 * o1, n2 * o2, n1 * n2), dtype=np.complex128)
    for l in range(n1 * o1):
        h = horizontal_beam(l, n1, o1)
        for m in range(n2 * o2):
            v = vertical_beam(m, n2, o2)
            beams[l, m] = kronecker(h[:, None], v[:, None])[:, 0]
    return BeamGrid(n1=n1, n2=n2, o1=o1, o2=o2, beams=beams)


def restricted_grid(primary: tuple[int, int], grid: BeamGrid, layer: int) -> list[tuple[int, int]]:
    """Candidate indices for the co-scheduled second beam.

    Offsets from the data tables are applied to the primary index modulo the
    grid size (the DFT beam family is periodic in both indices, so every
    wrapped candidate is a genuine beam and edge primaries keep a full set).
    Duplicate wrapped indices collapse to one candidate. For layer 2 the
    primary beam itself (offset 0) is a candidate; layers 3-4 require a
    distinct, orthogonal second beam. Layer 1 needs no second beam, so the
    set is empty.
    """
    l, m = primary
    if not (0 <= l < grid.l_size and 0 <= m < grid.m_size):
        raise ValueError(f"primary beam index ({l}, {m}) outside grid")
    if layer == 1:
        return []
    if grid.n2 == 1:
        offsets = SECOND_BEAM_OFFSETS_1D if layer == 2 else SECOND_BEAM_OFFSETS_1D_HIGH_RANK
    else:
        offsets = SECOND_BEAM_OFFSETS_2D if layer == 2 else SECOND_BEAM_OFFSETS_2D_HIGH_RANK
    candidates = []
    for k1, k2 in offsets:
        cand = ((l + k1 * grid.o1) % grid.l_size, (m + k2 * grid.o2) % grid.m_size)
        if cand not in candidates and not (layer >= 3 and cand == primary):
            candidates.append(cand)
    return candidates


def cophase_indices(layer: int) -> tuple[int, ...]:
    """Allowed co-phasing indices n: four QPSK phases for one layer, {1, j} above."""
    return (0, 1, 2, 3) if layer == 1 else (0, 1)


def cophase_value(n: int) -> complex:
    """Co-phasing scalar exp(j*pi*n/2), i.e. one of 1, j, -1, -j."""
    return complex(np.exp(1j * np.pi * n / 2.0))


@dataclass(frozen=True)
class PrecoderMatrix:
    """Assembled precoder: (p_csirs x layer) matrix with unit Frobenius norm."""

    matrix: np.ndarray
    layer: int
    subband_index: int = 0


def assemble_precoder(beam1: np.ndarray, beam2: np.ndarray | None, cophase_index: int,
                      layer: int, p_csirs: int, subband_index: int = 0) -> PrecoderMatrix:
    """Stack the selected beam(s) over both polarizations with co-phasing.

    Layer 1 gives the single column [v; phi*v]; layers 2-4 combine the two
    beams with alternating co-phase signs. Everything is scaled by
    1/sqrt(layer * p_csirs) so the result has unit Frobenius norm.
    """
    if layer not in (1, 2, 3, 4):
        raise ValueError(f"layer must be in 1..4, got {layer}")
    if p_csirs % 2 != 0 or p_csirs < 2:
        raise ValueError(f"p_csirs must be even and >= 2, got {p_csirs}")
    if layer >= 3 and p_csirs >= 16:
        raise ValueError("layer 3-4 assembly only supports port counts below 16")
    v1 = np.asarray(beam1, dtype=np.complex128).reshape(-1)
    if v1.shape[0] != p_csirs // 2:
        raise ValueError(f"beam length {v1.shape[0]} does not match p_csirs/2 = {p_csirs // 2}")
    if cophase_index not in cophase_indices(layer):
        raise ValueError(f"co-phase index {cophase_index} invalid for layer {layer}")
    if layer >= 2:
        if beam2 is None:
            raise ValueError(f"layer {layer} requires a second beam")
        v2 = np.asarray(beam2, dtype=np.complex128).reshape(-1)
        if v2.shape[0] != p_csirs // 2:
            raise ValueError(f"second beam length {v2.shape[0]} does not match p_csirs/2")

    phi = cophase_value(cophase_index)
    if layer == 1:
        columns = [np.concatenate([v1, phi * v1])]
    elif layer == 2:
        columns = [np.concatenate([v1, phi * v1]), np.concatenate([v2, -phi * v2])]
    elif layer == 3:
        columns = [np.concatenate([v1, phi * v1]), np.concatenate([v2, phi * v2]),
                   np.concatenate([v1, -phi * v1])]
    else:
        columns = [np.concatenate([v1, phi * v1]), np.concatenate([v2, phi * v2]),
                   np.concatenate([v1, -phi * v1]), np.concatenate([v2, -phi * v2])]

    matrix = np.stack(columns, axis=1) / np.sqrt(layer * p_csirs)
    return PrecoderMatrix(matrix=matrix, layer=layer, subband_index=subband_index)


def dump_codebook(n1: int, n2: int, o1: int, o2: int, layer: int) -> dict:
    """JSON-ready dump of all beams and assembled precoders for inspection.

    Complex scalars are emitted as [real, imag] pairs.
    """
    grid = build_beam_grid(n1, n2, o1, o2)
    p_csirs = 2 * n1 * n2

    def c2l(arr: np.ndarray):
        return [[float(x.real), float(x.imag)] for x in np.asarray(arr).reshape(-1)]

    beams = [{"l": l, "m": m, "entries": c2l(grid.beam(l, m))} for l, m in grid.indices()]
    precoders = []
    for l, m in grid.indices():
        seconds = restricted_grid((l, m), grid, layer) or [None]
        for second in seconds:
            beam2 = grid.beam(*second) if second is not None else None
            for n in cophase_indices(layer):
                w = assemble_precoder(grid.beam(l, m), beam2, n, layer, p_csirs)
                entry = {"beam1": [l, m], "cophase": n, "layer": layer,
                         "matrix": c2l(w.matrix), "shape": list(w.matrix.shape)}
                if second is not None:
                    entry["beam2"] = list(second)
                precoders.append(entry)
    return {"n1": n1, "n2": n2, "o1": o1, "o2": o2, "layer": layer,
            "p_csirs": p_csirs, "n_beams": grid.n_beams,
            "beams": beams, "precoders": precoders}
