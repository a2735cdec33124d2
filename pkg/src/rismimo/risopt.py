"""Surface phase optimization: spectrum-based objectives and crossover search.

Two objectives ("OP" scalars) are supported. The ratio objective rewards
concentrating channel energy in the strongest one or two singular values,
which is what the singular-vector-aligned precoder selection exploits; the
entropy effective rank of the singular value distribution serves as the
benchmark objective. The search itself is a two-parent crossover: score T
random configurations, keep the best two, enumerate every combination of
their phases on a small set of swapped element positions and return the best
candidate seen.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelSet, cascade_many
from .errors import NumericalError
from .linalg import singular_values
from .ris import RisConfiguration, sample_configurations

METRIC_LAMBDA = "lambda_based"
METRIC_EFFRANK = "effective_rank"

_METRIC_ALIASES = {
    "lambda": METRIC_LAMBDA,
    "lambda_based": METRIC_LAMBDA,
    "effrank": METRIC_EFFRANK,
    "effective_rank": METRIC_EFFRANK,
}

# Offspring sets are enumerated exhaustively; cap the exponent.
MAX_SWAP_ELEMENTS = 20


def canonical_metric(kind: str) -> str:
    try:
        return _METRIC_ALIASES[kind.lower()]
    except KeyError:
        raise ValueError(f"unknown metric kind {kind!r}; expected one of {sorted(_METRIC_ALIASES)}")


@dataclass(frozen=True)
class OpMetric:
    """A scored objective: which objective, the (clamped) layer it used, the value."""

    kind: str
    layer: int
    value: float


def _clamp_layer(layer: int) -> int:
    # Beam selection only ever consumes the two strongest singular vectors,
    # so the ratio objective never counts more than two values.
    if layer < 1:
        raise ValueError(f"layer must be >= 1, got {layer}")
    return min(layer, 2)


def _ratio_values(sv: np.ndarray, nu: int) -> np.ndarray:
    totals = sv.sum(axis=-1)
    if np.any(totals <= 0.0):
        raise NumericalError("all-zero channel matrix: ratio objective undefined")
    k = min(nu, sv.shape[-1])
    return sv[..., :k].sum(axis=-1) / totals


def _effective_rank_values(sv: np.ndarray) -> np.ndarray:
    totals = sv.sum(axis=-1, keepdims=True)
    if np.any(totals <= 0.0):
        raise NumericalError("all-zero channel matrix: effective rank undefined")
    p = sv / totals
    with np.errstate(divide="ignore", invalid="ignore"):
        plogp = np.where(p > 0.0, p * np.log(p), 0.0)
    return np.exp(-plogp.sum(axis=-1))


def op_lambda(f, layer: int) -> OpMetric:
    """Share of the spectrum carried by the strongest min(layer, 2) singular values."""
    nu = _clamp_layer(layer)
    sv = singular_values(np.asarray(f, dtype=np.complex128))
    return OpMetric(kind=METRIC_LAMBDA, layer=nu, value=float(_ratio_values(sv, nu)))


def op_effective_rank(f) -> OpMetric:
    """Entropy effective rank: exp of the Shannon entropy of the normalized spectrum."""
    sv = singular_values(np.asarray(f, dtype=np.complex128))
    return OpMetric(kind=METRIC_EFFRANK, layer=0, value=float(_effective_rank_values(sv)))


def _op_batch(mats: np.ndarray, kind: str, nu: int) -> np.ndarray:
    sv = singular_values(mats)
    if kind == METRIC_LAMBDA:
        return _ratio_values(sv, nu)
    return _effective_rank_values(sv)


@dataclass
class McaState:
    """Search trace: the two parents, the swapped positions and all offspring."""

    parents: tuple[RisConfiguration, RisConfiguration]
    parent_ops: tuple[float, float]
    swap_indices: tuple[int, ...]
    offspring: list[RisConfiguration]
    offspring_ops: np.ndarray
    best_index: int

    @property
    def best(self) -> tuple[RisConfiguration, float]:
        return self.offspring[self.best_index], float(self.offspring_ops[self.best_index])


def mca_optimize(channels: ChannelSet, scenario, metric_kind: str, layer: int, seed: int,
                 trace: list | None = None) -> tuple[RisConfiguration, OpMetric, McaState]:
    """Two-parent crossover search over quantized surface configurations.

    Scores `scenario.t_random` random configurations on the wideband cascaded
    channel, crosses the best two on `scenario.n_ris_new` randomly chosen
    element positions (all 2**n combinations, unswapped positions inherit from
    the best parent) and returns the best offspring. The best parent is
    itself among the offspring, so the result never regresses below the best
    random draw. Ties resolve to the earliest candidate.

    When `trace` is a list, one record per evaluated configuration is
    appended: {"phase_indices", "op_value", "stage"}.
    """
    kind = canonical_metric(metric_kind)
    nu = _clamp_layer(layer)
    t_random = int(scenario.t_random)
    n_new = int(scenario.n_ris_new)
    n_ris = channels.n_ris
    if t_random < 2:
        raise ValueError(f"need at least 2 initial configurations, got {t_random}")
    if n_new < 0 or n_new > n_ris:
        raise ValueError(f"n_ris_new must be in [0, {n_ris}], got {n_new}")
    if n_new > MAX_SWAP_ELEMENTS:
        raise ValueError(f"n_ris_new above {MAX_SWAP_ELEMENTS} is not enumerable")

    ss = np.random.SeedSequence(int(seed))
    sample_seed, swap_seed = (int(x) for x in ss.generate_state(2))

    configs = sample_configurations(t_random, n_ris, int(scenario.bits), sample_seed)
    coeffs = np.stack([c.reflection_coefficients() for c in configs])
    ops = _op_batch(cascade_many(channels, coeffs), kind, nu)
    if trace is not None:
        for c, v in zip(configs, ops):
            trace.append({"phase_indices": list(c.indices), "op_value": float(v),
                          "stage": "initial"})

    order = np.argsort(-ops, kind="stable")
    i_max, i_sub = int(order[0]), int(order[1])
    parent_max, parent_sub = configs[i_max], configs[i_sub]

    swap_rng = np.random.default_rng(swap_seed)
    swap = tuple(sorted(int(i) for i in swap_rng.choice(n_ris, size=n_new, replace=False)))

    offspring = []
    for pick in range(2**n_new):
        indices = list(parent_max.indices)
        for bit, pos in enumerate(swap):
            if (pick >> bit) & 1:
                indices[pos] = parent_sub.indices[pos]
        offspring.append(RisConfiguration(indices=tuple(indices), bits=parent_max.bits,
                                          amplitude=parent_max.amplitude))

    son_coeffs = np.stack([c.reflection_coefficients() for c in offspring])
    son_ops = _op_batch(cascade_many(channels, son_coeffs), kind, nu)
    if trace is not None:
        for c, v in zip(offspring, son_ops):
            trace.append({"phase_indices": list(c.indices), "op_value": float(v),
                          "stage": "offspring"})

    best_index = int(np.argmax(son_ops))
    state = McaState(parents=(parent_max, parent_sub),
                     parent_ops=(float(ops[i_max]), float(ops[i_sub])),
                     swap_indices=swap, offspring=offspring,
                     offspring_ops=son_ops, best_index=best_index)
    metric = OpMetric(kind=kind, layer=nu if kind == METRIC_LAMBDA else 0,
                      value=float(son_ops[best_index]))
    return offspring[best_index], metric, state
