"""Experiment orchestration: seeded Monte-Carlo sweeps over the joint pipeline.

One trial draws a channel realization, optimizes the surface phases for each
requested objective, runs the requested precoder selections on the resulting
cascaded channel and evaluates the rate on every SNR grid point. Sweeps
aggregate trials into one row per (selector, objective, SNR) combination and
persist CSV/JSON artifacts plus rendered rate curves.

Everything is a pure function of the configuration including its seed: trial
i derives its own seed from (master seed, i), so results do not depend on
execution order and repeated runs are byte-identical.
"""

from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

from .channel import PathLossParams, cascade, cascade_subbands, generate_channels
from .codebook import BeamGrid, assemble_precoder, build_beam_grid
from .errors import ConfigError, NumericalError
from .linalg import herm, hermitian_solve, hermitian_condition, CONDITION_LIMIT
from .risopt import mca_optimize
from .selector import CsiReport, select_conventional, select_proposed

logger = logging.getLogger(__name__)

SELECTOR_KINDS = ("proposed", "conventional")
METRIC_KINDS = ("lambda", "effrank")
FLOAT_FORMAT = "%.12g"


@dataclass
class ExperimentConfig:
    """Scenario description; JSON mirrors this field for field."""

    name: str = "scenario"
    n_t: int = 4
    n_r: int = 4
    n1: int = 2
    n2: int = 1
    o1: int = 4
    o2: int = 1
    n_ris_x: int = 8
    n_ris_y: int = 8
    bits: int = 4
    layer: int = 4
    n3: int = 8
    snr_grid_db: tuple = (-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0)
    trials: int = 200
    t_random: int = 200
    n_ris_new: int = 6
    metric_kind: str = "lambda"
    selector_kind: str = "both"
    # Default scenario uses a cluster-rich channel so a 4x4 link is full rank
    # and rank-4 equalization is feasible; the channel generator itself
    # defaults to 3 clusters when a scenario does not say otherwise.
    clusters: int = 6
    delay_spread_ns: float = 300.0
    carrier_frequency_hz: float = 4.0e9
    subcarrier_spacing_hz: float = 30.0e3
    n_subcarriers: int = 2048
    cophase_reference: str = "subband"
    rate_average: str = "subband"
    rate_metric: str = "zf"
    tap_profile: object = None  # path to a JSON tap file, or inline cluster list
    path_loss: PathLossParams = field(default_factory=PathLossParams)
    seed: int = 1

    @property
    def p_csirs(self) -> int:
        return self.n_t

    @property
    def n_ris(self) -> int:
        return self.n_ris_x * self.n_ris_y

    @property
    def bandwidth_hz(self) -> float:
        return self.subcarrier_spacing_hz * self.n_subcarriers

    def metrics(self) -> list[str]:
        return list(METRIC_KINDS) if self.metric_kind == "both" else [self.metric_kind]

    def selectors(self) -> list[str]:
        return list(SELECTOR_KINDS) if self.selector_kind == "both" else [self.selector_kind]

    def validate(self) -> None:
        if self.n_t != 2 * self.n1 * self.n2:
            raise ConfigError(
                f"port count mismatch: n_t={self.n_t} but 2*n1*n2={2 * self.n1 * self.n2}")
        if min(self.n_t, self.n_r, self.n1, self.n2, self.o1, self.o2) < 1:
            raise ConfigError("antenna and grid parameters must be >= 1")
        if min(self.n_ris_x, self.n_ris_y) < 1:
            raise ConfigError("surface dimensions must be >= 1")
        if not 1 <= self.bits <= 16:
            raise ConfigError(f"bits must be in [1, 16], got {self.bits}")
        if not 1 <= self.layer <= min(4, self.n_t, self.n_r):
            raise ConfigError(
                f"layer must be in [1, {min(4, self.n_t, self.n_r)}], got {self.layer}")
        if self.n3 < 1:
            raise ConfigError(f"subband count must be >= 1, got {self.n3}")
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        if self.t_random < 2:
            raise ConfigError(f"t_random must be >= 2, got {self.t_random}")
        if not 0 <= self.n_ris_new <= min(self.n_ris, 20):
            raise ConfigError(
                f"n_ris_new must be in [0, {min(self.n_ris, 20)}], got {self.n_ris_new}")
        if self.metric_kind not in METRIC_KINDS + ("both",):
            raise ConfigError(f"metric_kind must be one of {METRIC_KINDS + ('both',)}")
        if self.selector_kind not in SELECTOR_KINDS + ("both",):
            raise ConfigError(f"selector_kind must be one of {SELECTOR_KINDS + ('both',)}")
        if self.cophase_reference not in ("subband", "wideband"):
            raise ConfigError("cophase_reference must be 'subband' or 'wideband'")
        if self.rate_average not in ("subband", "wideband"):
            raise ConfigError("rate_average must be 'subband' or 'wideband'")
        if self.rate_metric not in ("zf", "gram"):
            raise ConfigError("rate_metric must be 'zf' or 'gram'")
        if self.clusters < 1:
            raise ConfigError(f"cluster count must be >= 1, got {self.clusters}")
        if self.delay_spread_ns < 0.0:
            raise ConfigError("delay spread must be >= 0")
        if self.subcarrier_spacing_hz <= 0.0 or self.n_subcarriers < 1:
            raise ConfigError("subcarrier spacing and count must be positive")
        if any(not np.isfinite(s) for s in self.snr_grid_db):
            raise ConfigError("SNR grid entries must be finite")
        try:
            self.path_loss.validate()
        except ValueError as exc:
            raise ConfigError(f"path loss geometry: {exc}") from exc

    def to_json(self) -> dict:
        data = asdict(self)
        data["snr_grid_db"] = list(self.snr_grid_db)
        data["path_loss"] = self.path_loss.to_json()
        return data

    @classmethod
    def from_json(cls, data: dict) -> "ExperimentConfig":
        data = dict(data)
        unknown = set(data) - {f for f in cls.__dataclass_fields__}
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        if "snr_grid_db" in data:
            data["snr_grid_db"] = tuple(float(s) for s in data["snr_grid_db"])
        if "path_loss" in data and isinstance(data["path_loss"], dict):
            data["path_loss"] = PathLossParams.from_json(data["path_loss"])
        return cls(**data)

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentConfig":
        try:
            with open(path, "r", encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_json(data)


def trial_seed(master_seed: int, trial_index: int) -> int:
    """Deterministic per-trial seed split, independent of execution order."""
    return int(np.random.SeedSequence([int(master_seed), int(trial_index)]).generate_state(1)[0])


@dataclass
class TrialFragment:
    """One trial's contribution to one (metric, selector) curve."""

    rates: np.ndarray         # (n_snr,)
    layer_snrs: np.ndarray    # (n_snr, layer); NaN where equalization failed
    op_value: float
    counters: dict
    zf_failed: bool
    report: CsiReport


def _band_grams(fbar: np.ndarray, fsubs: np.ndarray, report: CsiReport,
                grid: BeamGrid, cfg: ExperimentConfig) -> tuple[np.ndarray, np.ndarray]:
    """Effective-channel Grams per evaluated band, plus the first-subband precoder."""
    v1 = grid.beam(*report.beam1)
    v2 = grid.beam(*report.beam2) if report.beam2 is not None else None
    w0 = assemble_precoder(v1, v2, report.cophase[0], cfg.layer, cfg.p_csirs, 0).matrix
    if cfg.rate_average == "wideband":
        fw = (fbar @ w0)[None, :, :]
    else:
        mats = np.stack([
            assemble_precoder(v1, v2, report.cophase[t], cfg.layer, cfg.p_csirs, t).matrix
            for t in range(cfg.n3)])
        fw = fsubs @ mats
    return herm(fw) @ fw, w0


def _inverse_gram_diag(gram: np.ndarray) -> np.ndarray | None:
    """Diagonal of the inverse Gram, or None when it is not safely invertible."""
    cond = hermitian_condition(gram)
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        return None
    inv = hermitian_solve(gram, np.eye(gram.shape[0], dtype=np.complex128))
    return np.diag(inv).real


def _rates_from_grams(grams: np.ndarray, rho: np.ndarray, rate_metric: str) -> np.ndarray:
    """Band-averaged rate for every SNR at once.

    'gram' reads the per-layer signal powers straight off the Gram diagonal;
    'zf' uses the post-equalization SNR (inverse Gram diagonal), which is NaN
    whenever the effective channel of some band is rank deficient.
    """
    if rate_metric == "gram":
        d = np.clip(np.einsum("tii->ti", grams).real, 0.0, None)
        return np.log2(1.0 + rho[:, None, None] * d[None, :, :]).sum(axis=2).mean(axis=1)
    layer_snrs = []
    for gram in grams:
        inv_diag = _inverse_gram_diag(gram)
        if inv_diag is None:
            return np.full(rho.shape, np.nan)
        layer_snrs.append(1.0 / inv_diag)
    snr1 = np.asarray(layer_snrs)  # (bands, layer) at unit average SNR
    return np.log2(1.0 + rho[:, None, None] * snr1[None, :, :]).sum(axis=2).mean(axis=1)


def run_trial(cfg: ExperimentConfig, seed: int, trace: list | None = None
              ) -> dict[tuple[str, str], TrialFragment]:
    """Channel draw -> surface optimization -> selection -> rate, for one seed.

    Channel and optimizer seeds are derived from `seed` only, so all
    (metric, selector) curves of a trial share the same channel realization
    and, per metric, the same optimized surface.
    """
    state = np.random.SeedSequence([int(seed)]).generate_state(2)
    chan_seed, mca_seed = int(state[0]), int(state[1])
    channels = generate_channels(cfg, chan_seed)
    grid = build_beam_grid(cfg.n1, cfg.n2, cfg.o1, cfg.o2)
    rho = 10.0 ** (np.asarray(cfg.snr_grid_db, dtype=np.float64) / 10.0)
    n_snr = rho.shape[0]

    out: dict[tuple[str, str], TrialFragment] = {}
    for metric in cfg.metrics():
        mca_trace: list | None = [] if trace is not None else None
        best_cfg, opm, _ = mca_optimize(channels, cfg, metric, cfg.layer, mca_seed,
                                        trace=mca_trace)
        if trace is not None:
            trace.extend({"metric": metric, **rec} for rec in mca_trace)
        fbar = cascade(channels, best_cfg)
        fsubs = cascade_subbands(channels, best_cfg)

        for sel in cfg.selectors():
            rates = np.zeros(n_snr)
            layer_snrs = np.full((n_snr, cfg.layer), np.nan)
            if sel == "proposed":
                report = select_proposed(fbar, grid, cfg.n3, cfg.layer, fsubs,
                                         cophase_reference=cfg.cophase_reference,
                                         op=opm.value)
                grams, w0 = _band_grams(fbar, fsubs, report, grid, cfg)
                rates = _rates_from_grams(grams, rho, cfg.rate_metric)
                inv_diag = _inverse_gram_diag(herm(fbar @ w0) @ (fbar @ w0))
                if inv_diag is not None:
                    layer_snrs = rho[:, None] / inv_diag[None, :]
                counters = report.counters.as_dict()
            else:
                counters = None
                report = None
                for s in range(n_snr):
                    rep = select_conventional(fbar, grid, cfg.n3, cfg.layer, fsubs,
                                              noise_var=1.0 / rho[s], op=opm.value)
                    grams, w0 = _band_grams(fbar, fsubs, rep, grid, cfg)
                    rates[s] = _rates_from_grams(grams, rho[s:s + 1], cfg.rate_metric)[0]
                    inv_diag = _inverse_gram_diag(herm(fbar @ w0) @ (fbar @ w0))
                    if inv_diag is not None:
                        layer_snrs[s] = rho[s] / inv_diag
                    if counters is None:
                        counters = rep.counters.as_dict()
                        report = rep
            zf_failed = bool(np.isnan(rates).any() or np.isnan(layer_snrs).all())
            out[(metric, sel)] = TrialFragment(rates=rates, layer_snrs=layer_snrs,
                                               op_value=opm.value, counters=counters,
                                               zf_failed=zf_failed, report=report)
    return out


@dataclass
class ResultRow:
    """Aggregated sweep output for one (selector, objective, SNR) point."""

    scenario: str
    snr_db: float
    selector: str
    metric: str
    n_ris: int
    n_t: int
    n_r: int
    layer: int
    mean_rate: float
    stderr: float
    mean_layer_snr: tuple
    mean_op: float
    counters: dict
    trials: int
    zf_failures: int
    errors: int

    def to_json(self) -> dict:
        data = asdict(self)
        data["mean_layer_snr"] = list(self.mean_layer_snr)
        return data


def run_sweep(cfg: ExperimentConfig, out_dir: str | Path | None = None,
              figures: bool = True, trace: bool = False) -> list[ResultRow]:
    """Run all trials and aggregate one row per (selector, objective, SNR).

    When `out_dir` is given, writes results.csv, results.json, config.json,
    the rendered rate curves and (optionally) the optimizer trace there.
    Trials that fail numerically are excluded from the aggregates and counted
    in the rows' `errors` field.
    """
    cfg.validate()
    snr_grid = [float(s) for s in cfg.snr_grid_db]
    rows: list[ResultRow] = []
    trace_records: list | None = [] if trace else None

    if not snr_grid:
        logger.warning("empty SNR grid: nothing to sweep")
    else:
        keys = [(m, s) for m in cfg.metrics() for s in cfg.selectors()]
        acc = {k: {"rates": [], "snrs": [], "ops": [], "counters": None,
                   "errors": 0} for k in keys}
        for i in range(cfg.trials):
            seed_i = trial_seed(cfg.seed, i)
            trial_trace: list | None = [] if trace else None
            try:
                frags = run_trial(cfg, seed_i, trace=trial_trace)
            except NumericalError as exc:
                logger.warning("trial %d failed and was excluded: %s", i, exc)
                for k in keys:
                    acc[k]["errors"] += 1
                continue
            if trace_records is not None:
                trace_records.extend({"trial": i, **rec} for rec in trial_trace)
            for k in keys:
                frag = frags[k]
                slot = acc[k]
                slot["rates"].append(frag.rates)
                slot["snrs"].append(frag.layer_snrs)
                slot["ops"].append(frag.op_value)
                if slot["counters"] is None:
                    slot["counters"] = {key: 0 for key in frag.counters}
                for key, val in frag.counters.items():
                    slot["counters"][key] += val

        for metric, sel in keys:
            slot = acc[(metric, sel)]
            n_done = len(slot["rates"])
            rates = np.asarray(slot["rates"])            # (n_done, n_snr)
            snrs = np.asarray(slot["snrs"])              # (n_done, n_snr, layer)
            mean_op = float(np.mean(slot["ops"])) if n_done else float("nan")
            for si, snr_db in enumerate(snr_grid):
                col = rates[:, si] if n_done else np.array([])
                ok = col[np.isfinite(col)]
                n_ok = ok.shape[0]
                mean_rate = float(ok.mean()) if n_ok else float("nan")
                stderr = float(ok.std(ddof=1) / np.sqrt(n_ok)) if n_ok > 1 else 0.0
                if n_done:
                    per_layer = snrs[:, si, :]
                    finite = np.isfinite(per_layer)
                    layer_mean = tuple(
                        float(per_layer[finite[:, r], r].mean()) if finite[:, r].any() else float("nan")
                        for r in range(per_layer.shape[1]))
                else:
                    layer_mean = tuple()
                rows.append(ResultRow(
                    scenario=cfg.name, snr_db=snr_db, selector=sel, metric=metric,
                    n_ris=cfg.n_ris, n_t=cfg.n_t, n_r=cfg.n_r, layer=cfg.layer,
                    mean_rate=mean_rate, stderr=stderr, mean_layer_snr=layer_mean,
                    mean_op=mean_op, counters=dict(slot["counters"] or {}),
                    trials=n_ok, zf_failures=n_done - n_ok, errors=slot["errors"]))

    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_csv(rows, out / "results.csv")
        with open(out / "results.json", "w", encoding="utf-8") as fh:
            json.dump([r.to_json() for r in rows], fh, indent=2)
            fh.write("\n")
        with open(out / "config.json", "w", encoding="utf-8") as fh:
            json.dump(cfg.to_json(), fh, indent=2)
            fh.write("\n")
        if trace_records is not None:
            with open(out / "trace.jsonl", "w", encoding="utf-8") as fh:
                for rec in trace_records:
                    fh.write(json.dumps(rec) + "\n")
        if figures and rows:
            from .plots import render_rate_curves
            render_rate_curves(rows, out / "rates.png",
                               title=f"{cfg.name}: {cfg.n_t}x{cfg.n_r}, "
                                     f"{cfg.n_ris} elements, rank {cfg.layer}")
    return rows


def csv_text(rows: list[ResultRow]) -> str:
    """Curve CSV with fixed 12-significant-digit formatting."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["snr_db", "selector", "metric", "n_ris", "n_t", "n_r",
                     "mean_rate", "stderr"])
    for r in rows:
        writer.writerow([FLOAT_FORMAT % r.snr_db, r.selector, r.metric,
                         r.n_ris, r.n_t, r.n_r,
                         FLOAT_FORMAT % r.mean_rate, FLOAT_FORMAT % r.stderr])
    return buf.getvalue()


def write_csv(rows: list[ResultRow], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(csv_text(rows))
