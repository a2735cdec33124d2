import numpy as np
import pytest

from rismimo.codebook import assemble_precoder, build_beam_grid, cophase_indices, restricted_grid
from rismimo.linalg import herm
from rismimo.selector import (CsiReport, complexity_report, select_conventional,
                              select_proposed)


def random_complex(rng, rows, cols):
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)


def make_inputs(rng, n_r=4, p=4, n3=3):
    f = random_complex(rng, n_r, p)
    subs = np.stack([random_complex(rng, n_r, p) for _ in range(n3)])
    return f, subs


GRID4 = build_beam_grid(2, 1, 4, 1)


def metric_value(f, w, rho):
    d = np.diag(herm(f @ w) @ (f @ w)).real
    return float(np.log2(1.0 + rho * d).sum())


def test_aligned_rank_one_channel_recovers_beam():
    # Constructed alignment: channel column space sits exactly on one grid
    # beam duplicated over both polarizations, so that beam and the identity
    # co-phase must win.
    beam = GRID4.beam(3, 0)
    w_full = np.concatenate([beam, beam]) / np.sqrt(2.0)
    u = np.array([1.0, -1j, 0.5, 0.25])
    f = np.outer(u, w_full.conj())
    subs = np.stack([f, f])
    report = select_proposed(f, GRID4, 2, 1, subs)
    assert report.beam1 == (3, 0)
    assert report.beam2 is None
    assert report.cophase == [0, 0]


def test_proposed_beam1_is_layer_independent():
    rng = np.random.default_rng(1)
    f, subs = make_inputs(rng)
    r1 = select_proposed(f, GRID4, 3, 1, subs)
    r4 = select_proposed(f, GRID4, 3, 4, subs)
    assert r1.beam1 == r4.beam1
    assert r1.counters.wideband_inner_products == r4.counters.wideband_inner_products
    assert r1.counters.secondary_inner_products == 0
    assert r4.counters.secondary_inner_products == len(restricted_grid(r4.beam1, GRID4, 4))
    assert r1.beam2 is None and r4.beam2 is not None


def test_proposed_matches_exhaustive_argmax_oracle():
    # Oracle: independent loop over the grid comparing |v^H w*| directly.
    rng = np.random.default_rng(2)
    for _ in range(25):
        f, subs = make_inputs(rng)
        report = select_proposed(f, GRID4, 3, 1, subs)
        _, _, vh = np.linalg.svd(f)
        w_star = np.conj(vh[0, :])[:2]
        best, best_score = None, -1.0
        for l in range(GRID4.l_size):
            for m in range(GRID4.m_size):
                score = abs(np.vdot(GRID4.beam(l, m), w_star))
                if score > best_score:
                    best, best_score = (l, m), score
        assert report.beam1 == best


def test_proposed_cophase_counts_and_range():
    rng = np.random.default_rng(3)
    f, subs = make_inputs(rng, n3=5)
    r = select_proposed(f, GRID4, 5, 1, subs)
    assert len(r.cophase) == 5
    assert all(n in (0, 1, 2, 3) for n in r.cophase)
    assert r.counters.cophase_inner_products == 4 * 5
    r2 = select_proposed(f, GRID4, 5, 2, subs)
    assert all(n in (0, 1) for n in r2.cophase)
    assert r2.counters.cophase_inner_products == 2 * 5


def test_proposed_scale_invariance():
    rng = np.random.default_rng(4)
    f, subs = make_inputs(rng)
    a = select_proposed(f, GRID4, 3, 2, subs)
    b = select_proposed(3.7 * f, GRID4, 3, 2, 3.7 * subs)
    assert (a.beam1, a.beam2, a.cophase) == (b.beam1, b.beam2, b.cophase)


def test_proposed_wideband_cophase_reference():
    rng = np.random.default_rng(5)
    f, subs = make_inputs(rng, n3=4)
    r = select_proposed(f, GRID4, 4, 1, subs, cophase_reference="wideband")
    # With the wideband reference every subband sees the same argmax.
    assert len(set(r.cophase)) == 1
    with pytest.raises(ValueError):
        select_proposed(f, GRID4, 4, 1, subs, cophase_reference="bogus")


def test_proposed_validation():
    rng = np.random.default_rng(6)
    f, subs = make_inputs(rng)
    with pytest.raises(ValueError):
        select_proposed(f, GRID4, 3, 0, subs)
    with pytest.raises(ValueError):
        select_proposed(f, GRID4, 2, 1, subs)  # n3 mismatch
    with pytest.raises(ValueError):
        select_proposed(f[:, :3], GRID4, 3, 1, subs[:, :, :3])  # odd ports
    with pytest.raises(ValueError):
        select_proposed(f, build_beam_grid(2, 2, 4, 4), 3, 1, subs)  # grid/port mismatch


def test_conventional_matches_brute_force_oracle():
    # Oracle: independent nested loops over (beam1, beam2, cophase) scoring
    # the per-layer rate metric on the wideband channel.
    rng = np.random.default_rng(7)
    for trial in range(10):
        f, subs = make_inputs(rng)
        rho = 10.0
        report = select_conventional(f, GRID4, 3, 2, subs, noise_var=1.0 / rho)
        best_score = -1.0
        best = None
        for l in range(GRID4.l_size):
            for m in range(GRID4.m_size):
                for second in restricted_grid((l, m), GRID4, 2):
                    for n in cophase_indices(2):
                        w = assemble_precoder(GRID4.beam(l, m), GRID4.beam(*second), n, 2, 4)
                        score = metric_value(f, w.matrix, rho)
                        if score > best_score:
                            best_score, best = score, ((l, m), second)
        w_sel = assemble_precoder(GRID4.beam(*report.beam1), GRID4.beam(*report.beam2),
                                  0, 2, 4)
        # The selected pair achieves the oracle maximum (tie-allowing check on
        # the metric value, computed with the selector's own wideband cophase
        # only for beams; the oracle fixes beams, so compare pairs directly).
        assert (report.beam1, report.beam2) == best


def test_conventional_cophase_maximizes_subband_metric():
    rng = np.random.default_rng(8)
    f, subs = make_inputs(rng, n3=4)
    rho = 5.0
    report = select_conventional(f, GRID4, 4, 1, subs, noise_var=1.0 / rho)
    v1 = GRID4.beam(*report.beam1)
    for t in range(4):
        scores = [metric_value(subs[t], assemble_precoder(v1, None, n, 1, 4).matrix, rho)
                  for n in cophase_indices(1)]
        assert report.cophase[t] == int(np.argmax(scores))


def test_conventional_never_below_proposed_on_wideband_metric():
    rng = np.random.default_rng(9)
    for _ in range(20):
        f, subs = make_inputs(rng)
        rho = 31.6
        conv = select_conventional(f, GRID4, 3, 2, subs, noise_var=1.0 / rho)
        prop = select_proposed(f, GRID4, 3, 2, subs)
        w_conv = assemble_precoder(GRID4.beam(*conv.beam1), GRID4.beam(*conv.beam2),
                                   conv.cophase[0], 2, 4).matrix
        conv_best = max(metric_value(f, assemble_precoder(
            GRID4.beam(*conv.beam1), GRID4.beam(*conv.beam2), n, 2, 4).matrix, rho)
            for n in cophase_indices(2))
        for n in prop.cophase:
            w_prop = assemble_precoder(GRID4.beam(*prop.beam1), GRID4.beam(*prop.beam2),
                                       n, 2, 4).matrix
            assert conv_best >= metric_value(f, w_prop, rho) - 1e-9
        assert conv_best >= metric_value(f, w_conv, rho) - 1e-9


def test_rank_one_noiseless_alignment_agrees():
    # Both strategies maximize the same aligned quantity on a rank-one
    # channel sitting exactly on a grid beam.
    beam = GRID4.beam(5, 0)
    w_full = np.concatenate([beam, 1j * beam]) / np.sqrt(2.0)
    u = np.array([0.3, 1.0, -0.2, 0.7])
    f = np.outer(u, w_full.conj())
    subs = np.stack([f, f, f])
    prop = select_proposed(f, GRID4, 3, 1, subs)
    conv = select_conventional(f, GRID4, 3, 1, subs, noise_var=1e-6)
    assert prop.beam1 == conv.beam1 == (5, 0)
    assert prop.cophase == conv.cophase


def test_counter_layer_growth_for_conventional():
    rng = np.random.default_rng(10)
    f, subs = make_inputs(rng)
    r1 = select_conventional(f, GRID4, 3, 1, subs, noise_var=0.1)
    r2 = select_conventional(f, GRID4, 3, 2, subs, noise_var=0.1)
    assert r2.counters.wideband_inner_products > r1.counters.wideband_inner_products
    assert r1.counters.wideband_inner_products == GRID4.n_beams * 4
    assert r2.counters.wideband_inner_products == GRID4.n_beams * 2 * 2 * 2


def test_cophase_counter_scales_with_subbands():
    rng = np.random.default_rng(11)
    f, _ = make_inputs(rng, n3=1)
    subs4 = np.stack([random_complex(rng, 4, 4) for _ in range(4)])
    subs8 = np.concatenate([subs4, subs4])
    a = select_proposed(f, GRID4, 4, 1, subs4)
    b = select_proposed(f, GRID4, 8, 1, subs8)
    assert b.counters.cophase_inner_products == 2 * a.counters.cophase_inner_products


def test_complexity_report_fields():
    rng = np.random.default_rng(12)
    f, subs = make_inputs(rng)
    p1 = select_proposed(f, GRID4, 3, 1, subs)
    p4 = select_proposed(f, GRID4, 3, 4, subs)
    rec = complexity_report(p1, p4)
    assert rec["wideband_delta"] == 0
    assert rec["secondary_delta"] == p4.counters.secondary_inner_products
    c1 = select_conventional(f, GRID4, 3, 1, subs, noise_var=0.1)
    c4 = select_conventional(f, GRID4, 3, 4, subs, noise_var=0.1)
    rec2 = complexity_report(c1, c4)
    assert rec2["wideband_ratio"] > 1.0
    assert rec2["total_ratio"] > 1.0


def test_report_json_round_trip():
    rng = np.random.default_rng(13)
    f, subs = make_inputs(rng)
    report = select_proposed(f, GRID4, 3, 2, subs, op=0.75)
    data = report.to_json()
    again = CsiReport.from_json(data)
    assert again == report
    assert data["op"] == 0.75


def test_report_validation():
    with pytest.raises(ValueError):
        CsiReport(beam1=(0, 0), beam2=None, cophase=[0], rank=1, op=-1.0)
    with pytest.raises(ValueError):
        CsiReport(beam1=(0, 0), beam2=(1, 0), cophase=[3], rank=2)  # 3 invalid for rank 2
