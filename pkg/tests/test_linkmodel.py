import dataclasses

import numpy as np
import pytest

from ltelab.grid import CellConfig, ChannelKind, build_dl_grid, build_ul_grid
from ltelab.harness import RunConfig, run_scenario
from ltelab.interference import InterferenceScenario, apply_interference, footprint_for_scenario
from ltelab.linkmodel import (
    CellSearchOutcome,
    LinkConfig,
    ThroughputReport,
    cell_search_outcome,
    control_gate,
    control_means,
    db,
    estimate_throughput,
    per_re_sinr,
    pucch_failure_probability,
    sync_penalty,
    sync_tracking,
)

RUN = RunConfig()


@pytest.fixture(scope="module")
def dl():
    return build_dl_grid(CellConfig())


@pytest.fixture(scope="module")
def ul():
    return build_ul_grid(CellConfig())


def imap(grid, kind, isr):
    fp = footprint_for_scenario(InterferenceScenario.of(kind), grid)
    return apply_interference(grid, fp, isr)


def dl_deg(kind, isr):
    return run_scenario(RUN, InterferenceScenario.of(kind), isr)[0].dl_degradation


class TestSinr:
    def test_noise_only(self, dl):
        np.testing.assert_allclose(db(per_re_sinr(dl, None)), 20.0)

    def test_zero_db_target(self, dl):
        sinr = per_re_sinr(dl, imap(dl, 2, 0.0))
        # 1 / (0.01 + 1)
        assert db(sinr[0, 0]) == pytest.approx(-0.0432, abs=1e-4)
        assert db(sinr[599, 0]) == pytest.approx(20.0)

    def test_strong_interference_limit(self, dl):
        assert per_re_sinr(dl, imap(dl, 1, 200.0)).max() < 1e-19

    def test_shape_mismatch(self, dl):
        with pytest.raises(ValueError):
            per_re_sinr(dl, np.zeros((10, 140)))


class TestControlGate:
    def test_clean(self, dl):
        assert control_gate(control_means(dl, per_re_sinr(dl, None))).all()

    def test_full_band_strong(self, dl):
        sinr = per_re_sinr(dl, imap(dl, 1, 3.0))
        assert not control_gate(control_means(dl, sinr)).any()

    def test_pucch_leaves_dl_alone(self, ul):
        report = estimate_throughput(build_dl_grid(CellConfig()), None, ul, imap(ul, 3, 10.0))
        assert report.dl_mbps == 12.0
        assert all(s.control_ok for s in report.subframes)
        assert report.ul_mbps < 8.0


class TestThroughput:
    def test_nominal(self, dl, ul):
        r = estimate_throughput(dl, None, ul, None)
        assert (r.dl_mbps, r.ul_mbps) == (12.0, 8.0)
        assert r.degradation_fraction == 0.0

    def test_full_band_to_zero(self, dl, ul):
        r = estimate_throughput(dl, imap(dl, 1, 40.0), ul, imap(ul, 1, 40.0))
        assert r.dl_mbps == 0.0 and r.ul_mbps < 1e-6

    @pytest.mark.parametrize("isr", [0.0, 5.0])
    def test_ordering(self, isr):
        full, half, sync, spoof = (dl_deg(k, isr) for k in (1, 2, 6, 5))
        assert full >= half >= sync > spoof
        assert spoof < 0.02

    @pytest.mark.parametrize("isr", [-5.0, 0.0, 5.0])
    def test_dominance(self, isr):
        full, _ = run_scenario(RUN, InterferenceScenario.of(1), isr)
        half, _ = run_scenario(RUN, InterferenceScenario.of(2), isr)
        assert full.dl_mbps <= half.dl_mbps and full.ul_mbps <= half.ul_mbps

    @pytest.mark.parametrize("kind,dl_nominal,ul_nominal", [(3, True, False), (4, True, False),
                                                            (5, False, True), (6, False, True)])
    def test_direction_isolation(self, kind, dl_nominal, ul_nominal):
        r, _ = run_scenario(RUN, InterferenceScenario.of(kind), 5.0)
        assert (r.dl_mbps == 12.0) is dl_nominal
        assert (r.ul_mbps == 8.0) is ul_nominal

    def test_bounds_and_dict_round_trip(self):
        for kind in range(7):
            r, _ = run_scenario(RUN, InterferenceScenario.of(kind), 5.0)
            assert 0 <= r.dl_mbps <= 12.0 and 0 <= r.ul_mbps <= 8.0
            assert 0 <= r.degradation_fraction <= 1
            assert ThroughputReport.from_dict(r.to_dict()) == r

    def test_sync_interference_energy_efficient(self):
        for isr in (0.0, 5.0):
            sync, m = run_scenario(RUN, InterferenceScenario.of(6), isr)
            full, _ = run_scenario(RUN, InterferenceScenario.of(1), m.isr_f_db)
            assert sync.dl_degradation > full.dl_degradation

    def test_duty_cycle_blends(self):
        s = InterferenceScenario.of(1, 5.0)
        full, _ = run_scenario(RUN, s)
        half, _ = run_scenario(RUN, dataclasses.replace(s, duty_cycle=0.5))
        assert half.dl_mbps == pytest.approx(0.5 * full.dl_mbps + 6.0)


class TestSync:
    def test_clean(self, dl):
        lost, quality = sync_tracking(dl, None)
        assert not lost and db(quality) == pytest.approx(20.0)

    @pytest.mark.parametrize("isr", [0.0, 5.0, 10.0])
    def test_no_loss_up_to_10db(self, isr):
        r, _ = run_scenario(RUN, InterferenceScenario.of(6), isr)
        assert not r.sync_lost

    def test_below_floor(self, dl):
        lost, _ = sync_tracking(dl, imap(dl, 6, 15.0))
        assert lost
        r, _ = run_scenario(RUN, InterferenceScenario.of(6), 15.0)
        assert r.sync_lost and r.dl_mbps == 0.0

    def test_floor_is_configurable(self, dl):
        lost, _ = sync_tracking(dl, imap(dl, 6, 5.0), LinkConfig(sync_loss_floor_db=0.0))
        assert lost

    def test_rejects_ul(self, ul):
        with pytest.raises(ValueError):
            sync_tracking(ul, None)

    def test_penalty_range(self):
        assert sync_penalty(100.0, 100.0, 0.1) == 1.0
        qs = np.logspace(-1.2, 2, 50)
        p = [sync_penalty(q, 100.0, 0.1) for q in qs]
        assert all(0 < v <= 1 for v in p) and np.all(np.diff(p) > 0)


def test_pucch_failure_curve():
    assert pucch_failure_probability(0.0) == 0.5
    assert pucch_failure_probability(1.0) == pytest.approx(1 / 11)
    assert pucch_failure_probability(20.0) < 1e-19
    assert np.all(np.diff(pucch_failure_probability(np.linspace(-10, 10, 41))) < 0)


class TestCellSearch:
    def test_weak_spoof(self, dl):
        spoof = InterferenceScenario.of(5, -10.0)
        assert cell_search_outcome(dl, spoof) is CellSearchOutcome.ATTACH_LEGIT

    def test_strong_spoof(self, dl):
        spoof = InterferenceScenario.of(5, 6.0)
        assert cell_search_outcome(dl, spoof) is CellSearchOutcome.NO_ATTACH
        assert cell_search_outcome(dl, spoof, spoof_has_sib1=True) is CellSearchOutcome.ATTACH_FAKE

    def test_no_spoof(self, dl):
        assert cell_search_outcome(dl, None) is CellSearchOutcome.ATTACH_LEGIT

    def test_wrong_scenario(self, dl):
        with pytest.raises(ValueError):
            cell_search_outcome(dl, InterferenceScenario.of(6, 6.0))


@pytest.mark.parametrize("kwargs", [dict(nominal_dl_mbps=0), dict(crs_penalty_gain=-1),
                                    dict(pucch_slope_db=0), dict(noise_floor_db=float("inf"))])
def test_link_config_validation(kwargs):
    with pytest.raises(ValueError):
        LinkConfig(**kwargs)


def test_link_config_round_trip():
    c = LinkConfig(control_sinr_threshold_db={"PDCCH": 1.0})
    assert LinkConfig.from_dict(c.to_dict()) == c
    assert c.threshold("PCFICH") == 0.0 and c.threshold("PDCCH") == 1.0


def test_crs_only_hits_data():
    # interfere on CRS alone: data REs see no direct interference but lose via channel estimation
    grid = build_dl_grid(CellConfig())
    i = np.where(grid.mask(ChannelKind.CRS), 10.0, 0.0)
    r = estimate_throughput(grid, i)
    assert r.dl_mbps < 12.0
