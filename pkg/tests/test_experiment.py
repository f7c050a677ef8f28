import json
import math

import numpy as np
import pytest

from fbmdrift import experiment
from fbmdrift.errors import ConfigError
from fbmdrift.experiment import (
    ReplicateError,
    StudyConfig,
    histogram_data,
    ks_normality,
    run_contrast_study,
    run_hessian_study,
    run_replicate,
    run_study,
    run_volterra_check,
    worker_count,
    write_json,
    write_replicates_csv,
    write_summary_csv,
)
from fbmdrift.fbm import FbmSimulationError
from fbmdrift.grid import TimeGrid
from fbmdrift.model import ParameterBox, default_box


def small(name="constant", H=0.7, eps=(0.05,), M=20, n=128, **kw):
    return StudyConfig(name, kw.pop("box", default_box(name)), H, eps, n=n, M=M, seed=kw.pop("seed", 5), **kw)


class TestKs:
    def test_self_calibration(self):
        passes = 0
        for s in range(100):
            x = np.random.default_rng(s).normal(0, math.sqrt(2.5), 1000)
            passes += ks_normality(x, 2.5).pvalue > 0.01
        assert passes >= 98

    def test_degenerate(self):
        res = ks_normality(np.zeros(20), 1.0)
        assert res.degenerate and math.isnan(res.pvalue)

    def test_power(self):
        x = np.random.default_rng(0).normal(3, 1.0, 1000)
        assert ks_normality(x, 1.0).pvalue < 1e-6

    def test_preconditions(self):
        with pytest.raises(ValueError):
            ks_normality(np.arange(7.0), 1.0)
        with pytest.raises(ValueError):
            ks_normality(np.arange(10.0), 0.0)

    def test_matches_direct_statistic(self):
        from scipy.stats import norm

        x = np.sort(np.random.default_rng(3).normal(0, 2, 50))
        cdf = norm.cdf(x, scale=2)
        i = np.arange(1, 51)
        d = max(np.max(i / 50 - cdf), np.max(cdf - (i - 1) / 50))
        assert ks_normality(x, 4.0).statistic == pytest.approx(d, rel=1e-12)


def test_config_validation():
    with pytest.raises(ConfigError):
        small(M=1)
    with pytest.raises(ConfigError):
        small(eps=(0.0,))
    with pytest.raises(ConfigError):
        small(eps=())
    with pytest.raises(ConfigError):
        small(box=ParameterBox([-1.0], [1.0]))
    with pytest.raises(ConfigError):
        StudyConfig("constant", default_box("constant"), 0.5, (0.1,))


def test_replicate_determinism_and_range():
    cfg = small()
    a = run_replicate(cfg, 3)
    b = run_replicate(cfg, 3)
    assert np.array_equal(a.theta_hat, b.theta_hat)
    assert not np.array_equal(a.theta_hat, run_replicate(cfg, 4).theta_hat)
    for r in (-1, cfg.M):
        with pytest.raises(ConfigError):
            run_replicate(cfg, r)


def test_replicate_small_noise():
    cfg = small("linear", eps=(1e-6,), n=512)
    res = run_replicate(cfg, 0)
    assert np.all(np.isfinite(res.normalized_error))
    assert abs(res.theta_hat[0] - 1.0) < 1e-3


def test_tiny_study_does_not_crash():
    rep = run_study(small(M=2))
    blk = rep.blocks[0]
    assert blk.n_ok == 2
    assert math.isnan(blk.ks[0].pvalue)
    assert np.all(np.linalg.eigvalsh(blk.cov) >= -1e-12)


def test_study_statistics_layout():
    rep = run_study(small("sine", M=30))
    blk = rep.blocks[0]
    assert blk.u.shape == (30, 2)
    assert np.allclose(blk.cov, blk.cov.T)
    assert np.all(np.linalg.eigvalsh(blk.cov) >= -1e-12)
    for k in range(2):
        s2 = rep.fisher.inv[k, k]
        mom = blk.moments[k]
        assert mom["x^2"]["limit"] == pytest.approx(s2)
        assert mom["x^4"]["limit"] == pytest.approx(3 * s2**2)
        assert mom["|x|^3"]["empirical"] == pytest.approx(np.mean(np.abs(blk.u[:, k]) ** 3))
        assert set(blk.tails[k]) == {"1", "2", "3"}
        assert blk.tails[k]["2"]["limit"] == pytest.approx(0.0455, abs=1e-4)
        assert sum(blk.histograms[k]["counts"]) == 30
    json.dumps(rep.to_dict())


def test_histogram_density_normalized():
    u = np.random.default_rng(0).normal(0, 2, 500)
    h = histogram_data(u, 4.0)
    width = h["edges"][1] - h["edges"][0]
    assert sum(h["density"]) * width == pytest.approx(1.0)
    assert max(h["normal_density"]) == pytest.approx(1 / math.sqrt(2 * math.pi * 4), rel=0.01)


def test_boundary_hits_mark_unreliable():
    box = ParameterBox([-2.0], [1.02], [1.0])
    rep = run_study(small(box=box, M=20, eps=(0.1,)))
    assert rep.blocks[0].boundary_hits > 1
    assert rep.unreliable


def test_failures_are_tagged_and_counted(monkeypatch):
    real = experiment.simulate_fbm

    def flaky(grid, H, seed, method="circulant"):
        if seed % 3 == 0:
            raise FbmSimulationError("synthetic breakdown")
        return real(grid, H, seed, method)

    monkeypatch.setattr(experiment, "simulate_fbm", flaky)
    cfg = small(M=30)
    rep = run_study(cfg)
    blk = rep.blocks[0]
    assert blk.failures
    assert all("synthetic breakdown" in msg and msg.startswith(f"replicate {r}:") for r, msg in blk.failures)
    assert blk.n_ok + len(blk.failures) == 30
    assert rep.unreliable
    bad = blk.failures[0][0]
    with pytest.raises(ReplicateError) as info:
        run_replicate(cfg, bad)
    assert info.value.r == bad


def _write_all(rep, d):
    write_json(d / "report.json", rep.to_dict())
    write_replicates_csv(rep, d / "replicates.csv")
    write_summary_csv(rep, d / "summary.csv")
    return {p.name: p.read_bytes() for p in d.iterdir()}


def test_report_bit_identical_across_runs_and_workers(tmp_path, monkeypatch):
    cfg = small("sine", M=12, eps=(0.1, 0.05))
    (tmp_path / "a").mkdir()
    (tmp_path / "b").mkdir()
    (tmp_path / "c").mkdir()
    first = _write_all(run_study(cfg), tmp_path / "a")
    second = _write_all(run_study(cfg), tmp_path / "b")
    monkeypatch.setenv("FBMDRIFT_WORKERS", "2")
    parallel = _write_all(run_study(cfg), tmp_path / "c")
    assert first == second == parallel
    assert b"\r\n" not in first["replicates.csv"]


def test_csv_float_precision(tmp_path):
    rep = run_study(small(M=3))
    write_replicates_csv(rep, tmp_path / "r.csv")
    row = (tmp_path / "r.csv").read_text().splitlines()[1].split(",")
    theta_hat = float(row[3])
    assert theta_hat == rep.blocks[0].results[0].theta_hat[0]


def test_worker_count(monkeypatch):
    monkeypatch.delenv("FBMDRIFT_WORKERS", raising=False)
    assert worker_count() == 1
    monkeypatch.setenv("FBMDRIFT_WORKERS", "3")
    assert worker_count() == 3
    for bad in ("zero", "0"):
        monkeypatch.setenv("FBMDRIFT_WORKERS", bad)
        with pytest.raises(ConfigError):
            worker_count()


def test_monotone_helper():
    mono = experiment._monotone_up_to_ci
    assert mono([0.3, 0.2, 0.1], [(0.2, 0.4), (0.1, 0.3), (0.0, 0.2)])
    assert mono([0.1, 0.12], [(0.05, 0.15), (0.08, 0.16)])
    assert not mono([0.1, 0.5], [(0.05, 0.15), (0.4, 0.6)])


def test_epsilon_schedule_diagnostic():
    rep = run_study(small("constant", H=0.3, eps=(0.1, 0.05, 0.02), M=150, n=256))
    assert rep.monotone is not None
    assert [b.epsilon for b in rep.blocks] == [0.1, 0.05, 0.02]
    assert rep.monotone


def test_doubling_check_small():
    rep = run_study(small("linear", M=20, n=128, doubling_check=True))
    dbl = rep.doubling
    assert dbl.n == 128 and dbl.cov_2n.shape == (1, 1)
    assert dbl.passed == (dbl.rel_change < 0.03)
    assert rep.to_dict()["doubling"]["n_fine"] == 256


@pytest.mark.slow
@pytest.mark.parametrize("name,H", [("constant", 0.3), ("linear", 0.7)])
def test_doubling_check_default_pairing(name, H):
    rep = run_study(StudyConfig(name, default_box(name), H, (0.02,), n=1024, M=200, seed=31,
                                doubling_check=True))
    assert rep.doubling.passed, rep.doubling.rel_change


def test_companion_studies_small():
    vol = run_volterra_check(0.3, TimeGrid(1.0, 128), M=300, seed=1)
    assert len(vol.variances) == 3
    assert max(abs(r) for r in vol.rel_errors) < 0.25
    con = run_contrast_study(small(M=20, eps=(0.1, 0.05)), [1.5])
    assert con.epsilons == [0.1, 0.05] and con.y_limit > 0
    hes = run_hessian_study(small("sine", M=5))
    assert np.array(hes.rel_errors).shape == (2, 2)
