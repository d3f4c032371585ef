import math

import numpy as np
import pytest

from constkit.channel import (
    AWGN,
    RAYLEIGH,
    SWEEP_COLUMNS,
    ChannelKind,
    ChannelModel,
    SweepConfig,
    apply_channel,
    confidence_interval,
    estimate_ser,
    ml_detect,
    ml_detect_batch,
    rayleigh_penalty,
    read_sweep_csv,
    run_sweep,
    sample_symbols,
    snr_grid,
    write_sweep_csv,
)
from constkit.constellation import Scheme, SchemeSpec, generate, make_constellation, maxwell_boltzmann
from constkit.errors import SchemaError, SingularChannel, UndefinedPenalty
from constkit.metrics import analytic_ser
from constkit.rng import derive_stream


@pytest.fixture(scope="module")
def qam16():
    return generate(SchemeSpec(Scheme.SquareQAM, 16))


@pytest.fixture(scope="module")
def bpsk():
    return generate(SchemeSpec(Scheme.BPSK, 2))


class TestChannelKind:
    @pytest.mark.parametrize("text,kind", [("AWGN", ChannelKind.AWGN), ("awgn", ChannelKind.AWGN),
                                           ("Rayleigh", ChannelKind.Rayleigh),
                                           ("RayleighFlat", ChannelKind.Rayleigh)])
    def test_parse(self, text, kind):
        assert ChannelModel(text).kind is kind

    def test_unknown(self):
        with pytest.raises(ValueError):
            ChannelModel("Rician")


class TestSampling:
    def test_uniform_frequencies(self, qam16):
        idx = sample_symbols(qam16, 1_000_000, derive_stream(0, ("sample",)))
        freq = np.bincount(idx, minlength=16) / idx.size
        assert np.all(np.abs(freq - 1 / 16) < 0.002)

    def test_shaped_mode_is_lowest_energy(self, qam16):
        c = make_constellation(qam16.points, maxwell_boltzmann(qam16.points, 5.0))
        idx = sample_symbols(c, 10_000, derive_stream(0, ("mb",)))
        mode = np.bincount(idx, minlength=16).argmax()
        assert np.abs(c.points[mode]) == pytest.approx(np.abs(c.points).min())

    def test_needs_positive_n(self, qam16):
        with pytest.raises(ValueError):
            sample_symbols(qam16, 0, derive_stream(0, ()))


class TestApplyChannel:
    def test_vanishing_noise(self, qam16):
        idx = np.arange(16)
        y, h = apply_channel(idx, qam16, AWGN, 300.0, derive_stream(0, ()))
        assert np.max(np.abs(y - qam16.points)) < 1e-12
        assert np.all(h == 1)

    def test_awgn_noise_variance(self, qam16):
        idx = np.zeros(200_000, dtype=int)
        y, _ = apply_channel(idx, qam16, "AWGN", 10.0, derive_stream(1, ()))
        assert np.var(y - qam16.points[0]) == pytest.approx(0.1, rel=0.01)

    def test_rayleigh_unit_gain(self, qam16):
        idx = np.zeros(1_000_000, dtype=int)
        _, h = apply_channel(idx, qam16, RAYLEIGH, 10.0, derive_stream(2, ()))
        assert np.mean(np.abs(h) ** 2) == pytest.approx(1.0, abs=0.01)

    def test_noise_drawn_before_gain(self, qam16):
        idx = np.zeros(100, dtype=int)
        y_a, _ = apply_channel(idx, qam16, AWGN, 10.0, derive_stream(3, ()))
        y_r, h = apply_channel(idx, qam16, RAYLEIGH, 10.0, derive_stream(3, ()))
        np.testing.assert_allclose(y_r - h * qam16.points[0], y_a - qam16.points[0], atol=1e-14)


class TestDetection:
    def test_noiseless(self, qam16):
        assert ml_detect(qam16.points[3], 1.0, qam16) == 3

    def test_csi_scaling(self, qam16):
        h = 0.2 * np.exp(1j * 1.1)
        assert ml_detect(h * qam16.points[3], h, qam16) == 3

    def test_tie_goes_to_lowest_index(self, bpsk):
        assert ml_detect(0.0, 1.0, bpsk) == 0
        assert ml_detect_batch(np.zeros(3, complex), np.ones(3, complex), bpsk.points).tolist() == [0, 0, 0]

    def test_singular(self, qam16):
        with pytest.raises(SingularChannel):
            ml_detect(0.1, 0.0, qam16)

    def test_batch_matches_scalar(self, qam16):
        s = derive_stream(4, ())
        y = s.complex_normal(500)
        h = s.complex_normal(500)
        batch = ml_detect_batch(y, h, qam16.points)
        assert batch.tolist() == [ml_detect(a, b, qam16) for a, b in zip(y, h)]


class TestConfidenceInterval:
    def test_half_widths(self):
        lo, hi = confidence_interval(0.5, 1_000_000)
        assert (hi - lo) / 2 == pytest.approx(9.8e-4, abs=1e-6)
        lo, hi = confidence_interval(0.2219, 1_000_000)
        assert (hi - lo) / 2 == pytest.approx(8.14e-4, abs=1e-6)

    def test_degenerate(self):
        assert confidence_interval(0.0, 1000) == (0.0, 0.0)
        assert confidence_interval(1.0, 1000) == (1.0, 1.0)

    def test_clamped(self):
        lo, hi = confidence_interval(0.001, 10)
        assert lo == 0.0 and hi <= 1.0

    @pytest.mark.parametrize("p,n", [(-0.1, 10), (1.1, 10), (0.5, 0)])
    def test_invalid(self, p, n):
        with pytest.raises(ValueError):
            confidence_interval(p, n)


class TestEstimateSer:
    def test_bpsk_high_snr_no_errors(self, bpsk):
        pt = estimate_ser(bpsk, AWGN, 50.0, 100_000, 0)
        assert pt.symbol_errors == 0 and pt.ser == 0.0
        assert (pt.ci_low, pt.ci_high) == (0.0, 0.0)

    def test_point_invariants(self, qam16):
        pt = estimate_ser(qam16, AWGN, 6.0, 20_000, 3)
        assert pt.ser == pt.symbol_errors / pt.symbols_sent
        assert pt.ci_low <= pt.ser <= pt.ci_high
        assert pt.seed == 3 and pt.chunk_size == 10_000

    def test_workers_do_not_change_result(self, qam16):
        ref = estimate_ser(qam16, RAYLEIGH, 8.0, 50_000, 11, chunk_size=7_000)
        for k in (2, 4, 8):
            assert estimate_ser(qam16, RAYLEIGH, 8.0, 50_000, 11, chunk_size=7_000, workers=k) == ref

    def test_seed_changes_result(self, qam16):
        a = estimate_ser(qam16, AWGN, 8.0, 20_000, 1)
        b = estimate_ser(qam16, AWGN, 8.0, 20_000, 2)
        assert a.symbol_errors != b.symbol_errors

    def test_partial_last_chunk(self, qam16):
        pt = estimate_ser(qam16, AWGN, 8.0, 12_345, 1, chunk_size=5_000)
        assert pt.symbols_sent == 12_345

    def test_min_symbols(self, qam16):
        with pytest.raises(ValueError):
            estimate_ser(qam16, AWGN, 8.0, 999, 0)

    def test_rayleigh_worse_than_awgn(self, qam16):
        for snr in (0.0, 10.0, 20.0):
            a = estimate_ser(qam16, AWGN, snr, 20_000, 5)
            r = estimate_ser(qam16, RAYLEIGH, snr, 20_000, 5)
            assert r.ser >= a.ser - 4 * math.hypot(a.half_width, r.half_width) / 1.96

    def test_rayleigh_qam_matches_quadrature(self, qam16):
        pt = estimate_ser(qam16, RAYLEIGH, 10.0, 200_000, 9)
        exact = analytic_ser(Scheme.SquareQAM, 16, 10.0, "Rayleigh")
        assert abs(pt.ser - exact) <= 4 * pt.half_width

    def test_monotone_in_snr(self, qam16):
        pts = [estimate_ser(qam16, AWGN, s, 20_000, 6) for s in range(0, 15, 2)]
        for a, b in zip(pts, pts[1:]):
            assert b.ser <= a.ser + 4 * math.hypot(a.half_width, b.half_width) / 1.96


class TestPenalty:
    @pytest.mark.parametrize("awgn,ray,pct", [
        (0.221880, 0.360202, 62.34),
        (0.217123, 0.357428, 64.62),
        (0.225311, 0.363394, 61.29),
        (0.230003, 0.365851, 59.06),
        (0.226921, 0.363942, 60.38),
        (0.236398, 0.363444, 53.74),
    ])
    def test_published_rows(self, awgn, ray, pct):
        assert rayleigh_penalty(awgn, ray) == pytest.approx(pct, abs=0.005)

    def test_equal(self):
        assert rayleigh_penalty(0.3, 0.3) == 0.0

    def test_zero_awgn(self):
        with pytest.raises(UndefinedPenalty):
            rayleigh_penalty(0.0, 0.1)


class TestSweep:
    def test_default_grid_has_56_points(self):
        assert len(SweepConfig().snrs) == 56
        assert SweepConfig().snrs[0] == -5 and SweepConfig().snrs[-1] == 50

    def test_grid_arithmetic(self):
        assert snr_grid(0, 1, 0.25).tolist() == [0, 0.25, 0.5, 0.75, 1.0]
        with pytest.raises(ValueError):
            snr_grid(0, 1, 0)
        with pytest.raises(ValueError):
            snr_grid(2, 1, 1)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            SweepConfig(symbols=999)
        with pytest.raises(ValueError):
            SweepConfig(snr_step=-1)

    def test_small_sweep(self):
        cfg = SweepConfig(schemes=["16-QAM"], channels=["AWGN"], snr_start=8, snr_stop=10,
                          symbols=1000)
        res = run_sweep(cfg)
        pts = res.points("16-QAM", "AWGN")
        assert [p.snr_db for p in pts] == [8.0, 9.0, 10.0]
        assert all(p.symbols_sent == 1000 and p.seed == 0 for p in pts)

    def test_failing_scheme_does_not_stop_sweep(self):
        cfg = SweepConfig(schemes=["NoSuchScheme", "QPSK"], channels=["AWGN", "Rayleigh"],
                          snr_start=5, snr_stop=5, symbols=1000)
        res = run_sweep(cfg)
        assert len(res.failures) == 2
        assert all(r.scheme == "NoSuchScheme" for r in res.failures)
        assert len(res.points("QPSK-4", "Rayleigh")) == 1

    def test_csv_round_trip_and_bytes(self, tmp_path):
        cfg = SweepConfig(schemes=["Disc-GAM", "Bad:3"], channels=["AWGN", "Rayleigh"],
                          snr_start=0, snr_stop=4, snr_step=2, symbols=2000, seed=5)
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        write_sweep_csv(run_sweep(cfg), a)
        write_sweep_csv(run_sweep(cfg), b)
        assert a.read_bytes() == b.read_bytes()
        assert a.read_text().splitlines()[0] == ",".join(SWEEP_COLUMNS)
        rows = read_sweep_csv(a)
        again = tmp_path / "c.csv"
        write_sweep_csv(rows, again)
        assert again.read_bytes() == a.read_bytes()

    def test_read_without_status_column(self, tmp_path):
        p = tmp_path / "s.csv"
        p.write_text("scheme,channel,snr_db,symbols,errors,ser,ci_low,ci_high,seed,chunk_size\n"
                     "X,AWGN,10,1000,5,0.005,0.0006,0.0094,0,10000\n")
        (row,) = read_sweep_csv(p)
        assert row.status == "ok" and row.point.symbol_errors == 5

    def test_schema_mismatch(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("scheme,ser\nX,0.1\n")
        with pytest.raises(SchemaError):
            read_sweep_csv(p)
