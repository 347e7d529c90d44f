import numpy as np
import pytest

from csirecip.chansim import (
    ChannelConfig,
    LossEvent,
    base_signal,
    gen_attacker,
    gen_pair,
    ou_process,
    preset,
    preset_names,
)
from csirecip.errors import InvalidBandError
from csirecip.metrics import pearson, xcorr_lag
from csirecip.traces import magnitude_series, parse_csi_csv, write_csi_csv


class TestOu:
    def test_autocorrelation_matches_exponential(self):
        # n >= 1e4, tau up to 3 coherence times, +/-0.05 band
        dt, tau, n = 0.1, 5.0, 200_000
        x = ou_process(n, dt, tau, np.random.default_rng(0)).real
        x = np.asarray(x)
        for lag_s in (0.5, 1.0, 2.5, 5.0, 10.0, 15.0):
            k = int(round(lag_s / dt))
            got = pearson(x[:-k], x[k:])
            assert got == pytest.approx(np.exp(-lag_s / tau), abs=0.05)

    def test_unit_variance(self):
        x = ou_process(100_000, 0.1, 3.0, np.random.default_rng(1))
        assert np.var(x.real) == pytest.approx(1.0, abs=0.05)

    def test_complex_variant(self):
        z = ou_process(50_000, 0.1, 2.0, np.random.default_rng(2),
                       complex_valued=True)
        assert np.mean(np.abs(z) ** 2) == pytest.approx(1.0, abs=0.05)


class TestGenPair:
    def test_noise_off_lag_zero_identical(self):
        cfg = ChannelConfig(duration_s=30.0, snr_db=np.inf, lag_samples=0, seed=3)
        ap, sta, _ = gen_pair(cfg)
        x = magnitude_series(ap, 6).values
        y = magnitude_series(sta, 6).values
        np.testing.assert_allclose(x, y, atol=1e-12)

    def test_configured_lag_recovered(self):
        cfg = ChannelConfig(duration_s=120.0, snr_db=25.0, lag_samples=7, seed=4)
        ap, sta, truth = gen_pair(cfg)
        assert truth["lag"] == 7
        x = magnitude_series(ap, 6).values
        y = magnitude_series(sta, 6).values
        assert xcorr_lag(x, y, 20).lag == 7

    def test_loss_counting_oracle(self):
        cfg = ChannelConfig(duration_s=1500.0, rate_hz=5.0,
                            loss=(LossEvent("sta", 300.0, 900),), seed=5)
        ap, sta, truth = gen_pair(cfg)
        missing = sta.missing_seqs()
        assert len(missing) == 900
        assert missing[0] == 1500  # 300 s at 5 packets/s
        assert truth["dropped_seqs"]["sta"] == list(range(1500, 2400))
        assert len(ap.missing_seqs()) == 0

    def test_determinism(self):
        cfg = ChannelConfig(duration_s=20.0, seed=6)
        a1, s1, _ = gen_pair(cfg)
        a2, s2, _ = gen_pair(cfg)
        assert write_csi_csv(a1) == write_csi_csv(a2)
        assert write_csi_csv(s1) == write_csi_csv(s2)

    def test_lag_recoverable_over_seeds(self):
        for seed in range(10):
            lag = int(np.random.default_rng(seed).integers(-10, 11))
            cfg = ChannelConfig(duration_s=100.0, snr_db=20.0,
                                lag_samples=lag, seed=seed)
            ap, sta, _ = gen_pair(cfg)
            x = magnitude_series(ap, 6).values
            y = magnitude_series(sta, 6).values
            assert xcorr_lag(x, y, 25).lag == lag

    def test_magnitudes_nonnegative(self):
        cfg = ChannelConfig(duration_s=60.0, snr_db=0.0, seed=7)
        ap, _, _ = gen_pair(cfg)
        assert magnitude_series(ap, 0).values.min() >= 0.0

    def test_invalid_band(self):
        with pytest.raises(InvalidBandError):
            ChannelConfig(base_band=(0.1, 6.0), rate_hz=10.0)
        with pytest.raises(InvalidBandError):
            ChannelConfig(base_band=(0.5, 0.1))

    def test_csv_round_trip(self):
        cfg = ChannelConfig(duration_s=15.0, seed=8,
                            loss=(LossEvent("ap", 5.0, 10),))
        ap, _, _ = gen_pair(cfg)
        text = write_csi_csv(ap)
        back = parse_csi_csv(text)
        assert write_csi_csv(back) == text
        assert list(back.seqs) == list(ap.seqs)


class TestBaseSignal:
    def test_prefix_stability_across_horizons(self):
        cfg = ChannelConfig(duration_s=30.0, seed=9)
        short = base_signal(cfg, 100)
        long = base_signal(cfg, 400)
        np.testing.assert_allclose(short, long[:100], atol=1e-12)

    def test_windowing_matches_offset(self):
        cfg = ChannelConfig(duration_s=30.0, seed=10)
        full = base_signal(cfg, 500)
        shifted = base_signal(cfg, 200, start_s=20.0)  # 200-sample offset
        np.testing.assert_allclose(shifted, full[200:400], atol=1e-12)

    def test_band_limited_spectrum(self):
        cfg = ChannelConfig(duration_s=1000.0, seed=11,
                            base_band=(0.05, 0.5), coherence_time_s=120.0)
        x = base_signal(cfg, cfg.n_samples)
        spec = np.abs(np.fft.rfft(x - x.mean())) ** 2
        freqs = np.fft.rfftfreq(len(x), 0.1)
        in_band = spec[(freqs >= 0.03) & (freqs <= 0.7)].sum()
        out_band = spec[freqs > 1.0].sum()
        assert out_band <= 0.01 * in_band


class TestAttacker:
    def test_independent_low_correlation(self):
        hits = 0
        trials = 40
        for seed in range(trials):
            cfg = ChannelConfig(duration_s=60.0, snr_db=15.0, seed=seed)
            ap, _, _ = gen_pair(cfg)
            atk = gen_attacker(cfg, "independent")
            c = pearson(magnitude_series(ap, 6).values,
                        magnitude_series(atk, 6).values)
            hits += abs(c) <= 0.2
        assert hits >= 0.95 * trials

    def test_delayed_replay_zero_gap_equals_base(self):
        cfg = ChannelConfig(duration_s=30.0, snr_db=np.inf, lag_samples=0,
                            seed=12)
        ap, _, _ = gen_pair(cfg)
        atk = gen_attacker(cfg, "delayed_replay", gap_s=0.0)
        np.testing.assert_allclose(
            magnitude_series(atk, 6).values,
            magnitude_series(ap, 6).values, atol=1e-12)

    def test_delayed_replay_ou_decay_bound(self):
        cfg = ChannelConfig(duration_s=60.0, snr_db=25.0, seed=13,
                            coherence_time_s=30.0)
        ap, _, _ = gen_pair(cfg)
        atk = gen_attacker(cfg, "delayed_replay", gap_s=300.0)  # 10 tau
        c = pearson(magnitude_series(ap, 6).values,
                    magnitude_series(atk, 6).values)
        # e^-10 plus a sampling noise margin for 600 smooth samples
        assert abs(c) <= np.exp(-10) + 0.25

    def test_unknown_mode(self):
        with pytest.raises(ValueError):
            gen_attacker(ChannelConfig(seed=0), "teleport")


class TestPresets:
    def test_names(self):
        assert set(preset_names()) == {"los-short", "nlos-short", "nlos-long",
                                       "reciprocal"}

    def test_preset_overrides(self):
        cfg = preset("nlos-long", duration_s=300.0, seed=5, snr_db=3.0)
        assert cfg.snr_db == 3.0
        assert cfg.lag_samples == 12
        assert cfg.seed == 5

    def test_unknown(self):
        with pytest.raises(ValueError):
            preset("urban-canyon")

    def test_reciprocal_preset_pins_contract_values(self):
        cfg = preset("reciprocal", duration_s=300.0)
        assert cfg.snr_db == 5.0
        assert cfg.lag_samples == 5
        lost = sum(ev.count for ev in cfg.loss)
        assert lost == pytest.approx(0.01 * cfg.n_samples, rel=0.2)
