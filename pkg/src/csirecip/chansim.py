"""Synthetic reciprocal-channel generator.

The shared fading process is a sum of log-spaced carriers inside a
configurable band, each modulated by an independent complex
Ornstein-Uhlenbeck coefficient with correlation time ``coherence_time_s``.
This gives every acceptance bound an analytic or counting oracle: the
process is band-limited and Gaussian, long-gap correlation decays like
the OU autocorrelation exp(-gap/T), and injected lags and packet drops
are exact by construction.

Each carrier draws from its own seeded substream, so extending the
horizon (for delayed replay) preserves earlier samples bit-exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.signal import lfilter

from .errors import InvalidBandError
from .traces import CsiSample, CsiTrace

MAGNITUDE_OFFSET = 10.0  # keeps simulated magnitudes positive
N_CARRIERS = 128  # sets the independent-channel correlation floor ~1/sqrt(K)


@dataclass(frozen=True)
class LossEvent:
    """Contiguous packet drop: which side, start time, packet count."""

    side: str  # "ap" or "sta"
    start_s: float
    count: int

    def __post_init__(self):
        if self.side not in ("ap", "sta"):
            raise ValueError(f"side must be 'ap' or 'sta', got {self.side!r}")
        if self.count < 0:
            raise ValueError("count must be non-negative")


@dataclass(frozen=True)
class ChannelConfig:
    duration_s: float = 300.0
    rate_hz: float = 10.0
    base_band: tuple[float, float] = (0.05, 2.0)
    snr_db: float = 15.0
    lag_samples: int = 0
    loss: tuple[LossEvent, ...] = ()
    coherence_time_s: float = 120.0
    subcarriers: int = 8
    seed: int = 0

    def __post_init__(self):
        if self.rate_hz <= 0:
            raise ValueError("rate_hz must be positive")
        f_lo, f_hi = self.base_band
        if not (0 < f_lo < f_hi):
            raise InvalidBandError(f"need 0 < f_lo < f_hi, got [{f_lo}, {f_hi}]")
        if f_hi > self.rate_hz / 2:
            raise InvalidBandError(
                f"base band top {f_hi} Hz exceeds Nyquist {self.rate_hz / 2} Hz"
            )
        object.__setattr__(self, "loss", tuple(self.loss))

    @property
    def n_samples(self) -> int:
        return int(round(self.duration_s * self.rate_hz))


def ou_process(n: int, dt: float, tau: float, rng: np.random.Generator,
               complex_valued: bool = False) -> np.ndarray:
    """Unit-variance Ornstein-Uhlenbeck path via exact AR(1) discretization.

    Autocorrelation at lag k*dt is exp(-k*dt/tau) in expectation; the
    stationary start draws x[0] from the stationary law.
    """
    rho = np.exp(-dt / tau)
    if complex_valued:
        # interleaved draws keep sample i independent of the horizon n,
        # which is what makes delayed-replay windows prefix-stable
        z = rng.standard_normal((n, 2))
        innov = (z[:, 0] + 1j * z[:, 1]) / np.sqrt(2)
    else:
        innov = rng.standard_normal(n)
    drive = np.sqrt(1 - rho * rho) * innov
    drive[0] = innov[0]
    return lfilter([1.0], [1.0, -rho], drive)


def base_signal(cfg: ChannelConfig, n: int, start_s: float = 0.0) -> np.ndarray:
    """Shared band-limited fading signal, unit variance, zero mean.

    Deterministic in (cfg.seed, sample position): sample i of any window
    starting at ``start_s`` equals sample i+offset of the window starting
    at zero, provided offsets are whole samples.
    """
    dt = 1.0 / cfg.rate_hz
    offset = int(round(start_s / dt))
    total = offset + n
    seeds = np.random.SeedSequence(cfg.seed).spawn(N_CARRIERS)
    f_lo, f_hi = cfg.base_band
    carriers = np.geomspace(f_lo, f_hi, N_CARRIERS)
    t = np.arange(total) * dt
    x = np.zeros(total)
    for k in range(N_CARRIERS):
        rng = np.random.default_rng(seeds[k])
        c = ou_process(total, dt, cfg.coherence_time_s, rng, complex_valued=True)
        x += (c * np.exp(2j * np.pi * carriers[k] * t)).real
    return x[offset:] / np.sqrt(N_CARRIERS / 2.0)


def _device_trace(cfg: ChannelConfig, device_id: str, magnitudes: np.ndarray,
                  noise_stream: int, dropped: np.ndarray) -> CsiTrace:
    n = len(magnitudes)
    sigma = 10.0 ** (-cfg.snr_db / 20.0)
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, noise_stream]))
    noise = sigma * rng.standard_normal((cfg.subcarriers, n))
    mags = np.maximum(magnitudes[None, :] + noise, 0.0)
    drop = np.zeros(n, dtype=bool)
    drop[dropped[dropped < n]] = True
    dt = 1.0 / cfg.rate_hz
    samples = tuple(
        CsiSample(seq=i, t=i * dt, iq=mags[:, i].astype(np.complex128))
        for i in range(n)
        if not drop[i]
    )
    return CsiTrace(
        device_id=device_id,
        subcarriers=cfg.subcarriers,
        rate_hz=cfg.rate_hz,
        samples=samples,
    )


def _dropped_seqs(cfg: ChannelConfig, side: str) -> np.ndarray:
    out: list[np.ndarray] = []
    for ev in cfg.loss:
        if ev.side != side:
            continue
        start = int(round(ev.start_s * cfg.rate_hz))
        out.append(np.arange(start, start + ev.count))
    if not out:
        return np.array([], dtype=np.int64)
    return np.unique(np.concatenate(out))


def gen_pair(cfg: ChannelConfig) -> tuple[CsiTrace, CsiTrace, dict]:
    """Generate the AP and STA views of one reciprocal channel.

    AP sees the base signal plus its own noise; STA sees the base delayed
    by ``lag_samples`` plus independent noise.  Loss events delete whole
    packets per side.  Returns (ap, sta, truth) with the ground truth a
    dict of the injected lag and per-side dropped seq arrays.
    """
    n = cfg.n_samples
    lag = cfg.lag_samples
    pad = abs(lag)
    b = base_signal(cfg, n + pad)
    a0 = max(lag, 0)
    base_ap = b[a0:a0 + n]
    base_sta = b[a0 - lag:a0 - lag + n]

    drop_ap = _dropped_seqs(cfg, "ap")
    drop_sta = _dropped_seqs(cfg, "sta")
    ap = _device_trace(cfg, "ap", MAGNITUDE_OFFSET + base_ap, 101, drop_ap)
    sta = _device_trace(cfg, "sta", MAGNITUDE_OFFSET + base_sta, 202, drop_sta)
    truth = {
        "lag": lag,
        "dropped_seqs": {"ap": drop_ap.tolist(), "sta": drop_sta.tolist()},
    }
    return ap, sta, truth


def gen_attacker(cfg: ChannelConfig, mode: str = "independent",
                 gap_s: float = 0.0) -> CsiTrace:
    """Channel trace as an attacker would observe it.

    ``independent`` draws a fresh base process with the same statistics
    (spatial decorrelation); ``delayed_replay`` continues the legitimate
    base process ``gap_s`` later, so its correlation with the original is
    bounded by the OU envelope exp(-gap_s / coherence_time_s) and decays
    even faster once the carrier phases rotate through a full cycle.
    """
    n = cfg.n_samples
    if mode == "independent":
        alt = replace(cfg, seed=cfg.seed + 0x5EED)
        base = base_signal(alt, n)
    elif mode == "delayed_replay":
        base = base_signal(cfg, n, start_s=gap_s)
    else:
        raise ValueError(f"unknown attacker mode {mode!r}")
    rng_stream = 303 if mode == "independent" else 404
    return _device_trace(
        cfg, f"attacker-{mode}", MAGNITUDE_OFFSET + base, rng_stream,
        np.array([], dtype=np.int64),
    )


_KEYGEN_BAND = (0.05, 0.8)  # slow-fading band the coherence selection targets

_PRESETS = {
    # calibrated desk-scale analogs of the three measurement locations;
    # levels are artifact calibration, not measured values
    "los-short": dict(snr_db=11.0, lag_samples=2, loss=(),
                      base_band=_KEYGEN_BAND),
    "nlos-short": dict(
        snr_db=9.0, lag_samples=5, base_band=_KEYGEN_BAND,
        loss=(LossEvent("sta", 120.0, 30),),
    ),
    "nlos-long": dict(
        snr_db=8.0, lag_samples=12, base_band=_KEYGEN_BAND,
        loss=(LossEvent("sta", 90.0, 90), LossEvent("ap", 300.0, 60)),
    ),
    # the preset used by the reciprocity-enhancement contract
    "reciprocal": dict(
        snr_db=5.0, lag_samples=5, base_band=_KEYGEN_BAND,
        loss=(LossEvent("sta", 150.0, 30),),
    ),
}


def preset(name: str, duration_s: float = 600.0, seed: int = 0,
           **overrides) -> ChannelConfig:
    """Named scenario presets; any field can be overridden."""
    key = name.lower().replace("_", "-")
    if key not in _PRESETS:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(_PRESETS)}")
    kw = dict(_PRESETS[key])
    kw.update(overrides)
    return ChannelConfig(duration_s=duration_s, seed=seed, **kw)


def preset_names() -> list[str]:
    return sorted(_PRESETS)
