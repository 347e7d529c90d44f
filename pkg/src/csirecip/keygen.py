"""Secret-key generation: CDF quantization, Gray coding, and session driver.

The session driver runs the three-step scheme end to end: threshold
agreement on a probe window, per-device reconstruction plus optional
synchronization, then block quantization and key comparison at a set of
bit-error thresholds.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import (
    DegenerateBlockError,
    LevelOutOfRangeError,
    ListMismatchError,
    NoFrequencySelectedError,
    TooShortError,
)
from .metrics import xcorr_lag
from .reconstruct import (
    ReciprocalBand,
    adapt_thresholds,
    apply_lag,
    fft_reconstruct,
    golay_filter,
    select_reciprocal_freqs,
    wpt_denoise,
    wt_reconstruct,
)
from .traces import MagnitudeSeries
from .wavelet import CoherenceMap, CwtParams, cwt, wavelet_coherence

PIPELINES = ("raw", "golay", "fft", "wpt", "wt")


@dataclass(frozen=True)
class QuantizerSpec:
    """CDF-based quantizer: thresholds at the k/levels empirical quantiles."""

    levels: int
    thresholds: np.ndarray

    def __post_init__(self):
        th = np.asarray(self.thresholds, dtype=np.float64)
        th.setflags(write=False)
        object.__setattr__(self, "thresholds", th)
        if self.levels < 2 or self.levels & (self.levels - 1):
            raise ValueError("levels must be a power of two >= 2")
        if len(th) != self.levels - 1:
            raise ValueError("need levels-1 thresholds")
        if np.any(np.diff(th) <= 0):
            raise ValueError("thresholds must be strictly increasing")

    @property
    def bits_per_sample(self) -> int:
        return int(self.levels).bit_length() - 1


@dataclass(frozen=True)
class KeyBlock:
    """One key-generation window: quantization levels and Gray-coded bits."""

    start_seq: int
    levels: np.ndarray
    bits: np.ndarray

    def __post_init__(self):
        for name in ("levels", "bits"):
            arr = np.asarray(getattr(self, name))
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


@dataclass(frozen=True)
class ThresholdStats:
    error_threshold: int
    accepted: int
    attempted: int
    kgr: float
    mean_ber: float | None  # over accepted keys; None when none accepted


@dataclass(frozen=True)
class SessionReport:
    """Paired-device evaluation of one key-generation session."""

    per_threshold: tuple[ThresholdStats, ...]
    overall_ber: float | None
    total_packets: int
    key_bits: int
    blocks: int
    skipped_blocks: int = 0
    pipeline: str | None = None
    sync: bool | None = None
    lag: int | None = None
    alpha: float | None = None
    beta: int | None = None
    band: tuple[float, float] | None = None
    threshold_updates: int = 0
    selection_fallbacks: int = 0

    def stats_at(self, theta: int) -> ThresholdStats:
        for st in self.per_threshold:
            if st.error_threshold == theta:
                return st
        raise KeyError(f"no stats at threshold {theta}")

    def to_dict(self) -> dict:
        return {
            "pipeline": self.pipeline,
            "sync": self.sync,
            "lag": self.lag,
            "alpha": self.alpha,
            "beta": self.beta,
            "band_hz": list(self.band) if self.band else None,
            "total_packets": self.total_packets,
            "key_bits": self.key_bits,
            "blocks": self.blocks,
            "skipped_blocks": self.skipped_blocks,
            "threshold_updates": self.threshold_updates,
            "selection_fallbacks": self.selection_fallbacks,
            "overall_ber": self.overall_ber,
            "per_threshold": [
                {
                    "error_threshold": st.error_threshold,
                    "accepted": st.accepted,
                    "attempted": st.attempted,
                    "kgr": st.kgr,
                    "mean_ber": st.mean_ber,
                }
                for st in self.per_threshold
            ],
        }


def cdf_thresholds(block, levels: int = 4) -> QuantizerSpec:
    """Quantizer thresholds at the k/levels empirical quantiles of a block.

    Linear interpolation between order statistics.  A block with fewer
    distinct values than levels (or ties collapsing adjacent quantiles)
    is degenerate and should be skipped by the caller.
    """
    block = np.asarray(block, dtype=np.float64).ravel()
    if levels < 2 or levels & (levels - 1):
        raise ValueError("levels must be a power of two >= 2")
    if len(block) < levels:
        raise DegenerateBlockError(f"block of {len(block)} < {levels} levels")
    if len(np.unique(block)) < levels:
        raise DegenerateBlockError("fewer distinct values than levels")
    qs = np.arange(1, levels) / levels
    th = np.quantile(block, qs, method="linear")
    if np.any(np.diff(th) <= 0):
        raise DegenerateBlockError("ties collapse adjacent quantiles")
    return QuantizerSpec(levels=levels, thresholds=th)


def quantize(block, spec: QuantizerSpec) -> np.ndarray:
    """Map every sample to a level; boundary values go to the lower level."""
    block = np.asarray(block, dtype=np.float64).ravel()
    return np.searchsorted(spec.thresholds, block, side="left").astype(np.int64)


def gray_encode(levels_seq, levels_count: int) -> np.ndarray:
    """Binary-reflected Gray code of each level, MSB first, concatenated."""
    lv = np.asarray(levels_seq, dtype=np.int64).ravel()
    if lv.size and (lv.min() < 0 or lv.max() >= levels_count):
        raise LevelOutOfRangeError(
            f"levels outside [0, {levels_count}): {lv.min()}..{lv.max()}"
        )
    width = int(levels_count).bit_length() - 1
    gray = lv ^ (lv >> 1)
    shifts = np.arange(width - 1, -1, -1)
    return ((gray[:, None] >> shifts[None, :]) & 1).astype(np.uint8).ravel()


def make_keys(x, block_len: int = 100, levels: int = 4,
              whole_trace_thresholds: bool = False) -> tuple[list[KeyBlock], int]:
    """Cut a series into key blocks: quantize, Gray-encode.

    Blocks are consecutive and non-overlapping; a trailing partial block is
    discarded.  Degenerate blocks are skipped and counted (second return
    value).  Thresholds are per-block by default, tracking channel drift;
    ``whole_trace_thresholds`` switches to a single trace-wide quantizer.
    """
    x = np.asarray(x, dtype=np.float64).ravel()
    if len(x) < block_len:
        raise TooShortError(f"{len(x)} samples < block_len {block_len}")
    shared_spec = None
    if whole_trace_thresholds:
        shared_spec = cdf_thresholds(x, levels)
    blocks: list[KeyBlock] = []
    skipped = 0
    for start in range(0, len(x) - block_len + 1, block_len):
        chunk = x[start:start + block_len]
        try:
            spec = shared_spec if shared_spec is not None else cdf_thresholds(chunk, levels)
            lv = quantize(chunk, spec)
            bits = gray_encode(lv, levels)
        except DegenerateBlockError:
            skipped += 1
            continue
        blocks.append(KeyBlock(start_seq=start, levels=lv, bits=bits))
    return blocks, skipped


def evaluate(keys_a: list[KeyBlock], keys_b: list[KeyBlock], total_packets: int,
             thresholds=(5, 15, 20)) -> SessionReport:
    """Score paired key blocks at each bit-error threshold.

    A block pair is accepted at threshold theta when its Hamming distance
    is at most theta.  ``kgr`` is accepted key bits per exchanged packet;
    ``mean_ber`` averages over accepted keys only, while ``overall_ber``
    covers every paired block regardless of threshold.
    """
    if len(keys_a) != len(keys_b):
        raise ListMismatchError(f"{len(keys_a)} vs {len(keys_b)} blocks")
    if total_packets <= 0:
        raise ValueError("total_packets must be positive")
    thresholds = tuple(int(t) for t in thresholds)
    if not thresholds or list(thresholds) != sorted(thresholds):
        raise ValueError("thresholds must be nonempty ascending")

    key_bits = len(keys_a[0].bits) if keys_a else 0
    hams = []
    for a, b in zip(keys_a, keys_b):
        if len(a.bits) != len(b.bits):
            raise ListMismatchError("paired blocks have different bit lengths")
        hams.append(int(np.count_nonzero(a.bits != b.bits)))
    hams = np.asarray(hams, dtype=np.int64)

    stats = []
    for theta in thresholds:
        acc = hams[hams <= theta]
        stats.append(ThresholdStats(
            error_threshold=theta,
            accepted=len(acc),
            attempted=len(hams),
            kgr=len(acc) * key_bits / total_packets,
            mean_ber=float(acc.sum() / (len(acc) * key_bits)) if len(acc) else None,
        ))
    overall = float(hams.sum() / (len(hams) * key_bits)) if len(hams) else None
    return SessionReport(
        per_threshold=tuple(stats),
        overall_ber=overall,
        total_packets=total_packets,
        key_bits=key_bits,
        blocks=len(hams),
    )


@dataclass(frozen=True)
class SessionConfig:
    """Everything the session driver needs; defaults follow the scheme."""

    pipeline: str = "wt"
    sync: bool = True
    probe_len: int = 500
    block_len: int = 100
    levels: int = 4
    error_thresholds: tuple[int, ...] = (5, 15, 20)
    max_lag: int = 50
    # "shared": both devices reconstruct over the band agreed on the probe
    # window (the pseudocode-literal flow).  "per_device": each device
    # re-selects from its own key-window spectrum with the agreed
    # thresholds; measurement shows the local statistic rarely reaches the
    # half-grid target, so this mode mostly exercises the update/fallback
    # machinery and costs one probe window of key material.
    selection_mode: str = "shared"
    voices_per_octave: int = 12
    golay_window: int = 11
    golay_order: int = 3
    fft_power_keep: float = 0.98
    wpt_depth: int = 4
    contiguous_band: bool = True
    whole_trace_thresholds: bool = False
    max_threshold_updates: int = 1

    def __post_init__(self):
        if self.pipeline not in PIPELINES:
            raise ValueError(f"pipeline must be one of {PIPELINES}")
        if self.selection_mode not in ("per_device", "shared"):
            raise ValueError("selection_mode must be 'per_device' or 'shared'")


def _values(series) -> np.ndarray:
    if isinstance(series, MagnitudeSeries):
        return np.asarray(series.values, dtype=np.float64)
    return np.asarray(series, dtype=np.float64).ravel()


def _rate(series, default: float = 10.0) -> float:
    return series.rate_hz if isinstance(series, MagnitudeSeries) else default


def _probe_params(L: int, rate: float, vpo: int) -> CwtParams:
    # one full period per probe window: maximizes the octave span so the
    # half-grid selection target stays inside the physically coherent band
    return CwtParams(
        min_freq=1.0 / (L / rate),
        max_freq=rate / 2,
        sample_rate=rate,
        voices_per_octave=vpo,
    )


def _key_params(n: int, rate: float, vpo: int, band: tuple[float, float] | None) -> CwtParams:
    min_freq = 4.0 / (n / rate)
    if band is not None:
        min_freq = min(min_freq, band[0])
    return CwtParams(
        min_freq=min_freq, max_freq=rate / 2, sample_rate=rate,
        voices_per_octave=vpo,
    )


def _normalized_power_map(x: np.ndarray, params: CwtParams) -> CoherenceMap:
    """Device-local stand-in for a coherence map in per-device selection.

    Scalogram amplitude normalized to [0, 1] by its maximum: frequencies
    that stay near their ridge strength for long stretches mimic the
    persistently coherent bins of the shared map.
    """
    sg = cwt(x, params)
    amp = np.abs(sg.coeffs)
    peak = amp.max()
    wc = amp / peak if peak > 0 else amp
    return CoherenceMap(
        wc=wc,
        phase=np.zeros_like(wc),
        freqs=sg.freqs,
        times=np.arange(sg.n_times) / params.sample_rate,
        coi=sg.coi_mask(),
        params=params,
    )


def _agree_thresholds(a: np.ndarray, b: np.ndarray, rate: float,
                      cfg: SessionConfig) -> tuple[ReciprocalBand, int]:
    """Step 1: probe-window coherence, threshold adaptation, lag estimate."""
    L = len(a)
    params = _probe_params(L, rate, cfg.voices_per_octave)
    cmap = wavelet_coherence(a, b, params)
    band = adapt_thresholds(cmap, window_len=L)
    ra = wt_reconstruct(a, band, params, contiguous=cfg.contiguous_band)
    rb = wt_reconstruct(b, band, params, contiguous=cfg.contiguous_band)
    max_lag = min(cfg.max_lag, (L - 1) // 2)
    lag = xcorr_lag(ra, rb, max_lag).lag
    return band, lag


def _select_device_band(x: np.ndarray, rate: float, agreed: ReciprocalBand,
                        cfg: SessionConfig) -> ReciprocalBand | None:
    """Step B per-device selection with the agreed thresholds.

    Returns None when the device's own selection covers fewer than half
    the grid (the threshold-update trigger).
    """
    params = _key_params(len(x), rate, cfg.voices_per_octave, agreed.band)
    dev_map = _normalized_power_map(x, params)
    # re-anchor alpha to this map's maximum (it is 1 by construction, so
    # the agreed "slightly below peak" fraction carries over directly)
    alpha = min(max(agreed.alpha, 1e-9), 1.0)
    beta = min(agreed.beta, dev_map.wc.shape[1])
    try:
        sel = select_reciprocal_freqs(dev_map, alpha, beta)
    except NoFrequencySelectedError:
        return None
    if len(sel.f_rec) < (len(dev_map.freqs) + 1) // 2:
        return None
    return sel


def _run_pipeline(x: np.ndarray, rate: float, band: ReciprocalBand,
                  cfg: SessionConfig) -> np.ndarray:
    if cfg.pipeline == "raw":
        return x
    if cfg.pipeline == "golay":
        return golay_filter(x, cfg.golay_window, cfg.golay_order)
    if cfg.pipeline == "fft":
        return fft_reconstruct(x, cfg.fft_power_keep)
    if cfg.pipeline == "wpt":
        return wpt_denoise(x, cfg.wpt_depth)
    params = _key_params(len(x), rate, cfg.voices_per_octave, band.band)
    return wt_reconstruct(x, band, params, contiguous=cfg.contiguous_band)


@dataclass(frozen=True)
class PreprocessResult:
    """Reconstructed, optionally synchronized key-window pair."""

    x: np.ndarray
    y: np.ndarray
    band: ReciprocalBand
    band_x: ReciprocalBand
    band_y: ReciprocalBand
    lag: int
    total_packets: int
    threshold_updates: int
    selection_fallbacks: int


def preprocess_pair(ap, sta, cfg: SessionConfig = SessionConfig()) -> PreprocessResult:
    """Steps 1-2 of the session: agreement, reconstruction, synchronization.

    Agrees (alpha, beta, lag) on the first ``probe_len`` samples (public,
    so excluded from key material), reconstructs the remaining samples
    with the configured pipeline, and aligns them by the agreed lag when
    ``sync`` is on.  In ``per_device`` selection mode each device
    re-selects its own band from its key-window spectrum with the agreed
    thresholds; a selection below half the grid triggers a fresh probe
    window (the threshold-update rule), after which the agreed band is
    the fallback.
    """
    a = _values(ap)
    b = _values(sta)
    if len(a) != len(b):
        raise ListMismatchError("session inputs must be paired to equal length")
    if np.isnan(a).any() or np.isnan(b).any():
        raise ValueError("session inputs must be gap-free; pair with interpolation")
    rate = _rate(ap)
    n = len(a)
    L = cfg.probe_len
    if n < L + cfg.block_len:
        raise TooShortError(
            f"need at least probe_len + block_len = {L + cfg.block_len} samples, got {n}"
        )

    updates = 0
    fallbacks = 0
    offset = 0
    while True:
        probe_a, probe_b = a[offset:offset + L], b[offset:offset + L]
        band, lag = _agree_thresholds(probe_a, probe_b, rate, cfg)
        key_a, key_b = a[offset + L:], b[offset + L:]

        if cfg.pipeline != "wt" or cfg.selection_mode == "shared":
            band_a = band_b = band
            break
        band_a = _select_device_band(key_a, rate, band, cfg)
        band_b = _select_device_band(key_b, rate, band, cfg)
        if band_a is not None and band_b is not None:
            break
        if updates < cfg.max_threshold_updates and len(key_a) >= L + cfg.block_len:
            updates += 1
            offset += L  # consume a fresh probe window
            continue
        fallbacks += int(band_a is None) + int(band_b is None)
        band_a = band_a or band
        band_b = band_b or band
        break

    pa = _run_pipeline(key_a, rate, band_a, cfg)
    pb = _run_pipeline(key_b, rate, band_b, cfg)
    if cfg.sync and lag != 0:
        aligned = apply_lag(pa, pb, lag)
        pa, pb = aligned.x_aligned, aligned.y_aligned

    return PreprocessResult(
        x=pa, y=pb, band=band, band_x=band_a, band_y=band_b, lag=int(lag),
        total_packets=n, threshold_updates=updates, selection_fallbacks=fallbacks,
    )


def wskg_session(ap, sta, cfg: SessionConfig = SessionConfig()) -> SessionReport:
    """Run one complete key-generation session between two devices.

    Steps: (1) threshold agreement on the first ``probe_len`` samples (the
    probe is public, so it never contributes key material); (2) per-device
    reconstruction with the configured pipeline, plus alignment by the
    agreed lag when ``sync`` is on; (3) block quantization, Gray coding,
    and evaluation at each error threshold.

    ``ap`` and ``sta`` must already be paired (equal length, gap-free),
    e.g. via ``pair_traces(..., gap_policy="interpolate_linear")``.
    """
    pre = preprocess_pair(ap, sta, cfg)
    pa, pb = pre.x, pre.y
    total_packets = pre.total_packets

    if len(pa) < cfg.block_len:
        report = SessionReport(
            per_threshold=tuple(
                ThresholdStats(t, 0, 0, 0.0, None) for t in cfg.error_thresholds
            ),
            overall_ber=None, total_packets=total_packets, key_bits=0, blocks=0,
        )
    else:
        keys_a, skip_a = make_keys(pa, cfg.block_len, cfg.levels,
                                   cfg.whole_trace_thresholds)
        keys_b, skip_b = make_keys(pb, cfg.block_len, cfg.levels,
                                   cfg.whole_trace_thresholds)
        index_a = {k.start_seq: k for k in keys_a}
        index_b = {k.start_seq: k for k in keys_b}
        common = sorted(set(index_a) & set(index_b))
        paired_a = [index_a[s] for s in common]
        paired_b = [index_b[s] for s in common]
        report = evaluate(paired_a, paired_b, total_packets, cfg.error_thresholds)
        report = replace(report, skipped_blocks=skip_a + skip_b)

    return replace(
        report,
        pipeline=cfg.pipeline,
        sync=cfg.sync,
        lag=pre.lag,
        alpha=float(pre.band.alpha),
        beta=int(pre.band.beta),
        band=pre.band_x.band if cfg.pipeline == "wt" else pre.band.band,
        threshold_updates=pre.threshold_updates,
        selection_fallbacks=pre.selection_fallbacks,
    )
