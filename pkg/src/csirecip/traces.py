"""CSI trace data types, CSV ingestion, and AP/STA pairing.

A trace is a sequence-numbered series of per-subcarrier complex channel
estimates for one device.  Missing sequence numbers encode packet loss;
nothing is ever silently resampled or reordered.

CSV format (one packet per row, LF line endings, UTF-8)::

    seq,t,dev,i0,q0,i1,q1,...,i{N-1},q{N-1}

The header row declares the subcarrier count N through its i/q columns.
Rows for lost packets are simply absent.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    EmptyTraceError,
    MalformedHeaderError,
    NoOverlapError,
    SubcarrierOutOfRangeError,
)

GAP = np.nan  # gap marker used in magnitude series


@dataclass(frozen=True)
class CsiSample:
    """One packet's CSI: sequence number, capture time, per-subcarrier IQ."""

    seq: int
    t: float
    iq: np.ndarray  # complex128, one entry per subcarrier

    def __post_init__(self):
        iq = np.asarray(self.iq, dtype=np.complex128)
        iq.setflags(write=False)
        object.__setattr__(self, "iq", iq)
        if not np.isfinite(self.t):
            raise ValueError(f"non-finite capture time at seq {self.seq}")


@dataclass(frozen=True)
class CsiTrace:
    """Ordered, strictly seq-increasing CSI samples for one device."""

    device_id: str
    subcarriers: int
    rate_hz: float
    samples: tuple[CsiSample, ...]
    parse_stats: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.rate_hz <= 0:
            raise ValueError("rate_hz must be positive")
        seqs = [s.seq for s in self.samples]
        if any(b <= a for a, b in zip(seqs, seqs[1:])):
            raise ValueError("samples must be strictly increasing in seq")
        for s in self.samples:
            if len(s.iq) != self.subcarriers:
                raise ValueError(
                    f"sample seq {s.seq} has {len(s.iq)} subcarriers, "
                    f"trace declares {self.subcarriers}"
                )

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def seqs(self) -> np.ndarray:
        return np.array([s.seq for s in self.samples], dtype=np.int64)

    def missing_seqs(self) -> np.ndarray:
        """Sequence numbers absent between the first and last sample."""
        if not self.samples:
            return np.array([], dtype=np.int64)
        full = np.arange(self.samples[0].seq, self.samples[-1].seq + 1)
        return np.setdiff1d(full, self.seqs)


@dataclass(frozen=True)
class MagnitudeSeries:
    """Magnitudes of one subcarrier across a trace; NaN marks a lost packet."""

    subcarrier: int
    values: np.ndarray
    seqs: np.ndarray
    rate_hz: float

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        seqs = np.asarray(self.seqs, dtype=np.int64)
        if values.shape != seqs.shape:
            raise ValueError("values and seqs must have equal length")
        present = values[~np.isnan(values)]
        if present.size and present.min() < 0:
            raise ValueError("magnitudes must be non-negative")
        values.setflags(write=False)
        seqs.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "seqs", seqs)

    def __len__(self) -> int:
        return len(self.values)

    @property
    def has_gaps(self) -> bool:
        return bool(np.isnan(self.values).any())


def parse_csi_csv(stream, rate_hz: float | None = None) -> CsiTrace:
    """Parse the documented CSI CSV format into a :class:`CsiTrace`.

    ``stream`` may be bytes, str, or a file-like object.  Rows that fail to
    parse are rejected and recorded by row index; out-of-order rows are
    dropped (sorting would fabricate a loss-free trace) and duplicated seq
    numbers keep the first occurrence.  Counts of everything dropped live
    in ``trace.parse_stats``.

    When ``rate_hz`` is None the nominal packet rate is inferred from the
    seq/time span of the accepted rows.
    """
    if isinstance(stream, bytes):
        text = stream.decode("utf-8")
    elif isinstance(stream, str):
        text = stream
    else:
        text = stream.read()
        if isinstance(text, bytes):
            text = text.decode("utf-8")

    lines = [ln for ln in text.split("\n") if ln.strip()]
    if not lines:
        raise MalformedHeaderError("empty input")

    header = [c.strip() for c in lines[0].split(",")]
    if header[:3] != ["seq", "t", "dev"]:
        raise MalformedHeaderError(f"expected 'seq,t,dev,...' header, got {lines[0]!r}")
    iq_cols = header[3:]
    n_sub = len(iq_cols) // 2
    expected = [f"{p}{k}" for k in range(n_sub) for p in ("i", "q")]
    if n_sub == 0 or iq_cols != expected:
        raise MalformedHeaderError("header does not declare i0,q0,...,i{N-1},q{N-1}")

    samples: list[CsiSample] = []
    device_id = ""
    bad_rows: list[int] = []
    n_dup = 0
    n_ooo = 0
    last_seq = None
    for idx, line in enumerate(lines[1:], start=1):
        parts = line.split(",")
        if len(parts) != 3 + 2 * n_sub:
            bad_rows.append(idx)
            continue
        try:
            seq = int(parts[0])
            t = float(parts[1])
            vals = np.array([float(v) for v in parts[3:]], dtype=np.float64)
        except ValueError:
            bad_rows.append(idx)
            continue
        if not np.isfinite(t) or not np.all(np.isfinite(vals)):
            bad_rows.append(idx)
            continue
        if last_seq is not None:
            if seq == last_seq:
                n_dup += 1
                continue
            if seq < last_seq:
                n_ooo += 1
                continue
        last_seq = seq
        device_id = parts[2]
        samples.append(CsiSample(seq=seq, t=t, iq=vals[0::2] + 1j * vals[1::2]))

    if not samples:
        raise EmptyTraceError("no rows survived parsing")

    if rate_hz is None:
        if len(samples) > 1 and samples[-1].t > samples[0].t:
            rate_hz = (samples[-1].seq - samples[0].seq) / (samples[-1].t - samples[0].t)
        else:
            rate_hz = 1.0

    return CsiTrace(
        device_id=device_id,
        subcarriers=n_sub,
        rate_hz=float(rate_hz),
        samples=tuple(samples),
        parse_stats={"bad_rows": bad_rows, "duplicates": n_dup, "out_of_order": n_ooo},
    )


def write_csi_csv(trace: CsiTrace, stream=None) -> str | None:
    """Serialize a trace back to the documented CSV format.

    Floats are written with repr precision, so parse -> write round-trips
    accepted rows bit-exactly.
    """
    out = io.StringIO() if stream is None else stream
    cols = ",".join(f"i{k},q{k}" for k in range(trace.subcarriers))
    out.write(f"seq,t,dev,{cols}\n")
    for s in trace.samples:
        iq = ",".join(f"{float(c.real)!r},{float(c.imag)!r}" for c in s.iq)
        out.write(f"{s.seq},{float(s.t)!r},{trace.device_id},{iq}\n")
    if stream is None:
        return out.getvalue()
    return None


def magnitude_series(trace: CsiTrace, subcarrier: int) -> MagnitudeSeries:
    """Extract |iq[subcarrier]| per sample, preserving sample order."""
    if not 0 <= subcarrier < trace.subcarriers:
        raise SubcarrierOutOfRangeError(
            f"subcarrier {subcarrier} outside [0, {trace.subcarriers})"
        )
    vals = np.array([abs(s.iq[subcarrier]) for s in trace.samples])
    return MagnitudeSeries(
        subcarrier=subcarrier,
        values=vals,
        seqs=trace.seqs,
        rate_hz=trace.rate_hz,
    )


def pair_traces(
    ap: CsiTrace,
    sta: CsiTrace,
    subcarrier: int,
    gap_policy: str = "drop_both",
) -> tuple[MagnitudeSeries, MagnitudeSeries]:
    """Align two traces onto a common sequence grid.

    ``drop_both`` removes every seq missing on either side (default for
    metric computation: gaps carry no channel information).
    ``interpolate_linear`` fills interior gaps linearly and trims
    leading/trailing gaps, yielding the uniformly sampled input the
    wavelet pipeline requires.
    """
    if gap_policy not in ("drop_both", "interpolate_linear"):
        raise ValueError(f"unknown gap_policy {gap_policy!r}")
    if not ap.samples or not sta.samples:
        raise EmptyTraceError("cannot pair an empty trace")
    if ap.subcarriers != sta.subcarriers:
        raise ValueError("traces declare different subcarrier counts")

    m_ap = magnitude_series(ap, subcarrier)
    m_sta = magnitude_series(sta, subcarrier)

    lo = max(m_ap.seqs[0], m_sta.seqs[0])
    hi = min(m_ap.seqs[-1], m_sta.seqs[-1])
    if lo > hi:
        raise NoOverlapError(f"seq ranges do not overlap ({lo} > {hi})")

    grid = np.arange(lo, hi + 1)

    def on_grid(ms: MagnitudeSeries) -> np.ndarray:
        out = np.full(len(grid), GAP)
        sel = (ms.seqs >= lo) & (ms.seqs <= hi)
        out[ms.seqs[sel] - lo] = ms.values[sel]
        return out

    a = on_grid(m_ap)
    b = on_grid(m_sta)

    if gap_policy == "drop_both":
        keep = ~(np.isnan(a) | np.isnan(b))
        grid, a, b = grid[keep], a[keep], b[keep]
    else:
        a = _fill_interior(a)
        b = _fill_interior(b)
        keep = ~(np.isnan(a) | np.isnan(b))  # leading/trailing gaps
        first, last = np.flatnonzero(keep)[[0, -1]] if keep.any() else (0, -1)
        grid, a, b = grid[first:last + 1], a[first:last + 1], b[first:last + 1]

    if len(grid) == 0:
        raise NoOverlapError("no jointly present samples in the overlap")

    def mk(v: np.ndarray) -> MagnitudeSeries:
        return MagnitudeSeries(subcarrier=subcarrier, values=v, seqs=grid,
                               rate_hz=ap.rate_hz)

    return mk(a), mk(b)


def _fill_interior(v: np.ndarray) -> np.ndarray:
    """Linear interpolation over interior NaN runs; edge NaNs left alone."""
    nan = np.isnan(v)
    if not nan.any():
        return v
    idx = np.flatnonzero(~nan)
    if idx.size == 0:
        return v
    out = v.copy()
    interior = nan.copy()
    interior[: idx[0]] = False
    interior[idx[-1] + 1:] = False
    out[interior] = np.interp(np.flatnonzero(interior), idx, v[idx])
    return out
