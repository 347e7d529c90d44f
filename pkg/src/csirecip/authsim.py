"""CSI-handshake authentication and simulated recording/replay attacks.

The handshake: both sides measure CSI from exchanged probes, the station
sends back its measurement under a keyed authentication tag, and the
access point accepts only when the tag verifies, the two measurements
correlate strongly, and the estimated time shift is small.  A replayed
recording carries a valid tag but stale CSI, so it fails the channel
checks instead of the cryptographic one.
"""

from __future__ import annotations

import hashlib
import hmac
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DegenerateSeriesError
from .metrics import pearson, xcorr_lag


class Reason(str, Enum):
    OK = "ok"
    BAD_SIGNATURE = "bad_signature"
    LOW_CORR = "low_corr"
    HIGH_SHIFT = "high_shift"


@dataclass(frozen=True)
class AuthPolicy:
    """Acceptance thresholds; defaults sit midway between the observed
    legitimate (high corr, tiny shift) and replay (near-zero corr, large
    shift) operating points."""

    min_corr: float = 0.4
    max_shift: int = 50
    probe_len: int = 600

    def __post_init__(self):
        if not 0 < self.min_corr < 1:
            raise ValueError("min_corr must be in (0, 1)")
        if self.max_shift < 0:
            raise ValueError("max_shift must be non-negative")
        if self.probe_len < 8:
            raise ValueError("probe_len must be >= 8")


@dataclass(frozen=True)
class AuthMessage:
    """S3 message: the station's measured CSI under an authentication tag."""

    kind: str
    payload_csi: np.ndarray
    tag: bytes
    sent_at: float = 0.0

    def __post_init__(self):
        arr = np.asarray(self.payload_csi, dtype=np.float64)
        arr.setflags(write=False)
        object.__setattr__(self, "payload_csi", arr)


@dataclass(frozen=True)
class AuthDecision:
    accepted: bool
    corr: float
    shift: int
    reason: Reason

    def to_dict(self) -> dict:
        return {
            "accepted": self.accepted,
            "corr": self.corr,
            "shift": self.shift,
            "reason": self.reason.value,
        }


def _tag(payload: np.ndarray, key: bytes) -> bytes:
    return hmac.new(key, np.ascontiguousarray(payload, dtype=np.float64).tobytes(),
                    hashlib.sha256).digest()


def sign_csi(csi, key: bytes, sent_at: float = 0.0) -> AuthMessage:
    """Build the signed S3 message for a measured CSI window."""
    payload = np.asarray(csi, dtype=np.float64).ravel()
    return AuthMessage(kind="S3_signed", payload_csi=payload,
                       tag=_tag(payload, key), sent_at=sent_at)


def verify_tag(message: AuthMessage, key: bytes) -> bool:
    return hmac.compare_digest(message.tag, _tag(message.payload_csi, key))


def _channel_checks(ap_csi: np.ndarray, payload: np.ndarray,
                    policy: AuthPolicy) -> AuthDecision:
    n = min(len(ap_csi), len(payload), policy.probe_len)
    x = ap_csi[:n]
    y = payload[:n]
    max_lag = max(1, n // 3)
    try:
        corr = pearson(x, y)
        shift = abs(xcorr_lag(x, y, max_lag).lag)
    except DegenerateSeriesError:
        # fail closed: a frozen channel can never authenticate
        return AuthDecision(False, 0.0, 0, Reason.LOW_CORR)
    if corr < policy.min_corr:
        return AuthDecision(False, corr, shift, Reason.LOW_CORR)
    if shift > policy.max_shift:
        return AuthDecision(False, corr, shift, Reason.HIGH_SHIFT)
    return AuthDecision(True, corr, shift, Reason.OK)


def run_handshake(ap_csi, sta_csi, policy: AuthPolicy, key: bytes,
                  message: AuthMessage | None = None) -> AuthDecision:
    """Legitimate handshake: AP checks the station's signed CSI report.

    The signature gate runs before any channel math.  ``message``
    overrides the station's signed report, which lets tests inject
    tampered tags.
    """
    ap_csi = np.asarray(ap_csi, dtype=np.float64).ravel()
    if message is None:
        message = sign_csi(np.asarray(sta_csi, dtype=np.float64).ravel(), key)
    if not verify_tag(message, key):
        return AuthDecision(False, 0.0, 0, Reason.BAD_SIGNATURE)
    return _channel_checks(ap_csi, message.payload_csi, policy)


def replay_attack(recorded_s1, recorded_s3: AuthMessage, ap_now,
                  policy: AuthPolicy, key: bytes) -> AuthDecision:
    """Replay of a recorded handshake against fresh AP measurements.

    The recording's tag verifies (replay preserves signatures), so the
    decision rides on correlating the attacker-induced fresh CSI with the
    stale payload: temporal and spatial decorrelation push the correlation
    down and the apparent shift up.  ``recorded_s1`` is carried for
    protocol fidelity; the AP's fresh measurement ``ap_now`` is what the
    replayed probe produced at the AP.
    """
    del recorded_s1  # the stale probe itself never reaches the decision
    ap_now = np.asarray(ap_now, dtype=np.float64).ravel()
    if not verify_tag(recorded_s3, key):
        return AuthDecision(False, 0.0, 0, Reason.BAD_SIGNATURE)
    return _channel_checks(ap_now, recorded_s3.payload_csi, policy)


def temporal_decorrelation_curve(generator, gaps, seed: int = 0
                                 ) -> list[tuple[float, float, int]]:
    """Correlation and |shift| as a function of collection-time gap.

    ``generator(gap_s, rng)`` must return the paired (reference, delayed)
    series for one trial; gaps must be ascending and start at 0 so the
    first point anchors the no-gap operating point used to calibrate
    :class:`AuthPolicy`.
    """
    gaps = list(gaps)
    if not gaps or gaps[0] != 0 or gaps != sorted(gaps):
        raise ValueError("gaps must be ascending and start at 0")
    rng = np.random.default_rng(seed)
    out = []
    for gap in gaps:
        x, y = generator(float(gap), rng)
        x = np.asarray(x, dtype=np.float64).ravel()
        y = np.asarray(y, dtype=np.float64).ravel()
        n = min(len(x), len(y))
        try:
            corr = pearson(x[:n], y[:n])
            shift = abs(xcorr_lag(x[:n], y[:n], max(1, n // 3)).lag)
        except DegenerateSeriesError:
            corr, shift = 0.0, 0
        out.append((float(gap), corr, shift))
    return out
