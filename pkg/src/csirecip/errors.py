"""Exception hierarchy for csirecip.

Every data-dependent failure raises a subclass of :class:`CsiRecipError`,
so callers (and the CLI) can distinguish data errors from programming
errors with a single except clause.
"""


class CsiRecipError(Exception):
    """Base class for all csirecip data errors."""


# --- trace ingestion / pairing ---

class MalformedHeaderError(CsiRecipError):
    """CSV header is missing or does not declare i/q columns."""


class EmptyTraceError(CsiRecipError):
    """No usable samples after parsing."""


class SubcarrierOutOfRangeError(CsiRecipError, IndexError):
    """Requested subcarrier index outside the trace's subcarrier count."""


class NoOverlapError(CsiRecipError):
    """Two traces share no sequence-number range."""


# --- metrics ---

class LengthMismatchError(CsiRecipError):
    """Paired inputs must have equal length."""


class DegenerateSeriesError(CsiRecipError):
    """A series has zero variance where variance is required."""


class ConstantPooledRangeError(CsiRecipError):
    """Pooled values are all identical; histogram edges undefined."""


class SeriesTooShortError(CsiRecipError):
    """Series too short for the requested lag search."""


# --- wavelet ---

class GapsPresentError(CsiRecipError):
    """Input contains gap markers (NaN); interpolate before transforming."""


class TooShortError(CsiRecipError):
    """Input shorter than the transform requires."""


class EmptyBandError(CsiRecipError):
    """No frequency bins fall inside the requested band."""


# --- reconstruction ---

class BadWindowError(CsiRecipError):
    """Invalid smoothing window (even, too small, or larger than input)."""


class NoFrequencySelectedError(CsiRecipError):
    """Coherence thresholding selected no frequency bins."""


class UnusableCoherenceError(CsiRecipError):
    """Coherence map too weak to support any threshold adaptation."""


# --- key generation ---

class DegenerateBlockError(CsiRecipError):
    """Too few distinct values in a block to place quantizer thresholds."""


class LevelOutOfRangeError(CsiRecipError):
    """Quantization level exceeds the configured level count."""


class ListMismatchError(CsiRecipError):
    """Key-block lists cannot be paired."""


# --- channel simulation ---

class InvalidBandError(CsiRecipError):
    """Simulated fading band violates the Nyquist constraint."""
