"""Exception hierarchy shared across the package."""


class NeurogradeError(Exception):
    """Base class for all package errors."""


# --- ingestion ---------------------------------------------------------------

class ParseError(NeurogradeError):
    """Malformed file content. Carries the byte offset where parsing failed."""

    def __init__(self, message: str, offset: int | None = None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)


class UnsupportedFormat(NeurogradeError):
    """File is recognizable but uses an unsupported variant."""


class MontageError(NeurogradeError):
    """A montage references a channel label the recording does not have."""


class LabelError(NeurogradeError):
    """Invalid grade label file."""


class SplitError(NeurogradeError):
    """Dataset split cannot be formed."""


# --- signal processing -------------------------------------------------------

class DspError(NeurogradeError):
    """Generic signal-processing precondition failure."""


class FilterDesignError(DspError):
    """Filter specification cannot produce a stable, in-band design."""


class ResampleError(DspError):
    """Invalid resampling rate pair."""


class SegmentError(DspError):
    """Window does not fit the signal."""


# --- features ----------------------------------------------------------------

class FeatureError(NeurogradeError):
    """Feature computation precondition failure."""


class SpectralError(FeatureError):
    """Spectral feature undefined (e.g. zero total power)."""


class CopulaError(FeatureError):
    """Dependence estimation failed (degenerate input)."""


# --- grader ------------------------------------------------------------------

class TrainError(NeurogradeError):
    """Training cannot proceed or did not converge."""


class PredictError(NeurogradeError):
    """Feature schema mismatch at prediction time."""


# --- metrics -----------------------------------------------------------------

class MetricError(NeurogradeError):
    """Invalid metric inputs."""


class CiError(MetricError):
    """Bootstrap interval could not be formed (too many degenerate resamples)."""


# --- competition -------------------------------------------------------------

class ConfigError(NeurogradeError):
    """Invalid competition or service configuration."""


class ValidationError(NeurogradeError):
    """Submission file rejected. ``problems`` lists one message per defect,
    each optionally tagged with a 1-based line number."""

    def __init__(self, problems: list[tuple[int | None, str]]):
        self.problems = problems
        lines = "; ".join(
            (f"line {ln}: {msg}" if ln is not None else msg) for ln, msg in problems
        )
        super().__init__(lines)


class RateLimited(NeurogradeError):
    """Daily submission quota exhausted. ``next_allowed`` is a UTC datetime."""

    def __init__(self, next_allowed):
        self.next_allowed = next_allowed
        super().__init__(f"daily submission limit reached, next allowed at {next_allowed.isoformat()}")


class WindowClosed(NeurogradeError):
    """Submission window is not open."""


class RecoveryError(NeurogradeError):
    """Journal replay hit a corrupted record. Carries the file offset."""

    def __init__(self, message: str, offset: int):
        self.offset = offset
        super().__init__(f"{message} (journal offset {offset})")
