"""Exception hierarchy.

The three top-level categories map onto CLI exit codes: :class:`ConfigError`
-> 2, :class:`PhysicsError` -> 3, :class:`AnalysisError` -> 4.
"""


class QpgStreakError(Exception):
    exit_code = 1


class ConfigError(QpgStreakError, ValueError):
    exit_code = 2

    def __init__(self, message, lineno=None, source=None):
        self.lineno = lineno
        self.source = source
        where = ""
        if source is not None:
            where += f"{source}:"
        if lineno is not None:
            where += f"{lineno}:"
        super().__init__(f"{where} {message}".strip() if where else message)


class FormatError(ConfigError):
    """Malformed artifact file (bad magic, dimensions, sidecar)."""


class PhysicsError(QpgStreakError):
    exit_code = 3


class OutOfRange(PhysicsError, ValueError):
    def __init__(self, wavelength, validity, what="dispersion model"):
        self.wavelength = wavelength
        self.validity = validity
        super().__init__(
            f"wavelength {wavelength!r} um outside {what} validity range "
            f"{validity[0]}-{validity[1]} um"
        )


class MissingPolingPeriod(PhysicsError):
    pass


class NoSolution(PhysicsError):
    pass


class DegenerateSlope(PhysicsError):
    pass


class GridTooNarrow(PhysicsError):
    pass


class GridMismatch(PhysicsError):
    pass


class QuadratureUnderResolved(PhysicsError):
    pass


class DimensionMismatch(PhysicsError, ValueError):
    pass


class AnalysisError(QpgStreakError):
    exit_code = 4


class NoPeak(AnalysisError):
    pass


class Ambiguous(AnalysisError):
    pass


class CalibrationMismatch(AnalysisError):
    pass


class BadROI(AnalysisError, ValueError):
    pass


class BinTooSmall(AnalysisError, ValueError):
    pass


class NoConvergence(AnalysisError):
    def __init__(self, message, result=None):
        self.result = result
        super().__init__(message)


class Unphysical(AnalysisError, ValueError):
    pass
