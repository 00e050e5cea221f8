from typing import Any, Optional


class GurevichLabError(Exception):
    """Base class for every error raised by gurevich-lab."""


class ConfigError(GurevichLabError):
    """Base class for configuration errors (CLI exit code 2)."""


class ComputationError(GurevichLabError):
    """Base class for errors raised while computing (CLI exit code 3)."""


class StorageError(GurevichLabError):
    """Base class for artifact storage errors (CLI exit code 4)."""


class ValidationError(ConfigError):
    """Base class for ValidationError
    Parameters:
        key: Name of the failing field or cross-reference
        msg: Validation error message.
    """

    def __init__(self, key: str, msg: str):
        super().__init__(f"{key}: {msg}")
        self.key = key
        self.msg = msg


class ParseError(ConfigError):
    """Raised when a config document cannot be parsed.

    Parameters:
        line: 1-based line of the offending token, if known
        msg: Parser message.
    """

    def __init__(self, msg: str, line: Optional[int] = None):
        super().__init__(f"line {line}: {msg}" if line is not None else msg)
        self.line = line
        self.msg = msg


class InputError(ComputationError):
    """Invalid input to a library operation, tagged with the offending key."""

    def __init__(self, key: str, msg: str):
        super().__init__(f"{key}: {msg}")
        self.key = key
        self.msg = msg


class NonSquare(InputError):
    pass


class EmptyRowOrColumn(InputError):
    pass


class MissingLabel(InputError):
    pass


class ExtraLabel(InputError):
    pass


class KindMismatch(InputError):
    pass


class IndexOutOfRange(InputError):
    pass


class UnsupportedShape(InputError):
    pass


class NotIrreducible(ComputationError):
    pass


class NotAperiodic(ComputationError):
    pass


class ConvergenceError(ComputationError):
    pass


class CountOverflow(ComputationError):
    pass


class BracketFailure(ComputationError):
    pass


class AllZeroCounts(ComputationError):
    pass


class TooFewPoints(ComputationError):
    pass


class NotFull(ComputationError):
    pass


class DepthTooLarge(ComputationError):
    def __init__(self, depth: int, cap: int):
        super().__init__(f"required depth {depth} exceeds the configured cap {cap}")
        self.depth = depth
        self.cap = cap


class BallTooLarge(ComputationError):
    """The DP state space outgrew the configured cap.

    Attributes:
        radius: Radius (or DP level) reached when the cap was hit.
        size: Number of states at that point.
        cap: The configured cap.
    """

    def __init__(self, radius: int, size: int, cap: int):
        super().__init__(
            f"state space of size {size} at radius {radius} exceeds the cap {cap}"
        )
        self.radius = radius
        self.size = size
        self.cap = cap


class NoOrbits(ComputationError):
    """No trivial-holonomy loop of the requested length exists.

    Attributes:
        n: Requested loop length.
        residue: Hint describing the empty residue class (e.g. ``"n odd"``).
    """

    def __init__(self, n: int, residue: Any = None):
        super().__init__(f"no trivial-holonomy loops of length {n} ({residue})")
        self.n = n
        self.residue = residue


class IoError(StorageError):
    pass
