from typing import List
from typing import Optional
from typing import Tuple


class DecoyKitException(Exception):
    """Generic Exception for errors raised by decoykit"""

    def __copy__(self):
        # We do not copy or deepcopy exceptions,
        # because they are used as immutables,
        # and because default memo fails.
        return self

    def __deepcopy__(self, memo):
        # We do not copy or deepcopy exceptions,
        # because they are used as immutables,
        # and because default memo fails.
        return self


class ParameterException(DecoyKitException, ValueError):
    """A precondition on the arguments of an operation is violated."""

    def __init__(self, message: str):
        self.message = message
        super().__init__(message)


class LengthMismatchException(DecoyKitException, ValueError):
    """Two values which must have equal length do not.

    ``position`` is set when the offending value is part of a sequence
    (e.g. the index of a token in a token stream)."""

    def __init__(self, expected: int, actual: int, position: Optional[int] = None):
        self.expected = expected
        self.actual = actual
        self.position = position
        where = "" if position is None else f" at position {position}"
        super().__init__(f"Length mismatch{where}: expected {expected}, found {actual}.")


class FormatException(DecoyKitException):
    """A textual key, token or hex representation could not be parsed."""

    def __init__(self, abort_reason: str, line: Optional[int] = None):
        self.abort_reason = abort_reason
        self.line = line
        where = "" if line is None else f" (line {line})"
        super().__init__(f"{abort_reason}{where}")


class WireFormatException(FormatException):
    """A binary packet stream is malformed."""

    def __init__(self, abort_reason: str, offset: int):
        self.offset = offset
        super().__init__(abort_reason=f"{abort_reason} at byte offset {offset}")


class UnknownSymbolException(DecoyKitException, ValueError):
    """A message contains a symbol which is not part of the key's alphabet."""

    def __init__(self, symbol: str, position: int):
        self.symbol = symbol
        self.position = position
        super().__init__(f"Unknown symbol {symbol!r} at position {position}.")


class SeparatorPresentException(DecoyKitException, ValueError):
    """A plaintext to normalize already contains the separator symbol."""

    def __init__(self, separator: str, position: int):
        self.separator = separator
        self.position = position
        super().__init__(
            f"Separator {separator!r} found in plaintext at position {position}; "
            "normalization would not be reversible."
        )


class EmptySetException(DecoyKitException):
    """A set that a value must be drawn from is empty (or exhausted)."""

    def __init__(self, what: str):
        self.what = what
        super().__init__(f"Cannot draw from empty set: {what}")


class SearchFailedException(DecoyKitException):
    """A bounded randomized search or construction gave up."""

    def __init__(self, message: str, attempts: int):
        self.attempts = attempts
        super().__init__(f"{message} (after {attempts} attempts)")


class NoPathException(DecoyKitException):
    """No road of bounded length leads from a vertex to a station with the wanted symbol."""

    def __init__(self, vertex: str, symbol: str, l_max: int):
        self.vertex = vertex
        self.symbol = symbol
        self.l_max = l_max
        super().__init__(
            f"No path of at most {l_max} roads from `{vertex}` to a station carrying {symbol!r}."
        )


class UndefinedTransitionException(DecoyKitException):
    """A label sequence uses a road that does not exist on the map."""

    def __init__(self, position: int, vertex: str, label: str):
        self.position = position
        self.vertex = vertex
        self.label = label
        super().__init__(
            f"Undefined transition at position {position}: "
            f"vertex `{vertex}` has no road labeled `{label}`."
        )


class InconsistentDecoyException(DecoyKitException):
    """A decoy plaintext cannot be forged onto the visit pattern of a walk."""

    def __init__(self, first: int, second: int):
        self.first = first
        self.second = second
        super().__init__(
            f"Decoy positions {first} and {second} visit the same station "
            "but require different symbols."
        )

    @property
    def conflict(self) -> Tuple[int, int]:
        """The first conflicting position pair."""
        return self.first, self.second


class KeyTooShortException(DecoyKitException, ValueError):
    """A pad is shorter than the data it should be applied to."""

    def __init__(self, required_bits: int, available_bits: int):
        self.required_bits = required_bits
        self.available_bits = available_bits
        super().__init__(
            f"Pad too short: {required_bits} bits required, {available_bits} available."
        )


class VerificationException(DecoyKitException):
    """Re-checking a constructed object failed."""

    def __init__(self, reasons: List[str]):
        self.reasons = reasons
        reasons_string = "\n\n=====\n\n".join(reasons)
        super().__init__(f"Verification failed: {reasons_string}")


class InternalStateException(DecoyKitException):
    """decoykit is in a self-inflicted invalid state."""

    def __init__(self, message: str):
        self.message = message
        super().__init__(
            f"{message}\nThis is a decoykit internal error. "
            "Please report this issue at our issue tracker."
        )


class InsufficientSampleException(DecoyKitException, ValueError):
    """A statistical test got fewer observations than it needs."""

    def __init__(self, test: str, required: int, actual: int):
        self.test = test
        self.required = required
        self.actual = actual
        super().__init__(f"{test} needs at least {required} observations, got {actual}.")


class MessageTooLongException(DecoyKitException, ValueError):
    """A message needs more packets than there are serial numbers."""

    def __init__(self, units: int, limit: int):
        self.units = units
        self.limit = limit
        super().__init__(f"Message needs {units} packets, but only {limit} serials exist.")
