"""Exception hierarchy shared by every verimux subsystem."""

from __future__ import annotations


class VerimuxError(Exception):
    """Base class for all errors raised by verimux."""


class SpecError(VerimuxError):
    """An error attached to a location in a ``.mls`` source file."""

    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.message = message
        self.line = line
        self.col = col
        where = f"{line}:{col}: " if line else ""
        super().__init__(f"{where}{message}")


class SpecSyntaxError(SpecError):
    def __init__(self, message: str, line: int = 0, col: int = 0, expected=()):
        self.expected = tuple(sorted(set(expected)))
        if self.expected:
            message = f"{message} (expected one of: {', '.join(self.expected)})"
        super().__init__(message, line, col)


class UnterminatedString(SpecSyntaxError):
    pass


class DuplicateGoalName(SpecError):
    pass


class UnboundIdentifier(SpecError):
    pass


class SortMismatch(SpecError):
    def __init__(self, expected, found, line: int = 0, col: int = 0, what: str = ""):
        self.expected = expected
        self.found = found
        msg = f"sort mismatch: expected {expected}, found {found}"
        if what:
            msg += f" in {what}"
        super().__init__(msg, line, col)


class UnknownModel(SpecError):
    pass


class RecursivePredicate(SpecError):
    pass


class ExpansionDepthExceeded(SpecError):
    pass


class UnboundedQuantifier(SpecError):
    pass


class DimensionMismatch(VerimuxError):
    """Vector/layer dimensions do not chain.

    ``stage`` is set when the mismatch is between pipeline stages.
    """

    def __init__(self, message: str, stage: int | None = None, line: int = 0, col: int = 0):
        self.stage = stage
        self.line = line
        self.col = col
        where = f"{line}:{col}: " if line else ""
        super().__init__(f"{where}{message}")


# -- model files ------------------------------------------------------------

class FormatError(VerimuxError):
    def __init__(self, line: int, reason: str):
        self.line = line
        self.reason = reason
        super().__init__(f"line {line}: {reason}")


class ShapeMismatch(VerimuxError):
    pass


class NonFiniteWeight(VerimuxError):
    pass


class NonFiniteInput(VerimuxError):
    pass


class SchemaError(VerimuxError):
    def __init__(self, path: str, reason: str):
        self.path = path
        self.reason = reason
        super().__init__(f"{path}: {reason}")


class UnknownKernel(SchemaError):
    pass


class UnknownActivation(SchemaError):
    pass


class RaggedRows(VerimuxError):
    def __init__(self, line: int, expected: int, found: int):
        self.line = line
        super().__init__(f"line {line}: expected {expected} cells, found {found}")


class NonNumericCell(VerimuxError):
    def __init__(self, line: int, col: int, text: str):
        self.line = line
        self.col = col
        super().__init__(f"line {line}, column {col}: not a number: {text!r}")


class EmptyFile(VerimuxError):
    pass


# -- problem IR -------------------------------------------------------------

class UnboundedInputRegion(VerimuxError):
    pass


class UnsupportedFormulaShape(VerimuxError):
    pass


class NonLinearAtom(VerimuxError):
    pass


class PartitionTooLarge(VerimuxError):
    pass


# -- analyzer ---------------------------------------------------------------

class UnsupportedForDomain(VerimuxError):
    pass


class InvalidInterval(VerimuxError):
    pass


class IndexOutOfRange(VerimuxError):
    pass


# -- dispatch ---------------------------------------------------------------

class UnsupportedModel(VerimuxError):
    pass


class EmptyConstraint(VerimuxError):
    pass


class UnsupportedAtom(VerimuxError):
    pass


class ExecutableNotFound(VerimuxError):
    pass


class SpawnFailure(VerimuxError):
    pass


class UnparseableOutput(VerimuxError):
    pass


# -- orchestrator -----------------------------------------------------------

class NoCapableEngine(VerimuxError):
    def __init__(self, goal: str):
        self.goal = goal
        super().__init__(f"no engine can handle goal {goal!r}")


class EmptyInput(VerimuxError):
    pass
