"""Exception hierarchy shared by all modules."""
from __future__ import annotations


class PlanTransferError(Exception):
    """Base class for every error raised by the library."""


class SchemaError(PlanTransferError):
    pass


class ParseError(SchemaError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(where + message)


class DuplicateNameError(SchemaError):
    pass


class UnknownNameError(SchemaError):
    pass


class InstanceError(PlanTransferError):
    """Type mismatch, out-of-range reference or duplicate label in an instance."""


class MorphismError(PlanTransferError):
    pass


class SchemaMismatchError(PlanTransferError):
    pass


class OntologyMapError(PlanTransferError):
    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__("invalid ontology map:\n  " + "\n  ".join(self.problems))


class RewriteError(PlanTransferError):
    step: int | None = None


class InvalidMatch(RewriteError):
    pass


class AmbiguousMatch(InvalidMatch):
    pass


class DanglingViolation(RewriteError):
    def __init__(self, entries: list[tuple[str, str, str]]):
        # (hom, source element ref, deleted target ref)
        self.entries = list(entries)
        listing = ", ".join(f"{h}({s}) = {t}" for h, s, t in self.entries)
        super().__init__(f"dangling condition violated by surviving entries: {listing}")


class IncompleteResult(RewriteError):
    pass


class PushoutError(RewriteError):
    """Raised when two attribute values are forced to coincide in a pushout."""


class PlanError(RewriteError):
    def __init__(self, step: int, cause: Exception):
        self.step = step
        self.cause = cause
        super().__init__(f"step {step}: {type(cause).__name__}: {cause}")


class MigrationError(PlanTransferError):
    pass


class MigrationPartiality(MigrationError):
    def __init__(self, message: str, step: int | None = None):
        self.step = step
        prefix = f"step {step}: " if step is not None else ""
        super().__init__(prefix + message)


class TransferError(PlanTransferError):
    pass
