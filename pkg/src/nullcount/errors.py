"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class NullcountError(Exception):
    exit_code = 1


class ParseError(NullcountError, ValueError):
    exit_code = 2

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"line {line}, column {column}: {message}"
        super().__init__(message)


class DomainViolation(NullcountError, ValueError):
    exit_code = 2


class SchemaError(NullcountError, ValueError):
    """Query and database disagree on a relation's arity."""
    exit_code = 2


class CapabilityError(NullcountError):
    """Input lies outside what an algorithm or guard supports."""
    exit_code = 3


class SettingError(CapabilityError):
    """Database does not match the requested table/domain setting."""


class HardnessError(CapabilityError):
    """No exact polynomial algorithm and no permitted fallback."""


class ResourceError(NullcountError):
    exit_code = 4


class VerificationError(NullcountError):
    exit_code = 5
