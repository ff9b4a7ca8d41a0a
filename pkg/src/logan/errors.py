"""Exception hierarchy shared across the package."""


class LoganError(Exception):
    """Base class for all package errors."""


class ContractError(LoganError):
    """An operation was called with arguments violating its preconditions."""


class ConfigError(LoganError):
    """A model or edit configuration is invalid."""


class NumericError(LoganError):
    """Non-finite values encountered where finite data is required."""


class AdapterFormatError(LoganError):
    """A checkpoint manifest or weight blob is unreadable or mismatched."""


class LayoutIncompleteError(LoganError):
    """Segmentation lacks the evidence needed to parse a layout component."""

    def __init__(self, component: str, message: str):
        super().__init__(message)
        self.component = component


class CorruptionError(LoganError):
    """A persisted blob failed its digest check."""


class ManifestVersionError(LoganError):
    """A persisted manifest declares an unsupported version."""


class ScriptParseError(LoganError):
    """An edit script violates the JSON schema.

    ``pointer`` is the JSON-pointer path of the offending element.
    """

    def __init__(self, message: str, pointer: str = ""):
        super().__init__(f"{pointer}: {message}" if pointer else message)
        self.pointer = pointer


class UnknownObjectError(LoganError):
    """An edit references an object id absent from the bank."""

    def __init__(self, object_id: str):
        super().__init__(f"unknown object id: {object_id!r}")
        self.object_id = object_id
