"""Exception hierarchy shared across the package."""


class RankToolError(Exception):
    """Base class for all rankgraph errors."""


class ConfigError(RankToolError, ValueError):
    """Invalid argument, parameter out of its documented domain, or bad configuration."""


class OracleLimitError(RankToolError):
    """Exact integer oracle invoked beyond its dimension cap."""


class ModeError(RankToolError):
    """Exact checker mode requested beyond its enumeration guard."""


class BudgetError(RankToolError):
    """A randomized or enumerative budget was exhausted."""


class ContractError(RankToolError):
    """Caller violated an operation's structural precondition (shape, nesting, ...)."""


class PersistenceError(RankToolError):
    """Malformed record file; message names the offending line."""


class GraphParseError(RankToolError, ValueError):
    """Malformed graph text; carries the offending 1-based line number."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
