from __future__ import annotations


class GroupAutomataError(Exception):
    """Base class for every error the library raises on purpose.

    `exit_code` is what the command line returns when the error escapes a
    command.
    """

    exit_code: int = 1


class DomainError(GroupAutomataError, ValueError):
    exit_code = 2


class StructuralError(GroupAutomataError, ValueError):
    exit_code = 2


class PreconditionError(GroupAutomataError, ValueError):
    exit_code = 2


class CapacityError(GroupAutomataError):
    exit_code = 3


class KernelInconsistencyError(GroupAutomataError):
    exit_code = 2


class UnsupportedExactError(GroupAutomataError):
    exit_code = 2


class HypothesisViolationError(GroupAutomataError):
    """A family of index sets breaks one of the (H1), (H2), (H3) conditions."""

    exit_code = 4

    def __init__(self, condition: str, pair: tuple[int, ...], detail: str) -> None:
        self.condition = condition
        self.pair = pair
        super().__init__(f"{condition} violated for {pair}: {detail}")


class IneligibleError(GroupAutomataError):
    exit_code = 2

    def __init__(self, m: int, membership: str) -> None:
        self.m = m
        self.membership = membership
        super().__init__(f"m={m} is not eligible: fails {membership}")


class ConfigError(GroupAutomataError):
    exit_code = 2

    def __init__(self, message: str, line: int | None = None) -> None:
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
