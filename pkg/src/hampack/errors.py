"""Exception types shared across the package."""

from __future__ import annotations


class HampackError(Exception):
    pass


class ParameterError(HampackError, ValueError):
    pass


class PlanningError(ParameterError):
    pass


class PreconditionError(HampackError, ValueError):
    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


class GraphParseError(HampackError, ValueError):
    def __init__(self, message: str, line: int | None = None):
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)
        self.line = line


class Infeasible(HampackError):
    """No object of the requested kind exists (or none was found).

    `certificate` holds whatever evidence the failing routine could produce:
    a Tutte pair, a Tutte-Berge set, a Hall set or a min cut.
    """

    def __init__(self, message: str, certificate=None, **extra):
        super().__init__(message)
        self.certificate = certificate
        for k, v in extra.items():
            setattr(self, k, v)


class MergeStuck(HampackError):
    def __init__(self, message: str, state: dict | None = None):
        super().__init__(message)
        self.state = state or {}


class StallError(HampackError):
    def __init__(self, message: str, state: dict | None = None):
        super().__init__(message)
        self.state = state or {}
