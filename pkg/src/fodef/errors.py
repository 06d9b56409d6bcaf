"""Shared exception types.

Exit-code contract used by the CLI: 1 = input error, 2 = internal
cross-check disagreement, 3 = resource cap exceeded.
"""


class FodefError(Exception):
    """Base class for all package errors."""


class AutomatonParseError(FodefError):
    """Malformed automaton or Turing machine text. Carries a 1-based line number."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line
        self.message = message


class CapExceededError(FodefError):
    """A closure (monoid, pair monoid, or determinization) outgrew its cap."""

    def __init__(self, what: str, cap: int):
        super().__init__(f"{what} exceeded the cap of {cap} elements")
        self.what = what
        self.cap = cap


class ConsistencyError(FodefError):
    """An internal cross-check failed (e.g. padding-letter dependence)."""
