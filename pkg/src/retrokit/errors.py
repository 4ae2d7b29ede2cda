"""Exception types shared across the toolkit."""

from __future__ import annotations


class SmilesSyntaxError(ValueError):
    """Malformed SMILES / RXN SMILES text.

    Carries the character position where parsing failed so callers can
    point at the offending token.
    """

    def __init__(self, reason: str, position: int | None = None):
        self.reason = reason
        self.position = position
        if position is not None:
            super().__init__(f"{reason} (at position {position})")
        else:
            super().__init__(reason)


class ValenceError(ValueError):
    """An organic-subset atom exceeds its allowed valence."""


class MappingError(ValueError):
    """Atom-map numbers on a reaction are inconsistent."""


class PatternSyntaxError(ValueError):
    """A substructure pattern is outside the supported subset."""


class NoChangeError(ValueError):
    """A reaction has no bond or hydrogen changes to extract."""


class AmbiguityError(ValueError):
    """A synthon maps to zero or several candidate precursors."""


class GenerationError(RuntimeError):
    """A linking-text generation attempt failed or was truncated."""


class InsufficientPoolError(ValueError):
    """A hard-set bucket has fewer candidates than requested."""
