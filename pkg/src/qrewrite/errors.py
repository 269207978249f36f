"""Exception types shared across the engine.

Every error that crosses a module boundary (parser, sort checker, rewriter,
strategy, server) is one of these, so front ends can map them to exit codes
and HTTP payloads uniformly.
"""

from __future__ import annotations


class QRewriteError(Exception):
    """Base class for all engine errors."""


class SortError(QRewriteError):
    """A term violates the signature's sort or space constraints.

    ``position`` is the path (tuple of 1-based indices) of the offending
    subterm; ``span`` is a byte range when the term came from source text.
    """

    def __init__(self, reason: str, position: tuple[int, ...] = (),
                 span: tuple[int, int] | None = None):
        self.reason = reason
        self.position = position
        self.span = span
        at = "" if not position else f" at position {'.'.join(map(str, position))}"
        super().__init__(f"{reason}{at}")


class InvalidPosition(QRewriteError):
    def __init__(self, position: tuple[int, ...], term_summary: str = ""):
        self.position = position
        msg = f"position {'.'.join(map(str, position)) or 'eps'} does not exist"
        if term_summary:
            msg += f" in {term_summary}"
        super().__init__(msg)


class ParseError(QRewriteError):
    """Syntax error with the byte span of the offending input."""

    def __init__(self, message: str, span: tuple[int, int], expected: str = ""):
        self.span = span
        self.expected = expected
        super().__init__(f"{message} (bytes {span[0]}..{span[1]})")


class NoMatch(QRewriteError):
    def __init__(self, rule_id: str, position: tuple[int, ...]):
        self.rule_id = rule_id
        self.position = position
        super().__init__(
            f"rule {rule_id} does not match at position "
            f"{'.'.join(map(str, position)) or 'eps'}")


class DirectionNotAllowed(QRewriteError):
    def __init__(self, rule_id: str):
        self.rule_id = rule_id
        super().__init__(f"rule {rule_id} is one-directional; reverse application refused")


class UnknownRule(QRewriteError):
    def __init__(self, rule_id: str):
        self.rule_id = rule_id
        super().__init__(f"no rule named {rule_id!r} in the registry")


class IllFormedRule(QRewriteError):
    def __init__(self, reason: str):
        self.reason = reason
        super().__init__(reason)


class StepLimitExceeded(QRewriteError):
    def __init__(self, max_steps: int):
        self.max_steps = max_steps
        super().__init__(f"rewrite step budget of {max_steps} exhausted")


class ReplayError(QRewriteError):
    """A recorded derivation step failed; carries the 0-based step index."""

    def __init__(self, step_index: int, cause: Exception):
        self.step_index = step_index
        self.cause = cause
        super().__init__(f"step {step_index} failed: {cause}")


class UnassignedConstant(QRewriteError):
    def __init__(self, description: str):
        super().__init__(f"model assigns no value to {description}")
