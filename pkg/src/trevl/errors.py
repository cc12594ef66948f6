"""Exception types shared across the package."""


class EvalInputError(ValueError):
    """Malformed evaluation input (non-finite score, bad relevance, ...)."""


class ParseError(ValueError):
    """A run/qrel line that does not match the expected grammar."""

    def __init__(self, line_number: int, message: str):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class DuplicateEntryError(ParseError):
    """The same (query, document) pair appeared twice."""


class EmptyResultsError(ValueError):
    """Aggregation requested over zero evaluated queries."""


class BenchmarkError(RuntimeError):
    """The external-evaluator workflow failed."""


class ConfigError(ValueError):
    """Invalid synthesizer or benchmark configuration."""
