"""Exception hierarchy.

Every error carries a short kebab-case ``code`` so callers (the CLI in
particular) can map failures without string matching on messages.
"""

from __future__ import annotations


class PmdtError(Exception):
    code = "error"

    def __init__(self, message: str, code: str | None = None):
        super().__init__(message)
        if code is not None:
            self.code = code


class SchemaError(PmdtError):
    """duplicate-class, unknown-parent, cycle-introduced, duplicate-property,
    unknown-domain-or-range, inverse-mismatch, unresolved-reference"""

    code = "schema-error"


class TurtleSyntaxError(PmdtError):
    code = "syntax-error"

    def __init__(self, message: str, line: int, column: int, source: str | None = None):
        where = f"{source}:" if source else ""
        super().__init__(f"{where}{line}:{column}: {message}")
        self.line = line
        self.column = column
        self.source = source


class UnknownPrefixError(PmdtError):
    code = "unknown-prefix"

    def __init__(self, prefix: str, line: int | None = None, column: int | None = None):
        loc = f"{line}:{column}: " if line is not None else ""
        super().__init__(f"{loc}unknown prefix '{prefix}:'")
        self.prefix = prefix
        self.line = line
        self.column = column


class LiteralError(PmdtError):
    code = "invalid-literal"


class StoreError(PmdtError):
    """kind-mismatch or unknown-predicate."""

    code = "store-error"


class QuerySyntaxError(PmdtError):
    code = "syntax-error"

    def __init__(self, message: str, position: int):
        super().__init__(f"at offset {position}: {message}")
        self.position = position


class UnboundSelectVariable(PmdtError):
    code = "unbound-select-variable"


class UnknownClassError(PmdtError):
    code = "unknown-class"


class EvaluationError(PmdtError):
    code = "evaluation-error"


class TemporalCycleError(PmdtError):
    code = "temporal-cycle"

    def __init__(self, states):
        self.states = tuple(states)
        names = ", ".join(str(s) for s in self.states)
        super().__init__(f"precedes closure is reflexive for: {names}")


class FederationError(PmdtError):
    """duplicate-site, mapping-schema-mismatch, csv-type-error,
    template-placeholder-missing, unanswerable-pattern, policy-denied,
    site-unavailable, unknown-role"""

    code = "federation-error"
