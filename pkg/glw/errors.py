from typing import Optional


class GlwError(ValueError):
    """Base class for every input or computation error raised by glw."""


class PresentationError(GlwError):
    """Malformed or structurally invalid quiver presentation."""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"line {line}, column {column or 1}: {message}"
        super().__init__(message)


class ModuleError(GlwError):
    """Malformed module file or a representation violating a relation."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class FilterError(GlwError):
    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class EmptyFilterError(FilterError):
    pass


class InconsistentSystemError(GlwError):
    pass


class CapExceededError(GlwError):
    pass


class NotComposableError(GlwError):
    pass


class AxiomError(GlwError):
    """The filter lacks an axiom the requested operation depends on."""


class NotClosedError(GlwError):
    pass


class VerificationFailure(GlwError):
    """A theorem check failed; ``witness`` holds the serialized counterexample."""

    def __init__(self, message: str, witness: Optional[dict] = None):
        self.witness = witness or {}
        super().__init__(message)
