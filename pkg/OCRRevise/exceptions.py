class OCRReviseError(Exception):
    """Base class for all exceptions in the OCRRevise toolkit.
    """


class ProfileFormatError(OCRReviseError):
    """Profile format error. Raised if a profile, confusion table, prompt or model file
    cannot be parsed. The message names the offending line and field.
    """

    def __init__(self, message=None):
        super().__init__(message)
        self.message = message


class ProfileValidationError(OCRReviseError):
    """Profile validation error. Raised if a contamination profile violates one of its invariants.
    """

    def __init__(self, message=None, violations=None):
        super().__init__(message)
        self.message = message
        self.violations = violations if violations is not None else []


class EmptyInputError(OCRReviseError):
    """Empty input error. Raised if an operation needs text but got an empty or whitespace-only string.
    """

    def __init__(self, message=None):
        super().__init__(message)
        self.message = message


class LayoutError(OCRReviseError):
    """Layout error. Raised if a column interleave or its inverse gets structurally invalid input.
    """

    def __init__(self, message=None):
        super().__init__(message)
        self.message = message


class CorpusFormatError(OCRReviseError):
    """Corpus format error. Raised if a corpus or pair file contains a malformed record.
    """

    def __init__(self, message=None):
        super().__init__(message)
        self.message = message


class ReplayError(OCRReviseError):
    """Replay error. Raised if an event log or section layout does not replay onto its source text.
    """

    def __init__(self, message=None):
        super().__init__(message)
        self.message = message


class ModelError(OCRReviseError):
    """Model error. Raised if the correction models cannot be trained or loaded.
    """

    def __init__(self, message=None):
        super().__init__(message)
        self.message = message


class MetricsError(OCRReviseError):
    """Metrics error. Raised on empty references, unmatched document ids or unresolved relevant ids.
    """

    def __init__(self, message=None):
        super().__init__(message)
        self.message = message
