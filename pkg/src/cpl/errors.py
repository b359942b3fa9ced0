"""Exception hierarchy. Every domain failure derives from CPLError."""


class CPLError(Exception):
    pass


class ParseError(CPLError):
    def __init__(self, message, position=None):
        self.position = position
        if position is not None:
            message = f"{message} at position {position}"
        super().__init__(message)


class SignatureError(CPLError):
    pass


class NetworkError(CPLError):
    pass


class InvalidNetworkError(NetworkError):
    """A guard lookup found zero or several satisfied guards."""


class EvaluationError(CPLError):
    pass


class BoundExceededError(CPLError):
    pass


class CriticalFormulaError(CPLError):
    def __init__(self, message, witnesses=()):
        self.witnesses = list(witnesses)
        if self.witnesses:
            r, a, b = self.witnesses[0]
            message = f"{message} (r={r}, alpha={a}, beta={b})"
        super().__init__(message)


class ZeroMassError(CPLError):
    """Conditioning on a type whose asymptotic probability is zero."""
