"""Exception hierarchy shared by every module of the package."""


class FssError(Exception):
    """Base class for all errors raised by ffkoopman."""


class NotPrime(FssError, ValueError):
    def __init__(self, p):
        super().__init__(f"{p} is not prime")
        self.p = p
        self.line = None
        self.col = None


class DivisionByZero(FssError, ZeroDivisionError):
    pass


class FieldMismatch(FssError, ValueError):
    pass


class DimensionMismatch(FssError, ValueError):
    pass


class IndexOutOfRange(FssError, IndexError):
    pass


class ConstantTermZero(FssError, ValueError):
    pass


class ParseError(FssError):
    """A located error in a system definition."""

    def __init__(self, message, line=0, col=0):
        self.message = message
        self.line = line
        self.col = col
        super().__init__(f"line {line}, col {col}: {message}")


class FssSyntaxError(ParseError):
    pass


class UndeclaredVariable(ParseError):
    def __init__(self, name, line=0, col=0):
        self.name = name
        super().__init__(f"undeclared variable {name!r}", line, col)


class DuplicateUpdate(ParseError):
    def __init__(self, name, line=0, col=0):
        self.name = name
        super().__init__(f"duplicate update for {name!r}", line, col)


class MissingUpdate(ParseError):
    def __init__(self, name, line=0, col=0):
        self.name = name
        super().__init__(f"no update given for {name!r}", line, col)


class MissingField(ParseError):
    pass


class CapExceeded(FssError):
    """A configured size limit would be exceeded."""


class ReductionTooLarge(CapExceeded):
    pass


class StateSpaceTooLarge(CapExceeded):
    pass


class EnumerationCapExceeded(CapExceeded):
    def __init__(self, dim, p, cap):
        self.dim = dim
        super().__init__(f"enumerating {p}^{dim} candidates exceeds cap {cap}")


class NoOutputs(FssError, ValueError):
    pass


class NotDetectable(FssError):
    pass


class GainSearchExhausted(FssError):
    def __init__(self, budget):
        self.budget = budget
        super().__init__(f"no output combination made the pair observable within {budget} candidates")


class NotPeriodic(FssError, ValueError):
    pass


class NotAChainRoot(FssError, ValueError):
    pass


class InvariantViolation(FssError):
    pass
