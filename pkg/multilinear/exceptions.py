class MultilinearError(Exception):
    """Base class for every error raised by the solvers."""


class CircuitParseError(MultilinearError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f'line {line}: {message}'
        super().__init__(message)


class UndefinedGateError(CircuitParseError):
    def __init__(self, name, line=None):
        self.name = name
        super().__init__(f'undefined gate {name!r}', line)


class DimensionMismatch(MultilinearError):
    pass


class RingMismatch(MultilinearError):
    pass


class TermExplosion(MultilinearError):
    def __init__(self, cap):
        self.cap = cap
        super().__init__(f'sparse expansion exceeds {cap} terms')


class AbpShapeError(MultilinearError):
    pass


class NonHomogeneousError(MultilinearError):
    pass


class WidthCapExceeded(MultilinearError):
    def __init__(self, width, cap):
        self.width = width
        self.cap = cap
        super().__init__(f'ABP width {width} exceeds cap {cap}')


class BudgetExceeded(MultilinearError):
    def __init__(self, message, suggestion=None):
        self.suggestion = suggestion
        if suggestion:
            message = f'{message} ({suggestion})'
        super().__init__(message)


class FieldTooSmall(MultilinearError):
    pass


class PrimeSearchExhausted(MultilinearError):
    pass


class InvalidInstance(MultilinearError):
    pass
