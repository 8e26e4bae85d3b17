"""Exception types raised across the toolkit."""


class QuansalError(Exception):
    """Base class for all toolkit errors."""


class DimensionMismatch(QuansalError, ValueError):
    pass


class NonHermitian(QuansalError, ValueError):
    def __init__(self, asymmetry: float, message: str | None = None):
        self.asymmetry = asymmetry
        super().__init__(message or f"matrix is not Hermitian (||M - M^H||_F = {asymmetry:.3e})")


class NotPSD(QuansalError, ValueError):
    def __init__(self, min_eigenvalue: float, message: str | None = None):
        self.min_eigenvalue = min_eigenvalue
        super().__init__(message or f"matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")


class InvalidModel(QuansalError, ValueError):
    def __init__(self, message: str, report=None):
        self.report = report
        super().__init__(message)


class ScenarioMismatch(QuansalError, ValueError):
    pass


class NotNormalized(QuansalError, ValueError):
    pass


class ModeMismatch(QuansalError, ValueError):
    pass


class NotProjective(QuansalError, ValueError):
    pass


class NonHermitianKraus(QuansalError, ValueError):
    pass


class EmptyList(QuansalError, ValueError):
    pass


class SpectrumOutOfRange(QuansalError, ValueError):
    def __init__(self, eigenvalue: float, message: str | None = None):
        self.eigenvalue = eigenvalue
        super().__init__(message or f"superoperator eigenvalue {eigenvalue!r} outside [0, 1]")
