"""Exception types shared across the package."""


class PhotonDistillError(Exception):
    """Base class for all package errors."""


class DimensionError(PhotonDistillError, ValueError):
    pass


class NonUnitaryError(PhotonDistillError, ValueError):
    def __init__(self, deviation: float, tol: float):
        self.deviation = deviation
        self.tol = tol
        super().__init__(f"matrix is not unitary: max |U^H U - I| = {deviation:.3e} > {tol:.0e}")


class SizeExceeded(PhotonDistillError, ValueError):
    pass


class ConservationViolation(PhotonDistillError, ValueError):
    pass


class PMaxOneError(PhotonDistillError, ValueError):
    """Raised where the odds ratio p_max / (1 - p_max) is needed but p_max == 1."""


class NumericIntegrityError(PhotonDistillError, ArithmeticError):
    """A proven inequality failed or a probability went meaningfully negative.

    Either means a bug in the numerics, never a property of the input.
    """
