"""Exception hierarchy. ``exit_code`` is what the command line returns for the error."""

EXIT_PASS = 0
EXIT_CHECKS_FAILED = 1
EXIT_USAGE = 2


class OddFormsError(Exception):
    """Base class for every rejection raised by oddforms"""

    exit_code = EXIT_USAGE

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


class DimensionMismatchError(OddFormsError):
    """Raised when operands live over spaces of different dimension"""

    def __init__(self, left: int, right: int):
        super().__init__(f"dimension mismatch: {left} vs {right}")


class GradeMismatchError(OddFormsError):
    """Raised when grades that must agree do not"""

    def __init__(self, detail: str):
        super().__init__(f"grade mismatch: {detail}")


class ParityMismatchError(OddFormsError):
    """Raised when parities that must agree do not"""

    def __init__(self, detail: str):
        super().__init__(f"parity mismatch: {detail}")


class KindMismatchError(OddFormsError):
    """Raised when a covector is used where a vector is required or vice versa"""

    def __init__(self, detail: str):
        super().__init__(f"kind mismatch: {detail}")


class GradeOverflowError(OddFormsError):
    """Raised when a product would exceed the top grade of the space"""

    def __init__(self, grade: int, dim: int):
        super().__init__(f"grade {grade} exceeds space dimension {dim}")


class ShapeMismatchError(OddFormsError):
    """Raised when a coefficient tensor has the wrong shape"""

    def __init__(self, expected, actual):
        super().__init__(f"shape mismatch: expected {tuple(expected)}, got {tuple(actual)}")


class DegreeMismatchError(OddFormsError):
    """Raised when a form's degree or parity does not match the current it is integrated on"""

    def __init__(self, detail: str):
        super().__init__(f"degree mismatch: {detail}")


class SupportViolationError(OddFormsError):
    """Raised when a current's support is not inside the domain of a form"""

    def __init__(self, detail: str):
        super().__init__(f"support violation: {detail}")


class DomainViolationError(OddFormsError):
    """Raised when a trajectory is not defined on a neighborhood of a compact domain"""

    def __init__(self, detail: str):
        super().__init__(f"domain violation: {detail}")


class DegenerateCurrentError(OddFormsError):
    """Raised when an infinitesimal check is asked for with w = 0"""

    def __init__(self):
        super().__init__("the odd 4-vector w of a Dirac current must be non-zero")


class MissingDerivativeError(OddFormsError):
    """Raised when an analytic derivative is required but the form has none"""

    def __init__(self, detail: str):
        super().__init__(f"missing derivative: {detail}")


class FamilyError(OddFormsError):
    """Raised when a field family is unknown or its parameters are invalid"""

    def __init__(self, detail: str):
        super().__init__(f"field family error: {detail}")


class ConfigurationError(OddFormsError):
    """Raised when settings or flags are invalid"""

    def __init__(self, detail: str):
        super().__init__(f"configuration error: {detail}")


class InputValidationError(OddFormsError):
    """Raised when an input file is malformed; ``location`` points at the offending entry"""

    def __init__(self, source: str, location: str, detail: str):
        super().__init__(f"{source}: invalid input at {location}: {detail}")
        self.source = source
        self.location = location


class CurrentMismatchError(OddFormsError):
    """Raised when a field and a covector (or a pairing) refer to different currents"""

    def __init__(self, detail: str):
        super().__init__(f"current mismatch: {detail}")
