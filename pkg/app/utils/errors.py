from typing import Optional


class SparseMahlerError(Exception):
    """Base class for every domain error; `code` is stable across releases"""

    code = "sparse_mahler_error"

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message

    def to_dict(self) -> dict:
        return {"code": self.code, "message": self.message}


class InvalidArgumentError(SparseMahlerError):
    code = "invalid_argument"


class ZeroPolynomialError(SparseMahlerError):
    code = "zero_polynomial"

    def __init__(self, message: str = "undefined for zero polynomial"):
        super().__init__(message)


class DerivativeDegenerateError(SparseMahlerError):
    code = "derivative_degenerate"

    def __init__(self, message: str = "derivative degenerate"):
        super().__init__(message)


class PolynomialSyntaxError(SparseMahlerError):
    code = "syntax_error"

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at byte {offset}")
        self.offset = offset

    def to_dict(self) -> dict:
        return {**super().to_dict(), "offset": self.offset}


class ExponentOverflowError(SparseMahlerError):
    code = "exponent_overflow"


class RootFindingError(SparseMahlerError):
    code = "root_nonconvergence"

    def __init__(self, message: str, best_residual: float):
        super().__init__(message)
        self.best_residual = best_residual

    def to_dict(self) -> dict:
        return {**super().to_dict(), "best_residual": self.best_residual}


class DegreeTooLargeError(SparseMahlerError):
    code = "degree_too_large"


class CircleZeroSaturationError(SparseMahlerError):
    code = "circle_zero_saturation"

    def __init__(self, skipped: int, total: int):
        super().__init__(f"circle-zero saturation: {skipped} of {total} sample points hit zeros")
        self.skipped = skipped
        self.total = total


class VanishingRestrictionError(SparseMahlerError):
    code = "vanishing_restriction"

    def __init__(self, message: str = "vanishing restriction"):
        super().__init__(message)


class PhiAtOneError(SparseMahlerError):
    code = "phi_at_one_excluded"

    def __init__(self, message: str = "Φ_1(1) = 0, excluded: m must be at least 2"):
        super().__init__(message)


class SubsetScanInfeasibleError(SparseMahlerError):
    code = "subset_scan_infeasible"

    def __init__(self, message: str = "subset scan infeasible"):
        super().__init__(message)


class NonUnitCoefficientsError(SparseMahlerError):
    code = "non_unit_coefficients"


class ConstructionPreconditionError(SparseMahlerError):
    code = "construction_precondition"


class ProofChainPreconditionError(SparseMahlerError):
    code = "proof_chain_precondition"


class RecordStoreCorruptError(SparseMahlerError):
    code = "record_store_corrupt"

    def __init__(self, path: str, line_number: int, reason: Optional[str] = None):
        detail = f": {reason}" if reason else ""
        super().__init__(f"corrupt record in {path} at line {line_number}{detail}")
        self.line_number = line_number

    def to_dict(self) -> dict:
        return {**super().to_dict(), "line_number": self.line_number}
