# File: smoothbench/core/errors.py

from typing import Optional


class SmoothBenchError(Exception):
    """Base error. `exit_code` is what the CLI returns when this escapes a command."""

    exit_code: int = 1
    code: str = "SMOOTHBENCH_ERROR"


class ConfigError(SmoothBenchError):
    exit_code = 2
    code = "CONFIG_ERROR"


class MatrixMarketParseError(SmoothBenchError):
    exit_code = 3
    code = "PARSE_ERROR"

    def __init__(
        self, path: str, message: str, line: Optional[int] = None, token: Optional[str] = None
    ) -> None:
        self.path = path
        self.line = line
        self.token = token
        where = f"{path}:{line}" if line is not None else path
        detail = f" (token {token!r})" if token is not None else ""
        super().__init__(f"{where}: {message}{detail}")


class NumericalError(SmoothBenchError):
    exit_code = 4
    code = "NUMERICAL_ERROR"


class ConvergenceError(NumericalError):
    code = "NO_CONVERGENCE"


class AsymmetryError(NumericalError):
    code = "ASYMMETRIC"


class ExpmOverflowError(NumericalError):
    code = "EXPM_OVERFLOW"

    def __init__(self, norm: float) -> None:
        self.norm = norm
        super().__init__(f"matrix exponential overflows: ‖a·t‖₁ = {norm:.3e}")


class SingularEquationError(NumericalError):
    code = "SINGULAR_EQUATION"


class StabilityError(NumericalError):
    code = "UNSTABLE"

    def __init__(self, eigenvalue: complex, margin: float) -> None:
        self.eigenvalue = eigenvalue
        self.margin = margin
        super().__init__(
            f"system matrix is not stable: eigenvalue {eigenvalue:.6g} has real part "
            f"{eigenvalue.real:.3e} ≥ {-margin:.3e}"
        )


class NotSPDError(NumericalError):
    code = "NOT_SPD"


class RankError(NumericalError):
    code = "RANK"

    def __init__(self, requested: int, attainable: int) -> None:
        self.requested = requested
        self.attainable = attainable
        super().__init__(f"requested rank {requested} exceeds attainable rank {attainable}")


class DimensionError(SmoothBenchError, ValueError):
    code = "DIMENSION"


class TimeGridError(SmoothBenchError, ValueError):
    code = "BAD_TIMES"
