from typing import Optional

# ==================== EXIT CODES ====================

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_VALIDATION = 2
EXIT_BACKEND_FAILURE = 3
EXIT_STEP_TOO_LARGE = 4

# ==================== EXCEPTIONS ====================

class PanowarpError(Exception):
    """Base class for all panowarp errors."""
    exit_code: int = EXIT_FAILURE


class InputValidationError(PanowarpError):
    """Bad input files, mismatched dimensions or invalid option values."""
    exit_code = EXIT_VALIDATION


class ContractViolationError(PanowarpError):
    """A geometric pre-condition was violated (e.g. pixel outside the raster)."""
    exit_code = EXIT_VALIDATION


class DegenerateInputError(PanowarpError):
    """Input carries no usable information (zero vector, no known pixels)."""
    exit_code = EXIT_VALIDATION


class InvalidDepthError(PanowarpError):
    """Depth was required to be strictly positive."""
    exit_code = EXIT_VALIDATION


class BackendFailureError(PanowarpError):
    """An inpainting backend failed; carries whatever diagnostics were captured."""
    exit_code = EXIT_BACKEND_FAILURE

    def __init__(self, message: str, diagnostics: str = ""):
        super().__init__(message)
        self.diagnostics = diagnostics


class StepTooLargeError(PanowarpError):
    """A warp step opened more holes than the configured guard allows."""
    exit_code = EXIT_STEP_TOO_LARGE

    def __init__(self, hole_ratio: float, max_hole_ratio: float, step_length: Optional[float] = None):
        self.hole_ratio = hole_ratio
        self.max_hole_ratio = max_hole_ratio
        self.step_length = step_length
        hint = "reduce step_length"
        if step_length is not None:
            hint = f"reduce step_length below {step_length:g} m"
        super().__init__(
            f"hole ratio {hole_ratio * 100:.1f}% exceeds the {max_hole_ratio * 100:.1f}% limit; {hint}"
        )


class PnviStepError(PanowarpError):
    """A PNVI step failed; `step_index` is 0-based within the plan."""

    def __init__(self, step_index: int, cause: Exception):
        self.step_index = step_index
        self.cause = cause
        self.exit_code = getattr(cause, "exit_code", EXIT_FAILURE)
        super().__init__(f"step {step_index} failed: {cause}")


class PipelineStageError(PanowarpError):
    """A pipeline stage failed after possibly writing partial artifacts."""

    def __init__(
        self,
        stage: str,
        cause: Exception,
        step_index: Optional[int] = None,
        manifest_path: Optional[str] = None
    ):
        self.stage = stage
        self.cause = cause
        self.step_index = step_index
        self.manifest_path = manifest_path
        self.exit_code = getattr(cause, "exit_code", EXIT_FAILURE)
        where = f"stage '{stage}'"
        if step_index is not None:
            where += f", step {step_index}"
        super().__init__(f"{where} failed: {cause}")


def exit_code_for(e: BaseException) -> int:
    """Map any exception to a CLI exit code."""
    from pydantic import ValidationError

    if isinstance(e, ValidationError):
        return EXIT_VALIDATION
    return getattr(e, "exit_code", EXIT_FAILURE)
