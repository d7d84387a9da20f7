import json
import sys
from pathlib import Path
from typing import Any, Dict, List, Sequence, Tuple
from pydantic import ValidationError

from .errors import BackendFailureError, InputValidationError, PanowarpError, PipelineStageError, PnviStepError, StepTooLargeError
from .models import ResponseFormat

# ==================== LOGGING ====================

def log(message: str, quiet: bool = False) -> None:
    """Progress line on stderr; silenced by --quiet."""
    from . import instances
    if quiet or (instances.settings is not None and instances.settings.quiet):
        return
    print(message, file=sys.stderr, flush=True)

# ==================== ERROR HANDLING ====================

def handle_error(e: Exception) -> str:
    """Consistent, actionable error messages."""
    if isinstance(e, ValidationError):
        first = e.errors()[0]
        where = ".".join(str(p) for p in first.get("loc", ())) or "input"
        return f"Error: Invalid value for '{where}': {first.get('msg', 'validation failed')}"
    if isinstance(e, PipelineStageError):
        msg = f"Error: Pipeline {e} "
        if e.manifest_path:
            msg += f"(partial artifacts listed in {e.manifest_path})"
        return msg.rstrip() + _hint(e.cause)
    if isinstance(e, PnviStepError):
        return f"Error: PNVI {e}" + _hint(e.cause)
    if isinstance(e, StepTooLargeError):
        return f"Error: Step too large: {e}"
    if isinstance(e, BackendFailureError):
        msg = f"Error: Inpainting backend failed: {e}"
        if e.diagnostics:
            msg += f"\n{e.diagnostics}"
        return msg
    if isinstance(e, PanowarpError):
        return f"Error: {e}"
    if isinstance(e, OSError):
        return f"Error: File system error - {e}"
    return f"Error: Unexpected error - {type(e).__name__}: {str(e)}"


def _hint(cause: Exception) -> str:
    if isinstance(cause, StepTooLargeError):
        return " Use a smaller step length (e.g. --step 0.02)."
    if isinstance(cause, BackendFailureError) and cause.diagnostics:
        return f"\n{cause.diagnostics}"
    return ""

# ==================== RESPONSE FORMATTING ====================

class ResponseFormatter:
    """Shared formatting logic for consistent outputs."""

    @staticmethod
    def render(title: str, data: Dict[str, Any], fmt: ResponseFormat) -> str:
        """JSON dump, or a markdown heading with one bullet per key."""
        if fmt == ResponseFormat.JSON:
            return json.dumps(data, indent=2, default=str)
        lines = [f"# {title}", ""]
        for key, value in data.items():
            if isinstance(value, float):
                value = f"{value:.6g}"
            elif isinstance(value, (list, dict)):
                value = json.dumps(value, default=str)
            lines.append(f"- **{key}**: {value}")
        return "\n".join(lines)

    @staticmethod
    def format_percent(ratio: float) -> str:
        return f"{ratio * 100:.1f}"

    @staticmethod
    def format_sweep_table(rows: Sequence[Tuple[float, float]], axis: str) -> str:
        """Two-row table: poses along one axis, then hole percentages."""
        header = f"| Pose_{axis.upper()} (m) | " + " | ".join(f"{d:g}" for d, _ in rows) + " |"
        rule = "|" + "---|" * (len(rows) + 1)
        values = "| Mask (%) | " + " | ".join(ResponseFormatter.format_percent(r) for _, r in rows) + " |"
        return "\n".join([header, rule, values])

    @staticmethod
    def format_plan(branches: List[Dict[str, Any]]) -> str:
        """Markdown table of a pipeline dry run."""
        lines = ["| # | Target (m) | Distance (m) | Steps |", "|---|---|---|---|"]
        for i, b in enumerate(branches):
            lines.append(f"| {i} | {b['target']} | {b['distance']:.4f} | {b['steps']} |")
        return "\n".join(lines)

# ==================== OUTPUT DIRECTORIES ====================

def prepare_out_dir(path, overwrite: bool = False) -> Path:
    """Create `path`; refuse a non-empty existing directory unless overwrite is set."""
    out = Path(path)
    if out.exists() and not out.is_dir():
        raise InputValidationError(f"output path '{out}' exists and is not a directory")
    if out.is_dir() and any(out.iterdir()) and not overwrite:
        raise InputValidationError(f"output directory '{out}' is not empty; pass --overwrite to reuse it")
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise InputValidationError(f"cannot create output directory '{out}': {e}") from e
    return out
