"""Exception types shared across the toolkit."""

from __future__ import annotations


class ToolkitError(Exception):
    """Base class for all mgdetect errors."""


class ParseError(ToolkitError):
    """Malformed corpus input. Carries the 1-based line number."""

    def __init__(self, line_no: int, message: str) -> None:
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class SplitError(ToolkitError):
    """Split construction failed (size or balance constraints)."""


class VariantError(ToolkitError):
    """An operation received units with an unexpected perturbation variant."""


class TrainingError(ToolkitError):
    """Training could not produce finite parameters."""


class FingerprintError(ToolkitError):
    """Feature config fingerprint mismatch between model and vectors."""


class ModelFormatError(ToolkitError):
    """Model file version or structure not understood."""


class ConfigError(ToolkitError):
    """Invalid pipeline or feature configuration."""


class EvalError(ToolkitError):
    """Evaluation input is unusable (length mismatch, unknown tag, ...)."""
