"""
Exception hierarchy for the toolkit.

Library code raises these; only the command-line front end turns them into
exit codes (0 success, 1 property failure, 2 usage, 3 I/O).
"""

from typing import Optional


class ToolkitError(Exception):
    """Base class for every error raised by the toolkit."""

    exit_code: int = 1


class InvalidArgumentError(ToolkitError, ValueError):
    """An argument is outside its documented domain."""

    exit_code = 2


class ShapeError(ToolkitError, ValueError):
    """Matrix, vector or image shapes do not line up."""

    exit_code = 2


class OutOfRangeError(ToolkitError, IndexError):
    """A window or index falls outside its source."""

    exit_code = 2


class DivergenceError(ToolkitError, ArithmeticError):
    """Probe training produced a non-finite loss."""

    exit_code = 1

    def __init__(self, epoch: int, seed: Optional[int] = None, loss: float = float("nan")):
        self.epoch = epoch
        self.seed = seed
        self.loss = loss
        super().__init__(f"Probe training diverged at epoch {epoch} (seed={seed}, loss={loss})")


class DatasetIOError(ToolkitError, OSError):
    """A file or dataset directory could not be read or written."""

    exit_code = 3

    def __init__(self, path, reason: str = "unreadable"):
        self.path = str(path)
        self.reason = reason
        super().__init__(f"{reason}: {self.path}")
