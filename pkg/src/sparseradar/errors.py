"""Shared exception types."""


class ConfigError(ValueError):
    """Invalid or inconsistent configuration values."""


class SceneError(ValueError):
    """Scene violates a simulator precondition (range, geometry, targets)."""


class ShapeError(ValueError):
    """Array shapes inconsistent with the operation's contract."""


class TrainingDiverged(RuntimeError):
    """Training loss became non-finite."""
