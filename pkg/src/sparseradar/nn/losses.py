"""Loss functions for the two problem formulations (detection vs regression)
and the matching ground-truth preprocessing."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, ShapeError

BCE_CLAMP = 1e-7

# Counts predictions that had to be clamped into (0, 1); diagnostic only.
bce_clamp_count = 0


@dataclass(frozen=True)
class LossConfig:
    """mode 'classification' pairs sigmoid output with BCE on binarized
    targets; 'regression' pairs a linear output with MSE + alpha L1 on
    beta-scaled targets."""

    mode: str = "regression"
    alpha: float = 0.0
    beta: float = 10.0

    def __post_init__(self):
        if self.mode not in ("classification", "regression"):
            raise ConfigError(f"unknown loss mode {self.mode!r}")
        if self.alpha < 0:
            raise ConfigError("alpha must be >= 0")
        if self.beta <= 0:
            raise ConfigError("beta must be > 0")


def _bce_with_grad(x_est: np.ndarray, y_true: np.ndarray) -> tuple[float, np.ndarray]:
    global bce_clamp_count
    if x_est.shape != y_true.shape:
        raise ShapeError("prediction and target shapes differ")
    clamped = np.clip(x_est, BCE_CLAMP, 1.0 - BCE_CLAMP)
    n_out = int(np.sum(clamped != x_est))
    if n_out:
        bce_clamp_count += n_out
    n = x_est.size
    loss = float(np.mean(-y_true * np.log(clamped) - (1.0 - y_true) * np.log1p(-clamped)))
    grad = (-y_true / clamped + (1.0 - y_true) / (1.0 - clamped)) / n
    grad = np.where(clamped == x_est, grad, 0.0).astype(x_est.dtype)
    return loss, grad


def _mse_l1_with_grad(x_est: np.ndarray, y_true: np.ndarray, alpha: float) -> tuple[float, np.ndarray]:
    if x_est.shape != y_true.shape:
        raise ShapeError("prediction and target shapes differ")
    n = x_est.size
    diff = x_est - y_true
    loss = float(np.mean(diff**2) + alpha * np.mean(np.abs(x_est)))
    grad = (2.0 * diff / n + alpha * np.sign(x_est) / n).astype(x_est.dtype)
    return loss, grad


def loss_bce(x_est: np.ndarray, y_true_binary: np.ndarray) -> float:
    """Elementwise binary cross-entropy mean; inputs outside (0, 1) are
    clamped at 1e-7 (counted in bce_clamp_count)."""
    return _bce_with_grad(np.asarray(x_est), np.asarray(y_true_binary))[0]


def loss_mse_l1(x_est: np.ndarray, y_true: np.ndarray, alpha: float = 0.0) -> float:
    """Mean squared error plus alpha times the mean |X_est| (per-pixel means
    keep alpha independent of the image size)."""
    return _mse_l1_with_grad(np.asarray(x_est), np.asarray(y_true), alpha)[0]


def loss_with_grad(x_est: np.ndarray, y_true: np.ndarray, cfg: LossConfig) -> tuple[float, np.ndarray]:
    if cfg.mode == "classification":
        return _bce_with_grad(x_est, y_true)
    return _mse_l1_with_grad(x_est, y_true, cfg.alpha)


def preprocess_target(y_raw: np.ndarray, cfg: LossConfig) -> np.ndarray:
    """Ground-truth image to training target.

    Classification: indicator of strictly positive pixels (the sidelobe
    floor has already zeroed what should not count). Regression: the image
    peak-normalized per sample, then scaled by beta.
    """
    y = np.asarray(y_raw, dtype=float)
    if y.min() < 0:
        raise ShapeError("ground truth pixels must be non-negative")
    if cfg.mode == "classification":
        return (y > 0).astype(float)
    peak = y.max()
    if peak == 0:
        return np.zeros_like(y)
    return cfg.beta * (y / peak)
