"""From-scratch attention U-Net: layers with analytic gradients, losses,
deterministic training, and finite-difference verification."""

from .losses import LossConfig, loss_bce, loss_mse_l1, preprocess_target
from .unet import NetworkConfig, UNet, WeightStore, unet_forward
from .training import OptimizerSpec, train
from .gradcheck import grad_check

__all__ = [
    "LossConfig",
    "loss_bce",
    "loss_mse_l1",
    "preprocess_target",
    "NetworkConfig",
    "UNet",
    "WeightStore",
    "unet_forward",
    "OptimizerSpec",
    "train",
    "grad_check",
]
