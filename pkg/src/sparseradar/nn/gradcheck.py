"""Central finite-difference verification of the analytic gradients."""

from __future__ import annotations

import re

import numpy as np

from .losses import LossConfig, loss_with_grad, preprocess_target
from .unet import NetworkConfig, UNet

# Parameter-name patterns that define a "layer type" for sampling purposes.
LAYER_TYPE_PATTERNS = {
    "encoder_conv": re.compile(r"^(enc|mid)"),
    "decoder_conv": re.compile(r"^dec\d+\.(conv|up)"),
    "attention_gate": re.compile(r"\.gate\."),
    "head": re.compile(r"^head"),
}


def _layer_type(name: str) -> str:
    for tname, pat in LAYER_TYPE_PATTERNS.items():
        if pat.search(name):
            return tname
    return "other"


def grad_check(
    config: NetworkConfig | None = None,
    loss: LossConfig | None = None,
    seed: int = 0,
    entries_per_type: int = 200,
    step: float = 1e-6,
) -> float:
    """Worst relative error between analytic and central-difference parameter
    gradients, sampled over >= ``entries_per_type`` entries per layer type.

    Runs the full network at double precision on a random input/target pair.
    """
    config = config or NetworkConfig(depth=2, base_channels=4, height=16, width=16)
    loss = loss or LossConfig(mode="regression")
    if config.final_activation == "none" and loss.mode == "classification":
        config = NetworkConfig(**{**config.to_dict(), "final_activation": "sigmoid"})

    rng = np.random.default_rng(seed)
    net = UNet(config, seed=seed, dtype=np.float64)
    x = rng.standard_normal((1, config.in_channels, config.height, config.width))
    y_raw = rng.uniform(0.0, 1.0, (config.height, config.width))
    y_raw[y_raw < 0.7] = 0.0  # sparse positives, like real targets
    y = preprocess_target(y_raw, loss)[None, None]

    def loss_value() -> float:
        return loss_with_grad(net.forward(x), y, loss)[0]

    net.zero_grads()
    out = net.forward(x)
    _, dly = loss_with_grad(out, y, loss)
    net.backward(dly)
    analytic = {k: v.copy() for k, v in net.gradients().items()}

    params = net.parameters()
    by_type: dict[int, list] = {}
    for name in params:
        by_type.setdefault(_layer_type(name), []).append(name)

    state0 = net.activation_state()

    def same_state(state) -> bool:
        return all(np.array_equal(a, b) for a, b in zip(state0, state))

    worst = 0.0
    for tname, names in by_type.items():
        sizes = np.array([params[n].size for n in names])
        total = int(sizes.sum())
        n_samples = min(entries_per_type, total)
        # Oversample: entries whose perturbation flips a ReLU/pool pattern
        # straddle a kink, where the derivative (and hence the finite
        # difference) is undefined; those are skipped.
        picks = rng.permutation(total)[: 4 * n_samples]
        bounds = np.cumsum(sizes)
        checked = 0
        for pick in picks:
            if checked >= n_samples:
                break
            t_idx = int(np.searchsorted(bounds, pick, side="right"))
            flat_idx = int(pick - (bounds[t_idx - 1] if t_idx else 0))
            tensor = params[names[t_idx]]
            idx = np.unravel_index(flat_idx, tensor.shape)
            orig = tensor[idx]
            h = step * max(1.0, abs(orig))
            tensor[idx] = orig + h
            up = loss_value()
            smooth = same_state(net.activation_state())
            tensor[idx] = orig - h
            down = loss_value()
            smooth = smooth and same_state(net.activation_state())
            tensor[idx] = orig
            if not smooth:
                continue
            checked += 1
            fd = (up - down) / (2.0 * h)
            a = analytic[names[t_idx]][idx]
            # Denominator floor: central differences of an O(1) loss resolve
            # gradients down to roughly 1e-8; entries below the floor carry
            # FD noise, not gradient signal.
            err = abs(a - fd) / max(abs(a), abs(fd), 1e-4)
            worst = max(worst, err)
        if checked < min(n_samples, total):
            worst = max(worst, float("nan"))  # could not sample enough smooth points
    return worst
