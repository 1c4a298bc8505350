"""Deterministic training loop over feature/ground-truth image pairs.

The dataset manifest is a JSON document with either a flat record list or
two named datasets mixed by a ratio:

    {"records": [{"features": ..., "gt": ...}, ...], "val_records": [...]}
    {"datasets": {"point": [...], "ray": [...]}, "mix_ratio": 0.7, ...}

Records reference feature-image and ground-truth files (see sparseradar.io).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import ConfigError, TrainingDiverged
from .losses import LossConfig, loss_with_grad, preprocess_target
from .unet import NetworkConfig, UNet, WeightStore


@dataclass(frozen=True)
class OptimizerSpec:
    """SGD with momentum (default) or adaptive moments."""

    kind: str = "sgd"
    lr: float = 1e-2
    momentum: float = 0.9
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        if self.kind not in ("sgd", "adam"):
            raise ConfigError(f"unknown optimizer {self.kind!r}")
        if self.lr <= 0:
            raise ConfigError("learning rate must be positive")


class _Optimizer:
    def __init__(self, spec: OptimizerSpec, params: dict):
        self.spec = spec
        self.state = {k: np.zeros_like(v) for k, v in params.items()}
        if spec.kind == "adam":
            self.state2 = {k: np.zeros_like(v) for k, v in params.items()}
            self.t = 0

    def step(self, params: dict, grads: dict) -> None:
        s = self.spec
        if s.kind == "sgd":
            for k, p in params.items():
                v = self.state[k]
                v *= s.momentum
                v -= s.lr * grads[k]
                p += v
        else:
            self.t += 1
            b1c = 1.0 - s.beta1**self.t
            b2c = 1.0 - s.beta2**self.t
            for k, p in params.items():
                m = self.state[k]
                v = self.state2[k]
                m *= s.beta1
                m += (1.0 - s.beta1) * grads[k]
                v *= s.beta2
                v += (1.0 - s.beta2) * grads[k] ** 2
                p -= s.lr * (m / b1c) / (np.sqrt(v / b2c) + s.eps)


def load_manifest(path) -> dict:
    manifest = json.loads(Path(path).read_text())
    if "records" not in manifest and "datasets" not in manifest:
        raise ConfigError("manifest needs 'records' or 'datasets'")
    return manifest


def _mixed_records(manifest: dict, rng) -> list:
    if "records" in manifest:
        return list(manifest["records"])
    datasets = manifest["datasets"]
    if len(datasets) != 2:
        raise ConfigError("dataset mixing expects exactly two datasets")
    (name_a, recs_a), (name_b, recs_b) = sorted(datasets.items())
    ratio = float(manifest.get("mix_ratio", 0.5))
    if not 0.0 <= ratio <= 1.0:
        raise ConfigError("mix_ratio must lie in [0, 1]")
    total = len(recs_a) + len(recs_b)
    n_a = min(len(recs_a), int(round(ratio * total)))
    n_b = min(len(recs_b), total - n_a)
    picks_a = rng.permutation(len(recs_a))[:n_a]
    picks_b = rng.permutation(len(recs_b))[:n_b]
    return [recs_a[i] for i in picks_a] + [recs_b[i] for i in picks_b]


def _load_pairs(records, loss_cfg: LossConfig, base: Path):
    from ..io import read_ground_truth, read_feature_image

    xs, ys = [], []
    for rec in records:
        feat = read_feature_image(base / rec["features"])
        gt = read_ground_truth(base / rec["gt"])
        xs.append(feat.planes.astype(np.float32))
        ys.append(preprocess_target(gt.pixels, loss_cfg)[None].astype(np.float32))
    return np.stack(xs), np.stack(ys)


def train(
    manifest_path,
    config: NetworkConfig,
    loss_cfg: LossConfig,
    opt: OptimizerSpec,
    seed: int = 0,
    epochs: int = 50,
    batch_size: int = 4,
    initial_weights: WeightStore | None = None,
) -> tuple[WeightStore, dict]:
    """Train the U-Net on the manifest's records; deterministic given seed.

    Returns the final weights and a history dict with per-epoch mean train
    loss and validation loss (NaN when the manifest has no val records).
    ``initial_weights`` warm-starts from an earlier run instead of the seeded
    initialization.
    """
    if epochs < 1 or batch_size < 1:
        raise ConfigError("epochs and batch_size must be >= 1")
    manifest = load_manifest(manifest_path)
    base = Path(manifest_path).parent
    rng = np.random.default_rng(seed)
    records = _mixed_records(manifest, rng)
    if not records:
        raise ConfigError("manifest has no training records")

    if config.final_activation == "none" and loss_cfg.mode == "classification":
        config = NetworkConfig(**{**config.to_dict(), "final_activation": "sigmoid"})

    x_all, y_all = _load_pairs(records, loss_cfg, base)
    val = manifest.get("val_records") or []
    x_val, y_val = _load_pairs(val, loss_cfg, base) if val else (None, None)

    net = UNet(config, seed=seed, dtype=np.float32)
    if initial_weights is not None:
        net.load_weights(initial_weights)
    optimizer = _Optimizer(opt, net.parameters())
    history = {"train": [], "val": []}

    n = x_all.shape[0]
    for epoch in range(epochs):
        order = np.random.default_rng((seed, epoch)).permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, batch_size):
            batch = order[start : start + batch_size]
            net.zero_grads()
            out = net.forward(x_all[batch])
            value, dly = loss_with_grad(out, y_all[batch], loss_cfg)
            if not np.isfinite(value):
                raise TrainingDiverged(
                    f"loss became {value} at epoch {epoch}, batch {start // batch_size}"
                )
            net.backward(dly.astype(np.float32))
            optimizer.step(net.parameters(), net.gradients())
            epoch_loss += value * batch.size
        history["train"].append(epoch_loss / n)

        if x_val is not None:
            v, _ = loss_with_grad(net.forward(x_val), y_val, loss_cfg)
            history["val"].append(float(v))
        else:
            history["val"].append(float("nan"))

    return net.weight_store(), history
