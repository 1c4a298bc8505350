"""Attention U-Net with explicit forward/backward wiring.

Encoder levels run conv-conv-pool; the decoder mirrors them with nearest
upsampling + conv, an additive attention gate on the skip, concat and two
convs; a 1x1 projection forms the output. Classification mode appends a
per-pixel sigmoid, regression mode leaves the output linear.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError, ShapeError
from .layers import AttentionGate, Conv2d, MaxPool2x2, ReLU, Sigmoid, UpsampleNearest2x


@dataclass(frozen=True)
class NetworkConfig:
    depth: int = 3
    base_channels: int = 8
    in_channels: int = 5
    height: int = 64
    width: int = 64
    use_attention: bool = True
    final_activation: str = "none"  # "none" (regression) | "sigmoid" (classification)

    def __post_init__(self):
        if self.depth < 1:
            raise ConfigError("depth must be >= 1")
        stride = 2**self.depth
        if self.height % stride or self.width % stride:
            raise ConfigError(f"input dims must be divisible by {stride}")
        if self.final_activation not in ("none", "sigmoid"):
            raise ConfigError("final_activation must be 'none' or 'sigmoid'")

    def to_dict(self) -> dict:
        return dict(self.__dict__)

    @classmethod
    def from_dict(cls, d: dict) -> "NetworkConfig":
        return cls(**d)


@dataclass
class WeightStore:
    """Named parameter tensors plus what is needed to rebuild the net."""

    tensors: dict
    seed: int
    config: NetworkConfig

    def __post_init__(self):
        for name, t in self.tensors.items():
            if not np.all(np.isfinite(t)):
                raise ShapeError(f"non-finite values in parameter {name}")


class _ConvBlock:
    """conv-relu-conv-relu."""

    def __init__(self, c_in, c_out, rng, name, dtype):
        self.conv1 = Conv2d(c_in, c_out, 3, rng, f"{name}.conv1", dtype)
        self.conv2 = Conv2d(c_out, c_out, 3, rng, f"{name}.conv2", dtype)
        self.relu1 = ReLU()
        self.relu2 = ReLU()

    def forward(self, x):
        return self.relu2.forward(self.conv2.forward(self.relu1.forward(self.conv1.forward(x))))

    def backward(self, dy):
        return self.conv1.backward(self.relu1.backward(self.conv2.backward(self.relu2.backward(dy))))

    def layers(self):
        return [self.conv1, self.conv2]


class UNet:
    def __init__(self, config: NetworkConfig, seed: int = 0, dtype=np.float32):
        self.config = config
        self.seed = seed
        self.dtype = dtype
        rng = np.random.default_rng(seed)
        ch = [config.base_channels * 2**level for level in range(config.depth + 1)]

        self.enc = []
        c_prev = config.in_channels
        for level in range(config.depth):
            self.enc.append(_ConvBlock(c_prev, ch[level], rng, f"enc{level}", dtype))
            c_prev = ch[level]
        self.pools = [MaxPool2x2() for _ in range(config.depth)]
        self.mid = _ConvBlock(ch[config.depth - 1], ch[config.depth], rng, "mid", dtype)

        self.ups = []
        self.up_convs = []
        self.up_relus = []
        self.gates = []
        self.dec = []
        for level in reversed(range(config.depth)):
            self.ups.append(UpsampleNearest2x())
            self.up_convs.append(Conv2d(ch[level + 1], ch[level], 3, rng, f"dec{level}.up", dtype))
            self.up_relus.append(ReLU())
            if config.use_attention:
                c_int = max(ch[level] // 2, 1)
                self.gates.append(AttentionGate(ch[level], ch[level], c_int, rng, f"dec{level}.gate", dtype))
            else:
                self.gates.append(None)
            self.dec.append(_ConvBlock(2 * ch[level], ch[level], rng, f"dec{level}", dtype))

        self.head = Conv2d(ch[0], 1, 1, rng, "head", dtype)
        self.head_act = Sigmoid() if config.final_activation == "sigmoid" else None

    # -- parameter plumbing ------------------------------------------------

    def _param_layers(self):
        layers = []
        for blk in self.enc:
            layers += blk.layers()
        layers += self.mid.layers()
        for i in range(self.config.depth):
            layers.append(self.up_convs[i])
            if self.gates[i] is not None:
                layers.append(self.gates[i])
            layers += self.dec[i].layers()
        layers.append(self.head)
        return layers

    def parameters(self) -> dict:
        out = {}
        for layer in self._param_layers():
            out.update(layer.params())
        return out

    def gradients(self) -> dict:
        out = {}
        for layer in self._param_layers():
            out.update(layer.grads())
        return out

    def zero_grads(self) -> None:
        for g in self.gradients().values():
            g[...] = 0.0

    def weight_store(self) -> WeightStore:
        return WeightStore(
            tensors={k: v.copy() for k, v in self.parameters().items()},
            seed=self.seed,
            config=self.config,
        )

    def load_weights(self, store: WeightStore | dict) -> None:
        tensors = store.tensors if isinstance(store, WeightStore) else store
        params = self.parameters()
        if set(tensors) != set(params):
            missing = set(params) ^ set(tensors)
            raise ShapeError(f"weight names do not match the network: {sorted(missing)[:4]}")
        for name, value in tensors.items():
            if params[name].shape != value.shape:
                raise ShapeError(f"shape mismatch for {name}")
            params[name][...] = value.astype(self.dtype)

    # -- forward / backward -------------------------------------------------

    def _check(self, name: str, x: np.ndarray) -> np.ndarray:
        if not np.all(np.isfinite(x)):
            raise FloatingPointError(f"non-finite activation after {name}")
        return x

    def activation_state(self) -> list:
        """Discrete activation pattern of the last forward (ReLU masks and
        pooling argmaxes). Two forwards with equal state lie on the same
        smooth piece of the network, which finite differences require."""
        state = []
        for blk in self.enc + [self.mid] + self.dec:
            state.append(blk.relu1._mask.copy())
            state.append(blk.relu2._mask.copy())
        for pool in self.pools:
            state.append(pool._arg.copy())
        for relu in self.up_relus:
            state.append(relu._mask.copy())
        for gate in self.gates:
            if gate is not None:
                state.append(gate.relu._mask.copy())
        return state

    def forward(self, x: np.ndarray) -> np.ndarray:
        cfg = self.config
        if x.ndim != 4 or x.shape[1:] != (cfg.in_channels, cfg.height, cfg.width):
            raise ShapeError(
                f"input {x.shape} does not match config "
                f"(N, {cfg.in_channels}, {cfg.height}, {cfg.width})"
            )
        x = x.astype(self.dtype, copy=False)
        skips = []
        for level in range(cfg.depth):
            x = self._check(f"enc{level}", self.enc[level].forward(x))
            skips.append(x)
            x = self.pools[level].forward(x)
        x = self._check("mid", self.mid.forward(x))
        for i, level in enumerate(reversed(range(cfg.depth))):
            up = self.up_relus[i].forward(self.up_convs[i].forward(self.ups[i].forward(x)))
            skip = skips[level]
            if self.gates[i] is not None:
                skip = self.gates[i].forward(up, skip)
            x = self._check(f"dec{level}", self.dec[i].forward(np.concatenate([up, skip], axis=1)))
        x = self.head.forward(x)
        if self.head_act is not None:
            x = self.head_act.forward(x)
        return self._check("head", x)

    def backward(self, dy: np.ndarray) -> np.ndarray:
        cfg = self.config
        if self.head_act is not None:
            dy = self.head_act.backward(dy)
        dx = self.head.backward(dy)
        dskips = [None] * cfg.depth
        for i, level in zip(reversed(range(cfg.depth)), range(cfg.depth)):
            d = self.dec[i].backward(dx)
            c = self.up_convs[i].c_out
            dup, dskip = d[:, :c], d[:, c:]
            if self.gates[i] is not None:
                dg, dskip = self.gates[i].backward(dskip)
                dup = dup + dg
            dskips[level] = dskip
            dx = self.ups[i].backward(self.up_convs[i].backward(self.up_relus[i].backward(dup)))
        dx = self.mid.backward(dx)
        for level in reversed(range(cfg.depth)):
            dx = self.pools[level].backward(dx)
            dx = dx + dskips[level]
            dx = self.enc[level].backward(dx)
        return dx


def unet_forward(config: NetworkConfig, weights: WeightStore | dict, feature_input) -> np.ndarray:
    """Single-image inference: (5, n_r, n_theta) planes in, (n_r, n_theta) out."""
    planes = getattr(feature_input, "planes", feature_input)
    planes = np.asarray(planes)
    if planes.ndim != 3:
        raise ShapeError("expected a (channels, height, width) input")
    net = UNet(config, seed=getattr(weights, "seed", 0))
    net.load_weights(weights)
    out = net.forward(planes[None])
    return out[0, 0]
