"""FMCW MIMO signal synthesis and ground-truth imaging.

The IF (beat) signal of every virtual channel is the coherent sum over
point targets of exp(2 pi j (mu t tau + f_c tau)) with the exact two-way
delay tau from the physical TX and RX element positions; no far-field
shortcut is taken. Positions are frozen within one chirp and advance by
velocity * T_c between chirps, which is where Doppler comes from.

Ground truth images are rendered from an enhanced (1 TX x 256 RX) cube by
near-field matched filtering of range-compressed, Doppler-selected data.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import backend, rdproc
from .errors import ConfigError, SceneError, ShapeError
from .geometry import (
    SPEED_OF_LIGHT,
    AngleGrid,
    RadarParams,
    VirtualArray,
    default_angle_grid,
    position_from_range_u,
)


@dataclass(frozen=True)
class PointTarget:
    """Ideal point scatterer with complex amplitude A_k."""

    position: np.ndarray  # (x, y) m
    velocity: np.ndarray = field(default_factory=lambda: np.zeros(2))  # m/s
    amplitude: complex = 1.0 + 0.0j

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float))
        object.__setattr__(self, "velocity", np.asarray(self.velocity, dtype=float))
        if self.position.shape != (2,) or not np.all(np.isfinite(self.position)):
            raise SceneError("target position must be a finite 2-D point")
        if self.velocity.shape != (2,) or not np.all(np.isfinite(self.velocity)):
            raise SceneError("target velocity must be a finite 2-D vector")
        if abs(self.amplitude) == 0.0:
            raise SceneError("target amplitude must be non-zero")

    def to_dict(self) -> dict:
        return {
            "position": self.position.tolist(),
            "velocity": self.velocity.tolist(),
            "amplitude": [self.amplitude.real, self.amplitude.imag],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PointTarget":
        a = d.get("amplitude", [1.0, 0.0])
        return cls(
            position=d["position"],
            velocity=d.get("velocity", (0.0, 0.0)),
            amplitude=complex(a[0], a[1]),
        )


@dataclass(frozen=True)
class Scene:
    targets: tuple
    sensor_velocity: np.ndarray = field(default_factory=lambda: np.zeros(2))

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(self.targets))
        object.__setattr__(
            self, "sensor_velocity", np.asarray(self.sensor_velocity, dtype=float)
        )

    def to_dict(self) -> dict:
        return {
            "targets": [t.to_dict() for t in self.targets],
            "sensor_velocity": self.sensor_velocity.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Scene":
        return cls(
            targets=tuple(PointTarget.from_dict(t) for t in d["targets"]),
            sensor_velocity=np.asarray(d.get("sensor_velocity", (0.0, 0.0))),
        )


@dataclass(frozen=True)
class NoiseSpec:
    """Complex white Gaussian noise level, as SNR against the weakest
    scatterer's per-sample power. None disables noise."""

    snr_db: float | None = None

    def __post_init__(self):
        if self.snr_db is not None and not np.isfinite(self.snr_db):
            raise ConfigError("snr_db must be finite or None")


@dataclass(frozen=True)
class PatternSpec:
    """Element radiation pattern over the steering angle.

    cos_power: gain = max(cos theta, 0) ** q, the default with q = 2.
    table: linear interpolation of (angles_rad, gains), gains in [0, 1].
    """

    kind: str = "cos_power"
    q: float = 2.0
    angles_rad: np.ndarray | None = None
    gains: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in ("cos_power", "table"):
            raise ConfigError(f"unknown pattern kind {self.kind!r}")
        if self.kind == "table":
            a = np.asarray(self.angles_rad, dtype=float)
            g = np.asarray(self.gains, dtype=float)
            if a.ndim != 1 or a.shape != g.shape or a.size < 2:
                raise ConfigError("pattern table needs matching 1-D angle/gain arrays")
            if np.any(np.diff(a) <= 0):
                raise ConfigError("pattern table angles must be increasing")
            if g.min() < 0 or g.max() > 1:
                raise ConfigError("pattern gains must lie in [0, 1]")
            object.__setattr__(self, "angles_rad", a)
            object.__setattr__(self, "gains", g)


ISOTROPIC = PatternSpec(kind="cos_power", q=0.0)
DEFAULT_PATTERN = PatternSpec(kind="cos_power", q=2.0)


def apply_element_pattern(theta, pattern: PatternSpec = DEFAULT_PATTERN):
    """Multiplicative real gain in [0, 1] for steering angle(s) theta [rad]."""
    th = np.asarray(theta, dtype=float)
    if pattern.kind == "cos_power":
        gain = np.power(np.maximum(np.cos(th), 0.0), pattern.q)
    else:
        gain = np.interp(th, pattern.angles_rad, pattern.gains)
    return gain if gain.ndim else float(gain)


@dataclass
class RadarCube:
    """Complex IF samples indexed (virtual channel, chirp, fast-time sample)."""

    data: np.ndarray
    params: RadarParams
    array: VirtualArray

    def __post_init__(self):
        expected = (self.array.n_v, self.params.n_chirp, self.params.n_samples)
        if self.data.shape != expected:
            raise ShapeError(f"cube shape {self.data.shape} != {expected}")
        if not np.all(np.isfinite(self.data)):
            raise ShapeError("cube contains non-finite samples")


@dataclass(frozen=True)
class ImageGrid:
    """Range/angle pixel grid shared by ground truth and network output."""

    range_axis: np.ndarray
    angles: AngleGrid

    @property
    def n_r(self) -> int:
        return self.range_axis.size

    @property
    def n_theta(self) -> int:
        return self.angles.n_theta


def default_image_grid(params: RadarParams, n_theta: int = 450) -> ImageGrid:
    ranges = np.arange(params.n_range_bins) * params.range_bin
    return ImageGrid(range_axis=ranges, angles=default_angle_grid(n_theta))


@dataclass
class GroundTruthImage:
    pixels: np.ndarray  # (n_r, n_theta), >= 0
    range_axis: np.ndarray
    angles: AngleGrid

    def __post_init__(self):
        if self.pixels.shape != (self.range_axis.size, self.angles.n_theta):
            raise ShapeError("ground truth shape does not match its axes")
        if self.pixels.min() < 0:
            raise ShapeError("ground truth pixels must be non-negative")


def _channel_element_coords(array: VirtualArray) -> tuple[np.ndarray, np.ndarray]:
    return (
        array.tx_positions[array.channel_tx],
        array.rx_positions[array.channel_rx],
    )


def _steering_angle(positions: np.ndarray) -> np.ndarray:
    """Steering angle of scene positions; same sign convention as the image u axis."""
    r = np.hypot(positions[:, 0], positions[:, 1])
    return np.arcsin(np.clip(-positions[:, 0] / r, -1.0, 1.0))


def simulate_if_cube(
    params: RadarParams,
    array: VirtualArray,
    scene: Scene,
    noise: NoiseSpec = NoiseSpec(),
    seed: int = 0,
    pattern: PatternSpec = DEFAULT_PATTERN,
) -> RadarCube:
    """Simulate the IF radar cube of a point-target scene.

    Noise, when enabled, is complex white Gaussian with power set so that
    SNR = weakest scatterer's mean per-sample power / noise power. Noise
    streams are split per chirp from the seed, so the result does not depend
    on evaluation order.
    """
    tx_x, rx_x = _channel_element_coords(array)
    n_v, n_chirp, n_s = array.n_v, params.n_chirp, params.n_samples
    t = np.arange(n_s) * (params.t_chirp / n_s)
    mu = params.chirp_rate

    cube = np.zeros((n_v, n_chirp, n_s), dtype=np.complex128)
    n_targets = len(scene.targets)
    gains = np.zeros((n_chirp, n_targets))

    if n_targets:
        pos0 = np.stack([tg.position for tg in scene.targets])
        vel = np.stack([tg.velocity for tg in scene.targets]) - scene.sensor_velocity
        amps = np.array([tg.amplitude for tg in scene.targets], dtype=np.complex128)

        for n in range(n_chirp):
            pos = pos0 + vel * (n * params.t_chirp)
            d_tx = np.hypot(pos[:, 0][None, :] - tx_x[:, None], pos[:, 1][None, :])
            d_rx = np.hypot(pos[:, 0][None, :] - rx_x[:, None], pos[:, 1][None, :])
            if min(d_tx.min(), d_rx.min()) < 1e-6:
                raise SceneError("target coincides with an antenna element")
            tau = (d_tx + d_rx) / SPEED_OF_LIGHT
            # One-sided spectrum keeps n_s/2 bins; beat must stay below that.
            if np.max(tau) * params.bandwidth >= n_s / 2:
                raise SceneError("target beyond the unambiguous range")
            gains[n] = apply_element_pattern(_steering_angle(pos), pattern)
            backend.accumulate_if(cube[:, n, :], tau, amps * gains[n], t, mu, params.f_c)

    if noise.snr_db is not None:
        if n_targets == 0:
            raise SceneError("noise SNR is defined against the weakest target")
        per_target_power = (np.abs(amps)[None, :] * gains) ** 2
        weakest = per_target_power.mean(axis=0).min()
        sigma2 = weakest / 10.0 ** (noise.snr_db / 10.0)
        scale = np.sqrt(sigma2 / 2.0)
        streams = np.random.SeedSequence(seed).spawn(n_chirp)
        for n in range(n_chirp):
            rng = np.random.default_rng(streams[n])
            cube[:, n, :] += scale * (
                rng.standard_normal((n_v, n_s)) + 1j * rng.standard_normal((n_v, n_s))
            )

    return RadarCube(data=cube, params=params, array=array)


@dataclass(frozen=True)
class SceneGenConfig:
    """Synthetic point-scene generator settings.

    Groups of closely spaced targets share one range; consecutive angular
    separations are drawn from ``separation_deg``. Amplitude magnitudes come
    from ``amplitude`` with uniformly random phase. Optional clutter points
    are spread over the whole range/angle field of view.
    """

    n_targets: tuple[int, int] = (1, 3)
    range_m: tuple[float, float] = (5.0, 60.0)
    angle_deg: tuple[float, float] = (-40.0, 40.0)
    separation_deg: tuple[float, float] = (0.5, 2.0)
    amplitude: tuple[float, float] = (0.6, 1.0)
    target_speed: tuple[float, float] = (0.0, 0.0)
    sensor_speed: tuple[float, float] = (0.0, 0.0)
    n_clutter: tuple[int, int] = (0, 0)
    clutter_amplitude: tuple[float, float] = (0.02, 0.1)

    def __post_init__(self):
        for name in (
            "n_targets",
            "range_m",
            "angle_deg",
            "separation_deg",
            "amplitude",
            "target_speed",
            "sensor_speed",
            "n_clutter",
            "clutter_amplitude",
        ):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ConfigError(f"{name}: min {lo} exceeds max {hi}")
        if self.n_targets[0] < 1:
            raise ConfigError("scenes need at least one target")
        if self.range_m[0] <= 0:
            raise ConfigError("ranges must be positive")

    def to_dict(self) -> dict:
        return {k: list(v) for k, v in self.__dict__.items()}

    @classmethod
    def from_dict(cls, d: dict) -> "SceneGenConfig":
        return cls(**{k: tuple(v) for k, v in d.items()})


def _random_velocity(rng, speed_range) -> np.ndarray:
    speed = rng.uniform(*speed_range)
    if speed == 0.0:
        return np.zeros(2)
    phi = rng.uniform(0.0, 2.0 * np.pi)
    return speed * np.array([np.cos(phi), np.sin(phi)])


def generate_point_scene(config: SceneGenConfig, seed: int) -> Scene:
    """Draw a random point-target scene; deterministic for a given seed."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(config.n_targets[0], config.n_targets[1] + 1))
    r = rng.uniform(*config.range_m)

    seps = rng.uniform(*config.separation_deg, size=max(n - 1, 0))
    span = float(seps.sum())
    lo, hi = config.angle_deg
    if span > hi - lo:
        raise ConfigError("separation span exceeds the angular field of view")
    start = rng.uniform(lo, hi - span)
    angles = start + np.concatenate(([0.0], np.cumsum(seps)))

    targets = []
    for theta in angles:
        amp = rng.uniform(*config.amplitude) * np.exp(2j * np.pi * rng.uniform())
        targets.append(
            PointTarget(
                position=position_from_range_u(r, np.sin(np.radians(theta))),
                velocity=_random_velocity(rng, config.target_speed),
                amplitude=amp,
            )
        )

    n_cl = int(rng.integers(config.n_clutter[0], config.n_clutter[1] + 1))
    for _ in range(n_cl):
        rc = rng.uniform(*config.range_m)
        thc = rng.uniform(*config.angle_deg)
        amp = rng.uniform(*config.clutter_amplitude) * np.exp(2j * np.pi * rng.uniform())
        targets.append(
            PointTarget(position=position_from_range_u(rc, np.sin(np.radians(thc))), amplitude=amp)
        )

    return Scene(targets=tuple(targets), sensor_velocity=_random_velocity(rng, config.sensor_speed))


def matched_filter_image(
    params: RadarParams,
    enhanced_array: VirtualArray,
    cube: RadarCube,
    grid: ImageGrid,
    window: rdproc.WindowSpec | None = None,
    zero_pad: int = 4,
    floor_rel: float = 0.0,
) -> GroundTruthImage:
    """Near-field matched-filter (backprojection) image of an enhanced cube.

    Range and Doppler are processed exactly like the input path (2-D FFT,
    mean-magnitude Doppler selection); the selected range-channel matrix is
    then coherently back-projected with the exact two-way phase per pixel.
    ``floor_rel`` zeroes pixels below that fraction of the image maximum,
    which is how residual sidelobes are suppressed in training targets.
    """
    if cube.array.n_v != enhanced_array.n_v or not np.allclose(
        cube.array.positions, enhanced_array.positions
    ):
        raise ShapeError("cube was not simulated with the given enhanced array")
    if grid.range_axis.max() > cube.params.max_range:
        raise ShapeError("image grid extends beyond the unambiguous range")

    rd = rdproc.range_doppler(cube, window=window, zero_pad=zero_pad)
    mean_img = rdproc.mean_magnitude(rd)
    sel = rdproc.select_doppler_bins(mean_img, k=1)
    sif = rdproc.extract_range_channel(rd, sel, rank=1)  # (n_r_padded, n_v)

    tx_x, rx_x = _channel_element_coords(cube.array)
    img = backend.backproject(
        np.ascontiguousarray(sif.s_if.T),
        tx_x,
        rx_x,
        grid.range_axis,
        grid.angles.u_values,
        cube.params.f_c,
        cube.params.bandwidth * zero_pad,  # beat bin index per second of delay
        1.0 / SPEED_OF_LIGHT,
    )
    pixels = np.abs(img)
    if floor_rel > 0.0 and pixels.max() > 0:
        pixels[pixels < floor_rel * pixels.max()] = 0.0
    return GroundTruthImage(pixels=pixels, range_axis=grid.range_axis, angles=grid.angles)


def ground_truth_for_scene(
    scene: Scene,
    params: RadarParams,
    grid: ImageGrid,
    n_rx: int = 256,
    gt_n_chirp: int | None = None,
    floor_rel: float = 0.0,
    seed: int = 0,
    pattern: PatternSpec = DEFAULT_PATTERN,
) -> GroundTruthImage:
    """Simulate the enhanced 1 x n_rx ULA over the scene and image it.

    The ground-truth cube is noise free. ``gt_n_chirp`` trims the chirp count
    (static scenes do not need the full Doppler axis, and 256 channels are
    expensive); Doppler selection still runs identically.
    """
    from .geometry import enhanced_ula

    if not scene.targets:
        raise SceneError("ground truth rendering needs at least one target")
    gt_params = params if gt_n_chirp is None else replace(params, n_chirp=gt_n_chirp)
    array = enhanced_ula(gt_params, n_rx=n_rx)
    cube = simulate_if_cube(gt_params, array, scene, NoiseSpec(None), seed=seed, pattern=pattern)
    return matched_filter_image(gt_params, array, cube, grid, floor_rel=floor_rel)
