"""File formats.

Binary numeric payloads are little-endian 32-bit floats (complex data
interleaved re/im) with a JSON sidecar at <file>.json carrying shapes,
axes and provenance. Everything round-trips through the functions here.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import ShapeError
from .features import FeatureImage, PLANE_NAMES
from .geometry import AngleGrid, RadarParams, VirtualArray, build_virtual_array
from .nn.unet import NetworkConfig, WeightStore
from .rdproc import RangeChannelMatrix
from .synthesis import GroundTruthImage, RadarCube, Scene


def _sidecar(path) -> Path:
    return Path(str(path) + ".json")


def _write_json(path, payload: dict) -> None:
    _sidecar(path).write_text(json.dumps(payload, indent=2))


def _read_json(path) -> dict:
    return json.loads(_sidecar(path).read_text())


# -- radar cubes -------------------------------------------------------------


def write_cube(cube: RadarCube, path) -> None:
    """Channel-major interleaved float32 complex samples + JSON sidecar."""
    np.ascontiguousarray(cube.data.astype(np.complex64)).tofile(path)
    _write_json(
        path,
        {
            "kind": "radar_cube",
            "n_v": cube.array.n_v,
            "n_chirp": cube.params.n_chirp,
            "n_samples": cube.params.n_samples,
            "params": cube.params.to_dict(),
            "array": cube.array.to_dict(),
        },
    )


def read_cube(path) -> RadarCube:
    meta = _read_json(path)
    shape = (meta["n_v"], meta["n_chirp"], meta["n_samples"])
    data = np.fromfile(path, dtype="<c8").reshape(shape).astype(np.complex128)
    params = RadarParams.from_dict(meta["params"])
    a = meta["array"]
    array = build_virtual_array(a["tx_positions_m"], a["rx_positions_m"], a.get("kept_rx"))
    return RadarCube(data=data, params=params, array=array)


# -- range-channel matrices (cube format with n_chirp = 1) -------------------


def write_sif(sif: RangeChannelMatrix, path) -> None:
    data = np.ascontiguousarray(sif.s_if.T.astype(np.complex64))  # (n_v, n_r)
    data.tofile(path)
    _write_json(
        path,
        {
            "kind": "range_channel",
            "n_v": data.shape[0],
            "n_chirp": 1,
            "n_samples": data.shape[1],
            "positions_m": sif.positions.tolist(),
            "doppler_rank": int(sif.doppler_rank[0]) if sif.doppler_rank.size else 1,
        },
    )


def read_sif(path) -> RangeChannelMatrix:
    meta = _read_json(path)
    data = np.fromfile(path, dtype="<c8").reshape(meta["n_v"], meta["n_samples"])
    rank = meta.get("doppler_rank", 1)
    return RangeChannelMatrix(
        s_if=data.T.astype(np.complex128),
        doppler_rank=np.full(meta["n_samples"], rank, dtype=np.int64),
        positions=np.asarray(meta["positions_m"]),
    )


# -- images ------------------------------------------------------------------


def write_feature_image(img: FeatureImage, path) -> None:
    np.ascontiguousarray(img.planes.astype(np.float32)).tofile(path)
    _write_json(
        path,
        {
            "kind": "feature_image",
            "n_feat": img.planes.shape[0],
            "n_r": img.planes.shape[1],
            "n_theta": img.planes.shape[2],
            "plane_names": list(PLANE_NAMES),
            "log_epsilon": img.log_epsilon,
            "range_axis_m": img.range_axis.tolist(),
            "u_values": img.angles.u_values.tolist(),
        },
    )


def read_feature_image(path) -> FeatureImage:
    meta = _read_json(path)
    planes = np.fromfile(path, dtype="<f4").reshape(
        meta["n_feat"], meta["n_r"], meta["n_theta"]
    )
    return FeatureImage(
        planes=planes.astype(np.float64),
        range_axis=np.asarray(meta["range_axis_m"]),
        angles=AngleGrid(np.asarray(meta["u_values"])),
        log_epsilon=meta["log_epsilon"],
    )


def write_ground_truth(img: GroundTruthImage, path) -> None:
    np.ascontiguousarray(img.pixels.astype(np.float32)).tofile(path)
    _write_json(
        path,
        {
            "kind": "ground_truth",
            "n_r": img.pixels.shape[0],
            "n_theta": img.pixels.shape[1],
            "range_axis_m": img.range_axis.tolist(),
            "u_values": img.angles.u_values.tolist(),
        },
    )


def read_ground_truth(path) -> GroundTruthImage:
    meta = _read_json(path)
    pixels = np.fromfile(path, dtype="<f4").reshape(meta["n_r"], meta["n_theta"])
    return GroundTruthImage(
        pixels=pixels.astype(np.float64),
        range_axis=np.asarray(meta["range_axis_m"]),
        angles=AngleGrid(np.asarray(meta["u_values"])),
    )


def write_plane_image(pixels: np.ndarray, path, **extra) -> None:
    """Raw float32 image without domain axes (network outputs, fusions)."""
    np.ascontiguousarray(pixels.astype(np.float32)).tofile(path)
    _write_json(path, {"kind": "plane", "shape": list(pixels.shape), **extra})


def read_plane_image(path) -> np.ndarray:
    meta = _read_json(path)
    return np.fromfile(path, dtype="<f4").reshape(meta["shape"]).astype(np.float64)


# -- scenes ------------------------------------------------------------------


def write_scene(scene: Scene, path) -> None:
    Path(path).write_text(json.dumps(scene.to_dict(), indent=2))


def read_scene(path) -> Scene:
    return Scene.from_dict(json.loads(Path(path).read_text()))


# -- network weights ----------------------------------------------------------


def write_weights(store: WeightStore, path) -> None:
    """Flat float32 tensor file + manifest of {name, shape, offset}."""
    entries = []
    offset = 0
    with open(path, "wb") as f:
        for name in sorted(store.tensors):
            t = np.ascontiguousarray(store.tensors[name].astype(np.float32))
            f.write(t.tobytes())
            entries.append({"name": name, "shape": list(t.shape), "offset": offset})
            offset += t.nbytes
    _write_json(
        path,
        {
            "kind": "weights",
            "seed": store.seed,
            "config": store.config.to_dict(),
            "tensors": entries,
        },
    )


def read_weights(path) -> WeightStore:
    meta = _read_json(path)
    raw = Path(path).read_bytes()
    tensors = {}
    for entry in meta["tensors"]:
        size = int(np.prod(entry["shape"])) * 4
        buf = raw[entry["offset"] : entry["offset"] + size]
        tensors[entry["name"]] = np.frombuffer(buf, dtype="<f4").reshape(entry["shape"]).copy()
    return WeightStore(
        tensors=tensors,
        seed=meta["seed"],
        config=NetworkConfig.from_dict(meta["config"]),
    )


# -- plots and reports ---------------------------------------------------------


def write_pgm(pixels: np.ndarray, path, db_floor: float = -40.0) -> None:
    """8-bit log-magnitude portable graymap for eyeballing."""
    img = np.abs(np.asarray(pixels, dtype=float))
    peak = img.max()
    if peak == 0:
        level = np.zeros_like(img, dtype=np.uint8)
    else:
        db = 20.0 * np.log10(np.maximum(img / peak, 10 ** (db_floor / 20.0)))
        level = np.round((db - db_floor) * (255.0 / -db_floor)).astype(np.uint8)
    with open(path, "wb") as f:
        f.write(f"P5\n{img.shape[1]} {img.shape[0]}\n255\n".encode())
        f.write(level.tobytes())


def write_spectrum_csv(path, u_values: np.ndarray, spectrum: np.ndarray) -> None:
    if len(u_values) != len(spectrum):
        raise ShapeError("u axis and spectrum lengths differ")
    with open(path, "w") as f:
        f.write("u,value\n")
        for u, v in zip(u_values, spectrum):
            f.write(f"{u:.9g},{v:.9g}\n")


def write_loss_csv(path, history: dict) -> None:
    with open(path, "w") as f:
        f.write("epoch,train_loss,val_loss\n")
        for i, (tr, va) in enumerate(zip(history["train"], history["val"])):
            f.write(f"{i},{tr:.9g},{va:.9g}\n")
