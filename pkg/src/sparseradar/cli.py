"""Command-line pipeline driver.

Subcommands: simulate | psf | features | gt | train | infer | das | music |
evaluate | fuse. A JSON or TOML config file provides defaults per section,
flags override, and every run writes a resolved-config snapshot next to its
outputs. Exit codes: 0 ok, 2 configuration error, 3 runtime/numeric error.
"""

import os

if "SPARSERADAR_THREADS" in os.environ:  # must precede the first numpy import
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(_var, os.environ["SPARSERADAR_THREADS"])

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import doa, evaluation, features, io as sio, rdproc, synthesis
from .errors import ConfigError, SceneError, ShapeError, TrainingDiverged
from .geometry import (
    ARRAY_BUILDERS,
    DomainError,
    GeometryError,
    RadarParams,
    array_by_name,
    default_angle_grid,
    position_from_range_u,
    range_u_of_position,
)
from .nn import LossConfig, NetworkConfig, OptimizerSpec, train, unet_forward
from .synthesis import (
    NoiseSpec,
    PointTarget,
    Scene,
    SceneGenConfig,
    default_image_grid,
)


def load_config(path) -> dict:
    if path is None:
        return {}
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file {p} does not exist")
    if p.suffix == ".toml":
        import tomllib

        return tomllib.loads(p.read_text())
    return json.loads(p.read_text())


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _snapshot(out: Path, command: str, resolved: dict) -> None:
    (out / f"{command}_config.json").write_text(json.dumps(resolved, indent=2, default=str))


def _radar_params(cfg: dict) -> RadarParams:
    return RadarParams(**{**RadarParams().to_dict(), **cfg.get("radar", {})})


def _angle_grid(cfg: dict):
    return default_angle_grid(int(cfg.get("n_theta", 450)))


# -- simulate ------------------------------------------------------------------


def cmd_simulate(args, cfg: dict) -> int:
    out = _outdir(args)
    params = _radar_params(cfg)
    section = dict(cfg.get("simulate", {}))
    n = args.n if args.n is not None else int(section.get("n", 1))
    array_name = args.array or section.get("array", "full")
    if array_name not in ARRAY_BUILDERS:
        raise ConfigError(f"unknown array {array_name!r}")
    snr_db = section.get("snr_db", 20.0)
    gt_n_chirp = int(section.get("gt_n_chirp", 16))
    gt_floor = float(section.get("gt_floor_rel", 0.25))
    gt_n_rx = int(section.get("gt_n_rx", 256))
    scene_cfg = SceneGenConfig.from_dict(section["scenes"]) if "scenes" in section else SceneGenConfig()

    array = array_by_name(array_name, params)
    grid = default_image_grid(params, _angle_grid(cfg).n_theta)
    entries = []
    for i in range(n):
        seed = args.seed + i
        scene = synthesis.generate_point_scene(scene_cfg, seed=seed)
        cube = synthesis.simulate_if_cube(
            params, array, scene, NoiseSpec(snr_db), seed=seed
        )
        gt = synthesis.ground_truth_for_scene(
            scene, params, grid, n_rx=gt_n_rx, gt_n_chirp=gt_n_chirp, floor_rel=gt_floor
        )
        stem = f"{i:04d}"
        sio.write_scene(scene, out / f"scene_{stem}.json")
        sio.write_cube(cube, out / f"cube_{stem}.rcube")
        sio.write_ground_truth(gt, out / f"gt_{stem}.gti")
        entries.append(
            {
                "scene": f"scene_{stem}.json",
                "cube": f"cube_{stem}.rcube",
                "gt": f"gt_{stem}.gti",
                "seed": seed,
                "n_v": array.n_v,
            }
        )
    manifest = {
        "entries": entries,
        "array": array_name,
        "params": params.to_dict(),
        "n_theta": grid.n_theta,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2))
    _snapshot(
        out,
        "simulate",
        {
            "n": n,
            "seed": args.seed,
            "array": array_name,
            "snr_db": snr_db,
            "gt_n_chirp": gt_n_chirp,
            "gt_floor_rel": gt_floor,
            "gt_n_rx": gt_n_rx,
            "scenes": scene_cfg.to_dict(),
            "radar": params.to_dict(),
        },
    )
    print(f"wrote {n} scene(s) to {out}")
    return 0


# -- features ------------------------------------------------------------------


def _crop_window(gt_pixels, crop_h, crop_w, rng):
    """Crop origin centered on the ground-truth mass, clipped to bounds."""
    n_r, n_t = gt_pixels.shape
    if gt_pixels.max() > 0:
        r_peak, c_peak = np.unravel_index(np.argmax(gt_pixels), gt_pixels.shape)
    else:
        r_peak, c_peak = n_r // 2, n_t // 2
    r0 = int(np.clip(r_peak - crop_h // 2 + rng.integers(-4, 5), 0, n_r - crop_h))
    c0 = int(np.clip(c_peak - crop_w // 2 + rng.integers(-4, 5), 0, n_t - crop_w))
    return r0, c0


def cmd_features(args, cfg: dict) -> int:
    out = _outdir(args)
    section = dict(cfg.get("features", {}))
    rank = args.rank if args.rank is not None else int(section.get("rank", 1))
    k = max(rank, int(section.get("k", rank)))
    window = rdproc.WindowSpec()
    crop = args.crop

    if args.cube:
        jobs = [{"cube": args.cube, "gt": None, "stem": Path(args.cube).stem}]
        base = Path(".")
    elif args.manifest:
        base = Path(args.manifest).parent
        manifest = json.loads(Path(args.manifest).read_text())
        jobs = [
            {"cube": base / e["cube"], "gt": base / e["gt"] if e.get("gt") else None,
             "stem": f"{i:04d}"}
            for i, e in enumerate(manifest["entries"])
        ]
    else:
        raise ConfigError("features needs --cube or --manifest")

    grid = _angle_grid(cfg)
    records = []
    rng = np.random.default_rng(args.seed)
    for job in jobs:
        cube = sio.read_cube(job["cube"])
        img, sif = features.features_from_cube(cube, grid, rank=rank, k=k, window=window)
        gt = sio.read_ground_truth(job["gt"]) if job["gt"] else None
        stem = job["stem"]
        if crop:
            ch, cw = crop
            if gt is None:
                raise ConfigError("cropping requires ground truth images")
            r0, c0 = _crop_window(gt.pixels, ch, cw, rng)
            img = features.FeatureImage(
                planes=img.planes[:, r0 : r0 + ch, c0 : c0 + cw],
                range_axis=img.range_axis[r0 : r0 + ch],
                angles=type(grid)(grid.u_values[c0 : c0 + cw]),
                log_epsilon=img.log_epsilon,
            )
            gt = synthesis.GroundTruthImage(
                pixels=gt.pixels[r0 : r0 + ch, c0 : c0 + cw],
                range_axis=gt.range_axis[r0 : r0 + ch],
                angles=type(grid)(grid.u_values[c0 : c0 + cw]),
            )
            sif = rdproc.RangeChannelMatrix(
                s_if=sif.s_if[r0 : r0 + ch],
                doppler_rank=sif.doppler_rank[r0 : r0 + ch],
                positions=sif.positions,
            )
        sio.write_feature_image(img, out / f"feat_{stem}.feat")
        sio.write_sif(sif, out / f"sif_{stem}.sif")
        record = {"features": f"feat_{stem}.feat", "sif": f"sif_{stem}.sif"}
        if gt is not None:
            sio.write_ground_truth(gt, out / f"gtc_{stem}.gti")
            record["gt"] = f"gtc_{stem}.gti"
        records.append(record)
    (out / "records.json").write_text(json.dumps({"records": records}, indent=2))
    _snapshot(out, "features", {"rank": rank, "k": k, "crop": crop, "seed": args.seed})
    print(f"wrote {len(records)} feature record(s) to {out}")
    return 0


# -- ground truth ----------------------------------------------------------------


def cmd_gt(args, cfg: dict) -> int:
    out = _outdir(args)
    params = _radar_params(cfg)
    section = dict(cfg.get("gt", {}))
    scene = sio.read_scene(args.scene)
    grid = default_image_grid(params, _angle_grid(cfg).n_theta)
    gt = synthesis.ground_truth_for_scene(
        scene,
        params,
        grid,
        n_rx=int(section.get("n_rx", 256)),
        gt_n_chirp=int(section.get("n_chirp", 16)),
        floor_rel=float(section.get("floor_rel", 0.25)),
        seed=args.seed,
    )
    sio.write_ground_truth(gt, out / "gt.gti")
    sio.write_pgm(gt.pixels, out / "gt.pgm")
    _snapshot(out, "gt", {"scene": str(args.scene), "seed": args.seed, **section})
    print(f"wrote ground truth to {out}")
    return 0


# -- psf -------------------------------------------------------------------------


def measure_psf(u_values: np.ndarray, cut: np.ndarray) -> dict:
    """3-dB width (degrees) and peak sidelobe level of an angular cut."""
    peak_idx = int(np.argmax(cut))
    peak = cut[peak_idx]
    half = peak / np.sqrt(2.0)
    i = peak_idx
    while i > 0 and cut[i] > half:
        i -= 1
    left = np.interp(half, [cut[i], cut[i + 1]], [u_values[i], u_values[i + 1]])
    j = peak_idx
    while j < cut.size - 1 and cut[j] > half:
        j += 1
    right = np.interp(half, [cut[j], cut[j - 1]], [u_values[j], u_values[j - 1]])
    width_deg = float(np.degrees(np.arcsin(np.clip(right, -1, 1)) - np.arcsin(np.clip(left, -1, 1))))

    ps = doa.find_peaks(cut)
    side = [h for idx, h in zip(ps.indices, ps.heights) if not left <= u_values[idx] <= right]
    psl_db = float(20.0 * np.log10(max(side) / peak)) if side else -np.inf
    return {
        "peak_u": float(u_values[peak_idx]),
        "width_deg": width_deg,
        "psl_db": psl_db,
    }


def cmd_psf(args, cfg: dict) -> int:
    out = _outdir(args)
    params = _radar_params(cfg)
    section = dict(cfg.get("psf", {}))
    array_name = args.array or section.get("array", "full")
    estimators = (args.estimators or section.get("estimators", "das,matched")).split(",")
    if args.scene:
        scene = sio.read_scene(args.scene)
        if len(scene.targets) != 1:
            raise ConfigError("psf needs a single-target scene")
    else:
        r = float(section.get("range_m", 5.7))
        u = float(section.get("u", 0.0))
        scene = Scene(targets=(PointTarget(position=position_from_range_u(r, u)),))
    target_r, target_u = range_u_of_position(scene.targets[0].position)

    grid = _angle_grid(cfg)
    sim_params = replace(params, n_chirp=int(section.get("n_chirp", 8)))
    report = {}
    for est in estimators:
        est = est.strip()
        if est == "das":
            array = array_by_name(array_name, params)
            cube = synthesis.simulate_if_cube(sim_params, array, scene, NoiseSpec(None), seed=args.seed)
            img, _ = features.features_from_cube(cube, grid)
            mag = 10.0 ** img.planes[0]  # invert the log plane
            rbin = int(np.argmin(np.abs(img.range_axis - target_r)))
            cut = mag[rbin]
        elif est == "matched":
            igrid = default_image_grid(sim_params, grid.n_theta)
            gt = synthesis.ground_truth_for_scene(
                scene, sim_params, igrid, gt_n_chirp=sim_params.n_chirp, seed=args.seed
            )
            rbin = int(np.argmin(np.abs(igrid.range_axis - target_r)))
            cut = gt.pixels[rbin]
        elif est == "music":
            array = array_by_name(array_name, params)
            cube = synthesis.simulate_if_cube(sim_params, array, scene, NoiseSpec(None), seed=args.seed)
            _, sif = features.features_from_cube(cube, grid)
            rd_axis = np.arange(sim_params.n_range_bins) * sim_params.range_bin
            rbin = int(np.argmin(np.abs(rd_axis - target_r)))
            cut, _ = doa.music_from_row(sif.s_if[rbin], sif.positions, grid, params.wavelength, k=1)
        else:
            raise ConfigError(f"unknown psf estimator {est!r}")
        sio.write_spectrum_csv(out / f"psf_{est}.csv", grid.u_values, cut)
        report[est] = measure_psf(grid.u_values, cut)

    (out / "psf_report.json").write_text(json.dumps(report, indent=2))
    _snapshot(
        out,
        "psf",
        {
            "array": array_name,
            "estimators": estimators,
            "target_range_m": target_r,
            "target_u": target_u,
            "seed": args.seed,
        },
    )
    for est, values in report.items():
        print(f"{est}: width {values['width_deg']:.3f} deg, PSL {values['psl_db']:.1f} dB")
    return 0


# -- train -----------------------------------------------------------------------


def cmd_train(args, cfg: dict) -> int:
    out = _outdir(args)
    section = dict(cfg.get("train", {}))
    loss_cfg = LossConfig(
        mode=section.get("mode", "regression"),
        alpha=float(section.get("alpha", 0.0)),
        beta=float(section.get("beta", 10.0)),
    )
    manifest = json.loads(Path(args.manifest).read_text())
    first = sio.read_feature_image(Path(args.manifest).parent / manifest["records"][0]["features"])
    net_cfg = NetworkConfig(
        depth=int(section.get("depth", 3)),
        base_channels=int(section.get("base_channels", 8)),
        in_channels=first.planes.shape[0],
        height=first.planes.shape[1],
        width=first.planes.shape[2],
        use_attention=bool(section.get("use_attention", True)),
        final_activation="sigmoid" if loss_cfg.mode == "classification" else "none",
    )
    opt = OptimizerSpec(
        kind=section.get("optimizer", "adam"),
        lr=float(section.get("lr", 1e-3)),
        momentum=float(section.get("momentum", 0.9)),
    )
    epochs = args.epochs if args.epochs is not None else int(section.get("epochs", 100))
    batch = int(section.get("batch_size", 4))
    weights, history = train(args.manifest, net_cfg, loss_cfg, opt, seed=args.seed, epochs=epochs, batch_size=batch)
    sio.write_weights(weights, out / "weights.wts")
    sio.write_loss_csv(out / "loss.csv", history)
    _snapshot(
        out,
        "train",
        {
            "manifest": str(args.manifest),
            "seed": args.seed,
            "epochs": epochs,
            "batch_size": batch,
            "net": net_cfg.to_dict(),
            "loss": {"mode": loss_cfg.mode, "alpha": loss_cfg.alpha, "beta": loss_cfg.beta},
            "optimizer": opt.kind,
            "lr": opt.lr,
        },
    )
    print(f"final train loss {history['train'][-1]:.6g} after {epochs} epochs")
    return 0


# -- infer -----------------------------------------------------------------------


def cmd_infer(args, cfg: dict) -> int:
    out = _outdir(args)
    if not Path(args.weights).exists():
        raise ConfigError(f"weights file {args.weights} does not exist")
    weights = sio.read_weights(args.weights)
    net_cfg = weights.config
    cube = sio.read_cube(args.cube)
    grid = _angle_grid(cfg)
    k = args.k

    images = []
    for rank in range(1, k + 1):
        img, _ = features.features_from_cube(cube, grid, rank=rank, k=k)
        planes = img.planes
        if planes.shape[1:] != (net_cfg.height, net_cfg.width):
            if args.crop is None:
                raise ConfigError(
                    f"feature image {planes.shape[1:]} does not match the network "
                    f"({net_cfg.height}, {net_cfg.width}); pass --crop R0 C0"
                )
            r0, c0 = args.crop
            planes = planes[:, r0 : r0 + net_cfg.height, c0 : c0 + net_cfg.width]
            if planes.shape[1:] != (net_cfg.height, net_cfg.width):
                raise ConfigError("crop window falls outside the feature image")
        result = unet_forward(net_cfg, weights, planes)
        images.append(result)
        sio.write_plane_image(result, out / f"infer_rank{rank}.plane", rank=rank)
        sio.write_pgm(np.maximum(result, 0.0), out / f"infer_rank{rank}.pgm")

    fused = evaluation.fuse_doppler_images(images)
    sio.write_plane_image(fused, out / "infer_fused.plane", ranks=k)
    sio.write_pgm(np.maximum(fused, 0.0), out / "infer_fused.pgm")
    _snapshot(out, "infer", {"weights": str(args.weights), "cube": str(args.cube), "k": k, "seed": args.seed})
    print(f"wrote {k} rank image(s) and fusion to {out}")
    return 0


# -- das / music -------------------------------------------------------------------


def _sif_for_spectrum(args, cfg):
    grid = _angle_grid(cfg)
    if args.sif:
        sif = sio.read_sif(args.sif)
        wavelength = RadarParams(**{**RadarParams().to_dict(), **cfg.get("radar", {})}).wavelength
    elif args.cube:
        cube = sio.read_cube(args.cube)
        _, sif = features.features_from_cube(cube, grid)
        wavelength = cube.params.wavelength
    else:
        raise ConfigError("need --sif or --cube")
    return sif, grid, wavelength


def cmd_das(args, cfg: dict) -> int:
    out = _outdir(args)
    sif, grid, wavelength = _sif_for_spectrum(args, cfg)
    window = args.window or "hann"
    if args.bin is None:
        energy = np.abs(sif.s_if).sum(axis=1)
        rbin = int(np.argmax(energy))
    else:
        rbin = args.bin
    spectrum = doa.das_windowed(sif.s_if[rbin], sif.positions, grid, wavelength, window)
    sio.write_spectrum_csv(out / "das.csv", grid.u_values, spectrum)
    full = np.stack(
        [doa.das_windowed(sif.s_if[r], sif.positions, grid, wavelength, window) for r in range(sif.s_if.shape[0])]
    )
    sio.write_plane_image(full, out / "das.plane", window=window)
    sio.write_pgm(full, out / "das.pgm")
    _snapshot(out, "das", {"bin": rbin, "window": window, "seed": args.seed})
    print(f"wrote DaS spectrum (range bin {rbin}) to {out}")
    return 0


def cmd_music(args, cfg: dict) -> int:
    out = _outdir(args)
    sif, grid, wavelength = _sif_for_spectrum(args, cfg)
    if args.bin is None:
        energy = np.abs(sif.s_if).sum(axis=1)
        rbin = int(np.argmax(energy))
    else:
        rbin = args.bin
    spectrum, k = doa.music_from_row(
        sif.s_if[rbin], sif.positions, grid, wavelength, k=args.order
    )
    sio.write_spectrum_csv(out / "music.csv", grid.u_values, spectrum)
    _snapshot(out, "music", {"bin": rbin, "order": k, "seed": args.seed})
    print(f"wrote MUSIC spectrum (range bin {rbin}, order {k}) to {out}")
    return 0


# -- evaluate ----------------------------------------------------------------------


def cmd_evaluate(args, cfg: dict) -> int:
    out = _outdir(args)
    section = dict(cfg.get("evaluate", {}))
    d_max_values = args.d_max or section.get("d_max", [2, 4])
    prominences = tuple(section.get("prominences", (0.05, 0.1, 0.2)))
    min_height = float(section.get("min_peak_height", 0.5))
    names = (args.estimators or section.get("estimators", "das")).split(",")

    records = evaluation.load_eval_records(args.manifest)
    wavelength = RadarParams(**{**RadarParams().to_dict(), **cfg.get("radar", {})}).wavelength
    estimators = {}
    for name in names:
        name = name.strip()
        if name == "dnn":
            if not args.weights:
                raise ConfigError("the dnn estimator needs --weights")
            estimators["dnn"] = evaluation.make_dnn_estimator(sio.read_weights(args.weights))
        elif name == "das":
            estimators["das"] = evaluation.make_das_estimator(wavelength)
        elif name == "music":
            estimators["music"] = evaluation.make_music_estimator(wavelength)
        else:
            raise ConfigError(f"unknown estimator {name!r}")

    all_rows = []
    failures = []
    for d_max in d_max_values:
        mcfg = evaluation.MatchConfig(
            d_max=int(d_max), min_peak_height=min_height, prominence_sweep=prominences
        )
        report = evaluation.evaluate_dataset(estimators, records, mcfg)
        all_rows.extend(report.rows)
        failures.extend(report.failures)

    combined = evaluation.MetricsReport(d_max=-1, rows=all_rows, failures=failures)
    combined.to_csv(out / "metrics.csv")
    if failures:
        (out / "failures.txt").write_text("\n".join(failures))
        print(f"{len(failures)} estimator failure(s); see failures.txt", file=sys.stderr)
    _snapshot(
        out,
        "evaluate",
        {
            "manifest": str(args.manifest),
            "estimators": names,
            "d_max": list(d_max_values),
            "prominences": list(prominences),
            "min_peak_height": min_height,
            "seed": args.seed,
        },
    )
    print(f"wrote metrics for {len(records)} image(s) to {out}")
    return 0


# -- fuse --------------------------------------------------------------------------


def cmd_fuse(args, cfg: dict) -> int:
    out = _outdir(args)
    images = [sio.read_plane_image(p) for p in args.inputs]
    fused = evaluation.fuse_doppler_images(images)
    sio.write_plane_image(fused, out / "fused.plane", n_inputs=len(images))
    sio.write_pgm(np.maximum(fused, 0.0), out / "fused.pgm")
    _snapshot(out, "fuse", {"inputs": [str(p) for p in args.inputs], "seed": args.seed})
    print(f"fused {len(images)} image(s) into {out / 'fused.plane'}")
    return 0


# -- parser ------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sparseradar", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", default=None, help="JSON or TOML config file")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("simulate", help="generate scenes, cubes and ground truth")
    common(p)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--array", choices=sorted(ARRAY_BUILDERS), default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("psf", help="point-spread-function study")
    common(p)
    p.add_argument("--array", choices=sorted(ARRAY_BUILDERS), default=None)
    p.add_argument("--estimators", default=None, help="comma list: das,matched,music")
    p.add_argument("--scene", default=None, help="single-target scene JSON")
    p.set_defaults(func=cmd_psf)

    p = sub.add_parser("features", help="radar cubes to DNN input features")
    common(p)
    p.add_argument("--cube", default=None)
    p.add_argument("--manifest", default=None, help="simulate manifest")
    p.add_argument("--rank", type=int, default=None)
    p.add_argument("--crop", type=int, nargs=2, default=None, metavar=("H", "W"))
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("gt", help="render the enhanced-array ground truth for a scene")
    common(p)
    p.add_argument("--scene", required=True)
    p.set_defaults(func=cmd_gt)

    p = sub.add_parser("train", help="train the attention U-Net")
    common(p)
    p.add_argument("--manifest", required=True)
    p.add_argument("--epochs", type=int, default=None)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("infer", help="run the network per Doppler rank and fuse")
    common(p)
    p.add_argument("--weights", required=True)
    p.add_argument("--cube", required=True)
    p.add_argument("--k", type=int, default=1, help="number of Doppler ranks")
    p.add_argument("--crop", type=int, nargs=2, default=None, metavar=("R0", "C0"))
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("das", help="delay-and-sum spectrum export")
    common(p)
    p.add_argument("--cube", default=None)
    p.add_argument("--sif", default=None)
    p.add_argument("--bin", type=int, default=None)
    p.add_argument("--window", default=None)
    p.set_defaults(func=cmd_das)

    p = sub.add_parser("music", help="MUSIC spectrum export")
    common(p)
    p.add_argument("--cube", default=None)
    p.add_argument("--sif", default=None)
    p.add_argument("--bin", type=int, default=None)
    p.add_argument("--order", type=int, default=None)
    p.set_defaults(func=cmd_music)

    p = sub.add_parser("evaluate", help="detection metrics over a dataset")
    common(p)
    p.add_argument("--manifest", required=True, help="feature records manifest")
    p.add_argument("--estimators", default=None, help="comma list: dnn,das,music")
    p.add_argument("--weights", default=None)
    p.add_argument("--d-max", type=int, nargs="+", default=None)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("fuse", help="pixelwise-maximum image fusion")
    common(p)
    p.add_argument("--inputs", nargs="+", required=True)
    p.set_defaults(func=cmd_fuse)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
        return args.func(args, cfg)
    except (ConfigError, GeometryError, DomainError, FileNotFoundError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (SceneError, ShapeError, TrainingDiverged, FloatingPointError, OSError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
