"""Detection matching, Pd/Pfa/precision metrics, dataset evaluation sweeps,
and the multi-Doppler pixelwise-maximum fusion."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .doa import das_windowed, find_peaks, music_from_row
from .errors import ShapeError
from .nn.unet import WeightStore, unet_forward


@dataclass(frozen=True)
class MatchConfig:
    """Peak matching parameters of the detection evaluation.

    d_max is the maximum angular-bin distance for a hit; only peaks above
    min_peak_height (after per-bin min-max normalization) count; the
    prominence sweep controls the peak-search sensitivity axis.
    """

    d_max: int = 2
    min_peak_height: float = 0.5
    prominence_sweep: tuple = (0.05, 0.1, 0.2)
    gt_prominence_rel: float = 0.1

    def __post_init__(self):
        if self.d_max < 0:
            raise ShapeError("d_max must be >= 0")
        if not 0.0 <= self.min_peak_height <= 1.0:
            raise ShapeError("min_peak_height must lie in [0, 1]")


def match_detections(est_peaks, gt_peaks, cfg: MatchConfig) -> tuple[int, int, int, int]:
    """Count (TP, FP, FN, TN) for one range bin.

    Every ground-truth peak with an estimate within d_max bins is a TP (one
    estimate may serve several ground-truth peaks); estimates near no ground
    truth are FPs; an empty bin on both sides is one TN.
    """
    est = np.asarray(est_peaks, dtype=np.int64)
    gt = np.asarray(gt_peaks, dtype=np.int64)
    if est.size == 0 and gt.size == 0:
        return 0, 0, 0, 1
    if gt.size == 0:
        return 0, int(est.size), 0, 0
    if est.size == 0:
        return 0, 0, int(gt.size), 0
    dist = np.abs(est[:, None] - gt[None, :])
    tp = int(np.sum(dist.min(axis=0) <= cfg.d_max))
    fn = int(gt.size - tp)
    fp = int(np.sum(dist.min(axis=1) > cfg.d_max))
    return tp, fp, fn, 0


def metrics(counts) -> dict:
    """Pd, Pfa and precision from (TP, FP, FN, TN); undefined ratios are None."""
    tp, fp, fn, tn = (int(c) for c in counts)
    if min(tp, fp, fn, tn) < 0:
        raise ShapeError("counts must be non-negative")
    return {
        "pd": tp / (tp + fn) if tp + fn else None,
        "pfa": fp / (tn + fp) if tn + fp else None,
        "precision": tp / (tp + fp) if tp + fp else None,
    }


def normalize_row(row: np.ndarray) -> np.ndarray:
    """Min-max normalization to [0, 1]; constant rows map to zeros."""
    lo = row.min()
    hi = row.max()
    if hi == lo:
        return np.zeros_like(row, dtype=float)
    return (row - lo) / (hi - lo)


def ground_truth_peaks(gt_pixels: np.ndarray, cfg: MatchConfig) -> list[np.ndarray]:
    """Discrete detections per range bin of a ground-truth image: prominence
    peaks at gt_prominence_rel of the row maximum."""
    out = []
    for row in gt_pixels:
        peak_max = row.max()
        if peak_max <= 0:
            out.append(np.empty(0, dtype=np.int64))
            continue
        ps = find_peaks(row, min_prominence=cfg.gt_prominence_rel * peak_max)
        out.append(ps.indices)
    return out


@dataclass
class MetricsReport:
    """Aggregated counts and ratios per (algorithm, prominence)."""

    d_max: int
    rows: list = field(default_factory=list)
    failures: list = field(default_factory=list)

    def row(self, algorithm: str, prominence: float) -> dict:
        for r in self.rows:
            if r["algorithm"] == algorithm and r["prominence"] == prominence:
                return r
        raise KeyError((algorithm, prominence))

    def to_csv(self, path) -> None:
        cols = ["algorithm", "prominence", "d_max", "tp", "fp", "fn", "tn", "pd", "pfa", "precision"]
        with open(path, "w") as f:
            f.write(",".join(cols) + "\n")
            for r in self.rows:
                f.write(
                    ",".join("" if r[c] is None else f"{r[c]}" for c in cols) + "\n"
                )


def evaluate_dataset(estimators: dict, records, cfg: MatchConfig) -> MetricsReport:
    """Run every estimator over feature/ground-truth record pairs.

    Per image and range bin: the estimator spectrum row is min-max
    normalized, searched for peaks at each prominence in the sweep (height
    threshold applied), and matched against the ground-truth detections.
    Bins with ground truth contribute TP/FN; every bin contributes FP/TN.
    Estimator failures skip the affected image and are surfaced in the
    report's failures list.
    """
    report = MetricsReport(d_max=cfg.d_max)
    counts = {(a, p): np.zeros(4, dtype=np.int64) for a in estimators for p in cfg.prominence_sweep}

    for i_rec, rec in enumerate(records):
        gt_peaks = ground_truth_peaks(rec["gt"].pixels, cfg)
        for alg, estimator in estimators.items():
            try:
                spectrum = np.asarray(estimator(rec), dtype=float)
            except Exception as exc:  # estimator failure: skip, surface
                report.failures.append(f"record {i_rec}, {alg}: {exc}")
                continue
            if spectrum.shape != rec["gt"].pixels.shape:
                report.failures.append(
                    f"record {i_rec}, {alg}: spectrum shape {spectrum.shape} != ground truth"
                )
                continue
            for r in range(spectrum.shape[0]):
                row = normalize_row(spectrum[r])
                for prom in cfg.prominence_sweep:
                    ps = find_peaks(row, min_prominence=prom, min_height=cfg.min_peak_height)
                    counts[(alg, prom)] += match_detections(ps.indices, gt_peaks[r], cfg)

    for (alg, prom), c in counts.items():
        m = metrics(c)
        report.rows.append(
            {
                "algorithm": alg,
                "prominence": prom,
                "d_max": cfg.d_max,
                "tp": int(c[0]),
                "fp": int(c[1]),
                "fn": int(c[2]),
                "tn": int(c[3]),
                **m,
            }
        )
    return report


def fuse_doppler_images(images) -> np.ndarray:
    """Pixelwise maximum over per-Doppler-rank images (1 to 3 of them)."""
    imgs = [np.asarray(im) for im in images]
    if not 1 <= len(imgs) <= 3:
        raise ShapeError("fusion expects between 1 and 3 images")
    shape = imgs[0].shape
    if any(im.shape != shape for im in imgs):
        raise ShapeError("fusion images must share one shape")
    return np.maximum.reduce(imgs)


# -- estimator adapters ---------------------------------------------------------


def make_dnn_estimator(weights: WeightStore):
    """Network inference clipped at zero: regression targets live in the
    nonnegative image domain, so negative excursions are noise."""

    def run(rec):
        return np.maximum(unet_forward(weights.config, weights, rec["features"].planes), 0.0)

    return run


def make_das_estimator(wavelength: float, window: str = "hann"):
    def run(rec):
        sif = rec["sif"]
        grid = rec["features"].angles
        out = np.empty((sif.s_if.shape[0], grid.n_theta))
        for r in range(sif.s_if.shape[0]):
            out[r] = das_windowed(sif.s_if[r], sif.positions, grid, wavelength, window)
        return out

    return run


def make_music_estimator(wavelength: float, subarray_length: int | None = None, k: int | None = None):
    def run(rec):
        sif = rec["sif"]
        grid = rec["features"].angles
        out = np.empty((sif.s_if.shape[0], grid.n_theta))
        for r in range(sif.s_if.shape[0]):
            out[r], _ = music_from_row(
                sif.s_if[r], sif.positions, grid, wavelength, subarray_length, k
            )
        return out

    return run


def make_reference_cnn_estimator(model):
    """Adapter for a covariance-input CNN estimator: ``model`` maps the
    (3, n_v, n_v) tensor of one range bin to an angular spectrum."""
    from .features import reference_cnn_input

    def run(rec):
        sif = rec["sif"]
        rows = [np.asarray(model(reference_cnn_input(sif.s_if[r]))) for r in range(sif.s_if.shape[0])]
        return np.stack(rows)

    return run


def load_eval_records(manifest_path) -> list[dict]:
    """Load an evaluation manifest: {"records": [{"features", "gt", "sif"}]}"""
    from . import io as sio

    base = Path(manifest_path).parent
    manifest = json.loads(Path(manifest_path).read_text())
    records = []
    for rec in manifest["records"]:
        loaded = {
            "features": sio.read_feature_image(base / rec["features"]),
            "gt": sio.read_ground_truth(base / rec["gt"]),
        }
        if "sif" in rec:
            loaded["sif"] = sio.read_sif(base / rec["sif"])
        records.append(loaded)
    return records
