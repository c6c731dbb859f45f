"""End-to-end orchestration: image I/O, the job grid, and the optimize loop.

Jobs are independent; a bounded thread pool runs them concurrently sharing
only the immutable weights (the hot kernels release the GIL). Per-job
outputs depend only on the job config, the seed, and the weights, never on
grid co-membership or execution order.
"""

import csv
import json
import logging
import math
import time
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from . import ops
from .adam import adam_init, adam_step
from .errors import ConfigurationError, NumericFailure
from .losses import LossReport, LossWeights, gram, total_loss
from .rotation import RotationConfig, build_loss_targets
from .vgg import LayerSelection, VggWeights, extract_features, backward_to_image, \
    postprocess, preprocess, POOLING_MODES

log = logging.getLogger(__name__)

CURVE_EVERY = 10
INIT_MODES = ("content", "noise")


def _snap16(value: int) -> int:
    return (value // 16) * 16


def load_and_resize(path, target_w: int = 412, target_h: int = 522) -> np.ndarray:
    """Decode a PNG/JPEG and bilinearly resize it for the network.

    Requested dims are snapped down to the nearest multiples of 16 (the
    trunk pools four times); any adjustment is logged.
    """
    if target_w < 1 or target_h < 1:
        raise ConfigurationError(f"target size must be positive, got {target_w}x{target_h}")
    eff_w, eff_h = _snap16(target_w), _snap16(target_h)
    if eff_w < 16 or eff_h < 16:
        raise ConfigurationError(
            f"target {target_w}x{target_h} is below the 16x16 minimum"
        )
    if (eff_w, eff_h) != (target_w, target_h):
        log.warning(
            "resize target %dx%d adjusted to %dx%d (dims must be multiples of 16)",
            target_w, target_h, eff_w, eff_h,
        )
    with Image.open(path) as img:
        rgb = img.convert("RGB")
    arr = np.asarray(rgb, dtype=np.uint8)
    if arr.shape[:2] == (eff_h, eff_w):
        return arr
    t = np.ascontiguousarray(arr.astype(np.float32).transpose(2, 0, 1))[None]
    r = ops.resize_bilinear_spatial(t, eff_h, eff_w)
    return np.clip(np.rint(r[0].transpose(1, 2, 0)), 0, 255).astype(np.uint8)


@dataclass(frozen=True, eq=False)
class StylizationJob:
    """Everything one optimization run needs."""

    content: np.ndarray
    style: np.ndarray
    rotation: RotationConfig = RotationConfig()
    loss_weights: LossWeights = LossWeights()
    selection: LayerSelection = LayerSelection()
    iterations: int = 3000
    seed: int = 0
    init_mode: str = "content"
    lr: float = 0.002
    pooling: str = "max"

    def __post_init__(self):
        if self.iterations < 1:
            raise ConfigurationError(f"iterations must be >= 1, got {self.iterations}")
        if self.init_mode not in INIT_MODES:
            raise ConfigurationError(
                f"init_mode must be one of {INIT_MODES}, got {self.init_mode!r}"
            )
        if self.pooling not in POOLING_MODES:
            raise ConfigurationError(
                f"pooling must be one of {POOLING_MODES}, got {self.pooling!r}"
            )

    def config_echo(self) -> dict:
        return {
            "angle": self.rotation.angle,
            "lambda": self.rotation.lam,
            "apply_to": self.rotation.apply_to,
            "alpha": self.loss_weights.alpha,
            "beta": self.loss_weights.beta,
            "content_layer": self.selection.content_layer,
            "style_layers": list(self.selection.style_layers),
            "style_layer_weights": list(self.selection.style_layer_weights),
            "iterations": self.iterations,
            "seed": self.seed,
            "init_mode": self.init_mode,
            "lr": self.lr,
            "pooling": self.pooling,
            "content_size": [self.content.shape[1], self.content.shape[0]],
            "style_size": [self.style.shape[1], self.style.shape[0]],
        }


@dataclass(eq=False)
class JobResult:
    output: np.ndarray
    loss_curve: list[tuple[int, LossReport]]
    wall_time: float
    config_echo: dict


def run_job(job: StylizationJob, weights: VggWeights, job_id: str = "") -> JobResult:
    """Optimize one image against rotated/blended targets."""
    job_id = job_id or f"a{job.rotation.angle}_l{job.rotation.lam}"
    started = time.perf_counter()
    try:
        content_t = preprocess(job.content, weights)
        style_t = preprocess(job.style, weights)
        sel = job.selection
        content_feats = extract_features(content_t, weights, [sel.content_layer], job.pooling)
        style_feats = extract_features(style_t, weights, sel.style_layers, job.pooling)
        content_target, style_target = build_loss_targets(
            content_feats, style_feats, job.rotation
        )
        target_grams = {n: gram(f) for n, f in style_target.features.items()}

        if job.init_mode == "content":
            x = content_t.copy()
        else:
            rng = np.random.default_rng(job.seed)
            x = rng.standard_normal(content_t.shape, dtype=np.float32)

        state = adam_init(x.shape, lr=job.lr)
        layers = sel.all_layers()
        curve: list[tuple[int, LossReport]] = []
        for step in range(job.iterations):
            feats = extract_features(x, weights, layers, job.pooling)
            report, grads = total_loss(
                feats, content_target, target_grams, job.loss_weights, sel
            )
            if not math.isfinite(report.total):
                raise NumericFailure(
                    f"job {job_id}: non-finite loss at iteration {step}"
                )
            if step % CURVE_EVERY == 0:
                curve.append((step, report))
            image_grad = backward_to_image(grads, feats.tape)
            x = adam_step(state, x, image_grad)

        feats = extract_features(x, weights, layers, job.pooling)
        final_report, _ = total_loss(
            feats, content_target, target_grams, job.loss_weights, sel
        )
        if not math.isfinite(final_report.total):
            raise NumericFailure(f"job {job_id}: non-finite final loss")
        curve.append((job.iterations, final_report))
    except ConfigurationError as exc:
        raise ConfigurationError(f"job {job_id}: {exc}") from exc

    return JobResult(
        output=postprocess(x, weights),
        loss_curve=curve,
        wall_time=time.perf_counter() - started,
        config_echo=job.config_echo(),
    )


def _lambda_str(lam: float) -> str:
    return str(float(lam))


def _write_curve(path: Path, curve: list[tuple[int, LossReport]]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iter", "total", "content", "style"])
        for it, report in curve:
            writer.writerow([it, repr(report.total), repr(report.content), repr(report.style)])


def run_grid(
    content_path,
    style_path,
    angles,
    lambdas,
    parallelism: int,
    out_dir,
    weights: VggWeights,
    *,
    iterations: int = 3000,
    width: int = 412,
    height: int = 522,
    loss_weights: LossWeights | None = None,
    selection: LayerSelection | None = None,
    lr: float = 0.002,
    init_mode: str = "content",
    seed: int = 0,
    apply_to: str = "both",
    pooling: str = "max",
) -> dict:
    """Run the (angle x lambda) grid and write images, curves, and a manifest.

    Returns the manifest dict. One PNG and one loss CSV per grid cell, named
    {content}_{style}_a{angle}_l{lambda}; jobs run concurrently up to
    ``parallelism`` workers.
    """
    angles = list(angles)
    lambdas = list(lambdas)
    if not angles or not lambdas:
        raise ConfigurationError("angle and lambda lists must be non-empty")
    if parallelism < 1:
        raise ConfigurationError(f"parallelism must be >= 1, got {parallelism}")

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    probe = out / f".write-probe-{uuid.uuid4().hex}"
    try:
        probe.write_bytes(b"")
    except OSError as exc:
        raise OSError(f"output directory {out} is not writable: {exc}") from exc
    finally:
        probe.unlink(missing_ok=True)

    content = load_and_resize(content_path, width, height)
    style = load_and_resize(style_path, width, height)
    loss_weights = loss_weights if loss_weights is not None else LossWeights()
    selection = selection if selection is not None else LayerSelection()

    stem = f"{Path(content_path).stem}_{Path(style_path).stem}"
    cells = []
    for angle in angles:
        for lam in lambdas:
            job = StylizationJob(
                content=content,
                style=style,
                rotation=RotationConfig(angle=angle, lam=lam, apply_to=apply_to),
                loss_weights=loss_weights,
                selection=selection,
                iterations=iterations,
                seed=seed,
                init_mode=init_mode,
                lr=lr,
                pooling=pooling,
            )
            cells.append((f"{stem}_a{angle}_l{_lambda_str(lam)}", job))

    with ThreadPoolExecutor(max_workers=parallelism) as pool:
        futures = [pool.submit(run_job, job, weights, name) for name, job in cells]
        results = [f.result() for f in futures]

    manifest_jobs = []
    for (name, job), result in zip(cells, results):
        png = out / f"{name}.png"
        Image.fromarray(result.output).save(png)
        _write_curve(out / f"{name}.csv", result.loss_curve)
        manifest_jobs.append(
            {
                "angle": job.rotation.angle,
                "lambda": job.rotation.lam,
                "file": png.name,
                "wall_time_s": result.wall_time,
                "final_loss": result.loss_curve[-1][1].total,
            }
        )
    config = dict(results[0].config_echo)
    config.update(
        {
            "angles": angles,
            "lambdas": lambdas,
            "parallelism": parallelism,
            "content_path": str(content_path),
            "style_path": str(style_path),
            "requested_size": [width, height],
            "effective_size": [content.shape[1], content.shape[0]],
        }
    )
    manifest = {"jobs": manifest_jobs, "config": config}
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2)
    return manifest
