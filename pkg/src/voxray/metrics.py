"""Image-entropy quality metric and frame-time benchmark harness.

The quality score of a rendered frame is the Shannon entropy of its
256-bin grey histogram; residual noise pixels widen the histogram, so
lower is better.  The timing harness renders warmup frames, discards
them, then records wall-clock milliseconds per frame from a monotonic
clock; raw samples are kept in the report so the summary statistics can
be recomputed.
"""

from __future__ import annotations

import platform
import statistics
import time
from dataclasses import dataclass, field

import numpy as np

from .filters import FilterConfig
from .histogram import HistogramModel, build_histogram
from .render import Camera, Frame, RenderParams, render_frame
from .volume import Volume


def image_entropy(pixels: np.ndarray) -> float:
    """Shannon entropy in bits of the 8-bit grey-level histogram."""
    pixels = np.asarray(pixels, dtype=np.uint8)
    if pixels.size == 0:
        raise ValueError("empty image")
    counts = np.bincount(pixels.reshape(-1), minlength=256)
    p = counts[counts > 0] / pixels.size
    return float(-(p * np.log2(p)).sum())


@dataclass
class EntropyReport:
    volume_hash: str
    width: int
    height: int
    rows: list[dict] = field(default_factory=list)  # {filter, config, entropy_bits}

    def to_json(self) -> dict:
        return {
            "volume_hash": self.volume_hash,
            "image": {"width": self.width, "height": self.height},
            "rows": self.rows,
        }

    def table(self) -> str:
        lines = [f"{'filter':<14} {'entropy_bits':>12}"]
        for row in self.rows:
            lines.append(f"{row['filter']:<14} {row['entropy_bits']:>12.4f}")
        return "\n".join(lines)


@dataclass
class TimingReport:
    volume_hash: str
    width: int
    height: int
    warmup: int
    machine: str
    rows: list[dict] = field(default_factory=list)
    # rows: {filter, config, timing: {samples_ms, mean_ms, median_ms, std_ms}}

    def to_json(self) -> dict:
        return {
            "volume_hash": self.volume_hash,
            "image": {"width": self.width, "height": self.height},
            "warmup": self.warmup,
            "machine": self.machine,
            "rows": self.rows,
        }

    def table(self) -> str:
        lines = [f"{'filter':<14} {'mean_ms':>10} {'median_ms':>10} {'std_ms':>9} {'n':>4}"]
        for row in self.rows:
            t = row["timing"]
            lines.append(
                f"{row['filter']:<14} {t['mean_ms']:>10.2f} {t['median_ms']:>10.2f} "
                f"{t['std_ms']:>9.2f} {len(t['samples_ms']):>4}"
            )
        return "\n".join(lines)


def machine_descriptor() -> str:
    import os

    return f"{platform.machine()} {platform.system()} {os.cpu_count()}-core"


def run_entropy_comparison(
    volume: Volume,
    camera: Camera,
    params: RenderParams,
    filter_list: list[FilterConfig],
    histogram: HistogramModel | None = None,
    workers: int = 1,
) -> tuple[EntropyReport, list[Frame]]:
    """One frame per filter with identical camera/params; entropy of each."""
    if not filter_list:
        raise ValueError("filter_list must contain at least one filter")
    if histogram is None:
        histogram = build_histogram(volume)
    report = EntropyReport(
        volume_hash=volume.content_hash(), width=params.width, height=params.height
    )
    frames = []
    for config in filter_list:
        frame = render_frame(volume, camera, params, config, histogram, workers=workers)
        frames.append(frame)
        report.rows.append(
            {
                "filter": config.kind.value,
                "config": frame.filter_config.to_json(),
                "entropy_bits": image_entropy(frame.pixels),
            }
        )
    return report, frames


def run_timing_benchmark(
    volume: Volume,
    camera: Camera,
    params: RenderParams,
    filter_list: list[FilterConfig],
    samples: int = 5,
    warmup: int = 1,
    histogram: HistogramModel | None = None,
    workers: int = 1,
) -> TimingReport:
    """Timed renders per filter; an empty filter list gives an empty report."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if histogram is None:
        histogram = build_histogram(volume)
    report = TimingReport(
        volume_hash=volume.content_hash(),
        width=params.width,
        height=params.height,
        warmup=warmup,
        machine=machine_descriptor(),
    )
    for config in filter_list:
        for _ in range(warmup):
            render_frame(volume, camera, params, config, histogram, workers=workers)
        times = []
        resolved = config
        for _ in range(samples):
            t0 = time.perf_counter()
            frame = render_frame(volume, camera, params, config, histogram, workers=workers)
            times.append((time.perf_counter() - t0) * 1000.0)
            resolved = frame.filter_config
        report.rows.append(
            {
                "filter": config.kind.value,
                "config": resolved.to_json(),
                "timing": {
                    "samples_ms": times,
                    "mean_ms": statistics.fmean(times),
                    "median_ms": statistics.median(times),
                    "std_ms": statistics.pstdev(times),
                },
            }
        )
    return report
