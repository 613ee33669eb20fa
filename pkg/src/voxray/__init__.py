"""voxray: CPU first-hit volume ray caster with ray-time noise filters."""

from .filters import FilterConfig, FilterKind
from .histogram import HistogramModel, build_histogram, global_stddev, otsu
from .metrics import image_entropy, run_entropy_comparison, run_timing_benchmark
from .render import Camera, Frame, RenderParams, orbit_camera, render_frame
from .volume import (
    PhantomSpec,
    Shape,
    SpotNoise,
    Volume,
    VolumeMeta,
    generate_phantom,
    load_raw,
    load_slice_stack,
    save_raw,
)

__all__ = [
    "Camera",
    "FilterConfig",
    "FilterKind",
    "Frame",
    "HistogramModel",
    "PhantomSpec",
    "RenderParams",
    "Shape",
    "SpotNoise",
    "Volume",
    "VolumeMeta",
    "build_histogram",
    "generate_phantom",
    "global_stddev",
    "image_entropy",
    "load_raw",
    "load_slice_stack",
    "orbit_camera",
    "otsu",
    "render_frame",
    "run_entropy_comparison",
    "run_timing_benchmark",
    "save_raw",
]

__version__ = "0.1.0"
