#!/usr/bin/env python3
"""Filter comparison experiment on the committed speckle phantom.

Renders one frame per filter, reports image entropy and frame times, and
writes the frames + reports to an output directory.

Usage: python scripts/run_comparison.py [out_dir] [--dims N] [--size WxH]
"""

import argparse
import json
from pathlib import Path

from voxray import (
    FilterConfig,
    FilterKind,
    RenderParams,
    build_histogram,
    generate_phantom,
    orbit_camera,
    run_entropy_comparison,
    run_timing_benchmark,
)
from voxray.images import write_image
from voxray.phantoms import speckle_phantom_spec


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("out_dir", nargs="?", default="comparison_out")
    ap.add_argument("--dims", type=int, default=128)
    ap.add_argument("--size", default="256x256")
    ap.add_argument("--samples", type=int, default=5)
    args = ap.parse_args()
    width, height = (int(v) for v in args.size.split("x"))

    spec = speckle_phantom_spec(dims=args.dims)
    volume = generate_phantom(spec)
    hist = build_histogram(volume)
    camera = orbit_camera(volume)
    params = RenderParams(width=width, height=height)
    configs = [
        FilterConfig(kind=FilterKind.NONE),
        FilterConfig(kind=FilterKind.MEAN),
        FilterConfig(kind=FilterKind.SIGMA),
        FilterConfig(kind=FilterKind.ENTROPY, entropy_threshold=0.5),
        FilterConfig(kind=FilterKind.OKADA),
        FilterConfig(kind=FilterKind.LOCAL_CLUSTER),
    ]

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    print(f"volume {volume.content_hash()[:16]}  otsu T={hist.otsu_threshold}")

    entropy_report, frames = run_entropy_comparison(volume, camera, params, configs, hist)
    for config, frame in zip(configs, frames):
        write_image(frame.pixels, out_dir / f"frame_{config.kind.value}.pgm")
    print()
    print(entropy_report.table())

    timing_report = run_timing_benchmark(
        volume, camera, params, configs, samples=args.samples, warmup=1, histogram=hist
    )
    print()
    print(timing_report.table())
    (out_dir / "entropy.json").write_text(
        json.dumps(entropy_report.to_json(), indent=2, sort_keys=True)
    )
    (out_dir / "timing.json").write_text(
        json.dumps(timing_report.to_json(), indent=2, sort_keys=True)
    )
    print(f"\nwrote frames and reports to {out_dir}/")


if __name__ == "__main__":
    main()
