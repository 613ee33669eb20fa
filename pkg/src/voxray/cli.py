"""Command-line front end.

Subcommands: phantom, otsu, render, compare, bench, serve.  All primary
outputs (volumes, images, report JSON minus its timing fields) are
byte-deterministic for identical inputs and seeds.

Exit codes: 0 success, 1 runtime failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .filters import FilterConfig, FilterError, FilterKind
from .histogram import HistogramError, build_histogram
from .images import ImageError, write_image
from .metrics import run_entropy_comparison, run_timing_benchmark
from .render import RenderError, RenderParams, orbit_camera, render_frame
from .volume import (
    PhantomSpec,
    Volume,
    VolumeError,
    generate_phantom,
    load_raw,
    load_slice_stack,
    save_raw,
)

FILTER_NAMES = [k.value for k in FilterKind]


class UsageError(Exception):
    """Bad inputs detected before any compute; exits with code 2."""


def _load_volume(path: str) -> Volume:
    p = Path(path)
    if p.is_dir():
        return load_slice_stack(p)
    return load_raw(p)


def _add_camera_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--azimuth", type=float, default=45.0, help="orbit azimuth in degrees")
    p.add_argument("--elevation", type=float, default=25.0, help="orbit elevation in degrees")
    p.add_argument(
        "--distance",
        type=float,
        default=None,
        help="orbit distance in voxels (default frames the volume)",
    )
    p.add_argument("--fov", type=float, default=45.0, help="vertical field of view in degrees")


def _add_render_flags(p: argparse.ArgumentParser, width=512, height=512) -> None:
    p.add_argument("--width", type=int, default=width)
    p.add_argument("--height", type=int, default=height)
    p.add_argument("--step-size", type=float, default=0.5, help="ray march step in voxels")
    p.add_argument("--workers", type=int, default=1, help="render worker threads")


def _add_filter_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--filter", choices=FILTER_NAMES, default="none", help="noise filter")
    p.add_argument(
        "--threshold",
        default="auto",
        help="surface intensity threshold T, or 'auto' for Otsu (default)",
    )
    p.add_argument("--kernel", type=int, default=3, help="filter kernel size M (odd, >= 3)")
    p.add_argument("--sigma-mult", type=float, default=2.0, help="sigma filter band multiplier")
    p.add_argument(
        "--okada-threshold", type=float, default=25.0, help="okada neighbor difference cut"
    )
    p.add_argument(
        "--entropy-threshold", type=float, default=2.0, help="entropy filter cut in bits"
    )
    p.add_argument(
        "--cluster-offset", type=int, default=1, help="diagonal cluster offset in voxels"
    )


def _filter_config(args, kind_name: str) -> FilterConfig:
    threshold = None
    if args.threshold != "auto":
        try:
            threshold = float(args.threshold)
        except ValueError:
            raise UsageError(f"--threshold must be a number or 'auto', got {args.threshold!r}")
    return FilterConfig(
        kind=FilterKind.from_name(kind_name),
        kernel_size=args.kernel,
        threshold=threshold,
        sigma_mult=args.sigma_mult,
        okada_threshold=args.okada_threshold,
        entropy_threshold=args.entropy_threshold,
        cluster_offset=args.cluster_offset,
    )


def _render_params(args) -> RenderParams:
    return RenderParams(
        width=args.width, height=args.height, step_size=args.step_size
    )


def _write_json(path: Path, obj: dict) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


# --- subcommands ---------------------------------------------------------------


def cmd_phantom(args) -> int:
    try:
        spec_obj = json.loads(Path(args.spec).read_text())
    except json.JSONDecodeError as exc:
        raise UsageError(f"{args.spec}: not valid JSON ({exc})")
    spec = PhantomSpec.from_json(spec_obj)
    volume = generate_phantom(spec)
    out = Path(args.out)
    save_raw(volume, out, source=f"phantom seed={spec.rng_seed}")
    print(volume.content_hash())
    return 0


def cmd_otsu(args) -> int:
    volume = _load_volume(args.volume)
    hist = build_histogram(volume)
    out = hist.class_stats()
    out["global_sigma"] = hist.global_sigma
    out["total_voxels"] = hist.total
    print(json.dumps(out, indent=2, sort_keys=True))
    return 0


def cmd_render(args) -> int:
    volume = _load_volume(args.volume)
    hist = build_histogram(volume)
    config = _filter_config(args, args.filter)
    camera = orbit_camera(volume, args.azimuth, args.elevation, args.distance, args.fov)
    params = _render_params(args)
    frame = render_frame(volume, camera, params, config, hist, workers=args.workers)
    out = Path(args.out)
    write_image(frame.pixels, out)
    _write_json(out.with_name(out.stem + ".meta.json"), frame.meta_json())
    print(f"wrote {out} ({frame.hit_count} hit pixels, T={frame.filter_config.threshold:g})")
    return 0


def _parse_filter_list(args) -> list[FilterConfig]:
    names = [n.strip() for n in args.filters.split(",") if n.strip()]
    return [_filter_config(args, name) for name in names]


def cmd_compare(args) -> int:
    volume = _load_volume(args.volume)
    hist = build_histogram(volume)
    configs = _parse_filter_list(args)
    camera = orbit_camera(volume, args.azimuth, args.elevation, args.distance, args.fov)
    params = _render_params(args)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    entropy_report, frames = run_entropy_comparison(
        volume, camera, params, configs, hist, workers=args.workers
    )
    for config, frame in zip(configs, frames):
        write_image(frame.pixels, out_dir / f"frame_{config.kind.value}.{args.image_format}")
    timing_report = run_timing_benchmark(
        volume,
        camera,
        params,
        configs,
        samples=args.samples,
        warmup=args.warmup,
        histogram=hist,
        workers=args.workers,
    )
    report = {
        "entropy": entropy_report.to_json(),
        "timing_benchmark": timing_report.to_json(),
    }
    _write_json(out_dir / "report.json", report)
    table = entropy_report.table() + "\n\n" + timing_report.table() + "\n"
    (out_dir / "report.txt").write_text(table)
    if args.csv:
        _write_csv(out_dir / "report.csv", entropy_report, timing_report)
    print(table)
    return 0


def _write_csv(path: Path, entropy_report, timing_report) -> None:
    lines = ["filter,entropy_bits,mean_ms,median_ms,std_ms,samples"]
    timing_by_filter = {row["filter"]: row["timing"] for row in timing_report.rows}
    for row in entropy_report.rows:
        t = timing_by_filter.get(row["filter"])
        if t:
            lines.append(
                f"{row['filter']},{row['entropy_bits']:.6f},{t['mean_ms']:.3f},"
                f"{t['median_ms']:.3f},{t['std_ms']:.3f},{len(t['samples_ms'])}"
            )
        else:
            lines.append(f"{row['filter']},{row['entropy_bits']:.6f},,,,")
    path.write_text("\n".join(lines) + "\n")


def cmd_bench(args) -> int:
    volume = _load_volume(args.volume)
    hist = build_histogram(volume)
    configs = _parse_filter_list(args)
    camera = orbit_camera(volume, args.azimuth, args.elevation, args.distance, args.fov)
    params = _render_params(args)
    report = run_timing_benchmark(
        volume,
        camera,
        params,
        configs,
        samples=args.samples,
        warmup=args.warmup,
        histogram=hist,
        workers=args.workers,
    )
    if args.out:
        _write_json(Path(args.out), report.to_json())
    print(report.table())
    return 0


def cmd_serve(args) -> int:
    from .service import serve  # aiohttp import deferred to keep the CLI light

    if not 1 <= args.port <= 65535:
        raise UsageError(f"--port must be in [1, 65535], got {args.port}")
    volume = _load_volume(args.volume)
    serve(volume, host=args.host, port=args.port, ui_dir=args.ui_dir, workers=args.workers)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="voxray",
        description="First-hit CT volume renderer with ray-time noise filters.",
    )
    parser.add_argument("--version", action="version", version=f"voxray {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("phantom", help="generate a synthetic volume from a JSON spec")
    p.add_argument("--spec", required=True, help="PhantomSpec JSON file")
    p.add_argument("--out", required=True, help="output raw volume path")
    p.set_defaults(fn=cmd_phantom)

    p = sub.add_parser("otsu", help="print threshold and class statistics as JSON")
    p.add_argument("volume", help="raw volume (with .meta.json sidecar) or slice directory")
    p.set_defaults(fn=cmd_otsu)

    p = sub.add_parser("render", help="render one frame")
    p.add_argument("volume")
    p.add_argument("--out", required=True, help="output image (.pgm or .png)")
    _add_filter_flags(p)
    _add_camera_flags(p)
    _add_render_flags(p)
    p.set_defaults(fn=cmd_render)

    p = sub.add_parser("compare", help="entropy + timing comparison across filters")
    p.add_argument("volume")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--filters", default=",".join(FILTER_NAMES), help="comma-separated kinds")
    p.add_argument("--samples", type=int, default=3, help="timed renders per filter")
    p.add_argument("--warmup", type=int, default=1, help="discarded renders per filter")
    p.add_argument("--image-format", choices=["pgm", "png"], default="pgm")
    p.add_argument("--csv", action="store_true", help="also write report.csv")
    _add_filter_flags(p)
    _add_camera_flags(p)
    _add_render_flags(p)
    p.set_defaults(fn=cmd_compare)

    p = sub.add_parser("bench", help="frame-time benchmark")
    p.add_argument("volume")
    p.add_argument("--out", default=None, help="report JSON path")
    p.add_argument("--filters", default=",".join(FILTER_NAMES))
    p.add_argument("--samples", type=int, default=5)
    p.add_argument("--warmup", type=int, default=1)
    _add_filter_flags(p)
    _add_camera_flags(p)
    _add_render_flags(p)
    p.set_defaults(fn=cmd_bench)

    p = sub.add_parser("serve", help="run the live render service")
    p.add_argument("volume")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--ui-dir", default=None, help="static viewer bundle directory")
    p.add_argument("--workers", type=int, default=2)
    p.set_defaults(fn=cmd_serve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (VolumeError, FilterError, HistogramError) as exc:
        # bad inputs (malformed specs, unknown filters, size mismatches)
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (RenderError, ImageError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except KeyboardInterrupt:
        return 0


if __name__ == "__main__":
    sys.exit(main())
