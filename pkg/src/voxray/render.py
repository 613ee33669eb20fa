"""Parallel CPU first-hit surface ray caster.

One ray per pixel marches through the volume in fixed steps and samples
the nearest voxel.  The first sample whose raw value reaches the intensity
threshold T is a surface candidate; the configured noise filter is
evaluated at that voxel and the candidate is accepted only if the filtered
value also reaches T.  A rejected candidate is treated as noise and the
ray keeps marching, so structure behind noise stays visible.  Accepted
hits are shaded with a 3D Sobel gradient normal and the Phong model.

Rays are marched in vectorized lockstep over pixel tiles; tiles may run on
a thread pool.  Every tile is a pure function of its own pixels, so the
frame is bit-identical for any worker count.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .filters import FilterConfig, FilterKind, apply_filter_batch, kernel_offsets
from .grid import PAD, gather_offsets, padded_flat
from .histogram import HistogramModel
from .volume import Volume


class RenderError(Exception):
    pass


@dataclass(frozen=True)
class Camera:
    """Pinhole camera in voxel coordinates."""

    position: tuple[float, float, float]
    look_at: tuple[float, float, float]
    up: tuple[float, float, float] = (0.0, 0.0, 1.0)
    fov_y_deg: float = 45.0

    def __post_init__(self):
        if not 0.0 < self.fov_y_deg < 180.0:
            raise RenderError(f"fov must be in (0, 180), got {self.fov_y_deg}")
        self.basis()  # validates up vs view direction

    def basis(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Orthonormal (right, up, forward)."""
        pos = np.asarray(self.position, dtype=np.float64)
        fwd = np.asarray(self.look_at, dtype=np.float64) - pos
        norm = np.linalg.norm(fwd)
        if norm == 0:
            raise RenderError("camera position and look_at coincide")
        fwd = fwd / norm
        right = np.cross(fwd, np.asarray(self.up, dtype=np.float64))
        rnorm = np.linalg.norm(right)
        if rnorm < 1e-9:
            raise RenderError("camera up vector is parallel to the view direction")
        right = right / rnorm
        return right, np.cross(right, fwd), fwd

    def to_json(self) -> dict:
        return {
            "position": list(self.position),
            "look_at": list(self.look_at),
            "up": list(self.up),
            "fov_y_deg": self.fov_y_deg,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Camera":
        return cls(
            position=tuple(float(v) for v in obj["position"]),
            look_at=tuple(float(v) for v in obj["look_at"]),
            up=tuple(float(v) for v in obj.get("up", (0, 0, 1))),
            fov_y_deg=float(obj.get("fov_y_deg", 45.0)),
        )


def orbit_camera(
    volume: Volume,
    azimuth_deg: float = 45.0,
    elevation_deg: float = 25.0,
    distance: float | None = None,
    fov_y_deg: float = 45.0,
) -> Camera:
    """Camera on an orbit around the volume center, z up.

    Elevation is clamped to +-89 degrees so up never degenerates; distance
    defaults to 2.2x the largest half-diagonal, which frames the whole box.
    """
    nx, ny, nz = volume.dims
    target = ((nx - 1) / 2.0, (ny - 1) / 2.0, (nz - 1) / 2.0)
    if distance is None:
        distance = 2.2 * math.sqrt(nx * nx + ny * ny + nz * nz) / 2.0
    el = math.radians(max(-89.0, min(89.0, elevation_deg)))
    az = math.radians(azimuth_deg)
    pos = (
        target[0] + distance * math.cos(el) * math.cos(az),
        target[1] + distance * math.cos(el) * math.sin(az),
        target[2] + distance * math.sin(el),
    )
    return Camera(position=pos, look_at=target, fov_y_deg=fov_y_deg)


@dataclass(frozen=True)
class RenderParams:
    width: int = 512
    height: int = 512
    step_size: float = 0.5  # voxel units
    max_steps: int = 0  # 0 = derive from the volume diagonal
    ambient: float = 0.1
    diffuse: float = 0.7
    specular: float = 0.2
    shininess: float = 16.0
    light_direction: tuple[float, float, float] = (1.0, -1.0, 1.5)  # toward the light
    background: int = 0

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise RenderError(f"image size must be >= 1x1, got {self.width}x{self.height}")
        if self.step_size <= 0:
            raise RenderError(f"step_size must be > 0, got {self.step_size}")
        if min(self.ambient, self.diffuse, self.specular) < 0:
            raise RenderError("lighting coefficients must be >= 0")
        if not 0 <= self.background <= 255:
            raise RenderError(f"background must be in [0, 255], got {self.background}")

    def to_json(self) -> dict:
        return {
            "width": self.width,
            "height": self.height,
            "step_size": self.step_size,
            "max_steps": self.max_steps,
            "ambient": self.ambient,
            "diffuse": self.diffuse,
            "specular": self.specular,
            "shininess": self.shininess,
            "light_direction": list(self.light_direction),
            "background": self.background,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "RenderParams":
        kwargs = dict(obj)
        if "light_direction" in kwargs:
            kwargs["light_direction"] = tuple(kwargs["light_direction"])
        return cls(**kwargs)


@dataclass
class Frame:
    """Rendered image plus the timing record and the state that produced it."""

    pixels: np.ndarray  # (height, width) uint8
    timing: dict  # total_ms, march_ms, shade_ms
    filter_config: FilterConfig
    render_params: RenderParams
    camera: Camera
    volume_hash: str
    hit_count: int = 0

    def meta_json(self) -> dict:
        return {
            "image": {"width": int(self.pixels.shape[1]), "height": int(self.pixels.shape[0])},
            "timing": self.timing,
            "filter_config": self.filter_config.to_json(),
            "render_params": self.render_params.to_json(),
            "camera": self.camera.to_json(),
            "volume_hash": self.volume_hash,
            "hit_count": self.hit_count,
        }


@dataclass(frozen=True)
class Hit:
    position: tuple[float, float, float]
    voxel: tuple[int, int, int]
    value: float  # filtered value at the accepted voxel
    t: float


# --- ray setup ---------------------------------------------------------------


def primary_ray_dirs(camera: Camera, width: int, height: int) -> np.ndarray:
    """(height*width, 3) unit directions, row-major from the top-left pixel."""
    right, up, fwd = camera.basis()
    tan_f = math.tan(math.radians(camera.fov_y_deg) / 2.0)
    aspect = width / height
    u = (2.0 * (np.arange(width) + 0.5) / width - 1.0) * tan_f * aspect
    v = (1.0 - 2.0 * (np.arange(height) + 0.5) / height) * tan_f
    d = (
        fwd[None, None, :]
        + u[None, :, None] * right[None, None, :]
        + v[:, None, None] * up[None, None, :]
    )
    d = d.reshape(-1, 3)
    return d / np.linalg.norm(d, axis=1, keepdims=True)


def ray_box_spans(origin: np.ndarray, dirs: np.ndarray, dims) -> tuple[np.ndarray, np.ndarray]:
    """Entry/exit distances against the voxel-centered box [-0.5, n-0.5]^3.

    Returns (t_enter, t_exit); a ray misses the box when t_exit < t_enter.
    Entry is clamped to 0 so cameras inside the volume start at themselves.
    """
    lo = np.full(3, -0.5)
    hi = np.asarray(dims, dtype=np.float64) - 0.5
    tmin = np.full(dirs.shape[0], -np.inf)
    tmax = np.full(dirs.shape[0], np.inf)
    for axis in range(3):
        d = dirs[:, axis]
        o = origin[axis]
        with np.errstate(divide="ignore"):
            inv = 1.0 / d
        t1 = (lo[axis] - o) * inv
        t2 = (hi[axis] - o) * inv
        near = np.minimum(t1, t2)
        far = np.maximum(t1, t2)
        parallel = d == 0
        if parallel.any():
            inside = (lo[axis] <= o) & (o <= hi[axis])
            near = np.where(parallel, np.where(inside, -np.inf, np.inf), near)
            far = np.where(parallel, np.where(inside, np.inf, -np.inf), far)
        tmin = np.maximum(tmin, near)
        tmax = np.minimum(tmax, far)
    return np.maximum(tmin, 0.0), tmax


_STEP_CHUNK = 16  # march steps evaluated per vectorized pass


def _march_batch(
    volume: Volume,
    origin: np.ndarray,
    dirs: np.ndarray,
    t_enter: np.ndarray,
    t_exit: np.ndarray,
    threshold: float,
    step: float,
    max_steps: int,
    filter_fn,
):
    """Lockstep march of one ray batch.

    filter_fn(xs, ys, zs) -> filtered values at integer voxel coords.
    Returns (hit_mask, hit_voxels (n,3) int64, hit_t, hit_value).
    """
    n = dirs.shape[0]
    hit = np.zeros(n, dtype=bool)
    hit_vox = np.zeros((n, 3), dtype=np.int64)
    hit_t = np.zeros(n, dtype=np.float64)
    hit_val = np.zeros(n, dtype=np.float64)

    thr_int = max(0, math.ceil(threshold))  # raw is integer: raw >= T iff raw >= ceil(T)
    if thr_int > 255:
        return hit, hit_vox, hit_t, hit_val
    thr_u8 = np.uint8(thr_int)

    flat, wx, wy, _wz = padded_flat(volume)
    nx, ny, nz = volume.dims
    sy = wx
    sz = wx * wy
    base_off = PAD * (sz + sy + 1)  # shift unpadded voxel coords into the padded grid

    ids = np.nonzero(t_exit >= t_enter)[0]
    # The march runs in float32: position error stays far below the half-voxel
    # rounding granularity and the memory traffic halves.
    t = t_enter[ids].astype(np.float32)
    tend = t_exit[ids].astype(np.float32)
    dx = dirs[ids, 0].astype(np.float32)
    dy = dirs[ids, 1].astype(np.float32)
    dz = dirs[ids, 2].astype(np.float32)
    # +0.5 folded into the origin: in-span positions give u >= 0, so simple
    # truncation is floor(pos + 0.5).
    oxp = np.float32(origin[0] + 0.5)
    oyp = np.float32(origin[1] + 0.5)
    ozp = np.float32(origin[2] + 0.5)
    step32 = np.float32(step)
    # Samples can overshoot the exit by a whole chunk of steps; they are
    # masked out of candidacy, and as long as the overshoot distance fits in
    # the pad shell their indices are legal without clamping.
    chunk = max(1, min(_STEP_CHUNK, int((PAD - 1) / step))) if step < PAD - 1 else 1
    need_clip = chunk * step > PAD - 1
    xmax = np.float32(nx)
    ymax = np.float32(ny)
    zmax = np.float32(nz)

    steps_done = 0
    while ids.size and steps_done < max_steps:
        m = min(chunk, max_steps - steps_done)
        tk = t[None, :] + step32 * np.arange(m, dtype=np.float32)[:, None]  # (m, a)
        if need_clip:
            vx = np.clip(oxp + tk * dx[None, :], 0, xmax).astype(np.int32)
            vy = np.clip(oyp + tk * dy[None, :], 0, ymax).astype(np.int32)
            vz = np.clip(ozp + tk * dz[None, :], 0, zmax).astype(np.int32)
        else:
            # trunc == floor for in-span (non-negative) positions; overshoot
            # samples land in the pad shell and are masked below
            vx = (oxp + tk * dx[None, :]).astype(np.int32)
            vy = (oyp + tk * dy[None, :]).astype(np.int32)
            vz = (ozp + tk * dz[None, :]).astype(np.int32)
        raw = flat[vz * sz + vy * sy + vx + base_off]
        cand = raw >= thr_u8
        if not np.all(tk[-1] <= tend):  # mask samples that overshot the exit
            cand &= tk <= tend[None, :]

        open_rays = cand.any(axis=0)
        while open_rays.any():
            sel = np.nonzero(open_rays)[0]
            kfirst = cand[:, sel].argmax(axis=0)
            cvx, cvy, cvz = vx[kfirst, sel], vy[kfirst, sel], vz[kfirst, sel]
            fval = filter_fn(cvx, cvy, cvz)
            ok = fval >= threshold
            if ok.any():
                gsel = ids[sel[ok]]
                hit[gsel] = True
                hit_vox[gsel, 0] = cvx[ok]
                hit_vox[gsel, 1] = cvy[ok]
                hit_vox[gsel, 2] = cvz[ok]
                hit_t[gsel] = tk[kfirst[ok], sel[ok]]
                hit_val[gsel] = fval[ok]
                cand[:, sel[ok]] = False  # ray done; stop scanning this chunk
            # suppressed candidates: noise, keep scanning later samples
            cand[kfirst, sel] = False
            open_rays = cand.any(axis=0)

        t = t + np.float32(m) * step32
        keep = ~hit[ids] & (t <= tend)
        if not keep.all():
            ids = ids[keep]
            t = t[keep]
            tend = tend[keep]
            dx, dy, dz = dx[keep], dy[keep], dz[keep]
        steps_done += m
    return hit, hit_vox, hit_t, hit_val


# --- normals and shading ------------------------------------------------------

_SOBEL_OFFSETS = kernel_offsets(3)


def _sobel_weights() -> np.ndarray:
    smooth = {-1: 1.0, 0: 2.0, 1: 1.0}
    w = np.zeros((3, len(_SOBEL_OFFSETS)))
    for i, (dx, dy, dz) in enumerate(_SOBEL_OFFSETS):
        w[0, i] = dx * smooth[dy] * smooth[dz]
        w[1, i] = dy * smooth[dx] * smooth[dz]
        w[2, i] = dz * smooth[dx] * smooth[dy]
    return w


_SOBEL_W = _sobel_weights()


def sobel_normal_batch(volume: Volume, vx, vy, vz, fallback: np.ndarray) -> np.ndarray:
    """(n, 3) unit surface normals pointing toward decreasing density.

    fallback is an (n, 3) array used where the gradient magnitude is below
    1e-12 (flat regions); the renderer passes the reversed ray direction.
    """
    vx = np.asarray(vx, dtype=np.int64)
    vy = np.asarray(vy, dtype=np.int64)
    vz = np.asarray(vz, dtype=np.int64)
    vals = gather_offsets(volume, vx, vy, vz, _SOBEL_OFFSETS).astype(np.float64)
    g = (_SOBEL_W @ vals).T  # (n, 3)
    norm = np.linalg.norm(g, axis=1)
    flat = norm < 1e-12
    safe = np.where(flat, 1.0, norm)
    normal = -g / safe[:, None]
    if flat.any():
        normal[flat] = fallback[flat]
    return normal


def sobel_normal(volume: Volume, x: int, y: int, z: int, fallback=(0.0, 0.0, 1.0)) -> np.ndarray:
    fb = np.asarray(fallback, dtype=np.float64).reshape(1, 3)
    return sobel_normal_batch(volume, [x], [y], [z], fb)[0]


def shade_phong_batch(
    normals: np.ndarray, view_dirs: np.ndarray, light_dir: np.ndarray, params: RenderParams
) -> np.ndarray:
    """Grey values in [0, 255]; all input vectors unit length.

    intensity = ka + kd * max(0, n.l) + ks * max(0, r.v)^shininess with r
    the light direction reflected about the normal, clamped to [0, 1] and
    scaled to 255 (round half up).
    """
    l = light_dir
    ndotl = normals @ l
    r = 2.0 * ndotl[:, None] * normals - l[None, :]
    rdotv = np.einsum("ij,ij->i", r, view_dirs)
    intensity = (
        params.ambient
        + params.diffuse * np.maximum(0.0, ndotl)
        + params.specular * np.maximum(0.0, rdotv) ** params.shininess
    )
    return np.floor(np.clip(intensity, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)


def shade_phong(normal, view_dir, light_dir, params: RenderParams) -> int:
    out = shade_phong_batch(
        np.asarray(normal, dtype=np.float64).reshape(1, 3),
        np.asarray(view_dir, dtype=np.float64).reshape(1, 3),
        np.asarray(light_dir, dtype=np.float64),
        params,
    )
    return int(out[0])


# --- frame rendering ----------------------------------------------------------


def _filter_fn_for(volume, config: FilterConfig, histogram):
    def fn(xs, ys, zs):
        return apply_filter_batch(volume, xs, ys, zs, config, histogram)

    return fn


def march_ray(
    volume: Volume,
    origin,
    direction,
    config: FilterConfig,
    histogram: HistogramModel | None = None,
    step_size: float = 0.5,
    max_steps: int = 0,
) -> Hit | None:
    """March a single ray; None when it leaves the volume unaccepted."""
    config = config.resolve_threshold(histogram)
    origin = np.asarray(origin, dtype=np.float64)
    direction = np.asarray(direction, dtype=np.float64)
    direction = direction / np.linalg.norm(direction)
    dirs = direction.reshape(1, 3)
    t_enter, t_exit = ray_box_spans(origin, dirs, volume.dims)
    if max_steps <= 0:
        span = float(t_exit[0] - t_enter[0])
        max_steps = max(1, math.ceil(span / step_size) + 1) if span >= 0 else 1
    hit, vox, t, val = _march_batch(
        volume,
        origin,
        dirs,
        t_enter,
        t_exit,
        float(config.threshold),
        step_size,
        max_steps,
        _filter_fn_for(volume, config, histogram),
    )
    if not hit[0]:
        return None
    pos = origin + t[0] * direction
    return Hit(
        position=tuple(float(v) for v in pos),
        voxel=tuple(int(v) for v in vox[0]),
        value=float(val[0]),
        t=float(t[0]),
    )


def _render_band(volume, origin, dirs, t_enter, t_exit, threshold, params, filter_fn, light):
    t0 = time.perf_counter()
    max_steps = params.max_steps
    if max_steps <= 0:
        spans = np.where(t_exit >= t_enter, t_exit - t_enter, 0.0)
        longest = float(spans.max()) if spans.size else 0.0
        max_steps = max(1, math.ceil(longest / params.step_size) + 1)
    hit, vox, hit_t, _val = _march_batch(
        volume, origin, dirs, t_enter, t_exit, threshold, params.step_size, max_steps, filter_fn
    )
    t1 = time.perf_counter()
    band = np.full(dirs.shape[0], params.background, dtype=np.uint8)
    if hit.any():
        hvox = vox[hit]
        view = -dirs[hit]
        normals = sobel_normal_batch(volume, hvox[:, 0], hvox[:, 1], hvox[:, 2], view)
        band[hit] = shade_phong_batch(normals, view, light, params)
    t2 = time.perf_counter()
    return band, int(hit.sum()), (t1 - t0) * 1000.0, (t2 - t1) * 1000.0


def render_frame(
    volume: Volume,
    camera: Camera,
    params: RenderParams,
    config: FilterConfig,
    histogram: HistogramModel | None = None,
    workers: int = 1,
    filter_fn=None,
) -> Frame:
    """Render one frame; bit-identical output for any worker count.

    filter_fn overrides the filter evaluation (the test suite drives the
    renderer with the reference filters this way); it must honor the same
    (xs, ys, zs) -> values contract as the fast path.
    """
    wall0 = time.perf_counter()
    config = config.resolve_threshold(histogram)
    if config.kind in (FilterKind.SIGMA, FilterKind.ENTROPY) and histogram is None:
        raise RenderError(f"{config.kind.value} filter needs the volume histogram")
    if filter_fn is None:
        filter_fn = _filter_fn_for(volume, config, histogram)
    origin = np.asarray(camera.position, dtype=np.float64)
    dirs = primary_ray_dirs(camera, params.width, params.height)
    t_enter, t_exit = ray_box_spans(origin, dirs, volume.dims)
    light = np.asarray(params.light_direction, dtype=np.float64)
    light = light / np.linalg.norm(light)
    threshold = float(config.threshold)

    workers = max(1, workers)
    n_bands = min(workers * 4, params.height) if workers > 1 else 1
    bounds = [
        (start * params.width, min(params.height, start + rows_per) * params.width)
        for start, rows_per in _band_rows(params.height, n_bands)
    ]

    def run(span):
        lo, hi = span
        return _render_band(
            volume,
            origin,
            dirs[lo:hi],
            t_enter[lo:hi],
            t_exit[lo:hi],
            threshold,
            params,
            filter_fn,
            light,
        )

    if workers == 1 or len(bounds) == 1:
        results = [run(b) for b in bounds]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, bounds))

    pixels = np.concatenate([r[0] for r in results]).reshape(params.height, params.width)
    hit_count = sum(r[1] for r in results)
    march_ms = sum(r[2] for r in results)
    shade_ms = sum(r[3] for r in results)
    total_ms = (time.perf_counter() - wall0) * 1000.0
    return Frame(
        pixels=pixels,
        timing={
            "total_ms": total_ms,
            "march_ms": march_ms,  # summed across bands; can exceed wall time
            "shade_ms": shade_ms,
        },
        filter_config=config,
        render_params=params,
        camera=camera,
        volume_hash=volume.content_hash(),
        hit_count=hit_count,
    )


def _band_rows(height: int, n_bands: int) -> list[tuple[int, int]]:
    rows_per = math.ceil(height / n_bands)
    return [(start, rows_per) for start in range(0, height, rows_per)]
