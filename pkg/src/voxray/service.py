"""Live render service: HTTP state/health plus a WebSocket frame stream.

One WebSocket connection is one session.  Clients send JSON commands
(set_camera, set_filter, set_threshold, request_frame); every command is
acknowledged with the resolved session state.  Each state change schedules
a render; at most one render runs per session and rapid command bursts
coalesce to the latest state, so a stale frame is never rendered twice.

Binary frame message layout (little-endian, 32-byte header + pixels):

    magic   4s   "VXSF"
    version u8   1
    -       3x   reserved
    sequence u64
    width   u16
    height  u16
    render_ms f32
    digest  8s   first 8 bytes of sha256 over the resolved filter config
"""

from __future__ import annotations

import asyncio
import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

from aiohttp import WSMsgType, web

from .filters import FilterConfig, FilterError
from .histogram import build_histogram
from .render import Camera, RenderParams, orbit_camera, render_frame
from .volume import Volume

FRAME_MAGIC = b"VXSF"
FRAME_VERSION = 1
FRAME_HEADER = struct.Struct("<4sB3xQHHf8s")

_PLACEHOLDER_PAGE = """<!doctype html>
<html><head><title>voxray</title></head>
<body><h1>voxray render service</h1>
<p>No viewer bundle is configured (start with --ui-dir).  Endpoints:
GET /health, GET /state, WebSocket /stream.</p></body></html>
"""


def pack_frame(sequence: int, width: int, height: int, render_ms: float, digest: bytes,
               pixels: bytes) -> bytes:
    header = FRAME_HEADER.pack(
        FRAME_MAGIC, FRAME_VERSION, sequence, width, height, render_ms, digest
    )
    return header + pixels


@dataclass
class SessionState:
    """Mutable per-connection state; one coherent snapshot per frame."""

    orbit: dict = field(default_factory=lambda: {"azimuth": 45.0, "elevation": 25.0,
                                                 "distance": None})
    explicit_camera: Camera | None = None
    filter_config: FilterConfig = field(default_factory=FilterConfig)
    width: int = 256
    height: int = 256
    sequence: int = 0

    def camera_for(self, volume: Volume) -> Camera:
        if self.explicit_camera is not None:
            return self.explicit_camera
        return orbit_camera(
            volume,
            azimuth_deg=self.orbit["azimuth"],
            elevation_deg=self.orbit["elevation"],
            distance=self.orbit["distance"],
        )

    def to_json(self, volume: Volume, threshold: float) -> dict:
        camera = self.camera_for(volume)
        resolved = self.filter_config
        if resolved.threshold is None:
            from dataclasses import replace

            resolved = replace(resolved, threshold=float(threshold))
        return {
            "camera": camera.to_json(),
            "orbit": None if self.explicit_camera is not None else dict(self.orbit),
            "filter_config": self.filter_config.to_json(),
            "resolved_filter_config": resolved.to_json(),
            "config_digest": resolved.digest().hex(),
            "threshold_mode": "auto" if self.filter_config.threshold is None else "manual",
            "threshold": resolved.threshold,
            "width": self.width,
            "height": self.height,
            "sequence": self.sequence,
        }


class RenderService:
    def __init__(self, volume: Volume, ui_dir: str | None = None, workers: int = 2):
        self.volume = volume
        self.histogram = build_histogram(volume)
        self.ui_dir = Path(ui_dir) if ui_dir else None
        self.workers = workers
        self.last_state_json: dict | None = None

    # -- command handling -------------------------------------------------

    def apply_command(self, state: SessionState, cmd: dict) -> dict:
        """Mutate state per command; returns the ack payload.

        Everything is parsed and validated before the first assignment, so
        a rejected command leaves the state exactly as it was.
        """
        if not isinstance(cmd, dict) or "cmd" not in cmd:
            raise ValueError("command must be a JSON object with a 'cmd' field")
        verb = cmd["cmd"]
        if verb == "set_camera":
            if "orbit" in cmd:
                orbit = dict(state.orbit)
                for key in ("azimuth", "elevation", "distance"):
                    if key in cmd["orbit"] and cmd["orbit"][key] is not None:
                        orbit[key] = float(cmd["orbit"][key])
                state.orbit = orbit
                state.explicit_camera = None
            elif "pose" in cmd:
                state.explicit_camera = Camera.from_json(cmd["pose"])
            else:
                raise ValueError("set_camera needs 'orbit' or 'pose'")
        elif verb == "set_filter":
            base = state.filter_config.to_json()
            base.update(dict(cmd.get("params", {})))
            base["kind"] = cmd.get("kind", base.get("kind", "none"))
            state.filter_config = FilterConfig.from_json(base)
        elif verb == "set_threshold":
            value = cmd.get("value")
            base = state.filter_config.to_json()
            base["threshold"] = None if value in ("auto", None) else float(value)
            state.filter_config = FilterConfig.from_json(base)
        elif verb == "request_frame":
            width = int(cmd.get("width", state.width))
            height = int(cmd.get("height", state.height))
            if not (1 <= width <= 4096 and 1 <= height <= 4096):
                raise ValueError("frame size must be within 1..4096")
            state.width = width
            state.height = height
        else:
            raise ValueError(f"unknown command verb {verb!r}")
        ack = {
            "ok": True,
            "type": "ack",
            "cmd": verb,
            "state": state.to_json(self.volume, self.histogram.otsu_threshold),
        }
        ack["config_digest"] = ack["state"]["config_digest"]
        ack["threshold"] = ack["state"]["threshold"]
        self.last_state_json = ack["state"]
        return ack

    def snapshot(self, state: SessionState) -> tuple[Camera, FilterConfig, int, int]:
        """One coherent copy of the render-relevant state.

        Must be taken on the event loop (where commands mutate the state) so
        a frame never mixes fields from two different commands.
        """
        return state.camera_for(self.volume), state.filter_config, state.width, state.height

    def render_message(
        self, sequence: int, camera: Camera, config: FilterConfig, width: int, height: int
    ) -> bytes:
        """Render a snapshot; safe to run off the event loop."""
        params = RenderParams(width=width, height=height)
        frame = render_frame(
            self.volume, camera, params, config, self.histogram, workers=self.workers
        )
        return pack_frame(
            sequence,
            width,
            height,
            float(frame.timing["total_ms"]),
            frame.filter_config.digest(),
            frame.pixels.tobytes(),
        )


# --- aiohttp wiring ---------------------------------------------------------

SERVICE_KEY = web.AppKey("service", RenderService)


async def _health(request: web.Request) -> web.Response:
    svc: RenderService = request.app[SERVICE_KEY]
    return web.json_response(
        {
            "status": "ok",
            "volume_hash": svc.volume.content_hash(),
            "dims": list(svc.volume.dims),
            "otsu_threshold": svc.histogram.otsu_threshold,
        }
    )


async def _state(request: web.Request) -> web.Response:
    svc: RenderService = request.app[SERVICE_KEY]
    state_json = svc.last_state_json
    if state_json is None:
        state_json = SessionState().to_json(svc.volume, svc.histogram.otsu_threshold)
    return web.json_response(state_json)


async def _index(request: web.Request) -> web.Response:
    svc: RenderService = request.app[SERVICE_KEY]
    if svc.ui_dir is not None:
        index = svc.ui_dir / "index.html"
        if index.exists():
            return web.Response(text=index.read_text(), content_type="text/html")
    return web.Response(text=_PLACEHOLDER_PAGE, content_type="text/html")


async def _stream(request: web.Request) -> web.WebSocketResponse:
    svc: RenderService = request.app[SERVICE_KEY]
    ws = web.WebSocketResponse()
    await ws.prepare(request)
    state = SessionState()
    dirty = asyncio.Event()
    loop = asyncio.get_running_loop()

    async def render_loop():
        while True:
            await dirty.wait()
            dirty.clear()  # latest-state-wins: re-set while rendering -> one more pass
            camera, config, width, height = svc.snapshot(state)
            state.sequence += 1
            message = await loop.run_in_executor(
                None, svc.render_message, state.sequence, camera, config, width, height
            )
            svc.last_state_json = state.to_json(svc.volume, svc.histogram.otsu_threshold)
            await ws.send_bytes(message)

    renderer = asyncio.create_task(render_loop())
    try:
        async for msg in ws:
            if msg.type == WSMsgType.TEXT:
                try:
                    cmd = json.loads(msg.data)
                    ack = svc.apply_command(state, cmd)
                except (ValueError, KeyError, TypeError, FilterError) as exc:
                    await ws.send_json({"ok": False, "type": "error", "error": str(exc)})
                    continue
                await ws.send_json(ack)
                dirty.set()
            elif msg.type == WSMsgType.ERROR:
                break
    finally:
        renderer.cancel()
    return ws


def make_app(volume: Volume, ui_dir: str | None = None, workers: int = 2) -> web.Application:
    app = web.Application()
    app[SERVICE_KEY] = RenderService(volume, ui_dir=ui_dir, workers=workers)
    app.router.add_get("/health", _health)
    app.router.add_get("/state", _state)
    app.router.add_get("/", _index)
    if ui_dir is not None and Path(ui_dir).is_dir():
        app.router.add_static("/static/", ui_dir)
    app.router.add_get("/stream", _stream)
    return app


def serve(volume: Volume, host: str = "127.0.0.1", port: int = 8080,
          ui_dir: str | None = None, workers: int = 2) -> None:
    app = make_app(volume, ui_dir=ui_dir, workers=workers)
    web.run_app(app, host=host, port=port)
