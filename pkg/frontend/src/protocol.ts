// Wire protocol for the render service stream.
//
// Binary frames: 32-byte little-endian header + width*height grey bytes.
//   magic "VXSF" | u8 version | 3 reserved | u64 sequence | u16 width |
//   u16 height | f32 render_ms | 8-byte config digest

export const FRAME_VERSION = 1;
export const HEADER_SIZE = 32;

const MAGIC = [0x56, 0x58, 0x53, 0x46]; // "VXSF"

export class ProtocolError extends Error {}

export interface FrameHeader {
  sequence: number;
  width: number;
  height: number;
  renderMs: number;
  digestHex: string;
}

export interface Frame {
  header: FrameHeader;
  pixels: Uint8Array;
}

export function parseFrame(data: ArrayBuffer): Frame {
  if (data.byteLength < HEADER_SIZE) {
    throw new ProtocolError(`frame shorter than header: ${data.byteLength} bytes`);
  }
  const view = new DataView(data);
  for (let i = 0; i < 4; i++) {
    if (view.getUint8(i) !== MAGIC[i]) {
      throw new ProtocolError("bad frame magic");
    }
  }
  const version = view.getUint8(4);
  if (version !== FRAME_VERSION) {
    throw new ProtocolError(`unsupported frame version ${version}`);
  }
  const sequence = Number(view.getBigUint64(8, true));
  const width = view.getUint16(16, true);
  const height = view.getUint16(18, true);
  const renderMs = view.getFloat32(20, true);
  let digestHex = "";
  for (let i = 24; i < 32; i++) {
    digestHex += view.getUint8(i).toString(16).padStart(2, "0");
  }
  const pixels = new Uint8Array(data, HEADER_SIZE);
  if (pixels.length !== width * height) {
    throw new ProtocolError(
      `payload is ${pixels.length} bytes, header says ${width}x${height}`,
    );
  }
  return { header: { sequence, width, height, renderMs, digestHex }, pixels };
}

// Client -> server commands; every message is one JSON object with a "cmd".

export type FilterName =
  | "none"
  | "mean"
  | "sigma"
  | "okada"
  | "entropy"
  | "local-cluster";

export const FILTER_NAMES: FilterName[] = [
  "none",
  "mean",
  "sigma",
  "okada",
  "entropy",
  "local-cluster",
];

export interface OrbitDelta {
  azimuth?: number;
  elevation?: number;
  distance?: number;
}

export function setCameraOrbit(orbit: OrbitDelta): string {
  return JSON.stringify({ cmd: "set_camera", orbit });
}

export function setFilter(kind: FilterName, params?: Record<string, number>): string {
  return JSON.stringify(params ? { cmd: "set_filter", kind, params } : { cmd: "set_filter", kind });
}

export function setThreshold(value: number | "auto"): string {
  return JSON.stringify({ cmd: "set_threshold", value });
}

export function requestFrame(width: number, height: number): string {
  return JSON.stringify({ cmd: "request_frame", width, height });
}

export interface Ack {
  ok: boolean;
  type: string;
  cmd?: string;
  error?: string;
  threshold?: number;
  config_digest?: string;
  state?: {
    orbit: { azimuth: number; elevation: number; distance: number | null } | null;
    filter_config: { kind: FilterName; [k: string]: unknown };
    threshold_mode: "auto" | "manual";
    threshold: number;
    sequence: number;
    width: number;
    height: number;
  };
}

export function parseAck(text: string): Ack {
  const obj = JSON.parse(text);
  if (typeof obj !== "object" || obj === null || typeof obj.ok !== "boolean") {
    throw new ProtocolError("malformed server message");
  }
  return obj as Ack;
}
