// Live viewer: streams frames onto a canvas and turns user input into
// protocol commands. All rendering happens server-side; this client only
// decodes, displays and steers.

import { DEFAULT_ORBIT, OrbitState, applyDrag, applyZoom } from "./orbit.js";
import {
  Ack,
  FILTER_NAMES,
  FilterName,
  Frame,
  ProtocolError,
  parseAck,
  parseFrame,
  requestFrame,
  setCameraOrbit,
  setFilter,
  setThreshold,
} from "./protocol.js";
import { Backoff } from "./reconnect.js";
import { Throttle } from "./throttle.js";

export interface ViewerElements {
  canvas: HTMLCanvasElement;
  status: HTMLElement;
  renderMs: HTMLElement;
  filterSelect: HTMLSelectElement;
  thresholdSlider: HTMLInputElement;
  thresholdValue: HTMLElement;
  autoThreshold: HTMLInputElement;
}

export class Viewer {
  private ws: WebSocket | null = null;
  private orbit: OrbitState = { ...DEFAULT_ORBIT };
  private lastShownSequence = 0;
  private dragging = false;
  private lastPointer: [number, number] = [0, 0];
  private readonly backoff = new Backoff();
  private readonly orbitThrottle: Throttle<OrbitState>;
  private baseDistance = 300;
  private closed = false;

  constructor(
    private readonly url: string,
    private readonly el: ViewerElements,
  ) {
    this.orbitThrottle = new Throttle((orbit) => this.sendOrbit(orbit));
    this.populateFilters();
    this.bindInputs();
    this.connect();
  }

  close(): void {
    this.closed = true;
    this.ws?.close();
  }

  // -- connection --------------------------------------------------------

  private connect(): void {
    this.setStatus("connecting...");
    const ws = new WebSocket(this.url);
    ws.binaryType = "arraybuffer";
    this.ws = ws;
    ws.onopen = () => {
      this.backoff.reset();
      this.lastShownSequence = 0; // new session, fresh sequence numbers
      this.setStatus("connected");
      // a reconnect lands in a fresh session: re-apply the UI state so the
      // stream resumes where the controls say it should be
      ws.send(setFilter((this.el.filterSelect.value || "none") as FilterName));
      ws.send(
        this.el.autoThreshold.checked
          ? setThreshold("auto")
          : setThreshold(Number(this.el.thresholdSlider.value)),
      );
      this.sendOrbit(this.orbit);
      ws.send(requestFrame(this.el.canvas.width, this.el.canvas.height));
    };
    ws.onmessage = (event) => this.onMessage(event);
    ws.onclose = () => {
      if (this.closed) return;
      const delay = this.backoff.nextDelay();
      this.setStatus(`disconnected, retrying in ${(delay / 1000).toFixed(1)}s`);
      setTimeout(() => this.connect(), delay);
    };
    ws.onerror = () => ws.close();
  }

  private onMessage(event: MessageEvent): void {
    if (typeof event.data === "string") {
      let ack: Ack;
      try {
        ack = parseAck(event.data);
      } catch (err) {
        this.setStatus(`bad server message: ${err}`);
        return;
      }
      if (!ack.ok) {
        this.setStatus(`server rejected command: ${ack.error}`);
        return;
      }
      this.applyAckedState(ack);
      return;
    }
    let frame: Frame;
    try {
      frame = parseFrame(event.data as ArrayBuffer);
    } catch (err) {
      if (err instanceof ProtocolError) {
        this.setStatus(`dropped bad frame: ${err.message}`);
        return;
      }
      throw err;
    }
    if (frame.header.sequence <= this.lastShownSequence) {
      return; // stale frame
    }
    this.lastShownSequence = frame.header.sequence;
    this.draw(frame);
    this.el.renderMs.textContent = `${frame.header.renderMs.toFixed(1)} ms`;
  }

  private applyAckedState(ack: Ack): void {
    const state = ack.state;
    if (!state) return;
    this.el.filterSelect.value = state.filter_config.kind;
    if (state.threshold_mode === "auto") {
      this.el.autoThreshold.checked = true;
      this.el.thresholdSlider.disabled = true;
    } else {
      this.el.autoThreshold.checked = false;
      this.el.thresholdSlider.disabled = false;
    }
    this.el.thresholdSlider.value = String(Math.round(state.threshold));
    this.el.thresholdValue.textContent =
      state.threshold_mode === "auto"
        ? `auto (${state.threshold})`
        : String(state.threshold);
    if (state.orbit) {
      this.orbit = {
        azimuth: state.orbit.azimuth,
        elevation: state.orbit.elevation,
        distance: state.orbit.distance,
      };
      if (state.orbit.distance !== null) {
        this.baseDistance = state.orbit.distance;
      }
    }
  }

  // -- display -----------------------------------------------------------

  private draw(frame: Frame): void {
    const { width, height } = frame.header;
    const canvas = this.el.canvas;
    if (canvas.width !== width || canvas.height !== height) {
      canvas.width = width;
      canvas.height = height;
    }
    const ctx = canvas.getContext("2d");
    if (!ctx) return;
    const image = ctx.createImageData(width, height);
    const rgba = image.data;
    const grey = frame.pixels;
    for (let i = 0; i < grey.length; i++) {
      const v = grey[i];
      const o = i * 4;
      rgba[o] = v;
      rgba[o + 1] = v;
      rgba[o + 2] = v;
      rgba[o + 3] = 255;
    }
    ctx.putImageData(image, 0, 0);
  }

  private setStatus(text: string): void {
    this.el.status.textContent = text;
  }

  // -- input -------------------------------------------------------------

  private populateFilters(): void {
    for (const name of FILTER_NAMES) {
      const option = document.createElement("option");
      option.value = name;
      option.textContent = name;
      this.el.filterSelect.appendChild(option);
    }
  }

  private sendText(payload: string): void {
    if (this.ws && this.ws.readyState === WebSocket.OPEN) {
      this.ws.send(payload);
    } else {
      this.setStatus("not connected; input ignored");
    }
  }

  private sendOrbit(orbit: OrbitState): void {
    this.sendText(
      setCameraOrbit({
        azimuth: orbit.azimuth,
        elevation: orbit.elevation,
        ...(orbit.distance !== null ? { distance: orbit.distance } : {}),
      }),
    );
  }

  private bindInputs(): void {
    const canvas = this.el.canvas;
    canvas.addEventListener("pointerdown", (e) => {
      this.dragging = true;
      this.lastPointer = [e.clientX, e.clientY];
      canvas.setPointerCapture(e.pointerId);
    });
    canvas.addEventListener("pointerup", (e) => {
      this.dragging = false;
      canvas.releasePointerCapture(e.pointerId);
    });
    canvas.addEventListener("pointermove", (e) => {
      if (!this.dragging) return;
      const dx = e.clientX - this.lastPointer[0];
      const dy = e.clientY - this.lastPointer[1];
      this.lastPointer = [e.clientX, e.clientY];
      const next = applyDrag(this.orbit, dx, dy);
      if (next === this.orbit) return; // zero-pixel drag: nothing to send
      this.orbit = next;
      this.orbitThrottle.push(next);
    });
    canvas.addEventListener("wheel", (e) => {
      e.preventDefault();
      this.orbit = applyZoom(this.orbit, e.deltaY, this.baseDistance);
      this.orbitThrottle.push(this.orbit);
    });
    this.el.filterSelect.addEventListener("change", () => {
      this.sendText(setFilter(this.el.filterSelect.value as FilterName));
    });
    this.el.thresholdSlider.addEventListener("change", () => {
      if (!this.el.autoThreshold.checked) {
        this.sendText(setThreshold(Number(this.el.thresholdSlider.value)));
      }
    });
    this.el.autoThreshold.addEventListener("change", () => {
      if (this.el.autoThreshold.checked) {
        this.sendText(setThreshold("auto"));
      } else {
        this.sendText(setThreshold(Number(this.el.thresholdSlider.value)));
      }
    });
  }
}
