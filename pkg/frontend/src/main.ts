import { Viewer, ViewerElements } from "./viewer.js";

function grab<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
}

const elements: ViewerElements = {
  canvas: grab<HTMLCanvasElement>("frame"),
  status: grab("status"),
  renderMs: grab("render-ms"),
  filterSelect: grab<HTMLSelectElement>("filter"),
  thresholdSlider: grab<HTMLInputElement>("threshold"),
  thresholdValue: grab("threshold-value"),
  autoThreshold: grab<HTMLInputElement>("auto-threshold"),
};

const scheme = location.protocol === "https:" ? "wss" : "ws";
new Viewer(`${scheme}://${location.host}/stream`, elements);
