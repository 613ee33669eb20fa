import { describe, expect, it } from "vitest";

import { DEFAULT_ORBIT, applyDrag, applyZoom } from "../src/orbit.js";

describe("applyDrag", () => {
  it("zero drag returns the same state object", () => {
    const state = { ...DEFAULT_ORBIT };
    expect(applyDrag(state, 0, 0)).toBe(state);
  });

  it("horizontal drag changes azimuth only", () => {
    const next = applyDrag({ azimuth: 100, elevation: 10, distance: null }, 50, 0, 0.4);
    expect(next.azimuth).toBeCloseTo(80);
    expect(next.elevation).toBe(10);
  });

  it("azimuth wraps into [0, 360)", () => {
    const next = applyDrag({ azimuth: 5, elevation: 0, distance: null }, 50, 0, 0.4);
    expect(next.azimuth).toBeCloseTo(345);
    expect(next.azimuth).toBeGreaterThanOrEqual(0);
    expect(next.azimuth).toBeLessThan(360);
  });

  it("elevation clamps at +-89", () => {
    const up = applyDrag({ azimuth: 0, elevation: 85, distance: null }, 0, 100, 0.4);
    expect(up.elevation).toBe(89);
    const down = applyDrag({ azimuth: 0, elevation: -85, distance: null }, 0, -100, 0.4);
    expect(down.elevation).toBe(-89);
  });
});

describe("applyZoom", () => {
  it("zooming out increases distance multiplicatively", () => {
    const next = applyZoom({ azimuth: 0, elevation: 0, distance: 200 }, 100, 300);
    expect(next.distance).toBeCloseTo(220);
  });

  it("starts from the base distance when unset", () => {
    const next = applyZoom({ ...DEFAULT_ORBIT }, -100, 300);
    expect(next.distance).toBeCloseTo(300 / 1.1);
  });

  it("distance never collapses to zero", () => {
    const next = applyZoom({ azimuth: 0, elevation: 0, distance: 1 }, -100000, 300);
    expect(next.distance).toBeGreaterThanOrEqual(1);
  });
});
