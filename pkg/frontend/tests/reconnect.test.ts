import { describe, expect, it } from "vitest";

import { Backoff } from "../src/reconnect.js";

describe("Backoff", () => {
  it("doubles up to the cap", () => {
    const b = new Backoff(500, 2, 10_000);
    const delays = Array.from({ length: 7 }, () => b.nextDelay());
    expect(delays).toEqual([500, 1000, 2000, 4000, 8000, 10_000, 10_000]);
  });

  it("reset starts over", () => {
    const b = new Backoff(500, 2, 10_000);
    b.nextDelay();
    b.nextDelay();
    b.reset();
    expect(b.nextDelay()).toBe(500);
  });
});
