// Rate limiter for camera-drag command bursts: at most one send per
// interval, and the latest pending payload wins (matching the server's
// latest-state-wins coalescing). Clock and timer are injectable for tests.

type Scheduler = (fn: () => void, ms: number) => unknown;

export class Throttle<T> {
  private lastSent = -Infinity;
  private pending: T | null = null;
  private scheduled = false;

  constructor(
    private readonly send: (value: T) => void,
    private readonly minIntervalMs = 34, // <= ~30 commands/s
    private readonly now: () => number = () => Date.now(),
    private readonly schedule: Scheduler = (fn, ms) => setTimeout(fn, ms),
  ) {}

  push(value: T): void {
    const elapsed = this.now() - this.lastSent;
    if (elapsed >= this.minIntervalMs && !this.scheduled) {
      this.lastSent = this.now();
      this.send(value);
      return;
    }
    this.pending = value;
    if (!this.scheduled) {
      this.scheduled = true;
      this.schedule(() => this.flush(), Math.max(0, this.minIntervalMs - elapsed));
    }
  }

  private flush(): void {
    this.scheduled = false;
    if (this.pending !== null) {
      const value = this.pending;
      this.pending = null;
      this.lastSent = this.now();
      this.send(value);
    }
  }
}
