/**
 * Operator input: keyboard joystick first (headlessly testable), pointer
 * drag second.  Deflections clamp to the unit disc before they go out,
 * idle (0,0) is sent once and then suppressed until the stick moves
 * again, and a throttle caps the send rate at the server's tick rate.
 */

export interface Vec {
  dx: number;
  dy: number;
}

export const ZERO: Vec = { dx: 0, dy: 0 };

const KEY_VECTORS: ReadonlyMap<string, Vec> = new Map([
  ["KeyW", { dx: 0, dy: 1 }],
  ["ArrowUp", { dx: 0, dy: 1 }],
  ["KeyS", { dx: 0, dy: -1 }],
  ["ArrowDown", { dx: 0, dy: -1 }],
  ["KeyA", { dx: -1, dy: 0 }],
  ["ArrowLeft", { dx: -1, dy: 0 }],
  ["KeyD", { dx: 1, dy: 0 }],
  ["ArrowRight", { dx: 1, dy: 0 }],
]);

export function clampToUnit(dx: number, dy: number): Vec {
  if (!Number.isFinite(dx) || !Number.isFinite(dy)) {
    return ZERO;
  }
  const norm = Math.hypot(dx, dy);
  if (norm > 1) {
    return { dx: dx / norm, dy: dy / norm };
  }
  return { dx, dy };
}

/** WASD/arrow state tracker; opposing keys cancel, diagonals normalize. */
export class KeyJoystick {
  private held = new Set<string>();

  keyDown(code: string): boolean {
    if (!KEY_VECTORS.has(code)) {
      return false;
    }
    this.held.add(code);
    return true;
  }

  keyUp(code: string): void {
    this.held.delete(code);
  }

  /** Drop everything held, for window blur. */
  clear(): void {
    this.held.clear();
  }

  vector(): Vec {
    let dx = 0;
    let dy = 0;
    for (const code of this.held) {
      const v = KEY_VECTORS.get(code)!;
      dx += v.dx;
      dy += v.dy;
    }
    return clampToUnit(dx, dy);
  }
}

/** Drag joystick: deflection is the drag offset over a fixed pixel radius. */
export class PointerJoystick {
  private anchor: { x: number; y: number } | null = null;
  private current: { x: number; y: number } | null = null;

  constructor(private radiusPx = 60) {}

  get active(): boolean {
    return this.anchor !== null;
  }

  start(x: number, y: number): void {
    this.anchor = { x, y };
    this.current = { x, y };
  }

  move(x: number, y: number): void {
    if (this.anchor !== null) {
      this.current = { x, y };
    }
  }

  end(): void {
    this.anchor = null;
    this.current = null;
  }

  vector(): Vec {
    if (this.anchor === null || this.current === null) {
      return ZERO;
    }
    // screen y grows downward, world y grows upward
    return clampToUnit(
      (this.current.x - this.anchor.x) / this.radiusPx,
      (this.anchor.y - this.current.y) / this.radiusPx
    );
  }
}

/** Pointer drag overrides the keyboard while it is active. */
export function combinedInput(keys: KeyJoystick, pointer: PointerJoystick): Vec {
  return pointer.active ? pointer.vector() : keys.vector();
}

/**
 * Rate cap plus idle suppression.  `offer` returns the vector to send this
 * frame, or null.  A zero vector passes through once after motion (so the
 * server sees the stick release) and is then suppressed; repeated zeros
 * never consume the rate budget.
 */
export class InputThrottle {
  private lastSentAt = -Infinity;
  private lastWasZero = false;

  constructor(private minIntervalMs: number) {}

  offer(v: Vec, nowMs: number): Vec | null {
    const isZero = v.dx === 0 && v.dy === 0;
    if (isZero && this.lastWasZero) {
      return null;
    }
    if (nowMs - this.lastSentAt < this.minIntervalMs) {
      return null;
    }
    this.lastSentAt = nowMs;
    this.lastWasZero = isZero;
    return v;
  }
}
