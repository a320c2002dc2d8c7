import { describe, expect, it } from "vitest";

import {
  clampToUnit,
  combinedInput,
  InputThrottle,
  KeyJoystick,
  PointerJoystick,
  ZERO,
} from "../src/input.js";

describe("clampToUnit", () => {
  it("leaves vectors inside the unit disc alone", () => {
    expect(clampToUnit(0.3, -0.4)).toEqual({ dx: 0.3, dy: -0.4 });
  });

  it("scales long vectors back to the unit circle", () => {
    const v = clampToUnit(3, 4);
    expect(v.dx).toBeCloseTo(0.6, 12);
    expect(v.dy).toBeCloseTo(0.8, 12);
  });

  it("maps non-finite components to zero", () => {
    expect(clampToUnit(Number.NaN, 1)).toEqual(ZERO);
    expect(clampToUnit(Number.POSITIVE_INFINITY, 0)).toEqual(ZERO);
  });
});

describe("KeyJoystick", () => {
  it("maps up plus right to the unit diagonal", () => {
    const keys = new KeyJoystick();
    keys.keyDown("KeyW");
    keys.keyDown("KeyD");
    const v = keys.vector();
    expect(Math.abs(v.dx - 0.7071)).toBeLessThan(1e-3);
    expect(Math.abs(v.dy - 0.7071)).toBeLessThan(1e-3);
  });

  it("treats arrows and WASD as the same axes", () => {
    const keys = new KeyJoystick();
    keys.keyDown("ArrowUp");
    keys.keyDown("ArrowRight");
    const arrows = keys.vector();
    keys.clear();
    keys.keyDown("KeyW");
    keys.keyDown("KeyD");
    expect(keys.vector()).toEqual(arrows);
  });

  it("cancels opposing keys", () => {
    const keys = new KeyJoystick();
    keys.keyDown("KeyA");
    keys.keyDown("KeyD");
    expect(keys.vector()).toEqual(ZERO);
  });

  it("releases keys on keyUp and on clear", () => {
    const keys = new KeyJoystick();
    keys.keyDown("KeyW");
    keys.keyUp("KeyW");
    expect(keys.vector()).toEqual(ZERO);
    keys.keyDown("KeyS");
    keys.clear();
    expect(keys.vector()).toEqual(ZERO);
  });

  it("reports whether a key was handled", () => {
    const keys = new KeyJoystick();
    expect(keys.keyDown("KeyW")).toBe(true);
    expect(keys.keyDown("KeyQ")).toBe(false);
  });
});

describe("PointerJoystick", () => {
  it("is inactive until a drag starts and after it ends", () => {
    const pointer = new PointerJoystick();
    expect(pointer.active).toBe(false);
    pointer.start(100, 100);
    expect(pointer.active).toBe(true);
    pointer.end();
    expect(pointer.active).toBe(false);
    expect(pointer.vector()).toEqual(ZERO);
  });

  it("flips screen y so upward drags mean positive y", () => {
    const pointer = new PointerJoystick();
    pointer.start(100, 100);
    pointer.move(130, 70);
    const v = pointer.vector();
    expect(v.dx).toBeCloseTo(0.5, 12);
    expect(v.dy).toBeCloseTo(0.5, 12);
  });

  it("clamps drags past the joystick radius to unit norm", () => {
    const pointer = new PointerJoystick();
    pointer.start(0, 0);
    pointer.move(180, 0);
    const v = pointer.vector();
    expect(Math.hypot(v.dx, v.dy)).toBeCloseTo(1, 12);
  });

  it("overrides the keyboard while a drag is active", () => {
    const keys = new KeyJoystick();
    const pointer = new PointerJoystick();
    keys.keyDown("KeyS");
    pointer.start(0, 0);
    pointer.move(60, 0);
    const dragged = combinedInput(keys, pointer);
    expect(dragged.dx).toBeCloseTo(1, 12);
    expect(dragged.dy).toBeCloseTo(0, 12);
    pointer.end();
    expect(combinedInput(keys, pointer)).toEqual({ dx: 0, dy: -1 });
  });
});

describe("InputThrottle", () => {
  it("caps the send rate at the tick interval", () => {
    const throttle = new InputThrottle(125);
    expect(throttle.offer({ dx: 1, dy: 0 }, 0)).toEqual({ dx: 1, dy: 0 });
    expect(throttle.offer({ dx: 1, dy: 0 }, 60)).toBeNull();
    expect(throttle.offer({ dx: 1, dy: 0 }, 124)).toBeNull();
    expect(throttle.offer({ dx: 1, dy: 0 }, 125)).toEqual({ dx: 1, dy: 0 });
  });

  it("sends an idle zero at most once until motion resumes", () => {
    const throttle = new InputThrottle(125);
    expect(throttle.offer(ZERO, 0)).toEqual(ZERO);
    expect(throttle.offer(ZERO, 200)).toBeNull();
    expect(throttle.offer(ZERO, 400)).toBeNull();
    expect(throttle.offer({ dx: 0, dy: 1 }, 600)).toEqual({ dx: 0, dy: 1 });
    expect(throttle.offer(ZERO, 800)).toEqual(ZERO);
    expect(throttle.offer(ZERO, 1000)).toBeNull();
  });

  it("keeps 60 fps polling within the tick budget", () => {
    const throttle = new InputThrottle(125);
    let sent = 0;
    for (let frame = 0; frame < 60; frame += 1) {
      if (throttle.offer({ dx: 1, dy: 0 }, frame * (1000 / 60)) !== null) {
        sent += 1;
      }
    }
    expect(sent).toBe(8);
  });
});
