import { readFileSync } from "node:fs";
import { describe, expect, it } from "vitest";

import { renderArena, type Canvas2D } from "../src/render.js";
import { applyServerText, createViewState, type ViewState } from "../src/view.js";

const WIDTH = 720;
const HEIGHT = 560;

type Op = (string | number)[];

class FakeCanvas implements Canvas2D {
  ops: Op[] = [];
  fillStyle: string | CanvasGradient | CanvasPattern = "";
  strokeStyle: string | CanvasGradient | CanvasPattern = "";
  lineWidth = 0;
  font = "";

  private log(name: string, ...args: (string | number)[]): void {
    this.ops.push([name, String(this.fillStyle), String(this.strokeStyle), ...args]);
  }

  clearRect(x: number, y: number, w: number, h: number): void {
    this.log("clearRect", x, y, w, h);
  }
  fillRect(x: number, y: number, w: number, h: number): void {
    this.log("fillRect", x, y, w, h);
  }
  strokeRect(x: number, y: number, w: number, h: number): void {
    this.log("strokeRect", x, y, w, h);
  }
  beginPath(): void {
    this.log("beginPath");
  }
  arc(x: number, y: number, r: number, a0: number, a1: number): void {
    this.log("arc", x, y, r, a0, a1);
  }
  moveTo(x: number, y: number): void {
    this.log("moveTo", x, y);
  }
  lineTo(x: number, y: number): void {
    this.log("lineTo", x, y);
  }
  fill(): void {
    this.log("fill");
  }
  stroke(): void {
    this.log("stroke");
  }
  fillText(text: string, x: number, y: number): void {
    this.log("fillText", text, x, y);
  }
}

interface Fixture {
  server: unknown[];
}

function corridorStates(): string[] {
  const url = new URL("./fixtures/session_corridor_irt.json", import.meta.url);
  const fixture = JSON.parse(readFileSync(url, "utf-8")) as Fixture;
  return fixture.server
    .filter((f) => (f as { type: string }).type === "state")
    .map((f) => JSON.stringify(f));
}

function viewWithFrames(texts: string[]): ViewState {
  const view = createViewState();
  for (const text of texts) {
    applyServerText(view, text);
  }
  return view;
}

describe("renderArena", () => {
  it("shows a waiting message before the first state frame", () => {
    const canvas = new FakeCanvas();
    const summary = renderArena(canvas, createViewState(), WIDTH, HEIGHT);
    expect(summary.robot).toBe(false);
    expect(summary.goal).toBe(false);
    const texts = canvas.ops.filter((op) => op[0] === "fillText");
    expect(texts.some((op) => String(op[3]).includes("waiting"))).toBe(true);
  });

  it("draws every corridor wall obstacle at one shared scale", () => {
    const states = corridorStates();
    const view = viewWithFrames(states.slice(0, 1));
    const canvas = new FakeCanvas();
    const summary = renderArena(canvas, view, WIDTH, HEIGHT);

    expect(summary.obstacles).toBe(view.state!.scene.obstacles.length);
    expect(summary.obstacles).toBeGreaterThan(0);
    expect(summary.robot).toBe(true);
    expect(summary.goal).toBe(true);

    const wallArcs = canvas.ops.filter(
      (op, i) => op[0] === "arc" && op[1] === "#555" && canvas.ops[i + 1]?.[0] === "fill"
    );
    expect(wallArcs).toHaveLength(summary.obstacles);
    const radii = new Set(wallArcs.map((op) => op[5]));
    expect(radii.size).toBe(1);
    expect(Number([...radii][0])).toBeGreaterThan(0);
  });

  it("draws only the robot and goal when the crowd is empty", () => {
    const view = viewWithFrames(corridorStates().slice(0, 1));
    expect(view.state!.crowd).toHaveLength(0);
    const summary = renderArena(new FakeCanvas(), view, WIDTH, HEIGHT);
    expect(summary.robot).toBe(true);
    expect(summary.goal).toBe(true);
    expect(summary.crowd).toBe(0);
    expect(summary.arrow).toBe(false);
  });

  it("draws the executed-action arrow once the robot has moved", () => {
    const view = viewWithFrames(corridorStates().slice(0, 2));
    const summary = renderArena(new FakeCanvas(), view, WIDTH, HEIGHT);
    expect(summary.arrow).toBe(true);
  });

  it("paints the warning badge over the last good frame", () => {
    const states = corridorStates();
    const view = viewWithFrames(states.slice(0, 2));
    applyServerText(view, "garbage that will not parse");
    const canvas = new FakeCanvas();
    const summary = renderArena(canvas, view, WIDTH, HEIGHT);

    expect(summary.badge).toBe("malformed frame");
    expect(summary.robot).toBe(true);
    const texts = canvas.ops.filter((op) => op[0] === "fillText");
    expect(texts.some((op) => op[3] === "malformed frame")).toBe(true);
  });

  it("prefers the reconnect banner over a stale warning", () => {
    const view = viewWithFrames(corridorStates().slice(0, 1));
    view.warning = "malformed frame";
    view.reconnectBanner = true;
    const summary = renderArena(new FakeCanvas(), view, WIDTH, HEIGHT);
    expect(summary.badge).toBe("connection lost, reconnecting");
  });

  it("renders a resumed session identically after one catch-up frame", () => {
    const states = corridorStates();
    const longLived = viewWithFrames(states.slice(0, 6));
    const resumed = viewWithFrames(states.slice(4, 6));

    const canvasA = new FakeCanvas();
    const canvasB = new FakeCanvas();
    const summaryA = renderArena(canvasA, longLived, WIDTH, HEIGHT);
    const summaryB = renderArena(canvasB, resumed, WIDTH, HEIGHT);

    expect(summaryB).toEqual(summaryA);
    expect(canvasB.ops).toEqual(canvasA.ops);
  });
});
