/**
 * Canvas drawing.  Everything is derived from the latest state frame and
 * a world-to-pixel transform fitted to the scene's arena, so the drawing
 * is to scale by construction.  The context is typed structurally with
 * just the calls used, which keeps rendering testable without a DOM.
 */

import type { ViewState } from "./view.js";

export interface Canvas2D {
  fillStyle: string | CanvasGradient | CanvasPattern;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  font: string;
  clearRect(x: number, y: number, w: number, h: number): void;
  fillRect(x: number, y: number, w: number, h: number): void;
  strokeRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  fill(): void;
  stroke(): void;
  fillText(text: string, x: number, y: number): void;
}

export interface DrawSummary {
  robot: boolean;
  goal: boolean;
  obstacles: number;
  crowd: number;
  arrow: boolean;
  badge: string | null;
}

const MARGIN_PX = 24;
const OBSTACLE_RADIUS = 0.45;
const ROBOT_RADIUS = 0.3;
const CROWD_RADIUS = 0.25;

interface Transform {
  scale: number;
  toX(wx: number): number;
  toY(wy: number): number;
}

function fitTransform(
  arena: [number, number, number, number],
  width: number,
  height: number
): Transform {
  const [xMin, yMin, xMax, yMax] = arena;
  const scale = Math.min(
    (width - 2 * MARGIN_PX) / (xMax - xMin),
    (height - 2 * MARGIN_PX) / (yMax - yMin)
  );
  const xOff = (width - scale * (xMax - xMin)) / 2;
  const yOff = (height - scale * (yMax - yMin)) / 2;
  return {
    scale,
    toX: (wx) => xOff + scale * (wx - xMin),
    // canvas y runs downward
    toY: (wy) => height - yOff - scale * (wy - yMin),
  };
}

function disc(ctx: Canvas2D, t: Transform, wx: number, wy: number, r: number, color: string): void {
  ctx.fillStyle = color;
  ctx.beginPath();
  ctx.arc(t.toX(wx), t.toY(wy), r * t.scale, 0, 2 * Math.PI);
  ctx.fill();
}

function badgeText(view: ViewState): string | null {
  if (view.reconnectBanner) {
    return "connection lost, reconnecting";
  }
  if (view.warning !== null) {
    return view.warning;
  }
  return null;
}

export function renderArena(
  ctx: Canvas2D,
  view: ViewState,
  width: number,
  height: number
): DrawSummary {
  ctx.clearRect(0, 0, width, height);
  const summary: DrawSummary = {
    robot: false,
    goal: false,
    obstacles: 0,
    crowd: 0,
    arrow: false,
    badge: badgeText(view),
  };
  const state = view.state;
  if (state === null) {
    ctx.fillStyle = "#777";
    ctx.font = "16px sans-serif";
    ctx.fillText("waiting for session...", MARGIN_PX, height / 2);
    if (summary.badge !== null) {
      ctx.fillText(summary.badge, MARGIN_PX, MARGIN_PX);
    }
    return summary;
  }

  const t = fitTransform(state.scene.arena, width, height);
  const [xMin, yMin, xMax, yMax] = state.scene.arena;
  ctx.strokeStyle = "#444";
  ctx.lineWidth = 1.5;
  ctx.strokeRect(t.toX(xMin), t.toY(yMax), t.scale * (xMax - xMin), t.scale * (yMax - yMin));

  for (const [ox, oy] of state.scene.obstacles) {
    disc(ctx, t, ox, oy, OBSTACLE_RADIUS, "#555");
    summary.obstacles += 1;
  }

  const [gx, gy] = state.scene.goal;
  ctx.strokeStyle = "#2a7";
  ctx.lineWidth = 2;
  ctx.beginPath();
  ctx.arc(t.toX(gx), t.toY(gy), 0.35 * t.scale, 0, 2 * Math.PI);
  ctx.stroke();
  summary.goal = true;

  for (const [cx, cy] of state.crowd) {
    disc(ctx, t, cx, cy, CROWD_RADIUS, "#b63");
    summary.crowd += 1;
  }

  const [rx, ry] = state.robot;
  disc(ctx, t, rx, ry, ROBOT_RADIUS, state.event_fired ? "#46c" : "#259");
  summary.robot = true;

  if (view.prevRobot !== null) {
    const [px, py] = view.prevRobot;
    if (px !== rx || py !== ry) {
      ctx.strokeStyle = "#e3b341";
      ctx.lineWidth = 2;
      ctx.beginPath();
      ctx.moveTo(t.toX(px), t.toY(py));
      ctx.lineTo(t.toX(rx), t.toY(ry));
      ctx.stroke();
      // arrowhead: two short strokes back from the tip
      const angle = Math.atan2(t.toY(ry) - t.toY(py), t.toX(rx) - t.toX(px));
      const tipX = t.toX(rx);
      const tipY = t.toY(ry);
      const headLen = 6;
      ctx.beginPath();
      ctx.moveTo(tipX, tipY);
      ctx.lineTo(
        tipX - headLen * Math.cos(angle - 0.5),
        tipY - headLen * Math.sin(angle - 0.5)
      );
      ctx.moveTo(tipX, tipY);
      ctx.lineTo(
        tipX - headLen * Math.cos(angle + 0.5),
        tipY - headLen * Math.sin(angle + 0.5)
      );
      ctx.stroke();
      summary.arrow = true;
    }
  }

  if (summary.badge !== null) {
    ctx.fillStyle = "#c33";
    ctx.font = "14px sans-serif";
    ctx.fillText(summary.badge, MARGIN_PX, MARGIN_PX - 6);
  }
  return summary;
}
