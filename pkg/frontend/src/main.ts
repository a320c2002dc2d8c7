/**
 * Browser entry point.  Wires the keyboard and pointer joysticks, the
 * websocket session, and the render loop together.  All simulation state
 * lives on the server; this module only forwards inputs and draws the
 * frames it receives, so a mid-episode reload resumes cleanly from the
 * next state message.
 */

import { combinedInput, InputThrottle, KeyJoystick, PointerJoystick } from "./input.js";
import { renderArena, type Canvas2D } from "./render.js";
import { SessionSocket, type SocketLike } from "./socket.js";
import { createViewState } from "./view.js";

const TICK_RATE = 8;

function socketUrl(): string {
  const params = new URLSearchParams(window.location.search);
  const explicit = params.get("server");
  if (explicit !== null) {
    return explicit;
  }
  const host = window.location.hostname || "localhost";
  const port = params.get("port") ?? "8571";
  return `ws://${host}:${port}`;
}

function boot(): void {
  const canvas = document.getElementById("arena") as HTMLCanvasElement;
  const ctx = canvas.getContext("2d") as unknown as Canvas2D;
  const statusLine = document.getElementById("status") as HTMLElement;
  const modeButtons = Array.from(
    document.querySelectorAll<HTMLButtonElement>("button[data-architecture]")
  );

  const view = createViewState();
  const session = new SessionSocket(
    socketUrl(),
    (url) => new WebSocket(url) as unknown as SocketLike
  );
  session.connect();

  const keys = new KeyJoystick();
  const pointer = new PointerJoystick();
  const throttle = new InputThrottle(1000 / TICK_RATE);

  window.addEventListener("keydown", (event) => {
    if (keys.keyDown(event.code)) {
      event.preventDefault();
    }
  });
  window.addEventListener("keyup", (event) => {
    keys.keyUp(event.code);
  });
  window.addEventListener("blur", () => {
    keys.clear();
  });

  canvas.addEventListener("pointerdown", (event) => {
    canvas.setPointerCapture(event.pointerId);
    pointer.start(event.offsetX, event.offsetY);
  });
  canvas.addEventListener("pointermove", (event) => {
    pointer.move(event.offsetX, event.offsetY);
  });
  const releasePointer = () => pointer.end();
  canvas.addEventListener("pointerup", releasePointer);
  canvas.addEventListener("pointercancel", releasePointer);

  for (const button of modeButtons) {
    button.addEventListener("click", () => {
      const architecture = button.dataset.architecture;
      if (architecture !== undefined) {
        session.sendMode(architecture);
      }
    });
  }

  const frame = (now: number): void => {
    session.drain(view);

    if (view.summary === null) {
      const send = throttle.offer(combinedInput(keys, pointer), now);
      if (send !== null) {
        session.sendInput(send);
      }
    }

    renderArena(ctx, view, canvas.width, canvas.height);

    for (const button of modeButtons) {
      button.classList.toggle(
        "active",
        button.dataset.architecture === view.architecture
      );
    }

    if (view.summary !== null) {
      const report = view.summary.report;
      const verdict = view.summary.verdict.passed ? "verdict passed" : "verdict failed";
      statusLine.textContent =
        `episode over: ${view.summary.termination}, ` +
        `time ${report.time_to_goal ?? "n/a"}, ${verdict}`;
    } else if (view.state !== null) {
      statusLine.textContent =
        `step ${view.state.step}, architecture ${view.state.architecture}`;
    } else {
      statusLine.textContent = "connecting...";
    }

    window.requestAnimationFrame(frame);
  };
  window.requestAnimationFrame(frame);
}

if (typeof document !== "undefined" && document.getElementById("arena") !== null) {
  boot();
}
