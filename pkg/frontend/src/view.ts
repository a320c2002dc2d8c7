/**
 * View state is a pure projection of server frames.  The UI never
 * simulates: a state frame replaces the previous one wholesale (each
 * carries the full scene, so a page reloaded mid-episode resumes on the
 * next frame), an end frame fills the summary panel, and anything
 * malformed leaves the last good frame on screen behind a warning badge.
 */

import { parseServerFrame, type EndFrame, type StateFrame } from "./protocol.js";

export interface ViewState {
  /** Latest well-formed state frame, what the canvas draws. */
  state: StateFrame | null;
  /** Previous robot position, for the executed-action arrow. */
  prevRobot: [number, number] | null;
  /** Episode summary once the server ends the session. */
  summary: EndFrame | null;
  /** Server-confirmed architecture, shown on the badge. */
  architecture: string | null;
  /** Warning badge text; null when the stream is healthy. */
  warning: string | null;
  /** Set when the socket drops, cleared on reconnect. */
  reconnectBanner: boolean;
}

export function createViewState(): ViewState {
  return {
    state: null,
    prevRobot: null,
    summary: null,
    architecture: null,
    warning: null,
    reconnectBanner: false,
  };
}

/** Fold one raw text frame into the view. Malformed input never clears it. */
export function applyServerText(view: ViewState, text: string): void {
  let frame;
  try {
    frame = parseServerFrame(text);
  } catch {
    view.warning = "malformed frame";
    return;
  }
  switch (frame.type) {
    case "state":
      view.prevRobot = view.state ? view.state.robot : null;
      view.state = frame;
      view.architecture = frame.architecture;
      view.warning = null;
      break;
    case "end":
      view.summary = frame;
      view.warning = null;
      break;
    case "error":
      view.warning = frame.message;
      break;
  }
}
