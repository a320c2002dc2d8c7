/**
 * Session socket: callbacks enqueue raw frames, the render loop drains
 * the whole queue once per animation frame, outbound messages validate
 * against the wire schemas before they are written.  The socket type is
 * structural so tests can drive the client with a scripted stub.
 */

import { encodeClientMessage } from "./protocol.js";
import { applyServerText, type ViewState } from "./view.js";
import type { Vec } from "./input.js";

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: (() => void) | null;
  onmessage: ((event: { data: unknown }) => void) | null;
  onclose: (() => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;

export class SessionSocket {
  private queue: string[] = [];
  private socket: SocketLike | null = null;
  open = false;
  dropped = false;

  constructor(private url: string, private factory: SocketFactory) {}

  connect(): void {
    const socket = this.factory(this.url);
    this.socket = socket;
    this.dropped = false;
    socket.onopen = () => {
      this.open = true;
    };
    socket.onmessage = (event) => {
      this.queue.push(String(event.data));
    };
    socket.onclose = () => {
      this.open = false;
      this.dropped = true;
    };
  }

  /** Drain every queued frame into the view; call once per render frame. */
  drain(view: ViewState): number {
    let applied = 0;
    while (this.queue.length > 0) {
      applyServerText(view, this.queue.shift()!);
      applied += 1;
    }
    view.reconnectBanner = this.dropped;
    return applied;
  }

  sendInput(v: Vec): void {
    this.send(encodeClientMessage({ type: "input", dx: v.dx, dy: v.dy }));
  }

  sendMode(architecture: string): void {
    this.send(encodeClientMessage({ type: "mode", architecture }));
  }

  private send(text: string): void {
    if (this.socket !== null && this.open) {
      this.socket.send(text);
    }
  }
}
