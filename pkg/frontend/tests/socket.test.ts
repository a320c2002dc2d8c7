import { describe, expect, it } from "vitest";

import { clientMessageSchema } from "../src/protocol.js";
import { SessionSocket, type SocketLike } from "../src/socket.js";
import { createViewState } from "../src/view.js";

class StubSocket implements SocketLike {
  sent: string[] = [];
  onopen: (() => void) | null = null;
  onmessage: ((event: { data: unknown }) => void) | null = null;
  onclose: (() => void) | null = null;

  send(data: string): void {
    this.sent.push(data);
  }

  close(): void {
    this.onclose?.();
  }

  deliver(text: string): void {
    this.onmessage?.({ data: text });
  }
}

function stateFrameText(step: number, architecture = "irt", crowd: number[][] = []): string {
  return JSON.stringify({
    type: "state",
    session_id: "s-1",
    step,
    robot: [0.1 * step, 0.2 * step],
    crowd,
    event_fired: false,
    architecture,
    metrics: { elapsed: 0.35 * step, path_length: 0.22 * step, min_separation: null },
    scene: {
      kind: "bimodal_corridor",
      arena: [-4, -1, 4, 9],
      start: [0, 0],
      goal: [0, 8],
      obstacles: [
        [-2, 4],
        [2, 4],
      ],
    },
  });
}

function openSession(): { session: SessionSocket; stub: StubSocket } {
  const stub = new StubSocket();
  const session = new SessionSocket("ws://test", () => stub);
  session.connect();
  stub.onopen?.();
  return { session, stub };
}

describe("SessionSocket", () => {
  it("blocks outbound messages until the socket opens", () => {
    const stub = new StubSocket();
    const session = new SessionSocket("ws://test", () => stub);
    session.connect();
    session.sendInput({ dx: 1, dy: 0 });
    expect(stub.sent).toHaveLength(0);
    stub.onopen?.();
    session.sendInput({ dx: 1, dy: 0 });
    expect(stub.sent).toHaveLength(1);
  });

  it("validates every outbound message against the client schema", () => {
    const { session, stub } = openSession();
    session.sendInput({ dx: 0.7071, dy: 0.7071 });
    session.sendMode("linear");
    for (const text of stub.sent) {
      clientMessageSchema.parse(JSON.parse(text));
    }
    expect(stub.sent).toHaveLength(2);
  });

  it("refuses to send an out-of-disc input vector", () => {
    const { session, stub } = openSession();
    expect(() => session.sendInput({ dx: 1, dy: 1 })).toThrow();
    expect(stub.sent).toHaveLength(0);
  });

  it("drains the whole inbound queue each render frame", () => {
    const { session, stub } = openSession();
    const view = createViewState();
    for (let step = 0; step < 5; step += 1) {
      stub.deliver(stateFrameText(step));
    }
    expect(session.drain(view)).toBe(5);
    expect(view.state?.step).toBe(4);
    expect(view.prevRobot).toEqual([0.1 * 3, 0.2 * 3]);
    expect(session.drain(view)).toBe(0);
  });

  it("keeps up with 60 consecutive frames without dropping an input event", () => {
    const { session, stub } = openSession();
    const view = createViewState();
    for (let frame = 0; frame < 60; frame += 1) {
      stub.deliver(stateFrameText(frame));
      session.drain(view);
      session.sendInput({ dx: 0, dy: 1 });
      expect(view.state?.step).toBe(frame);
    }
    expect(stub.sent).toHaveLength(60);
    for (const text of stub.sent) {
      clientMessageSchema.parse(JSON.parse(text));
    }
  });

  it("updates the architecture badge only from a server echo", () => {
    const { session, stub } = openSession();
    const view = createViewState();
    stub.deliver(stateFrameText(0, "linear"));
    session.drain(view);
    expect(view.architecture).toBe("linear");

    session.sendMode("irt");
    session.drain(view);
    expect(view.architecture).toBe("linear");

    stub.deliver(stateFrameText(1, "irt"));
    session.drain(view);
    expect(view.architecture).toBe("irt");
    expect(JSON.parse(stub.sent[0]!)).toEqual({ type: "mode", architecture: "irt" });
  });

  it("keeps the last good frame behind a warning on malformed input", () => {
    const { session, stub } = openSession();
    const view = createViewState();
    stub.deliver(stateFrameText(3));
    stub.deliver("{ nope");
    session.drain(view);
    expect(view.state?.step).toBe(3);
    expect(view.warning).toBe("malformed frame");

    stub.deliver(stateFrameText(4));
    session.drain(view);
    expect(view.warning).toBeNull();
  });

  it("surfaces server error frames as the warning badge", () => {
    const { session, stub } = openSession();
    const view = createViewState();
    stub.deliver(stateFrameText(0));
    stub.deliver(
      JSON.stringify({ type: "error", session_id: "s-1", message: "unknown architecture" })
    );
    session.drain(view);
    expect(view.warning).toBe("unknown architecture");
    expect(view.state?.step).toBe(0);
  });

  it("raises the reconnect banner on close and clears it after reconnect", () => {
    const stubs: StubSocket[] = [];
    const session = new SessionSocket("ws://test", () => {
      const stub = new StubSocket();
      stubs.push(stub);
      return stub;
    });
    const view = createViewState();

    session.connect();
    stubs[0]!.onopen?.();
    stubs[0]!.deliver(stateFrameText(0));
    session.drain(view);
    expect(view.reconnectBanner).toBe(false);

    stubs[0]!.close();
    session.drain(view);
    expect(view.reconnectBanner).toBe(true);
    expect(view.state?.step).toBe(0);

    session.connect();
    stubs[1]!.onopen?.();
    stubs[1]!.deliver(stateFrameText(1));
    session.drain(view);
    expect(view.reconnectBanner).toBe(false);
    expect(view.state?.step).toBe(1);
  });
});
