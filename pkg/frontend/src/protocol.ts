/**
 * Wire schemas for the teleop protocol, mirrored field for field from the
 * server's frame builders (see docs/PROTOCOL.md in the repo root).  Every
 * inbound frame is parsed through these before it touches view state, and
 * every outbound message is validated before it is written to the socket,
 * so a drifting server or a buggy input path fails loudly instead of
 * rendering garbage.
 *
 * The server emits strict JSON: non-finite floats (an infinite
 * min_separation on an empty arena, an unreached goal's time) arrive as
 * null, which the schemas spell as number-or-null.
 */

import { z } from "zod";

export const vec2 = z.tuple([z.number(), z.number()]);
const numberOrNull = z.union([z.number(), z.null()]);

export const sceneSchema = z
  .object({
    kind: z.string().min(1),
    arena: z.tuple([z.number(), z.number(), z.number(), z.number()]),
    start: vec2,
    goal: vec2,
    obstacles: z.array(vec2),
  })
  .strict();

export const scenarioSpecSchema = z
  .object({
    kind: z.string().min(1),
    crowd_density: z.number(),
    crowd_cooperation: z.number(),
    operator_fidelity_sigma: z.number(),
    operator_noise_std: z.number(),
    autonomy_reliability: z.number(),
    semantic_event_step: z.union([z.number().int(), z.null()]),
    max_steps: z.number().int().positive(),
  })
  .strict();

export const stateFrameSchema = z
  .object({
    type: z.literal("state"),
    session_id: z.string().min(1),
    step: z.number().int().nonnegative(),
    robot: vec2,
    crowd: z.array(vec2),
    event_fired: z.boolean(),
    architecture: z.string().min(1),
    metrics: z
      .object({
        elapsed: z.number(),
        path_length: z.number(),
        min_separation: numberOrNull,
      })
      .strict(),
    scene: sceneSchema,
  })
  .strict();

export const metricReportSchema = z
  .object({
    spec: scenarioSpecSchema,
    architecture: z.string().min(1),
    seed: z.number().int(),
    min_separation: numberOrNull,
    collision: z.boolean(),
    path_ratio: numberOrNull,
    time_to_goal: numberOrNull,
    frozen: z.boolean(),
    termination: z.string().min(1),
  })
  .strict();

export const verdictSchema = z
  .object({
    path_ratio_ok: z.boolean(),
    time_ok: z.boolean(),
    collision_ok: z.boolean(),
    passed: z.boolean(),
  })
  .strict();

export const transcriptSchema = z
  .object({
    session_id: z.string().min(1),
    spec: scenarioSpecSchema,
    seed: z.number().int(),
    architecture: z.string().min(1),
    ticks: z.array(
      z
        .object({
          step: z.number().int().nonnegative(),
          dx: z.number(),
          dy: z.number(),
          architecture: z.string().min(1),
        })
        .strict()
    ),
  })
  .strict();

export const endFrameSchema = z
  .object({
    type: z.literal("end"),
    session_id: z.string().min(1),
    termination: z.string().min(1),
    report: metricReportSchema,
    baselines: z
      .object({
        human_only: metricReportSchema,
        autonomy_only: metricReportSchema,
      })
      .strict(),
    verdict: verdictSchema,
    transcript: transcriptSchema,
  })
  .strict();

export const errorFrameSchema = z
  .object({
    type: z.literal("error"),
    session_id: z.string().min(1),
    message: z.string(),
  })
  .strict();

export const serverFrameSchema = z.discriminatedUnion("type", [
  stateFrameSchema,
  endFrameSchema,
  errorFrameSchema,
]);

const UNIT_SLACK = 1e-9;

export const inputMessageSchema = z
  .object({
    type: z.literal("input"),
    dx: z.number().finite(),
    dy: z.number().finite(),
  })
  .strict()
  .refine((m) => Math.hypot(m.dx, m.dy) <= 1 + UNIT_SLACK, {
    message: "input deflection must lie in the unit disc",
  });

export const modeMessageSchema = z
  .object({
    type: z.literal("mode"),
    architecture: z.string().min(1),
  })
  .strict();

export const clientMessageSchema = z.union([inputMessageSchema, modeMessageSchema]);

export type Scene = z.infer<typeof sceneSchema>;
export type StateFrame = z.infer<typeof stateFrameSchema>;
export type EndFrame = z.infer<typeof endFrameSchema>;
export type ErrorFrame = z.infer<typeof errorFrameSchema>;
export type ServerFrame = z.infer<typeof serverFrameSchema>;
export type InputMessage = z.infer<typeof inputMessageSchema>;
export type ModeMessage = z.infer<typeof modeMessageSchema>;
export type ClientMessage = z.infer<typeof clientMessageSchema>;

/** Parse one inbound text frame; throws on anything off-schema. */
export function parseServerFrame(text: string): ServerFrame {
  return serverFrameSchema.parse(JSON.parse(text));
}

/** Serialize one outbound message, validating it first. */
export function encodeClientMessage(message: ClientMessage): string {
  return JSON.stringify(clientMessageSchema.parse(message));
}
