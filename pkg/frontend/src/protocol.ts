// Envelope protocol shared with the relay: one JSON object per WebSocket
// text frame, keys sorted so identical envelopes serialize identically.

export const MSG_TYPES = ["HELLO", "POSITION", "COMMAND", "SAMPLE_MARK", "METRICS"] as const;
export type MsgType = (typeof MSG_TYPES)[number];
export type Role = "sensor" | "hmd" | "console";

export interface Envelope {
  msg_type: MsgType;
  role: Role;
  sensor_id: string;
  seq: number;
  sent_ms: number;
  payload: string;
}

export interface SampleRow {
  location_id: string;
  sensor_kind: string;
  error_m: number;
  timestamp_ms: number;
  csv: string; // server-formatted samples.csv row, exported verbatim
}

/** Runtime state broadcast (METRICS envelope, payload {"state": ...}). */
export interface RuntimeState {
  paused: boolean;
  calibrated: boolean;
  truth_enu: [number, number];
  overlays: Record<string, [number, number]>;
  metrics: {
    accepted: Record<string, number>;
    dropped: Record<string, number>;
    nacks: number;
    latency_ms: { count: number; p50: number; p99: number; max: number };
  };
  marks: number;
  event?: string;
}

export function encodeEnvelope(env: Envelope): string {
  // Keys emitted in sorted order to match the relay's canonical form.
  return JSON.stringify({
    msg_type: env.msg_type,
    payload: env.payload,
    role: env.role,
    seq: env.seq,
    sensor_id: env.sensor_id,
    sent_ms: env.sent_ms,
  });
}

export function decodeEnvelope(line: string): Envelope {
  const obj = JSON.parse(line);
  if (typeof obj !== "object" || obj === null) {
    throw new Error("envelope must be a JSON object");
  }
  if (!MSG_TYPES.includes(obj.msg_type)) {
    throw new Error(`unknown msg_type ${String(obj.msg_type)}`);
  }
  return {
    msg_type: obj.msg_type,
    role: obj.role,
    sensor_id: String(obj.sensor_id ?? ""),
    seq: Number(obj.seq ?? 0),
    sent_ms: Number(obj.sent_ms ?? 0),
    payload: String(obj.payload ?? ""),
  };
}

export function helloEnvelope(sentMs: number): Envelope {
  return { msg_type: "HELLO", role: "console", sensor_id: "console", seq: 1, sent_ms: sentMs, payload: "" };
}

/** Command text grammar understood by the relay. */
export function driveCommand(headingDeg: number, speedMps: number): string {
  return `drive ${headingDeg} ${speedMps}`;
}

export function commandEnvelope(text: string, seq: number, sentMs: number): Envelope {
  return { msg_type: "COMMAND", role: "console", sensor_id: "console", seq, sent_ms: sentMs, payload: text };
}
