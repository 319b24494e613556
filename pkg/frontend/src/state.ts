// Console state is a pure fold over the received envelope stream: the
// reducer never touches the clock, the socket, or any geodesy math, so the
// same envelopes always produce the same state.

import { Envelope, RuntimeState, SampleRow } from "./protocol.js";

export type ConnectionStatus = "connecting" | "connected" | "disconnected";

export interface Toast {
  kind: "nack" | "info";
  text: string;
}

export interface ConsoleState {
  connection: ConnectionStatus;
  paused: boolean;
  calibrated: boolean;
  truthEnu: [number, number] | null;
  overlays: Record<string, [number, number]>;
  samples: SampleRow[];
  metrics: RuntimeState["metrics"] | null;
  positionCount: Record<string, number>; // raw POSITION envelopes seen per sensor
  toasts: Toast[];
}

export const initialState: ConsoleState = {
  connection: "connecting",
  paused: false,
  calibrated: false,
  truthEnu: null,
  overlays: {},
  samples: [],
  metrics: null,
  positionCount: {},
  toasts: [],
};

export function setConnection(state: ConsoleState, connection: ConnectionStatus): ConsoleState {
  return { ...state, connection };
}

/** Mark is only allowed at a quiescent point: connected, calibrated, paused. */
export function canMark(state: ConsoleState): boolean {
  return state.connection === "connected" && state.calibrated && state.paused;
}

export function canExport(state: ConsoleState): boolean {
  return state.samples.length > 0;
}

export function reduce(state: ConsoleState, env: Envelope): ConsoleState {
  switch (env.msg_type) {
    case "POSITION": {
      const counts = { ...state.positionCount };
      counts[env.sensor_id] = (counts[env.sensor_id] ?? 0) + 1;
      return { ...state, positionCount: counts };
    }
    case "SAMPLE_MARK":
      return reduceSampleMark(state, env);
    case "METRICS":
      return reduceMetrics(state, env);
    default:
      return state;
  }
}

function reduceSampleMark(state: ConsoleState, env: Envelope): ConsoleState {
  let obj: { rows?: SampleRow[] };
  try {
    obj = JSON.parse(env.payload);
  } catch {
    return state;
  }
  if (!Array.isArray(obj.rows)) {
    return state;
  }
  return { ...state, samples: [...state.samples, ...obj.rows] };
}

function reduceMetrics(state: ConsoleState, env: Envelope): ConsoleState {
  let obj: { state?: RuntimeState; nack?: string; mark_rejected?: string; reason?: string };
  try {
    obj = JSON.parse(env.payload);
  } catch {
    return state;
  }
  if (typeof obj.nack === "string") {
    return { ...state, toasts: [...state.toasts, { kind: "nack", text: obj.nack }] };
  }
  if (typeof obj.mark_rejected === "string") {
    const text = `mark ${obj.mark_rejected || "(unnamed)"} rejected: ${obj.reason ?? "unknown"}`;
    return { ...state, toasts: [...state.toasts, { kind: "nack", text }] };
  }
  const rs = obj.state;
  if (rs === undefined) {
    return state;
  }
  return {
    ...state,
    paused: rs.paused,
    calibrated: rs.calibrated,
    truthEnu: rs.truth_enu,
    overlays: rs.overlays,
    metrics: rs.metrics,
  };
}
