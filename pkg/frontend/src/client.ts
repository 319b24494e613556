// Relay session for the console role. Holds the single source of truth for
// ConsoleState and notifies listeners on every change. The WebSocket
// constructor is injectable so tests (and Node) can supply their own.

import {
  commandEnvelope,
  decodeEnvelope,
  driveCommand,
  encodeEnvelope,
  helloEnvelope,
} from "./protocol.js";
import { canMark, ConsoleState, initialState, reduce, setConnection } from "./state.js";

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: ((ev: any) => void) | null;
  onmessage: ((ev: any) => void) | null;
  onclose: ((ev: any) => void) | null;
  onerror: ((ev: any) => void) | null;
}

export type SocketCtor = new (url: string) => SocketLike;

export interface ClientOptions {
  socketCtor: SocketCtor;
  now?: () => number;
  // reconnect backoff: initial delay doubles up to the max
  backoffInitialMs?: number;
  backoffMaxMs?: number;
  setTimeoutFn?: (fn: () => void, ms: number) => unknown;
}

export class ConsoleClient {
  state: ConsoleState = initialState;

  private readonly url: string;
  private readonly opts: Required<ClientOptions>;
  private socket: SocketLike | null = null;
  private listeners: ((s: ConsoleState) => void)[] = [];
  private seq = 1; // HELLO took seq 1
  private backoffMs: number;
  private stopped = false;

  constructor(url: string, opts: ClientOptions) {
    this.url = url;
    this.opts = {
      socketCtor: opts.socketCtor,
      now: opts.now ?? (() => Date.now()),
      backoffInitialMs: opts.backoffInitialMs ?? 500,
      backoffMaxMs: opts.backoffMaxMs ?? 8000,
      setTimeoutFn: opts.setTimeoutFn ?? ((fn, ms) => setTimeout(fn, ms)),
    };
    this.backoffMs = this.opts.backoffInitialMs;
  }

  onChange(listener: (s: ConsoleState) => void): void {
    this.listeners.push(listener);
  }

  connect(): void {
    if (this.stopped) return;
    this.setState(setConnection(this.state, "connecting"));
    const socket = new this.opts.socketCtor(this.url);
    this.socket = socket;
    socket.onopen = () => {
      socket.send(encodeEnvelope(helloEnvelope(this.opts.now())));
      this.backoffMs = this.opts.backoffInitialMs;
      this.setState(setConnection(this.state, "connected"));
    };
    socket.onmessage = (ev) => {
      try {
        this.setState(reduce(this.state, decodeEnvelope(String(ev.data))));
      } catch {
        // tolerate junk frames; the relay NACKs malformed traffic anyway
      }
    };
    socket.onerror = () => socket.close();
    socket.onclose = () => {
      if (this.socket !== socket) return; // superseded by a reconnect
      this.socket = null;
      this.setState(setConnection(this.state, "disconnected"));
      if (!this.stopped) {
        this.opts.setTimeoutFn(() => this.connect(), this.backoffMs);
        this.backoffMs = Math.min(this.backoffMs * 2, this.opts.backoffMaxMs);
      }
    };
  }

  close(): void {
    this.stopped = true;
    this.socket?.close();
    this.socket = null;
  }

  sendDrive(headingDeg: number, speedMps: number): void {
    this.sendCommand(driveCommand(headingDeg, speedMps));
  }

  sendPause(): void {
    this.sendCommand("pause");
  }

  sendResume(): void {
    this.sendCommand("resume");
  }

  sendCalibrate(): void {
    this.sendCommand("calibrate");
  }

  /** Mark a sample; gated on the paused+calibrated precondition. */
  sendMark(label: string): void {
    if (!canMark(this.state)) {
      throw new Error("mark requires a connected, calibrated, paused rover");
    }
    this.sendCommand(`mark_sample ${label}`);
  }

  private sendCommand(text: string): void {
    if (this.state.connection !== "connected" || this.socket === null) {
      throw new Error("not connected");
    }
    this.seq += 1;
    this.socket.send(encodeEnvelope(commandEnvelope(text, this.seq, this.opts.now())));
  }

  private setState(next: ConsoleState): void {
    this.state = next;
    for (const listener of this.listeners) {
      listener(next);
    }
  }
}
