// Browser wiring: buttons -> commands, state -> DOM + canvas plot.
// All positions come from the relay's state broadcasts; the plot is a plain
// top-down east/north view centered on the calibration reference.

import { ConsoleClient } from "./client.js";
import { buildSamplesCsv } from "./export.js";
import { canExport, canMark, ConsoleState } from "./state.js";

const MARKER_COLORS: Record<string, string> = {
  truth: "#222222",
  RTK: "#1c7c2e",
  GPS: "#c0392b",
};

function wsUrl(): string {
  const proto = location.protocol === "https:" ? "wss:" : "ws:";
  return `${proto}//${location.hostname}:4711/`;
}

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (node === null) throw new Error(`missing element #${id}`);
  return node as T;
}

function drawPlot(canvas: HTMLCanvasElement, state: ConsoleState): void {
  const ctx = canvas.getContext("2d");
  if (ctx === null) return;
  const w = canvas.width;
  const h = canvas.height;
  ctx.clearRect(0, 0, w, h);

  const points: { name: string; e: number; n: number }[] = [];
  if (state.truthEnu !== null) {
    points.push({ name: "truth", e: state.truthEnu[0], n: state.truthEnu[1] });
  }
  for (const [kind, [e, n]] of Object.entries(state.overlays)) {
    points.push({ name: kind, e, n });
  }
  // scale so all markers fit with a margin; at least a 20 m window
  let span = 20;
  for (const p of points) {
    span = Math.max(span, Math.abs(p.e) * 2.2, Math.abs(p.n) * 2.2);
  }
  const scale = Math.min(w, h) / span;
  const toX = (e: number) => w / 2 + e * scale;
  const toY = (n: number) => h / 2 - n * scale;

  ctx.strokeStyle = "#dddddd";
  ctx.beginPath();
  ctx.moveTo(0, h / 2);
  ctx.lineTo(w, h / 2);
  ctx.moveTo(w / 2, 0);
  ctx.lineTo(w / 2, h);
  ctx.stroke();

  ctx.font = "12px sans-serif";
  for (const p of points) {
    ctx.fillStyle = MARKER_COLORS[p.name] ?? "#888888";
    ctx.beginPath();
    ctx.arc(toX(p.e), toY(p.n), 5, 0, 2 * Math.PI);
    ctx.fill();
    ctx.fillText(p.name, toX(p.e) + 8, toY(p.n) - 8);
  }
}

function render(state: ConsoleState): void {
  el<HTMLSpanElement>("status").textContent =
    state.connection + (state.connection === "disconnected" ? " (retrying)" : "");
  el<HTMLSpanElement>("rover").textContent = state.paused ? "paused" : "driving";
  el<HTMLSpanElement>("calib").textContent = state.calibrated ? "calibrated" : "not calibrated";
  el<HTMLButtonElement>("mark").disabled = !canMark(state);
  el<HTMLButtonElement>("export").disabled = !canExport(state);

  const rows = state.samples
    .map((s) => `<tr><td>${s.location_id}</td><td>${s.sensor_kind}</td><td>${s.error_m.toFixed(3)}</td></tr>`)
    .join("");
  el<HTMLTableSectionElement>("samples").innerHTML = rows;

  const m = state.metrics;
  el<HTMLSpanElement>("metrics").textContent =
    m === null
      ? "-"
      : `accepted ${Object.values(m.accepted).reduce((a, b) => a + b, 0)}, ` +
        `dropped ${Object.values(m.dropped).reduce((a, b) => a + b, 0)}, nacks ${m.nacks}`;

  const toast = state.toasts[state.toasts.length - 1];
  el<HTMLSpanElement>("toast").textContent = toast === undefined ? "" : toast.text;

  drawPlot(el<HTMLCanvasElement>("plot"), state);
}

export function main(): void {
  const client = new ConsoleClient(wsUrl(), { socketCtor: WebSocket });
  let renderQueued = false;
  client.onChange(() => {
    // coalesce bursts to one render per animation frame
    if (renderQueued) return;
    renderQueued = true;
    requestAnimationFrame(() => {
      renderQueued = false;
      render(client.state);
    });
  });

  el<HTMLButtonElement>("drive").onclick = () => {
    const heading = Number(el<HTMLInputElement>("heading").value);
    const speed = Number(el<HTMLInputElement>("speed").value);
    client.sendDrive(heading, speed);
  };
  el<HTMLButtonElement>("pause").onclick = () => client.sendPause();
  el<HTMLButtonElement>("resume").onclick = () => client.sendResume();
  el<HTMLButtonElement>("calibrate").onclick = () => client.sendCalibrate();
  el<HTMLButtonElement>("mark").onclick = () => {
    client.sendMark(el<HTMLInputElement>("label").value || "sample");
  };
  el<HTMLButtonElement>("export").onclick = () => {
    const blob = new Blob([buildSamplesCsv(client.state.samples)], { type: "text/csv" });
    const link = document.createElement("a");
    link.href = URL.createObjectURL(blob);
    link.download = "samples.csv";
    link.click();
    URL.revokeObjectURL(link.href);
  };

  client.connect();
}

if (typeof document !== "undefined") {
  document.addEventListener("DOMContentLoaded", main);
}
