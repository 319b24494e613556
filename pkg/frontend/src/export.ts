// Samples export. The error values are computed and formatted server-side;
// the console concatenates the verbatim `csv` row strings, so the exported
// file is byte-identical to the relay's own samples.csv.

import { SampleRow } from "./protocol.js";

export const SAMPLES_CSV_HEADER = "location_id,sensor_kind,error_m,timestamp_ms";

export function buildSamplesCsv(samples: SampleRow[]): string {
  if (samples.length === 0) {
    throw new Error("nothing to export: no marked samples");
  }
  return [SAMPLES_CSV_HEADER, ...samples.map((s) => s.csv)].join("\n") + "\n";
}
