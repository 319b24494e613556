"""Command-line entry points.

rtkar-eval   run / fixture / compare  (semi-dynamic evaluation harness)
rtkar-relay  serve                     (relay server, optionally with the
                                        embedded scenario runtime)
"""

from __future__ import annotations

import argparse
import asyncio
import sys
from pathlib import Path

from .evalharness import replay_fixture, run_scenario
from .scenario import load_config, reference_scenario


def eval_main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="rtkar-eval",
                                     description="semi-dynamic tracking evaluation")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario and write CSV artifacts")
    p_run.add_argument("--config", help="scenario YAML (default: built-in reference scenario)")
    p_run.add_argument("--seed", type=int, default=None, help="override config seed")
    p_run.add_argument("--out", help="output directory for report/CSV artifacts")

    sub.add_parser("fixture", help="print the report over the published per-location errors")

    p_cmp = sub.add_parser("compare", help="diff two samples CSV files")
    p_cmp.add_argument("--a", required=True)
    p_cmp.add_argument("--b", required=True)

    args = parser.parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "fixture":
        return _cmd_fixture()
    return _cmd_compare(args)


def _cmd_run(args) -> int:
    if args.config:
        config = load_config(args.config)
    else:
        config = reference_scenario()
    if args.seed is not None:
        from dataclasses import replace
        config = replace(config, seed=args.seed)
    result = run_scenario(config)
    print(result.report_text, end="")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "samples.csv").write_text(result.samples_csv)
        (out / "summary.csv").write_text(result.summary_csv)
        (out / "report.txt").write_text(result.report_text)
        print(f"artifacts written to {out}")
    return 0


def _cmd_fixture() -> int:
    print(replay_fixture().text(), end="")
    return 0


def _cmd_compare(args) -> int:
    a_lines = Path(args.a).read_text().splitlines()
    b_lines = Path(args.b).read_text().splitlines()
    diffs = []
    for i in range(max(len(a_lines), len(b_lines))):
        la = a_lines[i] if i < len(a_lines) else "<missing>"
        lb = b_lines[i] if i < len(b_lines) else "<missing>"
        if la != lb:
            diffs.append(f"line {i + 1}:\n  a: {la}\n  b: {lb}")
    if diffs:
        print(f"{len(diffs)} differing line(s)")
        print("\n".join(diffs))
        return 1
    print("identical")
    return 0


def relay_main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="rtkar-relay", description="position relay server")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("serve", help="run the relay")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=4710)
    p.add_argument("--ws-port", type=int, default=4711)
    p.add_argument("--min-interval-ms", type=float, default=100.0)
    p.add_argument("--queue-bound", type=int, default=256)
    p.add_argument("--metrics-interval-s", type=float, default=0.0)
    p.add_argument("--scenario", help="scenario YAML enabling the embedded simulator "
                                      "(default scenario if the flag is given with no value)",
                   nargs="?", const="", default=None)
    p.add_argument("--out", help="directory for the server-side samples CSV on shutdown")
    args = parser.parse_args(argv)

    runtime_config = None
    if args.scenario is not None:
        runtime_config = load_config(args.scenario) if args.scenario else reference_scenario()

    from .server import RelayServer

    async def main():
        server = RelayServer(host=args.host, port=args.port, ws_port=args.ws_port,
                             min_interval_ms=args.min_interval_ms,
                             queue_bound=args.queue_bound,
                             metrics_interval_s=args.metrics_interval_s,
                             runtime_config=runtime_config)
        await server.start()
        print(f"relay listening on tcp {args.host}:{server.tcp_port}"
              + (f", ws {args.host}:{server.websocket_port}" if args.ws_port else ""))
        try:
            await asyncio.Event().wait()
        finally:
            if args.out and server.runtime is not None:
                out = Path(args.out)
                out.mkdir(parents=True, exist_ok=True)
                (out / "samples.csv").write_text(server.runtime.samples_csv())
            await server.stop()

    try:
        asyncio.run(main())
    except KeyboardInterrupt:
        pass
    return 0


if __name__ == "__main__":
    sys.exit(eval_main())
