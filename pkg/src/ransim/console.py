"""Interactive command handler and the ``ransim`` CLI entry point.

The console reads one verb per line (scriptable when stdin is piped; a
numbered menu appears on interactive terminals). Mutating verbs enqueue a
command and, when the console is the only clock driver, advance one tick so
the effect is visible immediately; every mutation lands in the run record
with origin "console".
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from typing import IO, Optional

from . import metrics as ms
from .engine import (Command, CommandKind, Engine, Scenario, SimRunner,
                     load_scenario, rush_hour_scenario)
from .errors import SimError
from .gateway import serve
from .topology import default_config, load_config, merge_documents

VERBS = [
    "add_ue", "del_ue", "start_ue_traffic", "stop_ue_traffic",
    "set_ue_throughput", "ue_log", "loads", "handover_stats",
    "run_scenario", "pause", "resume", "step", "export", "quit",
]

_USAGE = {
    "add_ue": "add_ue [service_class]",
    "del_ue": "del_ue <ue_id>",
    "start_ue_traffic": "start_ue_traffic <ue_id>",
    "stop_ue_traffic": "stop_ue_traffic <ue_id>",
    "set_ue_throughput": "set_ue_throughput <ue_id> <bytes_per_second>",
    "ue_log": "ue_log <ue_id>",
    "loads": "loads",
    "handover_stats": "handover_stats",
    "run_scenario": "run_scenario <path|rush_hour> [ticks]",
    "pause": "pause",
    "resume": "resume",
    "step": "step [n]",
    "export": "export <path>",
    "quit": "quit",
}


def repl(engine: Engine, stdin: IO[str] = sys.stdin,
         stdout: IO[str] = sys.stdout, auto_tick: bool = True) -> int:
    """Run the command loop until quit or end of input. Returns 0."""
    interactive = hasattr(stdin, "isatty") and stdin.isatty()
    if interactive:
        _print_menu(stdout)
    while True:
        if interactive:
            stdout.write("> ")
            stdout.flush()
        line = stdin.readline()
        if not line:
            break
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        verb = parts[0]
        if interactive and verb.isdigit() and 1 <= int(verb) <= len(VERBS):
            verb = VERBS[int(verb) - 1]
        args = parts[1:]
        if verb == "quit":
            break
        handler = _HANDLERS.get(verb)
        if handler is None:
            stdout.write(f"unknown command: {verb}\n")
            stdout.write("commands: " + ", ".join(VERBS) + "\n")
            continue
        try:
            handler(engine, args, stdout, auto_tick)
        except _ArgError as exc:
            stdout.write(f"usage: {exc}\n")
        except SimError as exc:
            stdout.write(f"error: {exc}\n")
    return 0


class _ArgError(Exception):
    pass


def _print_menu(out: IO[str]) -> None:
    out.write("commands:\n")
    for index, verb in enumerate(VERBS, start=1):
        out.write(f"  {index:2d}. {_USAGE[verb]}\n")


def _mutate(engine: Engine, kind: CommandKind, payload: dict,
            auto_tick: bool) -> dict:
    """Queue a console command; when we own the clock, apply it now."""
    engine.submit(Command(kind=kind, payload=payload, origin="console"))
    if auto_tick:
        engine.tick()
        return engine.command_log[-1]
    return {"queued": True}


def _cmd_add_ue(engine, args, out, auto_tick):
    service_class = args[0] if args else "data"
    entry = _mutate(engine, CommandKind.ADD_UE,
                    {"service_class": service_class}, auto_tick)
    if entry.get("ok"):
        result = entry["result"]
        out.write(f"added {result['ue_id']} -> {result['sector_id']}\n")
    elif "error" in entry:
        out.write(f"error: {entry['error']}\n")
    else:
        out.write("queued add_ue\n")


def _cmd_del_ue(engine, args, out, auto_tick):
    if len(args) != 1:
        raise _ArgError(_USAGE["del_ue"])
    entry = _mutate(engine, CommandKind.DEL_UE, {"ue_id": args[0]}, auto_tick)
    if entry.get("ok"):
        out.write(f"deleted {args[0]}\n")
    elif "error" in entry:
        out.write(f"error: {entry['error']}\n")
    else:
        out.write(f"queued del_ue {args[0]}\n")


def _cmd_traffic(kind: CommandKind, word: str):
    def handler(engine, args, out, auto_tick):
        if len(args) != 1:
            raise _ArgError(_USAGE[kind.value])
        entry = _mutate(engine, kind, {"ue_id": args[0]}, auto_tick)
        if entry.get("ok"):
            out.write(f"{word} traffic for {args[0]}\n")
        elif "error" in entry:
            out.write(f"error: {entry['error']}\n")
        else:
            out.write(f"queued {kind.value} {args[0]}\n")
    return handler


def _cmd_set_throughput(engine, args, out, auto_tick):
    if len(args) != 2:
        raise _ArgError(_USAGE["set_ue_throughput"])
    try:
        value = float(args[1])
    except ValueError:
        raise _ArgError(_USAGE["set_ue_throughput"]) from None
    entry = _mutate(engine, CommandKind.SET_UE_THROUGHPUT,
                    {"ue_id": args[0], "throughput_bps": value}, auto_tick)
    if entry.get("ok"):
        out.write(f"pinned {args[0]} to {value:g} B/s\n")
    elif "error" in entry:
        out.write(f"error: {entry['error']}\n")
    else:
        out.write(f"queued set_ue_throughput {args[0]}\n")


def _cmd_ue_log(engine, args, out, auto_tick):
    if len(args) != 1:
        raise _ArgError(_USAGE["ue_log"])
    ue_id = args[0]
    if ue_id not in engine.network.ues:
        out.write(f"error: unknown ue {ue_id!r}\n")
        return
    points = engine.store.query(ms.UE_KPIS, {"ue": ue_id})
    if not points:
        out.write(f"no samples recorded for {ue_id}\n")
        return
    for point in points[-10:]:
        fields = dict(point.fields)
        tick = engine.store.tick_of(point.timestamp)
        out.write(
            f"tick {tick}: throughput={fields['throughput']:.0f} B/s "
            f"delay={fields['delay'] * 1000:.3f} ms "
            f"jitter={fields['jitter'] * 1000:.4f} ms "
            f"loss={fields['packet_loss'] * 100:.3f}%\n")


def _cmd_loads(engine, args, out, auto_tick):
    snap = engine.snapshot()
    loads = snap["loads"]
    out.write(f"tick {snap['tick']}: network load {loads['network_load']:.2f}%\n")
    for gnb_id, load in loads["per_gnb"].items():
        out.write(f"  {gnb_id}: {load:.2f}%\n")
    if loads["per_sector"]:
        busiest = max(loads["per_sector"].items(), key=lambda kv: (kv[1], kv[0]))
        out.write(f"  busiest sector {busiest[0]}: {busiest[1]:.2f}%\n")


def _cmd_handover_stats(engine, args, out, auto_tick):
    stats = engine.stats()
    out.write(f"attempts {stats.attempts}, successes {stats.successes}, "
              f"failures {stats.failures}\n")
    if stats.attempts:
        out.write(f"hsr {stats.hsr:.4f}, hfr {stats.hfr:.4f}\n")
    else:
        out.write("hsr undefined, hfr undefined\n")


def _cmd_run_scenario(engine, args, out, auto_tick):
    if not args:
        raise _ArgError(_USAGE["run_scenario"])
    if args[0] == "rush_hour":
        try:
            duration = int(args[1]) if len(args) > 1 else 300
        except ValueError:
            raise _ArgError(_USAGE["run_scenario"]) from None
        scenario = rush_hour_scenario(duration=duration)
    else:
        with open(args[0], encoding="utf-8") as fh:
            scenario = load_scenario(fh.read())
    start = engine.tick_count
    engine.install_scenario(scenario)
    engine.step(scenario.duration)
    events = [e for e in engine.handover_events if e.start_tick >= start]
    out.write(f"ran {scenario.name!r} for {scenario.duration} ticks, "
              f"{len(events)} handover(s)\n")


def _cmd_pause(engine, args, out, auto_tick):
    engine.set_paused(True, origin="console")
    out.write("paused\n")


def _cmd_resume(engine, args, out, auto_tick):
    engine.set_paused(False, origin="console")
    out.write("resumed\n")


def _cmd_step(engine, args, out, auto_tick):
    n = 1
    if args:
        try:
            n = int(args[0])
        except ValueError:
            raise _ArgError(_USAGE["step"]) from None
    engine.step(n)
    out.write(f"tick = {engine.tick_count}\n")


def _cmd_export(engine, args, out, auto_tick):
    if len(args) != 1:
        raise _ArgError(_USAGE["export"])
    text = engine.store.export_line_protocol()
    with open(args[0], "w", encoding="utf-8") as fh:
        fh.write(text)
    out.write(f"exported {len(text.splitlines())} points to {args[0]}\n")


_HANDLERS = {
    "add_ue": _cmd_add_ue,
    "del_ue": _cmd_del_ue,
    "start_ue_traffic": _cmd_traffic(CommandKind.START_UE_TRAFFIC, "started"),
    "stop_ue_traffic": _cmd_traffic(CommandKind.STOP_UE_TRAFFIC, "stopped"),
    "set_ue_throughput": _cmd_set_throughput,
    "ue_log": _cmd_ue_log,
    "loads": _cmd_loads,
    "handover_stats": _cmd_handover_stats,
    "run_scenario": _cmd_run_scenario,
    "pause": _cmd_pause,
    "resume": _cmd_resume,
    "step": _cmd_step,
    "export": _cmd_export,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ransim",
        description="Deterministic RAN simulator with threshold handover.")
    parser.add_argument("--config", nargs="+", metavar="PATH",
                        help="configuration document(s); merged when several")
    parser.add_argument("--scenario", metavar="PATH",
                        help="scenario file, or the literal 'rush_hour'")
    parser.add_argument("--seed", type=int, help="override the config seed")
    parser.add_argument("--ticks", type=int,
                        help="run this many ticks before the console/exit")
    parser.add_argument("--api-bind", metavar="HOST:PORT",
                        help="serve the HTTP gateway (default port 8080; "
                             "env RANSIM_PORT overrides)")
    parser.add_argument("--headless", action="store_true",
                        help="no interactive console")
    parser.add_argument("--export", metavar="PATH",
                        help="write the line-protocol export on exit")
    parser.add_argument("--paced", action="store_true",
                        help="advance one tick per wall-clock second")
    parser.add_argument("--speed", type=float, default=1.0,
                        help="pacing multiplier for --paced (default 1.0)")
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.config:
            texts = []
            for path in args.config:
                with open(path, encoding="utf-8") as fh:
                    texts.append(fh.read())
            cfg = load_config(merge_documents(texts))
        else:
            cfg = load_config(json.dumps(default_config(seed=args.seed or 0)))
        if args.seed is not None:
            cfg = replace(cfg, seed=args.seed)

        scenario: Optional[Scenario] = None
        if args.scenario == "rush_hour":
            scenario = rush_hour_scenario(duration=args.ticks or 300)
        elif args.scenario:
            with open(args.scenario, encoding="utf-8") as fh:
                scenario = load_scenario(fh.read())

        engine = Engine(cfg)
    except (OSError, SimError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    gateway = None
    runner = None
    try:
        if args.api_bind:
            bind = args.api_bind
            port_override = os.environ.get("RANSIM_PORT")
            if port_override:
                bind = f"{bind.partition(':')[0]}:{port_override}"
            gateway = serve(engine, bind)
            host, port = gateway.address
            print(f"gateway listening on http://{host}:{port}")
        if args.paced:
            runner = SimRunner(engine, rate_hz=args.speed)
            runner.start()

        if scenario is not None:
            engine.run(scenario)
        elif args.ticks:
            engine.step(args.ticks)

        if not args.headless:
            repl(engine, auto_tick=not args.paced)
        elif gateway is not None and scenario is None and not args.ticks:
            gateway.wait()
    finally:
        if runner is not None:
            runner.stop()
        if args.export:
            with open(args.export, "w", encoding="utf-8") as fh:
                fh.write(engine.store.export_line_protocol())
        if gateway is not None:
            gateway.stop()
    return 0


if __name__ == "__main__":
    sys.exit(main())
