"""HTTP control surface over a running engine.

Exposes network state, per-level loads, the metrics export, and the command
verbs as plain JSON-over-HTTP, plus a server-sent-events feed of journal
entries (command acknowledgments, handovers, per-tick summaries) with
monotone sequence numbers for resumption.

The gateway never touches network state directly: every mutation is queued
as a Command and acknowledged with the tick at which it will apply; reads
serve the snapshot published at the last tick boundary.
"""

from __future__ import annotations

import json
import re
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Optional
from urllib.parse import parse_qs, urlparse

from .engine import Command, CommandKind, Engine, SimRunner, rush_hour_scenario
from .errors import ParseError, ValidationError
from .traffic import profile_from_dict

_UE_TRAFFIC = re.compile(r"^/ues/([^/]+)/traffic$")
_UE = re.compile(r"^/ues/([^/]+)$")
_SECTOR = re.compile(r"^/sectors/([^/]+)$")


class Gateway:
    """Binds the HTTP server and owns its lifecycle."""

    def __init__(self, engine: Engine, runner: Optional[SimRunner] = None,
                 host: str = "127.0.0.1", port: int = 8080,
                 heartbeat_s: float = 5.0):
        self.engine = engine
        self.runner = runner
        self.heartbeat_s = heartbeat_s
        handler = _make_handler(self)
        self.httpd = ThreadingHTTPServer((host, port), handler)
        self.httpd.daemon_threads = True
        self._thread: Optional[threading.Thread] = None

    @property
    def address(self) -> tuple[str, int]:
        return self.httpd.server_address[:2]

    def start(self) -> None:
        self._thread = threading.Thread(target=self.httpd.serve_forever,
                                        kwargs={"poll_interval": 0.1},
                                        daemon=True)
        self._thread.start()

    def stop(self) -> None:
        self.httpd.shutdown()
        self.httpd.server_close()
        if self._thread is not None:
            self._thread.join(timeout=5)
            self._thread = None

    def serve_forever(self) -> None:
        self.httpd.serve_forever(poll_interval=0.1)

    def wait(self) -> None:
        """Block until the serving thread exits (Ctrl-C stops it)."""
        if self._thread is None:
            return
        try:
            while self._thread.is_alive():
                self._thread.join(timeout=0.5)
        except KeyboardInterrupt:
            self.stop()


def _make_handler(gateway: Gateway):
    engine = gateway.engine

    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        # Silence per-request stderr logging.
        def log_message(self, fmt, *args):
            pass

        def do_OPTIONS(self):
            self.send_response(204)
            self._cors()
            self.send_header("Content-Length", "0")
            self.end_headers()

        def do_GET(self):
            url = urlparse(self.path)
            snap = engine.snapshot()
            if url.path == "/":
                return self._json(200, {
                    "service": "ransim",
                    "tick": snap["tick"],
                    "endpoints": ["/network", "/loads", "/sectors/{id}",
                                  "/ues/{id}", "/stats/handover",
                                  "/metrics/export", "/sim", "/events"],
                })
            if url.path == "/network":
                return self._json(200, snap)
            if url.path == "/loads":
                return self._json(200, {"tick": snap["tick"], **snap["loads"]})
            match = _SECTOR.match(url.path)
            if match:
                sector = snap["sectors"].get(match.group(1))
                if sector is None:
                    return self._json(404, {"error": f"unknown sector {match.group(1)!r}"})
                return self._json(200, {"id": match.group(1),
                                        "tick": snap["tick"], **sector})
            match = _UE.match(url.path)
            if match:
                ue = snap["ues"].get(match.group(1))
                if ue is None:
                    return self._json(404, {"error": f"unknown ue {match.group(1)!r}"})
                return self._json(200, {"id": match.group(1),
                                        "tick": snap["tick"], **ue})
            if url.path == "/stats/handover":
                return self._json(200, {"tick": snap["tick"], **snap["stats"]})
            if url.path == "/metrics/export":
                query = parse_qs(url.query)
                start = _int_param(query, "start")
                end = _int_param(query, "end")
                text = engine.store.export_line_protocol(start, end)
                return self._text(200, text)
            if url.path == "/events":
                return self._stream_events(url)
            return self._json(404, {"error": f"no such path {url.path!r}"})

        def do_POST(self):
            url = urlparse(self.path)
            if url.path == "/ues":
                return self._enqueue_checked(CommandKind.ADD_UE, self._body())
            match = _UE_TRAFFIC.match(url.path)
            if match:
                ue_id = match.group(1)
                if ue_id not in engine.snapshot()["ues"]:
                    return self._json(404, {"error": f"unknown ue {ue_id!r}"})
                body = self._body()
                action = body.get("action")
                if action == "start":
                    kind = CommandKind.START_UE_TRAFFIC
                elif action == "stop":
                    kind = CommandKind.STOP_UE_TRAFFIC
                else:
                    return self._json(400, {"error": f"unknown action {action!r}"})
                return self._enqueue(kind, {"ue_id": ue_id})
            if url.path == "/sim":
                return self._sim_control(self._body())
            return self._json(404, {"error": f"no such path {url.path!r}"})

        def do_PATCH(self):
            url = urlparse(self.path)
            match = _UE.match(url.path)
            if match:
                return self._patch_ue(match.group(1), self._body())
            match = _SECTOR.match(url.path)
            if match:
                return self._patch_sector(match.group(1), self._body())
            return self._json(404, {"error": f"no such path {url.path!r}"})

        def do_DELETE(self):
            url = urlparse(self.path)
            match = _UE.match(url.path)
            if match:
                ue_id = match.group(1)
                if ue_id not in engine.snapshot()["ues"]:
                    return self._json(404, {"error": f"unknown ue {ue_id!r}"})
                return self._enqueue(CommandKind.DEL_UE, {"ue_id": ue_id})
            return self._json(404, {"error": f"no such path {url.path!r}"})

        # ---------------------------------------------------------- mutations

        def _patch_ue(self, ue_id: str, body: dict):
            if ue_id not in engine.snapshot()["ues"]:
                return self._json(404, {"error": f"unknown ue {ue_id!r}"})
            recognized = {"throughput_bps", "delay_s", "profile"}
            keys = recognized & set(body)
            if len(keys) != 1:
                return self._json(400, {"error": "need exactly one of "
                                                 "throughput_bps, delay_s, profile"})
            key = keys.pop()
            if key == "throughput_bps":
                value = _number(body[key])
                if value is None or value < 0:
                    return self._json(400, {"error": "throughput_bps must be a "
                                                     "non-negative number"})
                return self._enqueue(CommandKind.SET_UE_THROUGHPUT,
                                     {"ue_id": ue_id, "throughput_bps": value})
            if key == "delay_s":
                value = _number(body[key])
                if value is None or value < 0:
                    return self._json(400, {"error": "delay_s must be a "
                                                     "non-negative number"})
                return self._enqueue(CommandKind.SET_UE_DELAY,
                                     {"ue_id": ue_id, "delay_s": value})
            try:
                profile_from_dict(body["profile"])
            except (ValidationError, ParseError) as exc:
                return self._json(400, {"error": str(exc)})
            return self._enqueue(CommandKind.SET_PROFILE,
                                 {"ue_id": ue_id, "profile": body["profile"]})

        def _patch_sector(self, sector_id: str, body: dict):
            snap = engine.snapshot()
            sector = snap["sectors"].get(sector_id)
            if sector is None:
                return self._json(404, {"error": f"unknown sector {sector_id!r}"})
            recognized = {"ue_capacity", "max_throughput_bps"}
            keys = recognized & set(body)
            if len(keys) != 1:
                return self._json(400, {"error": "need exactly one of "
                                                 "ue_capacity, max_throughput_bps"})
            key = keys.pop()
            value = _number(body[key])
            if value is None or value <= 0:
                return self._json(400, {"error": f"{key} must be a positive number"})
            if key == "ue_capacity":
                if int(value) < len(sector["attached_ue_ids"]):
                    return self._json(409, {
                        "error": f"sector {sector_id!r} holds "
                                 f"{len(sector['attached_ue_ids'])} ues; "
                                 f"capacity {int(value)} is below that"})
                return self._enqueue(CommandKind.SET_SECTOR_CAPACITY,
                                     {"sector_id": sector_id,
                                      "ue_capacity": int(value)})
            return self._enqueue(CommandKind.SET_SECTOR_MAX_THROUGHPUT,
                                 {"sector_id": sector_id,
                                  "max_throughput_bps": value})

        def _sim_control(self, body: dict):
            action = body.get("action")
            if action == "pause":
                engine.set_paused(True, origin="api")
                return self._json(200, {"paused": True, "tick": engine.tick_count})
            if action == "resume":
                engine.set_paused(False, origin="api")
                return self._json(200, {"paused": False, "tick": engine.tick_count})
            if action == "step":
                n = body.get("n", 1)
                if not isinstance(n, int) or n < 1 or n > 100_000:
                    return self._json(400, {"error": "n must be an integer in [1, 100000]"})
                engine.step(n)
                return self._json(200, {"tick": engine.tick_count})
            if action == "scenario":
                name = body.get("name", "rush_hour")
                if name != "rush_hour":
                    return self._json(400, {"error": f"unknown scenario {name!r}"})
                template = rush_hour_scenario(sector_id=body.get("sector_id"))
                payload = template.timed_commands[0][1].payload
                return self._enqueue(CommandKind.RAMP_THROUGHPUT, payload)
            return self._json(400, {"error": f"unknown action {action!r}"})

        def _enqueue_checked(self, kind: CommandKind, payload: dict):
            if kind is CommandKind.ADD_UE:
                allowed = {"service_class", "profile", "ue_id"}
                unknown = set(payload) - allowed
                if unknown:
                    return self._json(400, {"error": f"unknown fields {sorted(unknown)}"})
            return self._enqueue(kind, payload)

        def _enqueue(self, kind: CommandKind, payload: dict):
            apply_tick = engine.submit(Command(kind=kind, payload=payload,
                                               origin="api"))
            return self._json(202, {"queued": kind.value, "apply_tick": apply_tick})

        # ------------------------------------------------------------- events

        def _stream_events(self, url):
            query = parse_qs(url.query)
            since = _int_param(query, "since")
            if since is None:
                header = self.headers.get("Last-Event-ID")
                since = int(header) if header and header.isdigit() else 0
            limit = _int_param(query, "limit")

            self.send_response(200)
            self._cors()
            self.send_header("Content-Type", "text/event-stream")
            self.send_header("Cache-Control", "no-cache")
            self.send_header("Connection", "close")
            self.end_headers()

            sent = 0
            last_seq = since
            try:
                while True:
                    entries = engine.journal_since(last_seq)
                    if not entries:
                        with engine.journal_cond:
                            engine.journal_cond.wait(timeout=gateway.heartbeat_s)
                        entries = engine.journal_since(last_seq)
                    if not entries:
                        self.wfile.write(b": heartbeat\n\n")
                        self.wfile.flush()
                        continue
                    for entry in entries:
                        data = json.dumps(entry["data"], sort_keys=True)
                        chunk = (f"id: {entry['seq']}\n"
                                 f"event: {entry['kind']}\n"
                                 f"data: {data}\n\n")
                        self.wfile.write(chunk.encode())
                        last_seq = entry["seq"]
                        sent += 1
                        if limit is not None and sent >= limit:
                            self.wfile.flush()
                            return
                    self.wfile.flush()
            except (BrokenPipeError, ConnectionResetError):
                return

        # ------------------------------------------------------------ plumbing

        def _body(self) -> dict:
            length = int(self.headers.get("Content-Length") or 0)
            if length == 0:
                return {}
            raw = self.rfile.read(length)
            try:
                body = json.loads(raw)
            except json.JSONDecodeError:
                return {}
            return body if isinstance(body, dict) else {}

        def _cors(self):
            self.send_header("Access-Control-Allow-Origin", "*")
            self.send_header("Access-Control-Allow-Methods",
                             "GET, POST, PATCH, DELETE, OPTIONS")
            self.send_header("Access-Control-Allow-Headers",
                             "Content-Type, Last-Event-ID")

        def _json(self, status: int, obj: dict):
            payload = json.dumps(obj).encode()
            self.send_response(status)
            self._cors()
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(payload)))
            self.end_headers()
            self.wfile.write(payload)

        def _text(self, status: int, text: str):
            payload = text.encode()
            self.send_response(status)
            self._cors()
            self.send_header("Content-Type", "text/plain; charset=utf-8")
            self.send_header("Content-Length", str(len(payload)))
            self.end_headers()
            self.wfile.write(payload)

    return Handler


def _number(value) -> Optional[float]:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        return None
    return float(value)


def _int_param(query: dict, key: str) -> Optional[int]:
    values = query.get(key)
    if not values:
        return None
    try:
        return int(values[0])
    except ValueError:
        return None


def serve(engine: Engine, bind: str = "127.0.0.1:8080",
          runner: Optional[SimRunner] = None,
          heartbeat_s: float = 5.0) -> Gateway:
    """Start a gateway on ``host:port`` in a background thread."""
    host, _, port_text = bind.partition(":")
    port = int(port_text) if port_text else 8080
    gateway = Gateway(engine, runner=runner, host=host or "127.0.0.1",
                      port=port, heartbeat_s=heartbeat_s)
    gateway.start()
    return gateway
