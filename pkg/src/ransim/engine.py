"""Simulation clock, command queue, and the per-tick pipeline.

A tick executes in a fixed order: drain queued commands, apply active
throughput ramps, generate traffic, compute the load report, run the
balancer, record metrics, advance the clock. The engine is the only writer
of network state; consoles, the HTTP gateway, and scenarios steer it solely
through the thread-safe command queue and read back through snapshots
published at tick boundaries.

Runs are reproducible: the record of a run is a pure function of the
configuration, the scenario, and the seed.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Optional

from . import handover as ho
from . import loadmetrics as lm
from . import metrics as ms
from . import traffic as tr
from .errors import (CapacityError, NetworkFullError, ParseError, SimError,
                     UnknownEntityError, ValidationError)
from .placement import PlacementCursor, place_ue
from .rng import SeededRng, seeded_rng
from .topology import Network, NetworkConfig, ServiceClass, Ue, build_network


class CommandKind(str, Enum):
    ADD_UE = "add_ue"
    DEL_UE = "del_ue"
    START_UE_TRAFFIC = "start_ue_traffic"
    STOP_UE_TRAFFIC = "stop_ue_traffic"
    SET_UE_THROUGHPUT = "set_ue_throughput"
    SET_UE_DELAY = "set_ue_delay"
    SET_PROFILE = "set_profile"
    SET_SECTOR_CAPACITY = "set_sector_capacity"
    SET_SECTOR_MAX_THROUGHPUT = "set_sector_max_throughput"
    RAMP_THROUGHPUT = "ramp_throughput"
    PAUSE = "pause"
    RESUME = "resume"
    STEP_N = "step_n"


# Drain order within one tick: scenario first, then console, then api;
# arrival order within each origin.
_ORIGIN_RANK = {"scenario": 0, "console": 1, "api": 2}


@dataclass
class Command:
    kind: CommandKind
    payload: dict
    origin: str = "api"

    def __post_init__(self):
        if self.origin not in _ORIGIN_RANK:
            raise ValidationError(f"unknown command origin {self.origin!r}")


@dataclass
class Scenario:
    """A named, bounded script of commands keyed by tick."""

    name: str
    duration: int
    timed_commands: list[tuple[int, Command]] = field(default_factory=list)

    def __post_init__(self):
        for tick, _cmd in self.timed_commands:
            if not 0 <= tick < max(self.duration, 1):
                raise ValidationError(
                    f"scenario {self.name!r} schedules a command at tick {tick} "
                    f"outside its duration {self.duration}")
        self.timed_commands.sort(key=lambda item: item[0])


@dataclass
class RunRecord:
    """Everything observable about one run, canonically serializable."""

    seed: int
    scenario: str
    ticks: int
    commands: list[dict]
    handovers: list[dict]
    final_report: dict
    stats: dict
    unplaced_ues: list[str]

    def to_json(self) -> str:
        payload = {
            "seed": self.seed,
            "scenario": self.scenario,
            "ticks": self.ticks,
            "commands": self.commands,
            "handovers": self.handovers,
            "final_report": self.final_report,
            "stats": self.stats,
            "unplaced_ues": self.unplaced_ues,
        }
        return json.dumps(payload, sort_keys=True, separators=(",", ":"))


@dataclass
class _Ramp:
    """A per-tick throughput escalation on one sector's UEs.

    Pins every UE attached at start to ``baseline_bps``, then grows the pins
    each tick (multiplicatively or by a fixed fraction of the baseline) until
    the sector's reported load reaches the policy threshold, then retires.
    """

    sector_id: str
    baseline_bps: float
    factor: float
    mode: str  # "multiplicative" | "additive"
    ue_ids: list[str] = field(default_factory=list)
    started: bool = False


class Engine:
    """Owner of simulation time and the single writer of network state."""

    def __init__(self, cfg: NetworkConfig, epoch_ns: int = 0,
                 retention_ticks: Optional[int] = None):
        self.cfg = cfg
        self.seed = cfg.seed
        self.cursor = PlacementCursor()
        self.network, self.unplaced_initial = build_network(cfg, self.cursor)
        self.policy = cfg.handover_policy
        self.weights = cfg.weights

        self.tick_count = 0
        self.paused = False
        self.store = ms.MetricStore(epoch_ns=epoch_ns, retention_ticks=retention_ticks)
        self.handover_events: list[ho.HandoverEvent] = []
        self.command_log: list[dict] = []
        self.last_report: Optional[lm.LoadReport] = None

        self._traffic_rng = seeded_rng(cfg.seed, "traffic")
        self._qos_rng = seeded_rng(cfg.seed, "qos")
        self._failure_rng = seeded_rng(cfg.seed, "failure")

        self._queue: list[tuple[int, Command]] = []
        self._queue_lock = threading.Lock()
        self._arrivals = 0
        self._next_apply_tick = 0

        self._ramps: list[_Ramp] = []
        self._scenario: Optional[Scenario] = None
        self._scenario_index = 0
        self._ue_counter = len(self.network.ues)

        self.journal: list[dict] = []
        self.journal_cond = threading.Condition()
        self._seq = 0

        self.tick_lock = threading.Lock()
        self._snapshot: dict = {}
        self._publish_snapshot(tick=-1, report=lm.load_report(
            self.network, self.weights, tick=-1))

    # ------------------------------------------------------------------ steering

    def submit(self, command: Command) -> int:
        """Queue a command; returns the tick at which it will apply."""
        with self._queue_lock:
            self._queue.append((self._arrivals, command))
            self._arrivals += 1
            return self._next_apply_tick

    def install_scenario(self, scenario: Scenario) -> None:
        """Feed a scenario's timed commands from the current tick onward."""
        self._scenario = scenario
        self._scenario_index = 0

    def set_paused(self, paused: bool, origin: str = "api") -> None:
        self.paused = paused
        kind = CommandKind.PAUSE if paused else CommandKind.RESUME
        entry = {"tick": self.tick_count, "origin": origin, "kind": kind.value,
                 "payload": {}, "ok": True, "result": {"paused": paused}}
        self.command_log.append(entry)
        self._journal("command", self.tick_count, entry)

    # ------------------------------------------------------------------ the tick

    def tick(self) -> lm.LoadReport:
        """Execute one simulated second; returns the tick's load report."""
        with self.tick_lock:
            t = self.tick_count

            # 1. commands: scenario entries due now, then the queued batch.
            with self._queue_lock:
                batch = [cmd for _, cmd in sorted(
                    self._queue, key=lambda item: (_ORIGIN_RANK[item[1].origin], item[0]))]
                self._queue.clear()
                self._next_apply_tick = t + 1
            for cmd in self._scenario_commands_due(t):
                self._run_command(t, cmd)
            for cmd in batch:
                self._run_command(t, cmd)
            self._apply_ramps(t)

            # 2. traffic for active (or pinned) UEs, in id order.
            for ue_id in sorted(self.network.ues):
                tr.advance(self.network.ues[ue_id], t, self._traffic_rng,
                           self._qos_rng)

            # 3. loads.
            report = lm.load_report(self.network, self.weights, tick=t)

            # 4. balance.
            events = ho.balance_step(self.network, report, self.policy,
                                     self.weights, self._failure_rng, tick=t)
            for event in events:
                self.handover_events.append(event)
                self._journal("handover", t, _event_dict(event))

            # 5. metrics.
            self._record_metrics(t, report, events)

            # 6. clock.
            self.tick_count = t + 1
            self.last_report = report
            self._journal("tick", t, {
                "tick": t,
                "network_load": report.network_load,
                "max_sector_load": max(report.per_sector.values(), default=0.0),
                "handovers": len(events),
            })
            self._publish_snapshot(tick=t, report=report)
            return report

    def step(self, n: int = 1) -> None:
        for _ in range(n):
            self.tick()

    def run(self, scenario: Scenario) -> RunRecord:
        """Run a scenario start to finish and assemble the run record."""
        self.install_scenario(scenario)
        for _ in range(scenario.duration):
            self.tick()
        return self.run_record(scenario.name)

    def run_record(self, scenario_name: str = "") -> RunRecord:
        report = self.last_report or lm.load_report(self.network, self.weights)
        return RunRecord(
            seed=self.seed,
            scenario=scenario_name,
            ticks=self.tick_count,
            commands=list(self.command_log),
            handovers=[_event_dict(e) for e in self.handover_events],
            final_report=_report_dict(report),
            stats=_stats_dict(ho.stats(self.handover_events)),
            unplaced_ues=list(self.unplaced_initial),
        )

    def stats(self) -> ho.HandoverStats:
        return ho.stats(self.handover_events)

    # ------------------------------------------------------------------ reads

    def snapshot(self) -> dict:
        """The state published at the last tick boundary. Read-only."""
        return self._snapshot

    def journal_since(self, seq: int, limit: Optional[int] = None) -> list[dict]:
        with self.journal_cond:
            entries = [e for e in self.journal if e["seq"] > seq]
        return entries[:limit] if limit is not None else entries

    # ------------------------------------------------------------------ internals

    def _scenario_commands_due(self, tick: int) -> list[Command]:
        due = []
        if self._scenario is not None:
            timed = self._scenario.timed_commands
            while (self._scenario_index < len(timed)
                   and timed[self._scenario_index][0] <= tick):
                due.append(timed[self._scenario_index][1])
                self._scenario_index += 1
        return due

    def _run_command(self, tick: int, cmd: Command) -> None:
        entry = {"tick": tick, "origin": cmd.origin, "kind": cmd.kind.value,
                 "payload": cmd.payload}
        try:
            result = self._apply_command(cmd)
            entry.update(ok=True, result=result)
        except SimError as exc:
            entry.update(ok=False, error=str(exc))
        except (KeyError, TypeError, ValueError) as exc:
            # Malformed payloads are recorded, never allowed to kill the tick.
            entry.update(ok=False, error=f"bad payload: {exc!r}")
        self.command_log.append(entry)
        self._journal("command", tick, entry)

    def _apply_command(self, cmd: Command) -> dict:
        p = cmd.payload
        kind = cmd.kind
        if kind is CommandKind.ADD_UE:
            return self._add_ue(p)
        if kind is CommandKind.DEL_UE:
            ue = self._ue(p["ue_id"])
            previous = self.network.detach(ue.id) if ue.sector_id else None
            del self.network.ues[ue.id]
            return {"ue_id": ue.id, "sector_id": previous}
        if kind is CommandKind.START_UE_TRAFFIC:
            ue = self._ue(p["ue_id"])
            ue.traffic_active = True
            tr.clear_pin(ue)
            return {"ue_id": ue.id, "traffic_active": True}
        if kind is CommandKind.STOP_UE_TRAFFIC:
            ue = self._ue(p["ue_id"])
            ue.traffic_active = False
            tr.clear_pin(ue)
            ue.current_throughput = 0.0
            return {"ue_id": ue.id, "traffic_active": False}
        if kind is CommandKind.SET_UE_THROUGHPUT:
            ue = self._ue(p["ue_id"])
            tr.set_throughput(ue, float(p["throughput_bps"]))
            return {"ue_id": ue.id, "throughput_bps": ue.pinned_throughput}
        if kind is CommandKind.SET_UE_DELAY:
            ue = self._ue(p["ue_id"])
            value = float(p["delay_s"])
            if value < 0:
                raise ValidationError("delay must be non-negative")
            ue.qos.delay = value
            return {"ue_id": ue.id, "delay_s": value}
        if kind is CommandKind.SET_PROFILE:
            ue = self._ue(p["ue_id"])
            tr.set_profile(ue, tr.profile_from_dict(p["profile"]))
            return {"ue_id": ue.id, "profile": p["profile"]}
        if kind is CommandKind.SET_SECTOR_CAPACITY:
            sector = self._sector(p["sector_id"])
            capacity = int(p["ue_capacity"])
            if capacity <= 0:
                raise ValidationError("ue_capacity must be positive")
            if capacity < len(sector.attached_ue_ids):
                raise CapacityError(
                    f"sector {sector.id!r} holds {len(sector.attached_ue_ids)} "
                    f"ues; capacity {capacity} would strand them")
            sector.ue_capacity = capacity
            return {"sector_id": sector.id, "ue_capacity": capacity}
        if kind is CommandKind.SET_SECTOR_MAX_THROUGHPUT:
            sector = self._sector(p["sector_id"])
            value = float(p["max_throughput_bps"])
            if value <= 0:
                raise ValidationError("max_throughput must be positive")
            sector.max_throughput = value
            return {"sector_id": sector.id, "max_throughput_bps": value}
        if kind is CommandKind.RAMP_THROUGHPUT:
            return self._install_ramp(p)
        if kind is CommandKind.PAUSE:
            self.paused = True
            return {"paused": True}
        if kind is CommandKind.RESUME:
            self.paused = False
            return {"paused": False}
        if kind is CommandKind.STEP_N:
            # Stepping is a runner concern; inside a tick it is a no-op marker.
            return {"n": int(p.get("n", 1))}
        raise ValidationError(f"unsupported command kind {kind!r}")

    def _add_ue(self, p: dict) -> dict:
        ue_id = p.get("ue_id") or self._next_ue_id()
        if ue_id in self.network.ues:
            raise ValidationError(f"ue id {ue_id!r} already exists")
        raw_class = p.get("service_class", "data")
        try:
            service_class = ServiceClass(raw_class)
        except ValueError:
            raise ValidationError(f"unknown service_class {raw_class!r}") from None
        if "profile" in p:
            profile = tr.profile_from_dict(p["profile"])
        else:
            profile = tr.DEFAULT_PROFILES[service_class.value]
        ue = Ue(id=ue_id, service_class=service_class, profile=profile)
        self.network.ues[ue_id] = ue
        try:
            sector_id = place_ue(self.network, self.cursor, ue)
        except NetworkFullError:
            del self.network.ues[ue_id]
            raise
        return {"ue_id": ue_id, "sector_id": sector_id}

    def _next_ue_id(self) -> str:
        while True:
            self._ue_counter += 1
            candidate = f"ue{self._ue_counter:03d}"
            if candidate not in self.network.ues:
                return candidate

    def _install_ramp(self, p: dict) -> dict:
        sector_id = p.get("sector_id") or self.network.sector_order[0]
        if sector_id not in self.network.sectors:
            raise UnknownEntityError(f"unknown sector {sector_id!r}")
        mode = p.get("mode", "multiplicative")
        if mode not in ("multiplicative", "additive"):
            raise ValidationError(f"unknown ramp mode {mode!r}")
        ramp = _Ramp(sector_id=sector_id,
                     baseline_bps=float(p.get("baseline_bps", 8e6)),
                     factor=float(p.get("factor", 1.10)),
                     mode=mode)
        if ramp.factor <= 1.0 and mode == "multiplicative":
            raise ValidationError("multiplicative ramp factor must exceed 1")
        self._ramps.append(ramp)
        return {"sector_id": sector_id, "baseline_bps": ramp.baseline_bps,
                "factor": ramp.factor, "mode": mode}

    def _apply_ramps(self, tick: int) -> None:
        finished = []
        for ramp in self._ramps:
            if not ramp.started:
                sector = self.network.sectors[ramp.sector_id]
                ramp.ue_ids = list(sector.attached_ue_ids)
                for ue_id in ramp.ue_ids:
                    tr.set_throughput(self.network.ues[ue_id], ramp.baseline_bps)
                ramp.started = True
                continue
            last = self.last_report
            if last is not None and ho.check_congestion(
                    last.per_sector.get(ramp.sector_id, 0.0), self.policy):
                finished.append(ramp)
                continue
            for ue_id in ramp.ue_ids:
                ue = self.network.ues.get(ue_id)
                if ue is None or ue.pinned_throughput is None:
                    continue
                if ramp.mode == "multiplicative":
                    value = ue.pinned_throughput * ramp.factor
                else:
                    value = ue.pinned_throughput + ramp.baseline_bps * (ramp.factor - 1.0)
                tr.set_throughput(ue, value)
        for ramp in finished:
            self._ramps.remove(ramp)

    def _record_metrics(self, tick: int, report: lm.LoadReport,
                        events: list[ho.HandoverEvent]) -> None:
        network = self.network
        for sector_id, load in report.per_sector.items():
            sector = network.sectors[sector_id]
            cell = network.cells[sector.cell_id]
            self.store.record_at(tick, ms.SECTOR_LOAD,
                                 {"gnb": cell.gnb_id, "cell": cell.id,
                                  "sector": sector_id},
                                 {"load": load})
        for cell_id, load in report.per_cell.items():
            cell = network.cells[cell_id]
            self.store.record_at(tick, ms.CELL_LOAD,
                                 {"gnb": cell.gnb_id, "cell": cell_id},
                                 {"load": load})
        for gnb_id, load in report.per_gnb.items():
            self.store.record_at(tick, ms.GNB_LOAD, {"gnb": gnb_id}, {"load": load})
        self.store.record_at(tick, ms.NETWORK_LOAD, {}, {"load": report.network_load})
        for ue_id in sorted(network.ues):
            ue = network.ues[ue_id]
            if not ue.traffic_active and ue.pinned_throughput is None:
                continue
            self.store.record_at(tick, ms.UE_KPIS, {"ue": ue_id}, {
                "throughput": ue.current_throughput,
                "delay": ue.qos.delay,
                "jitter": ue.qos.jitter,
                "packet_loss": ue.qos.packet_loss,
            })
        for event in events:
            self.store.record_at(tick, ms.HANDOVER, {
                "ue": event.ue_id,
                "source": event.source_sector,
                "target": event.target_sector,
            }, {
                "latency": event.latency,
                "outcome_code": ms.OUTCOME_CODES[event.outcome.value],
            })

    def _journal(self, kind: str, tick: int, data: dict) -> None:
        with self.journal_cond:
            self._seq += 1
            self.journal.append({"seq": self._seq, "kind": kind,
                                 "tick": tick, "data": data})
            self.journal_cond.notify_all()

    def _publish_snapshot(self, tick: int, report: lm.LoadReport) -> None:
        network = self.network
        sectors = {}
        for sector_id in network.sector_order:
            sector = network.sectors[sector_id]
            cell = network.cells[sector.cell_id]
            sectors[sector_id] = {
                "cell_id": sector.cell_id,
                "gnb_id": cell.gnb_id,
                "ue_capacity": sector.ue_capacity,
                "max_throughput_bps": sector.max_throughput,
                "attached_ue_ids": list(sector.attached_ue_ids),
                "load": report.per_sector.get(sector_id, 0.0),
            }
        ues = {}
        for ue_id in sorted(network.ues):
            ue = network.ues[ue_id]
            ues[ue_id] = {
                "service_class": ue.service_class.value,
                "sector_id": ue.sector_id,
                "throughput_bps": ue.current_throughput,
                "delay_s": ue.qos.delay,
                "jitter_s": ue.qos.jitter,
                "packet_loss": ue.qos.packet_loss,
                "traffic_active": ue.traffic_active,
                "pinned": ue.pinned_throughput is not None,
            }
        snapshot = {
            "tick": tick,
            "paused": self.paused,
            "loads": _report_dict(report),
            "sectors": sectors,
            "ues": ues,
            "cells": {cid: {"gnb_id": c.gnb_id, "sector_ids": list(c.sector_ids),
                            "load": report.per_cell.get(cid, 0.0)}
                      for cid, c in sorted(network.cells.items())},
            "gnbs": {gid: {"cell_ids": list(g.cell_ids),
                           "load": report.per_gnb.get(gid, 0.0)}
                     for gid, g in sorted(network.gnbs.items())},
            "policy": {
                "threshold": self.policy.threshold,
                "latency": self.policy.latency,
                "failure_injection": self.policy.failure_injection,
                "max_ues_per_trigger": self.policy.max_ues_per_trigger,
                "strategy": self.policy.strategy,
            },
            "weights": {"count_weight": self.weights.count_weight,
                        "tp_weight": self.weights.tp_weight},
            "stats": _stats_dict(ho.stats(self.handover_events)),
        }
        self._snapshot = snapshot

    def _ue(self, ue_id: str) -> Ue:
        ue = self.network.ues.get(ue_id)
        if ue is None:
            raise UnknownEntityError(f"unknown ue {ue_id!r}")
        return ue

    def _sector(self, sector_id: str):
        sector = self.network.sectors.get(sector_id)
        if sector is None:
            raise UnknownEntityError(f"unknown sector {sector_id!r}")
        return sector


class SimRunner:
    """Paces engine ticks on a background thread.

    Batch runs call :meth:`Engine.step` directly; this runner exists for the
    interactive surfaces, advancing one tick per ``1/rate_hz`` seconds while
    the engine is not paused. ``step`` works regardless of pacing because the
    engine serializes ticks internally.
    """

    def __init__(self, engine: Engine, rate_hz: float = 1.0):
        if rate_hz <= 0:
            raise ValidationError("tick rate must be positive")
        self.engine = engine
        self.rate_hz = rate_hz
        self._stop = threading.Event()
        self._thread: Optional[threading.Thread] = None

    def start(self) -> None:
        if self._thread is not None:
            return
        self._thread = threading.Thread(target=self._loop, daemon=True)
        self._thread.start()

    def stop(self) -> None:
        self._stop.set()
        if self._thread is not None:
            self._thread.join(timeout=5)
            self._thread = None

    def step(self, n: int = 1) -> int:
        self.engine.step(n)
        return self.engine.tick_count

    def _loop(self) -> None:
        interval = 1.0 / self.rate_hz
        while not self._stop.wait(interval):
            if not self.engine.paused:
                self.engine.tick()


def rush_hour_scenario(sector_id: Optional[str] = None, duration: int = 300,
                       baseline_bps: float = 8e6, factor: float = 1.10,
                       mode: str = "multiplicative") -> Scenario:
    """The stock congestion drill: one sector's UEs get their throughput
    pinned to a baseline, then escalated every second until the sector load
    reaches the policy threshold and the balancer reacts."""
    payload: dict[str, Any] = {"baseline_bps": baseline_bps, "factor": factor,
                               "mode": mode}
    if sector_id is not None:
        payload["sector_id"] = sector_id
    command = Command(kind=CommandKind.RAMP_THROUGHPUT, payload=payload,
                      origin="scenario")
    return Scenario(name="rush_hour", duration=duration,
                    timed_commands=[(0, command)])


def load_scenario(text: str) -> Scenario:
    """Parse a scenario document: {"name", "duration", "commands": [...]}."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed scenario document: {exc}") from exc
    if not isinstance(raw, dict):
        raise ParseError("scenario document must be a JSON object")
    name = raw.get("name", "scenario")
    duration = raw.get("duration")
    if not isinstance(duration, int) or duration < 0:
        raise ValidationError("scenario duration must be a non-negative integer")
    timed = []
    for entry in raw.get("commands", []):
        if not isinstance(entry, dict) or "tick" not in entry or "kind" not in entry:
            raise ValidationError(f"scenario command needs tick and kind: {entry!r}")
        tick = entry["tick"]
        if not isinstance(tick, int) or tick < 0:
            raise ValidationError(f"scenario command tick must be a non-negative "
                                  f"integer, got {tick!r}")
        try:
            kind = CommandKind(entry["kind"])
        except ValueError:
            raise ValidationError(f"unknown command kind {entry['kind']!r}") from None
        payload = {k: v for k, v in entry.items() if k not in ("tick", "kind")}
        timed.append((tick, Command(kind=kind, payload=payload, origin="scenario")))
    return Scenario(name=str(name), duration=duration, timed_commands=timed)


def run(cfg: NetworkConfig, scenario: Scenario,
        epoch_ns: int = 0) -> tuple[RunRecord, Engine]:
    """Convenience wrapper: fresh engine, full scenario, record + engine back."""
    engine = Engine(cfg, epoch_ns=epoch_ns)
    record = engine.run(scenario)
    return record, engine


def _event_dict(event: ho.HandoverEvent) -> dict:
    return {
        "ue_id": event.ue_id,
        "source_sector": event.source_sector,
        "target_sector": event.target_sector,
        "kind": event.kind.value,
        "softness": event.softness.value,
        "start_tick": event.start_tick,
        "latency": event.latency,
        "outcome": event.outcome.value,
    }


def _report_dict(report: lm.LoadReport) -> dict:
    return {
        "tick": report.tick,
        "per_sector": dict(report.per_sector),
        "per_cell": dict(report.per_cell),
        "per_gnb": dict(report.per_gnb),
        "network_load": report.network_load,
    }


def _stats_dict(stats: ho.HandoverStats) -> dict:
    return {
        "attempts": stats.attempts,
        "successes": stats.successes,
        "failures": stats.failures,
        "hsr": stats.hsr,
        "hfr": stats.hfr,
        "handover_count": stats.handover_count,
    }
