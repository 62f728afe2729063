"""Congestion-triggered handover: detection, target selection, execution.

A sector whose blended load reaches the policy threshold sheds its heaviest
UE to the least-loaded neighbor that can absorb it without itself crossing
the threshold. Any failure during execution rolls the UE back to its source,
so a non-successful event never changes the attachment map.

Strategies are pluggable: a strategy turns (network snapshot, load report,
policy) into a list of proposed moves. Only the default threshold-offload
strategy ships here; others register via :func:`register_strategy`.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING, Callable, Optional

from .errors import EmptySectorError, UnknownEntityError, ValidationError
from .rng import SeededRng

if TYPE_CHECKING:
    from .loadmetrics import LoadReport, LoadWeights
    from .topology import Network


class HandoverKind(str, Enum):
    """Which disaggregated-unit boundary the move crosses."""

    INTRA_GNB_DU = "intra_gnb_du"
    INTER_GNB_DU_INTRA_GNB_CU = "inter_gnb_du_intra_gnb_cu"
    INTER_GNB_CU = "inter_gnb_cu"


class Softness(str, Enum):
    SOFT = "soft"
    HARD = "hard"


class Outcome(str, Enum):
    SUCCESS = "success"
    FAILED = "failed"
    ROLLED_BACK = "rolled_back"


@dataclass(frozen=True)
class HandoverPolicy:
    threshold: float = 80.0
    latency: float = 0.5
    failure_injection: float = 0.0
    max_ues_per_trigger: int = 1
    strategy: str = "threshold_offload"

    def __post_init__(self):
        if not 0.0 < self.threshold <= 100.0:
            raise ValidationError(
                f"handover threshold must be in (0, 100], got {self.threshold}")
        if self.latency < 0:
            raise ValidationError("handover latency must be non-negative")
        if not 0.0 <= self.failure_injection <= 1.0:
            raise ValidationError("failure_injection must be within [0, 1]")
        if self.max_ues_per_trigger < 1:
            raise ValidationError("max_ues_per_trigger must be at least 1")


@dataclass(frozen=True)
class HandoverEvent:
    """Complete record of one handover attempt."""

    ue_id: str
    source_sector: str
    target_sector: str
    kind: HandoverKind
    softness: Softness
    start_tick: int
    latency: float
    outcome: Outcome


@dataclass(frozen=True)
class HandoverStats:
    """Counts and ratios over an event log; ratios are None when empty."""

    attempts: int
    successes: int
    failures: int
    hsr: Optional[float]
    hfr: Optional[float]
    handover_count: int


# (ue_id, source_sector, target_sector)
Move = tuple[str, str, str]


@dataclass(frozen=True)
class HandoverStrategy:
    name: str
    decide: Callable[["Network", "LoadReport", HandoverPolicy, "LoadWeights"],
                     list[Move]]


STRATEGIES: dict[str, HandoverStrategy] = {}


def register_strategy(strategy: HandoverStrategy) -> None:
    STRATEGIES[strategy.name] = strategy


def get_strategy(name: str) -> HandoverStrategy:
    try:
        return STRATEGIES[name]
    except KeyError:
        raise ValidationError(f"unknown handover strategy {name!r}") from None


def check_congestion(sector_load: float, policy: HandoverPolicy) -> bool:
    """Inclusive comparison: reaching the threshold already triggers."""
    return sector_load >= policy.threshold


def select_ue_to_move(network: "Network", source: str,
                      exclude: frozenset[str] = frozenset()) -> str:
    """The attached UE with the highest current throughput, ties by id."""
    sector = network.sectors.get(source)
    if sector is None:
        raise UnknownEntityError(f"unknown sector {source!r}")
    candidates = [u for u in sector.attached_ue_ids if u not in exclude]
    if not candidates:
        raise EmptySectorError(f"sector {source!r} has no movable ue")
    return max(sorted(candidates),
               key=lambda uid: network.ues[uid].current_throughput)


def select_target(network: "Network", report: "LoadReport", source: str,
                  policy: HandoverPolicy, weights: "LoadWeights",
                  ue_id: Optional[str] = None) -> Optional[str]:
    """Least-loaded neighbor that stays below the threshold after the move.

    ``ue_id`` identifies the UE being moved so its throughput can be included
    in the projection; without it only the attachment count is projected.
    Ties break by neighbor order. Returns None when nothing qualifies.
    """
    counts = {sid: len(s.attached_ue_ids) for sid, s in network.sectors.items()}
    tps = {sid: sum(network.ues[u].current_throughput for u in s.attached_ue_ids)
           for sid, s in network.sectors.items()}
    ue_tp = network.ues[ue_id].current_throughput if ue_id is not None else 0.0
    return _choose_target(network, source, policy, weights,
                          dict(report.per_sector), counts, tps, ue_tp)


def classify(network: "Network", source: str, target: str) -> tuple[HandoverKind, Softness]:
    """Kind and softness from the topology relation between two sectors."""
    if source == target:
        raise ValidationError("source and target sectors must differ")
    try:
        src = network.sectors[source]
        dst = network.sectors[target]
    except KeyError as exc:
        raise UnknownEntityError(f"unknown sector {exc.args[0]!r}") from None
    if src.cell_id == dst.cell_id:
        return HandoverKind.INTRA_GNB_DU, Softness.SOFT
    if network.cells[src.cell_id].gnb_id == network.cells[dst.cell_id].gnb_id:
        return HandoverKind.INTER_GNB_DU_INTRA_GNB_CU, Softness.SOFT
    return HandoverKind.INTER_GNB_CU, Softness.HARD


def execute_handover(network: "Network", ue_id: str, target: str,
                     policy: HandoverPolicy, rng: SeededRng,
                     tick: int = 0) -> HandoverEvent:
    """Move one UE; every failure path restores the original attachment."""
    ue = network.ues.get(ue_id)
    if ue is None:
        raise UnknownEntityError(f"unknown ue {ue_id!r}")
    if ue.sector_id is None:
        raise ValidationError(f"ue {ue_id!r} is not attached")
    source = ue.sector_id
    kind, softness = classify(network, source, target)

    target_sector = network.sectors[target]
    if target_sector.free_capacity() <= 0:
        # Target filled up between selection and execution.
        outcome = Outcome.FAILED
    else:
        source_position = network.sectors[source].attached_ue_ids.index(ue_id)
        network.detach(ue_id)
        network.attach(ue_id, target)
        if policy.failure_injection > 0 and rng.random() < policy.failure_injection:
            network.detach(ue_id)
            network.attach(ue_id, source, position=source_position)
            outcome = Outcome.ROLLED_BACK
        else:
            outcome = Outcome.SUCCESS

    return HandoverEvent(ue_id=ue_id, source_sector=source, target_sector=target,
                         kind=kind, softness=softness, start_tick=tick,
                         latency=policy.latency, outcome=outcome)


def stats(events: list[HandoverEvent]) -> HandoverStats:
    attempts = len(events)
    successes = sum(1 for e in events if e.outcome is Outcome.SUCCESS)
    failures = attempts - successes
    if attempts == 0:
        return HandoverStats(0, 0, 0, None, None, 0)
    return HandoverStats(attempts=attempts, successes=successes,
                         failures=failures, hsr=successes / attempts,
                         hfr=failures / attempts, handover_count=successes)


def balance_step(network: "Network", report: "LoadReport",
                 policy: HandoverPolicy, weights: "LoadWeights",
                 rng: SeededRng, tick: int = 0,
                 strategy: Optional[HandoverStrategy] = None) -> list[HandoverEvent]:
    """Run the configured strategy over one tick's report and execute its moves."""
    chosen = strategy or get_strategy(policy.strategy)
    moves = chosen.decide(network, report, policy, weights)
    events = []
    for ue_id, _source, target in moves:
        events.append(execute_handover(network, ue_id, target, policy, rng, tick))
    return events


def _decide_threshold_offload(network: "Network", report: "LoadReport",
                              policy: HandoverPolicy,
                              weights: "LoadWeights") -> list[Move]:
    """Default strategy: congested sectors shed their heaviest UEs.

    Works on an overlay of counts/throughput sums so that several moves in
    one tick never push a target past the threshold, and a sector relieved
    below the threshold proposes no further moves.
    """
    counts = {sid: len(s.attached_ue_ids) for sid, s in network.sectors.items()}
    tps = {sid: sum(network.ues[u].current_throughput for u in s.attached_ue_ids)
           for sid, s in network.sectors.items()}
    loads = dict(report.per_sector)

    congested = sorted((sid for sid, load in loads.items()
                        if check_congestion(load, policy)),
                       key=lambda sid: (-loads[sid], sid))

    moves: list[Move] = []
    moved: set[str] = set()
    for source in congested:
        for _ in range(policy.max_ues_per_trigger):
            if not check_congestion(loads[source], policy):
                break
            candidates = [u for u in network.sectors[source].attached_ue_ids
                          if u not in moved]
            if not candidates:
                break
            ue_id = max(sorted(candidates),
                        key=lambda uid: network.ues[uid].current_throughput)
            ue_tp = network.ues[ue_id].current_throughput
            target = _choose_target(network, source, policy, weights,
                                    loads, counts, tps, ue_tp)
            if target is None:
                break
            moves.append((ue_id, source, target))
            moved.add(ue_id)
            counts[source] -= 1
            tps[source] -= ue_tp
            counts[target] += 1
            tps[target] += ue_tp
            loads[source] = _blended(network, source, policy, weights, counts, tps)
            loads[target] = _blended(network, target, policy, weights, counts, tps)
    return moves


def _blended(network: "Network", sector_id: str, policy: HandoverPolicy,
             weights: "LoadWeights", counts: dict[str, int],
             tps: dict[str, float]) -> float:
    sector = network.sectors[sector_id]
    count_load = counts[sector_id] / sector.ue_capacity * 100.0
    tp_load = min(tps[sector_id], sector.max_throughput) / sector.max_throughput * 100.0
    return weights.count_weight * count_load + weights.tp_weight * tp_load


def _choose_target(network: "Network", source: str, policy: HandoverPolicy,
                   weights: "LoadWeights", loads: dict[str, float],
                   counts: dict[str, int], tps: dict[str, float],
                   ue_tp: float) -> Optional[str]:
    best: Optional[str] = None
    best_load = float("inf")
    for neighbor in network.neighbors(source):
        sector = network.sectors[neighbor]
        if counts[neighbor] >= sector.ue_capacity:
            continue
        count_load = (counts[neighbor] + 1) / sector.ue_capacity * 100.0
        tp_load = (min(tps[neighbor] + ue_tp, sector.max_throughput)
                   / sector.max_throughput * 100.0)
        projected = weights.count_weight * count_load + weights.tp_weight * tp_load
        if projected >= policy.threshold:
            continue
        if loads[neighbor] < best_load:
            best = neighbor
            best_load = loads[neighbor]
    return best


register_strategy(HandoverStrategy(name="threshold_offload",
                                   decide=_decide_threshold_offload))
