"""Network model: gNodeBs own cells, cells own sectors, sectors attach UEs.

This module loads and validates configuration documents, materializes the
entity tree, and owns the canonical attachment state that every other module
reads. The tree itself is fixed after construction; only UE attachments churn.

Configuration documents are JSON with the top-level keys ``gnbs``, ``cells``,
``sectors``, ``ues``, ``weights``, ``handover_policy`` and ``seed``. The four
entity sections may also be supplied as separate files and merged with
:func:`merge_documents`.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from .errors import CapacityError, ParseError, UnknownEntityError, ValidationError
from .handover import HandoverPolicy, get_strategy
from .loadmetrics import LoadWeights
from .rng import seeded_rng
from .traffic import DEFAULT_PROFILES, TrafficProfile, profile_from_dict


class ServiceClass(str, Enum):
    VOICE = "voice"
    VIDEO = "video"
    GAMING = "gaming"
    IOT = "iot"
    DATA = "data"


@dataclass
class UeQos:
    """Live per-UE quality metrics, updated each tick by traffic generation."""

    delay: float = 0.0
    jitter: float = 0.0
    packet_loss: float = 0.0


@dataclass
class Gnb:
    id: str
    latitude: float = 0.0
    longitude: float = 0.0
    cell_ids: list[str] = field(default_factory=list)


@dataclass
class Cell:
    id: str
    gnb_id: str
    sector_ids: list[str] = field(default_factory=list)


@dataclass
class Sector:
    """Capacity-bearing leaf of the tree; the unit UEs attach to.

    ``ue_capacity`` bounds how many UEs may attach; ``max_throughput`` is the
    cap (bytes/second) applied to the sector's aggregate traffic when computing
    throughput load.
    """

    id: str
    cell_id: str
    ue_capacity: int
    max_throughput: float
    attached_ue_ids: list[str] = field(default_factory=list)

    def free_capacity(self) -> int:
        return self.ue_capacity - len(self.attached_ue_ids)


@dataclass
class Ue:
    """A simulated device: service class, traffic profile, live metrics.

    ``pinned_throughput`` is set by the throughput-override path (console,
    API, scenarios); while present it replaces generated traffic until
    generation is explicitly re-enabled.
    """

    id: str
    service_class: ServiceClass
    profile: TrafficProfile
    sector_id: Optional[str] = None
    current_throughput: float = 0.0
    qos: UeQos = field(default_factory=UeQos)
    traffic_active: bool = True
    pinned_throughput: Optional[float] = None


@dataclass
class NetworkConfig:
    """Validated configuration: entity prototypes plus run-wide settings."""

    gnbs: list[Gnb]
    cells: list[Cell]
    sectors: list[Sector]
    ues: list[Ue]
    weights: LoadWeights
    handover_policy: HandoverPolicy
    seed: int


class Network:
    """The live entity tree plus the UE attachment map.

    There is exactly one writer (the engine tick loop); readers take snapshots
    at tick boundaries. ``sector_order`` is the global id-sorted sector list
    used as the placement ring and as the base for neighbor ordering.
    """

    def __init__(self, gnbs: dict[str, Gnb], cells: dict[str, Cell],
                 sectors: dict[str, Sector], ues: dict[str, Ue]):
        self.gnbs = gnbs
        self.cells = cells
        self.sectors = sectors
        self.ues = ues
        self.sector_order: list[str] = sorted(sectors)

    def attach(self, ue_id: str, sector_id: str,
               position: Optional[int] = None) -> None:
        """Attach an unattached UE; raises CapacityError when the sector is
        full. ``position`` re-inserts at a specific list index, which the
        handover rollback uses to restore the exact pre-move ordering."""
        ue = self._ue(ue_id)
        sector = self._sector(sector_id)
        if ue.sector_id is not None:
            raise ValidationError(f"ue {ue_id!r} is already attached to {ue.sector_id!r}")
        if sector.free_capacity() <= 0:
            raise CapacityError(
                f"sector {sector_id!r} is at capacity ({sector.ue_capacity})")
        if position is None:
            sector.attached_ue_ids.append(ue_id)
        else:
            sector.attached_ue_ids.insert(position, ue_id)
        ue.sector_id = sector_id

    def detach(self, ue_id: str) -> str:
        """Detach a UE and return the sector it was attached to."""
        ue = self._ue(ue_id)
        if ue.sector_id is None:
            raise ValidationError(f"ue {ue_id!r} is not attached")
        sector = self._sector(ue.sector_id)
        sector.attached_ue_ids.remove(ue_id)
        previous = ue.sector_id
        ue.sector_id = None
        return previous

    def attachment_map(self) -> dict[str, Optional[str]]:
        """UE id -> sector id (or None) for every UE, in sorted order."""
        return {uid: self.ues[uid].sector_id for uid in sorted(self.ues)}

    def neighbors(self, sector_id: str) -> list[str]:
        """Other sectors, nearest boundary first.

        Same-cell siblings come first, then sectors of sibling cells in the
        same gNodeB, then sectors of other gNodeBs; each group id-sorted.
        """
        sector = self._sector(sector_id)
        cell = self.cells[sector.cell_id]
        gnb = self.gnbs[cell.gnb_id]

        same_cell = [s for s in cell.sector_ids if s != sector_id]
        same_gnb = []
        for cell_id in gnb.cell_ids:
            if cell_id == cell.id:
                continue
            same_gnb.extend(self.cells[cell_id].sector_ids)
        other = []
        for gnb_id in sorted(self.gnbs):
            if gnb_id == gnb.id:
                continue
            for cell_id in self.gnbs[gnb_id].cell_ids:
                other.extend(self.cells[cell_id].sector_ids)
        return sorted(same_cell) + sorted(same_gnb) + sorted(other)

    def _sector(self, sector_id: str) -> Sector:
        try:
            return self.sectors[sector_id]
        except KeyError:
            raise UnknownEntityError(f"unknown sector {sector_id!r}") from None

    def _ue(self, ue_id: str) -> Ue:
        try:
            return self.ues[ue_id]
        except KeyError:
            raise UnknownEntityError(f"unknown ue {ue_id!r}") from None


def merge_documents(texts: list[str]) -> str:
    """Merge partial configuration documents into one canonical document.

    Each input contributes a disjoint subset of the top-level keys; a key
    appearing twice is an error.
    """
    merged: dict = {}
    for text in texts:
        part = _parse_json(text)
        for key, value in part.items():
            if key in merged:
                raise ValidationError(f"configuration key {key!r} supplied more than once")
            merged[key] = value
    return json.dumps(merged)


def load_config(document: str) -> NetworkConfig:
    """Parse and validate a configuration document."""
    raw = _parse_json(document)
    if not isinstance(raw, dict):
        raise ParseError("configuration document must be a JSON object")

    known = {"gnbs", "cells", "sectors", "ues", "weights", "handover_policy", "seed"}
    for key in raw:
        if key not in known:
            raise ValidationError(f"unknown configuration key {key!r}")

    gnbs = [_gnb_from_dict(entry) for entry in _require_list(raw, "gnbs")]
    cells = [_cell_from_dict(entry) for entry in _require_list(raw, "cells")]
    sectors = [_sector_from_dict(entry) for entry in _require_list(raw, "sectors")]
    ues = [_ue_from_dict(entry) for entry in raw.get("ues", [])]

    _check_unique("gnb", [g.id for g in gnbs])
    _check_unique("cell", [c.id for c in cells])
    _check_unique("sector", [s.id for s in sectors])
    _check_unique("ue", [u.id for u in ues])

    gnb_ids = {g.id for g in gnbs}
    cell_ids = {c.id for c in cells}
    sector_ids = {s.id for s in sectors}
    for cell in cells:
        if cell.gnb_id not in gnb_ids:
            raise ValidationError(
                f"cell {cell.id!r} references unknown gnb {cell.gnb_id!r}")
    for sector in sectors:
        if sector.cell_id not in cell_ids:
            raise ValidationError(
                f"sector {sector.id!r} references unknown cell {sector.cell_id!r}")
    for ue in ues:
        if ue.sector_id is not None and ue.sector_id not in sector_ids:
            raise ValidationError(
                f"ue {ue.id!r} references unknown sector {ue.sector_id!r}")

    weights = _weights_from_dict(raw.get("weights", {}))
    policy = _policy_from_dict(raw.get("handover_policy", {}))

    seed = raw.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        raise ValidationError(f"seed must be a non-negative integer, got {seed!r}")

    return NetworkConfig(gnbs=gnbs, cells=cells, sectors=sectors, ues=ues,
                         weights=weights, handover_policy=policy, seed=seed)


def build_network(cfg: NetworkConfig, cursor=None) -> tuple[Network, list[str]]:
    """Materialize the tree, attach pre-placed UEs, round-robin the rest.

    Returns the network and the ids of UEs that could not be placed because
    every sector was full. Deterministic: identical configs (including seed)
    yield identical attachment maps. Passing a cursor lets the caller keep
    placing later UEs from where the build left off.
    """
    gnbs = {g.id: copy.deepcopy(g) for g in cfg.gnbs}
    cells = {c.id: copy.deepcopy(c) for c in cfg.cells}
    sectors = {s.id: copy.deepcopy(s) for s in cfg.sectors}
    ues = {u.id: copy.deepcopy(u) for u in cfg.ues}

    for cell in cells.values():
        gnbs[cell.gnb_id].cell_ids.append(cell.id)
    for sector in sectors.values():
        cells[sector.cell_id].sector_ids.append(sector.id)
    for gnb in gnbs.values():
        gnb.cell_ids.sort()
        if not gnb.cell_ids:
            raise ValidationError(f"gnb {gnb.id!r} has no cells")
    for cell in cells.values():
        cell.sector_ids.sort()
        if not cell.sector_ids:
            raise ValidationError(f"cell {cell.id!r} has no sectors")

    network = Network(gnbs, cells, sectors, ues)

    unplaced_input = []
    for ue in ues.values():
        if ue.sector_id is not None:
            pinned_to = ue.sector_id
            ue.sector_id = None
            network.attach(ue.id, pinned_to)
        else:
            unplaced_input.append(ue)

    # Unpinned UEs go through the placement ring in input order.
    from .placement import PlacementCursor, place_all

    if cursor is None:
        cursor = PlacementCursor()
    _, unplaced = place_all(network, cursor, unplaced_input)
    return network, unplaced


def default_config(gnb_count: int = 3, cells_per_gnb: int = 6,
                   sectors_per_cell: int = 3, ues_per_sector: int = 10,
                   ue_capacity: int = 15, max_throughput: float = 100e6,
                   seed: int = 0) -> dict:
    """Build the stock hexagonal-layout topology document as a plain dict.

    Three gNodeBs, six cells each, three sectors per cell by default, with
    UEs assigned a random service class from a seed-derived stream. Sectors
    share one capacity and one throughput cap.
    """
    classes = [c.value for c in ServiceClass]
    rng = seeded_rng(seed, "classes")

    gnbs = [{"id": f"g{i + 1}", "latitude": 0.0, "longitude": 0.0}
            for i in range(gnb_count)]
    cells = []
    sectors = []
    for g in range(gnb_count):
        for c in range(cells_per_gnb):
            cell_id = f"g{g + 1}c{c + 1}"
            cells.append({"id": cell_id, "gnb_id": f"g{g + 1}"})
            for s in range(sectors_per_cell):
                sectors.append({
                    "id": f"{cell_id}s{s + 1}",
                    "cell_id": cell_id,
                    "ue_capacity": ue_capacity,
                    "max_throughput": max_throughput,
                })

    total_ues = ues_per_sector * len(sectors)
    width = max(3, len(str(total_ues)))
    ues = [{"id": f"ue{i + 1:0{width}d}", "service_class": rng.choice(classes)}
           for i in range(total_ues)]

    return {
        "gnbs": gnbs,
        "cells": cells,
        "sectors": sectors,
        "ues": ues,
        "weights": {"count_weight": 0.5, "tp_weight": 0.5},
        "handover_policy": {"threshold": 80.0, "latency": 0.5,
                            "failure_injection": 0.0, "max_ues_per_trigger": 1,
                            "strategy": "threshold_offload"},
        "seed": seed,
    }


def _parse_json(text: str) -> dict:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed configuration document: {exc}") from exc


def _require_list(raw: dict, key: str) -> list:
    value = raw.get(key, [])
    if not isinstance(value, list):
        raise ValidationError(f"configuration key {key!r} must be a list")
    return value


def _check_unique(kind: str, ids: list[str]) -> None:
    seen = set()
    for entity_id in ids:
        if entity_id in seen:
            raise ValidationError(f"duplicate {kind} id {entity_id!r}")
        seen.add(entity_id)


def _require_id(entry: dict, kind: str) -> str:
    entity_id = entry.get("id")
    if not isinstance(entity_id, str) or not entity_id:
        raise ValidationError(f"{kind} entry missing a string id: {entry!r}")
    return entity_id


def _gnb_from_dict(entry: dict) -> Gnb:
    gnb_id = _require_id(entry, "gnb")
    return Gnb(id=gnb_id,
               latitude=float(entry.get("latitude", 0.0)),
               longitude=float(entry.get("longitude", 0.0)))


def _cell_from_dict(entry: dict) -> Cell:
    cell_id = _require_id(entry, "cell")
    gnb_id = entry.get("gnb_id")
    if not isinstance(gnb_id, str):
        raise ValidationError(f"cell {cell_id!r} missing gnb_id")
    return Cell(id=cell_id, gnb_id=gnb_id)


def _sector_from_dict(entry: dict) -> Sector:
    sector_id = _require_id(entry, "sector")
    cell_id = entry.get("cell_id")
    if not isinstance(cell_id, str):
        raise ValidationError(f"sector {sector_id!r} missing cell_id")
    capacity = entry.get("ue_capacity")
    if not isinstance(capacity, int) or isinstance(capacity, bool) or capacity <= 0:
        raise ValidationError(
            f"sector {sector_id!r} ue_capacity must be a positive integer")
    max_tp = entry.get("max_throughput")
    if not isinstance(max_tp, (int, float)) or isinstance(max_tp, bool) or max_tp <= 0:
        raise ValidationError(
            f"sector {sector_id!r} max_throughput must be positive")
    return Sector(id=sector_id, cell_id=cell_id, ue_capacity=capacity,
                  max_throughput=float(max_tp))


def _ue_from_dict(entry: dict) -> Ue:
    ue_id = _require_id(entry, "ue")
    raw_class = entry.get("service_class", "data")
    try:
        service_class = ServiceClass(raw_class)
    except ValueError:
        raise ValidationError(f"ue {ue_id!r} has unknown service_class {raw_class!r}") from None
    if "profile" in entry:
        profile = profile_from_dict(entry["profile"])
    else:
        profile = DEFAULT_PROFILES[service_class.value]
    sector_id = entry.get("sector_id")
    if sector_id is not None and not isinstance(sector_id, str):
        raise ValidationError(f"ue {ue_id!r} sector_id must be a string or absent")
    active = entry.get("traffic_active", True)
    if not isinstance(active, bool):
        raise ValidationError(f"ue {ue_id!r} traffic_active must be a boolean")
    return Ue(id=ue_id, service_class=service_class, profile=profile,
              sector_id=sector_id, traffic_active=active)


def _weights_from_dict(entry: dict) -> LoadWeights:
    count_w = entry.get("count_weight", 0.5)
    tp_w = entry.get("tp_weight", 0.5)
    try:
        return LoadWeights(count_weight=float(count_w), tp_weight=float(tp_w))
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"invalid load weights: {exc}") from exc


def _policy_from_dict(entry: dict) -> HandoverPolicy:
    try:
        policy = HandoverPolicy(
            threshold=float(entry.get("threshold", 80.0)),
            latency=float(entry.get("latency", 0.5)),
            failure_injection=float(entry.get("failure_injection", 0.0)),
            max_ues_per_trigger=int(entry.get("max_ues_per_trigger", 1)),
            strategy=str(entry.get("strategy", "threshold_offload")),
        )
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"invalid handover policy: {exc}") from exc
    get_strategy(policy.strategy)
    return policy
