"""Load percentages that drive the balancer.

A sector's load blends two signals: how full its attachment list is, and how
much of its throughput cap the attached UEs are consuming. Cell and gNodeB
loads are plain arithmetic means of the level below; the network figure is the
mean of the gNodeB loads. All math is double precision over immutable
snapshots, so everything here is safe to call from any thread.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterable

from .errors import ValidationError

if TYPE_CHECKING:
    from .topology import Cell, Gnb, Network, Sector, Ue


@dataclass(frozen=True)
class LoadWeights:
    """Blend weights for the two sector-load components.

    Both weights are non-negative and must sum to 1.
    """

    count_weight: float = 0.5
    tp_weight: float = 0.5

    def __post_init__(self):
        if self.count_weight < 0 or self.tp_weight < 0:
            raise ValidationError("load weights must be non-negative")
        if abs(self.count_weight + self.tp_weight - 1.0) > 1e-12:
            raise ValidationError(
                f"load weights must sum to 1, got "
                f"{self.count_weight} + {self.tp_weight}")


@dataclass
class LoadReport:
    """All load levels for one tick, keyed by entity id."""

    per_sector: dict[str, float] = field(default_factory=dict)
    per_cell: dict[str, float] = field(default_factory=dict)
    per_gnb: dict[str, float] = field(default_factory=dict)
    network_load: float = 0.0
    tick: int = 0


def ue_count_load(sector: "Sector") -> float:
    """Attachment fullness in percent. Deliberately unclamped: a sector
    over-filled by explicit pre-placement reports more than 100."""
    return len(sector.attached_ue_ids) / sector.ue_capacity * 100.0


def throughput_load(sector: "Sector", ues: dict[str, "Ue"]) -> float:
    """Aggregate UE throughput, capped at the sector maximum, in percent.

    The cap binds at the sector level, so the result is always in [0, 100].
    """
    total = sum(ues[uid].current_throughput for uid in sector.attached_ue_ids)
    return min(total, sector.max_throughput) / sector.max_throughput * 100.0


def sector_load(sector: "Sector", weights: LoadWeights, ues: dict[str, "Ue"]) -> float:
    return (weights.count_weight * ue_count_load(sector)
            + weights.tp_weight * throughput_load(sector, ues))


def cell_load(cell: "Cell", network: "Network", weights: LoadWeights) -> float:
    return _mean(sector_load(network.sectors[sid], weights, network.ues)
                 for sid in cell.sector_ids)


def gnb_load(gnb: "Gnb", network: "Network", weights: LoadWeights) -> float:
    return _mean(cell_load(network.cells[cid], network, weights)
                 for cid in gnb.cell_ids)


def load_report(network: "Network", weights: LoadWeights, tick: int = 0) -> LoadReport:
    """Compute every level in one pass over the sectors."""
    report = LoadReport(tick=tick)
    for sector_id in network.sector_order:
        sector = network.sectors[sector_id]
        report.per_sector[sector_id] = sector_load(sector, weights, network.ues)
    for cell_id in sorted(network.cells):
        cell = network.cells[cell_id]
        report.per_cell[cell_id] = _mean(
            report.per_sector[sid] for sid in cell.sector_ids)
    for gnb_id in sorted(network.gnbs):
        gnb = network.gnbs[gnb_id]
        report.per_gnb[gnb_id] = _mean(
            report.per_cell[cid] for cid in gnb.cell_ids)
    report.network_load = _mean(report.per_gnb.values()) if report.per_gnb else 0.0
    return report


def _mean(values: Iterable[float]) -> float:
    items = list(values)
    return sum(items) / len(items)
