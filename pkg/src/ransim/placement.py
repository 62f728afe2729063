"""Round-robin UE placement with capacity fallback.

The ring is the global id-sorted sector list. Placement walks the ring one
sector per UE; when the cursor's sector is full it falls back to the next
sector with free capacity, scanning at most one full revolution. The cursor
then advances past whichever sector was chosen, which keeps counts within one
of each other when capacities are equal.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

from .errors import NetworkFullError

if TYPE_CHECKING:
    from .topology import Network, Ue


@dataclass
class PlacementCursor:
    """Index of the next ring position to try."""

    next_index: int = 0


def place_ue(network: "Network", cursor: PlacementCursor, ue: "Ue") -> str:
    """Attach one unattached UE; returns the chosen sector id.

    Raises NetworkFullError (leaving the UE unattached) when no sector has
    free capacity.
    """
    ring = network.sector_order
    n = len(ring)
    for offset in range(n):
        index = (cursor.next_index + offset) % n
        sector = network.sectors[ring[index]]
        if sector.free_capacity() > 0:
            network.attach(ue.id, sector.id)
            cursor.next_index = (index + 1) % n
            return sector.id
    raise NetworkFullError(f"no sector has free capacity for ue {ue.id!r}")


def place_all(network: "Network", cursor: PlacementCursor,
              ues: list["Ue"]) -> tuple[dict[str, str], list[str]]:
    """Place UEs in input order; full sectors are skipped per UE.

    Returns (ue id -> sector id, unplaced ue ids). A full network does not
    stop the loop: remaining UEs are still tried and reported.
    """
    placed: dict[str, str] = {}
    unplaced: list[str] = []
    for ue in ues:
        try:
            placed[ue.id] = place_ue(network, cursor, ue)
        except NetworkFullError:
            unplaced.append(ue.id)
    return placed, unplaced
