import json

import pytest

from ransim import Engine, NetworkConfig, build_network, load_config


def make_doc(gnbs=1, cells_per_gnb=1, sectors_per_cell=1, ue_capacity=10,
             max_throughput=100e6, ues=(), weights=(0.5, 0.5), policy=None,
             seed=0) -> dict:
    """Small configuration documents for tests; ids follow g1c1s1 style."""
    doc = {
        "gnbs": [{"id": f"g{g + 1}"} for g in range(gnbs)],
        "cells": [],
        "sectors": [],
        "ues": list(ues),
        "weights": {"count_weight": weights[0], "tp_weight": weights[1]},
        "seed": seed,
    }
    for g in range(gnbs):
        for c in range(cells_per_gnb):
            cell_id = f"g{g + 1}c{c + 1}"
            doc["cells"].append({"id": cell_id, "gnb_id": f"g{g + 1}"})
            for s in range(sectors_per_cell):
                doc["sectors"].append({
                    "id": f"{cell_id}s{s + 1}",
                    "cell_id": cell_id,
                    "ue_capacity": ue_capacity,
                    "max_throughput": max_throughput,
                })
    if policy:
        doc["handover_policy"] = policy
    return doc


def make_cfg(**kwargs) -> NetworkConfig:
    return load_config(json.dumps(make_doc(**kwargs)))


def make_network(**kwargs):
    network, unplaced = build_network(make_cfg(**kwargs))
    assert not unplaced
    return network


def fill_sector(network, sector_id, count, throughput=0.0, prefix=None):
    """Attach `count` real, silent UEs to a sector."""
    from ransim import ServiceClass, Ue
    from ransim.traffic import DEFAULT_PROFILES

    prefix = prefix or f"{sector_id}u"
    for i in range(count):
        ue = Ue(id=f"{prefix}{i + 1}", service_class=ServiceClass.DATA,
                profile=DEFAULT_PROFILES["data"], traffic_active=False,
                current_throughput=throughput)
        network.ues[ue.id] = ue
        network.attach(ue.id, sector_id)


def quiet_ues(count, prefix="u", **extra):
    """UE entries that generate no traffic, for load-math tests."""
    return [{"id": f"{prefix}{i + 1}", "service_class": "data",
             "traffic_active": False, **extra} for i in range(count)]


@pytest.fixture
def engine_1x1x3():
    """One gNB, one cell, three sectors, no UEs."""
    return Engine(make_cfg(sectors_per_cell=3))
