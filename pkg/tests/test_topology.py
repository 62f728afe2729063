import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ransim import (CapacityError, ParseError, UnknownEntityError,
                    ValidationError, build_network, default_config,
                    load_config, merge_documents)

from conftest import make_cfg, make_doc, quiet_ues


def test_minimal_document():
    cfg = load_config(json.dumps(make_doc()))
    assert (len(cfg.gnbs), len(cfg.cells), len(cfg.sectors), len(cfg.ues)) == (1, 1, 1, 0)


def test_dangling_ue_sector_reference_names_entity():
    doc = make_doc(ues=[{"id": "u1", "service_class": "voice", "sector_id": "s9"}])
    with pytest.raises(ValidationError, match="s9"):
        load_config(json.dumps(doc))


def test_stock_topology_counts():
    cfg = load_config(json.dumps(default_config()))
    assert len(cfg.gnbs) == 3
    assert len(cfg.cells) == 18
    assert len(cfg.sectors) == 54
    assert len(cfg.ues) == 540


def test_malformed_document_is_parse_error():
    with pytest.raises(ParseError):
        load_config("{not json")


def test_duplicate_ids_rejected():
    doc = make_doc()
    doc["gnbs"].append({"id": "g1"})
    with pytest.raises(ValidationError, match="g1"):
        load_config(json.dumps(doc))

    doc = make_doc(ues=quiet_ues(1) + quiet_ues(1))
    with pytest.raises(ValidationError, match="u1"):
        load_config(json.dumps(doc))


def test_dangling_cell_and_sector_references():
    doc = make_doc()
    doc["cells"][0]["gnb_id"] = "g9"
    with pytest.raises(ValidationError, match="g9"):
        load_config(json.dumps(doc))

    doc = make_doc()
    doc["sectors"][0]["cell_id"] = "c9"
    with pytest.raises(ValidationError, match="c9"):
        load_config(json.dumps(doc))


def test_non_positive_capacity_rejected():
    doc = make_doc()
    doc["sectors"][0]["ue_capacity"] = 0
    with pytest.raises(ValidationError, match="g1c1s1"):
        load_config(json.dumps(doc))

    doc = make_doc()
    doc["sectors"][0]["max_throughput"] = -5
    with pytest.raises(ValidationError, match="g1c1s1"):
        load_config(json.dumps(doc))


def test_unknown_top_level_key_rejected():
    doc = make_doc()
    doc["bogus"] = 1
    with pytest.raises(ValidationError, match="bogus"):
        load_config(json.dumps(doc))


def test_bad_seed_rejected():
    doc = make_doc()
    doc["seed"] = -1
    with pytest.raises(ValidationError, match="seed"):
        load_config(json.dumps(doc))


def test_unknown_strategy_rejected():
    doc = make_doc(policy={"strategy": "does_not_exist"})
    with pytest.raises(ValidationError, match="does_not_exist"):
        load_config(json.dumps(doc))


def test_empty_gnb_and_empty_cell_rejected_at_build():
    doc = make_doc()
    doc["gnbs"].append({"id": "g2"})
    with pytest.raises(ValidationError, match="g2"):
        build_network(load_config(json.dumps(doc)))

    doc = make_doc()
    doc["cells"].append({"id": "g1c2", "gnb_id": "g1"})
    with pytest.raises(ValidationError, match="g1c2"):
        build_network(load_config(json.dumps(doc)))


def test_merge_documents_round_trip():
    full = make_doc(ues=quiet_ues(2))
    parts = [json.dumps({k: full[k]}) for k in full]
    merged = load_config(merge_documents(parts))
    assert len(merged.ues) == 2


def test_merge_documents_duplicate_key():
    with pytest.raises(ValidationError, match="gnbs"):
        merge_documents([json.dumps({"gnbs": []}), json.dumps({"gnbs": []})])


def test_pinned_ue_is_attached():
    cfg = make_cfg(ues=[{"id": "u1", "service_class": "voice",
                         "sector_id": "g1c1s1"}])
    network, unplaced = build_network(cfg)
    assert "u1" in network.sectors["g1c1s1"].attached_ue_ids
    assert network.ues["u1"].sector_id == "g1c1s1"
    assert unplaced == []


def test_overfull_preplacement_is_capacity_error():
    ues = [{"id": f"u{i}", "service_class": "iot", "sector_id": "g1c1s1"}
           for i in range(11)]
    cfg = make_cfg(ue_capacity=10, ues=ues)
    with pytest.raises(CapacityError, match="g1c1s1"):
        build_network(cfg)


def test_unpinned_ues_round_robin():
    cfg = make_cfg(sectors_per_cell=3, ues=quiet_ues(7))
    network, _ = build_network(cfg)
    counts = [len(network.sectors[s].attached_ue_ids) for s in network.sector_order]
    assert counts == [3, 2, 2]


def test_build_is_deterministic():
    cfg_a = make_cfg(sectors_per_cell=3, ues=quiet_ues(8))
    cfg_b = make_cfg(sectors_per_cell=3, ues=quiet_ues(8))
    net_a, _ = build_network(cfg_a)
    net_b, _ = build_network(cfg_b)
    assert net_a.attachment_map() == net_b.attachment_map()


def test_attachment_bijection():
    network, _ = build_network(make_cfg(sectors_per_cell=3, ues=quiet_ues(8)))
    listed = [uid for s in network.sectors.values() for uid in s.attached_ue_ids]
    assert len(listed) == len(set(listed))
    attached = [uid for uid, sid in network.attachment_map().items() if sid]
    assert sorted(listed) == sorted(attached)
    for uid in attached:
        sid = network.ues[uid].sector_id
        assert uid in network.sectors[sid].attached_ue_ids


class TestNeighbors:
    def test_single_cell(self):
        network, _ = build_network(make_cfg(sectors_per_cell=3))
        assert network.neighbors("g1c1s1") == ["g1c1s2", "g1c1s3"]

    def test_two_cells_same_gnb(self):
        doc = make_doc(cells_per_gnb=2, sectors_per_cell=2)
        doc["sectors"] = [s for s in doc["sectors"] if s["id"] != "g1c2s2"]
        network, _ = build_network(load_config(json.dumps(doc)))
        assert network.neighbors("g1c1s1") == ["g1c1s2", "g1c2s1"]

    def test_sole_sector_has_none(self):
        network, _ = build_network(make_cfg())
        assert network.neighbors("g1c1s1") == []

    def test_unknown_sector(self):
        network, _ = build_network(make_cfg())
        with pytest.raises(UnknownEntityError, match="nope"):
            network.neighbors("nope")

    def test_grouping_order_across_gnbs(self):
        network, _ = build_network(make_cfg(gnbs=2, cells_per_gnb=2,
                                            sectors_per_cell=2))
        got = network.neighbors("g1c2s1")
        assert got == ["g1c2s2",                      # same cell
                       "g1c1s1", "g1c1s2",            # same gNB
                       "g2c1s1", "g2c1s2", "g2c2s1", "g2c2s2"]

    @settings(max_examples=25, deadline=None)
    @given(gnbs=st.integers(1, 3), cells=st.integers(1, 3),
           sectors=st.integers(1, 3))
    def test_never_self_and_symmetric(self, gnbs, cells, sectors):
        network, _ = build_network(make_cfg(gnbs=gnbs, cells_per_gnb=cells,
                                            sectors_per_cell=sectors))
        ids = network.sector_order
        neighbor_sets = {s: set(network.neighbors(s)) for s in ids}
        for s in ids:
            assert s not in neighbor_sets[s]
            assert len(neighbor_sets[s]) == len(ids) - 1
            for other in neighbor_sets[s]:
                assert s in neighbor_sets[other]
