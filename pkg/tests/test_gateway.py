import json
import threading

import pytest
import requests

from ransim import Engine, default_config, load_config, parse_line_protocol
from ransim.gateway import Gateway

from conftest import make_cfg, quiet_ues


@pytest.fixture
def gw():
    """Fresh engine + gateway on an ephemeral port; yields (base_url, engine)."""
    engine = Engine(make_cfg(sectors_per_cell=3,
                             ues=[{"id": "u1", "service_class": "voice",
                                   "sector_id": "g1c1s1"},
                                  {"id": "u2", "service_class": "data",
                                   "sector_id": "g1c1s1"}]))
    gateway = Gateway(engine, host="127.0.0.1", port=0, heartbeat_s=0.2)
    gateway.start()
    host, port = gateway.address
    try:
        yield f"http://{host}:{port}", engine
    finally:
        gateway.stop()


@pytest.fixture
def stock_gw():
    engine = Engine(load_config(json.dumps(default_config())))
    gateway = Gateway(engine, host="127.0.0.1", port=0, heartbeat_s=0.2)
    gateway.start()
    host, port = gateway.address
    try:
        yield f"http://{host}:{port}", engine
    finally:
        gateway.stop()


def test_index_and_network(gw):
    base, engine = gw
    index = requests.get(f"{base}/").json()
    assert index["service"] == "ransim"
    snap = requests.get(f"{base}/network").json()
    assert snap["policy"]["threshold"] == 80.0
    assert "g1c1s1" in snap["sectors"]
    assert set(snap["ues"]) == {"u1", "u2"}


def test_loads_cross_checks_metrics_store(gw):
    base, engine = gw
    engine.step(3)
    loads = requests.get(f"{base}/loads").json()
    assert loads["tick"] == 2
    for sector_id, value in loads["per_sector"].items():
        points = engine.store.query("sector_load", {"sector": sector_id},
                                    start_tick=2, end_tick=2)
        assert dict(points[0].fields)["load"] == value


def test_entity_reads_and_404s(gw):
    base, engine = gw
    engine.step(1)
    sector = requests.get(f"{base}/sectors/g1c1s1").json()
    assert sector["attached_ue_ids"] == ["u1", "u2"]
    ue = requests.get(f"{base}/ues/u1").json()
    assert ue["service_class"] == "voice"
    assert requests.get(f"{base}/sectors/zz").status_code == 404
    assert requests.get(f"{base}/ues/zz").status_code == 404
    assert requests.get(f"{base}/nonsense").status_code == 404


def test_add_and_delete_ue(gw):
    base, engine = gw
    reply = requests.post(f"{base}/ues", json={"service_class": "iot"})
    assert reply.status_code == 202
    apply_tick = reply.json()["apply_tick"]
    engine.step(1)
    snap = requests.get(f"{base}/network").json()
    assert snap["tick"] >= apply_tick
    new_ids = set(snap["ues"]) - {"u1", "u2"}
    assert len(new_ids) == 1
    new_id = new_ids.pop()

    assert requests.delete(f"{base}/ues/zz").status_code == 404
    reply = requests.delete(f"{base}/ues/{new_id}")
    assert reply.status_code == 202
    engine.step(1)
    assert requests.get(f"{base}/ues/{new_id}").status_code == 404


def test_add_ue_rejects_unknown_fields(gw):
    base, _ = gw
    reply = requests.post(f"{base}/ues", json={"bogus": 1})
    assert reply.status_code == 400


def test_traffic_actions(gw):
    base, engine = gw
    reply = requests.post(f"{base}/ues/u1/traffic", json={"action": "stop"})
    assert reply.status_code == 202
    engine.step(1)
    assert requests.get(f"{base}/ues/u1").json()["traffic_active"] is False
    reply = requests.post(f"{base}/ues/u1/traffic", json={"action": "start"})
    assert reply.status_code == 202
    engine.step(1)
    assert requests.get(f"{base}/ues/u1").json()["traffic_active"] is True
    assert requests.post(f"{base}/ues/u1/traffic",
                         json={"action": "dance"}).status_code == 400
    assert requests.post(f"{base}/ues/zz/traffic",
                         json={"action": "stop"}).status_code == 404


def test_patch_throughput_feeds_next_tick(gw):
    base, engine = gw
    reply = requests.patch(f"{base}/ues/u2", json={"throughput_bps": 40.3e6})
    assert reply.status_code == 202
    apply_tick = reply.json()["apply_tick"]
    # Not yet visible: the snapshot still predates the apply tick.
    stale = requests.get(f"{base}/ues/u2").json()
    assert stale["tick"] < apply_tick
    assert stale["throughput_bps"] != 40.3e6
    engine.step(1)
    ue = requests.get(f"{base}/ues/u2").json()
    assert ue["tick"] == apply_tick
    assert ue["throughput_bps"] == 40.3e6
    assert ue["pinned"] is True
    # The sector sum now includes the pinned value.
    total = sum(requests.get(f"{base}/ues/{u}").json()["throughput_bps"]
                for u in ("u1", "u2"))
    assert total >= 40.3e6


def test_patch_ue_validation(gw):
    base, _ = gw
    assert requests.patch(f"{base}/ues/zz",
                          json={"throughput_bps": 1}).status_code == 404
    assert requests.patch(f"{base}/ues/u1", json={}).status_code == 400
    assert requests.patch(f"{base}/ues/u1",
                          json={"throughput_bps": -5}).status_code == 400
    assert requests.patch(f"{base}/ues/u1",
                          json={"throughput_bps": 1, "delay_s": 1}).status_code == 400
    assert requests.patch(f"{base}/ues/u1",
                          json={"delay_s": "soon"}).status_code == 400


def test_patch_sector_capacity_conflict(gw):
    base, engine = gw
    # Two UEs attached: shrinking capacity below 2 must be refused.
    reply = requests.patch(f"{base}/sectors/g1c1s1", json={"ue_capacity": 1})
    assert reply.status_code == 409
    reply = requests.patch(f"{base}/sectors/g1c1s1", json={"ue_capacity": 5})
    assert reply.status_code == 202
    engine.step(1)
    assert requests.get(f"{base}/sectors/g1c1s1").json()["ue_capacity"] == 5
    reply = requests.patch(f"{base}/sectors/g1c1s1",
                           json={"max_throughput_bps": 50e6})
    assert reply.status_code == 202
    engine.step(1)
    assert requests.get(f"{base}/sectors/g1c1s1").json()["max_throughput_bps"] == 50e6
    assert requests.patch(f"{base}/sectors/zz",
                          json={"ue_capacity": 5}).status_code == 404
    assert requests.patch(f"{base}/sectors/g1c1s1", json={}).status_code == 400


def test_handover_stats_endpoint(gw):
    base, engine = gw
    stats = requests.get(f"{base}/stats/handover").json()
    assert stats["attempts"] == 0
    assert stats["hsr"] is None


def test_metrics_export_endpoint(gw):
    base, engine = gw
    engine.step(2)
    text = requests.get(f"{base}/metrics/export").text
    points = parse_line_protocol(text)
    assert points
    ranged = requests.get(f"{base}/metrics/export?start=1&end=1").text
    assert all(p.timestamp == engine.store.timestamp_for(1)
               for p in parse_line_protocol(ranged))


def test_sim_control(gw):
    base, engine = gw
    reply = requests.post(f"{base}/sim", json={"action": "step", "n": 4})
    assert reply.json()["tick"] == 4
    assert requests.post(f"{base}/sim", json={"action": "pause"}).json()["paused"]
    assert engine.paused
    assert not requests.post(f"{base}/sim",
                             json={"action": "resume"}).json()["paused"]
    assert requests.post(f"{base}/sim",
                         json={"action": "step", "n": 0}).status_code == 400
    assert requests.post(f"{base}/sim",
                         json={"action": "zap"}).status_code == 400


def test_sim_scenario_launches_ramp(stock_gw):
    base, engine = stock_gw
    reply = requests.post(f"{base}/sim", json={"action": "scenario",
                                               "name": "rush_hour"})
    assert reply.status_code == 202
    engine.step(6)
    assert len(engine.handover_events) == 1
    assert requests.post(f"{base}/sim",
                         json={"action": "scenario",
                               "name": "mystery"}).status_code == 400


def test_reads_are_side_effect_free(gw):
    base, engine = gw
    engine.step(2)
    before = engine.run_record("probe").to_json()
    for _ in range(3):
        requests.get(f"{base}/network")
        requests.get(f"{base}/loads")
        requests.get(f"{base}/stats/handover")
        requests.get(f"{base}/metrics/export")
    assert engine.run_record("probe").to_json() == before


# ------------------------------------------------------------------- events

def read_sse(base, params, count, timeout=5.0):
    """Collect up to `count` SSE data events as (id, event, data) tuples."""
    events = []
    with requests.get(f"{base}/events", params=params, stream=True,
                      timeout=timeout) as reply:
        current = {}
        for raw in reply.iter_lines(decode_unicode=True):
            if raw is None:
                continue
            if raw == "":
                if "data" in current:
                    events.append((int(current["id"]), current["event"],
                                   json.loads(current["data"])))
                    if len(events) >= count:
                        break
                current = {}
                continue
            if raw.startswith(":"):
                current.setdefault("comments", []).append(raw)
                continue
            key, _, value = raw.partition(":")
            current[key.strip()] = value.strip()
    return events


def test_event_stream_carries_journal(gw):
    base, engine = gw
    engine.step(3)
    events = read_sse(base, {"since": 0, "limit": 3}, count=3)
    assert [e[0] for e in events] == [1, 2, 3]
    kinds = [e[1] for e in events]
    assert kinds == ["tick", "tick", "tick"]
    assert events[0][2]["tick"] == 0


def test_event_stream_resume(gw):
    base, engine = gw
    engine.step(4)
    events = read_sse(base, {"since": 2, "limit": 1}, count=1)
    assert events[0][0] == 3


def test_heartbeat_only_when_idle(gw):
    base, engine = gw
    engine.step(1)
    last = engine.journal[-1]["seq"]
    saw_heartbeat = threading.Event()
    with requests.get(f"{base}/events", params={"since": last}, stream=True,
                      timeout=3) as reply:
        for raw in reply.iter_lines(decode_unicode=True):
            if raw and raw.startswith(": heartbeat"):
                saw_heartbeat.set()
                break
            assert not (raw or "").startswith("data"), "unexpected data event"
    assert saw_heartbeat.is_set()


def test_ramp_handover_appears_in_stream(stock_gw):
    base, engine = stock_gw
    requests.post(f"{base}/sim", json={"action": "scenario", "name": "rush_hour"})
    engine.step(6)
    collected = []
    with requests.get(f"{base}/events", params={"since": 0}, stream=True,
                      timeout=5) as reply:
        current = {}
        for raw in reply.iter_lines(decode_unicode=True):
            if raw == "":
                if "data" in current:
                    collected.append((current["event"],
                                      json.loads(current["data"])))
                current = {}
                if any(kind == "handover" for kind, _ in collected):
                    break
                continue
            if raw and not raw.startswith(":"):
                key, _, value = raw.partition(":")
                current[key.strip()] = value.strip()
    handovers = [data for kind, data in collected if kind == "handover"]
    assert handovers
    assert handovers[0]["start_tick"] == engine.handover_events[0].start_tick
