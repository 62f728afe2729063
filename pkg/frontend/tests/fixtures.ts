import type { JournalEvent, LoadsInfo, NetworkSnapshot } from "../src/types.js";

/** A small two-gNB snapshot with controllable sector loads. */
export function snapshot(overrides: Partial<NetworkSnapshot> = {}): NetworkSnapshot {
	const base: NetworkSnapshot = {
		tick: 4,
		paused: false,
		loads: {
			tick: 4,
			per_sector: { "g1c1s1": 73.3, "g1c1s2": 45.0, "g2c1s1": 40.0 },
			per_cell: { "g1c1": 59.15, "g2c1": 40.0 },
			per_gnb: { "g1": 59.15, "g2": 40.0 },
			network_load: 49.58,
		},
		sectors: {
			"g1c1s1": { cell_id: "g1c1", gnb_id: "g1", ue_capacity: 15,
				max_throughput_bps: 100e6, attached_ue_ids: ["u1", "u2"], load: 73.3 },
			"g1c1s2": { cell_id: "g1c1", gnb_id: "g1", ue_capacity: 15,
				max_throughput_bps: 100e6, attached_ue_ids: ["u3"], load: 45.0 },
			"g2c1s1": { cell_id: "g2c1", gnb_id: "g2", ue_capacity: 15,
				max_throughput_bps: 100e6, attached_ue_ids: [], load: 40.0 },
		},
		cells: {
			"g1c1": { gnb_id: "g1", sector_ids: ["g1c1s1", "g1c1s2"], load: 59.15 },
			"g2c1": { gnb_id: "g2", sector_ids: ["g2c1s1"], load: 40.0 },
		},
		gnbs: {
			"g1": { cell_ids: ["g1c1"], load: 59.15 },
			"g2": { cell_ids: ["g2c1"], load: 40.0 },
		},
		ues: {
			"u1": { service_class: "voice", sector_id: "g1c1s1", throughput_bps: 8000,
				delay_s: 0.01, jitter_s: 0.0001, packet_loss: 0.0,
				traffic_active: true, pinned: false },
			"u2": { service_class: "data", sector_id: "g1c1s1", throughput_bps: 8e6,
				delay_s: 0.01, jitter_s: 0.0001, packet_loss: 0.002,
				traffic_active: true, pinned: true },
			"u3": { service_class: "iot", sector_id: "g1c1s2", throughput_bps: 64,
				delay_s: 0.01, jitter_s: 0.0001, packet_loss: 0.0,
				traffic_active: false, pinned: false },
		},
		policy: { threshold: 80, latency: 0.5, failure_injection: 0,
			max_ues_per_trigger: 1, strategy: "threshold_offload" },
		weights: { count_weight: 0.5, tp_weight: 0.5 },
		stats: { attempts: 0, successes: 0, failures: 0, hsr: null, hfr: null,
			handover_count: 0 },
	};
	return { ...base, ...overrides };
}

export function loadsAt(tick: number, sectorA: number): LoadsInfo {
	return {
		tick,
		per_sector: { "g1c1s1": sectorA, "g1c1s2": 45.0, "g2c1s1": 40.0 },
		per_cell: { "g1c1": (sectorA + 45.0) / 2, "g2c1": 40.0 },
		per_gnb: { "g1": (sectorA + 45.0) / 2, "g2": 40.0 },
		network_load: ((sectorA + 45.0) / 2 + 40.0) / 2,
	};
}

export function handoverEvent(seq: number, tick: number): JournalEvent {
	return {
		seq,
		kind: "handover",
		data: {
			ue_id: "u2", source_sector: "g1c1s1", target_sector: "g1c1s2",
			kind: "intra_gnb_du", softness: "soft", start_tick: tick,
			latency: 0.5, outcome: "success",
		},
	};
}

export function tickEvent(seq: number, tick: number, handovers = 0): JournalEvent {
	return {
		seq,
		kind: "tick",
		data: { tick, network_load: 45.0, max_sector_load: 73.0, handovers },
	};
}
