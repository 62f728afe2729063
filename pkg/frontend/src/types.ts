// Shapes of the gateway's JSON payloads.

export interface PolicyInfo {
	threshold: number;
	latency: number;
	failure_injection: number;
	max_ues_per_trigger: number;
	strategy: string;
}

export interface WeightsInfo {
	count_weight: number;
	tp_weight: number;
}

export interface SectorInfo {
	cell_id: string;
	gnb_id: string;
	ue_capacity: number;
	max_throughput_bps: number;
	attached_ue_ids: string[];
	load: number;
}

export interface CellInfo {
	gnb_id: string;
	sector_ids: string[];
	load: number;
}

export interface GnbInfo {
	cell_ids: string[];
	load: number;
}

export interface UeInfo {
	service_class: string;
	sector_id: string | null;
	throughput_bps: number;
	delay_s: number;
	jitter_s: number;
	packet_loss: number;
	traffic_active: boolean;
	pinned: boolean;
}

export interface StatsInfo {
	attempts: number;
	successes: number;
	failures: number;
	hsr: number | null;
	hfr: number | null;
	handover_count: number;
}

export interface LoadsInfo {
	tick: number;
	per_sector: Record<string, number>;
	per_cell: Record<string, number>;
	per_gnb: Record<string, number>;
	network_load: number;
}

export interface NetworkSnapshot {
	tick: number;
	paused: boolean;
	loads: LoadsInfo;
	sectors: Record<string, SectorInfo>;
	cells: Record<string, CellInfo>;
	gnbs: Record<string, GnbInfo>;
	ues: Record<string, UeInfo>;
	policy: PolicyInfo;
	weights: WeightsInfo;
	stats: StatsInfo;
}

export interface Ack {
	queued: string;
	apply_tick: number;
}

export interface HandoverData {
	ue_id: string;
	source_sector: string;
	target_sector: string;
	kind: string;
	softness: string;
	start_tick: number;
	latency: number;
	outcome: string;
}

export interface TickData {
	tick: number;
	network_load: number;
	max_sector_load: number;
	handovers: number;
}

export interface CommandData {
	tick: number;
	origin: string;
	kind: string;
	payload: Record<string, unknown>;
	ok: boolean;
	result?: Record<string, unknown>;
	error?: string;
}

export type JournalKind = "tick" | "command" | "handover";

export interface JournalEvent {
	seq: number;
	kind: JournalKind;
	data: TickData | CommandData | HandoverData;
}
