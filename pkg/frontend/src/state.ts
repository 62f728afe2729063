// The view model: everything the page renders, derived purely from gateway
// payloads. Rebuilding from a fresh GET /network must reproduce the exact
// same view (refresh-safety), so no render state lives anywhere else.

import type {
	CommandData,
	HandoverData,
	JournalEvent,
	LoadsInfo,
	NetworkSnapshot,
	StatsInfo,
	TickData,
} from "./types.js";

export const FEED_LIMIT = 500;

export interface GaugeRow {
	id: string;
	kind: "gnb" | "cell" | "sector";
	parent: string | null;
	load: number;
	over: boolean;
	attached?: number;
	capacity?: number;
}

export interface UeRow {
	id: string;
	serviceClass: string;
	sectorId: string | null;
	throughputBps: number;
	delayS: number;
	jitterS: number;
	packetLoss: number;
	active: boolean;
	pinned: boolean;
}

export interface FeedEntry {
	seq: number;
	tick: number;
	kind: string;
	label: string;
	tone: "info" | "good" | "bad";
}

export interface Controls {
	tick: number;
	paused: boolean;
	threshold: number;
	networkLoad: number;
}

export interface View {
	tree: GaugeRow[];
	ues: UeRow[];
	controls: Controls;
	stats: StatsInfo;
}

export function buildView(snapshot: NetworkSnapshot): View {
	const threshold = snapshot.policy.threshold;
	const tree: GaugeRow[] = [];
	for (const gnbId of Object.keys(snapshot.gnbs).sort()) {
		const gnb = snapshot.gnbs[gnbId];
		tree.push({ id: gnbId, kind: "gnb", parent: null, load: gnb.load, over: gnb.load >= threshold });
		for (const cellId of gnb.cell_ids) {
			const cell = snapshot.cells[cellId];
			tree.push({ id: cellId, kind: "cell", parent: gnbId, load: cell.load, over: cell.load >= threshold });
			for (const sectorId of cell.sector_ids) {
				const sector = snapshot.sectors[sectorId];
				tree.push({
					id: sectorId,
					kind: "sector",
					parent: cellId,
					load: sector.load,
					over: sector.load >= threshold,
					attached: sector.attached_ue_ids.length,
					capacity: sector.ue_capacity,
				});
			}
		}
	}
	const ues: UeRow[] = Object.keys(snapshot.ues)
		.sort()
		.map((id) => {
			const ue = snapshot.ues[id];
			return {
				id,
				serviceClass: ue.service_class,
				sectorId: ue.sector_id,
				throughputBps: ue.throughput_bps,
				delayS: ue.delay_s,
				jitterS: ue.jitter_s,
				packetLoss: ue.packet_loss,
				active: ue.traffic_active,
				pinned: ue.pinned,
			};
		});
	return {
		tree,
		ues,
		controls: {
			tick: snapshot.tick,
			paused: snapshot.paused,
			threshold,
			networkLoad: snapshot.loads.network_load,
		},
		stats: snapshot.stats,
	};
}

export class ConsoleState {
	view: View | null = null;
	feed: FeedEntry[] = [];
	connected = false;

	private seenSeq = 0;

	applySnapshot(snapshot: NetworkSnapshot): void {
		this.view = buildView(snapshot);
	}

	/** Refresh gauge loads in place from a GET /loads payload. */
	applyLoads(loads: LoadsInfo): void {
		if (!this.view) {
			return;
		}
		const threshold = this.view.controls.threshold;
		const byLevel = {
			gnb: loads.per_gnb,
			cell: loads.per_cell,
			sector: loads.per_sector,
		} as const;
		for (const row of this.view.tree) {
			const load = byLevel[row.kind][row.id];
			if (load !== undefined) {
				row.load = load;
				row.over = load >= threshold;
			}
		}
		this.view.controls.tick = loads.tick;
		this.view.controls.networkLoad = loads.network_load;
	}

	/**
	 * Fold one journal entry into the feed. Entries at or below the last
	 * seen sequence are duplicates (at-least-once delivery) and ignored.
	 */
	applyEvent(event: JournalEvent): boolean {
		if (event.seq <= this.seenSeq) {
			return false;
		}
		this.seenSeq = event.seq;
		const entry = describe(event);
		if (entry) {
			this.feed.push(entry);
			if (this.feed.length > FEED_LIMIT) {
				this.feed.splice(0, this.feed.length - FEED_LIMIT);
			}
		}
		return true;
	}

	setConnected(connected: boolean): void {
		this.connected = connected;
	}
}

function describe(event: JournalEvent): FeedEntry | null {
	if (event.kind === "handover") {
		const data = event.data as HandoverData;
		const ok = data.outcome === "success";
		return {
			seq: event.seq,
			tick: data.start_tick,
			kind: "handover",
			label: `${data.ue_id}: ${data.source_sector} → ${data.target_sector} ` +
				`(${data.kind}, ${data.softness}, ${data.outcome})`,
			tone: ok ? "good" : "bad",
		};
	}
	if (event.kind === "command") {
		const data = event.data as CommandData;
		return {
			seq: event.seq,
			tick: data.tick,
			kind: "command",
			label: data.ok
				? `${data.origin} ${data.kind} applied`
				: `${data.origin} ${data.kind} failed: ${data.error ?? "?"}`,
			tone: data.ok ? "info" : "bad",
		};
	}
	const data = event.data as TickData;
	if (data.handovers > 0) {
		return {
			seq: event.seq,
			tick: data.tick,
			kind: "tick",
			label: `tick ${data.tick}: ${data.handovers} handover(s), ` +
				`max sector ${data.max_sector_load.toFixed(1)}%`,
			tone: "info",
		};
	}
	return null; // quiet ticks do not clutter the feed
}
