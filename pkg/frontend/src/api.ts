// Typed client for the gateway. Every steering method issues exactly one
// HTTP request; non-2xx responses become GatewayError with the server's
// error text, so callers can render failures inline next to the entity.

import type { Ack, LoadsInfo, NetworkSnapshot, SectorInfo, StatsInfo, UeInfo } from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class GatewayError extends Error {
	readonly status: number;

	constructor(status: number, message: string) {
		super(message);
		this.status = status;
	}
}

export class GatewayClient {
	readonly baseUrl: string;
	private readonly fetchFn: FetchLike;

	constructor(baseUrl: string, fetchFn?: FetchLike) {
		this.baseUrl = baseUrl.replace(/\/$/, "");
		this.fetchFn = fetchFn ?? ((url, init) => fetch(url, init));
	}

	getNetwork(): Promise<NetworkSnapshot> {
		return this.json("GET", "/network");
	}

	getLoads(): Promise<LoadsInfo> {
		return this.json("GET", "/loads");
	}

	getSector(id: string): Promise<SectorInfo & { id: string; tick: number }> {
		return this.json("GET", `/sectors/${encodeURIComponent(id)}`);
	}

	getUe(id: string): Promise<UeInfo & { id: string; tick: number }> {
		return this.json("GET", `/ues/${encodeURIComponent(id)}`);
	}

	getHandoverStats(): Promise<StatsInfo & { tick: number }> {
		return this.json("GET", "/stats/handover");
	}

	async exportMetrics(): Promise<string> {
		const response = await this.fetchFn(`${this.baseUrl}/metrics/export`);
		if (!response.ok) {
			throw new GatewayError(response.status, await response.text());
		}
		return response.text();
	}

	addUe(serviceClass: string): Promise<Ack> {
		return this.json("POST", "/ues", { service_class: serviceClass });
	}

	deleteUe(id: string): Promise<Ack> {
		return this.json("DELETE", `/ues/${encodeURIComponent(id)}`);
	}

	setTraffic(id: string, action: "start" | "stop"): Promise<Ack> {
		return this.json("POST", `/ues/${encodeURIComponent(id)}/traffic`, { action });
	}

	pinThroughput(id: string, bps: number): Promise<Ack> {
		return this.json("PATCH", `/ues/${encodeURIComponent(id)}`, { throughput_bps: bps });
	}

	setSectorCapacity(id: string, capacity: number): Promise<Ack> {
		return this.json("PATCH", `/sectors/${encodeURIComponent(id)}`, { ue_capacity: capacity });
	}

	pause(): Promise<{ paused: boolean; tick: number }> {
		return this.json("POST", "/sim", { action: "pause" });
	}

	resume(): Promise<{ paused: boolean; tick: number }> {
		return this.json("POST", "/sim", { action: "resume" });
	}

	step(n: number): Promise<{ tick: number }> {
		return this.json("POST", "/sim", { action: "step", n });
	}

	startRamp(sectorId?: string): Promise<Ack> {
		const body: Record<string, unknown> = { action: "scenario", name: "rush_hour" };
		if (sectorId) {
			body.sector_id = sectorId;
		}
		return this.json("POST", "/sim", body);
	}

	private async json<T>(method: string, path: string, body?: unknown): Promise<T> {
		const init: RequestInit = { method };
		if (body !== undefined) {
			init.headers = { "Content-Type": "application/json" };
			init.body = JSON.stringify(body);
		}
		const response = await this.fetchFn(`${this.baseUrl}${path}`, init);
		const text = await response.text();
		if (!response.ok) {
			let message = text;
			try {
				message = (JSON.parse(text) as { error?: string }).error ?? text;
			} catch {
				// keep raw text
			}
			throw new GatewayError(response.status, message);
		}
		return JSON.parse(text) as T;
	}
}
