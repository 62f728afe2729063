// Steering fidelity: every client method issues exactly one HTTP request,
// with exactly the documented method, path, and body.

import { describe, expect, it } from "vitest";

import { GatewayClient, GatewayError } from "../src/api.js";

interface Recorded {
	url: string;
	method: string;
	body: unknown;
}

function recordingClient(status = 200, payload: unknown = {}) {
	const calls: Recorded[] = [];
	const fetchFn = async (url: string, init?: RequestInit) => {
		calls.push({
			url,
			method: init?.method ?? "GET",
			body: init?.body ? JSON.parse(init.body as string) : undefined,
		});
		return new Response(JSON.stringify(payload), { status });
	};
	return { client: new GatewayClient("http://gw:8080/", fetchFn), calls };
}

describe("gateway client", () => {
	const table: Array<{
		name: string;
		invoke: (client: GatewayClient) => Promise<unknown>;
		method: string;
		path: string;
		body?: unknown;
	}> = [
		{ name: "getNetwork", invoke: (c) => c.getNetwork(), method: "GET", path: "/network" },
		{ name: "getLoads", invoke: (c) => c.getLoads(), method: "GET", path: "/loads" },
		{ name: "getSector", invoke: (c) => c.getSector("g1c1s1"), method: "GET", path: "/sectors/g1c1s1" },
		{ name: "getUe", invoke: (c) => c.getUe("u1"), method: "GET", path: "/ues/u1" },
		{ name: "getHandoverStats", invoke: (c) => c.getHandoverStats(), method: "GET", path: "/stats/handover" },
		{ name: "addUe", invoke: (c) => c.addUe("video"), method: "POST", path: "/ues", body: { service_class: "video" } },
		{ name: "deleteUe", invoke: (c) => c.deleteUe("u7"), method: "DELETE", path: "/ues/u7" },
		{ name: "setTraffic start", invoke: (c) => c.setTraffic("u1", "start"), method: "POST", path: "/ues/u1/traffic", body: { action: "start" } },
		{ name: "setTraffic stop", invoke: (c) => c.setTraffic("u1", "stop"), method: "POST", path: "/ues/u1/traffic", body: { action: "stop" } },
		{ name: "pinThroughput", invoke: (c) => c.pinThroughput("u2", 40.3e6), method: "PATCH", path: "/ues/u2", body: { throughput_bps: 40.3e6 } },
		{ name: "setSectorCapacity", invoke: (c) => c.setSectorCapacity("g1c1s1", 20), method: "PATCH", path: "/sectors/g1c1s1", body: { ue_capacity: 20 } },
		{ name: "pause", invoke: (c) => c.pause(), method: "POST", path: "/sim", body: { action: "pause" } },
		{ name: "resume", invoke: (c) => c.resume(), method: "POST", path: "/sim", body: { action: "resume" } },
		{ name: "step", invoke: (c) => c.step(5), method: "POST", path: "/sim", body: { action: "step", n: 5 } },
		{ name: "startRamp default", invoke: (c) => c.startRamp(), method: "POST", path: "/sim", body: { action: "scenario", name: "rush_hour" } },
		{ name: "startRamp targeted", invoke: (c) => c.startRamp("g1c1s1"), method: "POST", path: "/sim", body: { action: "scenario", name: "rush_hour", sector_id: "g1c1s1" } },
	];

	for (const entry of table) {
		it(`${entry.name} issues exactly the documented call`, async () => {
			const { client, calls } = recordingClient();
			await entry.invoke(client);
			expect(calls).toHaveLength(1);
			expect(calls[0].method).toBe(entry.method);
			expect(calls[0].url).toBe(`http://gw:8080${entry.path}`);
			expect(calls[0].body).toEqual(entry.body);
		});
	}

	it("maps 4xx responses to GatewayError with the server message", async () => {
		const { client, calls } = recordingClient(404, { error: "unknown ue 'zz'" });
		await expect(client.deleteUe("zz")).rejects.toMatchObject({
			status: 404,
			message: "unknown ue 'zz'",
		});
		expect(calls).toHaveLength(1); // no retry: one action, one request
	});

	it("409 on sector capacity shrink is surfaced", async () => {
		const { client } = recordingClient(409, { error: "sector 'g1c1s1' holds 9 ues" });
		const failure = await client.setSectorCapacity("g1c1s1", 1).catch((e) => e);
		expect(failure).toBeInstanceOf(GatewayError);
		expect(failure.status).toBe(409);
		expect(failure.message).toContain("g1c1s1");
	});

	it("exportMetrics returns raw text", async () => {
		const fetchFn = async () =>
			new Response("network_load load=45.0 0\n", { status: 200 });
		const client = new GatewayClient("http://gw:8080", fetchFn);
		expect(await client.exportMetrics()).toContain("network_load");
	});
});
