// Page bootstrap: wires the gateway client, the view-model store, and the
// event stream into the static page. All simulation truth lives behind the
// gateway; a refresh reconstructs the identical view from GET requests.

import { GatewayClient, GatewayError } from "./api.js";
import { ConsoleState } from "./state.js";
import { EventStream } from "./stream.js";
import { renderBanner, renderControls, renderFeed, renderTree, renderUeTable } from "./render.js";

const params = new URLSearchParams(window.location.search);
const baseUrl = params.get("api") ?? "http://127.0.0.1:8080";

const client = new GatewayClient(baseUrl);
const state = new ConsoleState();

const el = {
	banner: document.getElementById("banner")!,
	controls: document.getElementById("controls")!,
	tree: document.getElementById("tree")!,
	ues: document.getElementById("ues")!,
	feed: document.getElementById("feed")!,
	toast: document.getElementById("toast")!,
};

function render(): void {
	el.banner.innerHTML = renderBanner(state.connected);
	if (!state.view) {
		return;
	}
	el.controls.innerHTML = renderControls(state.view, state.connected);
	el.tree.innerHTML = renderTree(state.view);
	el.ues.innerHTML = renderUeTable(state.view);
	el.feed.innerHTML = renderFeed(state.feed);
	document.querySelectorAll<HTMLButtonElement>("button[data-action]").forEach((button) => {
		button.disabled = !state.connected && button.dataset.action !== "refresh";
	});
}

let toastTimer: ReturnType<typeof setTimeout> | null = null;

function toast(message: string, bad = false): void {
	el.toast.textContent = message;
	el.toast.className = bad ? "show bad" : "show";
	if (toastTimer) {
		clearTimeout(toastTimer);
	}
	toastTimer = setTimeout(() => {
		el.toast.className = "";
	}, 2500);
}

async function refreshSnapshot(): Promise<void> {
	state.applySnapshot(await client.getNetwork());
	render();
}

async function refreshLoads(): Promise<void> {
	state.applyLoads(await client.getLoads());
	render();
}

const stream = new EventStream(
	baseUrl,
	(event) => {
		if (!state.applyEvent(event)) {
			return;
		}
		// Ticks move gauges; commands and handovers change entities.
		const refresh = event.kind === "tick" ? refreshLoads() : refreshSnapshot();
		refresh.catch(() => undefined);
		render();
	},
	(connected) => {
		state.setConnected(connected);
		if (connected) {
			refreshSnapshot().catch(() => undefined);
		}
		render();
	},
	(url) => new EventSource(url),
	{ backoffMs: 1000, maxBackoffMs: 15000 },
);

type Steer = (id: string) => Promise<{ apply_tick?: number; tick?: number }>;

const actions: Record<string, Steer> = {
	"add-ue": () => {
		const select = document.getElementById("ue-class") as HTMLSelectElement;
		return client.addUe(select.value);
	},
	"del-ue": (id) => client.deleteUe(id),
	"traffic-start": (id) => client.setTraffic(id, "start"),
	"traffic-stop": (id) => client.setTraffic(id, "stop"),
	"pin": (id) => {
		const raw = window.prompt(`throughput for ${id} (MB/s)`, "8");
		if (raw === null) {
			return Promise.reject(new Error("cancelled"));
		}
		return client.pinThroughput(id, Number(raw) * 1e6);
	},
	"ramp": (id) => client.startRamp(id || undefined),
	"pause": () => client.pause(),
	"resume": () => client.resume(),
	"step": () => client.step(Number((document.getElementById("step-n") as HTMLInputElement).value) || 1),
	"refresh": async () => {
		await refreshSnapshot();
		return {};
	},
};

document.addEventListener("click", (event) => {
	const target = event.target as HTMLElement;
	const action = target.dataset?.action;
	if (!action || !(action in actions)) {
		return;
	}
	const id = target.dataset.id ?? "";
	clearInlineErrors();
	actions[action](id)
		.then((ack) => {
			if (ack.apply_tick !== undefined) {
				toast(`${action} queued, applies at tick ${ack.apply_tick}`);
			} else if (ack.tick !== undefined) {
				toast(`${action}: tick ${ack.tick}`);
			}
		})
		.catch((error: unknown) => {
			if (error instanceof GatewayError) {
				showInlineError(id, `${error.status}: ${error.message}`);
				toast(`${action} rejected (${error.status})`, true);
			} else if ((error as Error).message !== "cancelled") {
				toast(`${action} failed: ${(error as Error).message}`, true);
			}
		});
});

function clearInlineErrors(): void {
	document.querySelectorAll(".inline-error").forEach((node) => {
		node.textContent = "";
	});
}

function showInlineError(id: string, message: string): void {
	const slot = document.querySelector(`[data-error-for="${CSS.escape(id)}"]`);
	if (slot) {
		slot.textContent = message;
	} else {
		toast(`${id}: ${message}`, true);
	}
}

refreshSnapshot().catch(() => {
	state.setConnected(false);
	render();
});
stream.start();
