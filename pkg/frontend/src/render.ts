// Pure HTML renderers over the view model. Keeping these as plain string
// functions keeps the whole render path testable without a DOM; main.ts
// only assigns the results to innerHTML and delegates clicks.

import type { FeedEntry, View } from "./state.js";

export function esc(text: string): string {
	return text.replace(/[&<>"']/g, (ch) => ({
		"&": "&amp;", "<": "&lt;", ">": "&gt;", '"': "&quot;", "'": "&#39;",
	}[ch] as string));
}

function gauge(load: number, over: boolean): string {
	const width = Math.max(0, Math.min(100, load)).toFixed(1);
	const cls = over ? "gauge over" : "gauge";
	return `<span class="${cls}"><span class="fill" style="width:${width}%"></span>` +
		`<span class="pct">${load.toFixed(1)}%</span></span>`;
}

export function renderTree(view: View): string {
	const rows = view.tree.map((row) => {
		const occupancy = row.kind === "sector"
			? `<span class="occ">${row.attached}/${row.capacity}</span>`
			: "";
		const ramp = row.kind === "sector"
			? `<button data-action="ramp" data-id="${esc(row.id)}">ramp</button>`
			: "";
		return `<li class="${row.kind}${row.over ? " congested" : ""}" data-node="${esc(row.id)}">` +
			`<span class="label">${esc(row.id)}</span>${gauge(row.load, row.over)}` +
			`${occupancy}${ramp}</li>`;
	});
	return `<ul class="tree">${rows.join("")}</ul>`;
}

export function renderUeTable(view: View): string {
	const rows = view.ues.map((ue) => {
		const mbps = (ue.throughputBps / 1e6).toFixed(2);
		const state = ue.pinned ? "pinned" : ue.active ? "active" : "stopped";
		return `<tr data-ue="${esc(ue.id)}">` +
			`<td>${esc(ue.id)}</td><td>${esc(ue.serviceClass)}</td>` +
			`<td>${esc(ue.sectorId ?? "-")}</td>` +
			`<td class="num">${mbps}</td>` +
			`<td class="num">${(ue.delayS * 1000).toFixed(2)}</td>` +
			`<td class="num">${(ue.packetLoss * 100).toFixed(2)}</td>` +
			`<td>${state}</td>` +
			`<td class="ops">` +
			`<button data-action="traffic-${ue.active ? "stop" : "start"}" data-id="${esc(ue.id)}">${ue.active ? "stop" : "start"}</button>` +
			`<button data-action="pin" data-id="${esc(ue.id)}">pin</button>` +
			`<button data-action="del-ue" data-id="${esc(ue.id)}">delete</button>` +
			`<span class="inline-error" data-error-for="${esc(ue.id)}"></span>` +
			`</td></tr>`;
	});
	return `<table><thead><tr><th>ue</th><th>class</th><th>sector</th>` +
		`<th>MB/s</th><th>delay ms</th><th>loss %</th><th>state</th><th></th>` +
		`</tr></thead><tbody>${rows.join("")}</tbody></table>`;
}

export function renderFeed(feed: FeedEntry[]): string {
	const items = [...feed].reverse().map((entry) =>
		`<li class="${entry.tone}" data-seq="${entry.seq}">` +
		`<span class="tick">t${entry.tick}</span> ${esc(entry.label)}</li>`);
	return `<ol class="feed">${items.join("")}</ol>`;
}

export function renderControls(view: View, connected: boolean): string {
	const c = view.controls;
	const s = view.stats;
	const hsr = s.hsr === null ? "-" : (s.hsr * 100).toFixed(1) + "%";
	return `<span class="tick-now">tick ${c.tick}</span>` +
		`<span>network ${c.networkLoad.toFixed(1)}%</span>` +
		`<span>threshold ${c.threshold}%</span>` +
		`<span>handovers ${s.handover_count} (hsr ${hsr})</span>` +
		`<span class="conn ${connected ? "up" : "down"}">${connected ? "live" : "disconnected"}</span>`;
}

export function renderBanner(connected: boolean): string {
	return connected
		? ""
		: `<div class="banner">gateway unreachable — reconnecting… steering disabled</div>`;
}
