// Journal subscription over server-sent events with resumption.
//
// The gateway numbers journal entries; on reconnect we pass the last seen
// sequence as ?since= so nothing is replayed or lost. Reconnects back off
// exponentially and report status changes so the UI can show a banner.

import type { JournalEvent, JournalKind } from "./types.js";

// Function-property types are deliberately loose so both the browser's
// EventSource and the tests' fake satisfy the interface under strict checks.
export interface EventSourceLike {
	addEventListener(type: string, listener: (event: any) => void): void;
	close(): void;
	onerror: ((event: any) => any) | null;
	onopen: ((event: any) => any) | null;
}

export type EventSourceFactory = (url: string) => EventSourceLike;

export interface StreamOptions {
	backoffMs?: number;
	maxBackoffMs?: number;
}

const KINDS: JournalKind[] = ["tick", "command", "handover"];

export class EventStream {
	lastSeq = 0;

	private source: EventSourceLike | null = null;
	private stopped = false;
	private backoff: number;
	private readonly initialBackoff: number;
	private readonly maxBackoff: number;
	private retryTimer: ReturnType<typeof setTimeout> | null = null;

	constructor(
		private readonly baseUrl: string,
		private readonly onEvent: (event: JournalEvent) => void,
		private readonly onStatus: (connected: boolean) => void,
		private readonly factory: EventSourceFactory,
		options: StreamOptions = {},
	) {
		this.initialBackoff = options.backoffMs ?? 1000;
		this.maxBackoff = options.maxBackoffMs ?? 15000;
		this.backoff = this.initialBackoff;
	}

	start(): void {
		this.stopped = false;
		this.open();
	}

	stop(): void {
		this.stopped = true;
		if (this.retryTimer !== null) {
			clearTimeout(this.retryTimer);
			this.retryTimer = null;
		}
		this.source?.close();
		this.source = null;
	}

	private open(): void {
		const url = `${this.baseUrl}/events?since=${this.lastSeq}`;
		const source = this.factory(url);
		this.source = source;

		source.onopen = () => {
			this.backoff = this.initialBackoff;
			this.onStatus(true);
		};
		source.onerror = () => {
			source.close();
			if (this.source === source) {
				this.source = null;
			}
			this.onStatus(false);
			this.scheduleRetry();
		};
		for (const kind of KINDS) {
			source.addEventListener(kind, (event) => this.deliver(kind, event));
		}
	}

	private deliver(kind: JournalKind, event: MessageEvent): void {
		const seq = Number(event.lastEventId);
		if (!Number.isFinite(seq) || seq <= this.lastSeq) {
			return; // duplicate delivery
		}
		this.lastSeq = seq;
		this.onEvent({ seq, kind, data: JSON.parse(event.data as string) });
	}

	private scheduleRetry(): void {
		if (this.stopped || this.retryTimer !== null) {
			return;
		}
		this.retryTimer = setTimeout(() => {
			this.retryTimer = null;
			if (!this.stopped) {
				this.open();
			}
		}, this.backoff);
		this.backoff = Math.min(this.backoff * 2, this.maxBackoff);
	}
}
