// Replays engine-recorded HTTP exchanges as a fetch implementation.
//
// The fixtures are exported by scripts/export_ui_fixtures.py from a live
// engine, so every body and status code below originated server-side.
// The server enforces the same idempotency rule as the engine: one
// applied answer per landmark, duplicates get the original ack replayed.

import { FetchFn } from '../src/api';

export interface RecordedResponse {
    status: number;
    body: unknown;
}

export interface ScenarioStep {
    landmarkId: string;
    question: RecordedResponse;
    ack: RecordedResponse;
}

export interface Scenario {
    name: string;
    taskId: string;
    workerId: string;
    steps: ScenarioStep[];
    answers: boolean[];
    expectedLandmarks: string[];
    final: RecordedResponse;
    rewardBalance: number;
    earlyClosed: boolean;
}

export interface FixtureFile {
    scenarios: Scenario[];
}

function toResponse(rec: RecordedResponse): Response {
    return {
        ok: rec.status >= 200 && rec.status < 300,
        status: rec.status,
        statusText: String(rec.status),
        json: async () => rec.body,
    } as unknown as Response;
}

export class FixtureServer {
    /** POSTs that actually advanced the trace */
    applied = 0;
    /** all POSTs received, duplicates included */
    received = 0;
    private cursor = 0;
    private readonly acked = new Map<string, RecordedResponse>();

    constructor(private readonly scenario: Scenario) {}

    readonly fetch: FetchFn = async (url, init) => {
        const { taskId, workerId } = this.scenario;
        const method = init?.method ?? 'GET';
        if (method === 'GET' && url.endsWith(`/tasks/${taskId}/workers/${workerId}/next`)) {
            return this.next();
        }
        if (method === 'POST' && url.endsWith(`/tasks/${taskId}/workers/${workerId}/answers`)) {
            return this.answer(JSON.parse(String(init?.body)));
        }
        if (method === 'GET' && url.endsWith(`/workers/${workerId}/rewards`)) {
            return this.rewards();
        }
        return toResponse({ status: 404, body: { detail: `no fixture for ${method} ${url}` } });
    };

    private next(): Response {
        if (this.cursor < this.scenario.steps.length) {
            return toResponse(this.scenario.steps[this.cursor].question);
        }
        return toResponse(this.scenario.final);
    }

    private answer(body: { landmark_id: string; answer: boolean }): Response {
        this.received += 1;
        const replay = this.acked.get(body.landmark_id);
        if (replay) {
            return toResponse(replay); // duplicate: no state change
        }
        const step = this.scenario.steps[this.cursor];
        if (!step || step.landmarkId !== body.landmark_id) {
            return toResponse({
                status: 422,
                body: { detail: `expected ${step?.landmarkId}, got ${body.landmark_id}` },
            });
        }
        this.applied += 1;
        this.cursor += 1;
        this.acked.set(body.landmark_id, step.ack);
        return toResponse(step.ack);
    }

    private rewards(): Response {
        const done = this.cursor >= this.scenario.steps.length;
        return toResponse({
            status: 200,
            body: {
                worker_id: this.scenario.workerId,
                balance: done && !this.scenario.earlyClosed ? this.scenario.rewardBalance : 0,
            },
        });
    }
}

/** Wrap a fetch so its first `failures` POSTs die at the network level. */
export function flaky(inner: FetchFn, failures: number): FetchFn {
    let remaining = failures;
    return async (url, init) => {
        if ((init?.method ?? 'GET') === 'POST' && remaining > 0) {
            remaining -= 1;
            throw new TypeError('network error');
        }
        return inner(url, init);
    };
}
