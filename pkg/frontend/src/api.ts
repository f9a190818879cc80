// Thin fetch client for the engine's worker API.
//
// Answer submission is retried on network failure with the same payload.
// The server records at most one answer per (task, worker, landmark) and
// replays the original acknowledgment for duplicates, so retries are safe
// and the trace can never fork.

import {
    AnswerAck,
    ApiError,
    AssignmentSummary,
    NextPayload,
    RequestStatus,
    RewardBalance,
} from './types';

export type FetchFn = (url: string, init?: RequestInit) => Promise<Response>;

export interface ClientOptions {
    baseUrl?: string;
    fetchFn?: FetchFn;
    /** retries for POSTs that fail at the network level */
    maxRetries?: number;
    retryDelayMs?: number;
}

const sleep = (ms: number) => new Promise((r) => setTimeout(r, ms));

export class ApiClient {
    private readonly baseUrl: string;
    private readonly fetchFn: FetchFn;
    private readonly maxRetries: number;
    private readonly retryDelayMs: number;

    constructor(opts: ClientOptions = {}) {
        this.baseUrl = (opts.baseUrl ?? '').replace(/\/$/, '');
        this.fetchFn = opts.fetchFn ?? fetch.bind(globalThis);
        this.maxRetries = opts.maxRetries ?? 3;
        this.retryDelayMs = opts.retryDelayMs ?? 250;
    }

    private async parse<T>(res: Response): Promise<T> {
        const body = await res.json().catch(() => ({}));
        if (!res.ok) {
            throw new ApiError(res.status, (body as { detail?: string }).detail ?? res.statusText);
        }
        return body as T;
    }

    private async get<T>(path: string): Promise<T> {
        const res = await this.fetchFn(this.baseUrl + path);
        return this.parse<T>(res);
    }

    async nextQuestion(taskId: string, workerId: string): Promise<NextPayload> {
        return this.get(`/tasks/${taskId}/workers/${workerId}/next`);
    }

    async assignments(workerId: string): Promise<AssignmentSummary[]> {
        return this.get(`/workers/${workerId}/assignments`);
    }

    async rewardBalance(workerId: string): Promise<RewardBalance> {
        return this.get(`/workers/${workerId}/rewards`);
    }

    async requestStatus(requestId: string): Promise<RequestStatus> {
        return this.get(`/requests/${requestId}`);
    }

    /**
     * Submit one yes/no answer. Network failures are retried with an
     * identical payload; the server-side idempotency key is the landmark
     * id, so a duplicate delivery is acknowledged, not double-counted.
     */
    async submitAnswer(
        taskId: string,
        workerId: string,
        landmarkId: string,
        answer: boolean,
    ): Promise<AnswerAck> {
        const url = `${this.baseUrl}/tasks/${taskId}/workers/${workerId}/answers`;
        const init: RequestInit = {
            method: 'POST',
            headers: { 'Content-Type': 'application/json' },
            body: JSON.stringify({ landmark_id: landmarkId, answer }),
        };
        let lastError: unknown;
        for (let attempt = 0; attempt <= this.maxRetries; attempt++) {
            try {
                const res = await this.fetchFn(url, init);
                return await this.parse<AnswerAck>(res);
            } catch (e) {
                if (e instanceof ApiError) throw e; // server spoke; don't resend
                lastError = e;
                if (attempt < this.maxRetries) await sleep(this.retryDelayMs);
            }
        }
        throw lastError;
    }
}
