// Worker answering session: one active question at a time, advancing only
// on server acknowledgment. The client holds no route knowledge; every
// question shown comes verbatim from the engine's next-question endpoint.

import { ApiClient } from './api';
import {
    ApiError,
    QuestionPayload,
    QuestionView,
    SessionPhase,
} from './types';

function formatDeparture(epochSeconds: number): string {
    const d = new Date(epochSeconds * 1000);
    const hh = String(d.getUTCHours()).padStart(2, '0');
    const mm = String(d.getUTCMinutes()).padStart(2, '0');
    return `${hh}:${mm}`;
}

export function toQuestionView(taskId: string, q: QuestionPayload): QuestionView {
    return {
        taskId,
        landmarkId: q.landmark_id,
        landmarkName: q.name,
        pin: { lat: q.lat, lon: q.lon },
        questionIndex: q.question_index,
        prompt: `Do you prefer the route passing ${q.name} at ${formatDeparture(q.departure_time)}?`,
    };
}

export class WorkerSession {
    phase: SessionPhase = 'idle';
    current: QuestionView | null = null;
    /** landmark ids rendered so far, in order */
    readonly shownLandmarks: string[] = [];
    /** answered trace mirroring the server */
    readonly trace: Array<{ landmarkId: string; answer: boolean }> = [];
    routeIndex: number | null = null;
    reward: number | null = null;
    banner: string | null = null;

    constructor(
        private readonly api: ApiClient,
        readonly taskId: string,
        readonly workerId: string,
    ) {}

    /** Fetch and display the next question (or the terminal screen). */
    async fetchNextQuestion(): Promise<void> {
        let payload;
        try {
            payload = await this.api.nextQuestion(this.taskId, this.workerId);
        } catch (e) {
            if (e instanceof ApiError && (e.status === 409 || e.status === 403)) {
                this.close(e);
                return;
            }
            throw e;
        }
        if (payload.kind === 'done') {
            this.routeIndex = payload.route_index;
            await this.finish();
            return;
        }
        this.current = toQuestionView(this.taskId, payload);
        this.shownLandmarks.push(payload.landmark_id);
        this.phase = 'question';
    }

    /**
     * Submit the answer for the question on screen. State advances only
     * once the server acknowledges; a second call while submitting is a
     * no-op (double-click guard on top of server-side idempotency).
     */
    async submitAnswer(answer: boolean): Promise<void> {
        if (this.phase !== 'question' || !this.current) return;
        const q = this.current;
        this.phase = 'submitting';
        let ack;
        try {
            ack = await this.api.submitAnswer(this.taskId, this.workerId, q.landmarkId, answer);
        } catch (e) {
            if (e instanceof ApiError && e.status === 409) {
                this.close(e);
                return;
            }
            this.phase = 'question'; // let the user retry
            throw e;
        }
        this.trace.push({ landmarkId: q.landmarkId, answer });
        this.current = null;
        if (ack.kind === 'done') {
            this.routeIndex = ack.route_index ?? null;
            await this.finish();
        } else {
            await this.fetchNextQuestion();
        }
    }

    private async finish(): Promise<void> {
        const { balance } = await this.api.rewardBalance(this.workerId);
        this.reward = balance;
        this.phase = 'complete';
    }

    private close(e: ApiError): void {
        this.phase = 'closed';
        this.current = null;
        this.banner = e.detail;
    }

    /** Run a scripted answer sequence until the session reaches a terminal phase. */
    async runScript(answers: boolean[]): Promise<void> {
        await this.fetchNextQuestion();
        for (const answer of answers) {
            if (this.phase !== 'question') break;
            await this.submitAnswer(answer);
        }
    }
}
