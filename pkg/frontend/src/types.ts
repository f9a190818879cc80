// Wire types mirroring the engine's worker-facing API. The client never
// sees candidate routes or the question tree; it only ever holds the
// current question and its own answered trace.

export interface QuestionPayload {
    kind: 'question';
    landmark_id: string;
    name: string;
    lat: number;
    lon: number;
    question_index: number;
    departure_time: number;
}

export interface DonePayload {
    kind: 'done';
    route_index: number;
    task_state?: string;
}

export type NextPayload = QuestionPayload | DonePayload;

export interface AnswerAck {
    kind: 'question' | 'done';
    landmark_id?: string;
    route_index?: number;
    task_state?: string;
}

export interface AssignmentSummary {
    task_id: string;
    state: string;
    answered: number;
    completed: boolean;
}

export interface RewardBalance {
    worker_id: string;
    balance: number;
}

export interface RequestStatus {
    status: 'resolved' | 'escalated';
    method?: string;
    route?: string[];
    confidence?: number;
    task_id?: string;
    state?: string;
}

/** What the worker screen renders for one question. */
export interface QuestionView {
    taskId: string;
    landmarkId: string;
    landmarkName: string;
    pin: { lat: number; lon: number };
    questionIndex: number;
    prompt: string;
}

export type SessionPhase =
    | 'idle'          // no question loaded yet
    | 'question'      // a question is on screen
    | 'submitting'    // waiting for the server to acknowledge an answer
    | 'complete'      // this worker reached a leaf
    | 'closed';       // task resolved or expired without us

export class ApiError extends Error {
    constructor(readonly status: number, readonly detail: string) {
        super(`${status}: ${detail}`);
    }
}
