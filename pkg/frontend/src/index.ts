export { ApiClient } from './api';
export type { ClientOptions, FetchFn } from './api';
export { WorkerSession, toQuestionView } from './session';
export {
    renderQuestion,
    renderCompletion,
    renderClosedBanner,
    renderPhase,
} from './render';
export { renderAssignments, renderRequestStatus } from './app';
export * from './types';
