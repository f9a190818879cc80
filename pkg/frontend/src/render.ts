// String templates for the three worker screens. Kept as pure functions
// so they can be unit-tested without a DOM; the host page injects the
// returned markup. The map is a plain tile background with one pin; no
// routes or future questions are ever rendered.

import { QuestionView, SessionPhase } from './types';

function escapeHtml(s: string): string {
    return s
        .replace(/&/g, '&amp;')
        .replace(/</g, '&lt;')
        .replace(/>/g, '&gt;')
        .replace(/"/g, '&quot;');
}

export function renderQuestion(view: QuestionView): string {
    const name = escapeHtml(view.landmarkName);
    return `<section class="question" data-landmark-id="${escapeHtml(view.landmarkId)}" data-question-index="${view.questionIndex}">
  <div class="map-tile">
    <span class="pin" data-lat="${view.pin.lat}" data-lon="${view.pin.lon}" title="${name}"></span>
  </div>
  <p class="prompt">${escapeHtml(view.prompt)}</p>
  <button class="answer-yes">Yes</button>
  <button class="answer-no">No</button>
</section>`;
}

export function renderCompletion(reward: number, answered: number): string {
    return `<section class="completion">
  <h2>All done, thank you!</h2>
  <p>You answered ${answered} question${answered === 1 ? '' : 's'}.</p>
  <p class="reward">Reward earned: <strong data-reward="${reward}">${reward}</strong> points</p>
</section>`;
}

export function renderClosedBanner(detail: string): string {
    return `<section class="banner closed">
  <p>This task has been resolved without needing more answers.</p>
  <p class="detail">${escapeHtml(detail)}</p>
</section>`;
}

export function renderPhase(phase: SessionPhase): string {
    const labels: Record<SessionPhase, string> = {
        idle: 'Loading…',
        question: 'Question',
        submitting: 'Sending…',
        complete: 'Complete',
        closed: 'Closed',
    };
    return `<span class="phase phase-${phase}">${labels[phase]}</span>`;
}
