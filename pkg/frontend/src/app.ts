// Assignment list and requester status views, as functional tables.

import { AssignmentSummary, RequestStatus } from './types';

function row(cells: string[]): string {
    return `<tr>${cells.map((c) => `<td>${c}</td>`).join('')}</tr>`;
}

export function renderAssignments(items: AssignmentSummary[]): string {
    if (items.length === 0) {
        return '<p class="empty">No assignments right now.</p>';
    }
    const rows = items.map((a) =>
        row([a.task_id, a.state, String(a.answered), a.completed ? 'yes' : 'no']),
    );
    return `<table class="assignments">
<thead><tr><th>Task</th><th>State</th><th>Answered</th><th>Done</th></tr></thead>
<tbody>${rows.join('\n')}</tbody>
</table>`;
}

export function renderRequestStatus(status: RequestStatus): string {
    if (status.status === 'resolved' && status.route) {
        const stops = status.route.map((l) => `<li>${l}</li>`).join('');
        const conf = status.confidence != null ? status.confidence.toFixed(2) : '?';
        return `<section class="request resolved">
  <p>Best route found via ${status.method ?? 'unknown'} (confidence ${conf}):</p>
  <ol class="route">${stops}</ol>
</section>`;
    }
    return `<section class="request pending">
  <p>Your request is with the crowd (${status.state ?? 'in progress'}).</p>
</section>`;
}
