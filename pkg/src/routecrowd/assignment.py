"""Eligible-worker filtering and rated-voting worker ranking.

A worker is eligible for a task when they have spare quota, a high enough
probability of answering before the deadline (exponential response-time
model), and nonzero accumulated familiarity with at least one task
landmark. Eligible workers are then ranked by rated voting: each task
landmark scores every candidate by their familiarity rank on that
landmark, and the k workers with the largest score totals win. Summing
raw familiarity instead would favor narrow specialists; the rank-based
vote rewards knowledge coverage of the whole landmark set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import NoCandidates
from .familiarity import FamiliarityMatrix, WorkerProfile

DEFAULT_LAMBDA = 1.0 / 24.0  # one expected response per day


@dataclass(frozen=True)
class ResponseModel:
    rate_per_hour: float
    source: str  # "mle" or "default"


@dataclass
class EligibilityConfig:
    eta_time: float = 0.5   # response-probability threshold
    eta_quota: int = 5      # max outstanding tasks
    k: int = 3              # workers per task
    default_lambda: float = DEFAULT_LAMBDA

    def __post_init__(self):
        if not 0.0 < self.eta_time < 1.0:
            raise ValueError("eta_time must be in (0, 1)")
        if self.eta_quota < 1:
            raise ValueError("eta_quota must be >= 1")
        if self.k < 1:
            raise ValueError("k must be >= 1")


@dataclass(frozen=True)
class VoteTally:
    totals: dict[str, float]
    per_landmark: dict[str, dict[str, float]]
    ranked: tuple[tuple[str, float], ...]
    shortfall: bool


def estimate_lambda(durations: Sequence[float],
                    default: float = DEFAULT_LAMBDA) -> ResponseModel:
    """Exponential-rate MLE (reciprocal mean); default prior when no history."""
    if not durations:
        return ResponseModel(default, "default")
    if any(d <= 0 for d in durations):
        raise ValueError("durations must be positive")
    return ResponseModel(len(durations) / sum(durations), "mle")


def response_prob(model: ResponseModel, deadline_hours: float) -> float:
    """Probability of responding within the deadline: 1 - exp(-lambda*t)."""
    if deadline_hours < 0:
        raise ValueError("deadline must be >= 0")
    return 1.0 - math.exp(-model.rate_per_hour * deadline_hours)


def candidate_workers(task_landmarks: Sequence[str], accumulated: FamiliarityMatrix,
                      workers: Sequence[WorkerProfile], cfg: EligibilityConfig,
                      deadline_hours: float) -> set[str]:
    """Workers familiar with some task landmark who pass time and quota filters.

    The response-probability filter excludes strictly below eta_time, so a
    worker at exact equality stays eligible.
    """
    if not task_landmarks:
        raise ValueError("task landmark set must be non-empty")
    cols = [accumulated.landmark_ids.index(l) for l in task_landmarks]
    eligible = set()
    for i, worker in enumerate(workers):
        wid = worker.id
        row = accumulated.worker_ids.index(wid)
        if not any(accumulated.entries.get((row, j), 0.0) > 0.0 for j in cols):
            continue
        if worker.outstanding_tasks >= cfg.eta_quota:
            continue
        model = estimate_lambda(worker.response_durations, cfg.default_lambda)
        if response_prob(model, deadline_hours) < cfg.eta_time:
            continue
        eligible.add(wid)
    return eligible


def preference_scores(landmark_id: str, candidates: set[str],
                      accumulated: FamiliarityMatrix) -> dict[str, float]:
    """One landmark's vote: 1 - (rank-1)/|ranked| over candidates that know
    it (familiarity rank descending, ties by worker id), 0 for the rest."""
    j = accumulated.landmark_ids.index(landmark_id)
    knowers = []
    for wid in candidates:
        i = accumulated.worker_ids.index(wid)
        f = accumulated.entries.get((i, j), 0.0)
        if f > 0.0:
            knowers.append((wid, f))
    knowers.sort(key=lambda t: (-t[1], t[0]))
    scores = {wid: 0.0 for wid in candidates}
    for rank, (wid, _f) in enumerate(knowers, start=1):
        scores[wid] = 1.0 - (rank - 1) / len(knowers)
    return scores


def top_k_workers(task_landmarks: Sequence[str], accumulated: FamiliarityMatrix,
                  workers: Sequence[WorkerProfile], cfg: EligibilityConfig,
                  deadline_hours: float, k: int | None = None) -> VoteTally:
    """Rated-voting aggregation over all task landmarks; top-k totals win."""
    if k is None:
        k = cfg.k
    if k < 1:
        raise ValueError("k must be >= 1")
    candidates = candidate_workers(task_landmarks, accumulated, workers, cfg,
                                   deadline_hours)
    if not candidates:
        raise NoCandidates("no worker passed the eligibility filters")
    totals = {wid: 0.0 for wid in candidates}
    per_landmark: dict[str, dict[str, float]] = {}
    for l in task_landmarks:
        scores = preference_scores(l, candidates, accumulated)
        per_landmark[l] = scores
        for wid, s in scores.items():
            totals[wid] += s
    order = sorted(totals.items(), key=lambda t: (-t[1], t[0]))
    return VoteTally(totals, per_landmark, tuple(order[:k]),
                     shortfall=len(order) < k)
