"""Workflow orchestration: request intake, truth reuse, automatic candidate
evaluation, crowd task lifecycle, and rewards.

A request first tries the truth store (same origin/destination cells and
hour-of-week bucket, unexpired). On a miss the candidates are evaluated
automatically: strong mutual agreement or high similarity to a stored
truth resolves without the crowd. Only then is a crowd task created:
landmark selection, question tree, worker assignment, answer collection
with early stop, plurality resolution, truth persistence, and rewards.
"""

from __future__ import annotations

import dataclasses
import itertools
import math
import time
import uuid
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .assignment import top_k_workers
from .config import EngineConfig
from .errors import (NoCandidates, NotAssigned, TaskClosed, Unresolvable,
                     WrongQuestion)
from .familiarity import FamiliarityMatrix, WorkerProfile, accumulate, build_matrix, predict_matrix, train_pmf
from .geo import GeoPoint
from .model import CandidateSet, LandmarkIndex, LandmarkRoute
from .questions import QuestionTree, build_tree, next_question
from .selection import SelectionProblem, select
from .store import KeyValueStore

HOURS_PER_WEEK = 168


@dataclass(frozen=True)
class RouteRequest:
    id: str
    source: GeoPoint
    destination: GeoPoint
    departure_time: float  # epoch seconds
    deadline_hours: float
    requester: str = "anonymous"

    def __post_init__(self):
        if self.deadline_hours <= 0:
            raise ValueError("deadline must be positive")
        if self.source == self.destination:
            raise ValueError("source and destination must differ")


def od_cell(p: GeoPoint, cell_km: float) -> tuple[int, int]:
    """Spatial bucket for truth matching: a square grid in kilometers."""
    x = p.lon * 111.32 * math.cos(math.radians(p.lat))
    y = p.lat * 111.32
    return (math.floor(y / cell_km), math.floor(x / cell_km))


def time_bucket(epoch_seconds: float) -> int:
    """Hour-of-week bucket of a departure time."""
    return int(epoch_seconds // 3600) % HOURS_PER_WEEK


def jaccard(a: frozenset[str], b: frozenset[str]) -> float:
    union = a | b
    return len(a & b) / len(union) if union else 1.0


@dataclass
class Assignment:
    worker_id: str
    trace: list[tuple[str, bool]] = field(default_factory=list)
    leaf_route: int | None = None
    completed_at: float | None = None


@dataclass
class Task:
    id: str
    request: RouteRequest
    candidates: CandidateSet
    selected_landmarks: tuple[str, ...]
    tree: QuestionTree | None
    assignments: list[Assignment]
    state: str = "Created"  # Created -> Assigned -> Collecting -> Resolved | Expired
    created_at: float = 0.0
    resolution_route: int | None = None
    resolution_method: str | None = None
    confidence: float | None = None

    @property
    def k(self) -> int:
        return len(self.assignments)

    def assignment_for(self, worker_id: str) -> Assignment:
        for a in self.assignments:
            if a.worker_id == worker_id:
                return a
        raise NotAssigned(f"worker {worker_id} is not assigned to task {self.id}")


@dataclass(frozen=True)
class Resolution:
    request_id: str
    route: LandmarkRoute
    method: str  # truth-reuse | auto-eval | crowd
    confidence: float
    provenance: tuple[str, ...] = ()


def evaluate_candidates(candidates: CandidateSet, truths: Sequence[dict],
                        eta: float, tau_agree: float) -> tuple[int, float] | dict[int, float]:
    """Automatic evaluation before any crowd involvement.

    Returns (route index, confidence) when resolvable: either a strict
    majority of candidates pairwise agree at Jaccard >= tau_agree (pick the
    cluster member with the highest mean similarity), or some candidate's
    best Jaccard against a matching truth exceeds eta. Otherwise returns
    the per-route confidences for escalation.
    """
    n = len(candidates)
    members = candidates.memberships()
    if n == 1:
        return 0, 1.0

    best_cluster: tuple[int, ...] = ()
    for size in range(n, 1, -1):
        if size <= n // 2:
            break
        for combo in itertools.combinations(range(n), size):
            if all(jaccard(members[i], members[j]) >= tau_agree
                   for i, j in itertools.combinations(combo, 2)):
                best_cluster = combo
                break
        if best_cluster:
            break
    if best_cluster:
        def mean_sim(i):
            return sum(jaccard(members[i], members[j])
                       for j in best_cluster if j != i) / (len(best_cluster) - 1)
        pick = max(best_cluster, key=lambda i: (mean_sim(i), -i))
        return pick, len(best_cluster) / n

    confidences = {}
    for i, m in enumerate(members):
        best = 0.0
        for t in truths:
            best = max(best, jaccard(m, frozenset(t["best_route"])))
        confidences[i] = best
    top = max(confidences, key=lambda i: (confidences[i], -i))
    if confidences[top] > eta:
        return top, confidences[top]
    return confidences


class Engine:
    """In-process pipeline engine; all state lives in the key-value store
    plus in-memory worker profiles and the accumulated familiarity matrix.

    Per-task mutations are serialized by the store's lock; quota updates
    are check-and-increment on the single engine thread of each call.
    """

    def __init__(self, index: LandmarkIndex, significance: dict[str, float],
                 workers: Sequence[WorkerProfile], config: EngineConfig | None = None,
                 store: KeyValueStore | None = None,
                 clock: Callable[[], float] = time.time):
        self.index = index
        self.significance = dict(significance)
        self.config = config or EngineConfig()
        self.store = store or KeyValueStore()
        self.clock = clock
        self.workers: dict[str, WorkerProfile] = {w.id: w for w in workers}
        self.accumulated: FamiliarityMatrix | None = None
        self._tasks: dict[str, Task] = {}

    # -- familiarity ---------------------------------------------------

    def retrain(self) -> FamiliarityMatrix:
        """Batch rebuild of the accumulated familiarity matrix from current
        worker profiles and histories."""
        cfg = self.config
        matrix = build_matrix(list(self.workers.values()), self.index, cfg.familiarity)
        pmf = cfg.pmf
        factors = train_pmf(matrix, d=pmf.d, lambda_w=pmf.lambda_w,
                            lambda_l=pmf.lambda_l, learning_rate=pmf.learning_rate,
                            max_iters=pmf.max_iters, tol=pmf.tol, seed=pmf.seed)
        predicted = predict_matrix(matrix, factors)
        self.accumulated = accumulate(predicted, self.index, cfg.familiarity.eta_dis_km)
        return self.accumulated

    # -- truth store ---------------------------------------------------

    def _truth_key(self, req: RouteRequest) -> tuple:
        cell_km = self.config.service.truth_cell_km
        return (od_cell(req.source, cell_km), od_cell(req.destination, cell_km),
                time_bucket(req.departure_time))

    def _matching_truths(self, req: RouteRequest) -> list[dict]:
        want = self._truth_key(req)
        ttl_s = self.config.service.truth_ttl_days * 86400.0
        now = self.clock()
        out = []
        for _, t in self.store.items("truths"):
            key = (tuple(t["source_cell"]), tuple(t["dest_cell"]), t["time_bucket"])
            if key == want and now - t["created_at"] < ttl_s:
                out.append(t)
        return out

    def reuse_truth(self, req: RouteRequest) -> dict | None:
        hits = self._matching_truths(req)
        if not hits:
            return None
        return max(hits, key=lambda t: (t["confidence"], t["created_at"]))

    def _store_truth(self, req: RouteRequest, route: LandmarkRoute,
                     confidence: float) -> None:
        cell_km = self.config.service.truth_cell_km
        record = {
            "source_cell": list(od_cell(req.source, cell_km)),
            "dest_cell": list(od_cell(req.destination, cell_km)),
            "time_bucket": time_bucket(req.departure_time),
            "best_route": list(route.landmark_ids),
            "confidence": confidence,
            "created_at": self.clock(),
        }
        self.store.put("truths", str(uuid.uuid4()), record)

    # -- request intake --------------------------------------------------

    def submit_request(self, req: RouteRequest, candidates: CandidateSet) -> dict:
        """Run the pipeline: truth reuse, then auto evaluation, then crowd."""
        hit = self.reuse_truth(req)
        if hit is not None:
            res = {"status": "resolved", "method": "truth-reuse",
                   "route": hit["best_route"], "confidence": hit["confidence"]}
            self.store.put("requests", req.id, res)
            return res

        svc = self.config.service
        verdict = evaluate_candidates(candidates, self._matching_truths(req),
                                      svc.eta_confidence, svc.tau_agree)
        if isinstance(verdict, tuple):
            idx, confidence = verdict
            route = candidates.routes[idx]
            self._store_truth(req, route, confidence)
            res = {"status": "resolved", "method": "auto-eval",
                   "route": list(route.landmark_ids), "confidence": confidence,
                   "provenance": list(candidates.provenance[idx])}
            self.store.put("requests", req.id, res)
            return res

        task = self.create_task(req, candidates)
        res = {"status": "escalated", "task_id": task.id,
               "confidences": {str(i): c for i, c in verdict.items()},
               "state": task.state}
        self.store.put("requests", req.id, res)
        return res

    def request_status(self, request_id: str) -> dict | None:
        res = self.store.get("requests", request_id)
        if res and res.get("status") == "escalated":
            task = self._tasks.get(res["task_id"])
            if task and task.state == "Resolved":
                route = task.candidates.routes[task.resolution_route]
                return {"status": "resolved", "method": task.resolution_method,
                        "route": list(route.landmark_ids),
                        "confidence": task.confidence, "task_id": task.id}
            if task:
                return dict(res, state=task.state)
        return res

    # -- crowd task lifecycle ---------------------------------------------

    def create_task(self, req: RouteRequest, candidates: CandidateSet) -> Task:
        if self.accumulated is None:
            self.retrain()
        svc = self.config.service
        problem = SelectionProblem(candidates, self.significance,
                                   relax_min_size=svc.relax_min_size)
        chosen = select(problem, svc.selection_algorithm)
        tree = build_tree(chosen.chosen, candidates, self.significance)
        task = Task(id=str(uuid.uuid4()), request=req, candidates=candidates,
                    selected_landmarks=tuple(sorted(chosen.chosen)), tree=tree,
                    assignments=[], created_at=self.clock())
        try:
            tally = top_k_workers(list(task.selected_landmarks), self.accumulated,
                                  list(self.workers.values()), self.config.eligibility,
                                  req.deadline_hours)
        except NoCandidates:
            # Degraded mode: no eligible worker right now; task stays
            # Created and can be re-assigned later.
            self._tasks[task.id] = task
            self._persist(task)
            return task
        for wid, _score in tally.ranked:
            task.assignments.append(Assignment(worker_id=wid))
            w = self.workers[wid]
            self.workers[wid] = dataclasses.replace(
                w, outstanding_tasks=w.outstanding_tasks + 1)
        task.state = "Assigned"
        self._tasks[task.id] = task
        self._persist(task)
        return task

    def _persist(self, task: Task) -> None:
        self.store.put("tasks", task.id, {
            "id": task.id,
            "request_id": task.request.id,
            "state": task.state,
            "selected_landmarks": list(task.selected_landmarks),
            "tree": task.tree.to_dict() if task.tree else None,
            "candidates": [list(r.landmark_ids) for r in task.candidates.routes],
            "provenance": [list(p) for p in task.candidates.provenance],
            "assignments": [{
                "worker": a.worker_id,
                "trace": [[l, ans] for l, ans in a.trace],
                "leaf": a.leaf_route,
                "completed_at": a.completed_at,
            } for a in task.assignments],
            "created_at": task.created_at,
            "resolution_route": task.resolution_route,
            "resolution_method": task.resolution_method,
            "confidence": task.confidence,
        })

    def get_task(self, task_id: str) -> Task:
        try:
            return self._tasks[task_id]
        except KeyError:
            raise TaskClosed(f"unknown task {task_id}") from None

    def worker_assignments(self, worker_id: str) -> list[dict]:
        out = []
        for task in self._tasks.values():
            for a in task.assignments:
                if a.worker_id == worker_id:
                    out.append({"task_id": task.id, "state": task.state,
                                "answered": len(a.trace),
                                "completed": a.leaf_route is not None})
        return out

    def next_question_for(self, task_id: str, worker_id: str) -> dict:
        task = self.get_task(task_id)
        assignment = task.assignment_for(worker_id)
        if task.state in ("Resolved", "Expired"):
            raise TaskClosed(f"task {task_id} is {task.state}")
        step = next_question(task.tree, assignment.trace)
        if isinstance(step, int):
            return {"kind": "done", "route_index": step}
        lm = self.index.get(step)
        return {"kind": "question", "landmark_id": lm.id, "name": lm.name,
                "lat": lm.location.lat, "lon": lm.location.lon,
                "question_index": len(assignment.trace),
                "departure_time": task.request.departure_time}

    def record_answer(self, task_id: str, worker_id: str, landmark_id: str,
                      answer: bool, at: float | None = None) -> dict:
        """Append one answer to the worker's trace; idempotent per
        (task, worker, landmark) with first-write-wins semantics."""
        task = self.get_task(task_id)
        assignment = task.assignment_for(worker_id)
        if at is None:
            at = self.clock()

        answered = {l for l, _ in assignment.trace}
        if landmark_id in answered:
            # Duplicate submission: replay the same response, no state
            # change, even if the first write already closed the task.
            return self._after_answer(task, assignment)
        if task.state in ("Resolved", "Expired"):
            raise TaskClosed(f"task {task_id} is {task.state}")

        expected = next_question(task.tree, assignment.trace)
        if isinstance(expected, int):
            raise WrongQuestion("assignment already completed")
        if expected != landmark_id:
            raise WrongQuestion(f"expected {expected}, got {landmark_id}")

        if task.state == "Assigned":
            task.state = "Collecting"
        assignment.trace.append((landmark_id, answer))
        step = next_question(task.tree, assignment.trace)
        if isinstance(step, int):
            assignment.leaf_route = step
            assignment.completed_at = at
            stop = self.early_stop_check(task)
            if stop is None and all(a.leaf_route is not None for a in task.assignments):
                self.resolve_task(task)
            elif stop is not None:
                self.resolve_task(task)
        self._persist(task)
        return self._after_answer(task, assignment)

    def _after_answer(self, task: Task, assignment: Assignment) -> dict:
        if assignment.leaf_route is not None:
            return {"kind": "done", "route_index": assignment.leaf_route,
                    "task_state": task.state}
        step = next_question(task.tree, assignment.trace)
        return {"kind": "question", "landmark_id": step, "task_state": task.state}

    def _votes(self, task: Task) -> dict[int, int]:
        votes: dict[int, int] = {}
        for a in task.assignments:
            if a.leaf_route is not None:
                votes[a.leaf_route] = votes.get(a.leaf_route, 0) + 1
        return votes

    def early_stop_check(self, task: Task) -> int | None:
        """Plurality threshold rule: resolve when the leading route alone
        reaches max(m_min, ceil(eta_stop * k)) votes; ties never fire."""
        svc = self.config.service
        votes = self._votes(task)
        if not votes:
            return None
        need = max(svc.m_min, math.ceil(svc.eta_stop * task.k))
        top = max(votes.values())
        leaders = [r for r, v in votes.items() if v == top]
        if len(leaders) == 1 and top >= need:
            return leaders[0]
        return None

    def resolve_task(self, task: Task) -> dict:
        votes = self._votes(task)
        if not votes:
            task.state = "Expired"
            self._persist(task)
            raise Unresolvable(f"task {task.id} expired with no completed answers")
        top = max(votes.values())
        leaders = [r for r, v in votes.items() if v == top]
        if len(leaders) > 1:
            def earliest(r):
                return min(a.completed_at for a in task.assignments if a.leaf_route == r)
            leaders.sort(key=earliest)
        winner = leaders[0]
        task.resolution_route = winner
        task.resolution_method = "crowd"
        task.confidence = top / task.k
        task.state = "Resolved"

        resolved_membership = task.candidates.routes[winner].membership
        for a in task.assignments:
            w = self.workers[a.worker_id]
            history = dict(w.history)
            for landmark_id, answer in a.trace:
                correct, wrong = history.get(landmark_id, (0, 0))
                if answer == (landmark_id in resolved_membership):
                    history[landmark_id] = (correct + 1, wrong)
                else:
                    history[landmark_id] = (correct, wrong + 1)
            self.workers[a.worker_id] = dataclasses.replace(
                w, history=history,
                outstanding_tasks=max(0, w.outstanding_tasks - 1))

        self.grant_rewards(task)
        self._store_truth(task.request, task.candidates.routes[winner], task.confidence)
        self._persist(task)
        return {"route_index": winner, "confidence": task.confidence}

    def expire_overdue(self, now: float | None = None) -> list[str]:
        """Deadline sweep: resolve tasks with at least one vote, expire the rest."""
        if now is None:
            now = self.clock()
        touched = []
        for task in self._tasks.values():
            if task.state in ("Resolved", "Expired"):
                continue
            if now - task.created_at < task.request.deadline_hours * 3600.0:
                continue
            touched.append(task.id)
            try:
                self.resolve_task(task)
            except Unresolvable:
                pass
        return touched

    def grant_rewards(self, task: Task) -> dict[str, int]:
        """Base 1 point per completing worker, plus 1 per answered question,
        plus 2 when their chosen route matches the resolution."""
        deltas: dict[str, int] = {}
        for a in task.assignments:
            if a.leaf_route is None:
                continue
            points = 1 + len(a.trace)
            if a.leaf_route == task.resolution_route:
                points += 2
            deltas[a.worker_id] = points
            balance = self.store.get("rewards", a.worker_id, 0)
            self.store.put("rewards", a.worker_id, balance + points)
        self.store.put("reward_deltas", task.id, deltas)
        return deltas

    def reward_balance(self, worker_id: str) -> int:
        return self.store.get("rewards", worker_id, 0)
