"""Deterministic synthetic world and crowd simulator.

Generates a seeded desk-scale world (landmark grid, check-ins, worker
population, requests with candidate routes and a designated ground-truth
preferred route) and drives every request through the full pipeline with
simulated workers. A worker answers "does your preferred route pass
landmark l?" according to ground-truth membership, correctly with a
probability that grows with their accumulated familiarity.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Callable

from .config import EngineConfig
from .familiarity import WorkerProfile
from .geo import GeoPoint
from .model import CandidateSet, Landmark, LandmarkIndex, LandmarkRoute
from .service import Engine, RouteRequest
from .significance import build_visit_graph, infer_significance
from .store import KeyValueStore

MAX_LANDMARKS = 500
MAX_WORKERS = 200
MAX_REQUESTS = 50

BASE_LAT = 40.0
BASE_LON = 116.3
GRID_STEP_KM = 1.5


@dataclass(frozen=True)
class WorldSizes:
    landmarks: int = 60
    workers: int = 25
    requests: int = 8

    def __post_init__(self):
        if self.landmarks > MAX_LANDMARKS or self.workers > MAX_WORKERS \
                or self.requests > MAX_REQUESTS:
            raise ValueError("world size exceeds simulator guards")
        if self.landmarks < 4 or self.workers < 1 or self.requests < 1:
            raise ValueError("world too small to simulate")


@dataclass(frozen=True)
class SimRequest:
    request: RouteRequest
    candidates: CandidateSet
    ground_truth: int  # index into candidates.routes


@dataclass(frozen=True)
class World:
    seed: int
    index: LandmarkIndex
    checkins: tuple[tuple[str, str, float], ...]
    workers: tuple[WorkerProfile, ...]
    requests: tuple[SimRequest, ...]


@dataclass(frozen=True)
class BehaviorModel:
    """Probability of a correct answer as a function of accumulated
    familiarity; always in [0.5, 1] and non-decreasing in familiarity."""

    accuracy: Callable[[float], float] = lambda f: 1.0
    seed: int = 0


def saturating_accuracy(rate: float = 1.0):
    """accuracy(F) = 0.5 + 0.5 * (1 - exp(-rate * F))."""
    return lambda f: 0.5 + 0.5 * (1.0 - math.exp(-rate * max(0.0, f)))


def _grid_point(row: int, col: int, rng: random.Random) -> GeoPoint:
    jitter_km = GRID_STEP_KM * 0.2
    lat = BASE_LAT + (row * GRID_STEP_KM + rng.uniform(-jitter_km, jitter_km)) / 111.32
    lon = BASE_LON + (col * GRID_STEP_KM + rng.uniform(-jitter_km, jitter_km)) \
        / (111.32 * math.cos(math.radians(BASE_LAT)))
    return GeoPoint(lat, lon)


def generate_world(seed: int, sizes: WorldSizes = WorldSizes()) -> World:
    """Deterministic world: same seed, same world."""
    rng = random.Random(seed)
    side = math.ceil(math.sqrt(sizes.landmarks))
    landmarks = []
    for i in range(sizes.landmarks):
        landmarks.append(Landmark(
            id=f"l{i:03d}", name=f"landmark {i}",
            location=_grid_point(i // side, i % side, rng)))
    index = LandmarkIndex(landmarks)
    ids = [lm.id for lm in landmarks]

    # Check-ins: popularity decays with landmark number, so significance
    # scores come out spread over [0, 1].
    checkins = []
    n_travellers = max(10, sizes.workers * 2)
    for t in range(n_travellers):
        visits = rng.randint(3, 10)
        for _ in range(visits):
            j = min(int(rng.expovariate(3.0 / sizes.landmarks)), sizes.landmarks - 1)
            checkins.append((f"t{t:03d}", ids[j], float(rng.randint(0, 10**6))))

    workers = []
    for w in range(sizes.workers):
        anchor = index.get(rng.choice(ids)).location
        near = index.within(anchor, 2 * GRID_STEP_KM) or [index.get(rng.choice(ids))]
        home = anchor
        work = rng.choice(near).location
        freq = rng.choice(near).location
        workers.append(WorkerProfile(
            id=f"w{w:03d}", home=home, work=work, frequented=freq,
            response_durations=tuple(round(rng.uniform(0.5, 3.0), 2)
                                     for _ in range(rng.randint(1, 5)))))

    requests = []
    for r in range(sizes.requests):
        requests.append(_generate_request(r, rng, index, ids))

    return World(seed, index, tuple(checkins), tuple(workers), tuple(requests))


def _generate_request(r: int, rng: random.Random, index: LandmarkIndex,
                      ids: list[str]) -> SimRequest:
    src_id = rng.choice(ids)
    dst_id = rng.choice([i for i in ids if i != src_id])
    src = index.get(src_id).location
    dst = index.get(dst_id).location

    n_routes = rng.randint(2, 6)
    pool = [i for i in ids if i not in (src_id, dst_id)]
    routes: list[LandmarkRoute] = []
    seen: set[frozenset[str]] = set()
    while len(routes) < n_routes:
        length = rng.randint(1, 4)
        middle = rng.sample(pool, length)
        route = LandmarkRoute(tuple([src_id] + middle + [dst_id]))
        if route.membership not in seen:
            seen.add(route.membership)
            routes.append(route)
    candidates = CandidateSet.merged(routes, [f"source{i}" for i in range(len(routes))])
    gt = rng.randrange(len(candidates))
    req = RouteRequest(
        id=f"req{r:03d}", source=src, destination=dst,
        departure_time=float(rng.randint(0, 10**6)) * 3600.0,
        deadline_hours=24.0)
    return SimRequest(req, candidates, gt)


@dataclass
class RequestOutcome:
    request_id: str
    method: str | None
    resolved_route: int | None
    matches_ground_truth: bool | None
    questions_per_worker: dict[str, int] = field(default_factory=dict)
    early_stop: bool = False
    state: str = ""


@dataclass
class ScenarioReport:
    outcomes: list[RequestOutcome]
    events: list[dict]

    def summary(self) -> dict:
        crowd = [o for o in self.outcomes if o.method == "crowd"]
        return {
            "requests": len(self.outcomes),
            "crowd_resolved": len(crowd),
            "crowd_accuracy": (sum(o.matches_ground_truth for o in crowd) / len(crowd)
                               if crowd else None),
            "truth_reuse": sum(o.method == "truth-reuse" for o in self.outcomes),
            "auto_eval": sum(o.method == "auto-eval" for o in self.outcomes),
            "early_stops": sum(o.early_stop for o in self.outcomes),
            "unresolved": sum(o.method is None for o in self.outcomes),
        }


def build_engine(world: World, config: EngineConfig | None = None,
                 store: KeyValueStore | None = None,
                 clock: Callable[[], float] | None = None) -> Engine:
    """Wire the pipeline over a generated world: significance from the
    synthetic check-ins, then familiarity training."""
    graph = build_visit_graph(world.checkins, known_landmarks=world.index.ids())
    scores = infer_significance(graph)
    significance = {lid: scores.get(lid, 0.0) for lid in world.index.ids()}
    engine = Engine(world.index, significance, list(world.workers),
                    config=config, store=store,
                    clock=clock if clock is not None else (lambda: 0.0))
    engine.retrain()
    return engine


def run_scenario(world: World, behavior: BehaviorModel | None = None,
                 config: EngineConfig | None = None,
                 engine: Engine | None = None) -> ScenarioReport:
    """Drive every request through the pipeline with simulated workers.

    Assigned workers answer round-robin, one question per turn, in a
    single event-ordered logical clock; the task can therefore resolve by
    early stop while slower workers are mid-sequence.
    """
    if behavior is None:
        behavior = BehaviorModel()
    if engine is None:
        engine = build_engine(world, config=config)
    rng = random.Random(behavior.seed ^ world.seed)
    outcomes = []
    events: list[dict] = []

    for sim_req in world.requests:
        outcome = _run_request(engine, sim_req, behavior, rng, events)
        outcomes.append(outcome)

    for i, e in enumerate(events):
        engine.store.put("events", f"{i:06d}", e)
    return ScenarioReport(outcomes, events)


def _run_request(engine: Engine, sim_req: SimRequest, behavior: BehaviorModel,
                 rng: random.Random, events: list[dict]) -> RequestOutcome:
    req, candidates, gt = sim_req.request, sim_req.candidates, sim_req.ground_truth
    gt_membership = candidates.routes[gt].membership
    res = engine.submit_request(req, candidates)
    events.append({"event": "submitted", "request": req.id, "status": res["status"],
                   "method": res.get("method")})

    if res["status"] == "resolved":
        resolved = tuple(res["route"])
        match = frozenset(resolved) == gt_membership
        return RequestOutcome(req.id, res["method"], None, match, state="Resolved")

    task = engine.get_task(res["task_id"])
    if task.state != "Assigned":
        return RequestOutcome(req.id, None, None, None, state=task.state)

    questions: dict[str, int] = {a.worker_id: 0 for a in task.assignments}
    acc_matrix = engine.accumulated
    progress = True
    while task.state in ("Assigned", "Collecting") and progress:
        progress = False
        for a in list(task.assignments):
            if task.state not in ("Assigned", "Collecting"):
                break
            if a.leaf_route is not None:
                continue
            step = engine.next_question_for(task.id, a.worker_id)
            if step["kind"] != "question":
                continue
            lid = step["landmark_id"]
            row = acc_matrix.worker_ids.index(a.worker_id)
            col = acc_matrix.landmark_ids.index(lid)
            fam = acc_matrix.entries.get((row, col), 0.0)
            truthful = lid in gt_membership
            answer = truthful if rng.random() < behavior.accuracy(fam) else not truthful
            engine.record_answer(task.id, a.worker_id, lid, answer)
            questions[a.worker_id] += 1
            events.append({"event": "answer", "task": task.id, "worker": a.worker_id,
                           "landmark": lid, "answer": answer})
            progress = True

    early = task.state == "Resolved" and any(a.leaf_route is None for a in task.assignments)
    match = None
    if task.resolution_route is not None:
        match = task.candidates.routes[task.resolution_route].membership == gt_membership
    events.append({"event": "task_done", "task": task.id, "state": task.state,
                   "resolution": task.resolution_route, "early_stop": early,
                   "questions": dict(questions)})
    return RequestOutcome(req.id, task.resolution_method, task.resolution_route,
                          match, questions, early, task.state)
