#!/usr/bin/env python3
"""Export scripted worker scenarios for the frontend test suite.

Each scenario drives one worker through a real engine over the HTTP API
and records every exchange verbatim (status codes and bodies). The
frontend replays them through a fixture server, so its conformance tests
compare the UI against actual engine behavior without running Python.

Usage: python3 scripts/export_ui_fixtures.py [out_path]
"""

import json
import pathlib
import random
import sys

from fastapi.testclient import TestClient

from routecrowd.api import create_app
from routecrowd.config import EngineConfig
from routecrowd.familiarity import WorkerProfile
from routecrowd.geo import GeoPoint
from routecrowd.model import CandidateSet, Landmark, LandmarkIndex, LandmarkRoute
from routecrowd.service import Engine, RouteRequest

GRID = 4
SPACING_KM = 1.0
BASE = (40.0, 116.3)


def build_engine(n_workers=5, k=3, m_min=3):
    import math
    landmarks = []
    for r in range(GRID):
        for c in range(GRID):
            lat = BASE[0] + r * SPACING_KM / 111.32
            lon = BASE[1] + c * SPACING_KM / (111.32 * math.cos(math.radians(BASE[0])))
            landmarks.append(Landmark(f"g{r}{c}", f"Landmark {r}{c}", GeoPoint(lat, lon)))
    index = LandmarkIndex(landmarks)
    sig = {lm.id: 0.1 + 0.05 * i for i, lm in enumerate(landmarks)}
    workers = []
    ids = index.ids()
    for i in range(n_workers):
        p = index.get(ids[(i * 3) % len(ids)]).location
        workers.append(WorkerProfile(f"w{i}", p, p, p, response_durations=(0.2,)))
    cfg = EngineConfig()
    cfg.eligibility.eta_time = 0.5
    cfg.eligibility.k = k
    cfg.service.m_min = m_min
    engine = Engine(index, sig, workers, config=cfg, clock=lambda: 0.0)
    engine.retrain()
    return engine


def escalate(engine, candidates, rid):
    req = RouteRequest(id=rid, source=GeoPoint(40.0, 116.3),
                       destination=GeoPoint(40.02, 116.32),
                       departure_time=36000.0, deadline_hours=24.0)
    res = engine.submit_request(req, candidates)
    assert res["status"] == "escalated", res
    return engine.get_task(res["task_id"])


def answer_to_leaf(engine, task, worker_id, membership):
    while True:
        step = engine.next_question_for(task.id, worker_id)
        if step["kind"] != "question":
            return
        out = engine.record_answer(task.id, worker_id, step["landmark_id"],
                                   step["landmark_id"] in membership)
        if out["kind"] == "done":
            return


def random_candidates(rng):
    pool = [f"g{r}{c}" for r in range(GRID) for c in range(GRID)]
    n = rng.randint(2, 5)
    seen, routes = set(), []
    while len(routes) < n:
        size = rng.randint(2, 4)
        member = tuple(sorted(rng.sample(pool, size)))
        if frozenset(member) not in seen:
            seen.add(frozenset(member))
            routes.append(LandmarkRoute(member))
    return CandidateSet.merged(routes)


def record_worker_run(client, task, worker_id):
    """Record the GET-next / POST-answer loop for one worker."""
    steps = []
    answers = []
    landmarks = []
    while True:
        q = client.get(f"/tasks/{task.id}/workers/{worker_id}/next")
        if q.json().get("kind") != "question":
            break
        lid = q.json()["landmark_id"]
        target = task.candidates.routes[record_worker_run.target].membership
        answer = lid in target
        ack = client.post(f"/tasks/{task.id}/workers/{worker_id}/answers",
                          json={"landmark_id": lid, "answer": answer})
        steps.append({
            "landmarkId": lid,
            "question": {"status": q.status_code, "body": q.json()},
            "ack": {"status": ack.status_code, "body": ack.json()},
        })
        answers.append(answer)
        landmarks.append(lid)
        if ack.json().get("kind") == "done":
            break
    final = client.get(f"/tasks/{task.id}/workers/{worker_id}/next")
    reward = client.get(f"/workers/{worker_id}/rewards")
    return steps, answers, landmarks, \
        {"status": final.status_code, "body": final.json()}, \
        reward.json()["balance"]


def normal_scenario(i, rng):
    """Target worker answers last so resolution and rewards land on their
    completion; other workers agree or disagree with the target's route."""
    engine = build_engine()
    client = TestClient(create_app(engine))
    candidates = random_candidates(rng)
    task = escalate(engine, candidates, f"fixture-{i}")
    target_route = i % len(candidates)
    agree = i % 2 == 0
    other_route = target_route if agree else (target_route + 1) % len(candidates)

    target_worker = task.assignments[0].worker_id
    for a in task.assignments[1:]:
        answer_to_leaf(engine, task, a.worker_id,
                       candidates.routes[other_route].membership)

    record_worker_run.target = target_route
    steps, answers, landmarks, final, balance = record_worker_run(
        client, task, target_worker)
    assert task.state == "Resolved"
    expected = 1 + len(answers) + (2 if task.resolution_route ==
                                   task.assignment_for(target_worker).leaf_route else 0)
    assert balance == expected, (balance, expected)
    return {
        "name": f"scenario-{i:02d}",
        "taskId": task.id,
        "workerId": target_worker,
        "steps": steps,
        "answers": answers,
        "expectedLandmarks": landmarks,
        "final": final,
        "rewardBalance": balance,
        "earlyClosed": False,
    }


def early_close_scenario(i):
    """Task resolves by early stop while the target is mid-sequence."""
    engine = build_engine(n_workers=5, k=5, m_min=3)
    client = TestClient(create_app(engine))
    # four routes needing a depth-2 tree so one answer leaves work pending
    candidates = CandidateSet.merged([
        LandmarkRoute(("g01", "g02")),
        LandmarkRoute(("g01", "g03")),
        LandmarkRoute(("g02", "g03")),
        LandmarkRoute(("g03", "g12")),
    ])
    task = escalate(engine, candidates, f"fixture-{i}")
    target_worker = task.assignments[0].worker_id

    q = client.get(f"/tasks/{task.id}/workers/{target_worker}/next")
    lid = q.json()["landmark_id"]
    winning = candidates.routes[0].membership
    ack = client.post(f"/tasks/{task.id}/workers/{target_worker}/answers",
                      json={"landmark_id": lid, "answer": lid in winning})
    steps = [{
        "landmarkId": lid,
        "question": {"status": q.status_code, "body": q.json()},
        "ack": {"status": ack.status_code, "body": ack.json()},
    }]
    assert ack.json()["kind"] == "question", "target must still be mid-sequence"

    # three agreeing completions reach the early-stop threshold (3 of 5)
    for a in task.assignments[1:4]:
        answer_to_leaf(engine, task, a.worker_id, winning)
    assert task.state == "Resolved"

    final = client.get(f"/tasks/{task.id}/workers/{target_worker}/next")
    assert final.status_code == 409
    balance = client.get(f"/workers/{target_worker}/rewards").json()["balance"]
    assert balance == 0
    return {
        "name": f"scenario-{i:02d}-early-close",
        "taskId": task.id,
        "workerId": target_worker,
        "steps": steps,
        "answers": [lid in winning],
        "expectedLandmarks": [lid],
        "final": {"status": final.status_code, "body": final.json()},
        "rewardBalance": balance,
        "earlyClosed": True,
    }


def main(out_path):
    rng = random.Random(2026)
    scenarios = [normal_scenario(i, rng) for i in range(18)]
    scenarios += [early_close_scenario(18), early_close_scenario(19)]
    out = pathlib.Path(out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps({"scenarios": scenarios}, indent=2) + "\n")
    print(f"{len(scenarios)} scenarios written to {out}")


if __name__ == "__main__":
    default = pathlib.Path(__file__).resolve().parents[1] / "frontend" / "fixtures" / "scenarios.json"
    main(sys.argv[1] if len(sys.argv) > 1 else default)
