"""Network API over the engine: requester, worker, and admin surfaces.

All bodies are JSON. Workers identify themselves by an opaque worker id
token; there is no further authentication.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from .errors import (NoCandidates, NotAssigned, RouteCrowdError, TaskClosed,
                     WrongQuestion)
from .geo import GeoPoint
from .model import CandidateSet, LandmarkRoute
from .service import Engine, RouteRequest


class PointBody(BaseModel):
    lat: float
    lon: float


class CandidateBody(BaseModel):
    landmark_ids: list[str]
    source_tag: str = "unknown"


class RequestBody(BaseModel):
    id: str
    source: PointBody
    destination: PointBody
    departure_time: float
    deadline_hours: float = 24.0
    requester: str = "anonymous"
    candidates: list[CandidateBody] = Field(min_length=1)


class AnswerBody(BaseModel):
    landmark_id: str
    answer: bool


def create_app(engine: Engine) -> FastAPI:
    app = FastAPI(title="routecrowd")

    def guard(fn, *args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (NotAssigned,) as e:
            raise HTTPException(status_code=403, detail=str(e))
        except (TaskClosed,) as e:
            raise HTTPException(status_code=409, detail=str(e))
        except (WrongQuestion,) as e:
            raise HTTPException(status_code=422, detail=str(e))
        except (NoCandidates,) as e:
            raise HTTPException(status_code=503, detail=str(e))
        except RouteCrowdError as e:
            raise HTTPException(status_code=400, detail=str(e))

    @app.post("/requests")
    def submit_request(body: RequestBody):
        req = RouteRequest(
            id=body.id,
            source=GeoPoint(body.source.lat, body.source.lon),
            destination=GeoPoint(body.destination.lat, body.destination.lon),
            departure_time=body.departure_time,
            deadline_hours=body.deadline_hours,
            requester=body.requester)
        candidates = CandidateSet.merged(
            [LandmarkRoute(tuple(c.landmark_ids)) for c in body.candidates],
            [c.source_tag for c in body.candidates])
        return guard(engine.submit_request, req, candidates)

    @app.get("/requests/{request_id}")
    def request_status(request_id: str):
        res = engine.request_status(request_id)
        if res is None:
            raise HTTPException(status_code=404, detail="unknown request")
        return res

    @app.get("/workers/{worker_id}/assignments")
    def assignments(worker_id: str):
        return engine.worker_assignments(worker_id)

    @app.get("/tasks/{task_id}/workers/{worker_id}/next")
    def next_question(task_id: str, worker_id: str):
        return guard(engine.next_question_for, task_id, worker_id)

    @app.post("/tasks/{task_id}/workers/{worker_id}/answers")
    def post_answer(task_id: str, worker_id: str, body: AnswerBody):
        return guard(engine.record_answer, task_id, worker_id,
                     body.landmark_id, body.answer)

    @app.get("/workers/{worker_id}/rewards")
    def rewards(worker_id: str):
        return {"worker_id": worker_id, "balance": engine.reward_balance(worker_id)}

    @app.post("/admin/retrain")
    def retrain():
        engine.retrain()
        return {"status": "ok"}

    @app.get("/admin/tasks/{task_id}")
    def inspect_task(task_id: str):
        data = engine.store.get("tasks", task_id)
        if data is None:
            raise HTTPException(status_code=404, detail="unknown task")
        return data

    @app.get("/admin/truths")
    def list_truths():
        return [t for _, t in engine.store.items("truths")]

    return app
