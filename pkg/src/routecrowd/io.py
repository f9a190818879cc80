"""Ingestion file formats, one JSON record per line.

Field names are documented in docs/data-formats.md. All loaders accept a
path or an open text file.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import IO, Iterable, Iterator

from .familiarity import WorkerProfile
from .geo import GeoPoint
from .model import (CandidateSet, Landmark, LandmarkIndex, LandmarkRoute,
                    RawRoute, normalize_significances)


def _lines(source: str | Path | IO[str]) -> Iterator[dict]:
    if hasattr(source, "read"):
        for line in source:
            line = line.strip()
            if line:
                yield json.loads(line)
        return
    with open(source) as fh:
        for line in fh:
            line = line.strip()
            if line:
                yield json.loads(line)


def load_landmarks(source, normalize: bool = True) -> LandmarkIndex:
    """Records: {"id", "name", "lat", "lon", "significance"?}.

    Raw significances are min-max normalized to [0, 1] unless disabled.
    """
    records = list(_lines(source))
    raw = {r["id"]: float(r.get("significance", 0.0)) for r in records}
    sig = normalize_significances(raw) if normalize else raw
    return LandmarkIndex(
        Landmark(r["id"], r.get("name", r["id"]),
                 GeoPoint(r["lat"], r["lon"]), sig[r["id"]])
        for r in records)


def write_significance(path: str | Path, scores: dict[str, float]) -> None:
    """Records: {"id", "significance"} for merging back into landmark files."""
    with open(path, "w") as fh:
        for lid in sorted(scores):
            fh.write(json.dumps({"id": lid, "significance": scores[lid]}) + "\n")


def load_checkins(source) -> list[tuple[str, str, object]]:
    """Records: {"traveller", "landmark", "timestamp"?}."""
    return [(r["traveller"], r["landmark"], r.get("timestamp"))
            for r in _lines(source)]


def load_raw_routes(source) -> list[tuple[str, RawRoute]]:
    """Records: {"source_tag", "points": [[lat, lon], ...]}."""
    return [(r.get("source_tag", "unknown"),
             RawRoute(tuple(GeoPoint(lat, lon) for lat, lon in r["points"])))
            for r in _lines(source)]


def load_landmark_routes(source) -> CandidateSet:
    """Records: {"source_tag", "landmark_ids": [...]} -> merged candidate set."""
    routes, tags = [], []
    for r in _lines(source):
        routes.append(LandmarkRoute(tuple(r["landmark_ids"])))
        tags.append(r.get("source_tag", "unknown"))
    return CandidateSet.merged(routes, tags)


def load_workers(source) -> list[WorkerProfile]:
    """Records: {"id", "home": [lat, lon], "work": [lat, lon],
    "frequented": [lat, lon], "history"?: {landmark: [correct, wrong]},
    "response_durations"?: [hours], "outstanding_tasks"?: int}."""
    out = []
    for r in _lines(source):
        out.append(WorkerProfile(
            id=r["id"],
            home=GeoPoint(*r["home"]),
            work=GeoPoint(*r["work"]),
            frequented=GeoPoint(*r["frequented"]),
            history={k: tuple(v) for k, v in r.get("history", {}).items()},
            response_durations=tuple(r.get("response_durations", ())),
            outstanding_tasks=int(r.get("outstanding_tasks", 0)),
        ))
    return out


def dump_jsonl(path: str | Path, records: Iterable[dict]) -> None:
    with open(path, "w") as fh:
        for rec in records:
            fh.write(json.dumps(rec) + "\n")
