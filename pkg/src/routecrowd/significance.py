"""Landmark significance inferred from visit data.

Travellers act as authorities, landmarks as hubs, and visits as weighted
hyperlinks between them; mutual reinforcement (weighted HITS on the
bipartite visit graph) converges to a per-landmark hub score which,
rescaled so the best-known landmark gets 1, is the significance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import EmptyGraph, UnknownLandmark

DEFAULT_TOL = 1e-9
DEFAULT_MAX_ITERS = 1000


@dataclass(frozen=True)
class VisitGraph:
    """Bipartite traveller-landmark graph with aggregated visit counts."""

    weights: Mapping[tuple[str, str], float]  # (traveller, landmark) -> count

    @property
    def travellers(self) -> set[str]:
        return {t for t, _ in self.weights}

    @property
    def landmarks(self) -> set[str]:
        return {l for _, l in self.weights}


def build_visit_graph(events: Iterable[tuple[str, str, object]],
                      known_landmarks: Iterable[str] | None = None) -> VisitGraph:
    """Aggregate (traveller, landmark, timestamp) events into edge weights.

    Timestamps are accepted for interface compatibility but unused; the
    graph only needs visit multiplicities.
    """
    known = set(known_landmarks) if known_landmarks is not None else None
    weights: dict[tuple[str, str], float] = {}
    for traveller, landmark, _ts in events:
        if known is not None and landmark not in known:
            raise UnknownLandmark(landmark)
        key = (traveller, landmark)
        weights[key] = weights.get(key, 0.0) + 1.0
    return VisitGraph(weights)


def infer_significance(graph: VisitGraph, max_iters: int = DEFAULT_MAX_ITERS,
                       tol: float = DEFAULT_TOL) -> dict[str, float]:
    """Run the alternating power iteration and return significances in [0, 1].

    authority(t) = sum of w * hub(l) over t's visits, hub(l) = sum of
    w * authority(t) over l's visitors, L2-normalizing after each
    half-step, until the largest hub change drops below tol or max_iters
    is hit. Hub scores are rescaled by their maximum.
    """
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    if tol <= 0:
        raise ValueError("tol must be positive")
    if not graph.weights:
        raise EmptyGraph("no visit edges")

    travellers = sorted(graph.travellers)
    landmarks = sorted(graph.landmarks)
    by_traveller: dict[str, list[tuple[str, float]]] = {t: [] for t in travellers}
    by_landmark: dict[str, list[tuple[str, float]]] = {l: [] for l in landmarks}
    for (t, l), w in graph.weights.items():
        by_traveller[t].append((l, w))
        by_landmark[l].append((t, w))

    hub = {l: 1.0 for l in landmarks}
    for _ in range(max_iters):
        auth = {t: sum(w * hub[l] for l, w in by_traveller[t]) for t in travellers}
        norm = math.sqrt(sum(v * v for v in auth.values()))
        if norm > 0:
            auth = {t: v / norm for t, v in auth.items()}
        new_hub = {l: sum(w * auth[t] for t, w in by_landmark[l]) for l in landmarks}
        norm = math.sqrt(sum(v * v for v in new_hub.values()))
        if norm > 0:
            new_hub = {l: v / norm for l, v in new_hub.items()}
        delta = max(abs(new_hub[l] - hub[l]) for l in landmarks)
        hub = new_hub
        if delta < tol:
            break

    top = max(hub.values())
    if top > 0:
        hub = {l: v / top for l, v in hub.items()}
    return hub
