"""Core domain model: landmarks, landmark-based routes, calibration, and
the discriminativeness predicates shared by the selection algorithms.

A landmark set L is *discriminative* to a set of candidate routes when
intersecting L with each route's membership set yields pairwise distinct
sets, i.e. L can tell every pair of candidates apart.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .errors import EmptyCalibration, EmptySet, UnknownLandmark
from .geo import GeoPoint, haversine_km

DEFAULT_SNAP_RADIUS_KM = 0.3


@dataclass(frozen=True)
class Landmark:
    id: str
    name: str
    location: GeoPoint
    significance: float = 0.0


class LandmarkIndex:
    """Immutable collection of landmarks with spatial range queries.

    Uses a flat lat/lon grid of cells sized to the typical query radius;
    range queries scan only the cells overlapping the query circle.
    """

    def __init__(self, landmarks: Iterable[Landmark], cell_km: float = 1.0):
        self._by_id: dict[str, Landmark] = {}
        for lm in landmarks:
            if lm.id in self._by_id:
                raise ValueError(f"duplicate landmark id: {lm.id}")
            self._by_id[lm.id] = lm
        self._cell_deg = cell_km / 111.32
        self._grid: dict[tuple[int, int], list[Landmark]] = {}
        for lm in self._by_id.values():
            self._grid.setdefault(self._cell(lm.location), []).append(lm)

    def _cell(self, p: GeoPoint) -> tuple[int, int]:
        return (int(p.lat // self._cell_deg), int(p.lon // self._cell_deg))

    def __len__(self) -> int:
        return len(self._by_id)

    def __contains__(self, landmark_id: str) -> bool:
        return landmark_id in self._by_id

    def get(self, landmark_id: str) -> Landmark:
        try:
            return self._by_id[landmark_id]
        except KeyError:
            raise UnknownLandmark(landmark_id) from None

    @property
    def landmarks(self) -> list[Landmark]:
        return sorted(self._by_id.values(), key=lambda lm: lm.id)

    def ids(self) -> list[str]:
        return sorted(self._by_id)

    def within(self, q: GeoPoint, radius_km: float) -> list[Landmark]:
        """All landmarks with great-circle distance <= radius_km from q."""
        # Cell span is padded by one to cover points near cell borders and
        # longitude shrink at high latitude.
        span = int(radius_km / (self._cell_deg * 111.32)) + 2
        qc = self._cell(q)
        found = []
        for di in range(-span, span + 1):
            for dj in range(-span, span + 1):
                for lm in self._grid.get((qc[0] + di, qc[1] + dj), ()):
                    if haversine_km(q, lm.location) <= radius_km:
                        found.append(lm)
        return sorted(found, key=lambda lm: lm.id)

    def nearest(self, q: GeoPoint, radius_km: float) -> Landmark | None:
        """Nearest landmark within radius_km of q, or None."""
        best = None
        best_d = radius_km
        for lm in self.within(q, radius_km):
            d = haversine_km(q, lm.location)
            if best is None or d < best_d:
                best, best_d = lm, d
        return best


@dataclass(frozen=True)
class RawRoute:
    """A continuous travelling path: source, destination, points between."""

    points: tuple[GeoPoint, ...]

    def __post_init__(self):
        if len(self.points) < 2:
            raise ValueError("a raw route needs at least source and destination")


@dataclass(frozen=True)
class LandmarkRoute:
    """A route rewritten as a finite sequence of landmarks."""

    landmark_ids: tuple[str, ...]

    def __post_init__(self):
        if not self.landmark_ids:
            raise ValueError("landmark route must be non-empty")
        for a, b in zip(self.landmark_ids, self.landmark_ids[1:]):
            if a == b:
                raise ValueError("consecutive duplicate landmark in route")

    @property
    def membership(self) -> frozenset[str]:
        return frozenset(self.landmark_ids)


@dataclass(frozen=True)
class CandidateSet:
    """Candidate routes under comparison, merged by membership set.

    Routes with identical membership sets cannot be told apart by any
    landmark question, so they are merged at construction; the provenance
    of every merged duplicate is kept on the surviving route.
    """

    routes: tuple[LandmarkRoute, ...]
    provenance: tuple[tuple[str, ...], ...] = field(default=())

    def __post_init__(self):
        if not self.routes:
            raise ValueError("candidate set must contain at least one route")
        if not self.provenance:
            object.__setattr__(self, "provenance", tuple(("unknown",) for _ in self.routes))
        if len(self.provenance) != len(self.routes):
            raise ValueError("provenance list must align with routes")
        seen = set()
        for r in self.routes:
            if r.membership in seen:
                raise ValueError("duplicate membership sets; use CandidateSet.merged")
            seen.add(r.membership)

    @classmethod
    def merged(cls, routes: Sequence[LandmarkRoute], sources: Sequence[str] | None = None) -> "CandidateSet":
        """Build a candidate set, merging routes with equal membership sets."""
        if sources is None:
            sources = ["unknown"] * len(routes)
        kept: list[LandmarkRoute] = []
        prov: list[list[str]] = []
        index: dict[frozenset[str], int] = {}
        for r, src in zip(routes, sources):
            at = index.get(r.membership)
            if at is None:
                index[r.membership] = len(kept)
                kept.append(r)
                prov.append([src])
            else:
                prov[at].append(src)
        return cls(tuple(kept), tuple(tuple(p) for p in prov))

    def __len__(self) -> int:
        return len(self.routes)

    def memberships(self) -> list[frozenset[str]]:
        return [r.membership for r in self.routes]


def calibrate(raw: RawRoute, index: LandmarkIndex,
              snap_radius_km: float = DEFAULT_SNAP_RADIUS_KM) -> LandmarkRoute:
    """Rewrite a raw route as a landmark sequence by nearest-landmark snap.

    Each point snaps to the nearest landmark within snap_radius_km (points
    with no landmark in range are skipped); consecutive duplicates collapse.
    """
    if snap_radius_km <= 0:
        raise ValueError("snap radius must be positive")
    ids: list[str] = []
    for p in raw.points:
        lm = index.nearest(p, snap_radius_km)
        if lm is None:
            continue
        if not ids or ids[-1] != lm.id:
            ids.append(lm.id)
    if not ids:
        raise EmptyCalibration("no route point snapped to any landmark")
    return LandmarkRoute(tuple(ids))


def is_discriminative(landmark_ids: Iterable[str], routes: CandidateSet) -> bool:
    """True iff the set separates every pair of candidate routes."""
    sel = frozenset(landmark_ids)
    joints = [m & sel for m in routes.memberships()]
    return len(set(joints)) == len(joints)


def is_simplest_discriminative(landmark_ids: Iterable[str], routes: CandidateSet) -> bool:
    """True iff discriminative and no proper subset of size |L|-1 is."""
    sel = frozenset(landmark_ids)
    if not is_discriminative(sel, routes):
        return False
    return all(not is_discriminative(sel - {l}, routes) for l in sel)


def objective_value(landmark_ids: Iterable[str],
                    significance: Mapping[str, float]) -> float:
    """Mean significance of the set: (sum of l.s) / |L|."""
    sel = set(landmark_ids)
    if not sel:
        raise EmptySet("objective undefined for the empty set")
    return sum(significance[l] for l in sel) / len(sel)


def beneficial_landmarks(routes: CandidateSet) -> set[str]:
    """Landmarks that can separate at least one route pair.

    Union of all memberships minus their intersection; landmarks on every
    route (or on none) can never change a pairwise joint-set comparison.
    """
    if len(routes) < 2:
        raise ValueError("need at least two candidate routes")
    members = routes.memberships()
    union = frozenset().union(*members)
    common = members[0]
    for m in members[1:]:
        common &= m
    return set(union - common)


def normalize_significances(raw: Mapping[str, float]) -> dict[str, float]:
    """Min-max normalize raw significance values onto [0, 1]."""
    if not raw:
        return {}
    lo, hi = min(raw.values()), max(raw.values())
    if hi == lo:
        return {k: 1.0 for k in raw}
    return {k: (v - lo) / (hi - lo) for k, v in raw.items()}
