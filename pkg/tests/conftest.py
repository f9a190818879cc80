import random

import pytest

from routecrowd.geo import GeoPoint
from routecrowd.model import CandidateSet, Landmark, LandmarkIndex, LandmarkRoute


def routes_from(*sequences):
    return CandidateSet.merged([LandmarkRoute(tuple(s)) for s in sequences])


def grid_index(rows=4, cols=4, spacing_km=1.0, base=(40.0, 116.3), sig=None):
    """Rectangular landmark grid; ids g00..g{r}{c}."""
    import math
    landmarks = []
    for r in range(rows):
        for c in range(cols):
            lat = base[0] + r * spacing_km / 111.32
            lon = base[1] + c * spacing_km / (111.32 * math.cos(math.radians(base[0])))
            lid = f"g{r}{c}"
            landmarks.append(Landmark(lid, lid, GeoPoint(lat, lon),
                                      (sig or {}).get(lid, 0.0)))
    return LandmarkIndex(landmarks)


def random_instance(rng: random.Random, n_routes=None, n_landmarks=12):
    """Random candidate set with pairwise-distinct memberships plus random
    significances; used by the selection oracle-equivalence harness."""
    if n_routes is None:
        n_routes = rng.randint(2, 6)
    pool = [f"l{i}" for i in range(n_landmarks)]
    seen, routes = set(), []
    while len(routes) < n_routes:
        size = rng.randint(1, min(6, n_landmarks))
        member = tuple(sorted(rng.sample(pool, size)))
        if frozenset(member) not in seen:
            seen.add(frozenset(member))
            routes.append(LandmarkRoute(member))
    sig = {l: round(rng.random(), 6) for l in pool}
    return CandidateSet.merged(routes), sig


@pytest.fixture
def two_route_example():
    """The two-route worked example: R1={l1,l2,l3}, R2={l1,l2,l4}."""
    return routes_from(["l1", "l2", "l3"], ["l1", "l2", "l4"])
