"""Worker-landmark familiarity: profile scores, matrix completion, and
spatial accumulation.

A worker's familiarity with a landmark combines proximity of their home,
work and frequented place with their answer history there. The resulting
worker x landmark matrix is sparse, so it is completed by regularized
matrix factorization (two latent factor matrices trained by full-batch
gradient descent), and finally smoothed spatially: knowing a landmark
implies knowing its surroundings, weighted by a Gaussian of distance with
std one third of the knowledge radius.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import DimensionMismatch, Divergence
from .geo import GeoPoint, haversine_km
from .model import Landmark, LandmarkIndex


@dataclass
class FamiliarityConfig:
    alpha: float = 0.5          # profile vs history mix
    beta: float = 0.3           # credit for a wrong answer, < 1
    eta_dis_km: float = 3.0     # knowledge radius
    normalize_distances: bool = True  # divide anchor distances by eta_dis

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must be in [0, 1]")
        if not 0.0 <= self.beta < 1.0:
            raise ValueError("beta must be in [0, 1)")
        if self.eta_dis_km <= 0:
            raise ValueError("eta_dis must be positive")


@dataclass(frozen=True)
class WorkerProfile:
    id: str
    home: GeoPoint
    work: GeoPoint
    frequented: GeoPoint
    history: Mapping[str, tuple[int, int]] = field(default_factory=dict)  # landmark -> (correct, wrong)
    response_durations: tuple[float, ...] = ()  # hours
    outstanding_tasks: int = 0


@dataclass(frozen=True)
class FamiliarityMatrix:
    """Sparse worker x landmark matrix; zero entries are unobserved."""

    n_workers: int
    n_landmarks: int
    worker_ids: tuple[str, ...]
    landmark_ids: tuple[str, ...]
    entries: Mapping[tuple[int, int], float]

    def dense(self) -> np.ndarray:
        m = np.zeros((self.n_workers, self.n_landmarks))
        for (i, j), v in self.entries.items():
            m[i, j] = v
        return m

    def value(self, worker_id: str, landmark_id: str) -> float:
        i = self.worker_ids.index(worker_id)
        j = self.landmark_ids.index(landmark_id)
        return self.entries.get((i, j), 0.0)


@dataclass(frozen=True)
class LatentFactors:
    W: np.ndarray  # d x n
    L: np.ndarray  # d x m
    d: int
    lambda_w: float
    lambda_l: float
    learning_rate: float
    seed: int
    final_objective: float
    final_gradient_norm: float
    iterations: int

    def effective_rank(self, cutoff: float = 1e-6) -> int:
        s = np.linalg.svd(self.W.T @ self.L, compute_uv=False)
        return int(np.sum(s > cutoff))


def profile_familiarity(worker: WorkerProfile, landmark: Landmark,
                        cfg: FamiliarityConfig) -> float:
    """Familiarity of one worker with one landmark.

    f = alpha * exp(-(d_home + d_work + d_fr)) + (1-alpha) * (correct +
    beta * wrong); any anchor farther than eta_dis zeroes the whole
    exponential term. Distances are normalized by eta_dis by default so
    the exponential stays in a usable range for kilometer units.
    """
    exponent = 0.0
    for anchor in (worker.home, worker.work, worker.frequented):
        d = haversine_km(landmark.location, anchor)
        if d > cfg.eta_dis_km:
            exponent = math.inf
            break
        exponent += d / cfg.eta_dis_km if cfg.normalize_distances else d
    proximity = 0.0 if math.isinf(exponent) else math.exp(-exponent)
    correct, wrong = worker.history.get(landmark.id, (0, 0))
    return cfg.alpha * proximity + (1.0 - cfg.alpha) * (correct + cfg.beta * wrong)


def build_matrix(workers: Sequence[WorkerProfile], index: LandmarkIndex,
                 cfg: FamiliarityConfig) -> FamiliarityMatrix:
    """Assemble the sparse familiarity matrix; only nonzero scores are stored."""
    landmark_ids = tuple(index.ids())
    worker_ids = tuple(w.id for w in workers)
    entries: dict[tuple[int, int], float] = {}
    for i, w in enumerate(workers):
        for j, lid in enumerate(landmark_ids):
            f = profile_familiarity(w, index.get(lid), cfg)
            if f > 0.0:
                entries[(i, j)] = f
    return FamiliarityMatrix(len(workers), len(landmark_ids), worker_ids,
                             landmark_ids, entries)


def _check_dims(M: np.ndarray, W: np.ndarray, L: np.ndarray):
    if W.shape[0] != L.shape[0] or W.shape[1] != M.shape[0] or L.shape[1] != M.shape[1]:
        raise DimensionMismatch(
            f"M {M.shape}, W {W.shape}, L {L.shape} do not agree")


def pmf_objective(M: np.ndarray, mask: np.ndarray, W: np.ndarray, L: np.ndarray,
                  lambda_w: float, lambda_l: float) -> float:
    """Squared reconstruction error on observed cells plus L2 penalties."""
    _check_dims(M, W, L)
    resid = mask * (M - W.T @ L)
    return float(np.sum(resid ** 2)
                 + lambda_w * np.sum(W ** 2)
                 + lambda_l * np.sum(L ** 2))


def pmf_gradient(M: np.ndarray, mask: np.ndarray, W: np.ndarray, L: np.ndarray,
                 lambda_w: float, lambda_l: float) -> tuple[np.ndarray, np.ndarray]:
    _check_dims(M, W, L)
    resid = mask * (M - W.T @ L)
    grad_w = -2.0 * (L @ resid.T) + 2.0 * lambda_w * W
    grad_l = -2.0 * (W @ resid) + 2.0 * lambda_l * L
    return grad_w, grad_l


def train_pmf(matrix: FamiliarityMatrix, d: int = 8, lambda_w: float = 0.05,
              lambda_l: float = 0.05, learning_rate: float = 0.005,
              max_iters: int = 5000, tol: float = 1e-8,
              seed: int = 0) -> LatentFactors:
    """Fit latent factors by full-batch gradient descent.

    Factors start from seeded N(0, 0.1) noise. A step that would increase
    the objective is rejected and the learning rate halved, so the
    accepted objective sequence is non-increasing; accepted steps grow the
    rate slightly to speed up the flat tail. Training stops when the
    relative decrease falls below tol.
    """
    if d < 1:
        raise ValueError("latent dimension must be >= 1")
    if learning_rate <= 0:
        raise ValueError("learning rate must be positive")
    M = matrix.dense()
    mask = (M != 0.0).astype(float)
    rng = np.random.RandomState(seed)
    W = rng.normal(0.0, 0.1, size=(d, matrix.n_workers))
    L = rng.normal(0.0, 0.1, size=(d, matrix.n_landmarks))

    lr = learning_rate
    obj = pmf_objective(M, mask, W, L, lambda_w, lambda_l)
    iters = 0
    for iters in range(1, max_iters + 1):
        grad_w, grad_l = pmf_gradient(M, mask, W, L, lambda_w, lambda_l)
        new_w = W - lr * grad_w
        new_l = L - lr * grad_l
        new_obj = pmf_objective(M, mask, new_w, new_l, lambda_w, lambda_l)
        if not math.isfinite(new_obj):
            raise Divergence("objective became non-finite")
        if new_obj > obj:
            lr *= 0.5
            if lr < 1e-300:
                break
            continue
        W, L = new_w, new_l
        if obj > 0 and (obj - new_obj) / obj < tol:
            obj = new_obj
            break
        obj = new_obj
        lr *= 1.05

    grad_w, grad_l = pmf_gradient(M, mask, W, L, lambda_w, lambda_l)
    grad_norm = float(np.sqrt(np.sum(grad_w ** 2) + np.sum(grad_l ** 2)))
    return LatentFactors(W, L, d, lambda_w, lambda_l, learning_rate, seed,
                         obj, grad_norm, iters)


def predict_matrix(matrix: FamiliarityMatrix, factors: LatentFactors) -> FamiliarityMatrix:
    """Fill unobserved cells with max(0, W_i . L_j); observed cells kept as-is."""
    pred = factors.W.T @ factors.L
    entries: dict[tuple[int, int], float] = {}
    for i in range(matrix.n_workers):
        for j in range(matrix.n_landmarks):
            observed = matrix.entries.get((i, j))
            if observed is not None:
                entries[(i, j)] = observed
            else:
                v = max(0.0, float(pred[i, j]))
                if v > 0.0:
                    entries[(i, j)] = v
    return FamiliarityMatrix(matrix.n_workers, matrix.n_landmarks,
                             matrix.worker_ids, matrix.landmark_ids, entries)


def gaussian_weight(distance_km: float, eta_dis_km: float) -> float:
    """Unnormalized-pdf weight of a neighbor at the given distance.

    Gaussian pdf of the distance at mean 0, std eta_dis/3; only relative
    magnitudes matter downstream (the accumulated scores feed a ranking).
    """
    sigma = eta_dis_km / 3.0
    return math.exp(-0.5 * (distance_km / sigma) ** 2) / (math.sqrt(2.0 * math.pi) * sigma)


def accumulate(matrix: FamiliarityMatrix, index: LandmarkIndex,
               eta_dis_km: float) -> FamiliarityMatrix:
    """Spatially smooth familiarity: each landmark's score becomes the
    Gaussian-weighted sum over itself and all landmarks within eta_dis."""
    if eta_dis_km <= 0:
        raise ValueError("eta_dis must be positive")
    landmark_ids = matrix.landmark_ids
    col = {lid: j for j, lid in enumerate(landmark_ids)}
    # neighbor lists (including self at distance 0) with fixed weights
    neighborhood: list[list[tuple[int, float]]] = []
    for lid in landmark_ids:
        lm = index.get(lid)
        nbrs = []
        for other in index.within(lm.location, eta_dis_km):
            if other.id in col:
                d = haversine_km(lm.location, other.location)
                nbrs.append((col[other.id], gaussian_weight(d, eta_dis_km)))
        neighborhood.append(nbrs)

    entries: dict[tuple[int, int], float] = {}
    for i in range(matrix.n_workers):
        for j in range(matrix.n_landmarks):
            total = 0.0
            for jj, weight in neighborhood[j]:
                f = matrix.entries.get((i, jj))
                if f:
                    total += weight * f
            if total > 0.0:
                entries[(i, j)] = total
    return FamiliarityMatrix(matrix.n_workers, matrix.n_landmarks,
                             matrix.worker_ids, landmark_ids, entries)
