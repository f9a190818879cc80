import math
import random

import numpy as np
import pytest

from conftest import grid_index
from routecrowd.errors import DimensionMismatch, Divergence
from routecrowd.familiarity import (FamiliarityConfig, FamiliarityMatrix,
                                    WorkerProfile, accumulate, build_matrix,
                                    gaussian_weight, pmf_gradient,
                                    pmf_objective, predict_matrix,
                                    profile_familiarity, train_pmf)
from routecrowd.geo import GeoPoint
from routecrowd.model import Landmark, LandmarkIndex


def worker_at(p: GeoPoint, wid="w1", **kw) -> WorkerProfile:
    return WorkerProfile(id=wid, home=p, work=p, frequented=p, **kw)


FAR = GeoPoint(0.0, 0.0)


class TestProfileFamiliarity:
    def test_all_anchors_at_landmark(self):
        index = grid_index(2, 2)
        lm = index.get("g00")
        cfg = FamiliarityConfig(alpha=1.0)
        assert profile_familiarity(worker_at(lm.location), lm, cfg) == pytest.approx(1.0)

    def test_one_anchor_beyond_range_zeroes_exponential(self):
        index = grid_index(2, 2)
        lm = index.get("g00")
        cfg = FamiliarityConfig(alpha=1.0)
        w = WorkerProfile("w1", home=FAR, work=lm.location, frequented=lm.location)
        assert profile_familiarity(w, lm, cfg) == 0.0

    def test_history_term(self):
        index = grid_index(2, 2)
        lm = index.get("g00")
        cfg = FamiliarityConfig(alpha=0.0, beta=0.5)
        w = worker_at(FAR, history={lm.id: (3, 2)})
        assert profile_familiarity(w, lm, cfg) == pytest.approx(4.0)

    def test_monotone_in_distance_and_correct_count(self):
        index = grid_index(3, 3, spacing_km=0.5)
        lm = index.get("g00")
        cfg = FamiliarityConfig(alpha=0.7, beta=0.3)
        prev = None
        for other in ("g00", "g01", "g02"):
            p = index.get(other).location
            f = profile_familiarity(worker_at(p), lm, cfg)
            if prev is not None:
                assert f <= prev
            prev = f
        base = profile_familiarity(worker_at(lm.location), lm, cfg)
        more = profile_familiarity(
            worker_at(lm.location, history={lm.id: (5, 0)}), lm, cfg)
        assert more > base

    def test_upper_bound(self):
        index = grid_index(2, 2)
        lm = index.get("g00")
        cfg = FamiliarityConfig(alpha=0.4, beta=0.2)
        w = worker_at(lm.location, history={lm.id: (3, 1)})
        f = profile_familiarity(w, lm, cfg)
        assert 0.0 <= f <= cfg.alpha + (1 - cfg.alpha) * (3 + cfg.beta * 1)


class TestBuildMatrix:
    def test_all_far_no_history_empty(self):
        index = grid_index(2, 2)
        m = build_matrix([worker_at(FAR)], index, FamiliarityConfig(alpha=1.0))
        assert not m.entries

    def test_single_colocated_worker(self):
        index = grid_index(1, 2, spacing_km=10.0)
        lm = index.get("g00")
        m = build_matrix([worker_at(lm.location)], index, FamiliarityConfig(alpha=1.0))
        j = m.landmark_ids.index("g00")
        assert m.entries == {(0, j): pytest.approx(1.0)}

    def test_elementwise_oracle(self):
        rng = random.Random(4)
        index = grid_index(5, 6, spacing_km=1.2)
        cfg = FamiliarityConfig()
        workers = []
        for i in range(20):
            p = index.get(rng.choice(index.ids())).location
            hist = {rng.choice(index.ids()): (rng.randint(0, 3), rng.randint(0, 2))}
            workers.append(worker_at(p, wid=f"w{i}", history=hist))
        m = build_matrix(workers, index, cfg)
        for i, w in enumerate(workers):
            for j, lid in enumerate(m.landmark_ids):
                f = profile_familiarity(w, index.get(lid), cfg)
                assert m.entries.get((i, j), 0.0) == pytest.approx(f if f > 0 else 0.0)


def random_pmf_instance(rng: np.random.RandomState, n=4, m=5, d=3):
    M = np.abs(rng.randn(n, m))
    mask = (rng.rand(n, m) < 0.6).astype(float)
    M = M * mask
    mask = (M != 0).astype(float)
    W = rng.randn(d, n) * 0.5
    L = rng.randn(d, m) * 0.5
    return M, mask, W, L


class TestPmfObjectiveGradient:
    def test_zero_factors(self):
        rng = np.random.RandomState(0)
        M, mask, W, L = random_pmf_instance(rng)
        obj = pmf_objective(M, mask, np.zeros_like(W), np.zeros_like(L), 0.0, 0.0)
        assert obj == pytest.approx(np.sum(mask * M ** 2))

    def test_exact_fit_zero_objective_and_gradient(self):
        rng = np.random.RandomState(1)
        _, _, W, L = random_pmf_instance(rng)
        M = W.T @ L
        mask = np.ones_like(M)
        assert pmf_objective(M, mask, W, L, 0.0, 0.0) == pytest.approx(0.0, abs=1e-12)
        gw, gl = pmf_gradient(M, mask, W, L, 0.0, 0.0)
        assert np.allclose(gw, 0.0) and np.allclose(gl, 0.0)

    def test_gradient_matches_finite_differences(self):
        rng = np.random.RandomState(2)
        for _ in range(5):
            M, mask, W, L = random_pmf_instance(rng)
            lw, ll = 0.07, 0.03
            gw, gl = pmf_gradient(M, mask, W, L, lw, ll)
            h = 1e-5
            for arr, grad, which in ((W, gw, "W"), (L, gl, "L")):
                num = np.zeros_like(arr)
                it = np.nditer(arr, flags=["multi_index"])
                while not it.finished:
                    idx = it.multi_index
                    orig = arr[idx]
                    arr[idx] = orig + h
                    up = pmf_objective(M, mask, W, L, lw, ll)
                    arr[idx] = orig - h
                    dn = pmf_objective(M, mask, W, L, lw, ll)
                    arr[idx] = orig
                    num[idx] = (up - dn) / (2 * h)
                    it.iternext()
                denom = max(np.linalg.norm(num), 1e-12)
                assert np.linalg.norm(grad - num) / denom <= 1e-4, which

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            pmf_objective(np.zeros((2, 3)), np.zeros((2, 3)),
                          np.zeros((2, 2)), np.zeros((2, 4)), 0.0, 0.0)


def matrix_from_dense(M: np.ndarray) -> FamiliarityMatrix:
    entries = {(i, j): float(M[i, j])
               for i in range(M.shape[0]) for j in range(M.shape[1]) if M[i, j] != 0}
    return FamiliarityMatrix(M.shape[0], M.shape[1],
                             tuple(f"w{i}" for i in range(M.shape[0])),
                             tuple(f"l{j}" for j in range(M.shape[1])), entries)


class TestTrainPmf:
    def test_rank1_recovery(self):
        M = np.outer([1.0, 2.0, 3.0], [1.0, 1.0, 2.0])
        fm = matrix_from_dense(M)
        factors = train_pmf(fm, d=1, lambda_w=0.0, lambda_l=0.0,
                            learning_rate=0.01, max_iters=20000, tol=1e-14, seed=3)
        recon = factors.W.T @ factors.L
        rmse = np.sqrt(np.mean((recon - M) ** 2))
        assert rmse < 1e-3

    def test_huge_regularization_shrinks_factors(self):
        rng = np.random.RandomState(5)
        M, _, _, _ = random_pmf_instance(rng)
        fm = matrix_from_dense(M)
        factors = train_pmf(fm, d=2, lambda_w=1e6, lambda_l=1e6,
                            learning_rate=1e-7, max_iters=20000, tol=1e-16, seed=1)
        assert np.linalg.norm(factors.W) < 1e-2

    def test_seeded_determinism(self):
        rng = np.random.RandomState(6)
        M, _, _, _ = random_pmf_instance(rng)
        fm = matrix_from_dense(M)
        a = train_pmf(fm, d=3, seed=42)
        b = train_pmf(fm, d=3, seed=42)
        assert np.array_equal(a.W, b.W) and np.array_equal(a.L, b.L)

    def test_objective_not_above_seeded_start(self):
        rng = np.random.RandomState(7)
        M, mask, _, _ = random_pmf_instance(rng, n=6, m=7)
        fm = matrix_from_dense(M)
        factors = train_pmf(fm, d=3, seed=0, max_iters=500)
        assert math.isfinite(factors.final_objective)
        init = np.random.RandomState(0)
        W0 = init.normal(0, 0.1, factors.W.shape)
        L0 = init.normal(0, 0.1, factors.L.shape)
        start = pmf_objective(M, (M != 0).astype(float), W0, L0,
                              factors.lambda_w, factors.lambda_l)
        assert factors.final_objective <= start


class TestPredictMatrix:
    def test_zero_factors_keep_observed(self):
        from routecrowd.familiarity import LatentFactors
        M = np.array([[1.0, 0.0], [0.0, 2.0]])
        fm = matrix_from_dense(M)
        zero = LatentFactors(np.zeros((1, 2)), np.zeros((1, 2)), 1,
                             0.0, 0.0, 0.01, 0, 0.0, 0.0, 0)
        out = predict_matrix(fm, zero)
        assert out.entries == fm.entries

    def test_observed_entries_bit_identical(self):
        rng = np.random.RandomState(8)
        M, _, _, _ = random_pmf_instance(rng)
        fm = matrix_from_dense(M)
        factors = train_pmf(fm, d=2, seed=0, max_iters=200)
        out = predict_matrix(fm, factors)
        for key, v in fm.entries.items():
            assert out.entries[key] == v

    @pytest.mark.parametrize("rank", [1, 3])
    def test_heldout_rmse_noise_free(self, rank):
        rng = np.random.RandomState(9)
        U = np.abs(rng.randn(20, rank)) + 0.5
        V = np.abs(rng.randn(30, rank)) + 0.5
        full = U @ V.T
        observed = rng.rand(20, 30) < 0.4
        M = full * observed
        fm = matrix_from_dense(M)
        factors = train_pmf(fm, d=rank, lambda_w=0.001, lambda_l=0.001,
                            learning_rate=0.005, max_iters=20000, tol=1e-15, seed=2)
        recon = factors.W.T @ factors.L
        held = ~observed
        rmse = np.sqrt(np.mean((recon[held] - full[held]) ** 2))
        assert rmse <= 0.1


class TestAccumulate:
    def test_isolated_landmark_self_weight(self):
        # one landmark far from everything; eta_dis 3 km -> sigma 1 km;
        # F = pdf(0; sigma=1) * f = 0.398942
        index = LandmarkIndex([
            Landmark("a", "a", GeoPoint(40.0, 116.0)),
            Landmark("b", "b", GeoPoint(41.0, 117.0)),
        ])
        fm = FamiliarityMatrix(1, 2, ("w1",), ("a", "b"), {(0, 0): 1.0})
        out = accumulate(fm, index, 3.0)
        assert out.entries[(0, 0)] == pytest.approx(0.398942, abs=1e-6)

    def test_out_of_range_neighbor_contributes_zero(self):
        index = LandmarkIndex([
            Landmark("a", "a", GeoPoint(40.0, 116.0)),
            Landmark("b", "b", GeoPoint(40.05, 116.0)),  # ~5.6 km away
        ])
        fm = FamiliarityMatrix(1, 2, ("w1",), ("a", "b"),
                               {(0, 0): 1.0, (0, 1): 1.0})
        out = accumulate(fm, index, 3.0)
        assert out.entries[(0, 0)] == pytest.approx(gaussian_weight(0.0, 3.0))

    def test_zero_row_stays_zero(self):
        index = grid_index(2, 2)
        fm = FamiliarityMatrix(1, 4, ("w1",), tuple(index.ids()), {})
        out = accumulate(fm, index, 3.0)
        assert not out.entries

    def test_row_linearity(self):
        index = grid_index(3, 3, spacing_km=1.0)
        ids = tuple(index.ids())
        entries = {(0, j): 0.2 * (j + 1) for j in range(len(ids))}
        fm = FamiliarityMatrix(1, len(ids), ("w1",), ids, entries)
        scaled = FamiliarityMatrix(1, len(ids), ("w1",), ids,
                                   {k: 2.5 * v for k, v in entries.items()})
        out = accumulate(fm, index, 3.0)
        out2 = accumulate(scaled, index, 3.0)
        for k, v in out.entries.items():
            assert out2.entries[k] == pytest.approx(2.5 * v)

    def test_worker_permutation_equivariance(self):
        index = grid_index(2, 3)
        ids = tuple(index.ids())
        e = {(0, 0): 1.0, (1, 2): 0.5}
        fm = FamiliarityMatrix(2, len(ids), ("w1", "w2"), ids, e)
        swapped = FamiliarityMatrix(2, len(ids), ("w2", "w1"), ids,
                                    {(1 - i, j): v for (i, j), v in e.items()})
        a = accumulate(fm, index, 3.0)
        b = accumulate(swapped, index, 3.0)
        for (i, j), v in a.entries.items():
            assert b.entries[(1 - i, j)] == pytest.approx(v)
