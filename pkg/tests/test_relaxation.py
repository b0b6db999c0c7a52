"""Slice relaxation: conditional-gradient solver and the alpha sweep."""

import numpy as np
import pytest

import divmax
from divmax.errors import CertificationError, InvalidInputError

from conftest import enumerate_independent, random_certified, random_matroid


def brute_opt_value(dm, m, w=None):
    best = 0.0
    wv = np.zeros(m.n) if w is None else np.asarray(w, dtype=float)
    for s in enumerate_independent(m):
        x = np.zeros(m.n)
        x[list(s)] = 1.0
        best = max(best, float(x @ dm.d @ x + wv @ x))
    return best


class TestSolveSlice:
    def test_two_point_slice_is_single_point(self):
        dm = divmax.build_distance([[0.0], [3.0]], "l1")
        m = divmax.UniformMatroid(2, 2)
        sol = divmax.solve_slice(dm, m, 2)
        assert np.allclose(sol.point.x, [1.0, 1.0])
        assert sol.value == pytest.approx(6.0)
        assert sol.gap == pytest.approx(0.0, abs=1e-12)
        assert sol.iterations == 0 and sol.converged

    def test_allones_alpha2_uniform_maximizer(self, allones_dm4):
        m = divmax.UniformMatroid(4, 2)
        sol = divmax.solve_slice(allones_dm4, m, 2, gap_tol=1e-10)
        assert sol.value == pytest.approx(3.0, abs=1e-8)
        assert np.allclose(sol.point.x, 0.5, atol=1e-4)
        assert sol.upper_bound >= 3.0 - 1e-12

    def test_allones_alpha1_value(self, allones_dm4):
        m = divmax.UniformMatroid(4, 2)
        sol = divmax.solve_slice(allones_dm4, m, 1, gap_tol=1e-10)
        # max of 1 - |x|^2 at x = (1/4, ..., 1/4).
        assert sol.value == pytest.approx(0.75, abs=1e-8)

    def test_trace_monotone_and_feasible(self):
        for seed in range(6):
            dm = random_certified(seed, 8, "l2")
            m = random_matroid(seed, 8)
            if m.full_rank == 0:
                continue
            alpha = max(1, m.full_rank - 1) if m.full_rank > 1 else 1
            sol = divmax.solve_slice(dm, m, alpha, gap_tol=1e-8)
            trace = np.array(sol.value_trace)
            assert (np.diff(trace) >= -1e-9).all()
            x = sol.point.x
            assert x.sum() == pytest.approx(alpha, abs=1e-9)
            assert divmax.in_polytope(m, x, tol=1e-9)
            assert sol.gap >= 0.0
            assert sol.upper_bound == pytest.approx(sol.value + sol.gap)

    def test_gap_certificate_dominates_vertices(self):
        # value + gap bounds the slice max, hence any same-size basis value.
        dm = random_certified(3, 7, "jaccard")
        m = divmax.UniformMatroid(7, 3)
        sol = divmax.solve_slice(dm, m, 3, gap_tol=1e-9)
        for s in enumerate_independent(m):
            if len(s) != 3:
                continue
            x = np.zeros(7)
            x[list(s)] = 1.0
            assert sol.upper_bound >= float(x @ dm.d @ x) - 1e-9

    def test_alpha_validation(self):
        dm = random_certified(0, 4)
        m = divmax.UniformMatroid(4, 2)
        for alpha in (0, 3):
            with pytest.raises(InvalidInputError):
                divmax.solve_slice(dm, m, alpha)

    def test_dimension_mismatch(self):
        dm = random_certified(0, 4)
        with pytest.raises(InvalidInputError):
            divmax.solve_slice(dm, divmax.UniformMatroid(5, 2), 1)

    def test_certification_enforced(self, triangle_not_negtype):
        m = divmax.UniformMatroid(3, 2)
        with pytest.raises(CertificationError):
            divmax.solve_slice(triangle_not_negtype, m, 2)
        sol = divmax.solve_slice(triangle_not_negtype, m, 2, force=True)
        assert sol.value >= 0.0

    def test_scores_shift_the_optimum(self):
        dm = divmax.build_distance([[0.0], [1.0], [2.0]], "l1")
        m = divmax.UniformMatroid(3, 1)
        w = np.array([0.0, 5.0, 0.0])
        sol = divmax.solve_slice(dm, m, 1, w, gap_tol=1e-10)
        # Dispersion of any single point is 0, so mass concentrates on the score.
        assert sol.value == pytest.approx(5.0, abs=1e-7)
        assert sol.point.x[1] == pytest.approx(1.0, abs=1e-7)


class TestSweep:
    def test_integrality_gap_42(self):
        doc = divmax.gen_integrality_gap(4, 2)
        dm, m, _ = divmax.materialize(doc)
        res = divmax.sweep_slices(dm, m, gap_tol=1e-10)
        assert res.best.alpha == 2
        assert res.best.value == pytest.approx(3.0, abs=1e-8)
        assert np.allclose(res.best.point.x, 0.5, atol=1e-5)
        assert len(res.per_slice) == 2
        assert res.opt_upper_bound == pytest.approx(3.0, abs=1e-8)

    def test_upper_bound_dominates_brute_force(self):
        for seed in range(8):
            dm = random_certified(seed, 7, ["l1", "cosine", "dice"][seed % 3])
            m = random_matroid(seed + 41, 7)
            res = divmax.sweep_slices(dm, m, gap_tol=1e-9)
            opt = brute_opt_value(dm, m)
            assert res.opt_upper_bound >= opt - 1e-6 * (1 + opt)

    def test_upper_bound_with_scores(self):
        rng = np.random.default_rng(11)
        for seed in range(5):
            dm = random_certified(seed, 6, "l2")
            m = random_matroid(seed + 3, 6)
            w = rng.uniform(0.0, 1.0, size=6)
            res = divmax.sweep_slices(dm, m, w=w, gap_tol=1e-9)
            opt = brute_opt_value(dm, m, w)
            assert res.opt_upper_bound >= opt - 1e-6 * (1 + opt)

    def test_best_is_value_argmax_of_slices(self):
        dm = random_certified(9, 8, "l2")
        m = divmax.UniformMatroid(8, 4)
        res = divmax.sweep_slices(dm, m)
        values = [s.value for s in res.per_slice]
        assert res.best.value == max(values)
        assert [s.alpha for s in res.per_slice] == [1, 2, 3, 4]
        assert res.opt_upper_bound >= max(s.upper_bound for s in res.per_slice)

    def test_rank_zero_matroid(self):
        dm = random_certified(0, 4)
        m = divmax.PartitionMatroid([[0, 1, 2, 3]], [0])
        res = divmax.sweep_slices(dm, m)
        assert res.best.value == 0.0
        assert res.opt_upper_bound == 0.0
        assert not res.best.point.x.any()

    def test_threads_deterministic(self):
        dm = random_certified(21, 9, "l2")
        m = divmax.UniformMatroid(9, 4)
        a = divmax.sweep_slices(dm, m, gap_tol=1e-9, threads=1)
        b = divmax.sweep_slices(dm, m, gap_tol=1e-9, threads=4)
        assert a.best.value == b.best.value
        assert np.array_equal(a.best.point.x, b.best.point.x)
        for sa, sb in zip(a.per_slice, b.per_slice):
            assert sa.value == sb.value and sa.gap == sb.gap

    def test_certification_enforced(self, triangle_not_negtype):
        m = divmax.UniformMatroid(3, 2)
        with pytest.raises(CertificationError):
            divmax.sweep_slices(triangle_not_negtype, m)
        res = divmax.sweep_slices(triangle_not_negtype, m, force=True)
        assert res.best.value >= 0.0
