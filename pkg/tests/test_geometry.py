"""Distance catalogue, transforms, Schoenberg decomposition, certification."""

import numpy as np
import pytest

import divmax
from divmax.errors import InvalidInputError
from divmax.geometry import METRIC_TOL, NUM_TOL, PSD_TOL_SCALE

from conftest import random_certified


class TestDistanceMatrix:
    def test_validates_and_freezes(self):
        dm = divmax.DistanceMatrix(np.array([[0.0, 2.0], [2.0, 0.0]]))
        assert dm.n == 2
        with pytest.raises(ValueError):
            dm.d[0, 1] = 5.0

    @pytest.mark.parametrize(
        "bad",
        [
            np.zeros((3, 2)),                                  # not square
            np.zeros((1, 1)),                                  # too small
            np.array([[0.0, -1.0], [-1.0, 0.0]]),              # negative
            np.array([[0.0, 1.0], [2.0, 0.0]]),                # asymmetric
            np.array([[1.0, 1.0], [1.0, 0.0]]),                # diagonal
            np.array([[0.0, np.inf], [np.inf, 0.0]]),          # non-finite
        ],
    )
    def test_rejects_invalid(self, bad):
        with pytest.raises(InvalidInputError):
            divmax.DistanceMatrix(bad)


class TestBuildDistance:
    def test_collinear_l2(self):
        dm = divmax.build_distance([[0.0], [1.0], [2.0]], "l2")
        assert np.allclose(dm.d, [[0, 1, 2], [1, 0, 1], [2, 1, 0]])

    def test_l1_equals_l2_in_one_dim(self):
        pts = np.random.default_rng(0).standard_normal((6, 1))
        a = divmax.build_distance(pts, "l1")
        b = divmax.build_distance(pts, "l2")
        assert np.allclose(a.d, b.d)

    def test_lp_between_l1_and_l2(self):
        pts = np.random.default_rng(1).standard_normal((5, 4))
        d1 = divmax.build_distance(pts, "l1").d
        dp = divmax.build_distance(pts, "lp", p=1.5).d
        d2 = divmax.build_distance(pts, "l2").d
        assert (dp <= d1 + 1e-12).all() and (d2 <= dp + 1e-12).all()

    def test_lp_requires_valid_exponent(self):
        pts = [[0.0], [1.0]]
        with pytest.raises(InvalidInputError):
            divmax.build_distance(pts, "lp")
        for p in (0.5, 2.5, 3.0):
            with pytest.raises(InvalidInputError):
                divmax.build_distance(pts, "lp", p=p)

    def test_identical_points_zero_matrix(self):
        dm = divmax.build_distance([[1.0, 2.0]] * 4, "l2")
        assert not dm.d.any()

    def test_cosine_angles(self):
        pts = [[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [2.0, 0.0]]
        dm = divmax.build_distance(pts, "cosine")
        assert dm.d[0, 1] == pytest.approx(np.pi / 2)
        assert dm.d[0, 2] == pytest.approx(np.pi)
        assert dm.d[0, 3] == pytest.approx(0.0, abs=1e-12)

    def test_cosine_rejects_zero_vector(self):
        with pytest.raises(InvalidInputError):
            divmax.build_distance([[1.0, 0.0], [0.0, 0.0]], "cosine")

    def test_jaccard_pair(self):
        dm = divmax.build_distance([{1, 2}, {2, 3}], "jaccard", universe={1, 2, 3})
        assert dm.d[0, 1] == pytest.approx(1 - 1 / 3)

    def test_jaccard_empty_sets(self):
        dm = divmax.build_distance([set(), set(), {0}], "jaccard", universe=2)
        assert dm.d[0, 1] == 0.0
        assert dm.d[0, 2] == 1.0

    def test_dice_and_simple_matching_and_russell_rao(self):
        sets = [{0, 1}, {1, 2}]
        dice = divmax.build_distance(sets, "dice", universe=4)
        assert dice.d[0, 1] == pytest.approx(2 / 4)
        sm = divmax.build_distance(sets, "simple_matching", universe=4)
        assert sm.d[0, 1] == pytest.approx(2 / 4)
        rr = divmax.build_distance(sets, "russell_rao", universe=4)
        assert rr.d[0, 1] == pytest.approx(1 - 1 / 4)
        # Raw russell_rao self-dissimilarity is dropped to keep a zero diagonal.
        assert not rr.d.diagonal().any()

    def test_set_kinds_require_universe(self):
        with pytest.raises(InvalidInputError):
            divmax.build_distance([{0}, {1}], "jaccard")

    def test_universe_membership_enforced(self):
        with pytest.raises(InvalidInputError):
            divmax.build_distance([{0}, {9}], "jaccard", universe=3)

    def test_unknown_kind(self):
        with pytest.raises(InvalidInputError):
            divmax.build_distance([[0.0], [1.0]], "hamming")


class TestMetric:
    def test_l2_is_metric(self):
        assert divmax.is_metric(random_certified(3, 8, "l2"))

    def test_squared_line_is_not_metric(self):
        dm = divmax.DistanceMatrix(np.array([[0.0, 1, 4], [1, 0, 1], [4, 1, 0]]))
        assert not divmax.is_metric(dm)


class TestTransforms:
    def test_ratio_single_value(self):
        dm = divmax.DistanceMatrix(np.array([[0.0, 1.0], [1.0, 0.0]]))
        out = divmax.transform_distance(dm, "ratio")
        assert out.d[0, 1] == pytest.approx(0.5)

    def test_zero_matrix_fixed_point(self):
        dm = divmax.build_distance([[0.0, 0.0]] * 3, "l2")
        for name in divmax.TRANSFORM_NAMES:
            kwargs = {}
            if name == "power":
                kwargs["alpha"] = 0.5
            if name == "exp_decay":
                kwargs["lam"] = 2.0
            assert not divmax.transform_distance(dm, name, **kwargs).d.any()

    def test_power_validation(self):
        dm = random_certified(0, 4)
        for alpha in (0.0, -1.0, 1.5, None):
            with pytest.raises(InvalidInputError):
                divmax.transform_distance(dm, "power", alpha=alpha)

    def test_exp_decay_validation(self):
        dm = random_certified(0, 4)
        with pytest.raises(InvalidInputError):
            divmax.transform_distance(dm, "exp_decay", lam=0.0)

    def test_metric_power_two_level_metric(self):
        # n = 4 with distances in {1, 2}: exponent log2(4/3) maps 2 to 4/3.
        d = np.full((4, 4), 1.0)
        d[0, 1] = d[1, 0] = 2.0
        np.fill_diagonal(d, 0.0)
        dm = divmax.DistanceMatrix(d)
        out = divmax.transform_distance(dm, "metric_power")
        assert out.d[0, 1] == pytest.approx(4 / 3)
        assert out.d[0, 2] == pytest.approx(1.0)
        assert divmax.certify_negative_type(out).is_negative_type

    def test_metric_power_rejects_non_metric(self):
        dm = divmax.DistanceMatrix(np.array([[0.0, 1, 4], [1, 0, 1], [4, 1, 0]]))
        with pytest.raises(InvalidInputError):
            divmax.transform_distance(dm, "metric_power")

    @pytest.mark.parametrize("seed", range(6))
    def test_transforms_preserve_negative_type(self, seed):
        dm = random_certified(seed, 7, "l2")
        variants = [
            divmax.transform_distance(dm, "power", alpha=0.6),
            divmax.transform_distance(dm, "ratio"),
            divmax.transform_distance(dm, "log1p"),
            divmax.transform_distance(dm, "exp_decay", lam=1.3),
            divmax.transform_distance(dm, "metric_power"),
        ]
        for out in variants:
            assert divmax.certify_negative_type(out).is_negative_type

    def test_unknown_transform(self):
        with pytest.raises(InvalidInputError):
            divmax.transform_distance(random_certified(0, 4), "sqrt")


class TestSchoenbergForm:
    def test_line_example(self):
        dm = divmax.build_distance([[0.0], [1.0], [2.0]], "l1")
        form = divmax.schoenberg_form(dm)
        assert np.allclose(form.c, [0, 1, 2])
        assert np.allclose(form.q, [[0, 0, 0], [0, 1, 1], [0, 1, 2]])

    def test_identity_on_indicator(self):
        dm = divmax.build_distance([[0.0], [1.0], [2.0]], "l1")
        form = divmax.schoenberg_form(dm)
        x = np.array([1.0, 1.0, 0.0])
        alpha = x.sum()
        lhs = float(x @ dm.d @ x)
        rhs = 2 * alpha * float(form.c @ x) - 2 * float(x @ form.q @ x)
        assert lhs == pytest.approx(2.0)
        assert rhs == pytest.approx(lhs)

    def test_all_zero_matrix(self):
        dm = divmax.build_distance([[0.0, 0.0]] * 3, "l2")
        form = divmax.schoenberg_form(dm)
        assert not form.c.any() and not form.q.any()

    @pytest.mark.parametrize("seed", range(8))
    def test_identity_for_arbitrary_x_and_base(self, seed):
        # d(i,j) = c_i + c_j - 2 Q_ij makes the identity algebraic: it holds
        # for every x, not only on slices, and for every base point.
        rng = np.random.default_rng(seed)
        dm = random_certified(seed, 7, "l1")
        form = divmax.schoenberg_form(dm, base_point=int(rng.integers(7)))
        for _ in range(50):
            x = rng.uniform(-1.0, 2.0, size=7)
            lhs = float(x @ dm.d @ x)
            rhs = 2 * x.sum() * float(form.c @ x) - 2 * float(x @ form.q @ x)
            assert lhs == pytest.approx(rhs, rel=1e-11, abs=1e-11)

    def test_base_point_out_of_range(self):
        with pytest.raises(InvalidInputError):
            divmax.schoenberg_form(random_certified(0, 4), base_point=4)


class TestCertification:
    @pytest.mark.parametrize("kind", divmax.DISTANCE_KINDS[:-1])
    def test_catalogue_certifies(self, kind):
        for seed in range(5):
            dm = random_certified(seed, 10, kind)
            cert = divmax.certify_negative_type(dm)
            assert cert.is_negative_type, (kind, seed, cert.min_eigenvalue)
            assert cert.witness is None

    def test_triangle_1_1_5_rejected_with_witness(self, triangle_not_negtype):
        cert = divmax.certify_negative_type(triangle_not_negtype)
        assert not cert.is_negative_type
        assert cert.verdict == "not_negative_type"
        assert cert.min_eigenvalue == pytest.approx(-0.5)
        b = cert.witness
        assert b.sum() == pytest.approx(0.0, abs=1e-12)
        assert cert.witness_value == pytest.approx(float(b @ triangle_not_negtype.d @ b))
        assert cert.witness_value > 0
        # The witness direction is (-2, 1, 1) up to scale.
        assert np.allclose(b / b[1], [-2.0, 1.0, 1.0])

    def test_all_zero_matrix_certifies(self):
        dm = divmax.build_distance([[0.0, 0.0]] * 3, "l2")
        cert = divmax.certify_negative_type(dm)
        assert cert.is_negative_type
        assert cert.min_eigenvalue == pytest.approx(0.0, abs=1e-15)

    def test_zero_sum_vectors_never_positive(self):
        # Direct quadratic-form check of what the certificate promises.
        rng = np.random.default_rng(42)
        for seed in range(5):
            dm = random_certified(seed, 8, "jaccard")
            tau = PSD_TOL_SCALE * (1 + np.abs(dm.d).sum(axis=1).max())
            for _ in range(200):
                b = rng.standard_normal(8)
                b -= b.mean()
                assert float(b @ dm.d @ b) <= tau * float(b @ b) + 1e-12


class TestDispersion:
    def test_pair_indicator(self):
        dm = divmax.build_distance([[0.0], [1.0], [2.0]], "l1")
        x = np.array([1.0, 0.0, 1.0])
        assert divmax.dispersion(dm, x) == pytest.approx(4.0)  # 2 * d(0, 2)

    def test_singleton_zero(self):
        dm = random_certified(0, 5)
        for i in range(5):
            x = np.zeros(5)
            x[i] = 1.0
            assert divmax.dispersion(dm, x) == 0.0

    def test_linear_scores_added(self):
        dm = divmax.build_distance([[0.0], [1.0], [2.0]], "l1")
        x = np.array([1.0, 0.0, 1.0])
        w = np.array([0.5, 9.0, 0.25])
        assert divmax.dispersion(dm, x, w) == pytest.approx(4.75)

    def test_shape_checks(self):
        dm = random_certified(0, 5)
        with pytest.raises(InvalidInputError):
            divmax.dispersion(dm, np.ones(4))
        with pytest.raises(InvalidInputError):
            divmax.dispersion(dm, np.ones(5), w=np.ones(3))


class TestUnionInequality:
    def test_line_example(self):
        dm = divmax.build_distance([[0.0], [1.0], [2.0]], "l1")
        res = divmax.check_union_inequality(dm, np.ones(3), [0, 1], [2])
        assert res.holds
        assert res.lhs == pytest.approx(8 / 3)
        assert res.rhs == pytest.approx(1.0)

    def test_singletons_trivial(self):
        dm = divmax.DistanceMatrix(np.array([[0.0, 1.0], [1.0, 0.0]]))
        res = divmax.check_union_inequality(dm, np.ones(2), [0], [1])
        assert res.holds and res.lhs == pytest.approx(1.0) and res.rhs == 0.0

    @pytest.mark.parametrize("kind", ["l2", "jaccard", "cosine"])
    def test_random_draws_hold(self, kind):
        rng = np.random.default_rng(7)
        for seed in range(10):
            dm = random_certified(seed, 9, kind)
            for _ in range(50):
                x = rng.uniform(0.05, 1.0, size=9)
                perm = rng.permutation(9)
                cut = int(rng.integers(1, 8))
                size = int(rng.integers(cut + 1, 10))
                a, b = perm[:cut], perm[cut:size]
                res = divmax.check_union_inequality(dm, x, a, b)
                assert res.holds, (kind, seed, res.lhs, res.rhs)

    def test_rejects_overlap_and_zero_mass(self):
        dm = random_certified(0, 4)
        with pytest.raises(InvalidInputError):
            divmax.check_union_inequality(dm, np.ones(4), [0, 1], [1, 2])
        with pytest.raises(InvalidInputError):
            divmax.check_union_inequality(dm, np.zeros(4), [0], [1])
