import numpy as np
import pytest

from fairaudit import learners
from fairaudit.errors import DegenerateTargetError, NumericError, SchemaError
from fairaudit.learners import LearnerConfig, fit, predict_labels, predict_scores
from fairaudit.learners import logistic as logit_mod
from fairaudit.learners import mlp as mlp_mod
from fairaudit.learners.logistic import LogisticModel
from fairaudit.learners.trees import ForestModel, _TreeArrays

from conftest import make_table


def separable_table():
    # x < 0 -> 0, x > 0 -> 1, margin >= 1
    xs = [-10.0, -9.0, -8.0, -7.0, -6.0, -5.0, -4.0, -3.0, -2.0, -1.0]
    xs += [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0]
    y = [0] * 10 + [1] * 10
    groups = [0, 1] * 10
    return make_table(groups, y, income=xs)


class TestLogistic:
    def test_separable_perfect_fit(self):
        t = separable_table()
        m = fit("logistic", t, config=LearnerConfig(epochs=4000))
        labels = predict_labels(m, t)
        assert np.array_equal(labels, t.y())

    def test_symmetric_pair_scores_half_at_zero(self):
        # protected constant so only income drives the fit
        t = make_table([1, 1], [0, 1], income=[-1.0, 1.0])
        m = fit("logistic", t)
        s = predict_scores(m, make_table([1, 1], [0, 1], income=[0.0, 0.0]))
        assert s[0] == pytest.approx(0.5, abs=1e-9)

    def test_all_zero_model_scores_half(self):
        t = make_table([1, 0, 1, 0], [1, 0, 0, 1])
        m = LogisticModel(
            t.model_input_names(), LearnerConfig(),
            coef=np.zeros(len(t.model_input_names())), bias=0.0,
            mu=np.zeros(len(t.model_input_names())), sigma=np.ones(len(t.model_input_names())),
        )
        assert np.all(predict_scores(m, t) == 0.5)

    def test_weight_equivalence(self):
        t = make_table([1, 0, 1, 0, 1, 0], [1, 0, 0, 1, 1, 0],
                       income=[3.0, -1.0, 2.0, -2.0, 1.5, 0.5])
        # duplicate row 0 vs doubling its weight
        dup = t.subset([0, 0, 1, 2, 3, 4, 5])
        w = np.ones(6)
        w[0] = 2.0
        m_dup = fit("logistic", dup)
        m_w = fit("logistic", t, weights=w)
        assert np.allclose(m_dup.coef, m_w.coef, atol=1e-6)
        assert abs(m_dup.bias - m_w.bias) < 1e-6

    def test_single_class_target_rejected(self):
        t = make_table([1, 0, 1, 0], [1, 1, 1, 1])
        with pytest.raises(DegenerateTargetError):
            fit("logistic", t)

    def test_non_finite_feature_rejected(self):
        t = make_table([1, 0, 1, 0], [1, 0, 1, 0])
        data = t.data.copy()
        data[1, t.column_index("income")] = np.nan
        t2 = t.__class__(schema=t.schema, encoded=t.encoded, data=data,
                         value_maps=t.value_maps, categories=t.categories)
        with pytest.raises(NumericError):
            fit("logistic", t2)


class TestPredict:
    def test_threshold_tie_goes_positive(self):
        t = make_table([1, 0, 1], [0, 1, 1])
        m = _fixed_score_model(t, [0.2, 0.5, 0.9])
        assert predict_labels(m, t, 0.5).tolist() == [0.0, 1.0, 1.0]

    def test_threshold_zero_all_positive(self):
        t = make_table([1, 0, 1], [0, 1, 1])
        m = _fixed_score_model(t, [0.0, 0.3, 0.9])
        assert predict_labels(m, t, 0.0).tolist() == [1.0, 1.0, 1.0]

    def test_threshold_one_keeps_exact_ones(self):
        t = make_table([1, 0, 1], [0, 1, 1])
        m = _fixed_score_model(t, [0.2, 1.0, 0.9])
        assert predict_labels(m, t, 1.0).tolist() == [0.0, 1.0, 0.0]

    def test_schema_mismatch_names_column(self):
        t = make_table([1, 0, 1, 0], [1, 0, 1, 0])
        m = fit("logistic", t)
        stripped = t.drop_sources(["income"])
        with pytest.raises(SchemaError, match="income"):
            predict_scores(m, stripped)


class _FixedScores(learners.Classifier):
    kind = "fixed"

    def __init__(self, names, scores):
        super().__init__(names, LearnerConfig())
        self._scores = np.asarray(scores, dtype=float)

    def score_matrix(self, X):
        return self._scores


def _fixed_score_model(table, scores):
    return _FixedScores(table.model_input_names(), scores)


class TestForest:
    def test_constant_features_predict_majority(self):
        # forest cannot split on constant columns; it votes the majority class
        t = make_table([1] * 20, [1] * 16 + [0] * 4, income=[5.0] * 20)
        m = fit("forest", t, config=LearnerConfig(n_trees=15, seed=1))
        labels = predict_labels(m, t)
        assert np.all(labels == 1.0)

    def test_vote_mean_exact(self):
        # three stump trees voting (1, 1, 0) on every row -> score 2/3
        trees = []
        for leaf in (1.0, 1.0, 0.0):
            ta = _TreeArrays()
            ta.add(score=leaf)
            trees.append(ta.freeze())
        m = ForestModel(["income"], LearnerConfig(n_trees=3), trees)
        s = m.score_matrix(np.zeros((5, 1)))
        assert np.all(s == pytest.approx(2 / 3))

    def test_forest_score_is_mean_of_tree_votes(self):
        t = make_table([1, 0] * 20, [1, 0, 0, 1] * 10)
        m = fit("forest", t, config=LearnerConfig(n_trees=7, seed=5))
        X = t.matrix(m.feature_names)
        votes = np.column_stack([(tr.predict(X) >= 0.5).astype(float) for tr in m.trees])
        assert np.array_equal(m.score_matrix(X), votes.mean(axis=1))

    def test_seeded_determinism(self):
        t = make_table([1, 0] * 20, [1, 0, 0, 1] * 10)
        m1 = fit("forest", t, config=LearnerConfig(n_trees=9, seed=11))
        m2 = fit("forest", t, config=LearnerConfig(n_trees=9, seed=11))
        X = t.matrix(m1.feature_names)
        assert np.array_equal(m1.score_matrix(X), m2.score_matrix(X))

    def test_tree_fits_separable(self):
        t = separable_table()
        m = fit("tree", t, config=LearnerConfig(max_depth=3))
        assert np.array_equal(predict_labels(m, t), t.y())


class TestMLP:
    def test_scores_in_open_interval(self):
        t = make_table([1, 0] * 10, [1, 0, 0, 1] * 5)
        m = fit("mlp", t, config=LearnerConfig(epochs=50, seed=3))
        s = predict_scores(m, t)
        assert np.all(s > 0.0) and np.all(s < 1.0)

    def test_seeded_determinism(self):
        t = make_table([1, 0] * 10, [1, 0, 0, 1] * 5)
        m1 = fit("mlp", t, config=LearnerConfig(epochs=40, seed=9))
        m2 = fit("mlp", t, config=LearnerConfig(epochs=40, seed=9))
        assert np.array_equal(m1.params, m2.params)

    def test_fits_separable(self):
        t = separable_table()
        m = fit("mlp", t, config=LearnerConfig(epochs=3000, lr=0.5, seed=0))
        assert np.array_equal(predict_labels(m, t), t.y())


class TestGradients:
    """Analytic gradients vs central finite differences (rel err < 1e-4)."""

    @staticmethod
    def _check(value_grad, params, rel_tol=1e-4):
        loss0, grad = value_grad(params)
        eps = 1e-6
        num = np.empty_like(params)
        for i in range(len(params)):
            up = params.copy()
            up[i] += eps
            down = params.copy()
            down[i] -= eps
            num[i] = (value_grad(up)[0] - value_grad(down)[0]) / (2 * eps)
        denom = max(np.linalg.norm(num), 1e-12)
        assert np.linalg.norm(grad - num) / denom < rel_tol

    def test_logistic_gradient(self, rng):
        for _ in range(50):
            n, d = int(rng.integers(5, 20)), int(rng.integers(1, 5))
            X = rng.normal(size=(n, d))
            y = rng.integers(0, 2, n).astype(float)
            w = rng.uniform(0.1, 2.0, n)
            theta = rng.normal(size=d + 1)
            self._check(lambda p: logit_mod.value_and_grad(p, X, y, w, 1e-4), theta)

    def test_mlp_gradient(self, rng):
        for _ in range(50):
            n, d, h = int(rng.integers(5, 15)), int(rng.integers(1, 4)), int(rng.integers(2, 6))
            X = rng.normal(size=(n, d))
            y = rng.integers(0, 2, n).astype(float)
            w = rng.uniform(0.1, 2.0, n)
            params = mlp_mod.init_params(d, h, rng)
            self._check(lambda p: mlp_mod.value_and_grad(p, X, y, w, h, 1e-4), params)


class TestSerialization:
    @pytest.mark.parametrize("kind", ["logistic", "tree", "forest", "mlp"])
    def test_round_trip(self, kind):
        t = make_table([1, 0] * 15, [1, 0, 0, 1, 1, 0] * 5)
        cfg = LearnerConfig(n_trees=5, epochs=30, seed=2)
        m = fit(kind, t, config=cfg)
        doc = learners.model_to_dict(m)
        again = learners.model_from_dict(doc)
        assert np.array_equal(predict_scores(m, t), predict_scores(again, t))
