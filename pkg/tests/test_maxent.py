import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from rebalance.exceptions import TrainingError, ValidationError
from rebalance.features import SparseVector
from rebalance.maxent import (MaxEntClassifier, MaxEntModel, TrainConfig, loss_and_grad, predict,
                              predict_many, predict_proba, predict_proba_many, softmax, train)


def central_differences(W, b, X, y, l2, eps=1e-5):
    gW, gb = np.zeros_like(W), np.zeros_like(b)
    for arr, out in ((W, gW), (b, gb)):
        for idx in np.ndindex(arr.shape):
            old = arr[idx]
            arr[idx] = old + eps
            up = loss_and_grad(W, b, X, y, l2)[0]
            arr[idx] = old - eps
            down = loss_and_grad(W, b, X, y, l2)[0]
            arr[idx] = old
            out[idx] = (up - down) / (2 * eps)
    return gW, gb


def rel_err(a, n):
    return float(np.max(np.abs(a - n) / np.maximum(np.maximum(np.abs(a), np.abs(n)), 1e-8)))


def random_instance(rng, n=5, v=4, k=3):
    X = rng.normal(size=(n, v))
    y = rng.integers(k, size=n)
    return rng.normal(size=(k, v)), rng.normal(size=k), X, y


@pytest.mark.parametrize("seed", range(5))
def test_gradient_matches_finite_differences(seed):
    rng = np.random.default_rng(seed)
    W, b, X, y = random_instance(rng)
    _, gW, gb = loss_and_grad(W, b, X, y, 1e-2)
    nW, nb = central_differences(W, b, X, y, 1e-2)
    assert max(rel_err(gW, nW), rel_err(gb, nb)) <= 1e-4


def test_gradient_on_sparse_input():
    rng = np.random.default_rng(9)
    W, b, X, y = random_instance(rng)
    dense = loss_and_grad(W, b, X, y, 0.1)
    sparse = loss_and_grad(W, b, sp.csr_matrix(X), y, 0.1)
    assert dense[0] == pytest.approx(sparse[0], abs=1e-12)
    assert np.allclose(dense[1], sparse[1], atol=1e-12)


def test_bias_not_regularized():
    rng = np.random.default_rng(1)
    W, b, X, y = random_instance(rng)
    _, gW0, gb0 = loss_and_grad(W, b, X, y, 0.0)
    _, gW1, gb1 = loss_and_grad(W, b, X, y, 0.5)
    assert np.allclose(gb0, gb1)
    assert np.allclose(gW1 - gW0, 0.5 * W)


def test_separable_one_hot():
    X = np.eye(2)
    m = train(X, ["A", "B"], TrainConfig(max_epochs=200))
    assert predict_many(m, X) == ["A", "B"]


def test_zero_model_uniform():
    m = MaxEntModel(np.zeros((3, 4)), np.zeros(3), ("a", "b", "c"))
    assert np.allclose(predict_proba(m, np.ones(4)), 1 / 3)
    assert np.allclose(predict_proba(m, SparseVector((), (), 4)), 1 / 3)


def test_empty_vector_gives_softmax_of_bias():
    m = MaxEntModel(np.ones((2, 3)), np.array([0.0, 1.0]), ("a", "b"))
    assert np.allclose(predict_proba(m, SparseVector((), (), 3)), softmax(np.array([0.0, 1.0])))


def test_tie_breaks_to_lowest_index():
    m = MaxEntModel(np.zeros((2, 1)), np.zeros(2), ("a", "b"))
    assert predict(m, np.ones(1)) == "a"
    m = MaxEntModel(np.zeros((3, 1)), np.log([0.2, 0.5, 0.3]), ("a", "b", "c"))
    assert predict(m, np.ones(1)) == "b"


@given(st.lists(st.floats(-50, 50), min_size=2, max_size=6), st.floats(-1e3, 1e3))
def test_softmax_sum_and_shift(logits, c):
    z = np.array(logits)
    p = softmax(z)
    assert abs(p.sum() - 1) <= 1e-9
    assert np.all(p > 0) and np.all(p <= 1)
    assert np.allclose(softmax(z + c), p, atol=1e-12)


def test_softmax_no_overflow():
    p = softmax(np.array([1000.0, 0.0, -1000.0]))
    assert np.isfinite(p).all() and p[0] == pytest.approx(1.0)


@settings(max_examples=50)
@given(st.integers(0, 10_000), st.floats(0.01, 100))
def test_scaling_preserves_unique_argmax(seed, lam):
    rng = np.random.default_rng(seed)
    W, b = rng.normal(size=(4, 5)), rng.normal(size=4)
    x = rng.normal(size=5)
    logits = W @ x + b
    if np.sort(logits)[-1] - np.sort(logits)[-2] < 1e-9:
        return
    labels = tuple("abcd")
    assert predict(MaxEntModel(W, b, labels), x) == predict(MaxEntModel(lam * W, lam * b, labels), x)


def test_loss_non_increasing_with_halving():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(40, 6))
    y = rng.integers(3, size=40)
    m = train(X, y, TrainConfig(learning_rate=50.0, max_epochs=60, tol=1e-12))
    hist = m.metadata["loss_history"]
    assert all(b <= a for a, b in zip(hist, hist[1:]))
    assert m.metadata["halvings"] > 0
    assert m.metadata["final_learning_rate"] < 50.0


def test_stops_on_tol():
    m = train(np.eye(2), ["A", "B"], TrainConfig(max_epochs=100000, tol=1e-3))
    assert m.metadata["stop_reason"] == "tol"
    assert m.metadata["epochs_run"] < 100000


def test_matches_sklearn_optimum():
    from sklearn.linear_model import LogisticRegression

    rng = np.random.default_rng(4)
    X = rng.normal(size=(60, 3))
    y = rng.integers(3, size=60)
    l2 = 0.05
    m = train(X, y, TrainConfig(learning_rate=1.0, l2=l2, max_epochs=20000, tol=1e-15))
    ref = LogisticRegression(C=1 / (l2 * len(y)), tol=1e-12, max_iter=10000).fit(X, y)
    assert np.allclose(m.weights, ref.coef_, atol=1e-4)
    # sklearn centres the intercepts to sum zero; so does gradient descent from zero
    assert np.allclose(m.bias, ref.intercept_, atol=1e-4)


def test_single_class_rejected():
    with pytest.raises(TrainingError):
        train(np.eye(2), ["A", "A"])


def test_shape_mismatch():
    with pytest.raises(ValidationError):
        train(np.eye(2), ["A"])
    m = train(np.eye(2), ["A", "B"])
    with pytest.raises(ValidationError):
        predict_proba(m, np.ones(3))
    with pytest.raises(ValidationError):
        predict_proba_many(m, np.ones((1, 3)))


def test_nonfinite_features_rejected():
    with pytest.raises(TrainingError):
        train(np.array([[np.nan], [1.0]]), ["A", "B"])


def test_model_validation():
    with pytest.raises(ValidationError):
        MaxEntModel(np.zeros((1, 2)), np.zeros(1), ("a",))
    with pytest.raises(ValidationError):
        MaxEntModel(np.full((2, 2), np.inf), np.zeros(2), ("a", "b"))


def test_serialization_bit_exact(tmp_path):
    rng = np.random.default_rng(2)
    X = rng.normal(size=(30, 5))
    y = rng.choice(["x", "y", "z"], size=30)
    m = train(X, y, TrainConfig(max_epochs=50))
    p = tmp_path / "m.json"
    m.save(p)
    back = MaxEntModel.load(p)
    assert back.digest() == m.digest()
    assert np.array_equal(predict_proba_many(back, X), predict_proba_many(m, X))


def test_dev_set_keeps_best_epoch():
    rng = np.random.default_rng(3)
    X, Xd = rng.normal(size=(30, 20)), rng.normal(size=(30, 20))
    y, yd = rng.integers(2, size=30), rng.integers(2, size=30)
    m = train(X, y, TrainConfig(l2=0.0, max_epochs=300, tol=1e-12), eval_set=(Xd, yd))
    assert 0 <= m.metadata["best_epoch"] <= m.metadata["epochs_run"]


def test_training_is_deterministic():
    rng = np.random.default_rng(5)
    X = sp.random(50, 30, density=0.2, random_state=5, format="csr")
    y = rng.integers(3, size=50)
    assert train(X, y).digest() == train(X, y).digest()


def test_classifier_estimator():
    from sklearn.base import clone

    X = np.array([[1.0, 0], [0, 1.0], [1.0, 0.1], [0.1, 1.0]])
    y = np.array(["A", "B", "A", "B"])
    clf = MaxEntClassifier(learning_rate=1.0).fit(X, y)
    assert list(clf.classes_) == ["A", "B"]
    assert clf.score(X, y) == 1.0
    assert clf.predict_proba(X).shape == (4, 2)
    assert clone(clf).get_params() == clf.get_params()
    assert clf.loss_history_[-1] <= clf.loss_history_[0]
