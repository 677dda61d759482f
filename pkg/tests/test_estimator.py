import numpy as np
import pytest
from sklearn.base import clone
from sklearn.model_selection import GridSearchCV
from sklearn.pipeline import make_pipeline
from sklearn.preprocessing import StandardScaler

from pplearn import PPLClassifier
from pplearn.datagen import synth_gaussians

FAST = dict(epochs=15, e0=4, e1=10, milestones=(10, 13), batch_size=32)


@pytest.fixture(scope="module")
def xy():
    train, val, _ = synth_gaussians([150, 50, 15], dim=4, class_sep=3.0, seed=0, val_per_class=30)
    return train.features, train.labels, val.features, val.labels


def test_get_params_and_clone():
    clf = PPLClassifier(method="cri+ppw", gamma=2.0, **FAST)
    params = clf.get_params()
    assert params["gamma"] == 2.0 and params["method"] == "cri+ppw"
    twin = clone(clf)
    assert twin.get_params() == params and not hasattr(twin, "params_")


def test_fit_predict_string_labels(xy):
    X, y, Xv, yv = xy
    names = np.array(["cat", "dog", "eel"])
    clf = PPLClassifier(**FAST).fit(X, names[y], validation=(Xv, names[yv]))
    assert list(clf.classes_) == ["cat", "dog", "eel"]
    np.testing.assert_array_equal(clf.class_counts_, [150, 50, 15])
    assert set(clf.predict(Xv)) <= set(names)
    assert clf.score(Xv, names[yv]) > 0.7
    assert len(clf.record_.rows) == 15


def test_predict_proba(xy):
    X, y, Xv, _ = xy
    clf = PPLClassifier(**FAST).fit(X, y)
    proba = clf.predict_proba(Xv)
    np.testing.assert_allclose(proba.sum(axis=1), 1, rtol=1e-12)
    np.testing.assert_array_equal(proba.argmax(1), clf.predict(Xv))


def test_matches_functional_core(xy):
    from pplearn.datagen import Dataset
    from pplearn.trainer import train

    X, y, _, _ = xy
    clf = PPLClassifier(method="ldam+drw", **FAST).fit(X, y)
    params, _ = train(clf._train_config(), Dataset(X, y, 3))
    np.testing.assert_array_equal(clf.params_.layers[0][0], params.layers[0][0])


def test_deterministic(xy):
    X, y, Xv, _ = xy
    a = PPLClassifier(**FAST, random_state=3).fit(X, y).decision_function(Xv)
    b = PPLClassifier(**FAST, random_state=3).fit(X, y).decision_function(Xv)
    np.testing.assert_array_equal(a, b)


def test_grid_search_and_pipeline(xy):
    X, y, _, _ = xy
    pipe = make_pipeline(StandardScaler(), PPLClassifier(**FAST))
    search = GridSearchCV(pipe, {"pplclassifier__loss": ["ce", "cri"]}, cv=2)
    search.fit(X, y)
    assert search.best_params_["pplclassifier__loss"] in ("ce", "cri")


def test_errors(xy):
    X, y, Xv, _ = xy
    with pytest.raises(ValueError):
        PPLClassifier(**FAST).fit(X, np.zeros(len(y)))
    with pytest.raises(ValueError):
        PPLClassifier(**FAST, random_state=None).fit(X, y)
    clf = PPLClassifier(**FAST).fit(X, y)
    with pytest.raises(ValueError, match="features"):
        clf.predict(Xv[:, :2])
    with pytest.raises(ValueError, match="not seen"):
        PPLClassifier(**FAST).fit(X, y, validation=(Xv, np.full(len(Xv), 7)))


def test_unfitted():
    from sklearn.exceptions import NotFittedError

    with pytest.raises(NotFittedError):
        PPLClassifier().predict(np.zeros((1, 2)))
