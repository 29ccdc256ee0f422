import numpy as np
import pytest
from sklearn.base import clone
from sklearn.pipeline import Pipeline

from hopse import HopseClassifier, HopseEncoder, HopseRegressor
from hopse.exceptions import ShapeError
from hopse.pipeline import make_synth_2cell
from hopse.validation import check_bundles, check_targets


@pytest.fixture(scope="module")
def data():
    graphs, labels = make_synth_2cell(24, seed=1)
    return graphs, labels


def test_pipeline_composition(data):
    graphs, labels = data
    pipe = Pipeline(
        [
            ("enc", HopseEncoder(lifting="cycle", neighborhoods="Inc-1", pse="rwse:K=8")),
            ("clf", HopseClassifier(hidden=8, epochs=150, seed=0)),
        ]
    )
    pipe.fit(graphs, labels)
    assert pipe.score(graphs, labels) == 1.0
    proba = pipe.predict_proba(graphs)
    np.testing.assert_allclose(proba.sum(axis=1), 1.0)


def test_string_labels(data):
    graphs, labels = data
    bundles = HopseEncoder(lifting="cycle", pse="rwse:K=8").fit_transform(graphs)
    names = np.array(["tree", "cyclic"])[labels]
    clf = HopseClassifier(hidden=8, epochs=150).fit(bundles, names)
    assert set(clf.classes_) == {"tree", "cyclic"}
    assert (clf.predict(bundles) == names).mean() == 1.0


def test_params_and_clone():
    clf = HopseClassifier(hidden=4, lr=0.05)
    assert clf.get_params() == {"hidden": 4, "n_layers": 2, "epochs": 200, "lr": 0.05, "seed": 0}
    twin = clone(clf).set_params(seed=3)
    assert twin.seed == 3 and clf.seed == 0
    pipe = Pipeline([("enc", HopseEncoder()), ("clf", clf)])
    assert pipe.get_params()["enc__pse"] == "rwse:K=16"


def test_regressor(data):
    graphs, labels = data
    bundles = HopseEncoder(lifting="cycle", pse="rwse:K=8").fit_transform(graphs)
    y = labels * 2.0 - 0.5
    reg = HopseRegressor(hidden=8, epochs=300).fit(bundles, y)
    assert reg.predict(bundles).shape == (len(y),)
    assert reg.score(bundles, y) > 0.9
    multi = HopseRegressor(hidden=4, epochs=2).fit(bundles, np.c_[y, -y])
    assert multi.predict(bundles).shape == (len(y), 2)


def test_deterministic_fit(data):
    graphs, labels = data
    bundles = HopseEncoder(lifting="cycle", pse="rwse:K=8").fit_transform(graphs)
    a = HopseClassifier(hidden=6, epochs=20, seed=4).fit(bundles, labels)
    b = HopseClassifier(hidden=6, epochs=20, seed=4).fit(bundles, labels)
    assert a.loss_curve_ == b.loss_curve_
    np.testing.assert_array_equal(a.model_.get_flat(), b.model_.get_flat())


def test_unfitted_raises(data):
    from sklearn.exceptions import NotFittedError

    with pytest.raises(NotFittedError):
        HopseClassifier().predict([])


def test_validation_helpers(data):
    graphs, labels = data
    bundles = HopseEncoder(lifting="cycle", pse="rwse:K=8").fit_transform(graphs[:2])
    other = HopseEncoder(lifting="cycle", pse="rwse:K=4").fit_transform(graphs[:1])
    with pytest.raises(ShapeError):
        check_bundles(bundles + other)
    with pytest.raises(ValueError):
        check_bundles([])
    with pytest.raises(ShapeError):
        check_targets([0, 1, 1], 2, "classification")
    with pytest.raises(ShapeError):
        check_targets([np.nan, 1.0], 2, "regression")
