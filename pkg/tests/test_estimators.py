import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import make_pipeline

from conftest import BASILICA, CHEBYSHEV
from realent.estimators import EntropyEstimator, ModuliProjector, RegionClassifier
from realent.qmap import project

X = np.array([[CHEBYSHEV.mu, CHEBYSHEV.t], [BASILICA.mu, BASILICA.t], [0.5, 0.5], [1.0, 3.0]])


def test_entropy_estimator_columns():
    est = EntropyEstimator().fit(X)
    out = est.transform(X)
    assert out.shape == (4, 3)
    assert np.allclose(out[:, 0], [np.log(2), 0.0, 0.0, np.log(2)], atol=2e-3)
    assert np.all(out[:, 2] == 1.0)
    assert np.array_equal(est.predict(X), out[:, 0])


def test_invalid_rows_come_back_failed():
    out = EntropyEstimator().fit_transform(np.array([[1.0, -1.0]]))
    assert np.isnan(out[0, 0])
    assert out[0, 2] == 0.0


def test_projector_matches_functional_core():
    s1, s2 = project(X[:, 0], X[:, 1])
    assert np.allclose(ModuliProjector().fit_transform(X), np.column_stack([s1, s2]))


def test_region_classifier_tokens():
    labels = RegionClassifier().fit(X).predict(X)
    assert labels[2] == "monotone_increasing"
    assert all(isinstance(v, str) for v in labels)


def test_params_and_clone():
    est = EntropyEstimator(method="kneading", tol=1e-3)
    assert est.get_params()["method"] == "kneading"
    c = clone(est)
    assert c.get_params() == est.get_params()
    assert c is not est


def test_must_fit_first():
    with pytest.raises(NotFittedError):
        ModuliProjector().transform(X)


def test_wrong_width_rejected():
    with pytest.raises(ValueError):
        ModuliProjector().fit(np.zeros((3, 3)))


def test_pipeline():
    pipe = make_pipeline(ModuliProjector())
    assert pipe.fit_transform(X).shape == (4, 2)
