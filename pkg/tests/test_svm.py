import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from nm01 import svm
from nm01.svm import SvmDataset


def test_build_instance_example():
    inst = svm.build_svm_instance(SvmDataset([[2.0]], [1.0]))
    np.testing.assert_array_equal(inst.A, [[-2.0, -1.0]])
    np.testing.assert_array_equal(inst.b, [1.0])
    np.testing.assert_array_equal(inst.objective.d, [1.0, 0.01])
    assert (inst.tau, inst.lam) == (5.0, 15.0)


def test_sparse_instance_matches_dense():
    X = np.array([[1.0, 0.0], [0.0, -2.0], [3.0, 1.0]])
    c = np.array([1.0, -1.0, 1.0])
    dense = svm.build_svm_instance(SvmDataset(X, c))
    sparse = svm.build_svm_instance(SvmDataset(sp.csr_matrix(X), c))
    np.testing.assert_array_equal(sparse.A.toarray(), dense.A)


def test_sign_convention():
    np.testing.assert_array_equal(svm.sign([-0.5, 0.0, 2.0]), [-1.0, 1.0, 1.0])


def test_accuracy_examples():
    data = svm.synthetic_outlier(1.0)
    A0 = svm.augment(data.samples)
    assert svm.accuracy(A0, np.array([-2.0, 0.0, 1.0]), data.labels) == 1.0
    assert svm.accuracy(A0, np.zeros(3), data.labels) == 0.5


def test_dataset_validation():
    with pytest.raises(ValueError):
        SvmDataset([[1.0]], [0.0])
    with pytest.raises(ValueError):
        SvmDataset([[1.0], [2.0]], [1.0])


@pytest.mark.parametrize("a", [1.0, 10.0, 100.0])
def test_outlier_is_ignored(a):
    data = svm.synthetic_outlier(a)
    model = svm.train(data)
    assert model.train_accuracy == 1.0
    w1 = model.weights[0]
    assert w1 != 0
    assert -model.bias / w1 == pytest.approx(0.5, abs=0.05)
    assert np.all(np.isfinite(model.x))


def test_separable_gaussian_is_fit():
    data = svm.separable_gaussian(m=200, dim=5, seed=4)
    model = svm.train(data)
    assert model.train_accuracy >= 0.99
    np.testing.assert_array_equal(model.predict(data.samples), svm.sign(model.decision_function(data.samples)))


def test_single_sample():
    model = svm.train(SvmDataset([[0.3, -1.0]], [-1.0]))
    assert model.train_accuracy == 1.0


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_label_flip_negates_weights(seed):
    data = svm.separable_gaussian(m=30, dim=3, seed=seed)
    a = svm.train(data)
    b = svm.train(SvmDataset(data.samples, -data.labels))
    np.testing.assert_allclose(b.x, -a.x, rtol=1e-9, atol=1e-12)
    assert a.train_accuracy == b.train_accuracy
