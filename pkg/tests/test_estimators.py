import numpy as np
import pytest
from sklearn.base import clone

from qpower.estimators import NoisyPowerMethod, QuantumNoisyPowerMethod, TopEigenspace
from qpower.spectral import eigendecompose, gen_hard_instance


@pytest.fixture
def diag_matrix():
    return np.diag([0.9, 0.4, 0.2, 0.1, 0.05, 0.0])


class TestNoisyPowerMethod:
    def test_fit_recovers_top_direction(self, diag_matrix):
        est = NoisyPowerMethod(gamma=0.5, eps=0.05, random_state=0).fit(diag_matrix)
        assert abs(est.component_[0]) >= 1 - 0.05**2 / 2
        assert est.eigenvalue_ == pytest.approx(0.9, abs=0.01)

    def test_get_set_params_round_trip(self):
        est = NoisyPowerMethod(gamma=0.7, eps=0.2)
        params = est.get_params()
        assert params["gamma"] == 0.7
        est.set_params(eps=0.3)
        assert est.eps == 0.3

    def test_clone(self):
        est = NoisyPowerMethod(gamma=0.7, eps=0.2, random_state=3)
        c = clone(est)
        assert c.get_params() == est.get_params()

    def test_transform_projects(self, diag_matrix):
        est = NoisyPowerMethod(gamma=0.5, eps=0.05, random_state=0).fit(diag_matrix)
        X = np.eye(6)
        proj = est.transform(X)
        assert proj.shape == (6,)

    def test_rejects_non_hermitian(self):
        with pytest.raises(ValueError):
            NoisyPowerMethod().fit(np.array([[0.0, 1.0], [0.5, 0.0]]))

    def test_deterministic_given_seed(self, diag_matrix):
        a = NoisyPowerMethod(gamma=0.5, random_state=5).fit(diag_matrix).component_
        b = NoisyPowerMethod(gamma=0.5, random_state=5).fit(diag_matrix).component_
        assert np.array_equal(a, b)


class TestQuantumNoisyPowerMethod:
    def test_fit_small(self):
        A = np.diag([0.9] + [0.1] * 15)
        est = QuantumNoisyPowerMethod(gamma=0.8, eps=0.15, random_state=1).fit(A)
        assert abs(est.component_[0]) >= 1 - 0.15**2 / 2
        assert est.n_matrix_queries_ > 0
        assert est.ledger_.total("matrix_queries") == est.n_matrix_queries_

    def test_params(self):
        est = QuantumNoisyPowerMethod(gamma=0.5, eps=0.2)
        assert est.get_params()["eps"] == 0.2


class TestTopEigenspace:
    def test_fit_transform_exact_mode(self):
        inst = gen_hard_instance(32, 4)
        dec = eigendecompose(inst.matrix.values)
        est = TopEigenspace(n_components=1, gamma=dec.gap(1), eps=0.1, delta=0.1,
                            method="exact-tomography", random_state=0)
        Z = est.fit_transform(inst.matrix.values)
        assert est.components_.shape == (1, 32)
        assert Z.shape == (32, 1)
        P = est.projector()
        v1 = dec.top_vector()
        assert np.linalg.norm(P - np.outer(v1, v1), 2) <= 0.1

    def test_sampled_mode(self):
        inst = gen_hard_instance(24, 5)
        dec = eigendecompose(inst.matrix.values)
        est = TopEigenspace(n_components=1, gamma=dec.gap(1), eps=0.2, delta=0.1,
                            random_state=2).fit(inst.matrix.values)
        v1 = dec.top_vector()
        assert np.linalg.norm(est.projector() - np.outer(v1, v1), 2) <= 0.2
        assert est.lambda_q_estimate_ == pytest.approx(abs(dec.eigenvalues[0]),
                                                       abs=dec.gap(1) / 100)

    def test_clone_and_params(self):
        est = TopEigenspace(n_components=3, gamma=0.4)
        c = clone(est)
        assert c.get_params()["n_components"] == 3
