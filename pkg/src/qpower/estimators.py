"""Scikit-learn style estimator interfaces over the solver layer.

These wrap the functional algorithms with `fit`/`transform`/`get_params`
semantics so they compose with pipelines and model-selection utilities; the
underlying functions remain directly callable for scripted experiments.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from ._validation import as_rng, check_hermitian
from .ledger import QueryLedger
from .solvers import NPMConfig, npm_classical, qnpm, qnpm_auto_gamma, top_q_pipeline

__all__ = ["NoisyPowerMethod", "QuantumNoisyPowerMethod", "TopEigenspace"]


class NoisyPowerMethod(BaseEstimator):
    """Top-eigenvector estimation by (noisy) power iteration.

    Parameters
    ----------
    gamma : float, eigenvalue-magnitude gap the schedule is tuned for.
    eps : float in (0, 0.5), target l2 accuracy of the output direction.
    n_iterations : int or None, overrides the derived schedule.
    noise : None or callable (k, w, rng) -> vector, additive error per step.
    random_state : seed or Generator.
    """

    def __init__(self, gamma=1.0, eps=0.1, n_iterations=None, noise=None, random_state=None):
        self.gamma = gamma
        self.eps = eps
        self.n_iterations = n_iterations
        self.noise = noise
        self.random_state = random_state

    def fit(self, X, y=None):
        M = check_hermitian(X, name="X")
        rng = as_rng(self.random_state)
        cfg = NPMConfig(gamma=self.gamma, eps=self.eps, K=self.n_iterations)
        res = npm_classical(M, cfg, self.noise, rng)
        self.component_ = res.w
        self.n_iter_ = res.n_iterations
        self.eigenvalue_ = float(res.w @ (M @ res.w))
        return self

    def transform(self, X):
        X = np.asarray(X)
        return X @ self.component_

    def fit_transform(self, X, y=None):
        return self.fit(X).transform(X)


class QuantumNoisyPowerMethod(BaseEstimator):
    """Top-eigenvector estimation through the simulated quantum power method.

    Fitting runs the row-wise inner-product estimator with sub-Gaussian phase
    estimation errors; `ledger_` holds the charged quantum query costs and
    `n_matrix_queries_` their matrix-query total.  With gamma=None the gap is
    unknown and exponentially decreasing guesses are tried, each verified by
    one matrix-vector residual.
    """

    def __init__(self, gamma=1.0, eps=0.1, lambda1=1.0, random_state=None):
        self.gamma = gamma
        self.eps = eps
        self.lambda1 = lambda1
        self.random_state = random_state

    def fit(self, X, y=None):
        M = check_hermitian(X, name="X")
        rng = as_rng(self.random_state)
        ledger = QueryLedger()
        if self.gamma is None:
            res = qnpm_auto_gamma(M, self.eps, rng, ledger=ledger, lambda1=self.lambda1)
            self.gamma_used_ = res.gamma_used
        else:
            res = qnpm(M, self.gamma, self.eps, rng, ledger=ledger, lambda1=self.lambda1)
        self.component_ = res.w
        self.n_iter_ = res.K
        self.ledger_ = ledger
        self.n_matrix_queries_ = ledger.total("matrix_queries")
        self.eigenvalue_ = float(res.w @ (M @ res.w))
        return self

    def transform(self, X):
        X = np.asarray(X)
        return X @ self.component_

    def fit_transform(self, X, y=None):
        return self.fit(X).transform(X)


class TopEigenspace(TransformerMixin, BaseEstimator):
    """Orthonormal basis of the top-q eigenspace via process tomography.

    After `fit(A)`, `components_` holds the recovered isometry as rows
    (q, d); `transform(X)` projects row vectors onto those coordinates.
    `method="exact-tomography"` injects error-free tomography, isolating the
    pipeline from sampling noise.
    """

    def __init__(self, n_components=1, gamma=1.0, eps=0.1, delta=0.1,
                 method="sampled", random_state=None):
        self.n_components = n_components
        self.gamma = gamma
        self.eps = eps
        self.delta = delta
        self.method = method
        self.random_state = random_state

    def fit(self, X, y=None):
        M = check_hermitian(X, name="X")
        rng = as_rng(self.random_state)
        ledger = QueryLedger()
        mode = "exact" if self.method == "exact-tomography" else "sampled"
        res = top_q_pipeline(M, self.n_components, self.gamma, self.eps, self.delta,
                             rng, ledger=ledger, tomography_mode=mode)
        if res.aborted or res.W is None:
            raise RuntimeError("subspace recovery aborted; rerun with a new random_state")
        self.components_ = res.W.conj().T
        self.lambda_q_estimate_ = res.lambda_q_estimate
        self.singular_values_ = res.singular_values
        self.ledger_ = ledger
        return self

    def transform(self, X):
        X = np.asarray(X)
        return X @ self.components_.conj().T

    def projector(self):
        W = self.components_.conj().T
        return W @ W.conj().T
