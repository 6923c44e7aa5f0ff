"""scikit-learn style wrapper around the pseudolikelihood estimator.

>>> from isinginfer import IsingMPLE, curie_weiss
>>> est = IsingMPLE(coupling=curie_weiss(50)).fit(spins)      # doctest: +SKIP
>>> est.beta_, est.status_                                    # doctest: +SKIP
"""

from __future__ import annotations

import numpy as np
from scipy.special import expit, log_expit
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .errors import NotApplicableError
from .gibbs import ChainConfig, EXACT_MAX_N, exact_sample, glauber_sample
from .mple import mple_from_fields
from .validation import check_coupling, check_spins


class IsingMPLE(TransformerMixin, BaseEstimator):
    """Maximum pseudolikelihood fit of the inverse temperature for a known coupling.

    Parameters
    ----------
    coupling : CouplingMatrix or array_like
        Symmetric coupling matrix with zero diagonal.

    Attributes
    ----------
    beta_ : float
        Estimated inverse temperature (``0``, ``inf`` or ``nan`` for the
        non-interior statuses).
    status_ : str
        ``interior``, ``boundary_zero``, ``infinite`` or ``degenerate``.
    result_ : MpleResult
    n_features_in_ : int
        Number of spins.

    Notes
    -----
    ``fit`` accepts one configuration ``(n_spins,)`` or several
    ``(n_samples, n_spins)``; with several, the pooled pseudolikelihood
    (mean score over all rows) is maximized.  ``transform`` returns local
    fields.
    """

    def __init__(self, coupling=None):
        self.coupling = coupling

    def _J(self):
        if self.coupling is None:
            raise ValueError("IsingMPLE needs a coupling matrix")
        return check_coupling(self.coupling)

    def _spins(self, X, cmat):
        X = check_spins(X, cmat.n, allow_2d=True)
        return X[None, :] if X.ndim == 1 else X

    def fit(self, X, y=None):
        cmat = self._J()
        X = self._spins(X, cmat)
        local = cmat.matvec(X.astype(float))
        self.result_ = mple_from_fields(local, X)
        self.beta_ = self.result_.beta_hat
        self.status_ = self.result_.status
        self.n_features_in_ = cmat.n
        return self

    def transform(self, X):
        """Local fields ``m = J sigma`` for each row."""
        check_is_fitted(self, "result_")
        cmat = self._J()
        return cmat.matvec(self._spins(X, cmat).astype(float))

    def _finite_beta(self):
        check_is_fitted(self, "result_")
        if not np.isfinite(self.beta_):
            raise NotApplicableError(f"fitted model has status {self.status_!r}, beta={self.beta_}")
        return self.beta_

    def predict_proba(self, X):
        """``P(sigma_i = +1 | rest)`` for every site of every row."""
        beta = self._finite_beta()
        return expit(2.0 * beta * self.transform(X))

    def predict(self, X):
        """Most probable value of each spin given the others (ties go to +1)."""
        return np.where(self.predict_proba(X) >= 0.5, 1, -1).astype(np.int8)

    def score(self, X, y=None):
        """Mean log pseudolikelihood per site at the fitted ``beta_``."""
        beta = self._finite_beta()
        cmat = self._J()
        S = self._spins(X, cmat)
        local = cmat.matvec(S.astype(float))
        return float(np.mean(log_expit(2.0 * beta * S * local)))

    def sample(self, n_samples=1, random_state=None, burn_in_sweeps=None, thin_sweeps=5):
        """Draw configurations at the fitted ``beta_`` (exact for <= 20 spins)."""
        beta = self._finite_beta()
        cmat = self._J()
        if cmat.n <= EXACT_MAX_N:
            return exact_sample(cmat, beta, n_samples, seed=random_state)
        cfg = ChainConfig(burn_in_sweeps, thin_sweeps, seed=random_state)
        return glauber_sample(cmat, beta, n_samples, cfg)
