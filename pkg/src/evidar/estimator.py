"""scikit-learn compatible wrapper around the evidential classifier."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.exceptions import NotFittedError
from sklearn.utils.validation import check_array, check_X_y

from .detector import DEFAULT_TAU, DEFAULT_TIE_EPSILON, decide, evidence_for
from .dst import Frame
from .features import CompositeMode, fit_arrays


class EvidentialRadarClassifier(ClassifierMixin, BaseEstimator):
    """Dempster-Shafer evidential classifier with Gaussian feature likelihoods.

    Each feature column gets a class-conditional Gaussian per class in y;
    predictions combine per-feature mass functions with Dempster's rule and
    take the argmax-belief class. Ambiguous evidence yields the composite
    class (all labels joined), so predict() can return one more distinct
    value than y contained.

    Parameters
    ----------
    feature_names : column names used for the fitted model, in X order.
        Defaults to "f0", "f1", ... when None.
    composite_mode : "sum_of_singletons" or "fitted_composite".
    tau : composite mass above which the prediction is the composite class.
    tie_epsilon : belief gap under which the top two classes count as tied.
    """

    def __init__(
        self,
        feature_names=None,
        composite_mode="sum_of_singletons",
        tau=DEFAULT_TAU,
        tie_epsilon=DEFAULT_TIE_EPSILON,
    ):
        self.feature_names = feature_names
        self.composite_mode = composite_mode
        self.tau = tau
        self.tie_epsilon = tie_epsilon

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=np.float64)
        y = np.asarray([str(label) for label in y])
        self.classes_ = np.unique(y)
        if self.feature_names is not None:
            names = tuple(self.feature_names)
            if len(names) != X.shape[1]:
                raise ValueError(
                    f"feature_names has {len(names)} entries but X has {X.shape[1]} columns"
                )
        else:
            names = tuple(f"f{i}" for i in range(X.shape[1]))
        self.frame_ = Frame(self.classes_)
        self.model_ = fit_arrays(
            X, y, names, self.frame_, CompositeMode(self.composite_mode)
        )
        self.n_features_in_ = X.shape[1]
        self.mass_set_names_ = tuple(
            self.frame_.set_name(b) for b in self.frame_.focal_sets()
        )
        return self

    def _check_fitted(self):
        if not hasattr(self, "model_"):
            raise NotFittedError("call fit before predicting")

    def _evidence(self, X):
        self._check_fitted()
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        feats = self.model_.features
        for row in X:
            values = dict(zip(feats, row))
            yield evidence_for(self.model_, feats, values.__getitem__)

    def predict(self, X):
        """Decided class name per row (singleton label or composite name)."""
        decisions = []
        for _, combined, _, _ in self._evidence(X):
            bits = decide(combined, tau=self.tau, tie_epsilon=self.tie_epsilon)
            decisions.append(self.frame_.set_name(bits))
        return np.asarray(decisions, dtype=object)

    def predict_mass(self, X):
        """Combined mass per row over all non-empty focal sets.

        Columns follow ascending focal-set bit order; see mass_set_names_.
        """
        rows = [
            [combined[b] for b in self.frame_.focal_sets()]
            for _, combined, _, _ in self._evidence(X)
        ]
        return np.asarray(rows, dtype=np.float64)

    def predict_interval(self, X):
        """(belief, plausibility) per row and singleton class, shape (n, k, 2)."""
        out = []
        for _, combined, _, _ in self._evidence(X):
            out.append(
                [
                    [combined.belief(s), combined.plausibility(s)]
                    for s in self.frame_.singletons()
                ]
            )
        return np.asarray(out, dtype=np.float64)

    def score(self, X, y):
        """Accuracy over rows that got a singleton decision."""
        y = np.asarray([str(label) for label in y])
        predicted = self.predict(X)
        singleton = np.isin(predicted.astype(str), self.classes_)
        if not singleton.any():
            return 0.0
        return float(np.mean(predicted[singleton].astype(str) == y[singleton]))
