"""scikit-learn estimator wrappers around the force networks.

The regressors take flat feature matrices so they compose with pipelines,
grid search and cross-validation:

* ``Net1ForceRegressor``: X has 2n columns, the window positions in
  x0,y0,...,x{n-1},y{n-1} order.
* ``Net2ForceRegressor``: five extra columns [edx, edy, dw, nwx, nwy] with
  the goal direction and nearest-wall context at the window's last step.

y is (K, 2), the planar force label in newtons. Fitting is deterministic
given (seed, data, hyperparameters).
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .networks import batch_forward
from .training import TrainConfig, train_arrays


class _ForceNetRegressor(BaseEstimator, RegressorMixin):
    _net_type = None
    _aux_columns = 0

    def __init__(self, learning_rate=0.005, batch_size=128, epochs=300,
                 beta1=0.9, beta2=0.999, eps=1e-8, seed=0,
                 window_len=10, validation_fraction=0.0):
        self.learning_rate = learning_rate
        self.batch_size = batch_size
        self.epochs = epochs
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.seed = seed
        self.window_len = window_len
        self.validation_fraction = validation_fraction

    def _split_columns(self, X):
        n = self.window_len
        expected = 2 * n + self._aux_columns
        if X.shape[1] != expected:
            raise ValueError(
                f"X must have {expected} columns for window_len={n}, got {X.shape[1]}"
            )
        P = X[:, :2 * n].reshape(len(X), n, 2)
        packed = {"P": P}
        if self._aux_columns:
            packed["e"] = X[:, 2 * n:2 * n + 2]
            packed["dw"] = X[:, 2 * n + 2]
            packed["nw"] = X[:, 2 * n + 3:2 * n + 5]
        return packed

    def fit(self, X, y):
        X = check_array(X, dtype=np.float64)
        y = check_array(y, dtype=np.float64)
        if y.shape != (len(X), 2):
            raise ValueError(f"y must have shape (n_samples, 2), got {y.shape}")
        packed = self._split_columns(X)
        packed["Y"] = y

        val_packed = None
        if self.validation_fraction > 0.0:
            rng = np.random.default_rng([self.seed, 2])
            order = rng.permutation(len(X))
            n_val = max(1, int(round(self.validation_fraction * len(X))))
            val_idx, train_idx = order[:n_val], order[n_val:]
            val_packed = {k: v[val_idx] for k, v in packed.items()}
            packed = {k: v[train_idx] for k, v in packed.items()}

        config = TrainConfig(
            learning_rate=self.learning_rate, batch_size=self.batch_size,
            epochs=self.epochs, beta1=self.beta1, beta2=self.beta2,
            eps=self.eps, seed=self.seed,
        )
        self.weights_, self.report_ = train_arrays(
            self._net_type, packed, val_packed, config, n=self.window_len
        )
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "weights_")
        X = check_array(X, dtype=np.float64)
        packed = self._split_columns(X)
        if self._aux_columns:
            out, _ = batch_forward(
                self.weights_, packed["P"],
                e_d=packed["e"], d_w=packed["dw"], n_w=packed["nw"],
            )
        else:
            out, _ = batch_forward(self.weights_, packed["P"])
        return out


class Net1ForceRegressor(_ForceNetRegressor):
    """Open-space force regressor (heading inferred from the window)."""

    _net_type = "net1"
    _aux_columns = 0


class Net2ForceRegressor(_ForceNetRegressor):
    """Walled-environment force regressor (goal direction and wall as inputs)."""

    _net_type = "net2"
    _aux_columns = 5


def samples_to_arrays(samples, net_type: str):
    """Flatten SampleRecords into (X, y) for the estimator API."""
    X_rows = []
    y_rows = []
    for s in samples:
        row = list(s.window.positions.reshape(-1))
        if net_type == "net2":
            row += [s.e_d[0], s.e_d[1], s.d_w, s.n_w[0], s.n_w[1]]
        X_rows.append(row)
        y_rows.append(s.label_force)
    return np.array(X_rows), np.array(y_rows)
