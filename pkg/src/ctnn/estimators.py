"""scikit-learn compatible wrappers.

Time series enter as 2-D arrays whose first column is time in seconds and
whose remaining columns are input channels sampled at those times, i.e. the
same layout as the ``t,x1,...,xn`` CSV files.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from . import synthesis
from .core import Network, check_network, evaluate
from .periodicity import scan_periods
from .signal import Signal
from .training import Dataset, TrainConfig, train


def check_time_matrix(X, y=None, min_channels: int = 0):
    """Validate a time-major matrix; returns rows sorted by time (and y alongside).

    Raises:
        ValueError: too few columns or repeated time stamps.
    """
    if y is None:
        X = check_array(X, ensure_min_features=1 + min_channels)
    else:
        X, y = check_X_y(X, y, ensure_min_features=1 + min_channels, y_numeric=True)
    order = np.argsort(X[:, 0], kind="stable")
    X = X[order]
    if X.shape[0] > 1 and np.any(np.diff(X[:, 0]) <= 0):
        raise ValueError("time column (column 0) contains repeated values")
    if y is None:
        return X
    return X, np.asarray(y, dtype=float)[order]


def _signals(X, out_of_range):
    return [Signal(X[:, 0], X[:, j], out_of_range=out_of_range) for j in range(1, X.shape[1])]


class CTNNRegressor(RegressorMixin, BaseEstimator):
    """Fit a CTNN's parameters to an output time series by gradient descent.

    Parameters
    ----------
    network : Network
        Initial network; its input count must equal ``X.shape[1] - 1``.
    eta, max_iters, fd_step, param_mask, tol, quad_step
        Forwarded to :class:`~ctnn.training.TrainConfig`.
    out_of_range : str
        Policy for input signals queried outside the sampled span.

    Attributes
    ----------
    network_ : Network
        Trained network.
    trace_ : list of float
        Error before training and after every update.
    """

    def __init__(self, network: Network = None, eta=0.01, max_iters=100, fd_step=1e-6,
                 param_mask=("w",), tol=0.0, quad_step=0.01, out_of_range="zero"):
        self.network = network
        self.eta = eta
        self.max_iters = max_iters
        self.fd_step = fd_step
        self.param_mask = param_mask
        self.tol = tol
        self.quad_step = quad_step
        self.out_of_range = out_of_range

    def _check_inputs(self, X, n_inputs):
        if X.shape[1] - 1 != n_inputs:
            raise ValueError(f"X has {X.shape[1] - 1} input channels, network expects {n_inputs}")

    def fit(self, X, y):
        if self.network is None:
            raise ValueError("CTNNRegressor needs an initial network")
        check_network(self.network)
        X, y = check_time_matrix(X, y)
        self._check_inputs(X, len(self.network.inputs))
        data = Dataset(_signals(X, self.out_of_range), Signal(X[:, 0], y))
        cfg = TrainConfig(eta=self.eta, max_iters=self.max_iters, fd_step=self.fd_step,
                          param_mask=tuple(self.param_mask), tol=self.tol, quad_step=self.quad_step)
        self.network_, self.trace_ = train(self.network, data, cfg)
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "network_")
        X = check_array(X, ensure_min_features=1)
        order = np.argsort(X[:, 0], kind="stable")
        Xs = check_time_matrix(X)
        self._check_inputs(Xs, len(self.network_.inputs))
        y = evaluate(self.network_, _signals(Xs, self.out_of_range), Xs[:, 0], self.quad_step)
        out = np.empty_like(y)
        out[order] = y
        return out


class PeriodDetector(BaseEstimator):
    """Find period lengths of a signal by scanning comb-filter energy.

    ``fit`` takes ``X`` with columns ``(t, value)``.

    Attributes
    ----------
    scan_ : PeriodScan
    minima_ : list of (T, E)
        Refined local minima, lowest energy first.
    period_ : float
        Period with the lowest energy, or nan if no interior minimum exists.
    """

    def __init__(self, t_min=1.0, t_max=14.0, step=0.01, window=50.0, quad_step=None):
        self.t_min = t_min
        self.t_max = t_max
        self.step = step
        self.window = window
        self.quad_step = quad_step

    def fit(self, X, y=None):
        X = check_time_matrix(X, min_channels=1)
        if X.shape[1] != 2:
            raise ValueError(f"expected columns (t, value), got {X.shape[1]} columns")
        x = Signal(X[:, 0], X[:, 1])
        self.scan_ = scan_periods(x, self.t_min, self.t_max, self.step, self.window, self.quad_step)
        self.minima_ = list(self.scan_.minima)
        self.period_ = self.minima_[0][0] if self.minima_ else float("nan")
        self.n_features_in_ = 2
        return self

    def transform(self, X):
        """Energy curve as an ``(n_candidates, 2)`` array of ``(T, E)``."""
        check_is_fitted(self, "scan_")
        return np.column_stack([self.scan_.T, self.scan_.E])


class FourierGateClassifier(ClassifierMixin, BaseEstimator):
    """One sinusoidal unit ``c*sin(a*sum(x) + b)`` used as a Boolean classifier.

    ``gate`` selects a preset (``"AND"``, ``"XOR"``, ``"XOR_CORRECTED"``,
    ``"ODD"``); explicit ``a``, ``b``, ``c`` override it.  Inputs and labels
    use +1 for true and -1 for false.  Nothing is learned; ``fit`` only checks
    shapes.
    """

    def __init__(self, gate="AND", arity=None, a=None, b=None, c=None):
        self.gate = gate
        self.arity = arity
        self.a = a
        self.b = b
        self.c = c

    def _resolve(self, n_features):
        presets = {"AND": synthesis.AND, "XOR": synthesis.XOR_AS_PRINTED,
                   "XOR_CORRECTED": synthesis.XOR_CORRECTED}
        if self.gate == "ODD":
            base = synthesis.odd_gate(self.arity or n_features)
        elif self.gate in presets:
            base = presets[self.gate]
        else:
            raise ValueError(f"unknown gate {self.gate!r}")
        return synthesis.FourierLogicGate(
            base.name, base.arity,
            base.a if self.a is None else float(self.a),
            base.b if self.b is None else float(self.b),
            base.c if self.c is None else float(self.c),
        )

    def fit(self, X, y=None):
        X = check_array(X)
        self.gate_ = self._resolve(X.shape[1])
        if X.shape[1] != self.gate_.arity:
            raise ValueError(f"{self.gate_.name} takes {self.gate_.arity} inputs, X has {X.shape[1]}")
        self.classes_ = np.array([-1, 1])
        self.n_features_in_ = X.shape[1]
        return self

    def decision_function(self, X):
        check_is_fitted(self, "gate_")
        X = check_array(X)
        return np.array([synthesis.eval_fourier_gate(self.gate_, list(row)) for row in X])

    def predict(self, X):
        return np.where(self.decision_function(X) > 0, 1, -1)
