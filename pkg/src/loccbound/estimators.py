"""scikit-learn style wrappers around the measures and the ensemble analysis.

``PureStateMeasures`` and ``MixedStateMeasures`` are stateless transformers
(``fit`` only validates). ``LOCCBoundAnalyzer.fit`` takes a stack of density
matrices (or state vectors) forming one ensemble and stores the analysis.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .bounds import AnalysisConfig, analyze
from .ensembles import Ensemble
from .exceptions import ValidationError
from .measures import mixed_measures, pure_measures
from .qla import RANK_TOL, BipartiteDims, DensityMatrix, PureState


def check_dims(dims):
    """Validate a ``(dA, dB)`` pair and return it as ``BipartiteDims``."""
    try:
        dA, dB = dims
    except (TypeError, ValueError):
        raise ValidationError(f"dims must be a (dA, dB) pair, got {dims!r}") from None
    return BipartiteDims(int(dA), int(dB))


def check_vectors(X, dims):
    """2-D complex array of shape ``(n_states, dA*dB)``."""
    X = np.asarray(X, dtype=complex)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != dims.D:
        raise ValidationError(f"expected shape (n, {dims.D}), got {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValidationError("input contains NaN or infinity")
    return X


def check_density_stack(X, dims):
    """3-D complex array of shape ``(n_states, D, D)``.

    2-D input is always read as state vectors (one per row), so a single
    density matrix must be passed as a stack of one.
    """
    X = np.asarray(X, dtype=complex)
    if X.ndim == 2:
        X = check_vectors(X, dims)
        X = X / np.linalg.norm(X, axis=1, keepdims=True)
        X = np.einsum("ni,nj->nij", X, X.conj())
    if X.ndim != 3 or X.shape[1:] != (dims.D, dims.D):
        raise ValidationError(f"expected shape (n, {dims.D}, {dims.D}), got {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValidationError("input contains NaN or infinity")
    return X


class PureStateMeasures(TransformerMixin, BaseEstimator):
    """Map state vectors to ``[R, E_R, G]`` columns."""

    def __init__(self, dims=(2, 2), normalize=True):
        self.dims = dims
        self.normalize = normalize

    def fit(self, X, y=None):
        self.dims_ = check_dims(self.dims)
        check_vectors(X, self.dims_)
        self.n_features_in_ = self.dims_.D
        return self

    def transform(self, X):
        check_is_fitted(self, "dims_")
        X = check_vectors(X, self.dims_)
        out = np.empty((len(X), 3))
        for i, v in enumerate(X):
            m = pure_measures(PureState.from_vector(v, self.dims_, normalize=self.normalize))
            out[i] = m.robustness, m.rel_entropy, m.geometric
        return out

    def get_feature_names_out(self, input_features=None):
        return np.array(["R", "E_R", "G"], dtype=object)


class MixedStateMeasures(TransformerMixin, BaseEstimator):
    """Map density matrices to ``[S, R_g, alpha, calR]`` columns (R_g over the PPT cone)."""

    def __init__(self, dims=(2, 2), method="sdp", rank_tol=RANK_TOL):
        self.dims = dims
        self.method = method
        self.rank_tol = rank_tol

    def fit(self, X, y=None):
        self.dims_ = check_dims(self.dims)
        check_density_stack(X, self.dims_)
        return self

    def transform(self, X):
        check_is_fitted(self, "dims_")
        X = check_density_stack(X, self.dims_)
        out = np.empty((len(X), 4))
        for i, m in enumerate(X):
            mm = mixed_measures(DensityMatrix(self.dims_, m), method=self.method, rank_tol=self.rank_tol)
            out[i] = mm.vn_entropy, mm.global_robustness_lb, mm.alpha, mm.calR
        return out

    def get_feature_names_out(self, input_features=None):
        return np.array(["S", "R_g", "alpha", "calR"], dtype=object)


class LOCCBoundAnalyzer(BaseEstimator):
    """Run every bound and the PPT POVM search on one ensemble.

    After ``fit(X)``: ``analysis_``, ``reports_``, ``feasibility_``,
    ``ruled_out_`` and ``verdict_``. ``predict`` returns the ruled-out flag
    as a one-element boolean array.
    """

    def __init__(self, dims=(2, 2), method="sdp", starts=64, seed=0, rank_tol=RANK_TOL, feas_tol=1e-7,
                 bisect_tol=1e-5, mixed_starts=3, mixed_iters=8):
        self.dims = dims
        self.method = method
        self.starts = starts
        self.seed = seed
        self.rank_tol = rank_tol
        self.feas_tol = feas_tol
        self.bisect_tol = bisect_tol
        self.mixed_starts = mixed_starts
        self.mixed_iters = mixed_iters

    def fit(self, X, y=None, names=None):
        dims = check_dims(self.dims)
        X = check_density_stack(X, dims)
        ensemble = Ensemble(dims, [DensityMatrix(dims, m) for m in X], names)
        cfg = AnalysisConfig(rank_tol=self.rank_tol, feas_tol=self.feas_tol, bisect_tol=self.bisect_tol,
                             starts=self.starts, seed=self.seed, method=self.method,
                             mixed_starts=self.mixed_starts, mixed_iters=self.mixed_iters)
        self.analysis_ = analyze(ensemble, cfg)
        self.reports_ = self.analysis_.reports
        self.feasibility_ = self.analysis_.feasibility
        self.ruled_out_ = self.analysis_.ruled_out
        self.verdict_ = self.analysis_.verdict
        return self

    def predict(self, X=None):
        check_is_fitted(self, "analysis_")
        return np.array([self.ruled_out_])
