"""Entanglement and mixedness measures.

Pure states use closed forms over the squared Schmidt coefficients ``lam``:

* robustness ``R = (sum sqrt(lam))**2 - 1``
* relative entropy of entanglement ``E_R = -sum lam log2 lam``
* geometric measure ``G = -log2 max(lam)``

Mixed states get the von Neumann entropy and a PPT-relaxed global
robustness, which lower-bounds the separable one.
"""

from dataclasses import dataclass

import numpy as np

from . import _convex
from .exceptions import ValidationError
from .qla import RANK_TOL, DensityMatrix, PureState, support_projector


@dataclass(frozen=True)
class PureMeasures:
    robustness: float
    rel_entropy: float
    geometric: float


@dataclass(frozen=True)
class MixedMeasures:
    """``calR = (1 + global_robustness_lb) / alpha`` with ``alpha`` the top eigenvalue."""

    vn_entropy: float
    global_robustness_lb: float
    alpha: float
    calR: float
    robustness_method: str


def _shannon_bits(p):
    p = np.asarray(p, dtype=float)
    p = p[p > 0]
    return float(max(-np.sum(p * np.log2(p)), 0.0)) + 0.0  # no negative zero


def vn_entropy(sigma):
    """Von Neumann entropy in bits."""
    return _shannon_bits(np.clip(sigma.eig[0], 0.0, None))


def _schmidt(psi):
    if not isinstance(psi, PureState):
        raise ValidationError("expected a PureState")
    return psi.schmidt.coefficients


def robustness_pure(psi):
    # (sum sqrt(lam))^2 - 1 expanded over pairs, which avoids the cancellation
    lam = _schmidt(psi)
    pairs = np.sqrt(np.outer(lam, lam))
    return float(np.sum(np.triu(pairs, 1)) * 2.0)


def rel_entropy_pure(psi):
    return _shannon_bits(_schmidt(psi))


def geometric_pure(psi):
    return float(max(-np.log2(_schmidt(psi)[0]), 0.0)) + 0.0


def pure_measures(psi):
    return PureMeasures(robustness_pure(psi), rel_entropy_pure(psi), geometric_pure(psi))


def global_robustness_ppt(sigma, tol=_convex.BISECT_TOL, method="sdp", max_iter=_convex.PROJ_MAX_ITER,
                          threshold=_convex.PROJ_THRESHOLD):
    """Smallest ``t`` such that ``(sigma + t*rho)/(1 + t)`` is PPT for some state ``rho``.

    ``method="sdp"`` solves the program directly; ``method="projection"``
    bisects on ``t`` over ``[0, D]`` (to ``tol``) with an alternating-projection
    feasibility test capped at ``max_iter`` iterations. Either way the result
    is a lower bound on the global robustness over separable states.

    Raises ``SolverError`` (carrying the bracket for bisection) on failure.
    """
    _convex.check_method(method)
    if not isinstance(sigma, DensityMatrix):
        raise ValidationError("expected a DensityMatrix")
    if method == "sdp":
        return _convex.robustness_sdp(np.array(sigma.mat), sigma.dims)
    return _convex.robustness_projection(np.array(sigma.mat), sigma.dims, tol=tol, max_iter=max_iter,
                                         threshold=threshold)


def mixed_measures(sigma, method="sdp", tol=_convex.BISECT_TOL, rank_tol=RANK_TOL):
    """Entropy, PPT global robustness and ``calR`` of a density matrix.

    Rank-one inputs take the pure-state closed form, which is the exact
    global robustness (and coincides with its PPT relaxation).
    """
    psi = sigma.as_pure(rank_tol)
    if psi is not None:
        rg, how = robustness_pure(psi), "closed-form"
    else:
        rg, how = global_robustness_ppt(sigma, tol=tol, method=method), f"ppt-{method}"
    alpha = sigma.max_eigenvalue
    return MixedMeasures(
        vn_entropy=vn_entropy(sigma),
        global_robustness_lb=rg,
        alpha=alpha,
        calR=(1.0 + rg) / alpha,
        robustness_method=how,
    )


def support_robustness_ratio(sigma, method="sdp", tol=_convex.BISECT_TOL, rank_tol=RANK_TOL):
    """``rank * (1 + R_g)`` of the normalized projector onto the support of ``sigma``."""
    support = support_projector(sigma, rank_tol)
    rho = support.normalized_projector()
    return support.dim * (1.0 + mixed_measures(rho, method=method, tol=tol, rank_tol=rank_tol).global_robustness_lb)
