"""PPT-relaxed convex programs behind the robustness, d-estimate and POVM checks.

Two backends are provided for each program:

* ``"sdp"``: a direct semidefinite program solved by cvxpy/Clarabel.
* ``"projection"``: bisection over a scalar with an inner alternating
  projection (or cyclic Dykstra) feasibility search. Dependency-light but
  slower and only accurate to roughly the bisection/feasibility thresholds.
"""

import warnings

import cvxpy as cp
import numpy as np
from scipy.optimize import brentq

from .exceptions import SolverError
from .qla import partial_transpose

METHODS = ("sdp", "projection")

BISECT_TOL = 1e-5
PROJ_MAX_ITER = 5000
PROJ_THRESHOLD = 1e-8
POVM_THRESHOLD = 1e-7
POVM_MAX_SWEEPS = 20000
PLATEAU_WINDOW = 500
PLATEAU_REL = 1e-12

_CLARABEL_OPTS = {"tol_gap_abs": 1e-10, "tol_gap_rel": 1e-10, "tol_feas": 1e-10}


def check_method(method):
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}, got {method!r}")


def _solve(problem):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        try:
            problem.solve(solver=cp.CLARABEL, **_CLARABEL_OPTS)
        except cp.error.SolverError as exc:
            raise SolverError(f"conic solver failed: {exc}") from exc
    if problem.status not in (cp.OPTIMAL, cp.OPTIMAL_INACCURATE):
        raise SolverError(f"conic solver returned status {problem.status!r}")
    return problem.value


def _herm(m):
    return (m + m.conj().T) / 2


def project_psd(m):
    w, v = np.linalg.eigh(_herm(m))
    return (v * np.clip(w, 0.0, None)) @ v.conj().T


def project_ppt(m, dims):
    return partial_transpose(project_psd(partial_transpose(m, dims)), dims)


def min_eig(m):
    return float(np.linalg.eigvalsh(_herm(m))[0])


def project_capped_spectrum(m, total, upper=1.0):
    """Frobenius projection of a Hermitian matrix onto ``{0 <= Y <= upper*I, Tr Y = total}``."""
    w, v = np.linalg.eigh(_herm(m))
    n = len(w)
    total = min(max(total, 0.0), upper * n)

    def excess(mu):
        return np.clip(w - mu, 0.0, upper).sum() - total

    lo, hi = w.min() - upper - 1.0, w.max() + 1.0
    if total <= 0:
        mu = hi
    elif total >= upper * n:
        mu = lo
    else:
        mu = brentq(excess, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    return (v * np.clip(w - mu, 0.0, upper)) @ v.conj().T


# -- global robustness ------------------------------------------------------


def robustness_sdp(sigma, dims):
    """min Tr(X) - 1 subject to X >= sigma and X^{T_B} >= 0."""
    if min_eig(partial_transpose(sigma, dims)) >= -1e-12:
        return 0.0
    D = dims.D
    X = cp.Variable((D, D), hermitian=True)
    cons = [X - sigma >> 0, cp.partial_transpose(X, dims.as_tuple(), 1) >> 0]
    value = _solve(cp.Problem(cp.Minimize(cp.real(cp.trace(X))), cons))
    return max(float(value) - 1.0, 0.0)


def _robustness_feasible(sigma, dims, t, start, max_iter, threshold):
    """Alternating projections onto {X >= sigma}, {Tr X = 1+t}, {X PPT}."""
    D = dims.D
    X = start.copy()
    eye = np.eye(D)
    best = np.inf
    window_start = np.inf
    for it in range(1, max_iter + 1):
        X = sigma + project_psd(X - sigma)
        X = X + ((1 + t) - np.trace(X).real) / D * eye
        X = project_ppt(X, dims)
        residual = max(-min_eig(X - sigma), abs(np.trace(X).real - (1 + t)), 0.0)
        if residual < threshold:
            return True, X, residual
        best = min(best, residual)
        if it % PLATEAU_WINDOW == 0:
            if window_start < np.inf and (window_start - best) <= PLATEAU_REL * window_start:
                break
            window_start = best
    return False, X, best


def robustness_projection(sigma, dims, tol=BISECT_TOL, max_iter=PROJ_MAX_ITER, threshold=PROJ_THRESHOLD):
    """Bisection on t over [0, D] with alternating-projection feasibility."""
    if min_eig(partial_transpose(sigma, dims)) >= -threshold:
        return 0.0
    lo, hi = 0.0, float(dims.D)
    ok, X_hi, _ = _robustness_feasible(sigma, dims, hi, sigma * (1 + hi), max_iter, threshold)
    if not ok:
        raise SolverError("robustness feasibility failed at the upper bracket end", bracket=(lo, hi))
    while hi - lo > tol:
        mid = (lo + hi) / 2
        ok, X, _ = _robustness_feasible(sigma, dims, mid, X_hi, max_iter, threshold)
        if ok:
            hi, X_hi = mid, X
        else:
            lo = mid
    return hi


# -- trace-ratio quantity d ---------------------------------------------------


def _complement_basis(projector):
    w, v = np.linalg.eigh(_herm(projector))
    return v[:, w < 0.5]


def d_sdp(projector, dims):
    """min Tr(P + X) with X supported off P, 0 <= X <= I there, and P + X PPT."""
    rank = int(round(np.trace(projector).real))
    V = _complement_basis(projector)
    k = V.shape[1]
    if k == 0 or min_eig(partial_transpose(projector, dims)) >= -1e-12:
        return float(rank) if k else float(dims.D)
    Y = cp.Variable((k, k), hermitian=True)
    pi = projector + V @ Y @ V.conj().T
    cons = [Y >> 0, np.eye(k) - Y >> 0, cp.partial_transpose(pi, dims.as_tuple(), 1) >> 0]
    value = _solve(cp.Problem(cp.Minimize(cp.real(cp.trace(Y))), cons))
    return rank + max(float(value), 0.0)


def _d_feasible(projector, V, dims, lam, start, max_iter, threshold):
    """Alternating projections for the normalized element lam*P + (1 - lam|P|) rho'."""
    rank = np.trace(projector).real
    free = 1.0 / lam - rank
    Pi = start.copy()
    best = np.inf
    window_start = np.inf
    for it in range(1, max_iter + 1):
        Y = project_capped_spectrum(V.conj().T @ Pi @ V, free)
        Pi = projector + V @ Y @ V.conj().T
        Pi = project_ppt(Pi, dims)
        Y = V.conj().T @ Pi @ V
        w = np.linalg.eigvalsh(_herm(Y))
        residual = max(
            np.max(np.abs(projector @ Pi @ projector - projector)),
            np.max(np.abs(projector @ Pi @ V)),
            -w[0],
            w[-1] - 1.0,
            abs(w.sum() - free),
        )
        if residual < threshold:
            return True, Pi, residual
        best = min(best, residual)
        if it % PLATEAU_WINDOW == 0:
            if window_start < np.inf and (window_start - best) <= PLATEAU_REL * window_start:
                break
            window_start = best
    return False, Pi, best


def d_projection(projector, dims, tol=BISECT_TOL, max_iter=PROJ_MAX_ITER, threshold=PROJ_THRESHOLD):
    """Bisection on lam in [1/D, 1/|P|]; returns 1/lam at the smallest feasible bracket end."""
    rank = int(round(np.trace(projector).real))
    V = _complement_basis(projector)
    if V.shape[1] == 0:
        return float(dims.D)
    if min_eig(partial_transpose(projector, dims)) >= -threshold:
        return float(rank)
    # feasibility is monotone decreasing in lam; lam = 1/D (Pi = I) is always feasible
    lo, hi = 1.0 / dims.D, 1.0 / rank
    best_pi = np.eye(dims.D)
    while hi - lo > tol:
        mid = (lo + hi) / 2
        ok, Pi, _ = _d_feasible(projector, V, dims, mid, best_pi, max_iter, threshold)
        if ok:
            lo, best_pi = mid, Pi
        else:
            hi = mid
    return 1.0 / lo


# -- PPT POVM feasibility -----------------------------------------------------


def povm_residual(povm, sigmas, dims):
    """Max violation over PSD, PPT, completeness and Tr(Pi_i sigma_j) = delta_ij."""
    D = dims.D
    viol = [np.max(np.abs(sum(povm) - np.eye(D)))]
    for i, pi in enumerate(povm):
        viol.append(-min_eig(pi))
        viol.append(-min_eig(partial_transpose(pi, dims)))
        for j, s in enumerate(sigmas):
            viol.append(abs(np.real(np.vdot(s, pi)) - (1.0 if i == j else 0.0)))
    return max(max(viol), 0.0)


def povm_sdp(sigmas, dims, threshold=POVM_THRESHOLD):
    """min s such that Pi_i + sI >= 0, Pi_i^{T_B} + sI >= 0, sum Pi_i = I, Tr(Pi_i sigma_j) = 0 (i != j)."""
    D, N = dims.D, len(sigmas)
    pis = [cp.Variable((D, D), hermitian=True) for _ in range(N)]
    s = cp.Variable()
    eye = np.eye(D)
    cons = [sum(pis) == eye]
    for i, pi in enumerate(pis):
        cons.append(pi + s * eye >> 0)
        cons.append(cp.partial_transpose(pi, dims.as_tuple(), 1) + s * eye >> 0)
        for j, sig in enumerate(sigmas):
            if i != j:
                cons.append(cp.real(cp.trace(sig @ pi)) == 0)
    slack = _solve(cp.Problem(cp.Minimize(s), cons))
    povm = [_herm(pi.value) for pi in pis]
    residual = max(float(slack), povm_residual(povm, sigmas, dims))
    return residual < threshold, residual, 1, povm


def povm_dykstra(sigmas, dims, threshold=POVM_THRESHOLD, max_sweeps=POVM_MAX_SWEEPS):
    """Cyclic Dykstra over (PSD, PPT, completeness, orthogonality)."""
    D, N = dims.D, len(sigmas)
    eye = np.eye(D)
    norms = [np.real(np.vdot(s, s)) for s in sigmas]

    def p_psd(x):
        return np.array([project_psd(m) for m in x])

    def p_ppt(x):
        return np.array([project_ppt(m, dims) for m in x])

    def p_complete(x):
        return x - (x.sum(axis=0) - eye) / N

    def p_orth(x):
        out = x.copy()
        for i in range(N):
            for j in range(N):
                if i != j:
                    out[i] -= np.real(np.vdot(sigmas[j], x[i])) / norms[j] * sigmas[j]
        return out

    projections = (p_psd, p_ppt, p_complete, p_orth)
    x = np.array([eye / N for _ in range(N)], dtype=complex)
    increments = [np.zeros_like(x) for _ in projections]
    best = np.inf
    window_start = np.inf
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        for k, proj in enumerate(projections):
            y = proj(x + increments[k])
            increments[k] = x + increments[k] - y
            x = y
        residual = povm_residual(list(x), sigmas, dims)
        if residual < threshold:
            return True, residual, sweeps, [_herm(m) for m in x]
        best = min(best, residual)
        if sweeps % PLATEAU_WINDOW == 0:
            if window_start < np.inf and (window_start - best) <= PLATEAU_REL * window_start:
                break
            window_start = best
    return False, best, sweeps, [_herm(m) for m in x]
