"""Pure-state entanglement extremes inside a subspace and product-vector content.

A unit vector in a ``k``-dimensional subspace ``S`` with orthonormal basis
``B`` is ``psi = B @ c`` with ``c`` on the unit sphere of ``C^k``. The
optimizers below run multi-start projected-gradient ascent on that sphere.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import ValidationError
from .measures import geometric_pure, robustness_pure
from .qla import PureState, Subspace

DEFAULT_STARTS = 64
PRODUCT_TOL = 1e-7
DEDUP_OVERLAP = 1 - 1e-8
# near-product vectors (G <= 1e-7) can sit ~1e-2 from the exact product
# vector when the objective is flat there, so independence is judged coarsely
INDEPENDENCE_TOL = 0.05

_MAX_ITER = 2000
_REL_IMPROVEMENT = 1e-10
_DEGENERACY = 1e-12
_ARMIJO = 0.3


@dataclass(frozen=True)
class SubspaceExtremum:
    argmax: PureState
    value: float
    starts: int
    converged: bool
    per_start_values: tuple


@dataclass(frozen=True)
class ProductContent:
    """Product vectors found in a subspace.

    ``method`` is ``"exact"`` or ``"numeric"``; ``infinitely_many`` is only
    ever set by the exact path.
    """

    product_vectors: tuple
    is_product_spanned: bool
    method: str
    converged: bool = True
    infinitely_many: bool = False


def _nuclear_objective(subspace):
    dA, dB = subspace.dims.as_tuple()
    B = subspace.basis

    def f(c):
        m = (B @ c).reshape(dA, dB)
        u, s, vh = np.linalg.svd(m, full_matrices=False)
        total = s.sum()
        grad = 2 * total * (B.conj().T @ (u @ vh).reshape(-1))
        return total**2, grad, s

    return f


def _spectral_objective(subspace):
    dA, dB = subspace.dims.as_tuple()
    B = subspace.basis

    def f(c):
        m = (B @ c).reshape(dA, dB)
        u, s, vh = np.linalg.svd(m, full_matrices=False)
        grad = 2 * s[0] * (B.conj().T @ np.outer(u[:, 0], vh[0]).reshape(-1))
        return s[0] ** 2, grad, s

    return f


def _ascend(objective, c, rng, max_iter=_MAX_ITER, rel_improvement=_REL_IMPROVEMENT):
    """Projected-gradient ascent on the unit sphere with step halving.

    A step is accepted when it gains at least ``_ARMIJO * step * |tangent|^2``;
    otherwise it is halved. Returns ``(value, c, converged)``.
    """
    c = c / np.linalg.norm(c)
    value, grad, s = objective(c)
    step = 0.25
    for _ in range(max_iter):
        if len(s) > 1 and s[0] - s[1] < _DEGENERACY:
            jitter = rng.standard_normal(c.shape) + 1j * rng.standard_normal(c.shape)
            c_pert = c + _DEGENERACY * jitter
            c_pert /= np.linalg.norm(c_pert)
            _, grad, _ = objective(c_pert)
        tangent = grad - np.real(np.vdot(c, grad)) * c
        slope = np.real(np.vdot(tangent, tangent))
        if slope < 1e-28:
            return value, c, True
        while step > 1e-16:
            trial = c + step * tangent
            trial /= np.linalg.norm(trial)
            t_value, t_grad, t_s = objective(trial)
            if t_value >= value + _ARMIJO * step * slope:
                break
            step /= 2
        else:
            return value, c, True
        gain = t_value - value
        c, value, grad, s = trial, t_value, t_grad, t_s
        if gain < rel_improvement * max(abs(value), 1.0):
            return value, c, True
        step *= 1.5
    return value, c, False


def _random_coefficients(rng, k, avoid=None):
    c = rng.standard_normal(k) + 1j * rng.standard_normal(k)
    if avoid is not None and avoid.shape[1]:
        q, _ = np.linalg.qr(avoid)
        residual = c - q @ (q.conj().T @ c)
        if np.linalg.norm(residual) > 1e-8 * np.linalg.norm(c):
            c = residual
    return c / np.linalg.norm(c)


def _multistart(subspace, objective, starts, seed, avoid=None):
    """Run ``starts`` ascents; returns a list of ``(value, coefficients, converged)`` in start order."""
    if subspace.dim == 0:
        raise ValidationError("subspace has dimension 0")
    if subspace.dim == 1:
        c = np.ones(1, dtype=complex)
        return [(objective(c)[0], c, True)]
    rng = np.random.default_rng(seed)
    runs = []
    for _ in range(starts):
        c0 = _random_coefficients(rng, subspace.dim, avoid)
        runs.append(_ascend(objective, c0, rng))
    return runs


def _best(runs):
    best = 0
    for i, run in enumerate(runs):
        if run[0] > runs[best][0]:
            best = i
    return best


def _as_state(subspace, c):
    return PureState.from_vector(subspace.basis @ c, subspace.dims)


def max_robustness_in_subspace(subspace, starts=DEFAULT_STARTS, seed=0):
    """Largest pure-state robustness found in ``subspace`` (a lower bound on the true maximum)."""
    runs = _multistart(subspace, _nuclear_objective(subspace), starts, seed)
    best = _best(runs)
    argmax = _as_state(subspace, runs[best][1])
    return SubspaceExtremum(
        argmax=argmax,
        value=robustness_pure(argmax),
        starts=len(runs),
        converged=bool(runs[best][2]),
        per_start_values=tuple(float(max(v - 1.0, 0.0)) for v, _, _ in runs),
    )


def min_geometric_in_subspace(subspace, starts=DEFAULT_STARTS, seed=0):
    """Smallest geometric measure found in ``subspace``; ~0 iff it holds a product vector."""
    runs = _multistart(subspace, _spectral_objective(subspace), starts, seed)
    best = _best(runs)
    argmin = _as_state(subspace, runs[best][1])
    return SubspaceExtremum(
        argmax=argmin,
        value=geometric_pure(argmin),
        starts=len(runs),
        converged=bool(runs[best][2]),
        per_start_values=tuple(float(max(-np.log2(v), 0.0)) for v, _, _ in runs),
    )


def _dedupe(vectors):
    kept = []
    for v in vectors:
        if all(abs(np.vdot(k, v)) <= DEDUP_OVERLAP for k in kept):
            kept.append(v)
    return kept


def _independent(vectors):
    """Greedy Gram-Schmidt selection of linearly independent vectors."""
    chosen, ortho = [], []
    for v in vectors:
        r = v.copy()
        for q in ortho:
            r = r - np.vdot(q, r) * q
        norm = np.linalg.norm(r)
        if norm > INDEPENDENCE_TOL:
            chosen.append(v)
            ortho.append(r / norm)
    return chosen


def _content(subspace, vectors, method, converged=True, infinitely_many=False):
    vectors = _dedupe([v / np.linalg.norm(v) for v in vectors])
    states = tuple(PureState.from_vector(v, subspace.dims) for v in vectors)
    spanned = len(_independent(vectors)) >= subspace.dim
    return ProductContent(states, spanned, method, converged, infinitely_many)


def _cluster(vectors):
    """Keep one representative per group of vectors within angle ``INDEPENDENCE_TOL``."""
    reps = []
    for v in vectors:
        if all(1 - abs(np.vdot(r, v)) ** 2 > INDEPENDENCE_TOL**2 for r in reps):
            reps.append(v)
    return reps


def product_vectors_2x2(subspace, tol=1e-12):
    """Exact product vectors of a 2-dimensional subspace of C^2 (x) C^2.

    ``x b1 + y b2`` is product iff ``det M(x b1 + y b2) = c x^2 + b xy + a y^2``
    vanishes, so the product directions are the projective roots of that
    binary quadratic.
    """
    if subspace.dims.as_tuple() != (2, 2) or subspace.dim != 2:
        raise ValidationError("product_vectors_2x2 needs a 2-dimensional subspace of a 2x2 system")
    b1, b2 = subspace.basis[:, 0], subspace.basis[:, 1]
    m1, m2 = b1.reshape(2, 2), b2.reshape(2, 2)
    a = np.linalg.det(m2)
    c = np.linalg.det(m1)
    b = m1[0, 0] * m2[1, 1] + m1[1, 1] * m2[0, 0] - m1[0, 1] * m2[1, 0] - m1[1, 0] * m2[0, 1]
    if max(abs(a), abs(c)) < tol:
        if abs(b) < tol:
            return _content(subspace, [b1, b2], "exact", infinitely_many=True)
        return _content(subspace, [b1, b2], "exact")
    if abs(a) >= abs(c):
        vectors = [b1 + t * b2 for t in np.roots([a, b, c])]
    else:
        vectors = [u * b1 + b2 for u in np.roots([c, b, a])]
    return _content(subspace, vectors, "exact")


def is_product_spanned(subspace, starts=DEFAULT_STARTS, seed=0, exact=True):
    """Whether ``subspace`` has a basis of product vectors.

    Two-dimensional subspaces of a 2x2 system use the exact quadratic test
    unless ``exact=False``. Otherwise near-product vectors (geometric measure
    below 1e-7) are collected from multi-start runs; each further round draws
    its starts orthogonally to the vectors found so far.
    """
    if subspace.dim == 0:
        raise ValidationError("subspace has dimension 0")
    if exact and subspace.dims.as_tuple() == (2, 2) and subspace.dim == 2:
        return product_vectors_2x2(subspace)
    objective = _spectral_objective(subspace)
    threshold = 2.0 ** (-PRODUCT_TOL)
    found, coeffs = [], []
    converged = True
    for rnd in range(subspace.dim):
        avoid = np.column_stack(coeffs) if coeffs else None
        runs = _multistart(subspace, objective, starts, seed + rnd, avoid)
        converged = converged and all(r[2] for r in runs)
        for value, c, _ in runs:
            if value >= threshold:
                found.append((-value, len(found), c))
        reps = _cluster([subspace.basis @ c for _, _, c in sorted(found, key=lambda f: f[:2])])
        coeffs = [subspace.basis.conj().T @ r for r in reps]
        if subspace.dim == 1 or len(_independent(reps)) >= subspace.dim:
            break
    return _content(subspace, reps, "numeric", converged=converged)
