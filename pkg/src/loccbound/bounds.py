"""Upper bounds on the number of perfectly LOCC-distinguishable orthogonal states.

Every bound has the form ``N <= D / avg(x_i)`` for a chain of per-state
quantities ``x`` ordered from strongest to weakest. Bounds built from PPT
relaxations or numerical maxima are upper estimates of the exact bounds;
each report says which relaxations were used. A violated bound rules out
perfect discrimination by LOCC, a satisfied one proves nothing.

Report identifiers (``inequality_id``):

* ``pure``: pure states, chain ``1+R``, ``2^E_R``, ``2^G``.
* ``support-max``: the pure chain for the most robust pure state in each support.
* ``candidate``: a full-rank candidate state per support, chain ``d``,
  ``(1+R_g)/alpha``, ``2^(E_R+S)``, ``2^G``.
* ``optimized-mixed``: the candidate chain maximized (heuristically) over
  full-rank states on each support.
* ``general-partial``: chain ``d``, ``rank*(1+R_g)`` of the support projector,
  ``2^(E_R+S)``, ``2^G`` for the states themselves.
"""

from dataclasses import dataclass, field

import numpy as np

from . import _convex
from .ensembles import Ensemble
from .exceptions import ValidationError
from .measures import mixed_measures, pure_measures, support_robustness_ratio, vn_entropy
from .qla import RANK_TOL, DensityMatrix, PureState, hermitian_eig, support_projector
from .subspaces import DEFAULT_STARTS, is_product_spanned, max_robustness_in_subspace

SATISFIED = "SATISFIED"
VIOLATED = "VIOLATED"
RULED_OUT = "RULED OUT"
NOT_RULED_OUT = "NOT RULED OUT"

VERDICT_SLACK = 1e-9
SUPPORT_MATCH_TOL = 1e-7
MIN_SUPPORT_EIGENVALUE = 1e-9

NOTE_PPT = (
    "d and the global robustness are computed over the PPT cone, which contains the separable cone; "
    "they lower-bound the separable quantities, so the bound values are upper estimates of the exact "
    "bounds and remain valid necessary conditions."
)
NOTE_OPTIMIZER = (
    "The maximal pure-state robustness in each support comes from multi-start ascent and lower-bounds "
    "the true maximum, so the bound values are upper estimates of the exact bounds."
)
NOTE_HEURISTIC = (
    "The maximum of (1+R_g)/alpha over full-rank states on each support is the best value found by a "
    "heuristic search; it lower-bounds the true maximum, giving a weaker but valid bound."
)
NOTE_PURE_R = (
    "Pure-state robustness uses the closed form (sum_k sqrt(lambda_k))^2 - 1, which is the global "
    "robustness of a pure state; the standard robustness may differ."
)
NOTE_NOT_EVALUATED = (
    "Entropy and geometric terms are evaluated only for rank-one states; other entries are not evaluated "
    "and the verdict uses the evaluated entries only."
)
NOTE_NECESSARY = "A satisfied bound does not imply that the states are locally distinguishable."
NOTE_FEASIBILITY = (
    "Separable POVMs are relaxed to PPT POVMs. A feasible result is necessary, not sufficient, for LOCC "
    "discrimination; an infeasible result is a numerical signal (residual stall or positive slack), "
    "not a certificate."
)


@dataclass(frozen=True)
class BoundReport:
    inequality_id: str
    n: int
    d: int
    per_state: tuple
    bound_labels: tuple
    bound_values: tuple
    verdict: str
    direction_notes: tuple
    relaxations: dict = field(default_factory=dict)

    @property
    def evaluated_bounds(self):
        return [v for v in self.bound_values if v is not None]

    @property
    def min_bound(self):
        return min(self.evaluated_bounds)

    @property
    def violated(self):
        return self.verdict == VIOLATED

    def to_dict(self):
        return {
            "inequalityId": self.inequality_id,
            "N": self.n,
            "D": self.d,
            "perStateQuantities": [dict(row) for row in self.per_state],
            "boundLabels": list(self.bound_labels),
            "boundValues": list(self.bound_values),
            "verdict": self.verdict,
            "directionNotes": list(self.direction_notes),
            "relaxations": dict(self.relaxations),
        }


@dataclass(frozen=True)
class FeasibilityReport:
    feasible: bool
    residual: float
    iterations: int
    povm: tuple = None
    method: str = "sdp"
    threshold: float = _convex.POVM_THRESHOLD
    note: str = NOTE_FEASIBILITY

    def to_dict(self, include_povm=False):
        out = {
            "feasible": self.feasible,
            "residual": self.residual,
            "iterations": self.iterations,
            "method": self.method,
            "threshold": self.threshold,
            "certified": False,
            "note": self.note,
        }
        if include_povm and self.povm is not None:
            out["povm"] = [[[[float(z.real), float(z.imag)] for z in row] for row in p] for p in self.povm]
        return out


def _verdict(n, values):
    evaluated = [v for v in values if v is not None]
    return VIOLATED if n > min(evaluated) + VERDICT_SLACK else SATISFIED


def _chain_value(D, column):
    if any(v is None for v in column):
        return None
    return float(D / np.mean(column))


def _report(inequality_id, D, per_state, labels, columns, notes, relaxations):
    values = tuple(_chain_value(D, col) for col in columns)
    n = len(per_state)
    return BoundReport(
        inequality_id=inequality_id,
        n=n,
        d=D,
        per_state=tuple(per_state),
        bound_labels=tuple(labels),
        bound_values=values,
        verdict=_verdict(n, values),
        direction_notes=tuple(notes),
        relaxations=relaxations,
    )


# -- convex relaxations -------------------------------------------------------


def ppt_povm_feasibility(ensemble, method="sdp", threshold=_convex.POVM_THRESHOLD,
                         max_sweeps=_convex.POVM_MAX_SWEEPS):
    """Search for a PPT POVM with ``Tr(Pi_i sigma_j) = delta_ij``.

    ``method="projection"`` runs cyclic Dykstra over (PSD, PPT, completeness,
    orthogonality) for at most ``max_sweeps`` sweeps; ``method="sdp"``
    minimizes a common eigenvalue slack. Feasible iff the residual drops
    below ``threshold``.
    """
    _convex.check_method(method)
    sigmas = [np.array(s.mat) for s in ensemble.states]
    if method == "sdp":
        feasible, residual, iters, povm = _convex.povm_sdp(sigmas, ensemble.dims, threshold)
    else:
        feasible, residual, iters, povm = _convex.povm_dykstra(sigmas, ensemble.dims, threshold, max_sweeps)
    return FeasibilityReport(
        feasible=bool(feasible),
        residual=float(residual),
        iterations=int(iters),
        povm=tuple(povm) if feasible else None,
        method=method,
        threshold=threshold,
    )


def d_ppt_estimate(sigma, tol=_convex.BISECT_TOL, method="sdp", rank_tol=RANK_TOL):
    """PPT relaxation of ``d(sigma) = min Tr(Pi) / Tr(sigma Pi)`` over ``0 <= Pi / Tr(sigma Pi) <= I``.

    Only the support of ``sigma`` matters. The result lower-bounds the value
    over separable ``Pi``.
    """
    _convex.check_method(method)
    projector = np.array(support_projector(sigma, rank_tol).projector)
    if method == "sdp":
        return _convex.d_sdp(projector, sigma.dims)
    return _convex.d_projection(projector, sigma.dims, tol=tol)


# -- bound chains -------------------------------------------------------------


def _pure_rows(states, names):
    rows, cols = [], ([], [], [])
    for name, psi in zip(names, states):
        m = pure_measures(psi)
        rows.append({"name": name, "R": m.robustness, "E_R": m.rel_entropy, "G": m.geometric})
        cols[0].append(1.0 + m.robustness)
        cols[1].append(2.0**m.rel_entropy)
        cols[2].append(2.0**m.geometric)
    return rows, cols


_PURE_LABELS = ("D/avg(1+R)", "D/avg(2^E_R)", "D/avg(2^G)")


def _check_pure_orthogonal(states, tol=1e-8):
    for i in range(len(states)):
        for j in range(i + 1, len(states)):
            if abs(np.vdot(states[i].vec, states[j].vec)) ** 2 > tol:
                raise ValidationError(f"pure states {i} and {j} are not orthogonal")


def bound_pure(states, names=None):
    """Pure-state chain ``N <= D/avg(1+R) <= D/avg(2^E_R) <= D/avg(2^G)``."""
    states = list(states)
    if len(states) < 2:
        raise ValidationError("need at least 2 states")
    if not all(isinstance(s, PureState) for s in states):
        raise ValidationError("bound_pure expects PureState inputs")
    _check_pure_orthogonal(states)
    names = names or [f"s{i + 1}" for i in range(len(states))]
    rows, cols = _pure_rows(states, names)
    return _report("pure", states[0].dims.D, rows, _PURE_LABELS, cols, (NOTE_PURE_R, NOTE_NECESSARY),
                   {"ppt_relaxation": False, "optimizer_lower_bound": False, "heuristic_maximum": False,
                    "not_evaluated": []})


def bound_support_max(ensemble, starts=DEFAULT_STARTS, seed=0, rank_tol=RANK_TOL):
    """Pure chain evaluated on the most robust pure state found in each support."""
    maximizers, extra = [], []
    for i, sigma in enumerate(ensemble.states):
        support = support_projector(sigma, rank_tol)
        ext = max_robustness_in_subspace(support, starts=starts, seed=seed + i)
        maximizers.append(ext.argmax)
        extra.append({"supportDim": support.dim, "starts": ext.starts, "converged": ext.converged})
    rows, cols = _pure_rows(maximizers, ensemble.names)
    for row, more in zip(rows, extra):
        row.update(more)
    uses_optimizer = any(e["supportDim"] > 1 for e in extra)
    notes = (NOTE_OPTIMIZER, NOTE_PURE_R, NOTE_NECESSARY) if uses_optimizer else (NOTE_PURE_R, NOTE_NECESSARY)
    return _report("support-max", ensemble.dims.D, rows, _PURE_LABELS, cols, notes,
                   {"ppt_relaxation": False, "optimizer_lower_bound": uses_optimizer, "heuristic_maximum": False,
                    "not_evaluated": []})


_MIXED_LABELS = ("D/avg(d)", "D/avg((1+R_g)/alpha)", "D/avg(2^(E_R+S))", "D/avg(2^G)")


def _mixed_tail(state, rank_tol):
    """``(2^(E_R+S), 2^G)`` for a rank-one state, ``(None, None)`` otherwise."""
    psi = state.as_pure(rank_tol)
    if psi is None:
        return None, None
    m = pure_measures(psi)
    return 2.0 ** (m.rel_entropy + vn_entropy(state)), 2.0**m.geometric


def _d_values(ensemble, d_values, method, bisect_tol, rank_tol):
    if d_values is not None:
        return list(d_values)
    return [d_ppt_estimate(s, tol=bisect_tol, method=method, rank_tol=rank_tol) for s in ensemble.states]


def _mixed_report(inequality_id, ensemble, d_vals, second, tails, rows, notes, relaxations):
    cols = [list(d_vals), list(second), [t[0] for t in tails], [t[1] for t in tails]]
    not_evaluated = [lab for lab, col in zip(_MIXED_LABELS, cols) if any(v is None for v in col)]
    if not_evaluated:
        notes = notes + (NOTE_NOT_EVALUATED,)
    relaxations = dict(relaxations, not_evaluated=not_evaluated)
    return _report(inequality_id, ensemble.dims.D, rows, _MIXED_LABELS, cols, notes + (NOTE_NECESSARY,),
                   relaxations)


def _same_support(a, b, rank_tol):
    pa = support_projector(a, rank_tol).projector
    pb = support_projector(b, rank_tol).projector
    return np.max(np.abs(pa - pb)) <= SUPPORT_MATCH_TOL


def bound_candidates(ensemble, candidates, method="sdp", bisect_tol=_convex.BISECT_TOL, rank_tol=RANK_TOL,
                     d_values=None):
    """Mixed chain with one full-rank candidate state on each support."""
    candidates = list(candidates)
    if len(candidates) != ensemble.N:
        raise ValidationError(f"expected {ensemble.N} candidates, got {len(candidates)}")
    for i, (sigma, cand) in enumerate(zip(ensemble.states, candidates)):
        if not isinstance(cand, DensityMatrix) or cand.dims != ensemble.dims:
            raise ValidationError(f"candidate {i} is not a density matrix on {ensemble.dims.as_tuple()}")
        if not _same_support(sigma, cand, rank_tol):
            raise ValidationError(f"candidate {i} does not have the same support as state {i}")
        support = support_projector(sigma, rank_tol)
        restricted = np.linalg.eigvalsh(support.basis.conj().T @ cand.mat @ support.basis)
        if restricted[0] < MIN_SUPPORT_EIGENVALUE:
            raise ValidationError(f"candidate {i} is not full rank on the support of state {i}")
    d_vals = _d_values(ensemble, d_values, method, bisect_tol, rank_tol)
    rows, second, tails = [], [], []
    for name, cand, d in zip(ensemble.names, candidates, d_vals):
        mm = mixed_measures(cand, method=method, tol=bisect_tol, rank_tol=rank_tol)
        tail = _mixed_tail(cand, rank_tol)
        rows.append({"name": name, "d": d, "alpha": mm.alpha, "R_g": mm.global_robustness_lb, "calR": mm.calR,
                     "S": mm.vn_entropy, "R_gMethod": mm.robustness_method,
                     "2^E": tail[0], "2^G": tail[1]})
        second.append(mm.calR)
        tails.append(tail)
    return _mixed_report("candidate", ensemble, d_vals, second, tails, rows, (NOTE_PPT,),
                         {"ppt_relaxation": True, "optimizer_lower_bound": False, "heuristic_maximum": False})


def _candidate_state(basis, factor, dims):
    """Normalized ``B A A^H B^H`` for a Hermitian factor ``A``; ``None`` if not full rank."""
    a = (factor + factor.conj().T) / 2
    inner = a @ a
    inner = (inner + inner.conj().T) / 2
    inner /= np.trace(inner).real
    if np.linalg.eigvalsh(inner)[0] < MIN_SUPPORT_EIGENVALUE:
        return None
    return DensityMatrix(dims, basis @ inner @ basis.conj().T)


def _sqrt_factor(sigma, basis):
    w, v = hermitian_eig(basis.conj().T @ sigma.mat @ basis)
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T


def maximize_calR(sigma, starts=3, iters=8, seed=0, method="sdp", bisect_tol=_convex.BISECT_TOL, rank_tol=RANK_TOL):
    """Best ``(1+R_g)/alpha`` found over full-rank states on the support of ``sigma``.

    Starts are the normalized support projector, ``sigma`` itself and
    ``starts`` random Hermitian factors; each is refined by a random-direction
    search with step halving for ``iters`` evaluations. Returns
    ``(best_value, best_state, evaluations)``.
    """
    support = support_projector(sigma, rank_tol)
    k, basis, dims = support.dim, np.array(support.basis), sigma.dims
    if k == 1:
        state = support.normalized_projector()
        return mixed_measures(state, method=method, tol=bisect_tol, rank_tol=rank_tol).calR, state, 1
    rng = np.random.default_rng(seed)

    def value(factor):
        state = _candidate_state(basis, factor, dims)
        if state is None:
            return -np.inf, None
        return mixed_measures(state, method=method, tol=bisect_tol, rank_tol=rank_tol).calR, state

    def random_herm():
        z = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
        return (z + z.conj().T) / 2

    start_factors = [np.eye(k, dtype=complex), _sqrt_factor(sigma, basis)]
    start_factors += [np.eye(k) + 0.5 * random_herm() for _ in range(starts)]
    best_val, best_state, evals = -np.inf, None, 0
    for factor in start_factors:
        val, state = value(factor)
        evals += 1
        step = 0.3 * np.linalg.norm(factor)
        for _ in range(iters):
            trial = factor + step * random_herm() / np.sqrt(k)
            t_val, t_state = value(trial)
            evals += 1
            if t_val > val:
                factor, val, state = trial, t_val, t_state
            else:
                step /= 2
        if val > best_val:
            best_val, best_state = val, state
    return float(best_val), best_state, evals


def bound_optimized_mixed(ensemble, starts=3, iters=8, seed=0, method="sdp", bisect_tol=_convex.BISECT_TOL,
                          rank_tol=RANK_TOL, d_values=None):
    """Mixed chain with ``(1+R_g)/alpha`` maximized heuristically over full-rank states on each support."""
    d_vals = _d_values(ensemble, d_values, method, bisect_tol, rank_tol)
    rows, second, tails = [], [], []
    heuristic = False
    for i, (name, sigma, d) in enumerate(zip(ensemble.names, ensemble.states, d_vals)):
        best, state, evals = maximize_calR(sigma, starts=starts, iters=iters, seed=seed + i, method=method,
                                           bisect_tol=bisect_tol, rank_tol=rank_tol)
        heuristic = heuristic or evals > 1
        tail = _mixed_tail(state, rank_tol)
        rows.append({"name": name, "d": d, "calR": best, "alpha": state.max_eigenvalue, "evaluations": evals,
                     "2^E": tail[0], "2^G": tail[1]})
        second.append(best)
        tails.append(tail)
    notes = (NOTE_PPT, NOTE_HEURISTIC) if heuristic else (NOTE_PPT,)
    return _mixed_report("optimized-mixed", ensemble, d_vals, second, tails, rows, notes,
                         {"ppt_relaxation": True, "optimizer_lower_bound": False, "heuristic_maximum": heuristic})


def bound_general_partial(ensemble, method="sdp", bisect_tol=_convex.BISECT_TOL, rank_tol=RANK_TOL, d_values=None):
    """Chain ``d``, ``rank*(1+R_g)`` of the support projector, ``2^(E_R+S)``, ``2^G`` on the states themselves."""
    d_vals = _d_values(ensemble, d_values, method, bisect_tol, rank_tol)
    rows, second, tails = [], [], []
    for name, sigma, d in zip(ensemble.names, ensemble.states, d_vals):
        r = support_robustness_ratio(sigma, method=method, tol=bisect_tol, rank_tol=rank_tol)
        tail = _mixed_tail(sigma, rank_tol)
        rows.append({"name": name, "d": d, "r": r, "S": vn_entropy(sigma), "2^E": tail[0], "2^G": tail[1]})
        second.append(r)
        tails.append(tail)
    labels_note = ("The second link uses rank*(1+R_g) of the normalized support projector.",)
    report = _mixed_report("general-partial", ensemble, d_vals, second, tails, rows, (NOTE_PPT,) + labels_note,
                           {"ppt_relaxation": True, "optimizer_lower_bound": False, "heuristic_maximum": False})
    labels = ("D/avg(d)", "D/avg(rank*(1+R_g))") + _MIXED_LABELS[2:]
    return BoundReport(**{**report.__dict__, "bound_labels": labels})


# -- aggregate analysis -------------------------------------------------------


@dataclass(frozen=True)
class AnalysisConfig:
    rank_tol: float = RANK_TOL
    feas_tol: float = _convex.POVM_THRESHOLD
    bisect_tol: float = _convex.BISECT_TOL
    starts: int = DEFAULT_STARTS
    seed: int = 0
    method: str = "sdp"
    mixed_starts: int = 3
    mixed_iters: int = 8

    def to_dict(self):
        return dict(self.__dict__)


@dataclass(frozen=True)
class Analysis:
    reports: tuple
    feasibility: FeasibilityReport
    product_content: tuple
    config: AnalysisConfig

    @property
    def ruled_out(self):
        return any(r.violated for r in self.reports) or not self.feasibility.feasible

    @property
    def verdict(self):
        return RULED_OUT if self.ruled_out else NOT_RULED_OUT

    def report(self, inequality_id):
        for r in self.reports:
            if r.inequality_id == inequality_id:
                return r
        raise KeyError(inequality_id)

    def to_dict(self):
        return {
            "verdict": self.verdict,
            "reports": [r.to_dict() for r in self.reports],
            "feasibility": self.feasibility.to_dict(),
            "productSpanned": [
                {"name": name, "isProductSpanned": pc.is_product_spanned, "method": pc.method,
                 "productVectorsFound": len(pc.product_vectors)}
                for name, pc in self.product_content
            ],
        }


def analyze(ensemble, config=None):
    """Run every applicable bound plus the PPT POVM check.

    Perfect LOCC discrimination is ruled out iff some bound is violated or
    no PPT POVM is found. Product-spanned tests of the supports are reported
    alongside as auxiliary evidence; they do not enter the verdict.
    """
    if not isinstance(ensemble, Ensemble):
        raise ValidationError("analyze expects an Ensemble")
    cfg = config or AnalysisConfig()
    _convex.check_method(cfg.method)
    common = {"method": cfg.method, "bisect_tol": cfg.bisect_tol, "rank_tol": cfg.rank_tol}
    d_vals = [d_ppt_estimate(s, tol=cfg.bisect_tol, method=cfg.method, rank_tol=cfg.rank_tol)
              for s in ensemble.states]
    reports = []
    pure = [s.as_pure(cfg.rank_tol) for s in ensemble.states]
    if all(p is not None for p in pure):
        reports.append(bound_pure(pure, list(ensemble.names)))
    reports.append(bound_support_max(ensemble, starts=cfg.starts, seed=cfg.seed, rank_tol=cfg.rank_tol))
    reports.append(bound_candidates(ensemble, ensemble.states, d_values=d_vals, **common))
    reports.append(bound_optimized_mixed(ensemble, starts=cfg.mixed_starts, iters=cfg.mixed_iters, seed=cfg.seed,
                                         d_values=d_vals, **common))
    reports.append(bound_general_partial(ensemble, d_values=d_vals, **common))
    feasibility = ppt_povm_feasibility(ensemble, method=cfg.method, threshold=cfg.feas_tol)
    content = tuple(
        (name, is_product_spanned(support_projector(s, cfg.rank_tol), starts=cfg.starts, seed=cfg.seed))
        for name, s in zip(ensemble.names, ensemble.states)
    )
    return Analysis(tuple(reports), feasibility, content, cfg)
