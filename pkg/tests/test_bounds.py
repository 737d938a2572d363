import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from loccbound.bounds import (
    NOT_RULED_OUT,
    RULED_OUT,
    SATISFIED,
    VIOLATED,
    AnalysisConfig,
    BoundReport,
    analyze,
    bound_candidates,
    bound_general_partial,
    bound_optimized_mixed,
    bound_pure,
    bound_support_max,
    d_ppt_estimate,
    maximize_calR,
    ppt_povm_feasibility,
)
from loccbound.ensembles import Ensemble, catalog
from loccbound.exceptions import ValidationError
from loccbound.measures import mixed_measures
from loccbound.qla import BipartiteDims, DensityMatrix, PureState, partial_transpose, support_projector

from .conftest import orthogonal_support_ensemble, projector_ensemble

D22 = BipartiteDims(2, 2)
SEEDS = st.integers(0, 2**32 - 1)
S2 = 1 / np.sqrt(2)
BELL = [np.array(v) for v in ([S2, 0, 0, S2], [S2, 0, 0, -S2], [0, S2, S2, 0], [0, S2, -S2, 0])]


def pure(vecs, dims=D22):
    return [PureState.from_vector(v, dims) for v in vecs]


def check_chain_ordering(report, tol=2e-3):
    values = [v for v in report.bound_values if v is not None]
    assert all(b >= a - tol for a, b in zip(values, values[1:])), report.bound_values


def check_verdict_rule(report):
    assert (report.verdict == VIOLATED) == (report.n > min(report.evaluated_bounds) + 1e-9)


def test_bell_basis_pure_chain():
    r = bound_pure(pure(BELL), ["a", "b", "c", "d"])
    assert r.bound_values == (2.0, 2.0, 2.0) and r.verdict == VIOLATED
    assert r.per_state[0] == {"name": "a", "R": 1.0, "E_R": 1.0, "G": 1.0}


def test_product_basis_pure_chain():
    r = bound_pure(pure(np.eye(4)))
    assert r.bound_values == (4.0, 4.0, 4.0) and r.verdict == SATISFIED


def test_pure_bound_rejects_non_orthogonal():
    with pytest.raises(ValidationError, match="not orthogonal"):
        bound_pure(pure([[1, 0, 0, 0], [1, 1, 0, 0]]))
    with pytest.raises(ValidationError):
        bound_pure(pure([[1, 0, 0, 0]]))


@settings(max_examples=50)
@given(st.sampled_from([(2, 2), (2, 3), (3, 3)]), SEEDS)
def test_two_orthogonal_pure_states_satisfy(dims, seed):
    e = catalog("two-random-orthogonal", {"dA": dims[0], "dB": dims[1], "seed": seed % 10_000})
    r = bound_pure([s.as_pure() for s in e.states])
    assert r.verdict == SATISFIED
    check_chain_ordering(r, tol=1e-12)
    check_verdict_rule(r)


def test_support_max_equals_pure_for_pure_states():
    for e in (catalog("bell4"), catalog("two-random-orthogonal", {"dA": 3, "dB": 3, "seed": 4})):
        a = bound_pure([s.as_pure() for s in e.states])
        b = bound_support_max(e)
        np.testing.assert_allclose(a.bound_values, b.bound_values, atol=1e-9)


def test_support_max_on_bell_pair_supports():
    dims = D22
    p1 = (np.outer(BELL[0], BELL[0]) + np.outer(BELL[1], BELL[1])) / 2
    p2 = (np.outer(BELL[2], BELL[2]) + np.outer(BELL[3], BELL[3])) / 2
    e = Ensemble(dims, [DensityMatrix(dims, p1), DensityMatrix(dims, p2)])
    r = bound_support_max(e)
    assert r.min_bound == pytest.approx(2.0, abs=1e-6) and r.verdict == SATISFIED
    assert r.relaxations["optimizer_lower_bound"]


def test_support_max_on_product_pair():
    r = bound_support_max(Ensemble.from_vectors([[1, 0, 0, 0], [0, 0, 1, 0]], D22))
    assert r.bound_values == (4.0, 4.0, 4.0)


def test_entangled_support_pair_reports():
    e = catalog("entangled-support-pair")
    sm = bound_support_max(e)
    assert sm.min_bound == pytest.approx(2.0, abs=1e-6) and sm.verdict == SATISFIED
    cand = bound_candidates(e, e.states)
    # frozen: d_ppt = calR = 9/4 per state, so D/avg = 16/9 (SDP and bisection backends agree)
    assert cand.bound_values[0] == pytest.approx(16 / 9, abs=1e-6)
    assert cand.bound_values[1] == pytest.approx(16 / 9, abs=1e-6)
    assert cand.bound_values[2:] == (None, None)
    assert cand.relaxations["not_evaluated"] == ["D/avg(2^(E_R+S))", "D/avg(2^G)"]
    check_verdict_rule(cand)


def test_candidate_projectors_give_rank_times_robustness():
    e = catalog("entangled-support-pair")
    rhos = [support_projector(s).normalized_projector() for s in e.states]
    r = bound_candidates(e, rhos)
    for row, rho in zip(r.per_state, rhos):
        rg = mixed_measures(rho).global_robustness_lb
        assert row["calR"] == pytest.approx(2 * (1 + rg), abs=1e-9)


def test_candidate_rank_one_reduces_to_pure_chain():
    e = catalog("two-random-orthogonal", {"dA": 2, "dB": 3, "seed": 1})
    p = bound_pure([s.as_pure() for s in e.states])
    c = bound_candidates(e, e.states)
    np.testing.assert_allclose(c.bound_values[1:], p.bound_values, atol=1e-9)


def test_candidate_membership_checks():
    e = catalog("entangled-support-pair")
    wrong = DensityMatrix(D22, np.diag([0, 0, 0.5, 0.5]))
    with pytest.raises(ValidationError, match="same support"):
        bound_candidates(e, [wrong, e.states[1]])
    with pytest.raises(ValidationError, match="expected 2"):
        bound_candidates(e, [e.states[0]])


def test_optimized_mixed_dominates_projector():
    dims = D22
    sigma = DensityMatrix(dims, np.diag([0.7, 0, 0, 0.3]))
    other = DensityMatrix(dims, np.diag([0, 0.5, 0.5, 0]))
    best, state, evals = maximize_calR(sigma, starts=2, iters=4)
    proj = mixed_measures(support_projector(sigma).normalized_projector()).calR
    assert best >= proj - 1e-9 and evals == 4 * 5
    assert support_projector(state).dim == 2
    r = bound_optimized_mixed(Ensemble(dims, [sigma, other]), starts=2, iters=4)
    assert r.relaxations["heuristic_maximum"]
    check_chain_ordering(r)


def test_optimized_mixed_on_bell_basis_matches_pure():
    r = bound_optimized_mixed(catalog("bell4"))
    assert r.bound_values == (pytest.approx(2.0, abs=1e-6),) * 4 and r.verdict == VIOLATED
    assert not r.relaxations["heuristic_maximum"]


def test_general_partial_on_entangled_support_pair():
    r = bound_general_partial(catalog("entangled-support-pair"))
    assert r.bound_labels[1] == "D/avg(rank*(1+R_g))"
    assert r.per_state[0]["S"] == pytest.approx(1.0)
    check_chain_ordering(r)


def test_d_ppt_anchors_both_backends():
    phi = DensityMatrix.from_pure(BELL[0], D22)
    for method in ("sdp", "projection"):
        assert d_ppt_estimate(phi, method=method) == pytest.approx(2.0, abs=1e-3)
        assert d_ppt_estimate(DensityMatrix.maximally_mixed(D22), method=method) == pytest.approx(4.0, abs=1e-3)


def check_feasibility_invariants(report, ensemble):
    dims = ensemble.dims
    assert report.residual <= report.threshold
    povm = report.povm
    np.testing.assert_allclose(sum(povm), np.eye(dims.D), atol=1e-6)
    for i, pi in enumerate(povm):
        assert np.linalg.eigvalsh(pi)[0] >= -1e-7
        assert np.linalg.eigvalsh(partial_transpose(pi, dims))[0] >= -1e-7
        for j, s in enumerate(ensemble.states):
            assert abs(np.real(np.vdot(s.mat, pi)) - (i == j)) <= 1e-6


@pytest.mark.parametrize("method", ["sdp", "projection"])
def test_feasibility_examples(method):
    prod = Ensemble.from_vectors([[1, 0, 0, 0], [0, 1, 0, 0]], D22)
    f = ppt_povm_feasibility(prod, method=method)
    assert f.feasible
    check_feasibility_invariants(f, prod)
    bell = ppt_povm_feasibility(catalog("bell4"), method=method, max_sweeps=4000)
    assert not bell.feasible and bell.povm is None
    assert bell.to_dict()["certified"] is False


def test_entangled_support_pair_feasibility_matches_projectors():
    e = catalog("entangled-support-pair")
    assert ppt_povm_feasibility(e).feasible == ppt_povm_feasibility(projector_ensemble(e)).feasible


@settings(max_examples=12)
@given(st.sampled_from([((2, 2), [1, 2]), ((2, 2), [1, 1, 1]), ((2, 3), [2, 2]), ((2, 3), [1, 2, 2])]),
       st.booleans(), SEEDS)
def test_feasible_ensembles_obey_sum_rule_and_chain(layout, local, seed):
    dims, ranks = layout
    e = orthogonal_support_ensemble(BipartiteDims(*dims), ranks, np.random.default_rng(seed), local=local)
    f = ppt_povm_feasibility(e)
    d = [d_ppt_estimate(s) for s in e.states]
    if f.feasible:
        check_feasibility_invariants(f, e)
        assert sum(d) <= e.dims.D + 1e-3
    for r in (bound_candidates(e, e.states, d_values=d), bound_general_partial(e, d_values=d)):
        check_chain_ordering(r)
        check_verdict_rule(r)


def test_report_serialization():
    r = bound_pure(pure(BELL))
    d = r.to_dict()
    assert d["inequalityId"] == "pure" and d["boundValues"] == [2.0, 2.0, 2.0]
    assert isinstance(r, BoundReport) and r.violated


def test_analyze_verdicts():
    bell = analyze(catalog("bell4"))
    assert bell.verdict == RULED_OUT and bell.ruled_out
    with pytest.raises(KeyError):
        bell.report("nonexistent")

    pair = analyze(catalog("two-random-orthogonal", {"dA": 2, "dB": 2, "seed": 0}))
    assert pair.verdict == NOT_RULED_OUT
    assert pair.to_dict()["verdict"] == NOT_RULED_OUT


def test_analyze_entangled_support_pair():
    a = analyze(catalog("entangled-support-pair"), AnalysisConfig(mixed_starts=1, mixed_iters=2))
    assert a.report("support-max").verdict == SATISFIED
    assert [pc.is_product_spanned for _, pc in a.product_content] == [False, False]
    assert "pure" not in [r.inequality_id for r in a.reports]
    # complementary supports force Pi_1 = P_1, which is not PPT
    assert not a.feasibility.feasible and a.verdict == RULED_OUT


def test_analyze_never_rules_out_orthogonal_product_pair():
    e = Ensemble.from_vectors([[1, 0, 0, 0, 0, 0], [0, 0, 0, 0, 1, 0]], BipartiteDims(2, 3))
    assert analyze(e).verdict == NOT_RULED_OUT


def test_analyze_rejects_non_ensemble():
    with pytest.raises(ValidationError):
        analyze([1, 2])
