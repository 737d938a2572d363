import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from loccbound.ensembles import catalog
from loccbound.exceptions import ValidationError
from loccbound.measures import (
    geometric_pure,
    global_robustness_ppt,
    mixed_measures,
    pure_measures,
    rel_entropy_pure,
    robustness_pure,
    support_robustness_ratio,
    vn_entropy,
)
from loccbound.qla import BipartiteDims, DensityMatrix, PureState, random_pure_state, random_unitary

DIMS = st.sampled_from([(2, 2), (2, 3), (3, 3)])
SEEDS = st.integers(0, 2**32 - 1)


def phi(d):
    return PureState(BipartiteDims(d, d), np.eye(d).reshape(-1) / np.sqrt(d))


@pytest.mark.parametrize("d", [2, 3])
def test_maximally_entangled_closed_forms(d):
    m = pure_measures(phi(d))
    assert m.robustness == pytest.approx(d - 1, abs=1e-12)
    assert m.rel_entropy == pytest.approx(np.log2(d), abs=1e-12)
    assert m.geometric == pytest.approx(np.log2(d), abs=1e-12)


def test_product_state_measures_vanish():
    psi = PureState(BipartiteDims(2, 3), np.kron([0.6, 0.8], [0, 1, 0]))
    assert pure_measures(psi) == pure_measures(psi)
    assert robustness_pure(psi) == 0 and rel_entropy_pure(psi) == 0 and geometric_pure(psi) == 0


def test_partially_entangled_values():
    # lambda = (3/4, 1/4): R = 2*sqrt(3)/4, G = log2(4/3)
    psi = PureState(BipartiteDims(2, 2), [np.sqrt(0.75), 0, 0, 0.5])
    assert robustness_pure(psi) == pytest.approx(np.sqrt(3) / 2, abs=1e-14)
    assert geometric_pure(psi) == pytest.approx(np.log2(4 / 3), abs=1e-14)
    h = -(0.75 * np.log2(0.75) + 0.25 * np.log2(0.25))
    assert rel_entropy_pure(psi) == pytest.approx(h, abs=1e-14)


def test_pure_measures_reject_density_matrix():
    with pytest.raises(ValidationError):
        robustness_pure(DensityMatrix.maximally_mixed(BipartiteDims(2, 2)))


@settings(max_examples=200)
@given(DIMS, SEEDS)
def test_pure_chain_ordering_and_ranges(dims, seed):
    dims = BipartiteDims(*dims)
    m = pure_measures(random_pure_state(dims, np.random.default_rng(seed)))
    d = min(dims.dA, dims.dB)
    assert 1 + m.robustness >= 2**m.rel_entropy - 1e-9
    assert 2**m.rel_entropy >= 2**m.geometric - 1e-9
    assert -1e-12 <= m.robustness <= d - 1 + 1e-9
    assert m.geometric <= m.rel_entropy + 1e-9 <= np.log2(d) + 2e-9


@settings(max_examples=100)
@given(DIMS, SEEDS)
def test_local_unitary_invariance(dims, seed):
    dims = BipartiteDims(*dims)
    rng = np.random.default_rng(seed)
    psi = random_pure_state(dims, rng)
    u = np.kron(random_unitary(dims.dA, rng), random_unitary(dims.dB, rng))
    a, b = pure_measures(psi), pure_measures(PureState(dims, u @ psi.vec))
    assert abs(a.robustness - b.robustness) <= 1e-9
    assert abs(a.rel_entropy - b.rel_entropy) <= 1e-9
    assert abs(a.geometric - b.geometric) <= 1e-9


def test_vn_entropy():
    dims = BipartiteDims(2, 2)
    assert vn_entropy(DensityMatrix.maximally_mixed(dims)) == pytest.approx(2.0)
    assert vn_entropy(phi(2).density_matrix()) == pytest.approx(0.0, abs=1e-12)


def test_mixed_measures_of_maximally_mixed():
    m = mixed_measures(DensityMatrix.maximally_mixed(BipartiteDims(2, 2)))
    assert m.global_robustness_lb == 0.0
    assert m.alpha == pytest.approx(0.25)
    assert m.calR == pytest.approx(4.0)
    assert m.robustness_method == "ppt-sdp"


def test_mixed_measures_rank_one_uses_closed_form():
    m = mixed_measures(phi(3).density_matrix())
    assert m.robustness_method == "closed-form"
    assert m.calR == pytest.approx(3.0, abs=1e-12)


@pytest.mark.parametrize("method", ["sdp", "projection"])
def test_global_robustness_of_bell_state(method):
    assert global_robustness_ppt(phi(2).density_matrix(), method=method) == pytest.approx(1.0, abs=1e-4)


@pytest.mark.parametrize("method", ["sdp", "projection"])
def test_global_robustness_of_entangled_support_state(method):
    # frozen: 1/8 from the SDP, reproduced independently by bisection + alternating projections
    sigma = catalog("entangled-support-pair").states[0]
    assert global_robustness_ppt(sigma, method=method) == pytest.approx(0.125, abs=1e-4)


def test_global_robustness_rejects_unknown_method():
    with pytest.raises(ValueError):
        global_robustness_ppt(DensityMatrix.maximally_mixed(BipartiteDims(2, 2)), method="newton")


def test_global_robustness_matches_closed_form_in_3x3():
    psi = PureState(BipartiteDims(3, 3), np.array([0.8, 0, 0, 0, 0.5, 0, 0, 0, np.sqrt(1 - 0.89)]))
    closed = np.sum(np.sqrt(psi.schmidt.coefficients)) ** 2 - 1
    assert global_robustness_ppt(psi.density_matrix()) == pytest.approx(closed, abs=1e-6)


def test_support_robustness_ratio():
    dims = BipartiteDims(2, 2)
    product_support = DensityMatrix(dims, np.diag([0.7, 0.3, 0, 0]))
    assert support_robustness_ratio(product_support) == pytest.approx(2.0, abs=1e-9)
    # the projector onto span{00, 11} is (|00><00| + |11><11|)/2, which is separable
    diag = DensityMatrix(dims, np.diag([0.5, 0, 0, 0.5]))
    assert support_robustness_ratio(diag) == pytest.approx(2.0, abs=1e-9)
    assert support_robustness_ratio(phi(2).density_matrix()) == pytest.approx(2.0, abs=1e-12)


def test_product_state_measures_are_positive_zero():
    m = pure_measures(PureState(BipartiteDims(2, 2), [0, 1, 0, 0]))
    assert all(np.copysign(1.0, x) == 1.0 for x in (m.robustness, m.rel_entropy, m.geometric))
