import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from loccbound.ensembles import Ensemble
from loccbound.qla import DensityMatrix, random_unitary

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

_CRITERIA = {}


def record_criterion(number, passed, detail):
    line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
    _CRITERIA[number] = line
    print(line)
    return passed


@pytest.fixture
def criterion():
    return record_criterion


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for n in sorted(_CRITERIA):
            terminalreporter.write_line(_CRITERIA[n])


def orthogonal_support_ensemble(dims, ranks, rng, local=False, floor=0.1):
    """Mixed states on mutually orthogonal random supports of the given ranks.

    ``local=True`` draws the support bases from a product of local unitaries,
    so every support is spanned by product vectors. Spectra are bounded below
    by ``floor`` (before normalization).
    """
    D = dims.D
    if local:
        U = np.kron(random_unitary(dims.dA, rng), random_unitary(dims.dB, rng))
        U = U[:, rng.permutation(D)]
    else:
        U = random_unitary(D, rng)
    states, start = [], 0
    for k in ranks:
        V = U[:, start:start + k]
        start += k
        p = floor + rng.random(k)
        p /= p.sum()
        m = (V * p) @ V.conj().T
        states.append(DensityMatrix(dims, (m + m.conj().T) / 2))
    return Ensemble(dims, states)


def projector_ensemble(ensemble):
    from loccbound.qla import support_projector

    return Ensemble(ensemble.dims, [support_projector(s).normalized_projector() for s in ensemble.states],
                    ensemble.names)
