"""Dense complex linear algebra for small bipartite systems.

Matrices are plain ``numpy`` complex arrays; the dataclasses below attach the
bipartite structure and validate physical invariants at construction time.
All values are treated as immutable once built.
"""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .exceptions import ValidationError

TOL_HERM = 1e-9
TOL_PSD = 1e-9
TOL_TRACE = 1e-9
TOL_NORM = 1e-9
TOL_RECON = 1e-10
TOL_ORTH = 1e-10
RANK_TOL = 1e-9

# eigenvalues closer than this (relative to the spectral scale) count as tied
_TIE_TOL = 1e-12


def _frozen(a):
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class BipartiteDims:
    """Local dimensions of a two-party Hilbert space ``C^dA (x) C^dB``."""

    dA: int
    dB: int

    def __post_init__(self):
        for name in ("dA", "dB"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or isinstance(value, bool):
                raise ValidationError(f"{name} must be an integer, got {value!r}")
            if value < 2:
                raise ValidationError(f"{name} must be >= 2, got {value}")
        object.__setattr__(self, "dA", int(self.dA))
        object.__setattr__(self, "dB", int(self.dB))

    @property
    def D(self):
        return self.dA * self.dB

    def as_tuple(self):
        return (self.dA, self.dB)


def as_dims(dims):
    if isinstance(dims, BipartiteDims):
        return dims
    try:
        dA, dB = dims
    except (TypeError, ValueError):
        raise ValidationError(f"dims must be a pair (dA, dB), got {dims!r}") from None
    return BipartiteDims(dA, dB)


def _check_finite(a, what):
    if not np.all(np.isfinite(a)):
        raise ValidationError(f"{what} contains NaN or Inf entries")


@dataclass(frozen=True)
class SchmidtData:
    """Squared Schmidt coefficients (descending) and the matching local bases.

    ``left`` is ``dA x r`` and ``right`` is ``dB x r``, one column per term.
    """

    coefficients: np.ndarray
    left: np.ndarray
    right: np.ndarray

    @property
    def rank(self):
        return len(self.coefficients)

    def reconstruct(self):
        amps = np.sqrt(self.coefficients)
        return np.einsum("k,ik,jk->ij", amps, self.left, self.right).reshape(-1)


@dataclass(frozen=True, eq=False)
class PureState:
    """Normalized vector on ``C^dA (x) C^dB`` (index order: A major)."""

    dims: BipartiteDims
    vec: np.ndarray

    def __post_init__(self):
        dims = as_dims(self.dims)
        vec = np.asarray(self.vec, dtype=complex).reshape(-1)
        if vec.shape != (dims.D,):
            raise ValidationError(f"state vector has length {vec.size}, expected {dims.D}")
        _check_finite(vec, "state vector")
        norm = np.linalg.norm(vec)
        if abs(norm - 1.0) > TOL_NORM:
            raise ValidationError(f"state vector norm {norm!r} differs from 1 by more than tol_norm={TOL_NORM}")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "vec", _frozen(vec))

    @classmethod
    def from_vector(cls, vec, dims, normalize=True):
        vec = np.asarray(vec, dtype=complex).reshape(-1)
        if normalize:
            norm = np.linalg.norm(vec)
            if norm == 0:
                raise ValidationError("cannot normalize the zero vector")
            vec = vec / norm
        return cls(as_dims(dims), vec)

    @cached_property
    def schmidt(self):
        return schmidt_decompose(self)

    def density_matrix(self):
        return DensityMatrix(self.dims, np.outer(self.vec, self.vec.conj()))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, positive semidefinite, unit-trace operator on a bipartite space."""

    dims: BipartiteDims
    mat: np.ndarray

    def __post_init__(self):
        dims = as_dims(self.dims)
        mat = np.asarray(self.mat, dtype=complex)
        if mat.shape != (dims.D, dims.D):
            raise ValidationError(f"density matrix has shape {mat.shape}, expected {(dims.D, dims.D)}")
        _check_finite(mat, "density matrix")
        herm_err = np.max(np.abs(mat - mat.conj().T))
        if herm_err > TOL_HERM:
            raise ValidationError(f"matrix is not Hermitian: max deviation {herm_err:.3g} > tol_herm={TOL_HERM}")
        mat = (mat + mat.conj().T) / 2
        trace = np.trace(mat).real
        if abs(trace - 1.0) > TOL_TRACE:
            raise ValidationError(f"trace {trace!r} differs from 1 by more than tol_trace={TOL_TRACE}")
        min_eig = np.linalg.eigvalsh(mat)[0]
        if min_eig < -TOL_PSD:
            raise ValidationError(f"matrix is not PSD: min eigenvalue {min_eig:.3g} < -tol_psd={TOL_PSD}")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "mat", _frozen(mat))

    @classmethod
    def from_pure(cls, vec, dims):
        psi = vec if isinstance(vec, PureState) else PureState.from_vector(vec, dims)
        return cls(psi.dims, np.outer(psi.vec, psi.vec.conj()))

    @classmethod
    def maximally_mixed(cls, dims):
        dims = as_dims(dims)
        return cls(dims, np.eye(dims.D) / dims.D)

    @cached_property
    def eig(self):
        """Deterministically ordered eigendecomposition ``(values, vectors)``."""
        return hermitian_eig(self.mat)

    @property
    def max_eigenvalue(self):
        return float(self.eig[0][0])

    def rank(self, rank_tol=RANK_TOL):
        w = self.eig[0]
        return int(np.sum(w > rank_tol * w[0]))

    def as_pure(self, rank_tol=RANK_TOL):
        """Return the underlying ``PureState`` if this is rank one, else ``None``."""
        if self.rank(rank_tol) != 1:
            return None
        return PureState.from_vector(self.eig[1][:, 0], self.dims)


@dataclass(frozen=True, eq=False)
class Subspace:
    """Subspace of the composite space given by orthonormal basis columns (``D x k``)."""

    dims: BipartiteDims
    basis: np.ndarray = field(repr=False)

    def __post_init__(self):
        dims = as_dims(self.dims)
        basis = np.asarray(self.basis, dtype=complex)
        if basis.ndim == 1:
            basis = basis[:, None]
        if basis.ndim != 2 or basis.shape[0] != dims.D:
            raise ValidationError(f"basis must be a D x k array with D={dims.D}, got shape {basis.shape}")
        _check_finite(basis, "subspace basis")
        gram = basis.conj().T @ basis
        err = np.max(np.abs(gram - np.eye(basis.shape[1]))) if basis.shape[1] else 0.0
        if err > TOL_ORTH:
            raise ValidationError(f"basis is not orthonormal: Gram deviation {err:.3g} > tol_orth={TOL_ORTH}")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "basis", _frozen(basis))

    @classmethod
    def span(cls, vectors, dims, tol=1e-10):
        """Orthonormalize arbitrary spanning vectors (columns or a list) into a ``Subspace``."""
        dims = as_dims(dims)
        if isinstance(vectors, (list, tuple)):
            vecs = np.column_stack([np.asarray(v, dtype=complex).reshape(-1) for v in vectors])
        else:
            vecs = np.asarray(vectors, dtype=complex)
            if vecs.ndim == 1:
                vecs = vecs[:, None]
        u, s, _ = np.linalg.svd(vecs, full_matrices=False)
        keep = s > tol * max(s[0], 1.0) if s.size else s.astype(bool)
        return cls(dims, _canonical_phases(u[:, keep]))

    @property
    def dim(self):
        return self.basis.shape[1]

    @cached_property
    def projector(self):
        p = self.basis @ self.basis.conj().T
        p.setflags(write=False)
        return p

    def normalized_projector(self):
        return DensityMatrix(self.dims, self.projector / self.dim)

    def contains(self, vec, tol=1e-8):
        vec = np.asarray(vec, dtype=complex).reshape(-1)
        return np.linalg.norm(vec - self.projector @ vec) <= tol


def _canonical_phases(vectors):
    """Rotate each column so its first non-negligible entry is real positive."""
    out = np.array(vectors, dtype=complex)
    for k in range(out.shape[1]):
        col = out[:, k]
        idx = np.flatnonzero(np.abs(col) > 1e-12)
        if idx.size:
            ph = col[idx[0]] / abs(col[idx[0]])
            out[:, k] = col / ph
    return out


def _lex_key(vec):
    return tuple(np.round(np.column_stack([vec.real, vec.imag]).reshape(-1), 12))


def hermitian_eig(mat):
    """Eigendecomposition of a Hermitian matrix in deterministic order.

    Eigenvalues descend; tied eigenvalues are ordered lexicographically on the
    (real, imag) parts of their phase-normalized eigenvectors.
    """
    mat = np.asarray(mat, dtype=complex)
    w, v = np.linalg.eigh((mat + mat.conj().T) / 2)
    w, v = w[::-1], _canonical_phases(v[:, ::-1])
    scale = max(abs(w[0]), abs(w[-1]), 1.0) if w.size else 1.0
    order = list(range(len(w)))
    # group runs of tied eigenvalues, then sort each group
    i = 0
    while i < len(w):
        j = i + 1
        while j < len(w) and abs(w[j] - w[i]) <= _TIE_TOL * scale:
            j += 1
        if j - i > 1:
            order[i:j] = sorted(range(i, j), key=lambda k: _lex_key(v[:, k]))
        i = j
    return w[order], v[:, order]


def tensor(a, b):
    """Kronecker product with ``a``'s indices major."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def _matrix_and_dims(rho, dims):
    if isinstance(rho, DensityMatrix):
        return rho.mat, rho.dims
    if dims is None:
        raise ValidationError("dims are required when passing a bare matrix")
    dims = as_dims(dims)
    mat = np.asarray(rho, dtype=complex)
    if mat.shape != (dims.D, dims.D):
        raise ValidationError(f"matrix shape {mat.shape} does not match D={dims.D}")
    return mat, dims


def partial_trace(rho, which, dims=None):
    """Trace out subsystem ``which`` ('A' or 'B'); returns the reduced operator on the other party."""
    mat, dims = _matrix_and_dims(rho, dims)
    t = mat.reshape(dims.dA, dims.dB, dims.dA, dims.dB)
    if which == "B":
        return np.einsum("ijkj->ik", t)
    if which == "A":
        return np.einsum("ijil->jl", t)
    raise ValidationError(f"subsystem tag must be 'A' or 'B', got {which!r}")


def partial_transpose(mat, dims):
    """Transpose on the B factor."""
    dims = as_dims(dims)
    mat = np.asarray(mat, dtype=complex)
    if mat.shape != (dims.D, dims.D):
        raise ValidationError(f"matrix shape {mat.shape} does not match D={dims.D}")
    t = mat.reshape(dims.dA, dims.dB, dims.dA, dims.dB)
    return t.transpose(0, 3, 2, 1).reshape(dims.D, dims.D)


def schmidt_decompose(psi):
    """Schmidt decomposition of a pure bipartite state.

    Coefficients are squared singular values (probabilities). Terms whose
    singular value is below ``1e-14`` are dropped.
    """
    if not isinstance(psi, PureState):
        raise ValidationError("schmidt_decompose expects a PureState")
    m = psi.vec.reshape(psi.dims.dA, psi.dims.dB)
    if not np.any(m):
        raise ValidationError("cannot Schmidt-decompose the zero vector")
    u, s, vh = np.linalg.svd(m, full_matrices=False)
    keep = s > 1e-14
    u, s, v = u[:, keep], s[keep], vh[keep].T
    # move the phase freedom of each term onto the right vector
    for k in range(len(s)):
        col = u[:, k]
        idx = np.flatnonzero(np.abs(col) > 1e-12)[0]
        ph = col[idx] / abs(col[idx])
        u[:, k] = col / ph
        v[:, k] = v[:, k] * ph
    lam = s**2
    lam = lam / lam.sum()
    order = sorted(range(len(s)), key=lambda k: (-round(lam[k], 12),) + _lex_key(u[:, k]))
    coefficients = np.array(lam[order], dtype=float)
    coefficients.setflags(write=False)
    return SchmidtData(
        coefficients=coefficients,
        left=_frozen(u[:, order]),
        right=_frozen(v[:, order]),
    )


def support_projector(sigma, rank_tol=RANK_TOL):
    """Subspace spanned by eigenvectors with eigenvalue above ``rank_tol * max eigenvalue``."""
    w, v = sigma.eig
    return Subspace(sigma.dims, v[:, w > rank_tol * w[0]])


def mutually_orthogonal(states, tol=TOL_ORTH):
    """True iff ``max_{i != j} Tr(sigma_i sigma_j) <= tol``."""
    states = list(states)
    if not states:
        return True
    dims = states[0].dims
    for s in states[1:]:
        if s.dims != dims:
            raise ValidationError(f"dimension mismatch: {s.dims} vs {dims}")
    for i in range(len(states)):
        for j in range(i + 1, len(states)):
            overlap = np.real(np.vdot(states[i].mat, states[j].mat))
            if overlap > tol:
                return False
    return True


def random_unitary(n, rng):
    """Haar-random unitary via QR of a complex Ginibre matrix."""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_pure_state(dims, rng):
    dims = as_dims(dims)
    v = rng.standard_normal(dims.D) + 1j * rng.standard_normal(dims.D)
    return PureState.from_vector(v, dims)
