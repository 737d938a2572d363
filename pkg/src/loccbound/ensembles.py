"""Ensembles of orthogonal bipartite states: catalog constructions and the JSON file format.

File layout (``schemaVersion`` 1)::

    {
      "schemaVersion": 1,
      "dims": [dA, dB],
      "states": [{"name": "...", "matrix": [[[re, im], ...], ...]},
                 {"name": "...", "vector": [[re, im], ...]}],
      "metadata": {"key": "value"}
    }

Vectors are promoted to rank-one density matrices. ``serialize`` always
writes matrices, with every real number printed to 17 significant digits.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ValidationError
from .qla import BipartiteDims, DensityMatrix, PureState, as_dims, mutually_orthogonal, random_unitary

SCHEMA_VERSION = 1
ORTHOGONALITY_TOL = 1e-8


class EnsembleFormatError(ValidationError):
    """Schema violation in an ensemble file; the message names the offending field."""


@dataclass(frozen=True, eq=False)
class Ensemble:
    dims: BipartiteDims
    states: tuple
    names: tuple = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        dims = as_dims(self.dims)
        states = tuple(self.states)
        if len(states) < 2:
            raise ValidationError(f"an ensemble needs at least 2 states, got {len(states)}")
        for i, s in enumerate(states):
            if not isinstance(s, DensityMatrix):
                raise ValidationError(f"state[{i}] is not a DensityMatrix")
            if s.dims != dims:
                raise ValidationError(f"state[{i}] has dims {s.dims.as_tuple()}, expected {dims.as_tuple()}")
        names = tuple(self.names) if self.names is not None else tuple(f"s{i + 1}" for i in range(len(states)))
        if len(names) != len(states):
            raise ValidationError(f"got {len(names)} names for {len(states)} states")
        if not mutually_orthogonal(states, ORTHOGONALITY_TOL):
            raise ValidationError(f"states are not mutually orthogonal at tolerance {ORTHOGONALITY_TOL}")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "metadata", dict(self.metadata))

    @property
    def N(self):
        return len(self.states)

    @classmethod
    def from_vectors(cls, vectors, dims, names=None, metadata=None):
        dims = as_dims(dims)
        states = [DensityMatrix.from_pure(v, dims) for v in vectors]
        return cls(dims, states, names, metadata or {})


# -- catalog ------------------------------------------------------------------

_S2 = 1 / math.sqrt(2)


def _ket(dims, i, j):
    v = np.zeros(dims.D, dtype=complex)
    v[i * dims.dB + j] = 1.0
    return v


def _bell(dims):
    e = lambda i, j: _ket(dims, i, j)  # noqa: E731
    return {
        "phi+": _S2 * (e(0, 0) + e(1, 1)),
        "phi-": _S2 * (e(0, 0) - e(1, 1)),
        "psi+": _S2 * (e(0, 1) + e(1, 0)),
        "psi-": _S2 * (e(0, 1) - e(1, 0)),
    }


def _int_param(params, key, default):
    value = params.get(key, default)
    if float(value) != int(float(value)):
        raise ValidationError(f"parameter {key!r} must be an integer, got {value!r}")
    return int(float(value))


def _weight_param(params, key):
    value = float(params.get(key, 0.5))
    if not 0.0 < value <= 1.0:
        raise ValidationError(f"parameter {key!r} must lie in (0, 1], got {value!r}")
    return value


def _bell4(params):
    dims = BipartiteDims(2, 2)
    bell = _bell(dims)
    return Ensemble.from_vectors(list(bell.values()), dims, names=list(bell))


def _entangled_support_pair(params):
    """alpha*|phi+><phi+| + (1-alpha)|01><01| and beta*|phi-><phi-| + (1-beta)|10><10|."""
    dims = BipartiteDims(2, 2)
    alpha, beta = _weight_param(params, "alpha"), _weight_param(params, "beta")
    bell = _bell(dims)

    def mix(w, ent, prod):
        return DensityMatrix(dims, w * np.outer(ent, ent.conj()) + (1 - w) * np.outer(prod, prod.conj()))

    states = [mix(alpha, bell["phi+"], _ket(dims, 0, 1)), mix(beta, bell["phi-"], _ket(dims, 1, 0))]
    return Ensemble(dims, states, ("sigma1", "sigma2"), {"alpha": repr(alpha), "beta": repr(beta)})


def _two_random_orthogonal(params):
    dims = BipartiteDims(_int_param(params, "dA", 2), _int_param(params, "dB", 2))
    seed = _int_param(params, "seed", 0)
    u = random_unitary(dims.D, np.random.default_rng(seed))
    return Ensemble.from_vectors([u[:, 0], u[:, 1]], dims, names=("psi1", "psi2"), metadata={"seed": str(seed)})


def _product_basis(params):
    dims = BipartiteDims(_int_param(params, "dA", 2), _int_param(params, "dB", 2))
    vectors, names = [], []
    for i in range(dims.dA):
        for j in range(dims.dB):
            vectors.append(_ket(dims, i, j))
            names.append(f"{i}{j}")
    return Ensemble.from_vectors(vectors, dims, names=names)


def _domino(params):
    dims = BipartiteDims(3, 3)
    e0, e1, e2 = np.eye(3)
    pieces = [
        ("11", e1, e1),
        ("0(0+1)", e0, e0 + e1), ("0(0-1)", e0, e0 - e1),
        ("2(1+2)", e2, e1 + e2), ("2(1-2)", e2, e1 - e2),
        ("(1+2)0", e1 + e2, e0), ("(1-2)0", e1 - e2, e0),
        ("(0+1)2", e0 + e1, e2), ("(0-1)2", e0 - e1, e2),
    ]
    vectors = [np.kron(a, b) for _, a, b in pieces]
    return Ensemble.from_vectors(vectors, dims, names=[n for n, _, _ in pieces])


def _tiles(params):
    dims = BipartiteDims(3, 3)
    e0, e1, e2 = np.eye(3)
    pieces = [
        ("0(0-1)", e0, e0 - e1),
        ("(0-1)2", e0 - e1, e2),
        ("2(1-2)", e2, e1 - e2),
        ("(1-2)0", e1 - e2, e0),
        ("stopper", e0 + e1 + e2, e0 + e1 + e2),
    ]
    vectors = [np.kron(a, b) for _, a, b in pieces]
    return Ensemble.from_vectors(vectors, dims, names=[n for n, _, _ in pieces])


CATALOG = {
    "bell4": _bell4,
    "entangled-support-pair": _entangled_support_pair,
    "two-random-orthogonal": _two_random_orthogonal,
    "product-basis": _product_basis,
    "domino": _domino,
    "tiles": _tiles,
}


def catalog(name, params=None):
    """Build a named ensemble; ``params`` is a map of real-valued parameters."""
    try:
        builder = CATALOG[name]
    except KeyError:
        raise ValidationError(f"unknown catalog ensemble {name!r}; known: {', '.join(sorted(CATALOG))}") from None
    return builder(dict(params or {}))


# -- file format --------------------------------------------------------------


def _fmt(x):
    x = float(x)
    if x == 0:
        return "0"
    return format(x, ".17g")


def _complex_entry(z):
    return f"[{_fmt(z.real)}, {_fmt(z.imag)}]"


def serialize(ensemble):
    """Canonical UTF-8 JSON text of an ensemble (always matrix form)."""
    lines = ["{", f'  "schemaVersion": {SCHEMA_VERSION},', f'  "dims": [{ensemble.dims.dA}, {ensemble.dims.dB}],',
             '  "states": [']
    for n, (name, state) in enumerate(zip(ensemble.names, ensemble.states)):
        rows = ",\n".join("        [" + ", ".join(_complex_entry(z) for z in row) + "]" for row in state.mat)
        tail = "," if n < ensemble.N - 1 else ""
        lines.append(f'    {{"name": {json.dumps(name)}, "matrix": [\n{rows}\n      ]}}{tail}')
    lines.append("  ],")
    meta = json.dumps({str(k): str(v) for k, v in sorted(ensemble.metadata.items())}, sort_keys=True)
    lines.append(f'  "metadata": {meta}')
    lines.append("}")
    return ("\n".join(lines) + "\n").encode("utf-8")


def _complex_from(entry, where):
    if not (isinstance(entry, list) and len(entry) == 2):
        raise EnsembleFormatError(f"{where}: expected a [re, im] pair, got {entry!r}")
    parts = []
    for x in entry:
        if isinstance(x, bool) or not isinstance(x, (int, float)):
            raise EnsembleFormatError(f"{where}: non-numeric component {x!r}")
        if not math.isfinite(x):
            raise EnsembleFormatError(f"{where}: non-finite number {x!r}")
        parts.append(float(x))
    return complex(parts[0], parts[1])


def _parse_matrix(raw, D, where):
    if not isinstance(raw, list) or len(raw) != D:
        raise EnsembleFormatError(f"{where}: expected {D} rows")
    mat = np.empty((D, D), dtype=complex)
    for r, row in enumerate(raw):
        if not isinstance(row, list) or len(row) != D:
            got = len(row) if isinstance(row, list) else type(row).__name__
            raise EnsembleFormatError(f"{where}[{r}]: ragged row (expected {D} entries, got {got})")
        for c, entry in enumerate(row):
            mat[r, c] = _complex_from(entry, f"{where}[{r}][{c}]")
    return mat


def _parse_vector(raw, D, where):
    if not isinstance(raw, list) or len(raw) != D:
        raise EnsembleFormatError(f"{where}: expected {D} entries")
    return np.array([_complex_from(e, f"{where}[{i}]") for i, e in enumerate(raw)], dtype=complex)


def _ensure_unique_names(names):
    seen = set()
    for i, n in enumerate(names):
        if n in seen:
            raise EnsembleFormatError(f"states[{i}].name: duplicate name {n!r}")
        seen.add(n)


def parse_states(data):
    """Parse file bytes into ``(dims, states, names, metadata)`` without ensemble-level checks."""
    if isinstance(data, (bytes, bytearray)):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise EnsembleFormatError(f"file is not valid UTF-8: {exc}") from None
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise EnsembleFormatError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise EnsembleFormatError("top level must be a JSON object")
    for key in ("schemaVersion", "dims", "states"):
        if key not in doc:
            raise EnsembleFormatError(f"missing required field {key!r}")
    if doc["schemaVersion"] != SCHEMA_VERSION:
        raise EnsembleFormatError(f"schemaVersion: unsupported version {doc['schemaVersion']!r}")
    raw_dims = doc["dims"]
    if not (isinstance(raw_dims, list) and len(raw_dims) == 2 and all(isinstance(d, int) for d in raw_dims)):
        raise EnsembleFormatError(f"dims: expected [dA, dB] integers, got {raw_dims!r}")
    try:
        dims = BipartiteDims(*raw_dims)
    except ValidationError as exc:
        raise EnsembleFormatError(f"dims: {exc}") from None
    raw_states = doc["states"]
    if not isinstance(raw_states, list) or not raw_states:
        raise EnsembleFormatError("states: expected a non-empty list")
    metadata = doc.get("metadata", {})
    if not isinstance(metadata, dict) or not all(isinstance(v, str) for v in metadata.values()):
        raise EnsembleFormatError("metadata: expected a map of strings")

    states, names = [], []
    for i, entry in enumerate(raw_states):
        where = f"states[{i}]"
        if not isinstance(entry, dict):
            raise EnsembleFormatError(f"{where}: expected an object")
        name = entry.get("name")
        if not isinstance(name, str):
            raise EnsembleFormatError(f"{where}.name: missing or not a string")
        has_m, has_v = "matrix" in entry, "vector" in entry
        if has_m == has_v:
            raise EnsembleFormatError(f"{where}: exactly one of 'matrix' or 'vector' is required")
        try:
            if has_m:
                state = DensityMatrix(dims, _parse_matrix(entry["matrix"], dims.D, f"{where}.matrix"))
            else:
                vec = _parse_vector(entry["vector"], dims.D, f"{where}.vector")
                state = DensityMatrix.from_pure(PureState(dims, vec), dims)
        except EnsembleFormatError:
            raise
        except ValidationError as exc:
            raise ValidationError(f"{where} ({name!r}): {exc}") from None
        states.append(state)
        names.append(name)
    _ensure_unique_names(names)
    return dims, states, names, dict(metadata)


def parse(data):
    """Parse and validate an ensemble file (bytes or str)."""
    dims, states, names, metadata = parse_states(data)
    if len(states) < 2:
        raise ValidationError(f"an ensemble needs at least 2 states, got {len(states)}")
    for i in range(len(states)):
        for j in range(i + 1, len(states)):
            overlap = float(np.real(np.vdot(states[i].mat, states[j].mat)))
            if overlap > ORTHOGONALITY_TOL:
                raise ValidationError(
                    f"states[{i}] and states[{j}] are not orthogonal: Tr(rho_i rho_j) = {overlap:.3g} "
                    f"> tol={ORTHOGONALITY_TOL}"
                )
    return Ensemble(dims, states, names, metadata)
