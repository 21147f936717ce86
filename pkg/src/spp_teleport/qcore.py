"""Exact complex linear algebra for few-qubit states, operators and channels.

Conventions used throughout the package:

* qubit basis order is (|H>, |V>) at indices (0, 1), with |H> the Z=+1
  eigenstate;
* |R> = (|H> - i|V>)/sqrt(2) sits at Bloch vector (0, -1, 0) and
  |L> = (|H> + i|V>)/sqrt(2) at (0, +1, 0);
* tensor products put the leftmost factor in the most significant index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ATOL = 1e-12
EIG_ATOL = 1e-10


class DimensionMismatchError(ValueError):
    """Operands have incompatible Hilbert-space dimensions."""


class InvalidStateError(ValueError):
    """A vector or matrix does not describe a physical quantum state."""


@dataclass(frozen=True)
class PureState:
    """Normalized complex amplitude vector over a finite mode space."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).ravel()
        norm = np.linalg.norm(amps)
        if norm == 0:
            raise InvalidStateError("zero amplitude vector")
        object.__setattr__(self, "amplitudes", amps / norm)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def projector(self) -> "MixedState":
        return MixedState(np.outer(self.amplitudes, self.amplitudes.conj()))

    def overlap(self, other: "PureState") -> complex:
        if self.dim != other.dim:
            raise DimensionMismatchError(f"{self.dim} != {other.dim}")
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def phase_fixed(self) -> "PureState":
        """Strip the global phase: largest-magnitude amplitude made real positive."""
        amps = self.amplitudes
        k = int(np.argmax(np.abs(amps)))
        phase = amps[k] / abs(amps[k])
        return PureState(amps / phase)


@dataclass(frozen=True)
class MixedState:
    """Density matrix: Hermitian, unit trace, positive semidefinite.

    Eigenvalues in (-EIG_ATOL, 0) are clipped to zero and the matrix
    renormalized; anything more negative raises InvalidStateError.
    """

    matrix: np.ndarray

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise InvalidStateError(f"not square: {mat.shape}")
        if not np.allclose(mat, mat.conj().T, atol=1e-9):
            raise InvalidStateError("matrix is not Hermitian")
        mat = 0.5 * (mat + mat.conj().T)
        tr = np.trace(mat).real
        if abs(tr - 1.0) > 1e-9:
            raise InvalidStateError(f"trace {tr} != 1")
        evals, evecs = np.linalg.eigh(mat)
        if evals.min() < -EIG_ATOL:
            raise InvalidStateError(f"negative eigenvalue {evals.min()}")
        if evals.min() < 0:
            evals = np.clip(evals, 0.0, None)
            mat = (evecs * evals) @ evecs.conj().T
            mat = mat / np.trace(mat).real
        object.__setattr__(self, "matrix", mat)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def maximally_mixed(cls, dim: int) -> "MixedState":
        return cls(np.eye(dim) / dim)


# Pauli operators in the (|H>, |V>) basis.
@dataclass(frozen=True)
class PauliOp:
    label: str
    matrix: np.ndarray


IDENTITY = PauliOp("I", np.eye(2, dtype=complex))
SIGMA_X = PauliOp("X", np.array([[0, 1], [1, 0]], dtype=complex))
SIGMA_Y = PauliOp("Y", np.array([[0, -1j], [1j, 0]], dtype=complex))
SIGMA_Z = PauliOp("Z", np.array([[1, 0], [0, -1]], dtype=complex))

PAULIS = {p.label: p for p in (IDENTITY, SIGMA_X, SIGMA_Y, SIGMA_Z)}
PAULI_MATRICES = [IDENTITY.matrix, SIGMA_X.matrix, SIGMA_Y.matrix, SIGMA_Z.matrix]


@dataclass(frozen=True)
class BlochVector:
    x: float
    y: float
    z: float

    def __post_init__(self):
        r2 = self.x**2 + self.y**2 + self.z**2
        if r2 > 1 + 1e-10:
            raise InvalidStateError(f"Bloch vector length {np.sqrt(r2)} > 1")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])


def tensor(a, b):
    """Kronecker product of two states of the same kind."""
    if isinstance(a, PureState) and isinstance(b, PureState):
        return PureState(np.kron(a.amplitudes, b.amplitudes))
    if isinstance(a, MixedState) and isinstance(b, MixedState):
        return MixedState(np.kron(a.matrix, b.matrix))
    raise TypeError("tensor operands must both be PureState or both MixedState")


def partial_trace(rho: MixedState, keep, dims) -> MixedState:
    """Trace out all subsystems not listed in `keep`.

    `dims` gives the dimension of every subsystem, most significant first.
    """
    dims = list(dims)
    if int(np.prod(dims)) != rho.dim:
        raise DimensionMismatchError(f"prod({dims}) != {rho.dim}")
    keep = sorted(keep)
    if any(k < 0 or k >= len(dims) for k in keep):
        raise DimensionMismatchError(f"keep={keep} out of range for {len(dims)} subsystems")
    n = len(dims)
    t = rho.matrix.reshape(dims + dims)
    # contract traced-out row/column index pairs, highest axis first
    traced = [i for i in range(n) if i not in keep]
    for i in sorted(traced, reverse=True):
        t = np.trace(t, axis1=i, axis2=i + t.ndim // 2)
    d_keep = int(np.prod([dims[k] for k in keep])) if keep else 1
    return MixedState(t.reshape(d_keep, d_keep))


def fidelity_pure(rho: MixedState, phi: PureState) -> float:
    """State fidelity <phi|rho|phi>, clamped to [0, 1]."""
    if rho.dim != phi.dim:
        raise DimensionMismatchError(f"{rho.dim} != {phi.dim}")
    val = np.vdot(phi.amplitudes, rho.matrix @ phi.amplitudes)
    return float(min(1.0, max(0.0, val.real)))


def bloch_of(rho: MixedState) -> BlochVector:
    """Bloch vector (Tr rho sx, Tr rho sy, Tr rho sz) of a single-qubit state."""
    if rho.dim != 2:
        raise DimensionMismatchError(f"need a single qubit, got dim {rho.dim}")
    return BlochVector(
        float(np.trace(rho.matrix @ SIGMA_X.matrix).real),
        float(np.trace(rho.matrix @ SIGMA_Y.matrix).real),
        float(np.trace(rho.matrix @ SIGMA_Z.matrix).real),
    )


def state_from_bloch(r: np.ndarray) -> MixedState:
    r = np.asarray(r, dtype=float)
    mat = 0.5 * (np.eye(2, dtype=complex) + r[0] * SIGMA_X.matrix + r[1] * SIGMA_Y.matrix + r[2] * SIGMA_Z.matrix)
    return MixedState(mat)


def trace_distance(a: MixedState, b: MixedState) -> float:
    if a.dim != b.dim:
        raise DimensionMismatchError(f"{a.dim} != {b.dim}")
    evals = np.linalg.eigvalsh(a.matrix - b.matrix)
    return 0.5 * float(np.abs(evals).sum())


def complex_matrix_to_json(mat: np.ndarray):
    """Nested lists of [re, im] pairs, row-major."""
    mat = np.asarray(mat, dtype=complex)
    return [[[float(v.real), float(v.imag)] for v in row] for row in mat]


def complex_matrix_from_json(data) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in data])
