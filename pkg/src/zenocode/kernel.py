"""Dense state-vector and density-matrix kernels for small qubit registers.

Basis labels are big-endian: qubit 0 is the most significant bit of the
basis index, so ``|q0 q1 ... q(n-1)>`` maps to ``int("q0q1...", 2)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

MAX_QUBITS = 12
ROLES = ("system", "environment", "test")


@dataclass(frozen=True)
class QubitRegister:
    """Qubit count plus one role tag per qubit."""

    count: int
    roles: tuple[str, ...] = ()
    max_qubits: int = MAX_QUBITS

    def __post_init__(self):
        if self.count < 1 or self.count > self.max_qubits:
            raise ValueError(
                f"register size {self.count} outside [1, {self.max_qubits}]"
            )
        roles = tuple(self.roles) if self.roles else ("system",) * self.count
        if len(roles) != self.count:
            raise ValueError("need exactly one role per qubit")
        bad = [r for r in roles if r not in ROLES]
        if bad:
            raise ValueError(f"unknown qubit role(s): {bad}")
        object.__setattr__(self, "roles", roles)

    @classmethod
    def system(cls, n: int) -> "QubitRegister":
        return cls(n, ("system",) * n)

    @property
    def dim(self) -> int:
        return 2**self.count

    def indices(self, role: str) -> list[int]:
        return [i for i, r in enumerate(self.roles) if r == role]

    def __add__(self, other: "QubitRegister") -> "QubitRegister":
        return QubitRegister(
            self.count + other.count,
            self.roles + other.roles,
            max(self.max_qubits, other.max_qubits),
        )

    def subset(self, keep: Sequence[int]) -> "QubitRegister":
        return QubitRegister(len(keep), tuple(self.roles[k] for k in keep), self.max_qubits)


@dataclass(frozen=True)
class Operator:
    """A ``2^arity x 2^arity`` matrix acting on an ordered list of qubits."""

    matrix: np.ndarray
    label: str = ""
    unitary: bool = False

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("operator matrix must be square")
        arity = int(round(np.log2(m.shape[0])))
        if 2**arity != m.shape[0] or arity < 1:
            raise ValueError(f"operator dimension {m.shape[0]} is not 2^k")
        if self.unitary and not np.allclose(
            m.conj().T @ m, np.eye(m.shape[0]), atol=1e-10, rtol=0
        ):
            raise ValueError(f"operator {self.label!r} tagged unitary but U^dag U != I")
        object.__setattr__(self, "matrix", m)

    @property
    def arity(self) -> int:
        return int(round(np.log2(self.matrix.shape[0])))

    @property
    def dagger(self) -> "Operator":
        return Operator(self.matrix.conj().T, self.label + "^dag", self.unitary)

    def __matmul__(self, other: "Operator") -> "Operator":
        return Operator(
            self.matrix @ other.matrix,
            f"{self.label}*{other.label}",
            self.unitary and other.unitary,
        )

    def kron(self, other: "Operator") -> "Operator":
        return Operator(
            np.kron(self.matrix, other.matrix),
            f"{self.label}(x){other.label}",
            self.unitary and other.unitary,
        )


@dataclass(frozen=True)
class PureState:
    register: QubitRegister
    amplitudes: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if a.shape[0] != self.register.dim:
            raise ValueError(
                f"{a.shape[0]} amplitudes for a {self.register.count}-qubit register"
            )
        object.__setattr__(self, "amplitudes", a)

    @classmethod
    def basis(cls, label: str, roles: Sequence[str] = ()) -> "PureState":
        """Computational basis state from a bit string such as ``"0110"``."""
        n = len(label)
        amps = np.zeros(2**n, dtype=complex)
        amps[int(label, 2)] = 1.0
        return cls(QubitRegister(n, tuple(roles)), amps)

    @classmethod
    def from_amplitudes(cls, amplitudes, roles: Sequence[str] = (), normalize=False):
        a = np.asarray(amplitudes, dtype=complex).reshape(-1)
        n = int(round(np.log2(a.shape[0])))
        if 2**n != a.shape[0]:
            raise ValueError(f"amplitude vector length {a.shape[0]} is not 2^n")
        if normalize:
            a = a / np.linalg.norm(a)
        return cls(QubitRegister(n, tuple(roles)), a)

    @property
    def n(self) -> int:
        return self.register.count

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "PureState":
        return PureState(self.register, self.amplitudes / self.norm)

    def to_density(self) -> "DensityMatrix":
        a = self.amplitudes
        return DensityMatrix(self.register, np.outer(a, a.conj()))

    def tensor(self, other: "PureState") -> "PureState":
        return PureState(self.register + other.register, np.kron(self.amplitudes, other.amplitudes))


@dataclass(frozen=True)
class DensityMatrix:
    register: QubitRegister
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        d = self.register.dim
        if m.shape != (d, d):
            raise ValueError(f"matrix shape {m.shape} does not match register dim {d}")
        object.__setattr__(self, "matrix", m)

    @classmethod
    def maximally_mixed(cls, n: int) -> "DensityMatrix":
        return cls(QubitRegister.system(n), np.eye(2**n, dtype=complex) / 2**n)

    @property
    def n(self) -> int:
        return self.register.count

    @property
    def trace(self) -> float:
        return float(np.real(np.trace(self.matrix)))

    @property
    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))

    def check(self, atol: float = 1e-10) -> None:
        """Raise if the matrix is not a valid (Hermitian, unit-trace, PSD) state."""
        m = self.matrix
        if not np.allclose(m, m.conj().T, atol=atol, rtol=0):
            raise ValueError("density matrix not Hermitian")
        if abs(self.trace - 1.0) > atol:
            raise ValueError(f"density matrix trace {self.trace} != 1")
        if np.linalg.eigvalsh(m).min() < -1e-9:
            raise ValueError("density matrix has negative eigenvalues")

    def tensor(self, other: "DensityMatrix") -> "DensityMatrix":
        return DensityMatrix(self.register + other.register, np.kron(self.matrix, other.matrix))


State = Union[PureState, DensityMatrix]


# -- raw array kernels -------------------------------------------------------

def _check_targets(targets: Sequence[int], n: int, arity: int) -> list[int]:
    targets = [int(t) for t in targets]
    if len(targets) != arity:
        raise ValueError(f"operator arity {arity} but {len(targets)} targets given")
    if len(set(targets)) != len(targets):
        raise ValueError(f"duplicate target in {targets}")
    for t in targets:
        if not 0 <= t < n:
            raise IndexError(f"qubit index {t} out of range for {n}-qubit register")
    return targets


def apply_matrix_vec(psi: np.ndarray, mat: np.ndarray, targets: Sequence[int], n: int) -> np.ndarray:
    k = len(targets)
    t = psi.reshape((2,) * n)
    m = mat.reshape((2,) * (2 * k))
    out = np.tensordot(m, t, axes=(list(range(k, 2 * k)), list(targets)))
    out = np.moveaxis(out, list(range(k)), list(targets))
    return out.reshape(-1)


def apply_matrix_rho(rho: np.ndarray, mat: np.ndarray, targets: Sequence[int], n: int) -> np.ndarray:
    """Return ``M rho M^dag`` with M acting on ``targets``."""
    k = len(targets)
    t = rho.reshape((2,) * (2 * n))
    m = mat.reshape((2,) * (2 * k))
    out = np.tensordot(m, t, axes=(list(range(k, 2 * k)), list(targets)))
    out = np.moveaxis(out, list(range(k)), list(targets))
    col = [n + q for q in targets]
    out = np.tensordot(out, m.conj(), axes=(col, list(range(k, 2 * k))))
    out = np.moveaxis(out, list(range(2 * n - k, 2 * n)), col)
    return out.reshape(2**n, 2**n)


def partial_trace_array(rho: np.ndarray, keep: Sequence[int], n: int) -> np.ndarray:
    keep = list(keep)
    drop = [q for q in range(n) if q not in keep]
    t = rho.reshape((2,) * (2 * n))
    perm = keep + drop + [n + q for q in keep] + [n + q for q in drop]
    dk, dd = 2 ** len(keep), 2 ** len(drop)
    t = t.transpose(perm).reshape(dk, dd, dk, dd)
    return np.einsum("ajbj->ab", t)


# -- public operations -------------------------------------------------------

def apply_operator(state: State, op: Operator, targets: Sequence[int]):
    """Apply ``op`` to ``targets`` of a pure state or density matrix."""
    targets = _check_targets(targets, state.register.count, op.arity)
    n = state.register.count
    if isinstance(state, PureState):
        return PureState(state.register, apply_matrix_vec(state.amplitudes, op.matrix, targets, n))
    return DensityMatrix(state.register, apply_matrix_rho(state.matrix, op.matrix, targets, n))


def apply_channel(rho: DensityMatrix, channel, targets: Sequence[int]) -> DensityMatrix:
    """``rho -> sum_k K rho K^dag`` for the channel's Kraus operators on ``targets``."""
    if isinstance(rho, PureState):
        rho = rho.to_density()
    n = rho.register.count
    targets = _check_targets(targets, n, channel.arity)
    out = np.zeros_like(rho.matrix)
    for k in channel.kraus:
        out += apply_matrix_rho(rho.matrix, k.matrix, targets, n)
    return DensityMatrix(rho.register, out)


def embed(op: Operator, targets: Sequence[int], n: int) -> np.ndarray:
    """Full-register matrix of ``op`` on ``targets``; small registers only."""
    targets = _check_targets(targets, n, op.arity)
    eye = np.eye(2**n, dtype=complex)
    cols = [apply_matrix_vec(eye[:, j], op.matrix, targets, n) for j in range(2**n)]
    return np.stack(cols, axis=1)


def measure_projective(
    state: State,
    projectors: Sequence[Operator],
    targets: Sequence[int] | None = None,
    rng: np.random.Generator | None = None,
    outcome: int | None = None,
):
    """Projective measurement.

    With ``outcome`` given the branch is forced (post-selection) and its Born
    probability returned; otherwise an outcome is drawn from ``rng``.

    Returns:
        ``(outcome, post-measurement state renormalized, probability)``.
    """
    n = state.register.count
    if targets is None:
        targets = list(range(n))
    arity = projectors[0].arity
    targets = _check_targets(targets, n, arity)
    d = 2**arity
    mats = [p.matrix for p in projectors]
    if not np.allclose(sum(mats), np.eye(d), atol=1e-8, rtol=0):
        raise ValueError("projectors do not sum to identity")
    for i, a in enumerate(mats):
        for j, b in enumerate(mats):
            want = a if i == j else np.zeros_like(a)
            if not np.allclose(a @ b, want, atol=1e-8, rtol=0):
                raise ValueError("projectors are not mutually orthogonal idempotents")

    branches = []
    probs = []
    for p in projectors:
        post = apply_operator(state, p, targets)
        if isinstance(post, PureState):
            pr = float(np.vdot(post.amplitudes, post.amplitudes).real)
        else:
            pr = post.trace
        branches.append(post)
        probs.append(max(pr, 0.0))
    probs = np.array(probs)

    if outcome is None:
        if rng is None:
            raise ValueError("sampled measurement needs an rng (or force an outcome)")
        outcome = int(rng.choice(len(probs), p=probs / probs.sum()))
    elif probs[outcome] < 1e-14:
        raise ValueError(f"forced outcome {outcome} has probability {probs[outcome]:.3g}")

    post = branches[outcome]
    pr = float(probs[outcome])
    if isinstance(post, PureState):
        post = PureState(post.register, post.amplitudes / np.sqrt(pr))
    else:
        post = DensityMatrix(post.register, post.matrix / pr)
    return outcome, post, pr


def partial_trace(rho: State, keep: Sequence[int]) -> DensityMatrix:
    """Reduced density matrix over ``keep`` (in the order given)."""
    if isinstance(rho, PureState):
        rho = rho.to_density()
    keep = [int(k) for k in keep]
    if not keep:
        raise ValueError("keep list is empty")
    if len(set(keep)) != len(keep):
        raise ValueError(f"duplicate index in keep list {keep}")
    n = rho.register.count
    for k in keep:
        if not 0 <= k < n:
            raise IndexError(f"qubit index {k} out of range")
    return DensityMatrix(rho.register.subset(keep), partial_trace_array(rho.matrix, keep, n))


def fidelity(a: State, b: PureState) -> float:
    """``|<a|b>|^2`` for pure ``a``; ``<b|rho|b>`` for mixed ``a``."""
    if a.register.dim != b.register.dim:
        raise ValueError(f"dimension mismatch: {a.register.dim} vs {b.register.dim}")
    v = b.amplitudes
    if isinstance(a, PureState):
        f = abs(np.vdot(a.amplitudes, v)) ** 2
    else:
        f = np.vdot(v, a.matrix @ v).real
    return float(min(max(f, 0.0), 1.0))


def measure_and_discard(psi: PureState, qubit: int, basis: np.ndarray | None, rng: np.random.Generator):
    """Sample a single-qubit measurement in ``basis`` (columns) and drop the qubit.

    Returns ``(outcome, reduced PureState)``. Used by trajectory unravellings.
    """
    n = psi.register.count
    t = np.moveaxis(psi.amplitudes.reshape((2,) * n), qubit, 0).reshape(2, -1)
    if basis is not None:
        t = basis.conj().T @ t
    p = np.einsum("ij,ij->i", t.conj(), t).real
    p = np.clip(p, 0.0, None)
    k = 0 if rng.random() * (p[0] + p[1]) < p[0] else 1
    keep = [q for q in range(n) if q != qubit]
    reduced = t[k] / np.sqrt(p[k])
    return k, PureState(psi.register.subset(keep), reduced)


# -- common single-qubit operators ---------------------------------------------

I2 = Operator(np.eye(2), "I", unitary=True)
X = Operator(np.array([[0, 1], [1, 0]]), "X", unitary=True)
Y = Operator(np.array([[0, -1j], [1j, 0]]), "Y", unitary=True)
Z = Operator(np.array([[1, 0], [0, -1]]), "Z", unitary=True)
# |~0> = H|0>, |~1> = H|1>: the rotated local basis
H = Operator(np.array([[1, 1], [1, -1]]) / np.sqrt(2), "H", unitary=True)
CNOT = Operator(
    np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]]), "CNOT", unitary=True
)
PAULIS = {"X": X, "Y": Y, "Z": Z}

P0 = Operator(np.diag([1.0, 0.0]), "|0><0|")
P1 = Operator(np.diag([0.0, 1.0]), "|1><1|")


def projector_pair(v: np.ndarray) -> tuple[Operator, Operator]:
    """``(|v><v|, I - |v><v|)`` for a normalized single-qubit vector."""
    v = np.asarray(v, dtype=complex)
    p = np.outer(v, v.conj())
    return Operator(p, "|v><v|"), Operator(np.eye(2) - p, "1-|v><v|")
