"""The three encodings, encode/decode, and brute-force code analysis."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .kernel import PAULIS, DensityMatrix, PureState, QubitRegister, apply_matrix_vec

CODE_NAMES = ("four_particle", "four_particle_two_logical", "two_particle_dephasing")

ORTHO_TOL = 1e-12
ZERO_OVERLAP = 1e-10
SAME_STATE = 1 - 1e-10


class LeakageError(ValueError):
    """State lies entirely outside the code space, so decoding is undefined."""

    def __init__(self, leakage: float):
        super().__init__(f"state has leakage {leakage:.3g}; decode undefined")
        self.leakage = leakage


def _ket(*terms: tuple[complex, str]) -> np.ndarray:
    n = len(terms[0][1])
    v = np.zeros(2**n, dtype=complex)
    for c, label in terms:
        v[int(label, 2)] += c
    return v


def _pair(sign: int, odd: bool = False) -> list[tuple[int, str]]:
    """Two-particle factor ``|00> + sign|11>`` (or ``|01> + sign|10>`` when odd)."""
    a, b = ("01", "10") if odd else ("00", "11")
    return [(1, a), (sign, b)]


def _product(f: list[tuple[int, str]], g: list[tuple[int, str]], norm: float) -> np.ndarray:
    return _ket(*[(norm * c1 * c2, l1 + l2) for c1, l1 in f for c2, l2 in g])


@dataclass(frozen=True)
class Code:
    name: str
    codewords: tuple[PureState, ...]

    def __post_init__(self):
        gram = self.gram()
        if not np.allclose(gram, np.eye(len(self.codewords)), atol=ORTHO_TOL, rtol=0):
            raise ValueError(f"codewords of {self.name!r} are not orthonormal")

    @property
    def n_physical(self) -> int:
        return self.codewords[0].register.count

    @property
    def k(self) -> int:
        return len(self.codewords)

    @property
    def n_logical(self) -> int:
        return int(round(np.log2(self.k)))

    @property
    def basis(self) -> np.ndarray:
        """Codewords as columns, shape ``(2^n, k)``."""
        return np.stack([c.amplitudes for c in self.codewords], axis=1)

    @property
    def projector(self) -> np.ndarray:
        v = self.basis
        return v @ v.conj().T

    def gram(self) -> np.ndarray:
        v = np.stack([c.amplitudes for c in self.codewords], axis=1)
        return v.conj().T @ v


def make_code(name: str) -> Code:
    """Build one of the named codes with codewords exactly as written."""
    if name == "four_particle":
        words = [
            _product(_pair(+1), _pair(+1), 0.5),
            _product(_pair(-1), _pair(-1), 0.5),
        ]
    elif name == "four_particle_two_logical":
        words = [
            _product(_pair(+1), _pair(+1), 0.5),
            _product(_pair(-1), _pair(-1), 0.5),
            _product(_pair(+1, odd=True), _pair(+1, odd=True), 0.5),
            _product(_pair(-1, odd=True), _pair(-1, odd=True), 0.5),
        ]
    elif name == "two_particle_dephasing":
        s = 1 / np.sqrt(2)
        words = [_ket((s, "00"), (s, "11")), _ket((s, "01"), (s, "10"))]
    else:
        raise ValueError(f"unknown code {name!r}; known codes: {', '.join(CODE_NAMES)}")
    return Code(name, tuple(PureState.from_amplitudes(w) for w in words))


def code_from_vectors(vectors: Sequence[np.ndarray], name: str = "candidate") -> Code:
    return Code(name, tuple(PureState.from_amplitudes(v) for v in vectors))


def encode(code: Code, logical) -> PureState:
    """``sum_i a_i |i> -> sum_i a_i |i_E>``; ``logical`` is a PureState or amplitudes."""
    a = logical.amplitudes if isinstance(logical, PureState) else np.asarray(logical, dtype=complex)
    if a.shape[0] != code.k:
        raise ValueError(f"logical state has {a.shape[0]} amplitudes, code has {code.k} codewords")
    if abs(np.linalg.norm(a) - 1) > 1e-10:
        raise ValueError("logical state is not normalized")
    return PureState(QubitRegister.system(code.n_physical), code.basis @ a)


def decode(code: Code, physical) -> tuple[DensityMatrix, float]:
    """Logical density matrix ``<i_E|rho|j_E>`` (renormalized) and the leakage.

    Raises:
        LeakageError: if essentially no weight remains in the code space.
    """
    v = code.basis
    if physical.register.count != code.n_physical:
        raise ValueError("physical state has the wrong number of qubits")
    if isinstance(physical, PureState):
        c = v.conj().T @ physical.amplitudes
        rho_l = np.outer(c, c.conj())
        total = float(np.vdot(physical.amplitudes, physical.amplitudes).real)
    else:
        rho_l = v.conj().T @ physical.matrix @ v
        total = physical.trace
    inside = float(np.trace(rho_l).real)
    leakage = max(0.0, 1.0 - inside / total)
    if leakage > 1 - 1e-12:
        raise LeakageError(leakage)
    return DensityMatrix(QubitRegister.system(code.n_logical), rho_l / inside), leakage


def single_qubit_errors(n: int) -> list[tuple[str, int, np.ndarray]]:
    """All 3n single-qubit Paulis as ``(label, qubit, 2x2 matrix)``, sorted by label."""
    errs = [(f"{p}{q + 1}", q, PAULIS[p].matrix) for q in range(n) for p in "XYZ"]
    return sorted(errs, key=lambda e: e[0])


def apply_error(vec: np.ndarray, qubit: int, mat: np.ndarray, n: int) -> np.ndarray:
    return apply_matrix_vec(vec, mat, [qubit], n)


def _same_up_to_phase(a: np.ndarray, b: np.ndarray) -> bool:
    return abs(np.vdot(a, b)) > SAME_STATE


def _span_component(v: np.ndarray, basis: np.ndarray | None) -> float:
    if basis is None or basis.shape[1] == 0:
        return 0.0
    return float(np.linalg.norm(basis.conj().T @ v))


def _orthonormal(vectors: list[np.ndarray], n: int) -> np.ndarray:
    if not vectors:
        return np.zeros((2**n, 0), dtype=complex)
    u, sv, _ = np.linalg.svd(np.stack(vectors, axis=1), full_matrices=False)
    return u[:, sv > 1e-10]


@dataclass
class ErrorOrbitReport:
    source: int
    orbit: list[tuple[str, np.ndarray]]
    gram: np.ndarray
    distinct: list[str]
    orthogonal: list[str]
    new: list[str]
    overlaps_with_other_codewords: float

    @property
    def orthogonal_count(self) -> int:
        return len(self.orthogonal)

    @property
    def new_count(self) -> int:
        return len(self.new)

    def to_dict(self) -> dict:
        return {
            "source": self.source,
            "errors": [lbl for lbl, _ in self.orbit],
            "distinct": self.distinct,
            "orthogonal_count": self.orthogonal_count,
            "orthogonal": self.orthogonal,
            "new_count": self.new_count,
            "new": self.new,
            "overlaps_with_other_codewords": self.overlaps_with_other_codewords,
        }


def error_orbit(code: Code, index: int) -> ErrorOrbitReport:
    """States reachable from codeword ``index`` by one single-qubit Pauli.

    Duplicates (equal up to global phase) are merged. ``orthogonal`` is a
    greedy maximal mutually-orthogonal subset in error-label order. ``new``
    counts orbit states orthogonal to the code space and to the orbits of all
    lower-index codewords.
    """
    if not 0 <= index < code.k:
        raise IndexError(f"codeword index {index} out of range")
    n = code.n_physical
    src = code.codewords[index].amplitudes
    orbit = [(lbl, apply_error(src, q, m, n)) for lbl, q, m in single_qubit_errors(n)]
    vecs = np.stack([v for _, v in orbit], axis=1)
    gram = vecs.conj().T @ vecs

    distinct: list[tuple[str, np.ndarray]] = []
    for lbl, v in orbit:
        if not any(_same_up_to_phase(v, w) for _, w in distinct):
            distinct.append((lbl, v))

    orthogonal: list[tuple[str, np.ndarray]] = []
    for lbl, v in distinct:
        if all(abs(np.vdot(w, v)) < ZERO_OVERLAP for _, w in orthogonal):
            orthogonal.append((lbl, v))

    earlier = [c.amplitudes for c in code.codewords]
    for j in range(index):
        w_src = code.codewords[j].amplitudes
        earlier += [apply_error(w_src, q, m, n) for _, q, m in single_qubit_errors(n)]
    basis = _orthonormal(earlier, n)
    new: list[tuple[str, np.ndarray]] = []
    for lbl, v in orthogonal:
        if _span_component(v, basis) < ZERO_OVERLAP:
            new.append((lbl, v))

    others = [c.amplitudes for j, c in enumerate(code.codewords) if j != index]
    cross = max((abs(np.vdot(w, v)) for w in others for _, v in orbit), default=0.0)
    return ErrorOrbitReport(
        index,
        orbit,
        gram,
        [l for l, _ in distinct],
        [l for l, _ in orthogonal],
        [l for l, _ in new],
        float(cross),
    )


@dataclass
class PreventionReport:
    passed: bool
    worst_overlap: float
    witness: tuple[str, int, int] | None
    diagonal_violation: float
    diagonal_witness: str | None

    @property
    def detects_all(self) -> bool:
        """Every single-qubit error is either projected out or acts as a constant."""
        return self.passed and self.diagonal_violation < ZERO_OVERLAP

    def to_dict(self) -> dict:
        return {
            "pass": self.passed,
            "worst_overlap": self.worst_overlap,
            "witness": None if self.witness is None else {
                "error": self.witness[0], "from": self.witness[1], "to": self.witness[2],
            },
            "diagonal_violation": self.diagonal_violation,
            "diagonal_witness": self.diagonal_witness,
            "detects_all_single_errors": self.detects_all,
        }


def _as_matrix(codewords) -> np.ndarray:
    if isinstance(codewords, Code):
        return codewords.basis
    if isinstance(codewords, np.ndarray) and codewords.ndim == 2:
        return codewords.astype(complex)
    vs = [c.amplitudes if isinstance(c, PureState) else np.asarray(c, dtype=complex) for c in codewords]
    return np.stack(vs, axis=1)


def check_prevention_condition(codewords) -> PreventionReport:
    """Brute-force ``<j_E|E|i_E> = 0`` for all single-qubit Paulis and ``i != j``.

    Also reports how far ``<i_E|E|i_E>`` varies with ``i`` (an error acting as a
    nontrivial logical operation within the code space is invisible to the
    projection even if it never maps one codeword onto another).
    """
    v = _as_matrix(codewords)
    if not np.allclose(v.conj().T @ v, np.eye(v.shape[1]), atol=1e-10, rtol=0):
        raise ValueError("codewords are not orthonormal")
    n = int(round(np.log2(v.shape[0])))
    worst, witness = 0.0, None
    diag_worst, diag_witness = 0.0, None
    for lbl, q, m in single_qubit_errors(n):
        ev = np.stack([apply_error(v[:, i], q, m, n) for i in range(v.shape[1])], axis=1)
        block = v.conj().T @ ev  # block[j, i] = <j|E|i>
        off = block - np.diag(np.diag(block))
        j, i = np.unravel_index(np.argmax(np.abs(off)), off.shape)
        if abs(off[j, i]) > worst:
            worst, witness = float(abs(off[j, i])), (lbl, int(i), int(j))
        d = np.diag(block)
        spread = float(np.abs(d - d.mean()).max())
        if spread > diag_worst:
            diag_worst, diag_witness = spread, lbl
    passed = worst < ZERO_OVERLAP
    return PreventionReport(passed, worst, None if passed else witness, diag_worst, diag_witness)


def detection_violation(v: np.ndarray) -> float:
    """``max_E ||P E P - c_E P||`` over single-qubit Paulis (0 iff every error is detectable)."""
    n = int(round(np.log2(v.shape[0])))
    k = v.shape[1]
    worst = 0.0
    for _, q, m in single_qubit_errors(n):
        ev = np.stack([apply_error(v[:, i], q, m, n) for i in range(k)], axis=1)
        block = v.conj().T @ ev
        block = block - np.trace(block) / k * np.eye(k)
        worst = max(worst, float(np.linalg.norm(block, 2)))
    return worst


@dataclass
class SearchReport:
    trials: int
    seed: int
    min_violation: float
    best_candidate: np.ndarray
    repetition_violation: float
    repetition_pairwise_pass: bool
    polished_violation: float | None = None

    def to_dict(self) -> dict:
        return {
            "trials": self.trials,
            "seed": self.seed,
            "min_violation": self.min_violation,
            "polished_violation": self.polished_violation,
            "best_candidate": codewords_to_json(self.best_candidate.T),
            "repetition_code": {
                "pairwise_pass": self.repetition_pairwise_pass,
                "violation": self.repetition_violation,
            },
            "conclusion": "no valid three-qubit candidate found (evidence, not proof)"
            if min(self.min_violation, self.polished_violation or np.inf) > 1e-6
            else "candidate with near-zero violation found",
        }


def _full_paulis(n: int) -> np.ndarray:
    eye = np.eye(2**n, dtype=complex)
    mats = []
    for _, q, m in single_qubit_errors(n):
        mats.append(np.stack([apply_error(eye[:, j], q, m, n) for j in range(2**n)], axis=1))
    return np.stack(mats)


def _batch_violation(q: np.ndarray, paulis: np.ndarray) -> np.ndarray:
    """Vectorized :func:`detection_violation` for candidates ``q`` of shape ``(B, d, k)``."""
    k = q.shape[-1]
    blocks = np.einsum("bik,eij,bjl->bekl", q.conj(), paulis, q)
    tr = np.trace(blocks, axis1=-2, axis2=-1)[..., None, None] / k
    blocks = blocks - tr * np.eye(k)
    return np.linalg.norm(blocks, ord=2, axis=(-2, -1)).max(axis=1)


def _pair_from_params(x: np.ndarray) -> np.ndarray:
    a = (x[:16] + 1j * x[16:]).reshape(8, 2)
    q, _ = np.linalg.qr(a)
    return q


def search_three_qubit_codes(
    trials: int, seed: int = 0, polish: bool = True, batch: int = 4096, n_polish: int = 5
) -> SearchReport:
    """Randomized search for a two-codeword, three-qubit error-prevention code.

    Each candidate is a Haar-random orthonormal pair scored by
    :func:`detection_violation`. With ``polish`` the best sample is refined by
    local minimization of a smooth surrogate, starting from the ``n_polish``
    best samples; ``polished_violation`` is the best value seen overall. A positive minimum is evidence
    that no such code exists, not a proof.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    paulis = _full_paulis(3)
    best_v = np.inf
    pool: list[tuple[float, np.ndarray]] = []
    done = 0
    while done < trials:
        b = min(batch, trials - done)
        a = rng.normal(size=(b, 8, 2)) + 1j * rng.normal(size=(b, 8, 2))
        q, _ = np.linalg.qr(a)
        vals = _batch_violation(q, paulis)
        for i in np.argsort(vals)[:n_polish]:
            pool.append((float(vals[i]), q[i]))
        pool = sorted(pool, key=lambda t: t[0])[:n_polish]
        done += b
    best_v, best = pool[0]

    rep = np.zeros((8, 2), dtype=complex)
    rep[0, 0] = rep[7, 1] = 1.0
    rep_report = check_prevention_condition(rep)

    polished = None
    if polish:
        from scipy.optimize import minimize

        def surrogate(x):
            q = _pair_from_params(x)
            blocks = np.einsum("ik,eij,jl->ekl", q.conj(), paulis, q)
            blocks = blocks - np.trace(blocks, axis1=1, axis2=2)[:, None, None] / 2 * np.eye(2)
            return float(np.sum(np.abs(blocks) ** 2))

        polished = best_v
        for _, start in pool:
            x0 = np.concatenate([start.real.reshape(-1), start.imag.reshape(-1)])
            res = minimize(surrogate, x0, method="L-BFGS-B")
            cand = _pair_from_params(res.x)
            val = detection_violation(cand)
            if val < polished:
                polished, best = val, cand

    return SearchReport(
        trials, seed, best_v, best, detection_violation(rep), rep_report.passed, polished
    )


# -- JSON codeword format: one array per codeword of [re, im] pairs --------------

def codewords_from_json(text: str) -> list[np.ndarray]:
    data = json.loads(text)
    if isinstance(data, dict):
        data = data.get("codewords")
    if not isinstance(data, list) or not data:
        raise ValueError("expected a non-empty JSON array of codewords")
    out = []
    for w in data:
        arr = np.asarray(w, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise ValueError("each codeword must be a list of [re, im] pairs")
        v = arr[:, 0] + 1j * arr[:, 1]
        n = int(round(np.log2(v.shape[0])))
        if 2**n != v.shape[0]:
            raise ValueError(f"codeword length {v.shape[0]} is not a power of two")
        out.append(v)
    if len({v.shape[0] for v in out}) != 1:
        raise ValueError("codewords have different lengths")
    return out


def codewords_to_json(codewords) -> list:
    rows = []
    for w in codewords:
        a = w.amplitudes if isinstance(w, PureState) else np.asarray(w)
        rows.append([[float(z.real), float(z.imag)] for z in a])
    return rows


def tilde_basis_amplitudes(state: PureState) -> np.ndarray:
    """Amplitudes ``<~x1 ~x2 ...|psi>`` in the rotated local basis on every qubit."""
    from .kernel import H

    n = state.register.count
    v = state.amplitudes
    for q in range(n):
        v = apply_matrix_vec(v, H.matrix, [q], n)
    return v
