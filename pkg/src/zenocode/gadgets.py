"""Test-particle parity gadgets.

A fresh test qubit visits the step's system qubits one after another and is
flipped (NOT) once for every visited qubit found in ``|1>`` (computational
step) or ``|~1>`` (tilde step). The test ends in its initial state exactly
when the visited qubits have even parity in that basis.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .kernel import (
    CNOT,
    H,
    DensityMatrix,
    Operator,
    PureState,
    QubitRegister,
    apply_operator,
    measure_and_discard,
    partial_trace_array,
)
from .noise import CouplingSpec, correlated_gadget_noise

BASES = ("computational", "tilde")
MODES = ("measure-postselect", "measure-nonselective", "couple-only")
TEST_INITS = ("fixed", "random")

# test states this close to an eigenvector of the flip never get correlated
FLIP_EIGEN_EXCLUSION = 1e-6


@dataclass(frozen=True)
class GadgetStep:
    basis: str
    targets: tuple[int, ...]
    description: str = ""

    def __post_init__(self):
        if self.basis not in BASES:
            raise ValueError(f"unknown basis {self.basis!r}")
        t = tuple(int(q) for q in self.targets)
        if not t or len(set(t)) != len(t):
            raise ValueError(f"step targets must be nonempty and distinct, got {t}")
        object.__setattr__(self, "targets", t)

    def to_dict(self) -> dict:
        d = {"basis": self.basis, "targets": list(self.targets)}
        if self.description:
            d["description"] = self.description
        return d


@dataclass(frozen=True)
class GadgetProtocol:
    steps: tuple[GadgetStep, ...]
    mode: str = "measure-postselect"
    test_init: str = "fixed"
    test_particles: int = 1
    noise: CouplingSpec | None = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown gadget mode {self.mode!r}; expected one of {MODES}")
        if self.test_init not in TEST_INITS:
            raise ValueError(f"unknown test_init {self.test_init!r}")
        if self.test_particles < 1:
            raise ValueError("test_particles must be >= 1")
        object.__setattr__(self, "steps", tuple(self.steps))

    @cached_property
    def noise_operator(self) -> Operator | None:
        if self.noise is None or self.noise.epsilon == 0:
            return None
        return correlated_gadget_noise(self.noise)

    def with_(self, **changes) -> "GadgetProtocol":
        d = {f: getattr(self, f) for f in ("steps", "mode", "test_init", "test_particles", "noise")}
        d.update(changes)
        return GadgetProtocol(**d)

    def to_dict(self) -> dict:
        return {
            "steps": [s.to_dict() for s in self.steps],
            "mode": self.mode,
            "test_init": self.test_init,
            "test_particles": self.test_particles,
            "noise": None if self.noise is None else self.noise.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GadgetProtocol":
        noise = d.get("noise")
        return cls(
            tuple(GadgetStep(s["basis"], tuple(s["targets"]), s.get("description", "")) for s in d["steps"]),
            d.get("mode", "measure-postselect"),
            d.get("test_init", "fixed"),
            int(d.get("test_particles", 1)),
            None if noise is None else CouplingSpec.from_dict(noise),
        )


def protocol_for(code, mode: str = "measure-postselect", **kw) -> GadgetProtocol:
    """The test sequence that projects onto the named code's subspace."""
    name = getattr(code, "name", code)
    if name == "four_particle":
        steps = (
            GadgetStep("computational", (0, 1), "parity of particles 1,2"),
            GadgetStep("computational", (2, 3), "parity of particles 3,4"),
            GadgetStep("tilde", (0, 1, 2, 3), "tilde parity of all four"),
        )
    elif name == "four_particle_two_logical":
        steps = (
            GadgetStep("computational", (0, 1, 2, 3), "parity of all four"),
            GadgetStep("tilde", (0, 1, 2, 3), "tilde parity of all four"),
        )
    elif name == "two_particle_dephasing":
        steps = (GadgetStep("tilde", (0, 1), "tilde parity of the pair"),)
    else:
        raise ValueError(f"no protocol for code {name!r}")
    return GadgetProtocol(steps, mode, **kw)


def parity_interaction(state, test: int, system: int, basis: str = "computational"):
    """Flip ``test`` iff ``system`` is in ``|1>`` (or ``|~1>`` for the tilde basis)."""
    if test == system:
        raise ValueError("test and system qubit must differ")
    if basis not in BASES:
        raise ValueError(f"unknown basis {basis!r}")
    if basis == "tilde":
        state = apply_operator(state, H, [system])
    state = apply_operator(state, CNOT, [system, test])
    if basis == "tilde":
        state = apply_operator(state, H, [system])
    return state


def step_unitary(step: GadgetStep, n: int, noise: Operator | None = None) -> np.ndarray:
    """Full unitary of one step on ``n`` system qubits plus the test qubit (index ``n``)."""
    for q in step.targets:
        if not 0 <= q < n:
            raise ValueError(f"step target {q} outside {n}-qubit system")
    reg = QubitRegister(n + 1, ("system",) * n + ("test",))
    eye = np.eye(2 ** (n + 1), dtype=complex)
    cols = []
    for j in range(2 ** (n + 1)):
        s = PureState(reg, eye[:, j])
        for q in step.targets:
            s = parity_interaction(s, n, q, step.basis)
            if noise is not None:
                s = apply_operator(s, noise, [n, q])
        cols.append(s.amplitudes)
    return np.stack(cols, axis=1)


def sample_test_state(rng: np.random.Generator) -> np.ndarray:
    """Uniform random single-qubit state away from the flip eigenvectors."""
    while True:
        v = rng.normal(size=2) + 1j * rng.normal(size=2)
        v /= np.linalg.norm(v)
        plus = abs(v[0] + v[1]) ** 2 / 2
        if FLIP_EIGEN_EXCLUSION < plus < 1 - FLIP_EIGEN_EXCLUSION:
            return v


@dataclass
class GadgetResult:
    state: PureState | DensityMatrix
    outcomes: list[bool] | None
    probability: float


class CompiledProtocol:
    """A protocol bound to a register size, with step unitaries precomputed."""

    def __init__(self, protocol: GadgetProtocol, n: int):
        self.protocol = protocol
        self.n = n
        self.unitaries = [step_unitary(s, n, protocol.noise_operator) for s in protocol.steps]
        self._zero = np.array([1.0, 0.0], dtype=complex)

    def _tests(self, rng):
        reps = self.protocol.test_particles
        for u in self.unitaries:
            for _ in range(reps):
                if self.protocol.test_init == "random":
                    if rng is None:
                        raise ValueError("random test particles need an rng")
                    t = sample_test_state(rng)
                else:
                    t = self._zero
                yield u, t

    def run_density(self, rho: np.ndarray, rng=None, postselect: bool | None = None):
        """Apply all steps to a system density matrix.

        Returns ``(rho, prob)``. In post-selected mode ``rho`` is the
        renormalized all-pass branch and ``prob`` its probability. Otherwise
        ``rho`` is the unconditional state and ``prob`` is the product of the
        per-step pass weights of that state (equal to the all-pass probability
        only for single-step protocols).
        """
        mode = self.protocol.mode
        if postselect is None:
            postselect = mode == "measure-postselect"
        n, d = self.n, 2**self.n
        prob = 1.0
        for u, t in self._tests(rng):
            ext = np.kron(rho, np.outer(t, t.conj()))
            ext = u @ ext @ u.conj().T
            r4 = ext.reshape(d, 2, d, 2)
            passed = np.einsum("iajb,a,b->ij", r4, t.conj(), t)
            p = float(np.trace(passed).real)
            if postselect:
                if p < 1e-14:
                    raise ValueError("post-selection on a zero-probability branch")
                rho = passed / p
                prob *= p
                continue
            prob *= p
            if mode == "measure-nonselective":
                proj = np.outer(t, t.conj())
                comp = np.eye(2) - proj
                big_p = np.kron(np.eye(d), proj)
                big_c = np.kron(np.eye(d), comp)
                ext = big_p @ ext @ big_p + big_c @ ext @ big_c
            rho = partial_trace_array(ext, list(range(n)), n + 1)
        return rho, prob

    def run_pure(self, psi: np.ndarray, rng=None, force_pass: bool = False):
        """Trajectory version: sample (or force) every test outcome.

        Returns ``(psi, outcomes, probability of the realised branch)``;
        ``psi`` is ``None`` if post-selection rejected the run.
        """
        n = self.n
        reg = QubitRegister(n + 1, ("system",) * n + ("test",))
        outcomes, prob = [], 1.0
        for u, t in self._tests(rng):
            ext = u @ np.outer(psi, t).reshape(-1)
            basis = np.array([t, [-np.conj(t[1]), np.conj(t[0])]]).T
            if force_pass:
                comp = ext.reshape(-1, 2) @ t.conj()
                p = float(np.vdot(comp, comp).real)
                if p < 1e-14:
                    raise ValueError("post-selection on a zero-probability branch")
                psi = comp / np.sqrt(p)
                outcomes.append(True)
                prob *= p
                continue
            k, red = measure_and_discard(PureState(reg, ext), n, basis, rng)
            psi = red.amplitudes
            outcomes.append(k == 0)
            if k != 0 and self.protocol.mode == "measure-postselect":
                return None, outcomes, prob
        return psi, outcomes, prob


def run_gadget(state, protocol: GadgetProtocol, rng: np.random.Generator | None = None,
               branch: str | None = None) -> GadgetResult:
    """Run every step of ``protocol`` on ``state``.

    ``branch="pass"`` forces the all-pass branch (deterministic post-selection).
    Density-matrix input, or pure input without an ``rng``, is evolved
    deterministically; pure input with an ``rng`` samples test outcomes.
    """
    n = state.register.count
    compiled = CompiledProtocol(protocol, n)
    reg = QubitRegister.system(n)
    mode = protocol.mode
    if isinstance(state, PureState):
        force = branch == "pass" or (rng is None and mode == "measure-postselect")
        if force or rng is not None:
            psi, outcomes, prob = compiled.run_pure(state.amplitudes, rng, force_pass=force)
            if psi is None:
                return GadgetResult(None, outcomes, 0.0)
            return GadgetResult(PureState(reg, psi), None if mode == "couple-only" else outcomes, prob)
    rho = state.to_density().matrix if isinstance(state, PureState) else state.matrix
    postselect = mode == "measure-postselect" or branch == "pass"
    rho, prob = compiled.run_density(rho, rng, postselect=postselect)
    outcomes = [True] * len(compiled.unitaries) if postselect else None
    return GadgetResult(DensityMatrix(reg, rho), outcomes, prob)
