"""Noise processes: slow entangling coupling, kicks, and gadget-coupling noise.

A slow-noise step entangles one system qubit with a fresh environment that
starts in ``|e> = |0...0>``::

    U |0>|e> = g1 |0>|e> + d1 |0>|e1> + d2 |1>|e2>
    U |1>|e> = g2 |1>|e> + d3 |1>|e3> + d4 |0>|e4>

with ``<e|e1> = <e|e3> = 0``. ``U = exp(-i eps H)`` for a seeded random
Hermitian ``H`` of unit spectral norm, so ``|d_j| <= eps`` and
``1 - |g_i| = O(eps^2)``.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .kernel import I2, PAULIS, Operator

KINDS = ("generic", "dephasing", "flip")
_KIND_ALIASES = {"dephasing-only": "dephasing", "flip-only": "flip"}

# largest per-step strength for which the slow-noise expansion is certified;
# with a unit-norm generator the gamma/delta bounds hold automatically below it
EPSILON_MAX = 0.1


@dataclass(frozen=True)
class CouplingSpec:
    """Parameters of one per-qubit slow-noise coupling."""

    epsilon: float
    kind: str = "generic"
    seed: int = 0
    env_dim: int = 2

    def __post_init__(self):
        kind = _KIND_ALIASES.get(self.kind, self.kind)
        if kind not in KINDS:
            raise ValueError(f"unknown coupling kind {self.kind!r}; expected one of {KINDS}")
        object.__setattr__(self, "kind", kind)
        if not self.epsilon >= 0:
            raise ValueError(f"epsilon must be >= 0, got {self.epsilon}")
        d = int(self.env_dim)
        if d < 2 or d & (d - 1):
            raise ValueError(f"env_dim must be a power of two >= 2, got {self.env_dim}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "CouplingSpec":
        return cls(
            epsilon=float(d.get("epsilon", 0.0)),
            kind=d.get("kind", "generic"),
            seed=int(d.get("seed", 0)),
            env_dim=int(d.get("env_dim", 2)),
        )

    def with_epsilon(self, epsilon: float) -> "CouplingSpec":
        return CouplingSpec(epsilon, self.kind, self.seed, self.env_dim)


@dataclass(frozen=True)
class Channel:
    """CPTP map given by Kraus operators; trace preservation checked here."""

    kraus: tuple[Operator, ...]
    label: str = ""

    def __post_init__(self):
        ks = tuple(k if isinstance(k, Operator) else Operator(k) for k in self.kraus)
        if not ks:
            raise ValueError("channel needs at least one Kraus operator")
        d = ks[0].matrix.shape[0]
        if any(k.matrix.shape != (d, d) for k in ks):
            raise ValueError("Kraus operators have inconsistent shapes")
        s = sum(k.matrix.conj().T @ k.matrix for k in ks)
        err = np.abs(s - np.eye(d)).max()
        if err > 1e-8:
            raise ValueError(f"Kraus set not trace preserving (max |sum K^dag K - I| = {err:.2e})")
        object.__setattr__(self, "kraus", ks)

    @property
    def arity(self) -> int:
        return self.kraus[0].arity

    @property
    def targets_arity(self) -> int:
        return self.arity

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        return sum(k.matrix @ rho @ k.matrix.conj().T for k in self.kraus)


def _random_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (a + a.conj().T) / 2


def _expi(h: np.ndarray, epsilon: float) -> np.ndarray:
    """``exp(-i eps h)`` for Hermitian ``h``."""
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * epsilon * w)) @ v.conj().T


def coupling_generator(spec: CouplingSpec) -> np.ndarray:
    """Seeded unit-norm Hermitian generator on (system qubit) x (environment)."""
    d = 2 * spec.env_dim
    rng = np.random.default_rng(spec.seed)
    h = _random_hermitian(d, rng)
    zs = np.kron(PAULIS["Z"].matrix, np.eye(spec.env_dim))
    if spec.kind == "dephasing":
        h = (h + zs @ h @ zs) / 2
    elif spec.kind == "flip":
        h = (h - zs @ h @ zs) / 2
    h = h - np.trace(h).real / d * np.eye(d)
    return h / np.linalg.norm(h, 2)


def coupling_coefficients(u: np.ndarray, env_dim: int = 2) -> dict:
    """Read off the gamma/delta coefficients of a joint (system x env) unitary.

    The environment starts in its first basis state ``|e>``.
    """
    u = np.asarray(u)
    d = env_dim
    out0 = u[:, 0]  # U|0>|e>
    out1 = u[:, d]  # U|1>|e>
    g1 = out0[0]
    g2 = out1[d]
    return {
        "gamma": (complex(g1), complex(g2)),
        "delta": (
            float(np.linalg.norm(out0[1:d])),
            float(np.linalg.norm(out0[d:])),
            float(np.linalg.norm(out1[d + 1:])),
            float(np.linalg.norm(out1[:d])),
        ),
    }


def _check_order_bounds(u: np.ndarray, epsilon: float, env_dim: int, what: str) -> None:
    c = coupling_coefficients(u, env_dim)
    gmin = min(abs(g) for g in c["gamma"])
    dmax = max(c["delta"])
    # 1e-12 slack absorbs rounding in the exponential at epsilon -> 0
    bad = gmin < 1 - epsilon**2 - 1e-12 or dmax > 2 * epsilon + 1e-12
    if bad or epsilon > EPSILON_MAX:
        raise ValueError(
            f"{what}: epsilon={epsilon} too large for the slow-noise form (max {EPSILON_MAX}) "
            f"(|gamma|min={gmin:.6f} < {1 - epsilon**2:.6f} or |delta|max={dmax:.6f} > {2 * epsilon:.6f})"
        )


def build_coupling_unitary(spec: CouplingSpec) -> Operator:
    """Step unitary ``exp(-i eps H)`` on the system qubit and its environment."""
    u = _expi(coupling_generator(spec), spec.epsilon)
    _check_order_bounds(u, spec.epsilon, spec.env_dim, "coupling")
    return Operator(u, f"U[{spec.kind},eps={spec.epsilon:g},seed={spec.seed}]", unitary=True)


def derive_channel(spec: CouplingSpec) -> Channel:
    """Trace out the environment: ``K_m = <m|_env U |e>_env``."""
    u = build_coupling_unitary(spec).matrix
    d = spec.env_dim
    # rows/cols indexed s*d + m
    u4 = u.reshape(2, d, 2, d)
    kraus = [Operator(u4[:, m, :, 0], f"K{m}") for m in range(d)]
    kraus = [k for k in kraus if np.abs(k.matrix).max() > 1e-14] or kraus[:1]
    return Channel(tuple(kraus), f"slow[{spec.kind},eps={spec.epsilon:g},seed={spec.seed}]")


def kick_noise(p: float, kind: str = "X") -> Channel:
    """Full-strength Pauli error with probability ``p``."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"kick probability must be in [0, 1], got {p}")
    if kind not in PAULIS:
        raise ValueError(f"kick kind must be one of X, Y, Z; got {kind!r}")
    e = PAULIS[kind]
    return Channel(
        (Operator(np.sqrt(1 - p) * I2.matrix, "sqrt(1-p) I"), Operator(np.sqrt(p) * e.matrix, f"sqrt(p) {kind}")),
        f"kick[{kind},p={p:g}]",
    )


def correlated_gadget_noise(spec: CouplingSpec) -> Operator:
    """Seeded two-qubit perturbation ``exp(-i eps H2)`` on (test, system)."""
    rng = np.random.default_rng(spec.seed)
    h = _random_hermitian(4, rng)
    h = h - np.trace(h).real / 4 * np.eye(4)
    h /= np.linalg.norm(h, 2)
    u = _expi(h, spec.epsilon)
    _check_order_bounds(u, spec.epsilon, 2, "gadget noise")
    return Operator(u, f"G[eps={spec.epsilon:g},seed={spec.seed}]", unitary=True)


def per_qubit_specs(base: CouplingSpec, n: int) -> list[CouplingSpec]:
    """Independent couplings for ``n`` qubits: each qubit gets its own generator."""
    seeds = np.random.SeedSequence(base.seed).spawn(n)
    return [
        CouplingSpec(base.epsilon, base.kind, int(s.generate_state(1)[0]), base.env_dim)
        for s in seeds
    ]


def channels_for(base: CouplingSpec, n: int) -> list[Channel]:
    return [derive_channel(s) for s in per_qubit_specs(base, n)]


def unitaries_for(base: CouplingSpec, n: int) -> list[Operator]:
    return [build_coupling_unitary(s) for s in per_qubit_specs(base, n)]


def compose(channels: Sequence[Channel]) -> Channel:
    """Sequential composition (first element applied first) of same-arity channels."""
    ks = [k.matrix for k in channels[0].kraus]
    for ch in channels[1:]:
        ks = [b.matrix @ a for a in ks for b in ch.kraus]
    return Channel(tuple(Operator(k) for k in ks), "+".join(c.label for c in channels))
