"""Test-particle gadgets: parity checks that project onto the code space."""

# %%
import numpy as np

from zenocode.codes import make_code
from zenocode.gadgets import protocol_for, run_gadget
from zenocode.kernel import X, Z, PureState, apply_operator

code = make_code("four_particle")
proto = protocol_for(code)
for step in proto.steps:
    print(f"{step.basis:13s} parity over qubits {step.targets}")

# %% A codeword passes every step
res = run_gadget(code.codewords[0], proto)
print("codeword:", res.outcomes, "p =", res.probability)

# %% A bit flip on qubit 1 trips the first pair check; a sign flip trips the rotated check
rng = np.random.default_rng(0)
print("X1|0_E>:", run_gadget(apply_operator(code.codewords[0], X, [0]), proto, rng=rng).outcomes)
print("Z1|0_E>:", run_gadget(apply_operator(code.codewords[0], Z, [0]), proto, rng=rng).outcomes)

# %% Passing all steps is the same as projecting onto the code space
v = rng.normal(size=16) + 1j * rng.normal(size=16)
psi = PureState.from_amplitudes(v / np.linalg.norm(v))
res = run_gadget(psi, proto, branch="pass")
pv = code.projector @ psi.amplitudes
print("all-pass probability", res.probability, "vs |P psi|^2", np.vdot(pv, pv).real)
print("state difference", np.abs(res.state.amplitudes - pv / np.linalg.norm(pv)).max())

# %% Nobody needs to look: tracing the test particle out leaves the same system state
a = run_gadget(psi.to_density(), protocol_for(code, "measure-nonselective")).state.matrix
b = run_gadget(psi.to_density(), protocol_for(code, "couple-only")).state.matrix
print("nonselective vs couple-only:", np.abs(a - b).max())

# %% Random test-particle states also work, as long as they are not flip eigenstates
rand = protocol_for(code, test_init="random", test_particles=3)
print("random tests on a codeword:", run_gadget(code.codewords[1], rand, rng=rng, branch="pass").probability)
