"""Code analysis: codewords, error orbits, and why three qubits fall short."""

# %%
import numpy as np

from zenocode.codes import (
    check_prevention_condition,
    decode,
    encode,
    error_orbit,
    make_code,
    search_three_qubit_codes,
    tilde_basis_amplitudes,
)

np.set_printoptions(precision=3, suppress=True)

# %% The four-particle code: two codewords built from Bell pairs
code = make_code("four_particle")
for i, w in enumerate(code.codewords):
    support = {format(j, "04b"): a.real for j, a in enumerate(w.amplitudes) if abs(a) > 0}
    print(f"|{i}_E> =", support)

# %% An equal superposition collapses onto |0000> and |1111>
psi = encode(code, [1 / np.sqrt(2), 1 / np.sqrt(2)])
print("nonzero amplitudes:", {format(j, "04b"): round(a.real, 4) for j, a in enumerate(psi.amplitudes) if abs(a) > 1e-12})

# %% Round trip and leakage
rho_l, leak = decode(code, psi)
print("decoded logical state:\n", rho_l.matrix, "\nleakage", leak)

# %% Single-qubit errors from each codeword
for i in range(code.k):
    rep = error_orbit(code, i)
    print(f"|{i}_E>: {len(rep.distinct)} distinct, {rep.orthogonal_count} orthogonal, {rep.new_count} new; "
          f"max overlap with the other codeword {rep.overlaps_with_other_codewords:.1e}")

# %% No single error links two codewords, for either four-particle code
for name in ("four_particle", "four_particle_two_logical", "two_particle_dephasing"):
    r = check_prevention_condition(make_code(name))
    print(f"{name:28s} pass={r.passed}  witness={r.witness}")

# %% The two-particle code is a phase code: in the rotated basis only |~0~0> and |~1~1> appear
deph = make_code("two_particle_dephasing")
amps = tilde_basis_amplitudes(encode(deph, [0.6, 0.8]))
print("rotated-basis amplitudes (00, 01, 10, 11):", amps.real)

# %% Three qubits: random search for a two-codeword code that survives every single error
rep = search_three_qubit_codes(20000, seed=1)
print(f"min violation over {rep.trials} samples: {rep.min_violation:.3f}, after local polish: {rep.polished_violation:.3f}")
print("repetition code passes the pairwise test:", rep.repetition_pairwise_pass,
      "but Z errors act inside it (violation", rep.repetition_violation, ")")
