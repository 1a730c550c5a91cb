"""Monte Carlo trajectories with explicit environment qubits vs the density matrix."""

# %%
from dataclasses import replace

from zenocode.experiments import ExperimentSpec, run_experiment

spec = ExperimentSpec.from_dict({
    "code": "four_particle",
    "noise": {"type": "slow", "kind": "generic"},
    "gadget": {"mode": "measure-nonselective"},
    "N_grid": [16, 32],
    "seeds": [1],
    "simulation": "trajectory",
    "trajectories": 500,
})

# %% Each trajectory couples every qubit to a fresh environment qubit, samples it,
# then samples the test particles; the density-matrix run averages all of that exactly
traj = run_experiment(spec)
dens = run_experiment(replace(spec, simulation="density"))
for t, d in zip(traj.records, dens.records):
    z = (t.fidelity - d.fidelity) / t.fidelity_stderr
    print(f"N={t.N:3d}  trajectories {t.fidelity:.4f} +/- {t.fidelity_stderr:.4f}   density {d.fidelity:.4f}   ({z:+.2f} se)")
