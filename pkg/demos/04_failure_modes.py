"""Where frequent testing stops helping: fast kicks, noisy tests, and the wrong noise."""

# %%
import warnings

from zenocode.experiments import ExperimentSpec, run_experiment

grid = {"N_grid": [8, 16, 32, 64, 128, 256], "thetaT": 0.3, "seeds": [1, 2, 3]}


def curve(res):
    return " ".join(f"{f:.4f}" for f in res.mean("fidelity"))


# %% Fast noise: a few full-strength kicks at fixed times; more tests do nothing
kicks = run_experiment(ExperimentSpec.from_dict({
    **grid, "code": "four_particle", "experiment": "fast_noise",
    "noise": {"type": "kick", "kind": "X", "p": 0.05, "schedule": "fixed_interval", "intervals": 4},
    "gadget": {"mode": "measure-postselect"},
}))
print("kick noise fidelity:", curve(kicks), " slope", round(kicks.slopes["infidelity"][0], 3))

# %% Kicks every round are worse: more rounds, more kicks
per_step = run_experiment(ExperimentSpec.from_dict({
    **grid, "code": "four_particle", "experiment": "fast_noise",
    "noise": {"type": "kick", "kind": "X", "p": 0.002, "schedule": "per_step"},
}))
print("per-round kicks:    ", curve(per_step))

# %% Noisy tests: every interaction adds a small correlated error, so there is a best N
for eps in (0.01, 0.02):
    res = run_experiment(ExperimentSpec.from_dict({
        **grid, "code": "four_particle", "experiment": "gadget_noise",
        "noise": {"type": "slow"}, "gadget": {"noise_epsilon": eps},
    }))
    print(f"gadget noise {eps}: {curve(res)}  best N = {res.extras['best_N']}")

# %% The two-particle code only guards phases; a flip maps one codeword onto the other
with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    flip = run_experiment(ExperimentSpec.from_dict({
        **grid, "code": "two_particle_dephasing", "experiment": "dephasing",
        "noise": {"type": "slow", "kind": "flip"}, "allow_non_dephasing": True,
    }))
print("flip noise on the phase code:", curve(flip))
