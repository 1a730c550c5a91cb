import json
import warnings

import numpy as np
import pytest

from zenocode.experiments import (
    CSV_COLUMNS,
    ConfigError,
    ExperimentSpec,
    NoiseSpec,
    fit_loglog_slope,
    load_config,
    logical_state,
    run_dephasing_code,
    run_experiment,
    run_fast_noise_failure,
    run_gadget_noise_failure,
    run_unprotected_baseline,
    run_zeno_sweep,
)
from zenocode.kernel import X, apply_operator
from zenocode.codes import make_code

SMALL = {"N_grid": [8, 16, 32, 64], "seeds": [1, 2]}


def spec(**kw):
    d = {"code": "four_particle", "noise": {"type": "slow", "kind": "generic"}, **SMALL}
    d.update(kw)
    return ExperimentSpec.from_dict(d)


class TestFit:
    @pytest.mark.parametrize("power", [-1, -2, 0])
    def test_exact_powers(self, power):
        pts = [(n, 3.0 * n**power) for n in (8, 16, 32, 64)]
        slope, err = fit_loglog_slope(pts)
        assert slope == pytest.approx(power, abs=1e-12)
        assert err < 1e-10

    def test_too_few_points(self):
        with pytest.raises(ValueError):
            fit_loglog_slope([(1, 1.0), (2, 0.5)])

    def test_nonpositive(self):
        with pytest.raises(ValueError):
            fit_loglog_slope([(1, 1.0), (2, 0.0), (4, 0.2)])


class TestSpecValidation:
    @pytest.mark.parametrize("field,value", [
        ("N_grid", [0]), ("N_grid", [8, 8]), ("N_grid", [16, 8]), ("N_grid", []),
        ("thetaT", 0), ("seeds", []), ("code", "steane"), ("experiment", "nope"),
        ("simulation", "mps"), ("trajectories", 0), ("logical_input", "minus"),
    ])
    def test_rejected(self, field, value):
        with pytest.raises(ConfigError) as err:
            spec(**{field: value})
        assert err.value.field == field

    def test_unknown_field_named(self):
        with pytest.raises(ConfigError) as err:
            spec(colour="red")
        assert err.value.field == "colour"

    def test_theta_and_T(self):
        s = spec(theta=0.1, T=3.0)
        assert s.thetaT == pytest.approx(0.3)
        with pytest.raises(ConfigError):
            spec(theta=0.1)

    def test_epsilon_rule(self):
        assert spec(thetaT=0.4).epsilon(16) == pytest.approx(0.025)

    def test_too_coarse_grid_rejected(self):
        with pytest.raises(ConfigError) as err:
            spec(thetaT=1.0, N_grid=[2, 4, 8])
        assert err.value.field == "thetaT"

    @pytest.mark.parametrize("noise,field", [
        ({"type": "loud"}, "noise.type"), ({"type": "kick", "p": 2}, "noise.p"),
        ({"type": "kick", "kind": "W"}, "noise.kind"), ({"type": "slow", "kind": "amplitude"}, "noise.kind"),
        ({"type": "kick", "schedule": "random"}, "noise.schedule"),
    ])
    def test_noise_fields(self, noise, field):
        with pytest.raises(ConfigError) as err:
            spec(noise=noise)
        assert err.value.field == field

    @pytest.mark.parametrize("gadget,field", [
        ({"mode": "peek"}, "gadget.mode"), ({"test_particles": 0}, "gadget.test_particles"),
        ({"noise_epsilon": -1}, "gadget.noise_epsilon"), ({"noise_epsilon": 0.5}, "gadget.noise_epsilon"),
    ])
    def test_gadget_fields(self, gadget, field):
        with pytest.raises(ConfigError) as err:
            spec(gadget=gadget)
        assert err.value.field == field

    def test_dict_round_trip(self):
        s = spec(gadget={"mode": "couple-only", "test_init": "random", "test_particles": 2})
        assert ExperimentSpec.from_dict(json.loads(json.dumps(s.to_dict()))) == s

    def test_load_config(self, tmp_path):
        p = tmp_path / "c.json"
        p.write_text(json.dumps(spec().to_dict()))
        assert load_config(p) == spec()
        p.write_text("{not json")
        with pytest.raises(ConfigError):
            load_config(p)


class TestLogicalInput:
    def test_presets(self):
        np.testing.assert_allclose(logical_state("plus", 2).amplitudes, [2**-0.5, 2**-0.5])
        assert logical_state("zero", 4).amplitudes.shape == (4,)

    def test_explicit(self):
        np.testing.assert_allclose(logical_state([[0.6, 0], [0, 0.8]], 2).amplitudes, [0.6, 0.8j])

    def test_explicit_wrong_length(self):
        with pytest.raises(ValueError):
            logical_state([[1, 0]], 2)


class TestArmConsistency:
    @pytest.mark.parametrize("experiment,code", [
        ("zeno", "four_particle"), ("baseline", "four_particle"), ("fast_noise", "four_particle"),
        ("gadget_noise", "four_particle"), ("dephasing", "two_particle_dephasing"),
    ])
    def test_noiseless_is_perfect(self, experiment, code):
        res = run_experiment(spec(experiment=experiment, code=code, noise={"type": "none"}, N_grid=[1, 4, 16]))
        for r in res.records:
            assert r.fidelity == pytest.approx(1, abs=1e-12)
            assert r.leakage == pytest.approx(0, abs=1e-12)
            assert r.detect_prob == pytest.approx(0, abs=1e-12)

    def test_kick_zero_probability(self):
        res = run_fast_noise_failure(spec(noise={"type": "kick", "p": 0.0}))
        assert np.allclose(res.mean("fidelity"), 1, atol=1e-12)

    def test_gadget_noise_zero_reduces_to_zeno(self):
        a = run_zeno_sweep(spec(gadget={"mode": "measure-postselect"}))
        b = run_gadget_noise_failure(spec(gadget={"mode": "measure-postselect", "noise_epsilon": 0.0}))
        np.testing.assert_allclose(a.mean("fidelity"), b.mean("fidelity"), atol=1e-14)


class TestZeno:
    def test_postselect_scaling(self):
        res = run_zeno_sweep(spec(gadget={"mode": "measure-postselect"}))
        d = res.mean("detect_prob")
        assert np.all(np.abs(d[:-1] / d[1:] - 2) < 0.3)
        inf = res.mean("infidelity")
        assert np.all(np.abs(inf[:-1] / inf[1:] - 4) < 0.8)
        assert -1.2 <= res.slopes["detect_prob"][0] <= -0.8
        assert -2.3 <= res.slopes["infidelity"][0] <= -1.7

    def test_probabilities_in_range(self):
        res = run_zeno_sweep(spec())
        assert len(res.records) == 8
        for r in res.records:
            for v in (r.fidelity, r.leakage, r.detect_prob, r.allpass_prob):
                assert -1e-9 <= v <= 1 + 1e-9

    def test_modes_agree(self):
        a = run_zeno_sweep(spec(gadget={"mode": "measure-nonselective"}))
        b = run_zeno_sweep(spec(gadget={"mode": "couple-only"}))
        for ra, rb in zip(a.records, b.records):
            assert abs(ra.fidelity - rb.fidelity) < 1e-8

    def test_deterministic(self):
        s = spec(gadget={"mode": "measure-nonselective", "test_init": "random"})
        assert run_zeno_sweep(s).to_csv() == run_zeno_sweep(s).to_csv()

    def test_csv_layout(self):
        text = run_zeno_sweep(spec()).to_csv().splitlines()
        assert text[0] == ",".join(CSV_COLUMNS)
        assert len(text) == 1 + 8
        assert [tuple(map(int, line.split(",")[:2])) for line in text[1:]] == [(n, s) for n in (8, 16, 32, 64) for s in (1, 2)]

    def test_random_test_particles_still_protect(self):
        res = run_zeno_sweep(spec(gadget={"test_init": "random", "test_particles": 2}))
        assert -1.2 <= res.slopes["infidelity"][0] <= -0.8

    def test_two_logical_code(self):
        res = run_zeno_sweep(spec(code="four_particle_two_logical", gadget={"mode": "measure-postselect"}, seeds=[1]))
        assert -2.3 <= res.slopes["infidelity"][0] <= -1.7

    def test_overflow_rejected(self):
        big = spec(simulation="trajectory", noise={"type": "slow", "env_dim": 512}, trajectories=1)
        with pytest.raises(OverflowError):
            run_zeno_sweep(big)


class TestBaseline:
    def test_total_noise_independent_of_N(self):
        res = run_unprotected_baseline(spec(thetaT=0.5))
        assert abs(res.slopes["infidelity"][0]) < 0.1
        assert all(r.detect_prob == 0 and r.allpass_prob == 1 for r in res.records)

    def test_second_order_in_total_rotation(self):
        hi = run_unprotected_baseline(spec(thetaT=0.5)).mean("infidelity")
        lo = run_unprotected_baseline(spec(thetaT=0.25)).mean("infidelity")
        assert np.all(hi > 0) and np.all(hi < 0.5)
        assert np.all((hi / lo > 3) & (hi / lo < 4.5))

    def test_protection_beats_baseline(self):
        prot = run_zeno_sweep(spec()).by_seed("fidelity")
        base = run_unprotected_baseline(spec()).by_seed("fidelity")
        for s in (1, 2):
            assert prot[s][-1] >= base[s][-1]


class TestFastNoise:
    def test_flat_in_N(self):
        res = run_fast_noise_failure(spec(noise={"type": "kick", "kind": "X", "p": 0.05}))
        assert abs(res.slopes["infidelity"][0]) <= 0.2
        assert res.extras["fidelity_gain_largest_vs_smallest_N"] <= 1e-3

    def test_per_step_kicks_get_worse(self):
        res = run_fast_noise_failure(spec(noise={"type": "kick", "kind": "X", "p": 0.01, "schedule": "per_step"}))
        f = res.mean("fidelity")
        assert np.all(np.diff(f) < 0)

    def test_needs_kick_noise(self):
        with pytest.raises(ConfigError):
            run_fast_noise_failure(spec())


class TestGadgetNoise:
    def test_interior_maximum_and_shift(self):
        grid = {"N_grid": [4, 8, 16, 32, 64, 128], "seeds": [1]}
        a = run_gadget_noise_failure(spec(gadget={"noise_epsilon": 0.01}, **grid))
        b = run_gadget_noise_failure(spec(gadget={"noise_epsilon": 0.02}, **grid))
        assert a.extras["interior_maximum"]
        assert b.extras["best_N"] < a.extras["best_N"]

    def test_needs_slow_noise(self):
        with pytest.raises(ConfigError):
            run_gadget_noise_failure(spec(noise={"type": "kick", "p": 0.1}))


class TestDephasing:
    def test_dephasing_protected(self):
        res = run_dephasing_code(spec(code="two_particle_dephasing", noise={"type": "slow", "kind": "dephasing"},
                                      gadget={"mode": "measure-postselect"}))
        assert -2.4 <= res.slopes["infidelity"][0] <= -1.6
        assert res.slopes["round_error"][0] == pytest.approx(-2, abs=0.2)

    def test_flip_requires_override(self):
        with pytest.raises(ConfigError) as err:
            run_dephasing_code(spec(code="two_particle_dephasing", noise={"type": "slow", "kind": "flip"}))
        assert err.value.field == "noise.kind"

    def test_flip_override_warns_and_fails_to_protect(self):
        s = spec(code="two_particle_dephasing", noise={"type": "slow", "kind": "flip"}, allow_non_dephasing=True,
                 gadget={"mode": "measure-postselect"})
        with pytest.warns(UserWarning):
            res = run_dephasing_code(s)
        assert res.extras["fidelity_gain_largest_vs_smallest_N"] <= 0.01

    def test_flip_maps_codewords_onto_each_other(self):
        c = make_code("two_particle_dephasing")
        out = apply_operator(c.codewords[0], X, [0])
        assert abs(np.vdot(c.codewords[1].amplitudes, out.amplitudes)) == pytest.approx(1)

    def test_wrong_code(self):
        with pytest.raises(ConfigError):
            run_dephasing_code(spec(noise={"type": "slow", "kind": "dephasing"}))


class TestTrajectories:
    def test_agrees_with_density(self):
        # N=8 keeps leakage frequent enough for a meaningful standard error
        base = {"N_grid": [8], "seeds": [2], "gadget": {"mode": "measure-nonselective"}}
        dens = run_zeno_sweep(spec(**base)).records[0]
        traj = run_zeno_sweep(spec(simulation="trajectory", trajectories=1000, **base)).records[0]
        assert traj.fidelity_stderr > 0
        assert abs(traj.fidelity - dens.fidelity) <= 3 * traj.fidelity_stderr

    def test_postselected_trajectories(self):
        base = {"N_grid": [16], "seeds": [2], "gadget": {"mode": "measure-postselect"}}
        dens = run_zeno_sweep(spec(**base)).records[0]
        traj = run_zeno_sweep(spec(simulation="trajectory", trajectories=300, **base)).records[0]
        assert abs(traj.detect_prob - dens.detect_prob) < 0.1
        assert traj.fidelity > 0.99

    def test_seeded(self):
        s = spec(simulation="trajectory", trajectories=20, N_grid=[8], seeds=[1])
        assert run_zeno_sweep(s).to_csv() == run_zeno_sweep(s).to_csv()


def test_written_outputs(tmp_path):
    res = run_zeno_sweep(spec(seeds=[1]))
    csv_path, json_path = res.write(tmp_path, "z")
    summary = json.loads(open(json_path).read())
    assert set(summary["slopes"]) >= {"detect_prob", "infidelity"}
    assert summary["config"]["N_grid"] == [8, 16, 32, 64]
    assert "version" in summary
    assert open(csv_path).read() == res.to_csv()


def test_thread_env(monkeypatch):
    monkeypatch.setenv("ZENOCODE_THREADS", "2")
    s = spec(seeds=[1, 2])
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        par = run_zeno_sweep(s).to_csv()
    monkeypatch.setenv("ZENOCODE_THREADS", "1")
    assert run_zeno_sweep(s).to_csv() == par


def test_noise_spec_defaults():
    n = NoiseSpec()
    assert n.type == "slow" and n.env_dim == 2
