import json
from functools import reduce

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zenocode.codes import (
    CODE_NAMES,
    LeakageError,
    check_prevention_condition,
    code_from_vectors,
    codewords_from_json,
    codewords_to_json,
    decode,
    detection_violation,
    encode,
    error_orbit,
    make_code,
    search_three_qubit_codes,
    tilde_basis_amplitudes,
)
from zenocode.kernel import X, DensityMatrix, PureState, apply_operator

S2 = 1 / np.sqrt(2)
HAD = np.array([[1, 1], [1, -1]]) / np.sqrt(2)


def ket(label):
    v = np.zeros(2 ** len(label), dtype=complex)
    v[int(label, 2)] = 1
    return v


def kron(*vs):
    return reduce(np.kron, vs)


# two-particle factors written out by hand
PHI_P = ket("00") + ket("11")
PHI_M = ket("00") - ket("11")
PSI_P = ket("01") + ket("10")
PSI_M = ket("01") - ket("10")


class TestMakeCode:
    def test_four_particle_amplitudes(self):
        c = make_code("four_particle")
        assert c.codewords[0].amplitudes[0b0000] == pytest.approx(0.5)
        np.testing.assert_allclose(c.codewords[0].amplitudes, kron(PHI_P, PHI_P) / 2)
        np.testing.assert_allclose(c.codewords[1].amplitudes, kron(PHI_M, PHI_M) / 2)
        assert abs(np.vdot(c.codewords[0].amplitudes, c.codewords[1].amplitudes)) == 0

    def test_two_logical_amplitudes(self):
        c = make_code("four_particle_two_logical")
        for word, (f, g) in zip(c.codewords, [(PHI_P, PHI_P), (PHI_M, PHI_M), (PSI_P, PSI_P), (PSI_M, PSI_M)]):
            np.testing.assert_allclose(word.amplitudes, kron(f, g) / 2)

    def test_dephasing_amplitudes(self):
        c = make_code("two_particle_dephasing")
        assert c.codewords[1].amplitudes[0b01] == pytest.approx(S2)
        np.testing.assert_allclose(c.codewords[0].amplitudes, PHI_P * S2)

    @pytest.mark.parametrize("name", CODE_NAMES)
    def test_projector(self, name):
        c = make_code(name)
        p = c.projector
        assert np.abs(p @ p - p).max() < 1e-12
        for w in c.codewords:
            assert np.abs(p @ w.amplitudes - w.amplitudes).max() < 1e-12

    def test_unknown(self):
        with pytest.raises(ValueError):
            make_code("five_particle")

    def test_non_orthonormal_rejected(self):
        with pytest.raises(ValueError):
            code_from_vectors([ket("00"), (ket("00") + ket("01")) * S2])


class TestEncodeDecode:
    def test_basis_logical(self):
        c = make_code("four_particle")
        np.testing.assert_allclose(encode(c, PureState.basis("0")).amplitudes, c.codewords[0].amplitudes)

    def test_equal_superposition_by_hand(self):
        # (PHI_P PHI_P + PHI_M PHI_M) / (2 sqrt2): cross terms cancel, leaving |0000> and |1111>
        out = encode(make_code("four_particle"), [S2, S2]).amplitudes
        expected = (ket("0000") + ket("1111")) * S2
        np.testing.assert_allclose(out, expected, atol=1e-15)
        assert abs(np.linalg.norm(out) - 1) < 1e-12

    def test_two_logical_eleven(self):
        c = make_code("four_particle_two_logical")
        np.testing.assert_allclose(encode(c, PureState.basis("11")).amplitudes, kron(PSI_M, PSI_M) / 2)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            encode(make_code("four_particle"), PureState.basis("00"))

    def test_unnormalized(self):
        with pytest.raises(ValueError):
            encode(make_code("four_particle"), [1, 1])

    @pytest.mark.parametrize("name", CODE_NAMES)
    def test_round_trip_random(self, name):
        c = make_code(name)
        rng = np.random.default_rng(17)
        for _ in range(100):
            a = rng.normal(size=c.k) + 1j * rng.normal(size=c.k)
            a /= np.linalg.norm(a)
            rho_l, leak = decode(c, encode(c, a))
            assert leak < 1e-12
            assert np.abs(rho_l.matrix - np.outer(a, a.conj())).max() < 1e-12

    def test_flipped_codeword_fully_leaks(self):
        c = make_code("four_particle")
        flipped = apply_operator(c.codewords[0], X, [0])
        # oracle: both inner products vanish
        assert max(abs(np.vdot(w.amplitudes, flipped.amplitudes)) for w in c.codewords) == 0
        with pytest.raises(LeakageError) as err:
            decode(c, flipped)
        assert err.value.leakage == pytest.approx(1)

    def test_maximally_mixed_leakage(self):
        _, leak = decode(make_code("four_particle"), DensityMatrix.maximally_mixed(4))
        assert leak == pytest.approx(1 - 2 / 16, abs=1e-12)

    def test_partial_leakage_renormalizes(self):
        c = make_code("four_particle")
        v = np.sqrt(0.9) * c.codewords[1].amplitudes + np.sqrt(0.1) * ket("0001")
        rho_l, leak = decode(c, PureState.from_amplitudes(v))
        assert leak == pytest.approx(0.1)
        np.testing.assert_allclose(rho_l.matrix, np.diag([0, 1]), atol=1e-12)


class TestTildeForms:
    def test_four_coefficient_state_in_rotated_basis(self):
        a, b, c, d = np.array([0.1 + 0.2j, -0.5, 0.3j, 0.4]) / np.linalg.norm([0.1 + 0.2j, -0.5, 0.3j, 0.4])
        state = (a * kron(PHI_P, PHI_P) + b * kron(PHI_M, PHI_M) + c * kron(PHI_P, PHI_M) + d * kron(PHI_M, PHI_P)) / 2
        # oracle: H on all four qubits via explicit Kronecker products
        rotated = kron(HAD, HAD, HAD, HAD) @ state
        pattern = (a * kron(PHI_P, PHI_P) + b * kron(PSI_P, PSI_P) + c * kron(PHI_P, PSI_P) + d * kron(PSI_P, PHI_P)) / 2
        assert np.abs(rotated - pattern).max() < 1e-12
        assert np.abs(tilde_basis_amplitudes(PureState.from_amplitudes(state)) - pattern).max() < 1e-12

    def test_dephasing_code_in_rotated_basis(self):
        rng = np.random.default_rng(3)
        code = make_code("two_particle_dephasing")
        for _ in range(10):
            v = rng.normal(size=2) + 1j * rng.normal(size=2)
            v /= np.linalg.norm(v)
            amps = tilde_basis_amplitudes(encode(code, v))
            # only |~0~0> and |~1~1> survive
            assert abs(amps[0b01]) < 1e-12 and abs(amps[0b10]) < 1e-12
            np.testing.assert_allclose(kron(HAD, HAD) @ encode(code, v).amplitudes, amps, atol=1e-12)


class TestErrorOrbit:
    def test_zero_codeword_counts(self):
        rep = error_orbit(make_code("four_particle"), 0)
        assert len(rep.orbit) == 12
        assert rep.orthogonal_count == 6

    def test_one_codeword_new_states(self):
        assert error_orbit(make_code("four_particle"), 1).new_count == 4

    def test_counts_by_brute_force(self):
        # oracle: rank of the orbit span, and the rank it adds on top of codewords + first orbit
        c = make_code("four_particle")
        paulis = {"X": np.array([[0, 1], [1, 0]]), "Y": np.array([[0, -1j], [1j, 0]]), "Z": np.diag([1, -1])}

        def orbit(w):
            out = []
            for q in range(4):
                for m in paulis.values():
                    ops = [np.eye(2)] * 4
                    ops[q] = m
                    out.append(kron(*ops) @ w)
            return np.stack(out, axis=1)

        o0 = orbit(c.codewords[0].amplitudes)
        o1 = orbit(c.codewords[1].amplitudes)
        base = np.concatenate([c.basis, o0], axis=1)
        assert np.linalg.matrix_rank(o0, tol=1e-10) == 6
        added = np.linalg.matrix_rank(np.concatenate([base, o1], axis=1), tol=1e-10) - np.linalg.matrix_rank(base, tol=1e-10)
        assert added == 4

    @pytest.mark.parametrize("name", CODE_NAMES)
    def test_gram_well_formed(self, name):
        c = make_code(name)
        for i in range(c.k):
            g = error_orbit(c, i).gram
            assert np.abs(g - g.conj().T).max() < 1e-12
            assert np.abs(np.diag(g) - 1).max() < 1e-12

    @pytest.mark.parametrize("name", ["four_particle", "four_particle_two_logical"])
    def test_no_cross_codeword_overlap(self, name):
        c = make_code(name)
        for i in range(c.k):
            assert error_orbit(c, i).overlaps_with_other_codewords < 1e-12

    def test_projector_annihilates_new_states(self):
        c = make_code("four_particle")
        for i in range(c.k):
            rep = error_orbit(c, i)
            states = dict(rep.orbit)
            for lbl in rep.new:
                assert np.abs(c.projector @ states[lbl]).max() < 1e-12

    def test_bad_index(self):
        with pytest.raises(IndexError):
            error_orbit(make_code("four_particle"), 2)


class TestPreventionCondition:
    @pytest.mark.parametrize("name", ["four_particle", "four_particle_two_logical"])
    def test_four_particle_codes_pass(self, name):
        rep = check_prevention_condition(make_code(name))
        assert rep.passed and rep.witness is None

    def test_dephasing_code_fails_on_flip(self):
        rep = check_prevention_condition(make_code("two_particle_dephasing"))
        assert not rep.passed
        assert rep.witness[0][0] == "X"
        assert rep.worst_overlap == pytest.approx(1)

    def test_repetition_pair_passes_pairwise_only(self):
        # oracle: <111|E|000> vanishes for every single-qubit Pauli
        rep = check_prevention_condition([ket("000"), ket("111")])
        assert rep.passed
        # but Z errors act as a logical sign flip inside the code space
        assert rep.diagonal_violation == pytest.approx(1)
        assert not rep.detects_all

    def test_non_orthonormal(self):
        with pytest.raises(ValueError):
            check_prevention_condition([ket("00"), ket("00")])

    @settings(max_examples=20, deadline=None)
    @given(seed=st.integers(0, 2**31 - 1))
    def test_random_three_qubit_pairs_fail(self, seed):
        rng = np.random.default_rng(seed)
        q, _ = np.linalg.qr(rng.normal(size=(8, 2)) + 1j * rng.normal(size=(8, 2)))
        assert not check_prevention_condition(q).passed


class TestSearch:
    def test_zero_trials_rejected(self):
        with pytest.raises(ValueError):
            search_three_qubit_codes(0)

    def test_repetition_code_recorded(self):
        rep = search_three_qubit_codes(200, seed=1, polish=False)
        assert rep.repetition_pairwise_pass
        assert rep.repetition_violation == pytest.approx(1)
        assert "evidence" in rep.to_dict()["conclusion"]

    def test_min_violation_positive_and_reproducible(self):
        a = search_three_qubit_codes(3000, seed=5)
        b = search_three_qubit_codes(3000, seed=5)
        assert a.min_violation > 0.1
        assert a.polished_violation <= a.min_violation
        assert a.polished_violation > 0.1
        assert a.min_violation == b.min_violation
        assert detection_violation(a.best_candidate) == pytest.approx(a.polished_violation)

    def test_four_particle_code_has_zero_violation(self):
        assert detection_violation(make_code("four_particle").basis) < 1e-12


class TestJson:
    def test_round_trip(self):
        words = [w.amplitudes for w in make_code("four_particle").codewords]
        back = codewords_from_json(json.dumps(codewords_to_json(words)))
        for a, b in zip(words, back):
            np.testing.assert_array_equal(a, b)

    def test_object_form(self):
        text = json.dumps({"codewords": [[[1, 0], [0, 0]], [[0, 0], [0, 1]]]})
        a, b = codewords_from_json(text)
        np.testing.assert_array_equal(b, [0, 1j])

    @pytest.mark.parametrize("text", ["[]", "[[1, 2]]", "[[[1, 0], [0, 0], [0, 0]]]", "{", "[[[1,0],[0,0]], [[1,0],[0,0],[0,0],[0,0]]]"])
    def test_malformed(self, text):
        with pytest.raises(ValueError):
            codewords_from_json(text)
