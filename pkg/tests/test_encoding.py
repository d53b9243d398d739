import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sakrylov.encoding import (
    WalkOperator,
    apply_reflection_Pi,
    apply_swap_S,
    build_isometry,
    build_oracle_OF,
    build_oracle_OH,
    gate_count_report,
    layout_for,
    occupancy_windows,
    pairing_family_hamiltonian,
    verify_block_encoding,
    window_sign,
)
from sakrylov.fock import (
    FockState,
    Monomial,
    SqHamiltonian,
    SymmetrySector,
    apply_monomial,
    enumerate_sector,
    hermitize,
    sign_brute_force,
)
from sakrylov.statevector import RegisterLayout, SparseState, run_circuit
from oracles import random_two_body


def _double_exc():
    return hermitize([((2, 3), (0, 1), 0.7)], 8)


def _prepared(h, layout, bits, j=0):
    return SparseState.basis(layout, id=j, s=bits, e_p=1, e_q=1)


def test_windows():
    assert occupancy_windows([0, 1]) == []
    assert occupancy_windows([1, 4]) == [2, 3]
    assert occupancy_windows([3]) == [0, 1, 2]
    assert occupancy_windows([1, 3, 6]) == [0, 4, 5]


def test_OF_double_excitation():
    h = _double_exc()
    lay = layout_for(h)
    out = run_circuit(_prepared(h, lay, 0b11), build_oracle_OF(h, layout=lay))
    (key,) = out.keys.tolist()
    reg = lay.decode(key)
    assert reg["cp"] == FockState.from_string("00110000").bits
    assert reg["e_p"] == 0 and reg["e_q"] == 0 and reg["s"] == 0b11


def test_OF_invalid_annihilation_keeps_flag():
    h = _double_exc()
    lay = layout_for(h)
    reg = lay.decode(run_circuit(_prepared(h, lay, 0), build_oracle_OF(h, layout=lay)).keys[0])
    assert reg["e_p"] == 1


def test_OF_padded_index_is_identity():
    h = hermitize([((2, 3), (0, 1), 0.7), ((0,), (0,), 0.1)], 8)
    assert h.d == 3 and h.d_pad == 4
    lay = layout_for(h)
    reg = lay.decode(run_circuit(_prepared(h, lay, 0b11, j=3), build_oracle_OF(h, layout=lay)).keys[0])
    assert reg["cp"] == 0b11 and reg["e_p"] == 1 and reg["e_q"] == 1


def test_OF_rejects_out_of_range_orbital():
    h = SqHamiltonian((Monomial((5,), (0,), 1.0),), (0,), 2, 1.0, 1)
    with pytest.raises(ValueError, match="orbital"):
        build_oracle_OF(h)


def test_OH_rejects_lambda_violation():
    h = SqHamiltonian((Monomial((0,), (0,), 2.0),), (0,), 1, 1.0, 1)
    with pytest.raises(ValueError, match="rho"):
        build_oracle_OH(h)


def _forward_components(h, bits):
    walk = WalkOperator.compile(h)
    return walk, walk.forward_state(FockState(bits, h.n_sp))


def test_OH_diagonal_amplitude():
    h = hermitize([((0,), (0,), 0.3)], 1, lam=0.5)
    walk, out = _forward_components(h, 1)
    lay = walk.layout
    rho = 0.6
    assert out.amplitude(lay.encode(s=1, cp=1, me=0)) == pytest.approx(rho)
    assert out.amplitude(lay.encode(s=1, cp=1, me=1)) == pytest.approx(math.sqrt(1 - rho**2))


def test_OH_negative_coefficient_phase():
    h = hermitize([((0,), (0,), -0.3)], 1)
    assert h.theta(0) == math.pi
    walk, out = _forward_components(h, 1)
    assert out.amplitude(walk.layout.encode(s=1, cp=1, me=0)) == pytest.approx(-1.0)


def test_forward_state_structure(table_h):
    h = table_h
    walk, out = _forward_components(h, 0b11)
    lay = walk.layout
    f = FockState(0b11, 8)
    assert out.norm() == pytest.approx(1.0, abs=1e-12)
    seen = 0
    for j, m in enumerate(h.monomials):
        res = apply_monomial(m, f)
        if res is None:
            continue
        seen += 1
        sign, g = res
        want = sign * h.rho(j) * np.exp(1j * h.theta(j)) / math.sqrt(h.d_pad)
        assert out.amplitude(lay.encode(id=j, s=f.bits, cp=g.bits, me=0)) == pytest.approx(want, abs=1e-14)
    assert seen > 0
    assert all(lay.decode(k)["zeta"] == 0 for k in out.keys.tolist())


def test_sign_flip_reaches_amplitude(table_h):
    h = table_h
    for j, m in enumerate(h.monomials):
        for f in enumerate_sector(8, SymmetrySector(3)):  # two-particle signs are all +1
            res = sign_brute_force(m, f)
            if res is not None and res[0] == -1:
                walk, out = _forward_components(h, f.bits)
                amp = out.amplitude(walk.layout.encode(id=j, s=f.bits, cp=res[1].bits, me=0))
                assert amp == pytest.approx(-m.coefficient / h.lam / math.sqrt(h.d_pad), abs=1e-14)
                return
    pytest.fail("no negative-sign case found")


def test_backward_state_me_zero(table_h):
    walk = WalkOperator.compile(table_h)
    out = walk.backward_state(FockState(0b11, 8))
    assert out.norm() == pytest.approx(1.0, abs=1e-12)
    assert all(walk.layout.decode(k)["me"] == 0 for k in out.keys.tolist())


def test_zero_monomial_hamiltonian():
    h = hermitize([], 2)
    walk = WalkOperator.compile(h)
    out = walk.forward_state(FockState(0b01, 2))
    reg = walk.layout.decode(out.keys[0])
    assert reg["e_p"] == 1 and reg["e_q"] == 1
    assert walk.block_element(FockState(0b01, 2), FockState(0b01, 2)) == 0


def test_swap_examples():
    lay = RegisterLayout(0, 2)
    out = apply_swap_S(SparseState.basis(lay, s=0b01, cp=0b10))
    assert lay.decode(out.keys[0])["s"] == 0b10 and lay.decode(out.keys[0])["cp"] == 0b01
    out = apply_swap_S(SparseState.basis(lay, e_p=1))
    reg = lay.decode(out.keys[0])
    assert reg["e_p"] == 0 and reg["b_p"] == 1


def test_reflection():
    lay = RegisterLayout(1, 2)
    s = SparseState.from_dict(lay, {lay.encode(s=1): 0.6, lay.encode(s=1, me=1): 0.8})
    out = apply_reflection_Pi(s)
    assert out.amplitude(lay.encode(s=1)) == 0.6 and out.amplitude(lay.encode(s=1, me=1)) == -0.8
    back = apply_reflection_Pi(out)
    np.testing.assert_array_equal(back.amps, s.amps)


def test_one_orbital_toy():
    eps = -0.37
    walk = WalkOperator.compile(hermitize([((0,), (0,), eps)], 1))
    assert walk.hamiltonian.lam == abs(eps)
    one, zero = FockState(1, 1), FockState(0, 1)
    assert walk.block_element(one, one) == pytest.approx(eps / (1 * abs(eps)))
    assert walk.block_element(zero, zero) == 0


def test_two_monomial_hop():
    # H = c a+_0 a_1 + c* a+_1 a_0 ; <G|H|F> with F = |01>, G = |10>
    c = 0.4 - 0.3j
    walk = WalkOperator.compile(hermitize([((0,), (1,), c)], 2))
    f, g = FockState.from_string("01"), FockState.from_string("10")
    assert walk.block_element(g, f) == pytest.approx(c / (2 * abs(c)), abs=1e-15)
    assert walk.block_element(f, g) == pytest.approx(np.conj(c) / (2 * abs(c)), abs=1e-15)
    assert walk.block_element(f, f) == pytest.approx(0, abs=1e-15)


def test_dagger_walk_is_adjoint_block():
    h = random_two_body(np.random.default_rng(11), 4, 8)
    walk = WalkOperator.compile(h)
    basis = enumerate_sector(4, SymmetrySector(2))
    for f in basis:
        out = walk.apply_U_H(walk.fock_state(f), dagger=True)
        for g in basis:
            want = np.conj(walk.block_element(f, g))
            assert out.amplitude(walk.layout.encode(s=g.bits)) == pytest.approx(want, abs=1e-14)


@settings(max_examples=12, deadline=None)
@given(st.integers(2, 5), st.integers(1, 10), st.integers(0, 2**31))
def test_block_encoding_random(n_sp, n_terms, seed):
    h = random_two_body(np.random.default_rng(seed), n_sp, n_terms)
    dev, _ = verify_block_encoding(WalkOperator.compile(h))
    assert dev <= 1e-10


def test_fault_injection_is_located(table_h):
    basis = enumerate_sector(8, SymmetrySector(2))
    bad = table_h.with_coefficient(0, table_h.monomials[0].coefficient + 0.5)
    dev, (g, f) = verify_block_encoding(WalkOperator.compile(bad), basis, reference=table_h)
    assert dev == pytest.approx(0.5, abs=1e-9)
    m = table_h.monomials[0]
    assert apply_monomial(m, f)[1] == g


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 8), st.data())
def test_window_sign_matches_brute(n_sp, data):
    q = tuple(sorted(data.draw(st.sets(st.integers(0, n_sp - 1), max_size=3))))
    p = tuple(sorted(data.draw(st.sets(st.integers(0, n_sp - 1), max_size=3))))
    f = FockState(data.draw(st.integers(0, (1 << n_sp) - 1)), n_sp)
    m = Monomial(q, p, 1.0)
    assert window_sign(m, f) == sign_brute_force(m, f)


def test_circuit_text_export_is_deterministic():
    h = _double_exc()
    a = build_isometry(h, "forward").to_text()
    assert a == build_isometry(h, "forward").to_text()
    assert a.splitlines()[0].split() == ["X", str(layout_for(h).qubit("e_p")), "-", "-", "0"]


def test_gate_count_report():
    rep = gate_count_report([pairing_family_hamiltonian(n) for n in (4, 6, 8)])
    rows = rep["rows"]
    for key in ("o_f", "o_h", "u_h"):
        vals = [getattr(r, key) for r in rows]
        assert vals == sorted(vals) and len(set(vals)) == 3
    fit = rep["fit"]
    assert abs(fit["o_f_vs_d"] - 1) <= 0.5
    assert abs(fit["o_h_vs_d_nsp"] - 1) <= 0.5
    assert abs(fit["u_h_vs_d_nsp"] - 1) <= 0.5
    assert gate_count_report([pairing_family_hamiltonian(4)])["fit"] is None
    with pytest.raises(ValueError):
        gate_count_report([])


def test_u_h_exponent_approaches_prediction():
    fits = [gate_count_report([pairing_family_hamiltonian(n) for n in fam])["fit"]
            for fam in ((4, 6, 8), (8, 10, 12), (12, 16, 20))]
    exps = [f["u_h_vs_nsp"] for f in fits]
    assert exps == sorted(exps)
    assert abs(exps[1] - fits[1]["u_h_predicted_vs_nsp"]) <= 0.5
