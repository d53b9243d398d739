import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sakrylov.fock import (
    FockState,
    Monomial,
    SymmetrySector,
    apply_monomial,
    build_fci_matrix,
    enumerate_sector,
    full_fock_basis,
    hamiltonian_from_json,
    hamiltonian_to_json,
    hermitize,
    load_hamiltonian,
    load_table_csv,
    save_hamiltonian,
    sign_brute_force,
    write_table_csv,
)


@st.composite
def monomial_and_state(draw, max_sp=10):
    n_sp = draw(st.integers(1, max_sp))
    orbs = st.integers(0, n_sp - 1)
    q = tuple(sorted(draw(st.sets(orbs, max_size=min(4, n_sp)))))
    p = tuple(sorted(draw(st.sets(orbs, max_size=min(4, n_sp)))))
    bits = draw(st.integers(0, (1 << n_sp) - 1))
    return Monomial(q, p, 1.0), FockState(bits, n_sp)


def test_fock_string_roundtrip():
    f = FockState.from_string("11000000")
    assert f.occupied == (0, 1) and f.bits == 0b11 and str(f) == "11000000"
    assert f.particle_number == 2


def test_fock_rejects_overflow():
    with pytest.raises(ValueError):
        FockState(0b100, 2)
    with pytest.raises(ValueError):
        FockState.from_orbitals([3], 3)


def test_monomial_requires_ascending():
    with pytest.raises(ValueError):
        Monomial((3, 2), (0, 1), 1.0)


def test_example_double_excitation():
    m = Monomial((2, 3), (0, 1), 1.0)
    sign, out = apply_monomial(m, FockState.from_string("11000000"))
    assert str(out) == "00110000" and sign == 1
    assert sign_brute_force(m, FockState.from_string("11000000")) == (sign, out)


def test_pauli_blocking():
    m = Monomial((2, 3), (0, 1), 1.0)
    assert apply_monomial(m, FockState.from_string("00000000")) is None
    assert apply_monomial(m, FockState.from_string("11100000")) is None


def test_single_hop_sign():
    # a+_2 a_0 |0,1> passes a_0 over nothing, then a+_2 over orbital 1
    sign, out = apply_monomial(Monomial((2,), (0,), 1.0), FockState.from_string("110"))
    assert (sign, str(out)) == (-1, "011")


@settings(max_examples=400, deadline=None)
@given(monomial_and_state())
def test_fast_sign_matches_brute_force(case):
    m, f = case
    assert apply_monomial(m, f) == sign_brute_force(m, f)


@settings(max_examples=200, deadline=None)
@given(monomial_and_state(max_sp=8))
def test_conjugate_inverts(case):
    m, f = case
    res = apply_monomial(m, f)
    if res is not None:
        back = apply_monomial(m.conjugate(), res[1])
        assert back == (res[0], f)


def test_hermitize_appends_conjugates():
    h = hermitize([((0,), (1,), 0.5 + 0.25j), ((0,), (0,), -1.0)], 2)
    assert h.d == 3 and h.d_pad == 4
    for j, k in enumerate(h.conjugate):
        assert h.monomials[k].key == h.monomials[j].conjugate().key
        assert h.monomials[k].coefficient == np.conj(h.monomials[j].coefficient)
    assert h.lam == 1.0


def test_hermitize_averages_near_conjugates():
    h = hermitize([((0,), (1,), 0.3), ((1,), (0,), 0.3 + 1e-7)], 2, atol=1e-5)
    assert h.monomials[0].coefficient == h.monomials[1].coefficient.conjugate()
    with pytest.raises(ValueError, match="not Hermitian"):
        hermitize([((0,), (1,), 0.3), ((1,), (0,), 0.4)], 2)


def test_hermitize_rejects_bad_terms():
    with pytest.raises(ValueError, match="duplicate"):
        hermitize([((0,), (1,), 1.0), ((0,), (1,), 1.0)], 2)
    with pytest.raises(ValueError, match="orbital"):
        hermitize([((0,), (5,), 1.0)], 2)
    with pytest.raises(ValueError, match="non-real"):
        hermitize([((0,), (0,), 1j)], 2)


def test_fci_matrix_is_hermitian_and_conserves_number():
    rng = np.random.default_rng(3)
    from oracles import random_two_body

    h = random_two_body(rng, 5, 12)
    basis = full_fock_basis(5)
    mat = build_fci_matrix(h, basis)
    np.testing.assert_allclose(mat, mat.conj().T, atol=1e-14)
    n = np.array([f.particle_number for f in basis])
    assert np.all(np.abs(mat[n[:, None] != n[None, :]]) == 0)


def test_enumerate_sector(m2):
    assert len(enumerate_sector(8, SymmetrySector(2))) == 28
    dims = [len(enumerate_sector(8, SymmetrySector(2, x), m2)) for x in (0, 4, 8, 12)]
    assert dims == [4, 3, 2, 1]
    basis = enumerate_sector(8, SymmetrySector(2, 0), m2)
    assert [f.bits for f in basis] == sorted(f.bits for f in basis)
    with pytest.raises(ValueError):
        enumerate_sector(8, SymmetrySector(2, 0))


def test_json_roundtrip(tmp_path, table_h):
    doc = hamiltonian_to_json(table_h)
    again = hamiltonian_from_json(doc)
    assert {m.key: m.coefficient for m in again.monomials} == {m.key: m.coefficient for m in table_h.monomials}
    save_hamiltonian(table_h, tmp_path / "h.json")
    assert load_hamiltonian(tmp_path / "h.json").d == table_h.d


def test_table_csv_roundtrip(tmp_path, table_h):
    write_table_csv(table_h, tmp_path / "t.csv")
    again = load_table_csv(tmp_path / "t.csv", 8)
    a = {m.key: m.coefficient for m in again.monomials}
    for m in table_h.monomials:
        assert a[m.key] == pytest.approx(m.coefficient, abs=1e-9)


def test_malformed_json():
    with pytest.raises(ValueError, match="malformed"):
        hamiltonian_from_json({"terms": []})
