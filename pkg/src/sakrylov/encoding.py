"""Walk-state block encoding of a second-quantized Hamiltonian.

Each monomial ``j`` compiles to a block of gates controlled on the index
register holding ``j``. The enumerator oracle writes ``b+_Q b_P |F>`` into the
copy register and records validity in two error flags; the matrix-element
oracle attaches the fermionic sign and ``rho_j exp(i theta_j)``. With
``U_H = T_b^+ S T_f``,

    <G,0| U_H |F,0> = <G|H|F> / (D_pad * lam).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .fock import FockState, Monomial, SqHamiltonian, full_fock_basis, build_fci_matrix
from .statevector import (
    Gate,
    GateCircuit,
    RegisterLayout,
    RunStats,
    SparseState,
    inner_product,
    run_circuit,
)


def layout_for(h: SqHamiltonian) -> RegisterLayout:
    return RegisterLayout(h.n_index_qubits, h.n_sp)


def _index_controls(layout: RegisterLayout, j: int):
    qubits = tuple(layout.qubit("id", i) for i in range(layout.n_index))
    return qubits, tuple((j >> i) & 1 for i in range(layout.n_index))


def occupancy_windows(indices: Sequence[int]) -> list[int]:
    """Orbitals whose occupancy parity gives the sign of ``a_w ... a_v a_u``.

    Operators are paired from the left of the string, i.e. from the highest
    index down; each pair contributes the orbitals strictly between its two
    indices. With an odd count the lowest index is left over and contributes
    every orbital below it.
    """
    idx = sorted(indices)
    out: list[int] = []
    k = len(idx) - 1
    while k >= 1:
        out.extend(range(idx[k - 1] + 1, idx[k]))
        k -= 2
    if k == 0:
        out.extend(range(0, idx[0]))
    return sorted(out)


def window_sign(m: Monomial, f: FockState):
    """Sign of ``b+_Q b_P |f>`` from occupancy windows, or ``None`` if invalid."""
    pmask = sum(1 << p for p in m.annihilations)
    qmask = sum(1 << q for q in m.creations)
    if f.bits & pmask != pmask or (f.bits & ~pmask) & qmask:
        return None
    out = (f.bits & ~pmask) | qmask
    n = sum(f.bits >> k & 1 for k in occupancy_windows(m.annihilations))
    n += sum(out >> k & 1 for k in occupancy_windows(m.creations))
    return (-1 if n & 1 else 1), FockState(out, f.n_sp)


def _check_orbitals(h: SqHamiltonian, monomials):
    for j, m in enumerate(monomials):
        if m.max_orbital >= h.n_sp:
            raise ValueError(f"monomial {j} references orbital {m.max_orbital} >= n_sp={h.n_sp}")


def build_oracle_OF(h: SqHamiltonian, conjugate: bool = False, layout: RegisterLayout | None = None) -> GateCircuit:
    """Enumerator oracle; ``conjugate=True`` compiles it from ``H+``.

    Expects ``e_p = e_q = 1`` on entry. Padded indices ``j >= D`` get no gates,
    so their flags stay raised.
    """
    layout = layout or layout_for(h)
    monomials = h.dagger() if conjugate else h.monomials
    _check_orbitals(h, monomials)
    circ = GateCircuit(label="O_F^+" if conjugate else "O_F")
    s = [layout.qubit("s", p) for p in range(h.n_sp)]
    cp = [layout.qubit("cp", p) for p in range(h.n_sp)]
    e_p, e_q = layout.qubit("e_p"), layout.qubit("e_q")
    for p in range(h.n_sp):
        circ.append(Gate("X", (cp[p],), (s[p],)))
    for j, m in enumerate(monomials):
        idc, idp = _index_controls(layout, j)
        circ.append(Gate("X", (e_p,), idc + tuple(cp[p] for p in m.annihilations),
                         idp + (1,) * len(m.annihilations)))
        for p in m.annihilations:
            circ.append(Gate("X", (cp[p],), idc, idp))
        circ.append(Gate("X", (e_q,), idc + tuple(cp[q] for q in m.creations),
                         idp + (0,) * len(m.creations)))
        for q in m.creations:
            circ.append(Gate("X", (cp[q],), idc, idp))
    return circ


def sign_block(m: Monomial, layout: RegisterLayout, j: int = 0) -> list[Gate]:
    """CNOTs accumulating the sign parity of monomial ``j`` into ``zeta``."""
    idc, idp = _index_controls(layout, j)
    zeta = layout.qubit("zeta")
    gates = [Gate("X", (zeta,), idc + (layout.qubit("s", k),), idp + (1,))
             for k in occupancy_windows(m.annihilations)]
    gates += [Gate("X", (zeta,), idc + (layout.qubit("cp", k),), idp + (1,))
              for k in occupancy_windows(m.creations)]
    return gates


def build_oracle_OH(h: SqHamiltonian, layout: RegisterLayout | None = None) -> GateCircuit:
    """Matrix-element oracle: sign via ``zeta``, then ``exp(i theta_j)|rho_j>`` on ``me``."""
    layout = layout or layout_for(h)
    _check_orbitals(h, h.monomials)
    circ = GateCircuit(label="O_H")
    zeta, me = layout.qubit("zeta"), layout.qubit("me")
    for j, m in enumerate(h.monomials):
        rho = h.rho(j)
        if rho > 1 + 1e-12:
            raise ValueError(f"monomial {j}: rho={rho} exceeds 1 (lam too small)")
        rho = min(rho, 1.0)
        idc, idp = _index_controls(layout, j)
        block = sign_block(m, layout, j)
        if block:
            circ.extend(block)
            circ.append(Gate("Z", (zeta,), idc, idp))
            circ.extend(reversed(block))
        theta = h.theta(j)
        if theta != 0.0:
            circ.append(Gate("P0", (me,), idc, idp, theta))
        circ.append(Gate("RY", (me,), idc, idp, 2.0 * math.acos(rho)))
    return circ


def build_isometry(h: SqHamiltonian, direction: str = "forward", layout: RegisterLayout | None = None) -> GateCircuit:
    """``T_f`` (``"forward"``) or ``T_b`` (``"backward"``)."""
    if direction not in ("forward", "backward"):
        raise ValueError("direction must be 'forward' or 'backward'")
    layout = layout or layout_for(h)
    circ = GateCircuit(label="T_f" if direction == "forward" else "T_b")
    circ.append(Gate("X", (layout.qubit("e_p"),)))
    circ.append(Gate("X", (layout.qubit("e_q"),)))
    for i in range(layout.n_index):
        circ.append(Gate("H", (layout.qubit("id", i),)))
    if direction == "forward":
        circ.extend(build_oracle_OF(h, False, layout).gates)
        circ.extend(build_oracle_OH(h, layout).gates)
    else:
        circ.extend(build_oracle_OF(h, True, layout).gates)
    return circ


def swap_circuit(layout: RegisterLayout) -> GateCircuit:
    """``S``: s <-> cp qubit-wise, e_p <-> b_p, e_q <-> b_q."""
    circ = GateCircuit(label="S")
    for p in range(layout.n_sp):
        circ.append(Gate("SWAP", (layout.qubit("s", p), layout.qubit("cp", p))))
    circ.append(Gate("SWAP", (layout.qubit("e_p"), layout.qubit("b_p"))))
    circ.append(Gate("SWAP", (layout.qubit("e_q"), layout.qubit("b_q"))))
    return circ


def apply_swap_S(state: SparseState) -> SparseState:
    return run_circuit(state, swap_circuit(state.layout))


def apply_reflection_Pi(state: SparseState) -> SparseState:
    """``+1`` on components with every ancilla qubit zero, ``-1`` otherwise."""
    amps = state.amps.copy()
    amps[(state.keys & np.int64(state.layout.ancilla_mask)) != 0] *= -1
    return SparseState(state.keys.copy(), amps, state.layout, canonical=True)


@dataclass
class WalkOperator:
    """Compiled ``T_f``, ``T_b`` and ``S`` for one Hamiltonian."""

    hamiltonian: SqHamiltonian
    layout: RegisterLayout
    circuit_Tf: GateCircuit
    circuit_Tb: GateCircuit
    circuit_S: GateCircuit
    stats: RunStats = field(default_factory=RunStats)

    @classmethod
    def compile(cls, h: SqHamiltonian) -> "WalkOperator":
        layout = layout_for(h)
        return cls(h, layout, build_isometry(h, "forward", layout),
                   build_isometry(h, "backward", layout), swap_circuit(layout))

    @property
    def scale(self) -> float:
        return self.hamiltonian.scale

    @property
    def _inverses(self):
        cache = self.__dict__.get("_inv_cache")
        if cache is None:
            cache = (self.circuit_Tf.inverse(), self.circuit_Tb.inverse())
            self.__dict__["_inv_cache"] = cache
        return cache

    def fock_state(self, f: FockState | int) -> SparseState:
        """``|F>_s |0>_a``."""
        bits = f.bits if isinstance(f, FockState) else int(f)
        return SparseState.basis(self.layout, s=bits)

    def forward_state(self, f) -> SparseState:
        return run_circuit(self.fock_state(f), self.circuit_Tf, self.stats)

    def backward_state(self, g) -> SparseState:
        return run_circuit(self.fock_state(g), self.circuit_Tb, self.stats)

    def apply_U_H(self, state: SparseState, dagger: bool = False) -> SparseState:
        tf_inv, tb_inv = self._inverses
        if dagger:
            state = run_circuit(state, self.circuit_Tb, self.stats)
            state = run_circuit(state, self.circuit_S, self.stats)
            return run_circuit(state, tf_inv, self.stats)
        state = run_circuit(state, self.circuit_Tf, self.stats)
        state = run_circuit(state, self.circuit_S, self.stats)
        return run_circuit(state, tb_inv, self.stats)

    def apply_reflection_Pi(self, state: SparseState) -> SparseState:
        return apply_reflection_Pi(state)

    def block_element(self, g, f) -> complex:
        """``<G,0| U_H |F,0>`` (scaled units)."""
        return inner_product(self.fock_state(g), self.apply_U_H(self.fock_state(f)))

    def block_column(self, f, basis: Sequence[FockState]) -> np.ndarray:
        """``<G,0|U_H|F,0>`` for every ``G`` in ``basis`` from one circuit run."""
        out = self.apply_U_H(self.fock_state(f))
        return np.array([out.amplitude(self.layout.encode(s=g.bits)) for g in basis])

    def block_matrix(self, basis: Sequence[FockState]) -> np.ndarray:
        return np.column_stack([self.block_column(f, basis) for f in basis]) if basis else np.zeros((0, 0))

    def gate_counts(self) -> dict[str, int]:
        return {
            "O_F": len(build_oracle_OF(self.hamiltonian, False, self.layout)),
            "O_H": len(build_oracle_OH(self.hamiltonian, self.layout)),
            "T_f": len(self.circuit_Tf),
            "T_b": len(self.circuit_Tb),
            "S": len(self.circuit_S),
            "U_H": len(self.circuit_Tf) + len(self.circuit_S) + len(self.circuit_Tb),
        }


def verify_block_encoding(walk: WalkOperator, basis: Sequence[FockState] | None = None,
                          reference: SqHamiltonian | None = None):
    """Max ``|<G,0|U_H|F,0> * D_pad * lam - <G|H|F>|`` over ``basis`` and its location.

    ``reference`` supplies ``H`` for the explicit matrix when it should differ
    from the compiled one (fault injection).
    """
    h = walk.hamiltonian
    if basis is None:
        basis = full_fock_basis(h.n_sp)
    fci = build_fci_matrix(reference if reference is not None else h, basis)
    enc = walk.block_matrix(basis) * h.scale
    if len(basis) == 0:
        return 0.0, None
    dev = np.abs(enc - fci)
    row, col = np.unravel_index(np.argmax(dev), dev.shape)
    return float(dev[row, col]), (basis[row], basis[col])


# -- cost scaling -------------------------------------------------------------------


def pairing_family_hamiltonian(n_sp: int, strength: float = 1.0) -> SqHamiltonian:
    """All-to-all pair hopping on ``n_sp/2`` orbital pairs ``(i, i + n_sp/2)``.

    Partners sit half a register apart so the sign windows span the register.
    """
    from .fock import hermitize

    if n_sp < 2 or n_sp % 2:
        raise ValueError("n_sp must be an even number >= 2")
    half = n_sp // 2
    terms = [((i, i + half), (k, k + half), -strength) for i in range(half) for k in range(half)]
    return hermitize(terms, n_sp)


@dataclass
class GateCountRow:
    n_sp: int
    d: int
    d_pad: int
    o_f: int
    o_h: int
    u_h: int
    o_f_multicontrolled: int
    o_h_multicontrolled: int
    u_h_toffoli_equivalent: int


def _fit_exponent(x, y) -> float:
    slope, _ = np.polyfit(np.log(np.asarray(x, float)), np.log(np.asarray(y, float)), 1)
    return float(slope)


def gate_count_report(family: Sequence[SqHamiltonian]) -> dict:
    """Gate counts per Hamiltonian plus log-log fitted exponents when ``len >= 2``."""
    if not family:
        raise ValueError("empty Hamiltonian family")
    rows = []
    for h in family:
        layout = layout_for(h)
        of = build_oracle_OF(h, False, layout)
        oh = build_oracle_OH(h, layout)
        tf = build_isometry(h, "forward", layout)
        tb = build_isometry(h, "backward", layout)
        uh = tf + swap_circuit(layout) + tb.inverse()
        mc = lambda c: sum(1 for g in c if len(g.controls) >= 2)  # noqa: E731
        rows.append(GateCountRow(h.n_sp, h.d, h.d_pad, len(of), len(oh), len(uh),
                                 mc(of), mc(oh), uh.toffoli_equivalent()))
    report = {"rows": rows, "fit": None}
    if len({r.n_sp for r in rows}) >= 2:
        d_exp = _fit_exponent([r.n_sp for r in rows], [r.d for r in rows])
        report["fit"] = {
            "o_f_vs_d": _fit_exponent([r.d for r in rows], [r.o_f for r in rows]),
            "o_h_vs_d_nsp": _fit_exponent([r.d * r.n_sp for r in rows], [r.o_h for r in rows]),
            "d_vs_nsp": d_exp,
            "u_h_vs_nsp": _fit_exponent([r.n_sp for r in rows], [r.u_h for r in rows]),
            "u_h_vs_d_nsp": _fit_exponent([r.d * r.n_sp for r in rows], [r.u_h for r in rows]),
            "u_h_predicted_vs_nsp": d_exp + 1.0,
        }
    return report
