"""Sparse amplitude-map simulator for mostly-reversible circuits.

A state is a sorted array of integer basis keys with matching complex
amplitudes. Qubit ``i`` is bit ``i`` of the key. Permutation gates (X with
any control pattern, SWAP) only rewrite keys; H and RY may split an entry
in two and are followed by a merge of coinciding keys.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

PRUNE = 1e-14
MAX_WIDTH = 62

REGISTER_ORDER = ("id", "s", "cp", "e_p", "e_q", "zeta", "me", "b_p", "b_q")


@dataclass(frozen=True)
class RegisterLayout:
    """Contiguous named registers, ``id`` in the lowest bits."""

    n_index: int
    n_sp: int

    def __post_init__(self):
        if self.n_index < 0 or self.n_sp < 0:
            raise ValueError("register sizes must be non-negative")
        if self.width > MAX_WIDTH:
            raise ValueError(f"layout needs {self.width} qubits, above the {MAX_WIDTH}-bit key limit")

    @property
    def sizes(self) -> dict[str, int]:
        return {"id": self.n_index, "s": self.n_sp, "cp": self.n_sp,
                "e_p": 1, "e_q": 1, "zeta": 1, "me": 1, "b_p": 1, "b_q": 1}

    @property
    def spans(self) -> dict[str, tuple[int, int]]:
        out, start = {}, 0
        for name in REGISTER_ORDER:
            w = self.sizes[name]
            out[name] = (start, w)
            start += w
        return out

    @property
    def width(self) -> int:
        return 2 * self.n_sp + self.n_index + 6

    def qubit(self, name: str, i: int = 0) -> int:
        start, w = self.spans[name]
        if not 0 <= i < w:
            raise IndexError(f"{name}[{i}] outside register of width {w}")
        return start + i

    def mask(self, name: str) -> int:
        start, w = self.spans[name]
        return ((1 << w) - 1) << start

    @property
    def ancilla_mask(self) -> int:
        return ((1 << self.width) - 1) & ~self.mask("s")

    def encode(self, **values: int) -> int:
        key = 0
        for name, val in values.items():
            start, w = self.spans[name]
            if val < 0 or val >> w:
                raise ValueError(f"value {val} does not fit register {name} of width {w}")
            key |= val << start
        return key

    def decode(self, key: int) -> dict[str, int]:
        return {name: (key >> s) & ((1 << w) - 1) for name, (s, w) in self.spans.items()}

    def describe(self) -> str:
        return ", ".join(f"{n}[{s}:{s + w}]" for n, (s, w) in self.spans.items()) + f"; width {self.width}"


# -- gates ------------------------------------------------------------------------

_KINDS = ("X", "Z", "P0", "RY", "H", "SWAP")
_SELF_INVERSE = {"X", "Z", "H", "SWAP"}


@dataclass(frozen=True)
class Gate:
    """Single gate with an optional control pattern.

    ``polarity[i]`` is 1 for a closed (|1>) control and 0 for an open one.
    ``P0(theta)`` multiplies |0> by ``exp(i theta)``; ``RY(alpha)`` maps
    |0> to ``cos(alpha/2)|0> + sin(alpha/2)|1>``.
    """

    kind: str
    targets: tuple[int, ...]
    controls: tuple[int, ...] = ()
    polarity: tuple[int, ...] = ()
    param: float = 0.0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if len(self.targets) != (2 if self.kind == "SWAP" else 1):
            raise ValueError(f"{self.kind} takes {2 if self.kind == 'SWAP' else 1} target(s)")
        pol = self.polarity or (1,) * len(self.controls)
        object.__setattr__(self, "polarity", tuple(int(x) for x in pol))
        if len(self.polarity) != len(self.controls):
            raise ValueError("polarity and controls differ in length")
        if set(self.controls) & set(self.targets) or len(set(self.controls)) != len(self.controls):
            raise ValueError("controls must be distinct and disjoint from targets")

    @property
    def gate_class(self) -> str:
        n = len(self.controls)
        return self.kind if n == 0 else ("C" if n == 1 else "MC") + self.kind

    @property
    def is_permutation(self) -> bool:
        return self.kind in ("X", "SWAP")

    def inverse(self) -> "Gate":
        if self.kind in _SELF_INVERSE:
            return self
        return Gate(self.kind, self.targets, self.controls, self.polarity, -self.param)

    def qubits(self) -> tuple[int, ...]:
        return self.targets + self.controls

    def to_text(self) -> str:
        t = ",".join(map(str, self.targets))
        c = ",".join(map(str, self.controls)) or "-"
        p = "".join(map(str, self.polarity)) or "-"
        return f"{self.kind} {t} {c} {p} {self.param:.17g}"


@dataclass
class GateCircuit:
    gates: list[Gate] = field(default_factory=list)
    label: str = ""

    def append(self, gate: Gate) -> None:
        self.gates.append(gate)

    def extend(self, gates: Iterable[Gate]) -> None:
        self.gates.extend(gates)

    def __len__(self):
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)

    def __add__(self, other: "GateCircuit") -> "GateCircuit":
        return GateCircuit(self.gates + other.gates, f"{self.label}+{other.label}".strip("+"))

    def inverse(self) -> "GateCircuit":
        return GateCircuit([g.inverse() for g in reversed(self.gates)], f"{self.label}^-1")

    def counts(self) -> dict[str, int]:
        return dict(Counter(g.gate_class for g in self.gates))

    def toffoli_equivalent(self) -> int:
        """Cost with every k-controlled gate expanded into ``2k - 3`` Toffolis (k >= 2).

        Uncontrolled and singly-controlled gates count as one.
        """
        return sum(1 if len(g.controls) < 2 else 2 * len(g.controls) - 3 for g in self.gates)

    def max_qubit(self) -> int:
        return max((max(g.qubits()) for g in self.gates), default=-1)

    def to_text(self) -> str:
        return "\n".join(g.to_text() for g in self.gates) + ("\n" if self.gates else "")


# -- states -------------------------------------------------------------------------


class SparseState:
    """Sorted key/amplitude arrays over a :class:`RegisterLayout`."""

    __slots__ = ("keys", "amps", "layout")

    def __init__(self, keys, amps, layout: RegisterLayout, *, canonical: bool = False):
        keys = np.asarray(keys, dtype=np.int64)
        amps = np.asarray(amps, dtype=np.complex128)
        if keys.shape != amps.shape or keys.ndim != 1:
            raise ValueError("keys and amplitudes must be 1-D arrays of equal length")
        if not canonical:
            keys, amps = _merge(keys, amps)
        self.keys = keys
        self.amps = amps
        self.layout = layout

    @classmethod
    def basis(cls, layout: RegisterLayout, key: int = 0, **registers: int) -> "SparseState":
        key = key | layout.encode(**registers)
        return cls(np.array([key]), np.array([1.0 + 0j]), layout, canonical=True)

    @classmethod
    def from_dict(cls, layout: RegisterLayout, amps: dict[int, complex]) -> "SparseState":
        return cls(np.fromiter(amps.keys(), np.int64, len(amps)),
                   np.fromiter(amps.values(), np.complex128, len(amps)), layout)

    def to_dict(self) -> dict[int, complex]:
        return dict(zip(self.keys.tolist(), self.amps.tolist()))

    def __len__(self):
        return len(self.keys)

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amps) ** 2)))

    def copy(self) -> "SparseState":
        return SparseState(self.keys.copy(), self.amps.copy(), self.layout, canonical=True)

    def amplitude(self, key: int) -> complex:
        i = np.searchsorted(self.keys, key)
        if i < len(self.keys) and self.keys[i] == key:
            return complex(self.amps[i])
        return 0j

    def scaled(self, factor: complex) -> "SparseState":
        return SparseState(self.keys.copy(), self.amps * factor, self.layout, canonical=True)

    def __add__(self, other: "SparseState") -> "SparseState":
        _check_layout(self, other)
        return SparseState(np.concatenate([self.keys, other.keys]),
                           np.concatenate([self.amps, other.amps]), self.layout)

    def dump(self, threshold: float = 1e-12) -> str:
        """``bitstring re im`` lines, most significant qubit first, sorted by bitstring."""
        w = self.layout.width
        lines = [
            f"{int(k):0{w}b} {a.real:.17g} {a.imag:.17g}"
            for k, a in zip(self.keys.tolist(), self.amps.tolist())
            if abs(a) >= threshold
        ]
        return "\n".join(sorted(lines)) + ("\n" if lines else "")


def _check_layout(a: SparseState, b: SparseState):
    if a.layout != b.layout:
        raise ValueError("states live on different register layouts")


def _merge(keys: np.ndarray, amps: np.ndarray):
    """Sort, sum duplicate keys, drop amplitudes below the prune threshold."""
    if len(keys) == 0:
        return keys, amps
    uniq, inv = np.unique(keys, return_inverse=True)
    if len(uniq) != len(keys):
        re = np.bincount(inv, weights=amps.real, minlength=len(uniq))
        im = np.bincount(inv, weights=amps.imag, minlength=len(uniq))
        amps = re + 1j * im
    else:
        out = np.empty_like(amps)
        out[inv] = amps
        amps = out
    keep = np.abs(amps) >= PRUNE
    return uniq[keep], amps[keep]


def _matrix(gate: Gate) -> np.ndarray:
    if gate.kind == "H":
        s = 1 / math.sqrt(2)
        return np.array([[s, s], [s, -s]], dtype=complex)
    c, s = math.cos(gate.param / 2), math.sin(gate.param / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def _select(keys: np.ndarray, gate: Gate):
    if not gate.controls:
        return None
    cm = cv = 0
    for q, pol in zip(gate.controls, gate.polarity):
        cm |= 1 << q
        cv |= pol << q
    return (keys & cm) == cv


def _apply_inplace(keys: np.ndarray, amps: np.ndarray, gate: Gate):
    """Apply ``gate`` to the arrays; returns possibly new arrays."""
    sel = _select(keys, gate)
    kind = gate.kind
    t = gate.targets[0]
    tbit = np.int64(1 << t)
    if kind == "X":
        if sel is None:
            keys ^= tbit
        else:
            keys[sel] ^= tbit
        return keys, amps, True
    if kind == "SWAP":
        a, b = gate.targets
        diff = ((keys >> a) ^ (keys >> b)) & 1
        m = diff.astype(bool) if sel is None else sel & diff.astype(bool)
        keys[m] ^= np.int64((1 << a) | (1 << b))
        return keys, amps, True
    bit = (keys & tbit) != 0
    if kind == "Z":
        m = bit if sel is None else bit & sel
        amps[m] *= -1
        return keys, amps, False
    if kind == "P0":
        m = ~bit if sel is None else ~bit & sel
        amps[m] *= complex(math.cos(gate.param), math.sin(gate.param))
        return keys, amps, False
    # H / RY: split selected entries into both target values
    u = _matrix(gate)
    if sel is None:
        k_sel, a_sel, b_sel = keys, amps, bit
        k_rest = keys[:0]
        a_rest = amps[:0]
    else:
        k_sel, a_sel, b_sel = keys[sel], amps[sel], bit[sel]
        k_rest, a_rest = keys[~sel], amps[~sel]
    k0 = k_sel & ~tbit
    k1 = k_sel | tbit
    bi = b_sel.astype(np.intp)
    a0 = u[0][bi] * a_sel
    a1 = u[1][bi] * a_sel
    keys, amps = _merge(np.concatenate([k_rest, k0, k1]), np.concatenate([a_rest, a0, a1]))
    return keys, amps, True


def _validate(gate: Gate, layout: RegisterLayout):
    if max(gate.qubits()) >= layout.width or min(gate.qubits()) < 0:
        raise IndexError(f"gate {gate.to_text()} outside layout width {layout.width}")


def apply_gate(state: SparseState, gate: Gate) -> SparseState:
    _validate(gate, state.layout)
    keys, amps, moved = _apply_inplace(state.keys.copy(), state.amps.copy(), gate)
    if moved and gate.is_permutation:
        order = np.argsort(keys, kind="stable")
        keys, amps = keys[order], amps[order]
    return SparseState(keys, amps, state.layout, canonical=True)


@dataclass
class RunStats:
    gates: int = 0
    max_support: int = 0


def run_circuit(state: SparseState, circuit: GateCircuit, stats: RunStats | None = None) -> SparseState:
    """Apply every gate in order; ``stats`` receives the support high-water mark."""
    if circuit.max_qubit() >= state.layout.width:
        raise IndexError(f"circuit touches qubit {circuit.max_qubit()} beyond width {state.layout.width}")
    keys, amps = state.keys.copy(), state.amps.copy()
    high = len(keys)
    sorted_ = True
    for gate in circuit.gates:
        keys, amps, moved = _apply_inplace(keys, amps, gate)
        if gate.is_permutation and moved:
            sorted_ = False
        elif moved:
            sorted_ = True
        high = max(high, len(keys))
    if not sorted_:
        order = np.argsort(keys, kind="stable")
        keys, amps = keys[order], amps[order]
    if stats is not None:
        stats.gates += len(circuit)
        stats.max_support = max(stats.max_support, high)
    return SparseState(keys, amps, state.layout, canonical=True)


def inner_product(a: SparseState, b: SparseState) -> complex:
    """``<a|b>``."""
    _check_layout(a, b)
    _, ia, ib = np.intersect1d(a.keys, b.keys, assume_unique=True, return_indices=True)
    return complex(np.vdot(a.amps[ia], b.amps[ib]))


def swap_registers(state: SparseState, pairs: Sequence[tuple[int, int]]) -> SparseState:
    """Exchange the bits of each qubit pair (a pure key permutation)."""
    keys = state.keys.copy()
    for a, b in pairs:
        diff = (((keys >> a) ^ (keys >> b)) & 1).astype(bool)
        keys[diff] ^= np.int64((1 << a) | (1 << b))
    order = np.argsort(keys, kind="stable")
    return SparseState(keys[order], state.amps[order], state.layout, canonical=True)
