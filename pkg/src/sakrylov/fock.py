"""Second-quantized Hamiltonians on occupation bitstrings.

Orbital ``p`` is bit ``p`` of an integer occupation mask. A Fock state is the
ascending product of creation operators on the vacuum,
``|f> = a+_{p0} a+_{p1} ... |0>`` with ``p0 < p1 < ...``.

A monomial ``b+_Q b_P`` stores ``Q`` and ``P`` ascending. ``b+_Q`` is
``a+_p a+_q ... a+_r`` and ``b_P`` is ``a_w ... a_v a_u``, so ``a_u`` (the
lowest annihilation index) acts on the ket first.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


@dataclass(frozen=True)
class FockState:
    """Occupation bitstring over ``n_sp`` orbitals."""

    bits: int
    n_sp: int

    def __post_init__(self):
        if self.n_sp < 0:
            raise ValueError("n_sp must be non-negative")
        if self.bits < 0 or self.bits >> self.n_sp:
            raise ValueError(f"occupation {self.bits:#x} does not fit in {self.n_sp} orbitals")

    @classmethod
    def from_orbitals(cls, occupied: Iterable[int], n_sp: int) -> "FockState":
        bits = 0
        for p in occupied:
            if not 0 <= p < n_sp:
                raise ValueError(f"orbital {p} outside [0, {n_sp})")
            bits |= 1 << p
        return cls(bits, n_sp)

    @classmethod
    def from_string(cls, s: str) -> "FockState":
        """Parse ``"11000000"``: character ``p`` is the occupation of orbital ``p``."""
        s = s.strip().strip("|>⟩")
        return cls.from_orbitals((p for p, c in enumerate(s) if c == "1"), len(s))

    @property
    def occupied(self) -> tuple[int, ...]:
        return tuple(p for p in range(self.n_sp) if self.bits >> p & 1)

    @property
    def particle_number(self) -> int:
        return bin(self.bits).count("1")

    def twice_mj(self, orbital_2m: Sequence[int]) -> int:
        return sum(orbital_2m[p] for p in self.occupied)

    def __str__(self):
        return "".join("1" if self.bits >> p & 1 else "0" for p in range(self.n_sp))


@dataclass(frozen=True)
class Monomial:
    """One term ``coefficient * b+_Q b_P``."""

    creations: tuple[int, ...]
    annihilations: tuple[int, ...]
    coefficient: complex

    def __post_init__(self):
        object.__setattr__(self, "creations", tuple(int(p) for p in self.creations))
        object.__setattr__(self, "annihilations", tuple(int(p) for p in self.annihilations))
        object.__setattr__(self, "coefficient", complex(self.coefficient))
        for name, idx in (("creation", self.creations), ("annihilation", self.annihilations)):
            if any(b <= a for a, b in zip(idx, idx[1:])):
                raise ValueError(f"{name} indices must be strictly ascending, got {idx}")
            if any(p < 0 for p in idx):
                raise ValueError(f"negative orbital index in {idx}")

    @property
    def key(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        return self.creations, self.annihilations

    @property
    def is_diagonal(self) -> bool:
        return self.creations == self.annihilations

    @property
    def max_orbital(self) -> int:
        return max(self.creations + self.annihilations, default=-1)

    def conjugate(self) -> "Monomial":
        return Monomial(self.annihilations, self.creations, self.coefficient.conjugate())


@dataclass(frozen=True)
class SymmetrySector:
    particle_number: int
    twice_mj: int | None = None  # None means all projections


def _mask(orbitals: Iterable[int]) -> int:
    m = 0
    for p in orbitals:
        m |= 1 << p
    return m


def _parity(x: int) -> int:
    return bin(x).count("1") & 1


def apply_bits(creations: Sequence[int], annihilations: Sequence[int], bits: int):
    """Occupancy-count evaluation of ``b+_Q b_P |bits>``.

    Returns ``(sign, new_bits)`` or ``None``. Works on raw masks; see
    :func:`apply_monomial` for the typed entry point.
    """
    pmask = _mask(annihilations)
    if bits & pmask != pmask:
        return None
    mid = bits & ~pmask
    qmask = _mask(creations)
    if mid & qmask:
        return None
    out = mid | qmask
    # a_{p_k} removes p_k after p_0..p_{k-1} are gone: (-1)^(N[0,p_k) - k).
    # Creation side mirrors it on the output state.
    n = 0
    for k, p in enumerate(annihilations):
        n += _parity(bits & ((1 << p) - 1)) + k
    for k, p in enumerate(creations):
        n += _parity(out & ((1 << p) - 1)) + k
    return (-1 if n & 1 else 1), out


def apply_monomial(m: Monomial, f: FockState):
    """Act with ``b+_Q b_P`` on ``f``; ``None`` when Pauli blocking kills it."""
    if m.max_orbital >= f.n_sp:
        raise ValueError(f"monomial touches orbital {m.max_orbital} but n_sp={f.n_sp}")
    res = apply_bits(m.creations, m.annihilations, f.bits)
    if res is None:
        return None
    return res[0], FockState(res[1], f.n_sp)


def sign_brute_force(m: Monomial, f: FockState):
    """Literal operator-by-operator evaluation used as an independent check.

    The ket is kept as an ordered list of creation indices and every
    operator is moved to its slot one transposition at a time.
    """
    if m.max_orbital >= f.n_sp:
        raise ValueError(f"monomial touches orbital {m.max_orbital} but n_sp={f.n_sp}")
    string = list(f.occupied)
    sign = 1
    # rightmost operator acts first: a_u, a_v, ..., a_w, then a+_r, ..., a+_q, a+_p
    ops = [("a", p) for p in m.annihilations] + [("c", p) for p in reversed(m.creations)]
    for kind, p in ops:
        if kind == "a":
            if p not in string:
                return None
            pos = string.index(p)
            for _ in range(pos):  # anticommute a_p past each creator on its left
                sign = -sign
            string.pop(pos)
        else:
            if p in string:
                return None
            string.insert(0, p)
            i = 0
            while i + 1 < len(string) and string[i] > string[i + 1]:
                string[i], string[i + 1] = string[i + 1], string[i]
                sign = -sign
                i += 1
    return sign, FockState.from_orbitals(string, f.n_sp)


@dataclass(frozen=True)
class SqHamiltonian:
    """Hermitian operator as an indexed monomial list with conjugate coordination.

    ``conjugate[j]`` is the index ``k`` of the Hermitian partner of monomial
    ``j`` (``k == j`` for self-conjugate terms). ``lam`` is the normalization
    scale and ``d_pad`` the power-of-two size of the index register space.
    """

    monomials: tuple[Monomial, ...]
    conjugate: tuple[int, ...]
    n_sp: int
    lam: float
    d_pad: int = field(default=1)

    @property
    def d(self) -> int:
        return len(self.monomials)

    @property
    def n_index_qubits(self) -> int:
        return max(0, (self.d_pad - 1).bit_length())

    @property
    def scale(self) -> float:
        """Multiply a block-encoded value by this to get MeV."""
        return self.d_pad * self.lam

    def rho(self, j: int) -> float:
        return abs(self.monomials[j].coefficient) / self.lam if self.lam else 0.0

    def theta(self, j: int) -> float:
        c = self.monomials[j].coefficient
        t = math.atan2(c.imag, c.real)
        return math.pi if t == -math.pi else t

    def dagger(self) -> tuple[Monomial, ...]:
        """Monomials of ``H+`` in the coordinated indexing."""
        return tuple(m.conjugate() for m in self.monomials)

    def upper_terms(self) -> list[Monomial]:
        """One representative per conjugate pair (lower index kept)."""
        return [m for j, m in enumerate(self.monomials) if self.conjugate[j] >= j]

    def with_coefficient(self, j: int, value: complex) -> "SqHamiltonian":
        """Copy with monomial ``j`` rescaled; ``lam`` and ``d_pad`` are kept.

        Breaks Hermiticity on purpose; used for fault injection.
        """
        m = self.monomials[j]
        mons = list(self.monomials)
        mons[j] = Monomial(m.creations, m.annihilations, value)
        lam = max(self.lam, abs(value))
        return SqHamiltonian(tuple(mons), self.conjugate, self.n_sp, lam, self.d_pad)


def _next_pow2(n: int) -> int:
    return 1 if n <= 1 else 1 << (n - 1).bit_length()


def hermitize(terms, n_sp: int, lam: float | None = None, atol: float = 1e-9) -> SqHamiltonian:
    """Complete a term list to a Hermitian :class:`SqHamiltonian`.

    ``terms`` holds ``Monomial`` objects or ``(Q, P, coefficient)`` tuples.
    A term whose conjugate is absent gets the conjugate appended. A conjugate
    already present must match the conjugated coefficient within ``atol``;
    the pair is then set to its mean so the result is exactly Hermitian.
    Diagonal terms are self-conjugate and appear once.
    """
    mons = []
    for t in terms:
        m = t if isinstance(t, Monomial) else Monomial(tuple(t[0]), tuple(t[1]), t[2])
        if m.max_orbital >= n_sp:
            raise ValueError(f"term {m.key} references orbital >= n_sp={n_sp}")
        mons.append(m)
    index = {}
    for j, m in enumerate(mons):
        if m.key in index:
            raise ValueError(f"duplicate term {m.key}")
        index[m.key] = j

    out = list(mons)
    conj = [-1] * len(mons)
    for j, m in enumerate(mons):
        if conj[j] >= 0:
            continue
        if m.is_diagonal:
            if abs(m.coefficient.imag) > 1e-12 * max(1.0, abs(m.coefficient)):
                raise ValueError(f"diagonal term {m.key} has a non-real coefficient")
            conj[j] = j
            continue
        partner = m.conjugate()
        k = index.get(partner.key)
        if k is None:
            out.append(partner)
            conj.append(j)
            conj[j] = len(out) - 1
        else:
            c = mons[k].coefficient
            if abs(c - partner.coefficient) > atol * max(1.0, abs(c)):
                raise ValueError(f"terms {m.key} and {partner.key} are not Hermitian conjugates")
            if c != partner.coefficient:
                mean = 0.5 * (m.coefficient + c.conjugate())
                out[j] = Monomial(m.creations, m.annihilations, mean)
                out[k] = Monomial(mons[k].creations, mons[k].annihilations, mean.conjugate())
            conj[j], conj[k] = k, j
    d = len(out)
    scale = max((abs(m.coefficient) for m in out), default=0.0)
    if lam is None:
        lam = scale if scale > 0 else 1.0
    elif lam < scale:
        raise ValueError(f"lam={lam} below max |coefficient|={scale}")
    return SqHamiltonian(tuple(out), tuple(conj), n_sp, float(lam), _next_pow2(d))


def enumerate_sector(n_sp: int, sector: SymmetrySector, orbital_2m: Sequence[int] | None = None):
    """All Fock states in the sector, ascending by bit pattern."""
    a = sector.particle_number
    if a < 0 or a > n_sp:
        return []
    if sector.twice_mj is not None and orbital_2m is None:
        raise ValueError("orbital_2m is required to filter on twice_mj")
    states = []
    for occ in combinations(range(n_sp), a):
        if sector.twice_mj is not None and sum(orbital_2m[p] for p in occ) != sector.twice_mj:
            continue
        states.append(FockState.from_orbitals(occ, n_sp))
    states.sort(key=lambda f: f.bits)
    return states


def build_fci_matrix(h: SqHamiltonian, basis: Sequence[FockState]) -> np.ndarray:
    """Matrix of ``h`` in ``basis`` (rows are bras)."""
    pos = {f.bits: i for i, f in enumerate(basis)}
    if len(pos) != len(basis):
        raise ValueError("basis states must be distinct")
    mat = np.zeros((len(basis), len(basis)), dtype=complex)
    for col, f in enumerate(basis):
        for m in h.monomials:
            res = apply_bits(m.creations, m.annihilations, f.bits)
            if res is None:
                continue
            row = pos.get(res[1])
            if row is not None:
                mat[row, col] += res[0] * m.coefficient
    return mat


def full_fock_basis(n_sp: int) -> list[FockState]:
    return [FockState(b, n_sp) for b in range(1 << n_sp)]


# -- interchange formats -------------------------------------------------------

def hamiltonian_to_json(h: SqHamiltonian, upper_only: bool = True) -> dict:
    mons = h.upper_terms() if upper_only else list(h.monomials)
    return {
        "n_sp": h.n_sp,
        "terms": [
            {"q": list(m.creations), "p": list(m.annihilations),
             "re": m.coefficient.real, "im": m.coefficient.imag}
            for m in mons
        ],
    }


def hamiltonian_from_json(data: dict) -> SqHamiltonian:
    try:
        n_sp = int(data["n_sp"])
        terms = [(t["q"], t["p"], complex(t.get("re", 0.0), t.get("im", 0.0))) for t in data["terms"]]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed Hamiltonian document: {exc}") from exc
    return hermitize(terms, n_sp)


def load_hamiltonian(path) -> SqHamiltonian:
    path = Path(path)
    if path.suffix.lower() == ".csv":
        return load_table_csv(path)
    with open(path) as fh:
        return hamiltonian_from_json(json.load(fh))


def save_hamiltonian(h: SqHamiltonian, path) -> None:
    with open(path, "w") as fh:
        json.dump(hamiltonian_to_json(h), fh, indent=1)
        fh.write("\n")


def read_table_rows(path) -> list[tuple[int, int, int, int, int, float]]:
    """Rows ``(i, p, q, u, v, value)`` of a two-body table file."""
    rows = []
    with open(path, newline="") as fh:
        for rec in csv.reader(fh):
            if not rec or rec[0].strip().lower() in ("i", "#") or rec[0].startswith("#"):
                continue
            i, p, q, u, v = (int(x) for x in rec[:5])
            rows.append((i, p, q, u, v, float(rec[5])))
    return rows


TABLE_ATOL = 1e-5  # conjugate rows of a printed table may differ in the last digit


def load_table_csv(path, n_sp: int | None = None) -> SqHamiltonian:
    """Two-body table ``(i, p, q, u, v, value)`` as ``a+_p a+_q a_v a_u`` terms."""
    rows = read_table_rows(path)
    if n_sp is None:
        n_sp = 1 + max((max(r[1:5]) for r in rows), default=-1)
    return hermitize([((p, q), (u, v), val) for _, p, q, u, v, val in rows], n_sp, atol=TABLE_ATOL)


def write_table_csv(h: SqHamiltonian, path) -> None:
    """Write every two-body monomial in the two-body table layout, sorted by ``(p, q, u, v)``."""
    rows = sorted(
        (m.creations + m.annihilations, m.coefficient.real)
        for m in h.monomials
        if len(m.creations) == 2 and len(m.annihilations) == 2
    )
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["i", "p", "q", "u", "v", "value"])
        for i, (idx, val) in enumerate(rows):
            w.writerow([i, *idx, f"{val:.9g}"])
