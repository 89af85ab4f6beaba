"""Clifford gates and the stabilizer codes used for distillation."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .states import hadamard_matrix
from .weyl import (
    PhasedPauli,
    all_indices,
    c_units,
    check_dim,
    commutation_phase,
    compose,
    match_pauli,
    omega,
)


@dataclass(frozen=True, eq=False)
class StabilizerCode:
    """An ``[[n, 1, distance]]_d`` stabilizer code with a chosen logical X and Z."""

    name: str
    dim: int
    n: int
    generators: tuple[PhasedPauli, ...]
    logical_x: PhasedPauli
    logical_z: PhasedPauli
    distance: int | None = None
    k: int = field(default=1)

    def __post_init__(self):
        check_dim(self.dim)
        for op in self.generators + (self.logical_x, self.logical_z):
            if op.dim != self.dim or op.n != self.n:
                raise ValueError(f"operator {op} does not act on {self.n} qudits of dimension {self.dim}")
        if len(self.generators) != self.n - self.k:
            raise ValueError(f"expected {self.n - self.k} generators, got {len(self.generators)}")

    def logical(self, j: int, k: int) -> PhasedPauli:
        """``sigma^L_{j,k} = omega**(cjk) X_L**j Z_L**k``."""
        d = self.dim
        j, k = j % d, k % d
        op = compose(self.logical_x.power(j), self.logical_z.power(k))
        return PhasedPauli(d, op.phase + c_units(d) * j * k, op.jvec, op.kvec)

    @property
    def logicals(self) -> dict[tuple[int, int], PhasedPauli]:
        return {u: self.logical(*u) for u in all_indices(self.dim)}

    def commutation_matrix(self) -> np.ndarray:
        g = self.generators
        return np.array([[commutation_phase(a, b) for b in g] for a in g], dtype=int)

    def symplectic_rank(self) -> int:
        rows = [list(g.jvec) + list(g.kvec) for g in self.generators]
        return rank_mod_p(np.array(rows, dtype=np.int64), self.dim)

    def validate(self) -> None:
        if np.any(self.commutation_matrix()):
            raise ValueError(f"{self.name}: generators do not commute")
        if self.symplectic_rank() != self.n - self.k:
            raise ValueError(f"{self.name}: generators are not independent")
        for lop in (self.logical_x, self.logical_z):
            if any(commutation_phase(lop, g) for g in self.generators):
                raise ValueError(f"{self.name}: logical {lop} does not commute with the stabilizer")
        if commutation_phase(self.logical_x, self.logical_z) != (-1) % self.dim:
            raise ValueError(f"{self.name}: logical X and Z must satisfy X Z = omega^-1 Z X")

    def stabilizer_group(self) -> list[PhasedPauli]:
        """All ``d**(n-k)`` products ``g1**m1 ... gr**mr``."""
        elems = [PhasedPauli.identity(self.dim, self.n)]
        for g in self.generators:
            powers = [PhasedPauli.identity(self.dim, self.n)]
            for _ in range(self.dim - 1):
                powers.append(compose(powers[-1], g))
            elems = [compose(e, p) for e in elems for p in powers]
        return elems


def rank_mod_p(mat: np.ndarray, p: int) -> int:
    m = np.array(mat, dtype=np.int64) % p
    rank = 0
    rows, cols = m.shape
    for col in range(cols):
        pivot = next((r for r in range(rank, rows) if m[r, col]), None)
        if pivot is None:
            continue
        m[[rank, pivot]] = m[[pivot, rank]]
        inv = pow(int(m[rank, col]), -1, p)
        m[rank] = (m[rank] * inv) % p
        for r in range(rows):
            if r != rank and m[r, col]:
                m[r] = (m[r] - m[r, col] * m[rank]) % p
        rank += 1
        if rank == rows:
            break
    return rank


def code_projector(code: StabilizerCode) -> np.ndarray:
    """Projector onto the +1 eigenspace: ``d**(k-n)`` times the sum over the stabilizer group."""
    size = code.dim**code.n
    proj = np.zeros((size, size), dtype=complex)
    cols = np.arange(size)
    for elem in code.stabilizer_group():
        rows, values = elem.monomial()
        proj[rows, cols] += values
    return proj / code.dim ** (code.n - code.k)


def _cyclic_five(dim: int) -> list[PhasedPauli]:
    first = [(1, 0), (0, 1), (0, -1), (-1, 0), (0, 0)]
    gens = []
    for shift in range(4):
        row = first[-shift:] + first[:-shift] if shift else first
        gens.append(PhasedPauli.from_string(dim, row))
    return gens


@lru_cache(maxsize=None)
def five_qudit_code(d: int = 3) -> StabilizerCode:
    """The cyclic ``[[5,1,3]]_d`` code, logical X = Z^(x5) and logical Z = X^(x5)."""
    d = check_dim(d)
    code = StabilizerCode(
        name=f"5qudit-d{d}",
        dim=d,
        n=5,
        generators=tuple(_cyclic_five(d)),
        logical_x=PhasedPauli.from_string(d, [(0, 1)] * 5),
        logical_z=PhasedPauli.from_string(d, [(1, 0)] * 5),
        distance=3,
    )
    code.validate()
    return code


@lru_cache(maxsize=None)
def seven_qutrit_code() -> StabilizerCode:
    d = 3
    xrows = [
        (0, 0, 0, -1, 1, 1, -1),
        (1, 0, -1, 0, -1, 0, 1),
        (0, 1, -1, 0, 0, -1, 1),
    ]
    zrows = [
        (0, 0, 0, 1, 1, 1, 1),
        (1, 0, 1, 0, 1, 0, 1),
        (0, 1, 1, 0, 0, 1, 1),
    ]
    zero = (0,) * 7
    gens = [PhasedPauli.from_xz(d, row, zero) for row in xrows]
    gens += [PhasedPauli.from_xz(d, zero, row) for row in zrows]
    code = StabilizerCode(
        name="7qutrit",
        dim=d,
        n=7,
        generators=tuple(gens),
        logical_x=PhasedPauli.from_xz(d, (1, -1, 1, 1, -1, 1, -1), zero),
        logical_z=PhasedPauli.from_xz(d, zero, (1,) * 7),
        distance=3,
    )
    code.validate()
    return code


@lru_cache(maxsize=None)
def parity_code(d: int = 3) -> StabilizerCode:
    """Two-qudit repetition code stabilized by ``Z (x) Z^dagger``."""
    d = check_dim(d)
    code = StabilizerCode(
        name=f"parity-d{d}",
        dim=d,
        n=2,
        generators=(PhasedPauli.from_xz(d, (0, 0), (1, -1)),),
        logical_x=PhasedPauli.from_xz(d, (1, 1), (0, 0)),
        logical_z=PhasedPauli.from_xz(d, (0, 0), (1, 0)),
        distance=1,
    )
    code.validate()
    return code


CODE_NAMES = ("5qutrit", "7qutrit", "5qubit")


def get_code(name: str) -> StabilizerCode:
    if name == "5qutrit":
        return five_qudit_code(3)
    if name == "7qutrit":
        return seven_qutrit_code()
    if name == "5qubit":
        return five_qudit_code(2)
    raise ValueError(f"unknown code {name!r}; expected one of {', '.join(CODE_NAMES)}")


# Clifford gates -----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CliffordGate:
    label: str
    dim: int
    matrix: np.ndarray

    @property
    def nqudits(self) -> int:
        return round(np.log(self.matrix.shape[0]) / np.log(self.dim))

    def conjugate(self, op: PhasedPauli) -> PhasedPauli | None:
        """The Pauli ``U op U^dagger``, or ``None`` if the image is not a Pauli."""
        image = self.matrix @ op.matrix() @ self.matrix.conj().T
        return match_pauli(image, self.dim)

    def is_clifford(self) -> bool:
        n = self.nqudits
        for pairs in np.ndindex(*(self.dim,) * (2 * n)):
            op = PhasedPauli(self.dim, 0, pairs[:n], pairs[n:])
            if self.conjugate(op) is None:
                return False
        return True


def s_gate_matrix(d: int) -> np.ndarray:
    """``S|j> = omega**(j(j-1)/2)|j>``; for d=2 the half-integer exponent uses ``zeta``."""
    d = check_dim(d)
    j = np.arange(d)
    if d == 2:
        # the odd-d formula degenerates to the identity for qubits
        return np.diag([1.0, 1j])
    return np.diag(omega(d) ** ((j * (j - 1) // 2) % d))


def cnot_matrix(d: int) -> np.ndarray:
    size = d * d
    out = np.zeros((size, size), dtype=complex)
    for j in range(d):
        for k in range(d):
            out[j * d + (j + k) % d, j * d + k] = 1.0
    return out


def r_matrix() -> np.ndarray:
    """The corrective qutrit Clifford, normalized to be unitary."""
    w = omega(3)
    return np.array([[1, w, w], [w**2, w, w**2], [w**2, w**2, w]]) / np.sqrt(3)


GATE_LABELS = ("H", "S", "CNOT", "R")


def clifford_gate(label: str, d: int = 3) -> CliffordGate:
    d = check_dim(d)
    if label == "H":
        return CliffordGate("H", d, hadamard_matrix(d))
    if label == "S":
        return CliffordGate("S", d, s_gate_matrix(d))
    if label == "CNOT":
        return CliffordGate("CNOT", d, cnot_matrix(d))
    if label == "R":
        if d != 3:
            raise ValueError("R is defined for qutrits only")
        return CliffordGate("R", d, r_matrix())
    raise ValueError(f"unknown gate {label!r}; expected one of {', '.join(GATE_LABELS)}")
