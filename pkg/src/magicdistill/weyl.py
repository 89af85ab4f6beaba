"""Generalized Pauli (Weyl) operators for prime-dimensional qudits.

Single-qudit operators are ``sigma_{j,k} = omega**(c*j*k) X**j Z**k`` with
``c = (1 - d) / 2``.  For odd ``d`` the prefactor is an ordinary power of
``omega``; for ``d = 2`` it is a half-integer power, so phases are tracked in
units of ``zeta = exp(2*pi*i / 4)`` instead.  In general phases are stored as
integers modulo :func:`phase_order` in units of :func:`zeta`.

Multi-qudit operators use the symplectic convention: a phase exponent plus two
index vectors ``j`` and ``k``.  Qudit 0 is the most significant digit of a
computational-basis index.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np


def is_prime(d: int) -> bool:
    if d < 2:
        return False
    return all(d % p for p in range(2, int(d**0.5) + 1))


def check_dim(d: int) -> int:
    if not isinstance(d, (int, np.integer)) or not is_prime(int(d)):
        raise ValueError(f"dimension must be a prime integer, got {d!r}")
    return int(d)


def phase_order(d: int) -> int:
    """Order of the phase group: ``2d`` for qubits, ``d`` for odd primes."""
    return 2 * d if d == 2 else d


def omega_units(d: int) -> int:
    """Number of ``zeta`` units in one power of ``omega``."""
    return phase_order(d) // d


def c_units(d: int) -> int:
    """The constant ``c = (1 - d)/2`` expressed in ``zeta`` units."""
    return (1 - d) * omega_units(d) // 2


@lru_cache(maxsize=None)
def root_powers(d: int) -> np.ndarray:
    """Lookup table ``zeta**l`` for ``l`` in ``range(phase_order(d))``."""
    order = phase_order(d)
    table = np.exp(2j * np.pi * np.arange(order) / order)
    table.setflags(write=False)
    return table


def omega(d: int) -> complex:
    return complex(root_powers(d)[omega_units(d)])


def zeta(d: int) -> complex:
    return complex(root_powers(d)[1 % phase_order(d)])


@lru_cache(maxsize=None)
def shift_matrix(d: int) -> np.ndarray:
    """``X = sum_j |j+1 mod d><j|``."""
    x = np.zeros((d, d), dtype=complex)
    x[(np.arange(d) + 1) % d, np.arange(d)] = 1.0
    x.setflags(write=False)
    return x


@lru_cache(maxsize=None)
def clock_matrix(d: int) -> np.ndarray:
    """``Z = sum_j omega**j |j><j|``."""
    z = np.diag(root_powers(d)[(omega_units(d) * np.arange(d)) % phase_order(d)])
    z.setflags(write=False)
    return z


@dataclass(frozen=True)
class PhasedPauli:
    """The operator ``zeta**phase * sigma_{jvec, kvec}`` on ``len(jvec)`` qudits."""

    dim: int
    phase: int
    jvec: tuple[int, ...]
    kvec: tuple[int, ...]

    def __post_init__(self):
        d = check_dim(self.dim)
        if len(self.jvec) != len(self.kvec):
            raise ValueError("jvec and kvec must have equal length")
        object.__setattr__(self, "dim", d)
        object.__setattr__(self, "phase", int(self.phase) % phase_order(d))
        object.__setattr__(self, "jvec", tuple(int(j) % d for j in self.jvec))
        object.__setattr__(self, "kvec", tuple(int(k) % d for k in self.kvec))

    @classmethod
    def identity(cls, dim: int, n: int = 1) -> PhasedPauli:
        return cls(dim, 0, (0,) * n, (0,) * n)

    @classmethod
    def single(cls, dim: int, j: int, k: int) -> PhasedPauli:
        return cls(dim, 0, (j,), (k,))

    @classmethod
    def from_string(cls, dim: int, pairs: Sequence[tuple[int, int]], phase: int = 0) -> PhasedPauli:
        """Build ``sigma_{j1,k1} (x) sigma_{j2,k2} (x) ...`` from ``[(j1, k1), ...]``."""
        return cls(dim, phase, tuple(p[0] for p in pairs), tuple(p[1] for p in pairs))

    @classmethod
    def from_xz(cls, dim: int, xpow: Sequence[int], zpow: Sequence[int]) -> PhasedPauli:
        """Build the tensor product of ``X**a Z**b`` factors (no ``omega**(cjk)`` prefactor)."""
        d = check_dim(dim)
        a = [int(x) % d for x in xpow]
        b = [int(z) % d for z in zpow]
        phase = -c_units(d) * sum(x * z for x, z in zip(a, b))
        return cls(d, phase, tuple(a), tuple(b))

    @property
    def n(self) -> int:
        return len(self.jvec)

    @property
    def is_identity(self) -> bool:
        return self.phase == 0 and not any(self.jvec) and not any(self.kvec)

    def coefficient(self) -> complex:
        return complex(root_powers(self.dim)[self.phase])

    def monomial(self) -> tuple[np.ndarray, np.ndarray]:
        """Sparse form: column ``x`` maps to row ``rows[x]`` with factor ``values[x]``."""
        d, n = self.dim, self.n
        order = phase_order(d)
        digits = _digits(d, n)
        j = np.asarray(self.jvec, dtype=np.int64)
        k = np.asarray(self.kvec, dtype=np.int64)
        new_digits = (digits + j) % d
        weights = d ** np.arange(n - 1, -1, -1, dtype=np.int64)
        rows = new_digits @ weights
        cjk = c_units(d) * int(np.dot(j, k))
        expo = (self.phase + cjk + omega_units(d) * (digits @ k)) % order
        return rows, root_powers(d)[expo]

    def matrix(self) -> np.ndarray:
        rows, values = self.monomial()
        size = self.dim**self.n
        out = np.zeros((size, size), dtype=complex)
        out[rows, np.arange(size)] = values
        return out

    def power(self, m: int) -> PhasedPauli:
        out = PhasedPauli.identity(self.dim, self.n)
        for _ in range(m % (phase_order(self.dim) * self.dim)):
            out = compose(out, self)
        return out

    def __matmul__(self, other: PhasedPauli) -> PhasedPauli:
        return compose(self, other)


@lru_cache(maxsize=None)
def _digits(d: int, n: int) -> np.ndarray:
    idx = np.arange(d**n, dtype=np.int64)
    powers = d ** np.arange(n - 1, -1, -1, dtype=np.int64)
    digits = (idx[:, None] // powers[None, :]) % d
    digits.setflags(write=False)
    return digits


def weyl_matrix(dim: int, index: tuple[int, int]) -> np.ndarray:
    """Dense ``d x d`` matrix of ``sigma_{j,k}``."""
    j, k = index
    return PhasedPauli.single(dim, j, k).matrix()


def _check_pair(a: PhasedPauli, b: PhasedPauli, same_length: bool = True) -> None:
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    if same_length and a.n != b.n:
        raise ValueError(f"length mismatch: {a.n} vs {b.n}")


def compose(a: PhasedPauli, b: PhasedPauli) -> PhasedPauli:
    """Operator product ``a b`` re-expressed as a phase times a Weyl operator."""
    _check_pair(a, b)
    d = a.dim
    cu, wu = c_units(d), omega_units(d)
    phase = a.phase + b.phase
    jvec, kvec = [], []
    for j1, k1, j2, k2 in zip(a.jvec, a.kvec, b.jvec, b.kvec):
        # X^j1 Z^k1 X^j2 Z^k2 = omega^(k1 j2) X^(j1+j2) Z^(k1+k2)
        jj, kk = (j1 + j2) % d, (k1 + k2) % d
        phase += cu * (j1 * k1 + j2 * k2 - jj * kk) + wu * k1 * j2
        jvec.append(jj)
        kvec.append(kk)
    return PhasedPauli(d, phase, tuple(jvec), tuple(kvec))


def adjoint(a: PhasedPauli) -> PhasedPauli:
    return PhasedPauli(a.dim, -a.phase, tuple(-j for j in a.jvec), tuple(-k for k in a.kvec))


def symplectic_product(j1, k1, j2, k2, d: int) -> int:
    return (int(np.dot(k1, j2)) - int(np.dot(j1, k2))) % d


def commutation_phase(a: PhasedPauli, b: PhasedPauli) -> int:
    """Exponent ``m`` with ``a b = omega**m b a``; zero iff they commute."""
    _check_pair(a, b)
    return symplectic_product(a.jvec, a.kvec, b.jvec, b.kvec, a.dim)


def tensor(a: PhasedPauli, b: PhasedPauli) -> PhasedPauli:
    _check_pair(a, b, same_length=False)
    return PhasedPauli(a.dim, a.phase + b.phase, a.jvec + b.jvec, a.kvec + b.kvec)


def tensor_all(ops: Sequence[PhasedPauli]) -> PhasedPauli:
    out = ops[0]
    for op in ops[1:]:
        out = tensor(out, op)
    return out


def all_indices(d: int) -> list[tuple[int, int]]:
    return [(j, k) for j in range(d) for k in range(d)]


def match_pauli(matrix: np.ndarray, dim: int, tol: float = 1e-10) -> PhasedPauli | None:
    """Identify a dense matrix as ``zeta**l sigma_{j,k}`` if it is one, else ``None``."""
    size = matrix.shape[0]
    n = round(np.log(size) / np.log(dim))
    if dim**n != size:
        raise ValueError("matrix size is not a power of dim")
    order = phase_order(dim)
    # sigma_{j,k}|0...0> is proportional to |j>, which pins down j.
    row = int(np.argmax(np.abs(matrix[:, 0])))
    jvec = tuple(int(x) for x in np.unravel_index(row, (dim,) * n))
    for kvec in np.ndindex(*(dim,) * n):
        cand = PhasedPauli(dim, 0, jvec, tuple(kvec)).matrix()
        overlap = np.vdot(cand.ravel(), matrix.ravel()) / size
        if abs(abs(overlap) - 1.0) > tol:
            continue
        expo = np.angle(overlap) / (2 * np.pi) * order
        if abs(expo - round(expo)) > 1e-6:
            return None
        out = PhasedPauli(dim, int(round(expo)), jvec, tuple(kvec))
        return out if np.allclose(out.matrix(), matrix, atol=tol) else None
    return None
