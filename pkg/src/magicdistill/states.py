"""Single-qudit states in the Weyl (Bloch-component) representation.

A state is ``rho = (1/d) sum_{j,k} alpha_{j,k} sigma_{j,k}`` with
``alpha_{0,0} = 1`` and ``conj(alpha_{j,k}) = alpha_{-j,-k}``.  Only one member
of each conjugate pair is stored.  For qutrits the stored components are
``(A, B, C, D) = (alpha_{1,0}, alpha_{0,1}, alpha_{1,1}, alpha_{1,2})``.

The qutrit-specific pieces (Hadamard plane, twirl, discrete Wigner function,
stabilizer polytope) live here as well.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.spatial import ConvexHull, Delaunay

from .weyl import PhasedPauli, check_dim, commutation_phase, omega, weyl_matrix

SQRT3 = np.sqrt(3.0)
H_A = (1 + SQRT3) / 4
H_B = (1 - SQRT3) / 4
H_C = -0.5

# |phi> = a|0> + b|1> + b|2>, amplitudes quoted to four decimals.
PHI_AMPLITUDES_4DP = (-0.1203 - 0.0272j, 0.7017, 0.7017)
PHI_BLOCH_4DP = (0.3236, -0.4772, 0.5438, 0.6098)

DEFAULT_PHYSICAL_TOL = 1e-9


@lru_cache(maxsize=None)
def bloch_labels(d: int) -> tuple[tuple[int, int], ...]:
    """Canonical representatives of the conjugate pairs ``{u, -u}``, ``u != 0``."""
    d = check_dim(d)
    if d == 2:
        return ((1, 0), (0, 1), (1, 1))
    half = (d - 1) // 2
    labels = [(1, 0), (0, 1)]
    labels += [(0, k) for k in range(2, half + 1)]
    labels += [(j, k) for j in range(1, half + 1) for k in range(d) if (j, k) != (1, 0)]
    return tuple(labels)


@dataclass(frozen=True, eq=False)
class BlochVector:
    """Independent Bloch components of a single qudit, ordered as :func:`bloch_labels`."""

    dim: int
    components: np.ndarray

    def __post_init__(self):
        d = check_dim(self.dim)
        comps = np.array(self.components, dtype=complex).reshape(-1)
        if comps.shape[0] != len(bloch_labels(d)):
            raise ValueError(f"expected {len(bloch_labels(d))} components for d={d}, got {comps.shape[0]}")
        if d == 2:
            if np.max(np.abs(comps.imag), initial=0.0) > 1e-9:
                raise ValueError("qubit Bloch components must be real")
            comps = comps.real.astype(complex)
        comps.setflags(write=False)
        object.__setattr__(self, "dim", d)
        object.__setattr__(self, "components", comps)

    @classmethod
    def qutrit(cls, A, B, C, D) -> BlochVector:
        return cls(3, np.array([A, B, C, D], dtype=complex))

    @classmethod
    def zero(cls, d: int) -> BlochVector:
        return cls(d, np.zeros(len(bloch_labels(d)), dtype=complex))

    def component(self, j: int, k: int) -> complex:
        d = self.dim
        j, k = j % d, k % d
        if (j, k) == (0, 0):
            return 1.0 + 0j
        index = _label_index(d)
        if (j, k) in index:
            return complex(self.components[index[(j, k)]])
        return complex(np.conj(self.components[index[((-j) % d, (-k) % d)]]))

    def table(self) -> np.ndarray:
        """All ``d*d`` components as an array ``T[j, k] = alpha_{j,k}``."""
        d = self.dim
        out = np.empty((d, d), dtype=complex)
        for j in range(d):
            for k in range(d):
                out[j, k] = self.component(j, k)
        return out

    @property
    def A(self) -> complex:
        return complex(self.components[0])

    @property
    def B(self) -> complex:
        return complex(self.components[1])

    @property
    def C(self) -> complex:
        return complex(self.components[2])

    @property
    def D(self) -> complex:
        return complex(self.components[3])

    def norm(self) -> float:
        return float(np.linalg.norm(self.components))

    def distance(self, other: BlochVector) -> float:
        return float(np.linalg.norm(self.components - other.components))

    def inner(self, other: BlochVector) -> complex:
        return complex(np.vdot(self.components, other.components))

    def scaled(self, factor: float) -> BlochVector:
        return BlochVector(self.dim, self.components * factor)

    def __eq__(self, other) -> bool:
        if not isinstance(other, BlochVector):
            return NotImplemented
        return self.dim == other.dim and np.array_equal(self.components, other.components)

    def __repr__(self) -> str:
        body = ", ".join(f"{c.real:.6g}{c.imag:+.6g}j" for c in self.components)
        return f"BlochVector(d={self.dim}, [{body}])"


@lru_cache(maxsize=None)
def _label_index(d: int) -> dict[tuple[int, int], int]:
    return {u: i for i, u in enumerate(bloch_labels(d))}


def density_from_bloch(alpha: BlochVector) -> np.ndarray:
    d = alpha.dim
    rho = np.eye(d, dtype=complex)
    for (j, k), a in zip(bloch_labels(d), alpha.components):
        sig = weyl_matrix(d, (j, k))
        if d == 2:
            rho = rho + a * sig
        else:
            rho = rho + a * sig + np.conj(a) * sig.conj().T
    return rho / d


def bloch_from_density(rho: np.ndarray, tol: float = 1e-10) -> BlochVector:
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {rho.shape}")
    d = check_dim(rho.shape[0])
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1.0) > tol:
        raise ValueError(f"density matrix trace is {np.trace(rho).real:.3g}, expected 1")
    comps = []
    for j, k in bloch_labels(d):
        comps.append(np.trace(rho @ weyl_matrix(d, (-j, -k))))
    if d == 2:
        comps = [c.real for c in comps]
    return BlochVector(d, np.array(comps))


def ket_to_bloch(ket) -> BlochVector:
    ket = np.asarray(ket, dtype=complex)
    ket = ket / np.linalg.norm(ket)
    return bloch_from_density(np.outer(ket, ket.conj()))


def min_eigenvalue(alpha: BlochVector) -> float:
    return float(np.linalg.eigvalsh(density_from_bloch(alpha))[0])


def is_physical(alpha: BlochVector, tol: float = DEFAULT_PHYSICAL_TOL) -> bool:
    return min_eigenvalue(alpha) >= -tol


def fidelity_pure(target: BlochVector, alpha: BlochVector) -> float:
    """``tr(rho_target rho_alpha)``, i.e. ``<t|rho|t>`` when the target is pure."""
    return float(np.real(np.trace(density_from_bloch(target) @ density_from_bloch(alpha))))


def pauli_orbit(alpha: BlochVector, conj: tuple[int, int]) -> BlochVector:
    """Bloch vector of ``sigma_{conj} rho sigma_{conj}^dagger``."""
    d = alpha.dim
    u = PhasedPauli.single(d, *conj)
    w = omega(d)
    phases = [w ** commutation_phase(u, PhasedPauli.single(d, j, k)) for j, k in bloch_labels(d)]
    return BlochVector(d, alpha.components * np.array(phases))


def conjugate(alpha: BlochVector, unitary: np.ndarray) -> BlochVector:
    rho = density_from_bloch(alpha)
    return bloch_from_density(unitary @ rho @ unitary.conj().T)


def _require_qutrit(alpha: BlochVector) -> None:
    if alpha.dim != 3:
        raise ValueError("operation is defined for qutrits only")


def hadamard_twirl(alpha: BlochVector) -> BlochVector:
    """Average over conjugation by ``H, H^2, H^3, H^4``."""
    _require_qutrit(alpha)
    x = (alpha.A + alpha.B).real / 2
    y = (alpha.C + alpha.D).real / 2
    return BlochVector.qutrit(x, x, y, y)


# Hadamard plane -------------------------------------------------------------


@dataclass(frozen=True)
class HadamardPlanePoint:
    """Mixture weights on ``|H->`` (``eps1``) and ``|H_i>`` (``eps2``); the rest is ``|H+>``."""

    eps1: float
    eps2: float

    @property
    def is_physical(self) -> bool:
        tol = 1e-12
        return self.eps1 >= -tol and self.eps2 >= -tol and self.eps1 + self.eps2 <= 1 + tol


def plane_state(eps1: float, eps2: float) -> BlochVector:
    x = (1 + SQRT3 - 2 * SQRT3 * eps1 - (3 + SQRT3) * eps2) / 4
    y = (1 - SQRT3 + 2 * SQRT3 * eps1 - (3 - SQRT3) * eps2) / 4
    return BlochVector.qutrit(x, x, y, y)


def in_hadamard_plane(alpha: BlochVector, tol: float = 1e-9) -> bool:
    _require_qutrit(alpha)
    A, B, C, D = alpha.components
    return abs(A - B) <= tol and abs(C - D) <= tol and abs(A.imag) <= tol and abs(C.imag) <= tol


def plane_coords(alpha: BlochVector, tol: float = 1e-9) -> HadamardPlanePoint:
    if not in_hadamard_plane(alpha, tol):
        raise ValueError(f"state is not in the Hadamard plane: {alpha!r}")
    x, y = alpha.A.real, alpha.C.real
    eps2 = (1 - 2 * (x + y)) / 3
    eps1 = (1 - eps2 - 2 * (x - y) / SQRT3) / 2
    return HadamardPlanePoint(float(eps1), float(eps2))


def hadamard_matrix(d: int = 3) -> np.ndarray:
    w = omega(d)
    jk = np.outer(np.arange(d), np.arange(d))
    return w**jk / np.sqrt(d)


@lru_cache(maxsize=None)
def hadamard_eigenstates() -> dict[str, np.ndarray]:
    """Normalized kets ``|H+>``, ``|H->``, ``|H_i>`` keyed by ``'+', '-', 'i'``."""
    evals, evecs = np.linalg.eig(hadamard_matrix(3))
    out = {}
    for name, lam in (("+", 1.0), ("-", -1.0), ("i", 1j)):
        vec = evecs[:, int(np.argmin(np.abs(evals - lam)))]
        vec = vec / np.linalg.norm(vec)
        # fix the global phase so the largest amplitude is real positive
        vec = vec * np.exp(-1j * np.angle(vec[np.argmax(np.abs(vec))]))
        vec.setflags(write=False)
        out[name] = vec
    return out


def hplus() -> BlochVector:
    return BlochVector.qutrit(H_A, H_A, H_B, H_B)


def hminus() -> BlochVector:
    return BlochVector.qutrit(H_B, H_B, H_A, H_A)


def hi_state() -> BlochVector:
    return BlochVector.qutrit(H_C, H_C, H_C, H_C)


def maximally_mixed(d: int = 3) -> BlochVector:
    return BlochVector.zero(d)


def qubit_h_state() -> BlochVector:
    """Qubit Hadamard eigenstate ``(I + (X + Z)/sqrt 2)/2``."""
    s = 1 / np.sqrt(2)
    return BlochVector(2, np.array([s, s, 0.0]))


def phi_state_4dp() -> BlochVector:
    """Bloch vector of the four-decimal ``|phi>`` ket.

    With ``b|1> + b|2>`` the components are real; the rounding residue in the
    imaginary parts is dropped because the map amplifies it on slow transients.
    """
    alpha = ket_to_bloch(PHI_AMPLITUDES_4DP)
    return BlochVector(3, alpha.components.real.astype(complex))


# Wigner function --------------------------------------------------------------


@lru_cache(maxsize=None)
def phase_point_operators(d: int = 3) -> np.ndarray:
    """``A[j, k] = T A_0 T^dagger`` with ``A_0`` the parity operator and ``T = sigma_{j,k}``."""
    d = check_dim(d)
    if d == 2:
        raise ValueError("phase-point construction requires an odd prime dimension")
    parity = np.zeros((d, d), dtype=complex)
    parity[(-np.arange(d)) % d, np.arange(d)] = 1.0
    ops = np.empty((d, d, d, d), dtype=complex)
    for j in range(d):
        for k in range(d):
            t = weyl_matrix(d, (j, k))
            ops[j, k] = t @ parity @ t.conj().T
    ops.setflags(write=False)
    return ops


def wigner_function(alpha: BlochVector) -> np.ndarray:
    """Discrete Wigner function ``W[j, k] = tr(rho A_{j,k}) / d``; sums to one."""
    d = alpha.dim
    rho = density_from_bloch(alpha)
    ops = phase_point_operators(d)
    return np.real(np.einsum("ab,jkba->jk", rho, ops)) / d


def is_positive_wigner(alpha: BlochVector, tol: float = 1e-12) -> bool:
    return float(wigner_function(alpha).min()) >= -tol


# Stabilizer polytope ---------------------------------------------------------------


@lru_cache(maxsize=None)
def stabilizer_kets() -> tuple[np.ndarray, ...]:
    """The 12 single-qutrit stabilizer states: eigenvectors of X, Z, XZ and XZ^2."""
    x = weyl_matrix(3, (1, 0))
    z = weyl_matrix(3, (0, 1))
    kets = []
    for op in (x, z, x @ z, x @ z @ z):
        _, vecs = np.linalg.eig(op)
        for col in vecs.T:
            kets.append(col / np.linalg.norm(col))
    return tuple(kets)


@lru_cache(maxsize=None)
def stabilizer_plane_vertices() -> np.ndarray:
    """Hadamard-plane coordinates ``(eps1, eps2)`` of the twirled stabilizer states."""
    pts = []
    for ket in stabilizer_kets():
        p = plane_coords(hadamard_twirl(ket_to_bloch(ket)))
        pts.append((p.eps1, p.eps2))
    pts = np.array(pts)
    hull = ConvexHull(pts)
    verts = pts[hull.vertices]
    verts.setflags(write=False)
    return verts


@lru_cache(maxsize=None)
def _stabilizer_triangulation() -> Delaunay:
    return Delaunay(stabilizer_plane_vertices())


def stabilizer_polytope_test_plane(point: HadamardPlanePoint, tol: float = 1e-12) -> bool:
    """True iff the plane point lies in the (twirled) stabilizer polytope."""
    tri = _stabilizer_triangulation()
    return bool(tri.find_simplex(np.array([point.eps1, point.eps2]), tol=tol) >= 0)


def is_stabilizer_plane_state(alpha: BlochVector) -> bool:
    return stabilizer_polytope_test_plane(plane_coords(alpha))
