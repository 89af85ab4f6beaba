"""Sub-protocols that turn distilled qutrit states into a non-Clifford gate.

* the parity checker purifies plus-states ``(|0> + |1>)/sqrt 2``;
* equatorialization turns two plus-states into a phase state;
* gate injection consumes a phase state to apply a diagonal unitary;
* :func:`promoted_group_probe` inspects ``K = H N H N H`` for ``N = diag(1, 1, -1)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .codes import s_gate_matrix
from .states import BlochVector, density_from_bloch, hadamard_matrix
from .weyl import omega, shift_matrix

ABORT_TOL = 1e-14
PHASE_TOL = 1e-9

PSI_PLUS = np.array([1.0, 1.0, 0.0]) / np.sqrt(2)
PSI_MINUS = np.array([1.0, -1.0, 0.0]) / np.sqrt(2)
KET_TWO = np.array([0.0, 0.0, 1.0])


def as_density(state) -> np.ndarray:
    """Accept a Bloch vector, a ket or a density matrix."""
    if isinstance(state, BlochVector):
        return density_from_bloch(state)
    arr = np.asarray(state, dtype=complex)
    if arr.ndim == 1:
        arr = arr / np.linalg.norm(arr)
        return np.outer(arr, arr.conj())
    if arr.shape != (3, 3):
        raise ValueError(f"expected a qutrit state, got shape {arr.shape}")
    return arr


def depolarized(rho: np.ndarray, eps: float) -> np.ndarray:
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"depolarizing weight must lie in [0, 1], got {eps}")
    return (1 - eps) * rho + eps * np.eye(rho.shape[0]) / rho.shape[0]


def twirl(rho: np.ndarray, unitaries) -> np.ndarray:
    """Uniform mixture ``sum_U U rho U^dagger / |set|``."""
    return sum(u @ rho @ u.conj().T for u in unitaries) / len(unitaries)


# Parity checker ---------------------------------------------------------------


@dataclass(frozen=True)
class ParityState:
    """``(1 - eta - delta)|Psi+><Psi+| + delta|Psi-><Psi-| + eta|2><2|``."""

    eta: float
    delta: float
    round: int = 0

    def __post_init__(self):
        tol = 1e-12
        if self.eta < -tol or self.delta < -tol or self.eta + self.delta > 1 + tol:
            raise ValueError(f"invalid parity state weights eta={self.eta}, delta={self.delta}")

    @property
    def total_error(self) -> float:
        return self.eta + self.delta

    def density(self) -> np.ndarray:
        good = 1 - self.eta - self.delta
        return (
            good * np.outer(PSI_PLUS, PSI_PLUS)
            + self.delta * np.outer(PSI_MINUS, PSI_MINUS)
            + self.eta * np.outer(KET_TWO, KET_TWO)
        ).astype(complex)

    @classmethod
    def from_density(cls, rho: np.ndarray, round: int = 0, tol: float = 1e-10) -> ParityState:
        """Read off ``(eta, delta)``, checking that ``rho`` has the parity-state form."""
        eta = float(np.real(rho[2, 2]))
        delta = float(np.real(PSI_MINUS @ rho @ PSI_MINUS))
        out = cls(eta, delta, round)
        if np.max(np.abs(out.density() - rho)) > tol:
            raise ValueError("density matrix is not of the parity-state form")
        return out


def preparation_unitaries() -> tuple[list[np.ndarray], np.ndarray, list[np.ndarray]]:
    h2 = np.linalg.matrix_power(hadamard_matrix(3), 2)
    s = s_gate_matrix(3)
    return [np.eye(3), h2], shift_matrix(3).conj().T, [np.eye(3), s, s @ s]


def prepare_density(state, eps: float = 0.0, pre_rotation: np.ndarray | None = None) -> np.ndarray:
    """Apply depolarizing noise, an optional Clifford, then the three mixing steps as exact channels.

    The mixing steps move the ``|1>, |2>`` pair onto ``|0>, |1>``, so the input
    should carry its small weight on ``|0>``.  ``|H+>`` does not; rotating it
    by ``R`` first gives ``|H->``, which does.
    """
    rho = depolarized(as_density(state), eps)
    if pre_rotation is not None:
        rho = pre_rotation @ rho @ pre_rotation.conj().T
    first, shift, third = preparation_unitaries()
    rho = twirl(rho, first)
    rho = shift @ rho @ shift.conj().T
    return twirl(rho, third)


def sample_preparation(state, trials: int, seed: int = 0, eps: float = 0.0,
                       pre_rotation: np.ndarray | None = None) -> np.ndarray:
    """Monte Carlo counterpart of :func:`prepare_density`: average over ``trials`` seeded unitary draws."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    rho = depolarized(as_density(state), eps)
    if pre_rotation is not None:
        rho = pre_rotation @ rho @ pre_rotation.conj().T
    first, shift, third = preparation_unitaries()
    rng = np.random.default_rng(seed)
    picks = zip(rng.integers(len(first), size=trials), rng.integers(len(third), size=trials))
    acc = np.zeros((3, 3), dtype=complex)
    for a, b in picks:
        u = third[b] @ shift @ first[a]
        acc += u @ rho @ u.conj().T
    return acc / trials


def parity_prepare(state, eps: float = 0.0, pre_rotation: np.ndarray | None = None) -> ParityState:
    return ParityState.from_density(prepare_density(state, eps, pre_rotation))


@dataclass(frozen=True)
class ParityStep:
    state: ParityState | None
    success_prob: float

    @property
    def aborted(self) -> bool:
        return self.state is None


def parity_success_prob(eta: float) -> float:
    return (1 + eta * (3 * eta - 2)) / 2


def parity_step(s: ParityState) -> ParityStep:
    """Closed-form recurrence for one round of parity checking."""
    p = parity_success_prob(s.eta)
    if p < ABORT_TOL:
        return ParityStep(None, p)
    eta = s.eta**2 / p
    delta = s.delta * (1 - s.eta - s.delta) / p
    return ParityStep(ParityState(eta, delta, s.round + 1), p)


def parity_projector() -> np.ndarray:
    """Projector onto the +1 eigenspace of ``Z_1 Z_2^dagger``: ``sum_j |j,j><j,j|``."""
    proj = np.zeros((9, 9))
    for j in range(3):
        proj[4 * j, 4 * j] = 1.0
    return proj


def parity_dense_step(s: ParityState) -> ParityStep:
    """Dense two-qutrit simulation: postselect ``Z_1 Z_2^dagger = 1`` and decode ``|j,j> -> |j>``."""
    rho = s.density()
    pair = np.kron(rho, rho)
    proj = parity_projector()
    p = float(np.real(np.trace(proj @ pair)))
    if p < ABORT_TOL:
        return ParityStep(None, p)
    decode = np.zeros((3, 9))
    for j in range(3):
        decode[j, 4 * j] = 1.0
    out = decode @ pair @ decode.T / p
    return ParityStep(ParityState.from_density(out, s.round + 1), p)


@dataclass(frozen=True)
class ParityRecord:
    round: int
    eta: float
    delta: float
    p_success: float | None

    @property
    def total_error(self) -> float:
        return self.eta + self.delta

    def as_dict(self) -> dict:
        return {
            "round": self.round,
            "eta": self.eta,
            "delta": self.delta,
            "p_success": self.p_success,
            "total_error": self.total_error,
        }


def parity_trajectory(start: ParityState, rounds: int) -> tuple[list[ParityRecord], bool]:
    """``rounds`` records; the first is ``start`` itself and each later one follows one check.

    Returns the records and whether the run was aborted.
    """
    if rounds < 1:
        raise ValueError("rounds must be at least 1")
    records = [ParityRecord(1, start.eta, start.delta, None)]
    s = start
    for r in range(2, rounds + 1):
        step = parity_step(s)
        if step.aborted:
            return records, True
        s = step.state
        records.append(ParityRecord(r, s.eta, s.delta, step.success_prob))
    return records, False


# Equatorialization -------------------------------------------------------------


def logical_kets() -> np.ndarray:
    """Rows ``|0_L>, |1_L>, |2_L>`` of the two-qutrit subspace, normalized."""
    w = omega(3)
    kets = np.zeros((3, 9), dtype=complex)
    for x in range(3):
        # |x_L> = |x,x> + w|x+1,x+2> + w^2|x+2,x+1>
        kets[x, 3 * x + x] += 1
        kets[x, 3 * ((x + 1) % 3) + (x + 2) % 3] += w
        kets[x, 3 * ((x + 2) % 3) + (x + 1) % 3] += w**2
    return kets / np.sqrt(3)


@dataclass(frozen=True)
class EquatorialOutcome:
    output: np.ndarray | None
    success_prob: float

    @property
    def aborted(self) -> bool:
        return self.output is None


def equatorialize(first, second) -> EquatorialOutcome:
    """Project two qutrits onto the logical subspace and decode ``|x_L> -> |x>``."""
    pair = np.kron(as_density(first), as_density(second))
    decode = logical_kets().conj()
    out = decode @ pair @ decode.conj().T
    p = float(np.real(np.trace(out)))
    if p < ABORT_TOL:
        return EquatorialOutcome(None, max(p, 0.0))
    return EquatorialOutcome(out / p, p)


def phi_0_pi() -> np.ndarray:
    return PhaseState(0.0, np.pi).ket()


# Gate injection ----------------------------------------------------------------


@dataclass(frozen=True)
class PhaseState:
    """``(|0> + e^{i theta}|1> + e^{i phi}|2>)/sqrt 3``."""

    theta: float
    phi: float

    def phases(self) -> np.ndarray:
        return np.array([0.0, self.theta, self.phi])

    def ket(self) -> np.ndarray:
        return np.exp(1j * self.phases()) / np.sqrt(3)


def injection_unitary(phase: PhaseState, k: int) -> np.ndarray:
    """``U_k = diag(e^{i theta_{(y + k) mod 3}})`` with ``theta_0 = 0``."""
    idx = (np.arange(3) + k) % 3
    return np.diag(np.exp(1j * phase.phases()[idx]))


def injection_projectors() -> list[np.ndarray]:
    """Eigenspaces of ``Z_1 Z_2^dagger``: outcome ``omega**k`` means ``x - y = k``."""
    projs = []
    for k in range(3):
        p = np.zeros((9, 9))
        for y in range(3):
            i = 3 * ((y + k) % 3) + y
            p[i, i] = 1.0
        projs.append(p)
    return projs


def injection_decoder(k: int) -> np.ndarray:
    """Isometry ``|y + k, y> -> |y>`` on the ``omega**k`` eigenspace."""
    dec = np.zeros((3, 9))
    for y in range(3):
        dec[y, 3 * ((y + k) % 3) + y] = 1.0
    return dec


@dataclass(frozen=True)
class InjectionResult:
    outcome: int
    label: str
    unitary: np.ndarray
    post_state: np.ndarray
    probabilities: np.ndarray = field(repr=False)


def injection_probabilities(phase: PhaseState, target) -> np.ndarray:
    pair = np.kron(np.outer(phase.ket(), phase.ket().conj()), as_density(target))
    return np.array([float(np.real(np.trace(p @ pair))) for p in injection_projectors()])


def inject(phase: PhaseState, target, rng: np.random.Generator | int | None = None) -> InjectionResult:
    """Measure ``Z_1 Z_2^dagger`` on ``|Phi> (x) target`` and decode the sampled outcome."""
    rng = np.random.default_rng(rng)
    ket = phase.ket()
    pair = np.kron(np.outer(ket, ket.conj()), as_density(target))
    probs = np.array([float(np.real(np.trace(p @ pair))) for p in injection_projectors()])
    probs = np.clip(probs, 0.0, None)
    k = int(rng.choice(3, p=probs / probs.sum()))
    dec = injection_decoder(k)
    post = dec @ pair @ dec.T / probs[k]
    return InjectionResult(k, f"U_{k}", injection_unitary(phase, k), post, probs)


def sample_outcomes(phase: PhaseState, target, trials: int, seed: int = 0) -> np.ndarray:
    """Outcome counts over ``trials`` seeded draws from the exact Born probabilities."""
    probs = injection_probabilities(phase, target)
    rng = np.random.default_rng(seed)
    draws = rng.choice(3, size=trials, p=probs / probs.sum())
    return np.bincount(draws, minlength=3)


def same_up_to_phase(u: np.ndarray, v: np.ndarray, tol: float = PHASE_TOL) -> bool:
    d = u.shape[0]
    return abs(np.trace(u.conj().T @ v)) >= d * (1 - tol)


@dataclass(frozen=True)
class ClosureResult:
    order: int | None
    elements: tuple[np.ndarray, ...] = field(repr=False)

    @property
    def exceeded(self) -> bool:
        return self.order is None


def group_closure(generators, bound: int = 1000, tol: float = PHASE_TOL) -> ClosureResult:
    """Breadth-first closure under multiplication, elements identified up to global phase."""
    d = generators[0].shape[0]
    elements = [np.eye(d, dtype=complex)]
    frontier = list(elements)
    while frontier:
        fresh = []
        for a in frontier:
            for g in generators:
                prod = a @ g
                if not any(same_up_to_phase(prod, e, tol) for e in elements):
                    elements.append(prod)
                    fresh.append(prod)
                    if len(elements) > bound:
                        return ClosureResult(None, tuple(elements))
        frontier = fresh
    return ClosureResult(len(elements), tuple(elements))


def injection_group_closure(phase: PhaseState, bound: int = 1000) -> ClosureResult:
    return group_closure([injection_unitary(phase, k) for k in range(3)], bound)


# Promoted Clifford group -------------------------------------------------------


def n_gate() -> np.ndarray:
    return injection_unitary(PhaseState(0.0, np.pi), 0).real.astype(complex)


def k_operator() -> np.ndarray:
    h, n = hadamard_matrix(3), n_gate()
    return h @ n @ h @ n @ h


@dataclass(frozen=True)
class ProbeReport:
    eigenphases: tuple[float, ...]
    expected: tuple[float, ...]
    max_phase_error: float
    identity_power: int | None
    n_max: int

    @property
    def lambda1(self) -> float:
        """The computed eigenphase matching ``+arctan(sqrt 2)/pi``."""
        return self.eigenphases[1]

    def as_dict(self) -> dict:
        return {
            "eigenphases": list(self.eigenphases),
            "expected": list(self.expected),
            "max_phase_error": self.max_phase_error,
            "lambda1": self.lambda1,
            "identity_power": self.identity_power,
            "n_max": self.n_max,
        }


def promoted_group_probe(n_max: int = 10_000, identity_tol: float = 1e-8) -> ProbeReport:
    """Eigenphases ``lambda`` of ``K`` (eigenvalues ``e^{i pi lambda}``) and a search for ``K^m ~ I``."""
    k = k_operator()
    phases = np.sort(np.angle(np.linalg.eigvals(k)) / np.pi)
    lam = np.arctan(np.sqrt(2)) / np.pi
    expected = np.sort(np.array([-lam, 0.5, lam]))
    err = float(np.max(np.abs(phases - expected)))
    power = np.eye(3, dtype=complex)
    found = None
    for m in range(1, n_max + 1):
        power = power @ k
        if same_up_to_phase(power, np.eye(3), identity_tol):
            found = m
            break
    return ProbeReport(tuple(map(float, phases)), tuple(map(float, expected)), err, found, n_max)
