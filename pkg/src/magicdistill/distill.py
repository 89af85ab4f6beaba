"""Distillation maps on Bloch components, their iteration, and the derived studies.

Three engines evaluate one round ``alpha -> alpha_out`` with success probability
``p_s = tr(rho^{(x)n} Pi)``:

* :class:`DenseDistiller` builds the code projector as a dense matrix and takes
  traces against ``rho^{(x)n}``.  It is the brute-force reference.
* :class:`ExpansionDistiller` expands the projector over the stabilizer group, so
  each trace is a sum of products of input Bloch components.  It vectorizes over
  many inputs and is what plane scans of the 7-qutrit code use.
* :class:`ClosedForm5Qutrit` is the polynomial map of the 5-qutrit code.

A ``corrected`` map follows every round with a fixed single-qudit Clifford (``R``
for qutrits, ``sigma_{1,1}`` for qubits); ``canonical`` maps do not.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, Sequence

import numpy as np

from .codes import StabilizerCode, code_projector, get_code, r_matrix
from .states import (
    BlochVector,
    HadamardPlanePoint,
    bloch_from_density,
    bloch_labels,
    density_from_bloch,
    fidelity_pure,
    hadamard_eigenstates,
    hi_state,
    hminus,
    hplus,
    is_physical,
    is_positive_wigner,
    maximally_mixed,
    phi_state_4dp,
    plane_coords,
    plane_state,
    qubit_h_state,
    stabilizer_polytope_test_plane,
)
from .weyl import PhasedPauli, compose, weyl_matrix

ABORT_TOL = 1e-14
ITER_TOL = 1e-12
IDENT_TOL = 1e-6
MAX_ITERS = 200


@dataclass(frozen=True)
class DistillationOutcome:
    """Result of one round; ``output`` is ``None`` when the round was aborted."""

    output: BlochVector | None
    success_prob: float

    @property
    def aborted(self) -> bool:
        return self.output is None


# Bloch-level action of a fixed unitary ------------------------------------------


def full_index(d: int) -> list[tuple[int, int]]:
    return [(j, k) for j in range(d) for k in range(d)]


@lru_cache(maxsize=None)
def _expand_matrix(d: int) -> tuple[np.ndarray, np.ndarray]:
    """Maps stored components to the full ``d*d`` table as ``full = E @ c + F @ conj(c) + e0``."""
    labels = bloch_labels(d)
    pos = {u: i for i, u in enumerate(labels)}
    E = np.zeros((d * d, len(labels)))
    F = np.zeros((d * d, len(labels)))
    for row, (j, k) in enumerate(full_index(d)):
        if (j, k) == (0, 0):
            continue
        if (j, k) in pos:
            E[row, pos[(j, k)]] = 1.0
        else:
            F[row, pos[((-j) % d, (-k) % d)]] = 1.0
    return E, F


def full_tables(comps: np.ndarray, d: int) -> np.ndarray:
    """``(N, L)`` stored components to ``(N, d, d)`` tables of ``alpha_{j,k}``."""
    E, F = _expand_matrix(d)
    comps = np.atleast_2d(comps)
    flat = comps @ E.T + np.conj(comps) @ F.T
    flat[:, 0] = 1.0
    return flat.reshape(-1, d, d)


def unitary_bloch_action(unitary: np.ndarray) -> np.ndarray:
    """Matrix ``T`` with ``alpha'_u = sum_v T[u, v] alpha_v`` for ``rho -> U rho U^dagger``."""
    d = unitary.shape[0]
    idx = full_index(d)
    sig = {u: weyl_matrix(d, u) for u in idx}
    T = np.empty((d * d, d * d), dtype=complex)
    for a, (j, k) in enumerate(idx):
        target = sig[((-j) % d, (-k) % d)]
        for b, v in enumerate(idx):
            T[a, b] = np.trace(unitary @ sig[v] @ unitary.conj().T @ target) / d
    return T


def _apply_action(action: np.ndarray | None, comps: np.ndarray, d: int) -> np.ndarray:
    if action is None:
        return comps
    tables = full_tables(comps, d).reshape(comps.shape[0], d * d)
    out = tables @ action.T
    labels = bloch_labels(d)
    cols = [j * d + k for j, k in labels]
    res = out[:, cols]
    return res.real.astype(complex) if d == 2 else res


def correction_unitary(dim: int) -> np.ndarray:
    if dim == 3:
        return r_matrix()
    if dim == 2:
        return weyl_matrix(2, (1, 1))
    raise ValueError(f"no corrective Clifford is defined for d={dim}")


# Engines --------------------------------------------------------------------------


class DistillationMap:
    """One round of distillation as a function of the input Bloch vector."""

    name: str = "map"
    dim: int = 3
    variant: str = "canonical"

    def batch(self, comps: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Vectorized round: ``(N, L)`` inputs to ``(N, L)`` outputs and ``(N,)`` success probabilities."""
        outs, probs = [], []
        for row in np.atleast_2d(comps):
            o = self(BlochVector(self.dim, row))
            outs.append(np.full(row.shape, np.nan + 0j) if o.aborted else o.output.components)
            probs.append(o.success_prob)
        return np.array(outs), np.array(probs)

    def __call__(self, alpha: BlochVector) -> DistillationOutcome:
        out, ps = self.batch(alpha.components[None, :])
        return _outcome(self.dim, out[0], float(ps[0]))

    @property
    def fixed_points(self) -> dict[str, FixedPoint]:
        return known_fixed_points(self)

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.name} ({self.variant})>"


def _outcome(d: int, comps: np.ndarray, ps: float) -> DistillationOutcome:
    if not np.isfinite(ps) or ps < ABORT_TOL:
        return DistillationOutcome(None, max(float(ps), 0.0) if np.isfinite(ps) else 0.0)
    return DistillationOutcome(BlochVector(d, comps), ps)


def _product_traces(mats: np.ndarray, rho: np.ndarray, n: int) -> np.ndarray:
    """``tr(rho^{(x)n} M_l)`` for a stack ``mats`` of shape ``(L, d**n, d**n)``."""
    d = rho.shape[0]
    t = mats
    count = mats.shape[0]
    for _ in range(n):
        rest = t.shape[1] // d
        t = t.reshape(count, d, rest, d, rest)
        # sum_{a,b} rho[a, b] M[(b, y), (a, x)]
        t = np.tensordot(t, rho, axes=([1, 3], [1, 0]))
    return t.reshape(count)


class DenseDistiller(DistillationMap):
    """Brute-force engine: dense projector and logical operators."""

    def __init__(self, code: StabilizerCode, correction: np.ndarray | None = None, name: str | None = None):
        self.code = code
        self.dim = code.dim
        self.variant = "canonical" if correction is None else "corrected"
        self.name = name or code.name
        self.correction = correction
        self._action = None if correction is None else unitary_bloch_action(correction)
        proj = code_projector(code)
        stack = [proj]
        for j, k in bloch_labels(code.dim):
            rows, values = code.logical(-j, -k).monomial()
            # (Pi P)[:, x] = values[x] * Pi[:, rows[x]]
            stack.append(proj[:, rows] * values[None, :])
        self._mats = np.stack(stack)

    def __call__(self, alpha: BlochVector) -> DistillationOutcome:
        if alpha.dim != self.dim:
            raise ValueError(f"expected a d={self.dim} state")
        traces = _product_traces(self._mats, density_from_bloch(alpha), self.code.n)
        ps = float(traces[0].real)
        if ps < ABORT_TOL:
            return DistillationOutcome(None, max(ps, 0.0))
        comps = (traces[1:] / ps)[None, :]
        if self.dim == 2:
            comps = comps.real.astype(complex)
        comps = _apply_action(self._action, comps, self.dim)
        return DistillationOutcome(BlochVector(self.dim, comps[0]), ps)


class ExpansionDistiller(DistillationMap):
    """Traces as sums over the stabilizer group of products of Bloch components."""

    def __init__(self, code: StabilizerCode, correction: np.ndarray | None = None, name: str | None = None,
                 chunk: int = 256):
        self.code = code
        self.dim = code.dim
        self.variant = "canonical" if correction is None else "corrected"
        self.name = name or code.name
        self.correction = correction
        self._action = None if correction is None else unitary_bloch_action(correction)
        self.chunk = chunk
        group = code.stabilizer_group()
        norm = code.dim ** (code.k - code.n)
        ops = [PhasedPauli.identity(code.dim, code.n)] + [code.logical(-j, -k) for j, k in bloch_labels(code.dim)]
        self._terms = []
        for op in ops:
            prods = [compose(g, op) for g in group]
            # tr(rho sigma_{j,k}) = alpha_{-j,-k}
            jj = np.array([[(-x) % code.dim for x in p.jvec] for p in prods], dtype=np.int64)
            kk = np.array([[(-x) % code.dim for x in p.kvec] for p in prods], dtype=np.int64)
            coeff = np.array([p.coefficient() for p in prods]) * norm
            self._terms.append((jj, kk, coeff))

    def batch(self, comps: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        comps = np.atleast_2d(np.asarray(comps, dtype=complex))
        d = self.dim
        out = np.empty_like(comps)
        probs = np.empty(comps.shape[0])
        for start in range(0, comps.shape[0], self.chunk):
            sl = slice(start, start + self.chunk)
            tables = full_tables(comps[sl], d)
            vals = []
            for jj, kk, coeff in self._terms:
                factors = tables[:, jj, kk]  # (N, G, n)
                vals.append(np.prod(factors, axis=2) @ coeff)
            ps = vals[0].real
            probs[sl] = ps
            with np.errstate(divide="ignore", invalid="ignore"):
                res = np.stack(vals[1:], axis=1) / ps[:, None]
            if d == 2:
                res = res.real.astype(complex)
            out[sl] = _apply_action(self._action, res, d)
        return out, probs


# Closed form for the 5-qutrit code -------------------------------------------------


def _poly_F(A, B, C, D):
    cA, cB, cC, cD = np.conj(A), np.conj(B), np.conj(C), np.conj(D)
    return (
        B**5
        + 10 * B * (D * cA + cB) * (A * cC + C * cD)
        + 5
        * (
            A * C**2 * np.abs(A) ** 2
            + D**2 * (A * cB**2 + C)
            + cA**2 * (cB**2 * cD + cC)
            + cD**2 * (A**2 + D * cC**2)
            + np.abs(C) ** 4 * cB
        )
    ) / 81


def success_prob_5qutrit(A, B, C, D):
    """``tr(rho^{(x)5} Pi)`` for the 5-qutrit code as a polynomial in the components."""
    cA, cB, cC, cD = np.conj(A), np.conj(B), np.conj(C), np.conj(D)
    val = (
        1
        + 10 * (np.abs(A) ** 2 + np.abs(D) ** 2) * (np.abs(B) ** 2 + np.abs(C) ** 2)
        + 5
        * (
            B**2 * cA * cC**2
            + D**2 * cA**2 * cB
            + D * (A**2 * D * cC + B**2 * C**2)
            + cB**2 * (A * C**2 + cC**2 * cD)
            + cD**2 * (A**2 * B + C * cA**2)
        )
    ) / 81
    return np.real(val)


def canonical_5qutrit(A, B, C, D):
    """Unnormalized canonical outputs ``(F(A,B,C,D), F(B*,A,D,C*), F(A*,C,B,D), F(B*,D*,A*,C))``."""
    cA, cB, cC, cD = np.conj(A), np.conj(B), np.conj(C), np.conj(D)
    return (
        _poly_F(A, B, C, D),
        _poly_F(cB, A, D, cC),
        _poly_F(cA, C, B, D),
        _poly_F(cB, cD, cA, C),
    )


def apply_r_components(A, B, C, D):
    """Action of ``rho -> R rho R^dagger``: ``(A, B, C, D) -> (D*, C, B*, A)``."""
    return np.conj(D), C, np.conj(B), A


def _closed_round(comps: np.ndarray, corrected: bool) -> tuple[np.ndarray, np.ndarray]:
    A, B, C, D = (comps[:, i] for i in range(4))
    ps = success_prob_5qutrit(A, B, C, D)
    with np.errstate(divide="ignore", invalid="ignore"):
        outs = [f / ps for f in canonical_5qutrit(A, B, C, D)]
    if corrected:
        outs = apply_r_components(*outs)
    return np.stack(outs, axis=1), ps


def distill_5qutrit_canonical(A, B, C, D) -> DistillationOutcome:
    out, ps = _closed_round(np.array([[A, B, C, D]], dtype=complex), corrected=False)
    return _outcome(3, out[0], float(ps[0]))


def distill_5qutrit_closed_form(A, B, C, D) -> DistillationOutcome:
    """Corrected closed-form round: canonical decoding followed by ``R``."""
    out, ps = _closed_round(np.array([[A, B, C, D]], dtype=complex), corrected=True)
    return _outcome(3, out[0], float(ps[0]))


class ClosedForm5Qutrit(DistillationMap):
    dim = 3

    def __init__(self, corrected: bool = True):
        self.corrected = corrected
        self.variant = "corrected" if corrected else "canonical"
        self.name = "5qutrit"
        self.code = get_code("5qutrit")

    def batch(self, comps):
        return _closed_round(np.atleast_2d(np.asarray(comps, dtype=complex)), self.corrected)


def distill_generic(code: StabilizerCode, alpha: BlochVector, correction: np.ndarray | None = None) -> DistillationOutcome:
    """One dense brute-force round of ``code`` on ``alpha``."""
    return _dense_engine(code, correction)(alpha)


_DENSE_CACHE: dict = {}


def _dense_engine(code: StabilizerCode, correction: np.ndarray | None) -> DenseDistiller:
    key = (id(code), None if correction is None else correction.tobytes())
    if key not in _DENSE_CACHE:
        _DENSE_CACHE[key] = DenseDistiller(code, correction)
    return _DENSE_CACHE[key]


class TwirledMap(DistillationMap):
    """A qutrit map followed by the Hadamard twirl.

    The twirl is exact on maps that preserve the Hadamard plane, but it also
    removes roundoff that would otherwise grow along directions leaving it.
    """

    dim = 3

    def __init__(self, base: DistillationMap):
        if base.dim != 3:
            raise ValueError("the Hadamard twirl is defined for qutrit maps only")
        self.base = base
        self.name = base.name
        self.variant = base.variant
        self.code = getattr(base, "code", None)

    def batch(self, comps):
        out, ps = self.base.batch(comps)
        x = (out[:, 0] + out[:, 1]).real / 2
        y = (out[:, 2] + out[:, 3]).real / 2
        return np.stack([x, x, y, y], axis=1).astype(complex), ps

    def __repr__(self) -> str:
        return f"<TwirledMap {self.base!r}>"


MAP_VARIANTS = ("corrected", "canonical")
ENGINES = ("auto", "closed", "dense", "expansion")


def default_variant(code: str) -> str:
    return "canonical" if code == "7qutrit" else "corrected"


@lru_cache(maxsize=None)
def get_map(code: str = "5qutrit", variant: str | None = None, engine: str = "auto",
            twirl: bool = False) -> DistillationMap:
    """Look up a distillation map by code name, decoding variant and evaluation engine."""
    variant = variant or default_variant(code)
    if variant not in MAP_VARIANTS:
        raise ValueError(f"unknown map variant {variant!r}; expected one of {', '.join(MAP_VARIANTS)}")
    if engine not in ENGINES:
        raise ValueError(f"unknown engine {engine!r}; expected one of {', '.join(ENGINES)}")
    stab = get_code(code)
    corrected = variant == "corrected"
    if code == "7qutrit" and corrected:
        raise ValueError("the 7-qutrit code is only defined with canonical decoding")
    correction = correction_unitary(stab.dim) if corrected else None
    if engine == "closed" or (engine == "auto" and code == "5qutrit"):
        if code != "5qutrit":
            raise ValueError("a closed form exists only for the 5-qutrit code")
        m: DistillationMap = ClosedForm5Qutrit(corrected)
    elif engine == "dense" or (engine == "auto" and code == "5qubit"):
        m = DenseDistiller(stab, correction, name=code)
    else:
        m = ExpansionDistiller(stab, correction, name=code)
    return TwirledMap(m) if twirl else m


# Fixed points and iteration ------------------------------------------------------


@dataclass(frozen=True)
class FixedPoint:
    name: str
    state: BlochVector
    attracting: bool


@lru_cache(maxsize=None)
def phi_fixed_point() -> BlochVector:
    """The ``|phi>`` attractor, refined from its four-decimal amplitudes."""
    x = phi_state_4dp().components.real.astype(complex)[None, :]
    for _ in range(500):
        nxt, _ = _closed_round(x, corrected=True)
        if np.max(np.abs(nxt - x)) < 1e-15:
            x = nxt
            break
        x = nxt
    return BlochVector(3, x[0])


def known_fixed_points(m: DistillationMap) -> dict[str, FixedPoint]:
    if m.dim == 2:
        if m.variant == "corrected":
            t = BlochVector(2, np.full(3, 1 / np.sqrt(3)))
            # the H line is invariant but roundoff off it flows to T
            return {"H": FixedPoint("H", qubit_h_state(), True), "T": FixedPoint("T", t, True)}
        return {}
    if m.name == "5qutrit" and m.variant == "corrected":
        return {
            "H+": FixedPoint("H+", hplus(), True),
            "H-": FixedPoint("H-", hminus(), True),
            "phi": FixedPoint("phi", phi_fixed_point(), True),
            "Hi": FixedPoint("Hi", hi_state(), False),
            "mixed": FixedPoint("mixed", maximally_mixed(3), True),
        }
    # the 7-qutrit map fixes the whole H+ to H- segment, so no point on it attracts
    return {
        "H+": FixedPoint("H+", hplus(), False),
        "H-": FixedPoint("H-", hminus(), False),
        "Hi": FixedPoint("Hi", hi_state(), False),
        "mixed": FixedPoint("mixed", maximally_mixed(3), True),
    }


def named_state(name: str, dim: int = 3) -> BlochVector:
    """Pure reference states addressable by name."""
    if dim == 2:
        if name in ("H", "Hplus"):
            return qubit_h_state()
        if name == "mixed":
            return maximally_mixed(2)
        raise ValueError(f"unknown qubit state {name!r}")
    table = {
        "Hplus": hplus,
        "H+": hplus,
        "Hminus": hminus,
        "H-": hminus,
        "Hi": hi_state,
        "phi": phi_fixed_point,
        "mixed": lambda: maximally_mixed(3),
    }
    if name not in table:
        raise ValueError(f"unknown state {name!r}; expected one of Hplus, Hminus, Hi, phi, mixed")
    return table[name]()


@dataclass(frozen=True)
class Verdict:
    kind: str  # "converged", "cycling", "non-convergent" or "aborted"
    target: str | None = None
    period: int | None = None
    point: BlochVector | None = None

    def describe(self) -> str:
        if self.kind == "converged":
            return f"->{self.target}" if self.target else "->unidentified"
        if self.kind == "cycling":
            return f"cycling(period={self.period})"
        return self.kind


@dataclass
class IterationTrace:
    states: list[BlochVector]
    success_probs: list[float]
    verdict: Verdict
    iterations: int

    @property
    def final(self) -> BlochVector:
        return self.states[-1]


def identify(alpha: BlochVector, fixed: dict[str, FixedPoint], tol: float = IDENT_TOL) -> str | None:
    best, best_dist = None, tol
    for name, fp in fixed.items():
        dist = alpha.distance(fp.state)
        if dist <= best_dist:
            best, best_dist = name, dist
    return best


def depolarize(alpha: BlochVector, eps: float) -> BlochVector:
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"depolarizing weight must lie in [0, 1], got {eps}")
    return alpha.scaled(1.0 - eps)


def iterate_map(m: DistillationMap, alpha0: BlochVector, max_iters: int = MAX_ITERS, tol: float = ITER_TOL,
                ident_tol: float = IDENT_TOL, max_period: int = 8, cycle_tol: float = 1e-8,
                check_physical: bool = True) -> IterationTrace:
    """Feed each output back as the next input until it stops moving."""
    if check_physical and not is_physical(alpha0):
        raise ValueError("initial state is not physical")
    fixed = m.fixed_points
    states, probs = [alpha0], []
    x = alpha0
    for it in range(1, max_iters + 1):
        out = m(x)
        probs.append(out.success_prob)
        if out.aborted:
            return IterationTrace(states, probs, Verdict("aborted"), it)
        states.append(out.output)
        step = out.output.distance(x)
        x = out.output
        if step < tol:
            name = identify(x, fixed, ident_tol)
            return IterationTrace(states, probs, Verdict("converged", name, point=x), it)
    # the smallest matching lag; a lag of one is slow convergence, not a cycle
    period = next((p for p in range(1, max_period + 1)
                   if len(states) > p and states[-1].distance(states[-1 - p]) < cycle_tol), None)
    if period is not None and period > 1:
        return IterationTrace(states, probs, Verdict("cycling", period=period, point=x), max_iters)
    name = identify(x, fixed, ident_tol)
    if name is not None:
        return IterationTrace(states, probs, Verdict("converged", name, point=x), max_iters)
    return IterationTrace(states, probs, Verdict("non-convergent", point=x), max_iters)


# Thresholds -----------------------------------------------------------------------


@dataclass(frozen=True)
class ThresholdResult:
    eps_star: float
    lower: float
    upper: float
    steps: int


def converges_to(m: DistillationMap, start: BlochVector, target: BlochVector, iters: int = 60,
                 tol: float = 1e-4) -> bool:
    x = start.components[None, :]
    goal = target.components[None, :]
    for _ in range(iters):
        x, ps = m.batch(x)
        if not np.isfinite(ps[0]) or ps[0] < ABORT_TOL or not np.all(np.isfinite(x)):
            return False
        if np.linalg.norm(x - goal) < tol:
            return True
    return False


def threshold_search(target: BlochVector | str, m: DistillationMap | None = None, tol_eps: float = 1e-4,
                     bracket: tuple[float, float] = (0.0, 0.5), max_steps: int = 50, probe_iters: int = 60,
                     conv_tol: float = 1e-4) -> ThresholdResult:
    """Bisect the depolarizing weight at which iteration stops reaching ``target``."""
    m = m or get_map("5qutrit")
    if isinstance(target, str):
        target = named_state(target, m.dim)
    lo, hi = bracket
    if not converges_to(m, depolarize(target, lo), target, probe_iters, conv_tol):
        raise ValueError("target is not reached from the lower end of the bracket")
    steps = 0
    while hi - lo > tol_eps and steps < max_steps:
        mid = 0.5 * (lo + hi)
        if converges_to(m, depolarize(target, mid), target, probe_iters, conv_tol):
            lo = mid
        else:
            hi = mid
        steps += 1
    return ThresholdResult(0.5 * (lo + hi), lo, hi, steps)


# Noise suppression ----------------------------------------------------------------


@dataclass(frozen=True)
class SuppressionFit:
    """Local model ``eps1_out ~ (c10 + c12 eps2) eps1`` and ``eps2_out ~ (c20 + c21 eps1) eps2``."""

    c10: float
    c12: float
    c20: float
    c21: float
    eps1_terms: dict[str, float] = field(default_factory=dict)
    eps2_terms: dict[str, float] = field(default_factory=dict)


_MONOMIALS = (
    ("e1", 1, 0), ("e2", 0, 1),
    ("e1^2", 2, 0), ("e1*e2", 1, 1), ("e2^2", 0, 2),
    ("e1^3", 3, 0), ("e1^2*e2", 2, 1), ("e1*e2^2", 1, 2), ("e2^3", 0, 3),
)


def plane_error_weights(alpha: BlochVector) -> tuple[float, float]:
    """``(<H-|rho|H->, <H_i|rho|H_i>)``."""
    rho = density_from_bloch(alpha)
    kets = hadamard_eigenstates()
    return (float(np.real(kets["-"].conj() @ rho @ kets["-"])), float(np.real(kets["i"].conj() @ rho @ kets["i"])))


def suppression_coefficients(m: DistillationMap | None = None, grid_max: float = 1e-3,
                             points: int = 9) -> SuppressionFit:
    """Least-squares fit of one-round plane errors around ``|H+>``.

    The second-order monomials are fitted alongside the bilinear ones; leaving
    them out lets the ``eps2**2`` part of ``eps1_out`` leak into ``c12``.
    """
    m = m or get_map("5qutrit")
    grid = np.linspace(0.0, grid_max, points)
    rows, y1, y2 = [], [], []
    for e1 in grid:
        for e2 in grid:
            out = m(plane_state(e1, e2))
            o1, o2 = plane_error_weights(out.output)
            rows.append([e1**a * e2**b for _, a, b in _MONOMIALS])
            y1.append(o1)
            y2.append(o2)
    design = np.array(rows)
    coef1 = np.linalg.lstsq(design, np.array(y1), rcond=None)[0]
    coef2 = np.linalg.lstsq(design, np.array(y2), rcond=None)[0]
    names = [t[0] for t in _MONOMIALS]
    t1 = dict(zip(names, map(float, coef1)))
    t2 = dict(zip(names, map(float, coef2)))
    return SuppressionFit(t1["e1"], t1["e1*e2"], t2["e2"], t2["e1*e2"], t1, t2)


@dataclass(frozen=True)
class ExponentFit:
    slope: float
    intercept: float
    eps: np.ndarray
    eps_out: np.ndarray


def output_error(m: DistillationMap, target: BlochVector, start: BlochVector) -> float:
    out = m(start)
    if out.aborted:
        return float("nan")
    return 1.0 - fidelity_pure(target, out.output)


def suppression_exponent(target: BlochVector | str, m: DistillationMap | None = None, eps_range=(1e-6, 1e-3),
                         points: int = 10, noise: Callable[[float], BlochVector] | None = None) -> ExponentFit:
    """Slope of ``log eps_out`` against ``log eps`` for one round."""
    m = m or get_map("5qutrit")
    if isinstance(target, str):
        target = named_state(target, m.dim)
    if noise is None:
        noise = lambda e: depolarize(target, e)  # noqa: E731
    eps = np.geomspace(eps_range[0], eps_range[1], points)
    eps_out = np.array([output_error(m, target, noise(e)) for e in eps])
    slope, intercept = np.polyfit(np.log(eps), np.log(eps_out), 1)
    return ExponentFit(float(slope), float(intercept), eps, eps_out)


def success_probability_curve(family: BlochVector | str, eps_values: Iterable[float],
                              m: DistillationMap | None = None) -> list[tuple[float, float]]:
    m = m or get_map("5qutrit")
    target = named_state(family, m.dim) if isinstance(family, str) else family
    return [(float(e), m(depolarize(target, float(e))).success_prob) for e in eps_values]


# Hadamard-plane scans ---------------------------------------------------------------

SCAN_LABELS = ("stabilizer", "positive-wigner", "H+", "H-", "mixed-segment", "unstable", "none")
SCAN_COLUMNS = (
    "row", "col", "eps1", "eps2", "label", "iterations",
    "final_A_re", "final_A_im", "final_B_re", "final_B_im",
    "final_C_re", "final_C_im", "final_D_re", "final_D_im",
    "p_s_first_round",
)


@dataclass
class ScanPoint:
    row: int
    col: int
    eps1: float
    eps2: float
    label: str
    iterations: int
    final: np.ndarray | None
    p_s_first_round: float
    path: list[tuple[float, float]] | None = None


def plane_grid(resolution: int) -> list[tuple[int, int, float, float]]:
    """Barycentric grid over the physical triangle, ordered by ``(row, col)``."""
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    n = resolution - 1
    return [(i, j, i / n, j / n) for i in range(resolution) for j in range(resolution - i)]


PLANE_PHYSICAL_TOL = 1e-8


def _plane_weights(comps: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    x, y = comps[:, 0].real, comps[:, 2].real
    eps2 = (1 - 2 * (x + y)) / 3
    eps1 = (1 - eps2 - 2 * (x - y) / np.sqrt(3.0)) / 2
    return eps1, eps2


def _iterate_batch(m: DistillationMap, comps: np.ndarray, max_iters: int, tol: float, record: bool):
    """Iterate plane states together; a point stops once it converges, aborts or leaves the triangle."""
    x = comps.copy()
    active = np.ones(len(x), dtype=bool)
    iters = np.zeros(len(x), dtype=int)
    first_ps = np.full(len(x), np.nan)
    aborted = np.zeros(len(x), dtype=bool)
    converged = np.zeros(len(x), dtype=bool)
    paths = [[row.copy()] for row in x] if record else None
    for it in range(1, max_iters + 1):
        idx = np.nonzero(active)[0]
        if idx.size == 0:
            break
        out, ps = m.batch(x[idx])
        if it == 1:
            first_ps[idx] = ps
        e1, e2 = _plane_weights(out)
        # edge states are rank deficient and roundoff can push them outside
        outside = (e1 < -PLANE_PHYSICAL_TOL) | (e2 < -PLANE_PHYSICAL_TOL) | (e1 + e2 > 1 + PLANE_PHYSICAL_TOL)
        failed = ~np.isfinite(ps) | (ps < ABORT_TOL) | ~np.all(np.isfinite(out), axis=1)
        bad = failed | outside
        aborted[idx[failed]] = True
        active[idx[bad]] = False
        good = idx[~bad]
        out_good = out[~bad]
        step = np.linalg.norm(out_good - x[good], axis=1)
        x[good] = out_good
        iters[good] = it
        if record:
            for g, row in zip(good, out_good):
                paths[g].append(row.copy())
        active[good[step < tol]] = False
        converged[good[step < tol]] = True
    return x, iters, first_ps, aborted, converged, paths


def _classify(m: DistillationMap, comps: np.ndarray, eps1: float, eps2: float, ident_tol: float, aborted: bool,
              converged: bool) -> str:
    start = plane_state(eps1, eps2)
    if stabilizer_polytope_test_plane(HadamardPlanePoint(eps1, eps2)):
        return "stabilizer"
    if is_positive_wigner(start):
        return "positive-wigner"
    if aborted:
        return "none"
    final = BlochVector(3, comps)
    name = identify(final, m.fixed_points, ident_tol)
    if name in ("H+", "H-"):
        return name
    if name == "Hi":
        return "unstable"
    if not converged:
        return "none"
    try:
        point = plane_coords(final, tol=1e-6)
    except ValueError:
        return "none"
    if point.eps2 <= ident_tol and not stabilizer_polytope_test_plane(point):
        return "mixed-segment"
    return "none"


def _scan_chunk(args) -> list[ScanPoint]:
    key, cells, max_iters, tol, ident_tol, record = args
    m = get_map(*key, twirl=True)
    comps = np.array([plane_state(e1, e2).components for _, _, e1, e2 in cells])
    final, iters, first_ps, aborted, converged, paths = _iterate_batch(m, comps, max_iters, tol, record)
    out = []
    for n, (i, j, e1, e2) in enumerate(cells):
        label = _classify(m, final[n], e1, e2, ident_tol, bool(aborted[n]), bool(converged[n]))
        path = None
        if record:
            path = []
            for row in paths[n]:
                try:
                    p = plane_coords(BlochVector(3, row), tol=1e-6)
                    path.append((p.eps1, p.eps2))
                except ValueError:
                    break
        out.append(ScanPoint(i, j, e1, e2, label, int(iters[n]), None if aborted[n] else final[n],
                             float(first_ps[n]), path))
    return out


def scan_hadamard_plane(code: str = "5qutrit", variant: str | None = None, resolution: int = 201,
                        max_iters: int = MAX_ITERS, tol: float = ITER_TOL, ident_tol: float = IDENT_TOL,
                        record_paths: bool = False, workers: int = 1, engine: str = "auto") -> list[ScanPoint]:
    """Classify every grid point of the Hadamard triangle by where iteration takes it.

    Rounds are followed by the Hadamard twirl so that iterates stay in the plane.
    """
    if code == "5qubit":
        raise ValueError("plane scans are defined for qutrit codes only")
    key = (code, variant or default_variant(code), engine)
    get_map(*key, twirl=True)
    cells = plane_grid(resolution)
    size = max(1, math.ceil(len(cells) / max(1, 4 * workers)))
    chunks = [(key, cells[s:s + size], max_iters, tol, ident_tol, record_paths) for s in range(0, len(cells), size)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_scan_chunk, chunks))
    else:
        parts = [_scan_chunk(c) for c in chunks]
    return [p for part in parts for p in part]


def _fmt(x: float) -> str:
    return repr(float(x))


def write_scan_csv(points: Sequence[ScanPoint], fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(SCAN_COLUMNS)
    for p in points:
        final = p.final if p.final is not None else np.full(4, np.nan + 0j)
        parts = []
        for c in final:
            parts += [_fmt(c.real), _fmt(c.imag)]
        writer.writerow([p.row, p.col, _fmt(p.eps1), _fmt(p.eps2), p.label, p.iterations, *parts,
                         _fmt(p.p_s_first_round)])


# Oracle cross-check -------------------------------------------------------------------


def random_physical_states(count: int, rng: np.random.Generator, d: int = 3, mix: bool = True) -> list[BlochVector]:
    """Haar-random pure states, each optionally mixed with ``I/d`` by a uniform weight."""
    out = []
    while len(out) < count:
        v = rng.normal(size=d) + 1j * rng.normal(size=d)
        v /= np.linalg.norm(v)
        rho = np.outer(v, v.conj())
        if mix:
            p = rng.uniform()
            rho = (1 - p) * rho + p * np.eye(d) / d
        alpha = bloch_from_density(rho)
        if is_physical(alpha):
            out.append(alpha)
    return out


@dataclass(frozen=True)
class OracleReport:
    samples: int
    max_component_error: float
    max_success_prob_error: float


def oracle_check(samples: int = 1000, seed: int = 0, variant: str = "corrected") -> OracleReport:
    """Compare the closed-form 5-qutrit map with the dense reference on random states."""
    rng = np.random.default_rng(seed)
    states = random_physical_states(samples, rng)
    closed = get_map("5qutrit", variant, "closed")
    dense = get_map("5qutrit", variant, "dense")
    comps = np.array([s.components for s in states])
    c_out, c_ps = closed.batch(comps)
    err, perr = 0.0, 0.0
    for n, s in enumerate(states):
        ref = dense(s)
        err = max(err, float(np.max(np.abs(ref.output.components - c_out[n]))))
        perr = max(perr, abs(ref.success_prob - float(c_ps[n])))
    return OracleReport(samples, err, perr)
