import numpy as np
import pytest

from magicdistill.codes import (
    CODE_NAMES,
    CliffordGate,
    StabilizerCode,
    clifford_gate,
    code_projector,
    five_qudit_code,
    get_code,
    parity_code,
    r_matrix,
    rank_mod_p,
    seven_qutrit_code,
)
from magicdistill.states import conjugate, hminus, hplus, ket_to_bloch
from magicdistill.weyl import PhasedPauli, commutation_phase, compose


@pytest.fixture(scope="module")
def projectors():
    return {name: code_projector(get_code(name)) for name in CODE_NAMES}


@pytest.mark.parametrize("name,dim,n,trace", [("5qutrit", 3, 5, 3), ("7qutrit", 3, 7, 3), ("5qubit", 2, 5, 2)])
def test_projector_idempotent_hermitian_trace(projectors, name, dim, n, trace):
    p = projectors[name]
    assert p.shape == (dim**n, dim**n)
    assert np.allclose(p @ p, p, atol=1e-10)
    assert np.allclose(p, p.conj().T, atol=1e-12)
    assert np.trace(p).real == pytest.approx(trace, abs=1e-10)


@pytest.mark.parametrize("name", CODE_NAMES)
def test_logicals_commute_with_projector(projectors, name):
    code = get_code(name)
    p = projectors[name]
    for op in (code.logical_x, code.logical_z):
        m = op.matrix()
        assert np.allclose(m @ p, p @ m, atol=1e-10)


@pytest.mark.parametrize("name", CODE_NAMES)
def test_generators_stabilize_code_space(projectors, name):
    code = get_code(name)
    p = projectors[name]
    for g in code.generators:
        assert np.allclose(g.matrix() @ p, p, atol=1e-10)


@pytest.mark.parametrize("name", CODE_NAMES)
def test_stabilizer_group_has_full_size(name):
    code = get_code(name)
    group = code.stabilizer_group()
    assert len(group) == code.dim ** (code.n - code.k)
    assert len({(g.phase, g.jvec, g.kvec) for g in group}) == len(group)


@pytest.mark.parametrize("name", CODE_NAMES)
def test_logical_pauli_algebra(name):
    code = get_code(name)
    d = code.dim
    assert commutation_phase(code.logical_x, code.logical_z) == (-1) % d
    # sigma^L composes exactly like the single-qudit sigma
    for a in [(1, 0), (0, 1), (1, 1)]:
        for b in [(1, 0), (0, 1), (1, 2)]:
            single = compose(PhasedPauli.single(d, *a), PhasedPauli.single(d, *b))
            target = code.logical(*single.jvec, *single.kvec)
            expected = PhasedPauli(d, target.phase + single.phase, target.jvec, target.kvec)
            assert compose(code.logical(*a), code.logical(*b)) == expected


def test_five_qutrit_generator_table():
    code = five_qudit_code(3)
    g1 = code.generators[0]
    assert g1.jvec == (1, 0, 0, 2, 0) and g1.kvec == (0, 1, 2, 0, 0)
    # cyclic structure
    for a, b in zip(code.generators, code.generators[1:]):
        assert b.jvec == a.jvec[-1:] + a.jvec[:-1]


def test_seven_qutrit_metadata():
    code = seven_qutrit_code()
    assert (code.n, code.k, code.dim, code.distance) == (7, 1, 3, 3)
    assert code.symplectic_rank() == 6


def test_parity_code():
    code = parity_code(3)
    p = code_projector(code)
    assert np.allclose(np.diag(p).real, [1 if i // 3 == i % 3 else 0 for i in range(9)])


def test_invalid_code_rejected():
    g = PhasedPauli.from_string(3, [(1, 0), (0, 0)])
    h = PhasedPauli.from_string(3, [(0, 1), (0, 0)])
    code = StabilizerCode("bad", 3, 2, (g,), logical_x=h, logical_z=g)
    with pytest.raises(ValueError):
        code.validate()
    with pytest.raises(ValueError):
        StabilizerCode("short", 3, 3, (g,), logical_x=g, logical_z=h)


def test_unknown_code():
    with pytest.raises(ValueError):
        get_code("9qutrit")


def test_rank_mod_p():
    assert rank_mod_p(np.array([[1, 2], [2, 1]]), 3) == 1
    assert rank_mod_p(np.array([[1, 0], [0, 1]]), 3) == 2


@pytest.mark.parametrize("label,d", [("H", 3), ("S", 3), ("CNOT", 3), ("R", 3), ("H", 2), ("S", 2), ("CNOT", 2),
                                     ("H", 5), ("S", 5)])
def test_gates_are_clifford_and_unitary(label, d):
    gate = clifford_gate(label, d)
    m = gate.matrix
    assert np.allclose(m @ m.conj().T, np.eye(m.shape[0]), atol=1e-12)
    assert gate.is_clifford()


def test_non_clifford_detected():
    t = CliffordGate("T", 3, np.diag([1, np.exp(2j * np.pi / 9), np.exp(-2j * np.pi / 9)]))
    assert not t.is_clifford()
    n = CliffordGate("N", 3, np.diag([1, 1, -1]).astype(complex))
    assert not n.is_clifford()


def test_r_swaps_hadamard_states():
    assert conjugate(hplus(), r_matrix()).distance(hminus()) < 1e-12
    assert conjugate(hminus(), r_matrix()).distance(hplus()) < 1e-12


def test_r_component_action():
    rng = np.random.default_rng(3)
    v = rng.normal(size=3) + 1j * rng.normal(size=3)
    a = ket_to_bloch(v)
    out = conjugate(a, r_matrix())
    assert np.allclose(out.components, [np.conj(a.D), a.C, np.conj(a.B), a.A], atol=1e-12)


def test_unknown_gate():
    with pytest.raises(ValueError):
        clifford_gate("T")
    with pytest.raises(ValueError):
        clifford_gate("R", 5)
