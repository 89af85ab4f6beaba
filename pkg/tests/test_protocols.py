import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from magicdistill.codes import r_matrix
from magicdistill.protocols import (
    KET_TWO,
    PSI_MINUS,
    PSI_PLUS,
    ParityState,
    PhaseState,
    depolarized,
    equatorialize,
    group_closure,
    inject,
    injection_decoder,
    injection_group_closure,
    injection_probabilities,
    injection_projectors,
    injection_unitary,
    k_operator,
    logical_kets,
    n_gate,
    parity_dense_step,
    parity_prepare,
    parity_step,
    parity_success_prob,
    parity_trajectory,
    phi_0_pi,
    prepare_density,
    promoted_group_probe,
    same_up_to_phase,
    sample_preparation,
    sample_outcomes,
)
from magicdistill.states import density_from_bloch, hminus, hplus
from magicdistill.distill import phi_fixed_point

weights = st.tuples(st.floats(0, 1), st.floats(0, 1)).filter(lambda w: w[0] + w[1] <= 1)


@given(weights)
def test_parity_closed_matches_dense(w):
    s = ParityState(*w)
    a, b = parity_step(s), parity_dense_step(s)
    assert a.success_prob == pytest.approx(b.success_prob, abs=1e-14)
    if not a.aborted:
        assert a.state.eta == pytest.approx(b.state.eta, abs=1e-12)
        assert a.state.delta == pytest.approx(b.state.delta, abs=1e-12)


def test_parity_closed_matches_dense_random():
    rng = np.random.default_rng(3)
    for _ in range(200):
        eta, delta = rng.dirichlet([1, 1, 1])[:2]
        a, b = parity_step(ParityState(eta, delta)), parity_dense_step(ParityState(eta, delta))
        assert a.state.eta == pytest.approx(b.state.eta, abs=1e-12)
        assert a.state.delta == pytest.approx(b.state.delta, abs=1e-12)


@pytest.mark.parametrize(
    "eta,delta,p,eta2,delta2",
    [
        (0.0, 0.0, 0.5, 0.0, 0.0),
        (1.0, 0.0, 1.0, 1.0, 0.0),
        (0.0, 1.0, 0.5, 0.0, 0.0),
        (0.5, 0.0, 0.375, 2 / 3, 0.0),
    ],
)
def test_parity_examples(eta, delta, p, eta2, delta2):
    step = parity_step(ParityState(eta, delta))
    assert step.success_prob == pytest.approx(p)
    assert step.state.eta == pytest.approx(eta2)
    assert step.state.delta == pytest.approx(delta2)


def test_parity_success_prob_positive():
    eta = np.linspace(0, 1, 1001)
    assert np.all(parity_success_prob(eta) >= 1 / 3 - 1e-12)


def test_parity_error_ratio():
    rng = np.random.default_rng(4)
    for eta in rng.uniform(1e-6, 0.3, 50):
        out = parity_step(ParityState(eta, 0.0)).state
        assert 1 <= out.eta / eta**2 <= 3


def test_parity_state_density_roundtrip():
    s = ParityState(0.1, 0.2)
    rho = s.density()
    assert np.trace(rho).real == pytest.approx(1)
    back = ParityState.from_density(rho)
    assert (back.eta, back.delta) == pytest.approx((s.eta, s.delta), abs=1e-14)
    with pytest.raises(ValueError):
        ParityState.from_density(np.eye(3) / 3 + 0.1 * np.eye(3, k=1) + 0.1 * np.eye(3, k=-1))
    with pytest.raises(ValueError):
        ParityState(0.7, 0.7)


def test_prepare_mixed():
    s = parity_prepare(np.eye(3) / 3)
    assert s.eta == pytest.approx(1 / 3) and s.delta == pytest.approx(1 / 3)
    s = parity_prepare(hplus(), eps=1.0)
    assert s.eta == pytest.approx(1 / 3) and s.delta == pytest.approx(1 / 3)


def test_prepare_output_has_parity_form():
    rng = np.random.default_rng(5)
    for _ in range(20):
        g = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        rho = g @ g.conj().T
        rho /= np.trace(rho)
        ParityState.from_density(prepare_density(rho))


def test_prepare_hadamard_states():
    # |H+> carries its small weight on |1>,|2>; rotating by R swaps it with |H->
    plus = parity_prepare(hplus(), pre_rotation=r_matrix())
    direct = parity_prepare(hminus())
    assert plus.eta == pytest.approx(direct.eta, abs=1e-12)
    assert plus.eta == pytest.approx(0.5 - np.sqrt(3) / 6, abs=1e-10)
    assert parity_prepare(hplus()).eta == pytest.approx(0.5 + np.sqrt(3) / 6, abs=1e-10)


def test_sampled_preparation_converges_to_channel():
    rho = np.array([0.7, 0.2, 0.1]) * np.eye(3) + 0.1 * (np.eye(3, k=1) + np.eye(3, k=-1))
    exact = prepare_density(rho)
    approx = sample_preparation(rho, 20000, seed=1)
    assert np.max(np.abs(approx - exact)) < 0.02
    assert np.array_equal(approx, sample_preparation(rho, 20000, seed=1))
    with pytest.raises(ValueError):
        sample_preparation(rho, 0)


def test_prepare_pure_plus_is_exact():
    s = parity_prepare(np.array([1.0, 0.0, 0.0]))
    assert s.delta == pytest.approx(0, abs=1e-14)


def test_trajectory_converges_to_plus():
    recs, aborted = parity_trajectory(ParityState(0.2, 0.0), 8)
    assert not aborted and len(recs) == 8
    assert recs[0].p_success is None and recs[0].round == 1
    errs = [r.total_error for r in recs]
    assert all(b < a for a, b in zip(errs, errs[1:]))
    assert recs[-1].total_error < 1e-10
    assert set(recs[1].as_dict()) == {"round", "eta", "delta", "p_success", "total_error"}


def test_trajectory_rejects_zero_rounds():
    with pytest.raises(ValueError):
        parity_trajectory(ParityState(0, 0), 0)


def test_logical_kets_orthonormal():
    k = logical_kets()
    assert np.allclose(k @ k.conj().T, np.eye(3))


def _equatorial_oracle(a, b):
    """<x_L| (a (x) b) with the subspace written out term by term."""
    w = np.exp(2j * np.pi / 3)
    amps = np.array([
        a[x] * b[x] + np.conj(w) * a[(x + 1) % 3] * b[(x + 2) % 3] + np.conj(w**2) * a[(x + 2) % 3] * b[(x + 1) % 3]
        for x in range(3)
    ]) / np.sqrt(3)
    p = np.vdot(amps, amps).real
    return amps / np.sqrt(p), p


def test_equatorialize_plus_states():
    out = equatorialize(PSI_PLUS, PSI_PLUS)
    assert out.success_prob == pytest.approx(0.25)
    target = phi_0_pi()
    assert np.real(target.conj() @ out.output @ target) == pytest.approx(1.0)


def test_equatorialize_against_oracle():
    rng = np.random.default_rng(6)
    for _ in range(20):
        a = rng.normal(size=3) + 1j * rng.normal(size=3)
        b = rng.normal(size=3) + 1j * rng.normal(size=3)
        a, b = a / np.linalg.norm(a), b / np.linalg.norm(b)
        ket, p = _equatorial_oracle(a, b)
        out = equatorialize(a, b)
        assert out.success_prob == pytest.approx(p, abs=1e-12)
        assert np.allclose(out.output, np.outer(ket, ket.conj()), atol=1e-12)


def test_equatorialize_basis_inputs():
    out = equatorialize(np.array([1, 0, 0]), np.array([1, 0, 0]))
    assert out.success_prob == pytest.approx(1 / 3)
    assert np.allclose(out.output, np.diag([1, 0, 0]))


def test_parity_check_keeps_phase_error():
    # |Psi-> shares the even-parity subspace with |Psi+>, so only eta is removed
    recs, _ = parity_trajectory(ParityState(0.2, 0.05), 8)
    etas = [r.eta for r in recs]
    assert all(b < a for a, b in zip(etas, etas[1:]))
    assert recs[-1].delta > recs[0].delta


def test_equatorialize_abort():
    out = equatorialize(np.zeros((3, 3)), np.eye(3) / 3)
    assert out.aborted and out.success_prob == pytest.approx(0, abs=1e-14)


def test_equatorialize_noise_sweep():
    target = phi_0_pi()
    pure = np.outer(PSI_PLUS, PSI_PLUS)
    fids = []
    for eps in np.linspace(0, 1, 11):
        rho = depolarized(pure, eps)
        out = equatorialize(rho, rho)
        fids.append(np.real(target.conj() @ out.output @ target))
        assert np.trace(out.output).real == pytest.approx(1)
    assert all(b < a for a, b in zip(fids, fids[1:]))
    assert fids[-1] == pytest.approx(1 / 3)


def test_phase_state_ket():
    ket = PhaseState(0.3, 1.2).ket()
    assert np.linalg.norm(ket) == pytest.approx(1)
    assert np.allclose(np.angle(ket / ket[0]), [0, 0.3, 1.2])


@pytest.mark.parametrize("k", range(3))
def test_injection_unitaries_diagonal(k):
    u = injection_unitary(PhaseState(0.4, 1.9), k)
    assert np.allclose(u, np.diag(np.diag(u)))
    assert np.allclose(u @ u.conj().T, np.eye(3))


def test_injection_unitaries_commute():
    us = [injection_unitary(PhaseState(0.4, 1.9), k) for k in range(3)]
    for a, b in itertools.combinations(us, 2):
        assert np.allclose(a @ b, b @ a)


def test_injection_projectors_resolve_identity():
    projs = injection_projectors()
    assert np.allclose(sum(projs), np.eye(9))
    z1z2 = np.kron(np.diag(np.exp(2j * np.pi * np.arange(3) / 3)), np.diag(np.exp(-2j * np.pi * np.arange(3) / 3)))
    for k, p in enumerate(projs):
        assert np.allclose(z1z2 @ p, np.exp(2j * np.pi * k / 3) * p)
    for k in range(3):
        d = injection_decoder(k)
        assert np.allclose(d @ d.T, np.eye(3))


@pytest.mark.parametrize("k", range(3))
def test_injection_post_state(k):
    phase = PhaseState(0.7, 2.1)
    rng = np.random.default_rng(11)
    g = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    rho = g @ g.conj().T
    rho /= np.trace(rho)
    for seed in range(40):
        res = inject(phase, rho, seed)
        if res.outcome == k:
            assert np.allclose(res.post_state, res.unitary @ rho @ res.unitary.conj().T, atol=1e-12)
            assert np.allclose(res.unitary, injection_unitary(phase, k))
            break
    else:
        pytest.fail(f"outcome {k} never sampled")


def test_injection_probabilities_uniform_on_basis_state():
    probs = injection_probabilities(PhaseState(0.2, 0.9), np.array([0, 1, 0]))
    assert np.allclose(probs, 1 / 3)


def test_monte_carlo_matches_born():
    phase = PhaseState(0.0, np.pi)
    target = np.array([1.0, 1.0j, 0.3])
    probs = injection_probabilities(phase, target)
    counts = sample_outcomes(phase, target, 30000, seed=0)
    assert np.all(np.abs(counts / 30000 - probs) < 4 * np.sqrt(probs * (1 - probs) / 30000) + 1e-3)
    assert np.array_equal(counts, sample_outcomes(phase, target, 30000, seed=0))


def _sign_group_order(phases):
    """Order of the group generated by diagonal phase vectors, modulo global phase, over exact angles."""
    gens = [np.round(np.roll(phases, -k) / (np.pi / 3)).astype(int) % 6 for k in range(3)]
    seen = {(0, 0, 0)}
    frontier = [np.zeros(3, dtype=int)]
    while frontier:
        nxt = []
        for a in frontier:
            for g in gens:
                c = (a + g) % 6
                c = tuple((c - c[0]) % 6)
                if c not in seen:
                    seen.add(c)
                    nxt.append(np.array(c))
        frontier = nxt
    return len(seen)


@pytest.mark.parametrize(
    "theta,phi,order",
    [(0.0, np.pi, 4), (0.0, 0.0, 1), (2 * np.pi / 3, 4 * np.pi / 3, 3), (np.pi / 3, 0.0, 36)],
)
def test_injection_closure(theta, phi, order):
    res = injection_group_closure(PhaseState(theta, phi))
    assert res.order == order
    assert _sign_group_order(np.array([0.0, theta, phi])) == order


def test_injection_closure_exceeds_bound():
    res = injection_group_closure(PhaseState(1.0, np.sqrt(2)), bound=50)
    assert res.exceeded


def test_same_up_to_phase():
    u = np.diag([1, 1j, -1])
    assert same_up_to_phase(u, np.exp(0.3j) * u)
    assert not same_up_to_phase(u, np.eye(3))


def test_group_closure_hadamard():
    from magicdistill.states import hadamard_matrix

    assert group_closure([hadamard_matrix(3)]).order == 4


def test_n_gate():
    assert np.allclose(n_gate(), np.diag([1, 1, -1]))


def test_promoted_probe():
    rep = promoted_group_probe(n_max=2000)
    lam = np.arctan(np.sqrt(2)) / np.pi
    ev = np.linalg.eigvals(k_operator())
    assert np.allclose(np.abs(ev), 1)
    assert rep.max_phase_error < 1e-10
    assert rep.lambda1 == pytest.approx(lam, abs=1e-10)
    assert rep.identity_power is None
    # lambda is irrational, so no finite power of the eigenvalue ratio is one
    ratios = ev[:, None] / ev[None, :]
    for m in (1, 2, 3, 6, 12, 100):
        assert not np.allclose(ratios**m, 1)
    assert set(rep.as_dict()) >= {"eigenphases", "lambda1", "identity_power"}


def test_k_unitary():
    k = k_operator()
    assert np.allclose(k @ k.conj().T, np.eye(3))


def test_as_density_accepts_bloch():
    rho = density_from_bloch(phi_fixed_point())
    out = equatorialize(phi_fixed_point(), rho)
    assert 0 < out.success_prob <= 1
