import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fermibell.exterior import is_symmetric_operator, symmetrize
from fermibell.individuation import (
    NotOrthogonalError,
    ProjectorPair,
    ZeroProbabilityError,
    check_exhaustion,
    constituents_pure,
    individuate,
    pair_from_slater_basis,
    pi_local_filter,
    pi_local_operator,
    reduced_density_diagnostic,
)
from fermibell.qcore import haar_random_unitary, op_tensor, projector_onto, random_ket
from fermibell.scenarios import random_state
from fermibell.slater import compose, slater_decompose

R2 = 1 / math.sqrt(2)


def diag_proj(d, idx):
    p = np.zeros((d, d))
    p[list(idx), list(idx)] = 1
    return p


def test_projector_pair_validation():
    with pytest.raises(NotOrthogonalError):
        ProjectorPair(diag_proj(3, [0, 1]), diag_proj(3, [1]))
    with pytest.raises(ValueError):
        ProjectorPair(np.diag([1.0, 0.5]), diag_proj(2, [1]))
    pair = ProjectorPair(diag_proj(4, [0, 2]), diag_proj(4, [1, 3]))
    assert pair.dims == (2, 2) and pair.orthogonality == 0


def test_exhaustion_examples():
    psi = compose(np.eye(2), [1.0])
    assert check_exhaustion(psi, ProjectorPair(diag_proj(2, [0]), diag_proj(2, [1]))).residual == pytest.approx(0)
    chi = compose(np.eye(4), [0.8, 0.6j])
    rep = check_exhaustion(chi, ProjectorPair(diag_proj(4, [0, 2]), diag_proj(4, [1, 3])))
    assert rep.holds and rep.residual < 1e-15


def test_exhaustion_residual_matches_dense_projector(rng):
    psi = random_state(4, 2, 3)
    u = haar_random_unitary(4, 8)
    pair = ProjectorPair(projector_onto(u[:, :2]), projector_onto(u[:, 2:]))
    dense = pair.joint_projector() @ psi.vector() - psi.vector()
    assert check_exhaustion(psi, pair).residual == pytest.approx(np.linalg.norm(dense), abs=1e-14)


def test_individuate_examples(singlet, eprb):
    p = individuate(singlet)
    assert p.dims == (1, 1)
    assert np.allclose(p.E1, diag_proj(2, [0])) and np.allclose(p.E2, diag_proj(2, [1]))
    p = individuate(eprb)
    assert p.dims == (2, 2)
    assert np.allclose(p.E1, diag_proj(4, [0, 1])) and np.allclose(p.E2, diag_proj(4, [2, 3]))
    p = individuate(random_state(7, 1, 5))
    assert p.dims == (1, 1) and check_exhaustion(random_state(7, 1, 5), p).residual <= 1e-9


@given(st.integers(2, 8), st.data())
def test_individuate_properties(d, data):
    rank = data.draw(st.integers(1, d // 2))
    psi = random_state(d, rank, data.draw(st.integers(0, 2**31)))
    pair = individuate(psi)
    assert pair.orthogonality <= 1e-10
    assert check_exhaustion(psi, pair).residual <= 1e-9
    assert constituents_pure(psi) == (rank == 1) == (pair.dims == (1, 1))


def test_constituents_pure_examples(singlet, eprb):
    assert constituents_pure(singlet)
    assert not constituents_pure(eprb)


def test_pi_local_operator_examples(eprb):
    pair = individuate(eprb)
    out = pi_local_operator(pair, np.eye(4), np.eye(4))
    assert np.allclose(out, pair.joint_projector())


@given(st.integers(0, 2**31))
def test_pi_local_operator_is_symmetric(seed):
    rng = np.random.default_rng(seed)
    u = haar_random_unitary(4, rng)
    pair = ProjectorPair(projector_onto(u[:, :2]), projector_onto(u[:, 2:]))
    a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    b = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    assert is_symmetric_operator(pi_local_operator(pair, a, b), 4, tol=1e-10)


def test_rank_one_pair_gives_commutative_algebra():
    u = haar_random_unitary(3, 0)
    pair = ProjectorPair(projector_onto(u[:, 0]), projector_onto(u[:, 1]))
    rng = np.random.default_rng(1)
    ops = [pi_local_operator(pair, rng.normal(size=(3, 3)), np.eye(3)) for _ in range(4)]
    for x in ops:
        for y in ops:
            assert np.abs(x @ y - y @ x).max() < 1e-12


def test_filter_examples(eprb):
    assert np.allclose(pi_local_filter(eprb, individuate(eprb)).matrix, eprb.matrix)
    c = np.array([0.8, 0.5, 0.33])
    u = haar_random_unitary(6, 3)
    psi = compose(u, c)
    dec = slater_decompose(psi)
    chi = pi_local_filter(psi, pair_from_slater_basis(dec, blocks=2))
    expected = compose(dec.unitary, dec.coefficients[:2])
    assert np.allclose(chi.matrix, expected.matrix, atol=1e-12)
    with pytest.raises(ZeroProbabilityError):
        pi_local_filter(compose(np.eye(4), [1.0]), ProjectorPair(diag_proj(4, [2]), diag_proj(4, [3])))


def test_filter_commutes_with_global_phase():
    psi = random_state(6, 3, 2)
    pair = pair_from_slater_basis(slater_decompose(psi), blocks=2)
    ph = np.exp(0.7j)
    a = pi_local_filter(psi, pair).matrix
    b = pi_local_filter(type(psi)(6, ph * psi.matrix), pair).matrix
    assert np.allclose(b, ph * a, atol=1e-14)
    assert np.array_equal(a, -a.T)


def test_filter_agrees_with_dense_projector():
    psi = random_state(5, 2, 9)
    u = haar_random_unitary(5, 1)
    pair = ProjectorPair(projector_onto(u[:, :2]), projector_onto(u[:, 2:4]))
    v = pair.joint_projector() @ psi.vector()
    assert np.allclose(pi_local_filter(psi, pair).vector(), v / np.linalg.norm(v), atol=1e-12)


def test_reduced_density_examples(singlet):
    assert np.allclose(reduced_density_diagnostic(singlet), np.eye(2) / 2)
    u = haar_random_unitary(5, 4)
    psi = compose(u, [1.0])
    rho = reduced_density_diagnostic(psi)
    assert np.allclose(rho, (projector_onto(u[:, 0]) + projector_onto(u[:, 1])) / 2, atol=1e-12)


@given(st.integers(2, 8), st.integers(0, 2**31))
def test_reduced_density_spectrum(d, seed):
    psi = random_state(d, d // 2, seed)
    rho = reduced_density_diagnostic(psi)
    assert np.trace(rho).real == pytest.approx(1.0)
    w = np.sort(np.linalg.eigvalsh(rho))
    c = np.abs(slater_decompose(psi).coefficients)
    expected = np.sort(np.concatenate([np.repeat(c**2 / 2, 2), np.zeros(d % 2)]))
    assert np.allclose(w, expected, atol=1e-12)


def test_bosonic_product_never_exhausted():
    rng = np.random.default_rng(77)
    d = 4
    phi = random_ket(d, rng)
    boson = symmetrize(np.outer(phi, phi))
    for _ in range(100):
        u = haar_random_unitary(d, rng)
        k1 = int(rng.integers(1, d))
        k2 = int(rng.integers(1, d - k1 + 1))
        pair = ProjectorPair(projector_onto(u[:, :k1]), projector_onto(u[:, k1 : k1 + k2]))
        assert check_exhaustion(boson, pair).residual > 0.1
