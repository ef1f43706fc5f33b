import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fermibell.exterior import FermionState, is_decomposable, wedge_of_vectors
from fermibell.qcore import haar_random_unitary, is_unitary
from fermibell.slater import (
    FermionPairState,
    canonical_block_matrix,
    compose,
    from_wedge_terms,
    is_gmw_entangled,
    slater_decompose,
    slater_rank,
    xi_gamma,
    xi_gamma_from,
)

from .oracles import antisymmetric_rank, pfaffian4, product_fit_residual

R2 = 1 / math.sqrt(2)


def random_antisymmetric(d, seed):
    rng = np.random.default_rng(seed)
    m = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return FermionPairState.from_matrix(m - m.T)


def test_from_wedge_terms_examples():
    a = from_wedge_terms(FermionState(2, 2, {(0, 1): 1.0})).matrix
    assert a[0, 1] == pytest.approx(R2) and a[1, 0] == pytest.approx(-R2)
    # basis order e1 = L-up, e2 = R-down, e3 = L-down, e4 = R-up
    eprb = from_wedge_terms(FermionState(4, 2, {(0, 1): R2, (2, 3): -R2})).matrix
    assert eprb[0, 1] == pytest.approx(0.5) and eprb[2, 3] == pytest.approx(-0.5)
    assert np.array_equal(eprb, -eprb.T)
    with pytest.raises(ValueError):
        from_wedge_terms(FermionState.zero(4, 2))


def test_fermion_pair_state_validation():
    with pytest.raises(ValueError):
        FermionPairState(2, np.array([[0, 1], [1, 0]]) * R2)
    with pytest.raises(ValueError):
        FermionPairState(2, np.array([[0, 1], [-1, 0]]))
    m = FermionPairState.from_matrix(np.array([[0, 2], [-2, 0]]))
    assert np.isclose(np.linalg.norm(m.matrix), 1)


def test_round_trip_wedge_matrix():
    psi = random_antisymmetric(5, 3)
    again = from_wedge_terms(psi.to_fermion_state())
    assert np.allclose(again.matrix, psi.matrix, atol=1e-15)


def test_decompose_singlet(singlet):
    dec = slater_decompose(singlet)
    assert dec.rank == 1
    assert dec.coefficients[0] == pytest.approx(1.0)
    assert np.allclose(dec.unitary, np.eye(2))


def test_decompose_eprb(eprb):
    dec = slater_decompose(eprb)
    assert dec.rank == 2
    assert np.allclose(np.abs(dec.coefficients), [R2, R2])
    xg = xi_gamma(dec)
    assert xg.xi == pytest.approx(1.0) and xg.gamma == pytest.approx(math.pi)


def test_recovers_constructed_coefficients():
    u0 = haar_random_unitary(6, 11)
    psi = compose(u0, [0.8, 0.6])
    dec = slater_decompose(psi)
    assert np.allclose(np.abs(dec.coefficients), [0.8, 0.6, 0.0], atol=1e-12)
    assert np.linalg.norm(psi.matrix - dec.reconstruct()) <= 1e-9
    xg = xi_gamma(dec)
    assert xg.xi == pytest.approx(0.96)


def test_xi_gamma_examples():
    xg = xi_gamma_from(R2, -R2)
    assert xg.xi == pytest.approx(1.0) and xg.gamma == pytest.approx(math.pi)
    xg = xi_gamma_from(0.8, 0.6)
    assert xg.xi == pytest.approx(0.96) and xg.gamma == pytest.approx(0.0)
    assert xi_gamma_from(0.3j, 0.3j).xi == pytest.approx(1.0)
    with pytest.raises(ValueError):
        xi_gamma(slater_decompose(compose(np.eye(4), [1.0])))


@given(st.integers(2, 8), st.integers(0, 2**31))
def test_reconstruction_and_invariants(d, seed):
    psi = random_antisymmetric(d, seed)
    dec = slater_decompose(psi)
    assert np.linalg.norm(psi.matrix - dec.reconstruct()) <= 1e-9
    assert is_unitary(dec.unitary, 1e-10)
    mags = np.abs(dec.coefficients)
    assert np.all(np.diff(mags) <= 1e-12)
    assert np.sum(mags**2) == pytest.approx(1.0)
    assert dec.rank == antisymmetric_rank(psi.matrix)


@given(st.integers(2, 8), st.integers(0, 2**31))
def test_singular_values_pair_up(d, seed):
    psi = random_antisymmetric(d, seed)
    dec = slater_decompose(psi)
    expected = np.sort(np.concatenate([np.repeat(np.abs(dec.coefficients) / math.sqrt(2), 2), np.zeros(d % 2)]))
    s = np.sort(np.linalg.svd(psi.matrix, compute_uv=False))
    assert np.allclose(s, expected, atol=1e-12)


@given(st.integers(2, 8), st.integers(0, 2**31))
def test_congruence_invariance(d, seed):
    psi = random_antisymmetric(d, seed)
    v = haar_random_unitary(d, seed + 7)
    moved = FermionPairState(d, v @ psi.matrix @ v.T)
    assert np.allclose(np.abs(slater_decompose(psi).coefficients), np.abs(slater_decompose(moved).coefficients), atol=1e-9)


def test_degenerate_magnitudes_are_ordered_by_phase():
    c = np.array([0.5, 0.5j, -0.5, 0.5 * np.exp(-0.3j)])
    psi = compose(haar_random_unitary(8, 2), c)
    dec = slater_decompose(psi)
    assert np.linalg.norm(psi.matrix - dec.reconstruct()) <= 1e-9
    assert np.allclose(np.abs(dec.coefficients), 0.5)
    angles = [math.pi if np.angle(z) <= -math.pi + 1e-12 else np.angle(z) for z in dec.coefficients]
    assert angles == sorted(angles)


def test_phase_convention_first_entry_real_positive():
    dec = slater_decompose(random_antisymmetric(6, 5))
    for k in range(6):
        col = dec.unitary[:, k]
        first = col[np.argmax(np.abs(col) > 1e-8 * np.abs(col).max())]
        assert abs(first.imag) < 1e-12 and first.real > 0


def test_odd_dimension_padding():
    dec = slater_decompose(random_antisymmetric(7, 1))
    assert dec.coefficients.shape == (3,) and dec.rank == 3
    assert canonical_block_matrix(dec.coefficients, 7)[6].tolist() == [0] * 7


def test_rank_threshold_sweep():
    for c2, expect in ((1e-3, True), (1e-8, True), (1e-11, False)):
        psi = compose(np.eye(4), [1.0, c2])
        assert is_gmw_entangled(psi) is expect


def test_slater_rank_examples(singlet, eprb):
    assert slater_rank(singlet) == 1
    assert slater_rank(eprb) == 2
    u = haar_random_unitary(5, 4)
    psi = from_wedge_terms(wedge_of_vectors(u[:, :2]), normalize=True)
    assert slater_rank(psi) == 1


@pytest.mark.parametrize("seed", range(40))
def test_gmw_agrees_with_decomposability(seed):
    rng = np.random.default_rng(seed)
    d = int(rng.integers(2, 7))
    psi = compose(haar_random_unitary(d, rng), [1.0]) if seed % 2 else random_antisymmetric(d, seed)
    assert is_gmw_entangled(psi) == (not is_decomposable(psi.to_fermion_state()))


def test_pfaffian_oracle_at_d4():
    for seed in range(25):
        rank = 1 + seed % 2
        psi = compose(haar_random_unitary(4, seed), [0.9, 0.4][:rank])
        assert (abs(pfaffian4(psi.matrix)) > 1e-6) == (slater_rank(psi) == 2)


@pytest.mark.parametrize("seed", range(50))
def test_product_state_search_oracle_at_d4(seed):
    rng = np.random.default_rng(1000 + seed)
    rank = 1 + seed % 2
    mags = rng.uniform(0.3, 1.0, rank)
    psi = compose(haar_random_unitary(4, rng), mags * np.exp(1j * rng.uniform(0, 6, rank)))
    residual = product_fit_residual(psi.matrix, restarts=4, seed=seed)
    assert (residual < 1e-6) == (slater_rank(psi) == 1)
