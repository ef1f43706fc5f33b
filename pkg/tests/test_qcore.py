import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fermibell.qcore import (
    DimensionError,
    apply_local,
    basis_ket,
    fix_column_phases,
    haar_random_unitary,
    inner_product,
    is_isometry,
    is_projector,
    is_unitary,
    op_tensor,
    orthonormal_complement,
    projector_onto,
    range_basis,
    svd,
    swap_operator,
    tensor,
)


def _cmat(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def test_inner_product_basis_and_conjugate_linearity():
    e1, e2 = basis_ket(2, 0), basis_ket(2, 1)
    assert inner_product(e1, e1) == 1
    assert inner_product(e1, e2) == 0
    x = np.array([1, 1j]) / math.sqrt(2)
    y = np.array([1, -1j]) / math.sqrt(2)
    assert abs(inner_product(x, y)) < 1e-15
    assert inner_product(2j * e1, e1) == -2j


def test_inner_product_dimension_mismatch():
    with pytest.raises(DimensionError):
        inner_product(basis_ket(2, 0), basis_ket(3, 0))


def test_tensor_layout():
    e1, e2 = basis_ket(2, 0), basis_ket(2, 1)
    m = tensor(e1, e2)
    assert m[0, 1] == 1 and np.count_nonzero(m) == 1
    assert tensor(3j * e1, e2)[0, 1] == 3j
    assert not np.array_equal(tensor(e2, e1), m)


def test_op_tensor_identity_and_swap_conjugation(rng):
    assert np.array_equal(op_tensor(np.eye(3), np.eye(3)), np.eye(9))
    a, b = _cmat(rng, 2, 2), _cmat(rng, 2, 2)
    s = swap_operator(2)
    assert np.allclose(s @ op_tensor(a, b) @ s, op_tensor(b, a), atol=1e-14)


def test_op_tensor_rejects_non_square():
    with pytest.raises(DimensionError):
        op_tensor(np.ones((2, 3)), np.eye(2))


@given(st.integers(1, 4), st.integers(0, 2**31))
def test_op_tensor_acts_factorwise(d, seed):
    rng = np.random.default_rng(seed)
    a, b = _cmat(rng, d, d), _cmat(rng, d, d)
    x, y = _cmat(rng, d), _cmat(rng, d)
    lhs = (op_tensor(a, b) @ tensor(x, y).ravel()).reshape(d, d)
    assert np.allclose(lhs, tensor(a @ x, b @ y), atol=1e-12 * max(1, np.abs(lhs).max()))
    assert np.allclose(apply_local(a, b, tensor(x, y)), lhs, atol=1e-12 * max(1, np.abs(lhs).max()))


def test_svd_examples():
    _, s, _ = svd(np.diag([3.0, 1.0]))
    assert np.allclose(s, [3, 1])
    c = 0.3 - 0.4j
    _, s, _ = svd(np.array([[0, c], [-c, 0]]))
    assert np.allclose(s, [abs(c), abs(c)])
    _, s, _ = svd(np.zeros((3, 3)))
    assert np.all(s == 0)


@given(st.integers(1, 8), st.integers(1, 8), st.integers(0, 2**31))
def test_svd_reconstruction(m, n, seed):
    a = _cmat(np.random.default_rng(seed), m, n)
    u, s, v = svd(a)
    sig = np.zeros((m, n))
    sig[: len(s), : len(s)] = np.diag(s)
    assert np.linalg.norm(a - u @ sig @ v.conj().T) <= 1e-10 * max(1, np.linalg.norm(a))
    assert is_unitary(u, 1e-10) and is_unitary(v, 1e-10)
    assert np.all(np.diff(s) <= 0)


@given(st.integers(1, 8), st.integers(0, 2**31))
def test_haar_unitary_and_reproducible(d, seed):
    u = haar_random_unitary(d, seed)
    assert is_unitary(u, 1e-10)
    assert np.array_equal(u, haar_random_unitary(d, seed))


def test_haar_dim_one_is_phase():
    u = haar_random_unitary(1, 5)
    assert u.shape == (1, 1) and abs(abs(u[0, 0]) - 1) < 1e-14


def test_haar_first_moment_vanishes():
    # E[U] = 0 under the invariant measure; phase fixing is what makes this hold
    mean = np.mean([haar_random_unitary(3, s) for s in range(4000)], axis=0)
    assert np.abs(mean).max() < 0.05


def test_projector_helpers(rng):
    q = haar_random_unitary(5, 3)[:, :2]
    p = projector_onto(q)
    assert is_projector(p)
    b = range_basis(p)
    assert b.shape == (5, 2) and is_isometry(b)
    assert np.allclose(projector_onto(b), p, atol=1e-12)
    comp = orthonormal_complement(q)
    assert comp.shape == (5, 3) and np.abs(q.conj().T @ comp).max() < 1e-12


def test_fix_column_phases_convention(rng):
    u = haar_random_unitary(4, 9)
    out, phases = fix_column_phases(u)
    assert np.allclose(out * phases[None, :], u)
    for k in range(4):
        assert abs(out[0, k].imag) < 1e-14 and out[0, k].real > 0
