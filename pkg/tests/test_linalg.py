import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from accessorctl.linalg import (
    DEFAULT_TOL,
    DimensionError,
    LieBasis,
    NotSkewHermitianError,
    ToleranceConfig,
    commutator,
    from_real_vector,
    hs_inner,
    hs_norm,
    is_hermitian,
    is_skew_hermitian,
    is_traceless,
    kron,
    orthonormal_insert,
    project_traceless,
    to_real_vector,
)
from accessorctl.operators import PAULI

from conftest import random_skew

I2, X, Y, Z = (PAULI[c] for c in "ixyz")
EPS = np.finfo(float).eps


def test_kron_block_layout():
    assert np.allclose(kron(Z, I2), np.diag([1, 1, -1, -1]))
    assert np.allclose(kron(I2, Z), np.diag([1, -1, 1, -1]))
    assert np.allclose(kron(X, X), np.fliplr(np.eye(4)))


def test_kron_mixed_product(rng):
    a, c = rng.normal(size=(2, 3, 3)) + 1j * rng.normal(size=(2, 3, 3))
    b, d = rng.normal(size=(2, 2, 2)) + 1j * rng.normal(size=(2, 2, 2))
    assert np.allclose(kron(a, b) @ kron(c, d), kron(a @ c, b @ d))


def test_commutator_examples():
    assert np.allclose(commutator(X, Y), 2j * Z)
    cx, cy = 1j * kron(I2, X), 1j * kron(I2, Y)
    assert np.allclose(-0.5 * commutator(cx, cy), 1j * kron(I2, Z))
    assert not np.any(commutator(X, X))


def test_commutator_dimension_mismatch():
    with pytest.raises(DimensionError):
        commutator(X, np.eye(3))


def test_commutator_of_skew_is_skew(rng):
    a, b = random_skew(rng, 5), random_skew(rng, 5)
    assert is_skew_hermitian(commutator(a, b))


def test_hs_inner_examples():
    assert hs_inner(X, X) == pytest.approx(2)
    assert hs_inner(X, Y) == pytest.approx(0)
    assert hs_inner(np.eye(5), np.eye(5)) == pytest.approx(5)


def test_hs_inner_is_real_symmetric(rng):
    a, b = rng.normal(size=(2, 4, 4)) + 1j * rng.normal(size=(2, 4, 4))
    assert hs_inner(a, b) == pytest.approx(hs_inner(b, a))
    assert hs_inner(a, a) == pytest.approx(hs_norm(a) ** 2)


def test_project_traceless():
    assert not np.any(project_traceless(np.eye(3)))
    assert np.allclose(project_traceless(Z), Z)
    assert np.allclose(project_traceless(np.diag([2.0, 0.0])), np.diag([1.0, -1.0]))


def test_predicates():
    assert is_hermitian(X) and not is_skew_hermitian(X)
    assert is_skew_hermitian(1j * X) and is_traceless(1j * X)
    assert not is_traceless(np.eye(2))


def test_real_vector_roundtrip(rng):
    a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    assert np.array_equal(from_real_vector(to_real_vector(a), 3), a)


def test_tolerance_validation():
    with pytest.raises(ValueError):
        ToleranceConfig(independence_tol=0)
    with pytest.raises(ValueError):
        ToleranceConfig(independence_tol=1.5)
    with pytest.raises(ValueError):
        ToleranceConfig(verify_tol=-1e-8)


# orthonormal_insert works on skew-Hermitian elements, so the Pauli examples use i*sigma


def test_insert_into_empty_basis():
    b = LieBasis(2)
    res = orthonormal_insert(b, 1j * X / np.sqrt(2))
    assert res.accepted and len(b) == 1


def test_insert_spanned_candidate_rejected():
    b = LieBasis(2)
    orthonormal_insert(b, 1j * X / np.sqrt(2))
    res = orthonormal_insert(b, 1j * X)
    assert not res.accepted and res.residual == pytest.approx(0, abs=1e-15)
    assert len(b) == 1


def test_insert_forces_orthogonal_complement():
    b = LieBasis(2)
    orthonormal_insert(b, 1j * X / np.sqrt(2))
    assert orthonormal_insert(b, 1j * (X + Y)).accepted
    assert np.allclose(b.elements[1], 1j * Y / np.sqrt(2))


def test_insert_errors():
    b = LieBasis(2)
    with pytest.raises(NotSkewHermitianError):
        orthonormal_insert(b, X)
    with pytest.raises(ValueError):
        orthonormal_insert(b, np.zeros((2, 2)))
    with pytest.raises(DimensionError):
        orthonormal_insert(b, 1j * np.diag([1.0, 0, -1.0]))


def test_insert_is_scale_invariant(rng):
    basis_a, basis_b = LieBasis(4), LieBasis(4)
    for _ in range(6):
        c = random_skew(rng, 4)
        near = c + 1e-11 * random_skew(rng, 4)
        for cand in (c, near):
            ra = orthonormal_insert(basis_a, cand)
            rb = orthonormal_insert(basis_b, 1000 * cand)
            assert ra.accepted == rb.accepted


def test_gram_stays_identity_after_many_inserts(rng):
    b = LieBasis(8)
    for _ in range(200):
        orthonormal_insert(b, random_skew(rng, 8))
    # redundant candidates are rejected and leave the basis untouched
    for _ in range(20):
        orthonormal_insert(b, random_skew(rng, 8))
    assert np.abs(b.gram() - np.eye(len(b))).max() < 1e-12


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), d=st.integers(2, 6))
def test_jacobi_identity(seed, d):
    r = np.random.default_rng(seed)
    a, b, c = (r.normal(size=(d, d)) + 1j * r.normal(size=(d, d)) for _ in range(3))
    jac = commutator(a, commutator(b, c)) + commutator(b, commutator(c, a)) + commutator(c, commutator(a, b))
    bound = 10 * EPS * hs_norm(a) * hs_norm(b) * hs_norm(c)
    assert hs_norm(jac) <= bound


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), d=st.integers(2, 5), k=st.integers(1, 30))
def test_gram_identity_property(seed, d, k):
    r = np.random.default_rng(seed)
    b = LieBasis(d)
    for _ in range(k):
        orthonormal_insert(b, random_skew(r, d), DEFAULT_TOL)
    assert len(b) <= d * d - 1
    assert np.abs(b.gram() - np.eye(len(b))).max() < 1e-12
