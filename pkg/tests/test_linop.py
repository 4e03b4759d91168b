import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from blockade.errors import DimensionMismatch, NoConvergence, NotHermitian, Singular
from blockade.linop import eig_hermitian, expm_hermitian, is_unitary, kron, matrix_norm, solve_linear

SX = np.array([[0, 1], [1, 0]], dtype=complex)


def random_hermitian(rng, n):
    x = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return x + x.conj().T


def test_kron_identity_and_diagonal():
    assert np.array_equal(kron(np.eye(2), np.eye(3)), np.eye(6))
    assert np.array_equal(kron(np.diag([1, -1]), np.eye(2)), np.diag([1, 1, -1, -1]))


def test_kron_sigma_x_squared_is_identity():
    xx = kron(SX, SX)
    # hand product: X(x)X maps |ij> -> |1-i,1-j>, an involution
    expected = np.fliplr(np.eye(4))
    assert np.array_equal(xx, expected)
    assert np.array_equal(xx @ xx, np.eye(4))


def test_kron_mixed_product():
    rng = np.random.default_rng(1)
    a, b, c, d = (rng.normal(size=(2, 3)), rng.normal(size=(3, 2)), rng.normal(size=(3, 2)), rng.normal(size=(2, 3)))
    assert np.allclose(kron(a, c) @ kron(b, d), kron(a @ b, c @ d), atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(1, 3), st.integers(1, 3), st.integers(1, 3))
def test_kron_associative(seed, n1, n2, n3):
    rng = np.random.default_rng(seed)
    a, b, c = (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)) for n in (n1, n2, n3))
    assert np.max(np.abs(kron(kron(a, b), c) - kron(a, kron(b, c)))) <= 1e-12


def test_eig_diagonal_input():
    w, v = eig_hermitian(np.diag([3.0, 1.0, 2.0]))
    assert np.allclose(w, [1, 2, 3], atol=1e-15)
    assert np.array_equal(np.abs(v), np.eye(3)[:, [1, 2, 0]])


def test_eig_sigma_x_with_phase_convention():
    w, v = eig_hermitian(SX)
    assert np.allclose(w, [-1, 1], atol=1e-14)
    s = 1 / np.sqrt(2)
    assert np.allclose(v[:, 0], [s, -s], atol=1e-14)
    assert np.allclose(v[:, 1], [s, s], atol=1e-14)


@pytest.mark.parametrize("n", [1, 2, 5, 14, 26])
@pytest.mark.parametrize("seed", [0, 7])
def test_jacobi_against_lapack(n, seed):
    h = random_hermitian(np.random.default_rng(seed), n)
    w, v = eig_hermitian(h)
    w_ref = np.linalg.eigvalsh(h)
    scale = matrix_norm(h)
    assert np.max(np.abs(w - w_ref)) <= 1e-12 * scale
    assert np.all(np.diff(w) >= 0)
    assert np.max(np.abs(h @ v - v * w)) <= 1e-9 * scale
    assert np.max(np.abs(v.conj().T @ v - np.eye(n))) <= 1e-9
    assert np.max(np.abs(v @ np.diag(w) @ v.conj().T - h)) <= 1e-8 * scale


def test_phase_convention_largest_component_real_nonnegative():
    h = random_hermitian(np.random.default_rng(3), 6)
    _, v = eig_hermitian(h)
    for k in range(6):
        i = np.argmax(np.abs(v[:, k]))
        assert v[i, k].imag == 0.0 and v[i, k].real > 0


def test_lapack_path_agrees():
    h = random_hermitian(np.random.default_rng(4), 8)
    w1, v1 = eig_hermitian(h)
    w2, v2 = eig_hermitian(h, method="lapack")
    assert np.allclose(w1, w2, atol=1e-12)
    # nondegenerate spectrum + fixed phases -> identical vectors
    assert np.allclose(v1, v2, atol=1e-9)


def test_eig_rejects_non_hermitian():
    with pytest.raises(NotHermitian):
        eig_hermitian(np.array([[0, 1], [0, 0]]))
    with pytest.raises(NotHermitian):
        eig_hermitian(np.ones((2, 3)))


def test_eig_iteration_cap():
    with pytest.raises(NoConvergence):
        eig_hermitian(SX, max_sweeps=0)


def test_expm_hermitian_unitary():
    h = random_hermitian(np.random.default_rng(5), 5)
    u = expm_hermitian(h, 0.3)
    assert is_unitary(u)
    assert np.allclose(u, scipy.linalg.expm(-0.3j * h), atol=1e-10)


def test_solve_identity_and_diagonal():
    v = np.array([1, 2j, -3, 4 + 1j])
    assert np.allclose(solve_linear(np.eye(4), v), v)
    assert np.allclose(solve_linear(np.diag([2.0, 4.0]), [2.0, 8.0]), [1, 2])


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_solve_random_residual(seed):
    rng = np.random.default_rng(seed)
    m = rng.normal(size=(50, 50)) + 1j * rng.normal(size=(50, 50)) + 10 * np.eye(50)
    rhs = rng.normal(size=50) + 1j * rng.normal(size=50)
    x = solve_linear(m, rhs)
    bound = 1e-9 * (matrix_norm(m) * np.linalg.norm(x) + np.linalg.norm(rhs))
    assert np.linalg.norm(m @ x - rhs) <= bound


def test_solve_singular():
    with pytest.raises(Singular):
        solve_linear(np.array([[1.0, 2.0], [2.0, 4.0]]), [1.0, 2.0])
    with pytest.raises(Singular):
        solve_linear(np.zeros((3, 3)), np.ones(3))


def test_solve_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        solve_linear(np.eye(3), np.ones(2))
    with pytest.raises(DimensionMismatch):
        solve_linear(np.ones((2, 3)), np.ones(2))
