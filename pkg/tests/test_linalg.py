import numpy as np
import pytest

from tabutruss.linalg import (NotPositiveDefiniteError, cholesky, reduce_generalized,
                              smallest_generalized_eigenvalue, spd_solve)


def gauss_jordan_inverse(a):
    """Textbook elimination with partial pivoting, independent of the Cholesky path."""
    n = len(a)
    aug = np.hstack([np.array(a, dtype=float), np.eye(n)])
    for col in range(n):
        piv = col + int(np.argmax(np.abs(aug[col:, col])))
        aug[[col, piv]] = aug[[piv, col]]
        aug[col] /= aug[col, col]
        for r in range(n):
            if r != col:
                aug[r] -= aug[r, col] * aug[col]
    return aug[:, n:]


def random_spd(rng, n=8):
    b = rng.normal(size=(n, n))
    return b @ b.T + n * np.eye(n)


def test_cholesky_reconstructs(rng):
    a = random_spd(rng)
    lower = cholesky(a)
    assert np.allclose(np.triu(lower, 1), 0)
    assert np.allclose(lower @ lower.T, a, rtol=1e-13, atol=1e-12)


def test_diagonal_solve():
    x = spd_solve(2 * np.eye(8), np.full(8, 4.0))
    assert np.allclose(x, 2.0, rtol=1e-15, atol=0)


def test_zero_rhs():
    assert np.array_equal(spd_solve(np.eye(3) * 5, np.zeros(3)), np.zeros(3))


@pytest.mark.parametrize("seed", range(5))
def test_solve_matches_elimination_oracle(seed):
    rng = np.random.default_rng(seed)
    a = random_spd(rng)
    b = rng.normal(size=8)
    x = spd_solve(a, b)
    ref = gauss_jordan_inverse(a) @ b
    assert np.allclose(x, ref, rtol=1e-10, atol=1e-12)
    assert np.linalg.norm(a @ x - b) <= 1e-10 * np.linalg.norm(b)


def test_not_positive_definite_raises():
    with pytest.raises(NotPositiveDefiniteError) as info:
        cholesky(np.array([[1.0, 2.0], [2.0, 1.0]]))
    assert info.value.pivot == 1


def test_singular_raises():
    with pytest.raises(NotPositiveDefiniteError):
        cholesky(np.array([[1.0, 1.0], [1.0, 1.0]]))


def test_reduction_is_similarity(rng):
    k, m = random_spd(rng, 5), random_spd(rng, 5)
    c = reduce_generalized(k, m)
    assert np.allclose(c, c.T)
    assert np.allclose(np.sort(np.linalg.eigvalsh(c)),
                       np.sort(np.linalg.eigvals(np.linalg.solve(m, k)).real), rtol=1e-10)


def test_smallest_eigenvalue_two_by_two():
    lam = smallest_generalized_eigenvalue(np.array([[2.0, -1.0], [-1.0, 2.0]]), np.eye(2))
    assert lam == pytest.approx(1.0, rel=1e-12)
