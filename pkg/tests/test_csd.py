import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import cossin, expm

from qutritsynth.csd import cs_middle, csd_general, csd_square, mid_x, mid_z, ternary_csd
from qutritsynth.errors import DimensionError, NotUnitaryError
from qutritsynth.matrix_core import block_diag, haar_random_unitary, unitarity_defect


def multiply_out(f):
    """Oracle: explicit product diag(U1, U2) @ Mid @ diag(V1, V2)."""
    r, m = f.r, f.m
    mid = np.eye(m, dtype=complex)
    mid[:r, :r] = np.diag(np.cos(f.thetas))
    mid[:r, r:2 * r] = -np.diag(np.sin(f.thetas))
    mid[r:2 * r, :r] = np.diag(np.sin(f.thetas))
    mid[r:2 * r, r:2 * r] = np.diag(np.cos(f.thetas))
    return block_diag(f.U1, f.U2) @ mid @ block_diag(f.V1, f.V2)


def assert_valid(w, f, tol=1e-10):
    m = w.shape[0]
    assert np.linalg.norm(w - multiply_out(f)) <= tol * m
    for factor in (f.U1, f.U2, f.V1, f.V2):
        assert unitarity_defect(factor) <= 1e-12 * factor.shape[0]
    assert np.all(f.thetas >= 0) and np.all(f.thetas <= np.pi / 2)
    assert np.all(np.diff(f.thetas) >= 0)


@pytest.mark.parametrize("m, r", [(2, 1), (6, 3), (9, 3), (9, 4), (27, 9)])
def test_identity(m, r):
    f = csd_general(np.eye(m), r)
    assert np.linalg.norm(np.eye(m) - multiply_out(f)) <= 1e-12 * m
    assert np.array_equal(f.thetas, np.zeros(r))


def test_already_in_cs_form():
    t = np.pi / 6
    w = np.array([[np.cos(t), -np.sin(t)], [np.sin(t), np.cos(t)]])
    f = csd_general(w, 1)
    assert f.thetas[0] == pytest.approx(np.pi / 6, abs=1e-15)
    assert abs(abs(f.U1[0, 0]) - 1) < 1e-15 and abs(abs(f.V2[0, 0]) - 1) < 1e-15
    assert_valid(w, f)


def test_haar_27():
    w = haar_random_unitary(27, 7)
    assert_valid(w, csd_general(w, 9))


def test_middle_matches_printed_form():
    th = np.array([0.1, 0.7])
    mid = cs_middle(th, 5)
    c, s = np.cos(th), np.sin(th)
    expected = np.block([
        [np.diag(c), -np.diag(s), np.zeros((2, 1))],
        [np.diag(s), np.diag(c), np.zeros((2, 1))],
        [np.zeros((1, 4)), np.eye(1)],
    ])
    assert np.array_equal(mid, expected)


def test_angles_agree_with_scipy():
    # Independent route: LAPACK's CSD driver.
    for seed in range(20):
        w = haar_random_unitary(27, seed)
        _, theta, _ = cossin(w, p=9, q=9, separate=True)
        assert np.abs(np.sort(theta) - csd_general(w, 9).thetas).max() <= 1e-12


@pytest.mark.parametrize("seed", range(20))
def test_square_dim6(seed):
    w = haar_random_unitary(6, seed)
    f = csd_square(w)
    assert f.r == 3
    assert_valid(w, f)


def test_square_identity_2():
    f = csd_square(np.eye(2))
    assert np.array_equal(f.thetas, [0.0])
    assert np.linalg.norm(multiply_out(f) - np.eye(2)) == 0


def test_square_block_diagonal():
    w = block_diag(haar_random_unitary(3, 1), haar_random_unitary(3, 2))
    f = csd_square(w)
    assert np.allclose(f.thetas, 0, atol=1e-15)
    assert_valid(w, f)


@pytest.mark.parametrize("eps", [1e-1, 1e-4, 1e-8, 1e-10, 1e-13, 1e-16])
@pytest.mark.parametrize("base", ["kron", "blockdiag", "swap"])
def test_near_degenerate(eps, base, rng):
    # Angles clustered near 0 (kron, blockdiag) or near pi/2 (swap).
    m, r = 9, 3
    h = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
    h = h + h.conj().T
    if base == "kron":
        b = np.kron(haar_random_unitary(3, 0), np.eye(3))
    elif base == "blockdiag":
        b = block_diag(haar_random_unitary(3, 0), haar_random_unitary(6, 1))
    else:
        b = np.eye(m)[:, [3, 4, 5, 0, 1, 2, 6, 7, 8]]
    w = b @ expm(1j * eps * h)
    assert_valid(w, csd_general(w, r))


def test_repeated_angles():
    # Every angle equal: a single, fully degenerate cluster.
    u = haar_random_unitary(3, 4)
    rot = np.kron(np.array([[np.cos(0.3), -np.sin(0.3)], [np.sin(0.3), np.cos(0.3)]]), np.eye(3))
    w = block_diag(u, haar_random_unitary(3, 5)) @ rot @ block_diag(haar_random_unitary(3, 6), u.conj().T)
    f = csd_general(w, 3)
    assert np.allclose(f.thetas, 0.3, atol=1e-14)
    assert_valid(w, f)


def test_deterministic_bytes():
    w = haar_random_unitary(27, 2)
    a, b = csd_general(w, 9), csd_general(w.copy(), 9)
    for x, y in zip((a.U1, a.U2, a.V1, a.V2, a.thetas), (b.U1, b.U2, b.V1, b.V2, b.thetas)):
        assert x.tobytes() == y.tobytes()


def test_factors_are_read_only():
    f = csd_general(haar_random_unitary(6, 0), 3)
    with pytest.raises(ValueError):
        f.U1[0, 0] = 0


def test_errors():
    with pytest.raises(NotUnitaryError):
        csd_general(np.eye(4) * 2, 2)
    with pytest.raises(DimensionError):
        csd_general(np.eye(4), 3)
    with pytest.raises(DimensionError):
        csd_general(np.eye(4), 0)
    with pytest.raises(DimensionError):
        csd_square(np.eye(3))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([(6, 3), (9, 3), (18, 9), (27, 9), (5, 2), (7, 1)]))
def test_reconstruction_property(seed, shape):
    m, r = shape
    w = haar_random_unitary(m, seed)
    assert_valid(w, csd_general(w, r))


# -- ternary seven-factor form ----------------------------------------------

def seven_factor_product(t):
    """Oracle: multiply the seven factors left to right."""
    b = 3 ** (t.n - 1)

    def rot(thetas, lo):
        out = np.eye(3 * b, dtype=complex)
        c, s = np.diag(np.cos(thetas)), np.diag(np.sin(thetas))
        i, j = slice(lo * b, (lo + 1) * b), slice((lo + 1) * b, (lo + 2) * b)
        out[i, i], out[i, j], out[j, i], out[j, j] = c, -s, s, c
        return out

    return (
        block_diag(*t.D1) @ rot(t.sigma_x_thetas, 1) @ block_diag(*t.D2) @ rot(t.mid_z_thetas, 0)
        @ block_diag(*t.D3) @ rot(t.gamma_x_thetas, 1) @ block_diag(*t.D4)
    )


def test_mid_helpers_match_oracle_layout():
    th = np.array([0.2, 0.4, 0.9])
    assert np.array_equal(mid_z(th), cs_middle(th, 9))
    mx = mid_x(th)
    assert np.array_equal(mx[:3, :3], np.eye(3))
    assert np.array_equal(mx[3:, 3:], cs_middle(th, 6))


def test_ternary_identity():
    t = ternary_csd(np.eye(9))
    for triple in (t.D1, t.D2, t.D3, t.D4):
        for block in triple:
            assert np.array_equal(block, np.eye(3))
    for th in (t.sigma_x_thetas, t.mid_z_thetas, t.gamma_x_thetas):
        assert not th.any()


def test_ternary_kron():
    w = np.kron(haar_random_unitary(3, 8), np.eye(3))
    assert np.linalg.norm(w - seven_factor_product(ternary_csd(w))) <= 1e-9 * 9


@pytest.mark.parametrize("dim", [9, 27, 81])
def test_ternary_haar(dim):
    w = haar_random_unitary(dim, 13)
    t = ternary_csd(w)
    assert np.linalg.norm(w - seven_factor_product(t)) <= 1e-9 * dim
    assert np.linalg.norm(w - t.reconstruct()) <= 1e-9 * dim
    b = dim // 3
    assert np.array_equal(t.D2[0], np.eye(b)) and np.array_equal(t.D4[0], np.eye(b))
    for triple in (t.D1, t.D2, t.D3, t.D4):
        for block in triple:
            assert unitarity_defect(block) <= 1e-12 * b


def test_ternary_parallel_matches_sequential():
    w = haar_random_unitary(27, 3)
    a, b = ternary_csd(w), ternary_csd(w, parallel=True)
    for x, y in zip(a.factors(), b.factors()):
        assert x.tobytes() == y.tobytes()


@pytest.mark.parametrize("dim", [3, 8, 6])
def test_ternary_rejects(dim):
    with pytest.raises(DimensionError):
        ternary_csd(np.eye(dim))


def test_ternary_thousand_seeds():
    worst = 0.0
    for dim in (9, 27):
        for seed in range(1000):
            w = haar_random_unitary(dim, seed)
            worst = max(worst, np.linalg.norm(w - ternary_csd(w).reconstruct()) / dim)
    assert worst <= 1e-9
