import numpy as np
import pytest

from irscascade.channel import (PathSet, add_awgn, cascaded_channel, composite_params,
                                effective_channel, parametric_cascade, pnr_to_sigma,
                                realize_channel, sample_paths, subchannel_F, vec,
                                wrap_coordinate)
from irscascade.geometry import ArrayGeometry, response_matrix, ula_steering

from .conftest import crandn


def ula_triplet(K, N, M):
    return ArrayGeometry.ula(K), ArrayGeometry.ula(N), ArrayGeometry.ula(M)


def test_sample_paths_counts_and_determinism():
    p1 = sample_paths(1, 2, rng=np.random.default_rng(5))
    p2 = sample_paths(1, 2, rng=np.random.default_rng(5))
    assert (p1.L_F, p1.L_G) == (1, 2)
    for name in ("theta_I", "phi_T", "gamma_F", "theta_R", "phi_I", "gamma_G"):
        np.testing.assert_array_equal(getattr(p1, name), getattr(p2, name))


def test_gain_power_is_unit():
    rng = np.random.default_rng(0)
    g = np.concatenate([sample_paths(10, 10, rng=rng).gamma_F for _ in range(10_000)])
    assert np.mean(np.abs(g) ** 2) == pytest.approx(1.0, rel=0.02)


def test_angle_bounds_respected():
    rng = np.random.default_rng(1)
    p = sample_paths(50, 50, angle_bounds=(60.0, 120.0), rng=rng)
    lim = np.cos(np.deg2rad(60.0))
    assert np.all(np.abs(p.phi_T) <= lim + 1e-12)
    assert np.all(np.abs(p.theta_R) <= lim + 1e-12)


def test_min_separation():
    rng = np.random.default_rng(2)
    for _ in range(20):
        p = sample_paths(2, 2, rng=rng, min_separation=0.15)
        assert abs(p.theta_R[0] - p.theta_R[1]) >= 0.15
        assert abs(p.phi_T[0] - p.phi_T[1]) >= 0.15


def test_planar_paths_shape():
    p = sample_paths(2, 3, rng=np.random.default_rng(3), planar_irs=True)
    assert p.planar and p.theta_I.shape == (2, 2) and p.phi_I.shape == (3, 2)


def test_single_path_F_norm():
    tx, irs, _ = ula_triplet(4, 6, 3)
    p = PathSet(np.array([0.2]), np.array([-0.4]), np.array([1.0 + 0j]), np.array([0.1]),
                np.array([0.5]), np.array([1.0 + 0j]))
    F = subchannel_F(p, tx, irs)
    ref = np.sqrt(24) * np.outer(ula_steering(0.2, 6), ula_steering(-0.4, 4).conj())
    np.testing.assert_allclose(F, ref, atol=1e-13)
    assert np.linalg.norm(F) == pytest.approx(np.sqrt(24))


def test_F_scalar_sum_oracle(rng):
    K, N = 4, 6
    tx, irs, _ = ula_triplet(K, N, 2)
    p = sample_paths(2, 1, rng=rng)
    F = subchannel_F(p, tx, irs)
    ref = np.zeros((N, K), complex)
    for n in range(N):
        for k in range(K):
            for i in range(2):
                ref[n, k] += (np.sqrt(K * N / 2) * p.gamma_F[i]
                              * np.exp(1j * np.pi * n * p.theta_I[i]) / np.sqrt(N)
                              * np.exp(-1j * np.pi * k * p.phi_T[i]) / np.sqrt(K))
    np.testing.assert_allclose(F, ref, atol=1e-12)


def test_subchannel_ranks(rng):
    tx, irs, rx = ula_triplet(8, 12, 8)
    ch = realize_channel(sample_paths(2, 3, rng=rng), tx, irs, rx)
    s = np.linalg.svd(ch.F, compute_uv=False)
    assert np.all(s[2:] < 1e-10 * s[0])
    s = np.linalg.svd(ch.G, compute_uv=False)
    assert np.all(s[3:] < 1e-10 * s[0])
    s = np.linalg.svd(ch.H, compute_uv=False)
    assert np.all(s[6:] < 1e-10 * s[0])


def test_effective_channel_cases(rng):
    F, G = crandn(rng, 5, 3), crandn(rng, 4, 5)
    assert np.all(effective_channel(F, G, np.zeros(5)) == 0)
    F1, G1 = crandn(rng, 1, 3), crandn(rng, 4, 1)
    np.testing.assert_allclose(effective_channel(F1, G1, np.ones(1)), G1 @ F1)


def test_khatri_rao_identity(rng):
    for _ in range(20):
        M, K, N = rng.integers(1, 9, 3)
        F, G = crandn(rng, N, K), crandn(rng, M, N)
        w = np.exp(2j * np.pi * rng.random(N))
        lhs = vec(effective_channel(F, G, w))
        rhs = cascaded_channel(F, G) @ w
        assert np.linalg.norm(lhs - rhs) <= 1e-12 * np.linalg.norm(lhs)


def test_cascade_columns_bruteforce(rng):
    F, G = crandn(rng, 2, 2), crandn(rng, 2, 2)
    H = cascaded_channel(F, G)
    for n in range(2):
        e = np.zeros(2)
        e[n] = 1
        np.testing.assert_allclose(H[:, n], vec(G @ np.diag(e) @ F), atol=1e-14)
    f, g = crandn(rng, 1, 3), crandn(rng, 4, 1)
    np.testing.assert_allclose(cascaded_channel(f, g)[:, 0], np.kron(f[0], g[:, 0]))


def test_cascade_dimension_check(rng):
    with pytest.raises(ValueError):
        cascaded_channel(crandn(rng, 3, 2), crandn(rng, 2, 4))


@pytest.mark.parametrize("planar", [False, True])
def test_parametric_equals_cascade(rng, planar):
    tx, rx = ArrayGeometry.ula(6), ArrayGeometry.ula(5)
    irs = ArrayGeometry.upa(3, 4) if planar else ArrayGeometry.ula(7)
    for _ in range(10):
        p = sample_paths(2, 3, rng=rng, planar_irs=planar)
        ch = realize_channel(p, tx, irs, rx)
        comp = composite_params(p, tx, irs, rx)
        Hp = parametric_cascade(p.phi_T, p.theta_R, comp, tx, irs, rx)
        assert np.linalg.norm(Hp - ch.H) <= 1e-10 * np.linalg.norm(ch.H)


def test_composite_ordering():
    p = PathSet(np.array([0.1, 0.2]), np.array([0.0, 0.5]), np.array([1.0, 2.0]),
                np.array([-0.3, 0.4]), np.array([0.7, -0.2]), np.array([3.0, 5.0]))
    tx, irs, rx = ula_triplet(1, 1, 1)
    comp = composite_params(p, tx, irs, rx)
    np.testing.assert_allclose(comp.psi, [0.6, -0.3, 0.5, -0.4])
    np.testing.assert_allclose(comp.gamma / comp.gamma[0], [1, 5 / 3, 2, 10 / 3])


def test_equal_irs_cosines_give_zero_psi():
    p = PathSet(np.array([0.3]), np.array([0.0]), np.array([1.0]), np.array([0.2]),
                np.array([0.3]), np.array([1.0]))
    comp = composite_params(p, *ula_triplet(2, 2, 2))
    assert comp.psi[0] == 0


def test_parametric_degenerate_cases():
    tx, irs, rx = ula_triplet(3, 4, 2)
    p = PathSet(np.array([0.3]), np.array([0.1]), np.array([1.0]), np.array([0.2]),
                np.array([-0.6]), np.array([1.0]))
    comp = composite_params(p, tx, irs, rx)
    H = parametric_cascade(p.phi_T, p.theta_R, comp, tx, irs, rx)
    assert np.linalg.matrix_rank(H, tol=1e-10) == 1
    comp.gamma = np.zeros(1)
    assert not np.any(parametric_cascade(p.phi_T, p.theta_R, comp, tx, irs, rx))


def test_F_power_expectation():
    rng = np.random.default_rng(9)
    tx, irs, _ = ula_triplet(4, 6, 2)
    power = [np.linalg.norm(subchannel_F(sample_paths(2, 1, rng=rng), tx, irs)) ** 2
             for _ in range(4000)]
    assert np.mean(power) == pytest.approx(24, rel=0.05)


def test_awgn():
    rng = np.random.default_rng(0)
    x = np.ones(10)
    np.testing.assert_array_equal(add_awgn(x, 0, rng), x)
    n = add_awgn(np.zeros(10**6), 1.0, rng)
    assert np.var(n) == pytest.approx(1.0, rel=0.01)
    with pytest.raises(ValueError):
        add_awgn(x, -1, rng)


def test_pnr_and_wrap():
    assert pnr_to_sigma(20) == pytest.approx(0.1)
    np.testing.assert_allclose(wrap_coordinate([1.5, -1.2, 0.3, 1.0]), [-0.5, 0.8, 0.3, -1.0])
    # wrapped and unwrapped coordinates give identical IRS responses
    np.testing.assert_allclose(response_matrix([0.5], 8),
                               np.exp(1j * np.pi * np.arange(8) * -1.5)[:, None] / np.sqrt(8),
                               atol=1e-13)
