import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from irscascade.channel import effective_channel, realize_channel, sample_paths
from irscascade.frontend import build_stage2_plan, stage2_observe
from irscascade.geometry import (ArrayGeometry, l_shaped_selection, response_matrix,
                                 upa_response_matrix)
from irscascade.spectral import (CovarianceEstimate, EstimationFailure, column_scm, despread,
                                 estimate_irs_angles_ula, estimate_irs_angles_upa,
                                 estimate_outer_angles, fbss, root_music, smoothing_count,
                                 stack_groups)

from .conftest import crandn


def test_scm_cases(rng):
    x = crandn(rng, 5)
    R = column_scm(x)
    np.testing.assert_allclose(R.matrix, np.outer(x, x.conj()), atol=1e-14)
    assert np.linalg.matrix_rank(R.matrix) == 1
    Q = np.linalg.qr(crandn(rng, 6, 6))[0]
    np.testing.assert_allclose(column_scm(Q).matrix, np.eye(6) / 6, atol=1e-14)
    X = crandn(rng, 8, 32)
    ref = sum(np.outer(X[:, k], X[:, k].conj()) for k in range(32)) / 32
    np.testing.assert_allclose(column_scm(X).matrix, ref, atol=1e-13)


def test_fbss_forward_backward_only(rng):
    X = crandn(rng, 6, 4)
    R = column_scm(X).matrix
    J = np.eye(6)[::-1]
    out = fbss(R, 0).matrix
    np.testing.assert_allclose(out, 0.5 * (R + J @ R.conj() @ J), atol=1e-14)


def test_fbss_identity():
    out = fbss(np.eye(10), 3)
    np.testing.assert_allclose(out.matrix, np.eye(7), atol=1e-15)
    assert out.subarray_len == 7


def test_fbss_too_short():
    with pytest.raises(ValueError):
        fbss(np.eye(3), 3)


def test_fbss_matches_subarray_snapshots(rng):
    # forward subarrays of x and backward subarrays J x^* averaged explicitly
    n, U = 9, 3
    S = n - U + 1
    X = crandn(rng, n, 5)
    J = np.eye(S)[::-1]
    acc = np.zeros((S, S), complex)
    for k in range(5):
        x = X[:, k]
        for u in range(U):
            xf = x[u:u + S]
            xb = J @ x[U - 1 - u:U - 1 - u + S].conj()
            np.testing.assert_allclose(xb, (np.eye(n)[::-1] @ x.conj())[u:u + S])
            acc += np.outer(xf, xf.conj()) + np.outer(xb, xb.conj())
    acc /= 2 * U * 5
    np.testing.assert_allclose(fbss(column_scm(X), U - 1).matrix, acc, atol=1e-13)


@settings(max_examples=25)
@given(st.integers(0, 2**32 - 1), st.integers(0, 3))
def test_fbss_hermitian_psd(seed, L):
    rng = np.random.default_rng(seed)
    R = fbss(column_scm(crandn(rng, 8, 3)), L).matrix
    np.testing.assert_allclose(R, R.conj().T, atol=1e-14)
    assert np.linalg.eigvalsh(R).min() >= -1e-12


def test_smoothing_count():
    assert smoothing_count(16, 2) == 3
    assert smoothing_count(8, 4) == 4
    with pytest.raises(ValueError):
        smoothing_count(4, 4)


def test_coherent_rank_restoration():
    A = response_matrix([-0.4, 0.4], 16)
    x = A @ np.array([1.0, 1.0])
    R = column_scm(x).matrix
    ev = np.linalg.eigvalsh(R)[::-1]
    assert ev[1] < 1e-12 * ev[0]
    ev_s = np.linalg.eigvalsh(fbss(R, 2).matrix)[::-1]
    assert ev_s[1] > 10 * max(ev_s[2], 1e-12)


def test_root_music_single_source():
    a = response_matrix([0.0], 8)
    np.testing.assert_allclose(root_music(a @ a.conj().T, 1), [0.0], atol=1e-10)


def test_root_music_two_sources(rng):
    A = response_matrix([-0.5, 0.5], 10)
    S = crandn(rng, 2, 50)
    R = column_scm(A @ S)
    np.testing.assert_allclose(root_music(R, 2), [-0.5, 0.5], atol=1e-8)


@settings(max_examples=30)
@given(st.integers(0, 2**32 - 1), st.integers(1, 3))
def test_root_music_exact_subspace(seed, L):
    rng = np.random.default_rng(seed)
    c = np.sort(rng.uniform(-0.95, 0.95, L))
    if L > 1 and np.min(np.diff(c)) < 0.1:
        return
    A = response_matrix(c, 12)
    R = A @ np.diag(rng.uniform(0.5, 2, L)) @ A.conj().T
    est = root_music(R, L)
    np.testing.assert_allclose(est, c, atol=1e-8)
    np.testing.assert_allclose(root_music(7.5 * R, L), est, atol=1e-10)


def test_root_music_size_error():
    with pytest.raises(ValueError):
        root_music(np.eye(3), 3)


def test_root_music_failure_on_bad_input():
    R = np.full((6, 6), np.nan)
    with pytest.raises((EstimationFailure, np.linalg.LinAlgError)):
        root_music(R, 2)


def _outer_setup(seed, l_f=1, l_g=2):
    rng = np.random.default_rng(seed)
    tx, irs, rx = ArrayGeometry.ula(16), ArrayGeometry.ula(32), ArrayGeometry.ula(16)
    p = sample_paths(l_f, l_g, rng=rng, min_separation=0.15)
    ch = realize_channel(p, tx, irs, rx)
    H0 = effective_channel(ch.F, ch.G, np.exp(2j * np.pi * rng.random(32)))
    return p, H0, rng


@pytest.mark.parametrize("seed", range(5))
def test_outer_angles_noise_free(seed):
    p, H0, _ = _outer_setup(seed, 2, 2)
    th, ph = estimate_outer_angles(H0, 2, 2)
    np.testing.assert_allclose(th, np.sort(p.theta_R), atol=1e-6)
    np.testing.assert_allclose(ph, np.sort(p.phi_T), atol=1e-6)


def test_outer_angles_continuity():
    p, H0, rng = _outer_setup(7)
    E = crandn(rng, *H0.shape)
    errs = []
    for scale in (1e-3, 1e-6):
        th, ph = estimate_outer_angles(H0 + scale * np.linalg.norm(H0) * E / np.linalg.norm(E),
                                       2, 1)
        errs.append(max(np.abs(th - np.sort(p.theta_R)).max(), np.abs(ph - p.phi_T).max()))
    assert errs[1] < errs[0] < 1e-2
    assert errs[1] < 1e-5


def test_despread_inverts_sweep(rng):
    D = 8
    Z = crandn(rng, 3, D)
    Theta = np.fft.fft(np.eye(D))
    np.testing.assert_allclose(despread(Z @ Theta, Theta), Z, atol=1e-13)


def test_irs_ula_ideal_single_path():
    D = 12
    Theta = np.fft.fft(np.eye(D))
    Z = 2.0 * response_matrix([0.3], D).conj().T
    est = estimate_irs_angles_ula(Z @ Theta, Theta, 1)
    np.testing.assert_allclose(est, [0.3], atol=1e-8)


def test_irs_ula_pipeline_sorted(rng):
    tx, irs, rx = ArrayGeometry.ula(16), ArrayGeometry.ula(32), ArrayGeometry.ula(16)
    p = sample_paths(1, 2, rng=rng, min_separation=0.15)
    ch = realize_channel(p, tx, irs, rx)
    plan = build_stage2_plan(p.phi_T, p.theta_R, tx, irs, rx, 16, 2, 2)
    Y = stage2_observe(plan, ch.F, ch.G, 0.0, rng)
    est = estimate_irs_angles_ula(Y, plan.Theta, 2)
    psi = np.mod(np.asarray(p.phi_I) - p.theta_I[0] + 1, 2) - 1
    assert np.all(np.diff(est) > 0)
    np.testing.assert_allclose(est, np.sort(psi), atol=1e-8)


def test_irs_ula_too_few_steps(rng):
    with pytest.raises(ValueError):
        estimate_irs_angles_ula(crandn(rng, 4, 4), np.eye(4), 4)


def test_irs_upa_single_path():
    n_y, n_z = 6, 6
    sel = l_shaped_selection(n_y, n_z, 1, 1)
    D = sel.D
    Theta = np.fft.fft(np.eye(D))
    u, v = 0.35, -0.55
    a = upa_response_matrix([u], [v], n_y, n_z)[sel.active_indices, 0]
    Z = a.conj()[None, :]
    u_hat, v_hat = estimate_irs_angles_upa(Z @ Theta, Theta, sel, 1)
    assert u_hat[0] == pytest.approx(u, abs=1e-6)
    assert v_hat[0] == pytest.approx(v, abs=1e-6)


def test_stacking_single_line_is_column_selection(rng):
    sel = l_shaped_selection(5, 4, 1, 1)
    Z = crandn(rng, 3, sel.D)
    np.testing.assert_array_equal(stack_groups(Z, sel, sel.row_groups),
                                  Z[:, sel.positions(sel.row_groups[0])])
    sel2 = l_shaped_selection(5, 4, 2, 1)
    Z2 = crandn(rng, 3, sel2.D)
    assert stack_groups(Z2, sel2, sel2.row_groups).shape == (6, 5)


def test_covariance_defaults():
    c = CovarianceEstimate(np.eye(4), 3)
    assert c.subarray_len == 4 and not c.smoothed
