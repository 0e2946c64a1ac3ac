"""
Training design for the two-stage estimator.

Stage 1 probes the effective channel ``H0 = G diag(w0) F`` with precoders and
combiners drawn from unitary feature matrices, so every received symbol is
one entry of ``X_R^H H0 X_T``. Stage 2 steers hybrid beams towards the
estimated outer angles and sweeps DFT phase patterns over a switched-on
subset of IRS elements.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import dft, khatri_rao

from .channel import _complex_normal
from .geometry import (ArrayKind, SubarraySelection, leading_selection,
                       response_matrix)


@dataclass
class Stage1Plan:
    X_T: np.ndarray
    X_R: np.ndarray
    schedule: list[tuple[int, tuple[int, ...]]]
    rows: np.ndarray
    cols: np.ndarray

    @property
    def S(self):
        return len(self.schedule)

    @property
    def sampling_pattern(self):
        return set(zip(self.rows.tolist(), self.cols.tolist()))


@dataclass
class Stage2Plan:
    P: np.ndarray
    W: np.ndarray
    Omega_bar: np.ndarray
    Theta: np.ndarray
    subarray: SubarraySelection
    hybrid_residuals: dict = field(default_factory=dict)

    @property
    def D(self):
        return self.Theta.shape[0]


def unitary_dft(n):
    return dft(n) / np.sqrt(n)


def random_phase_dft(n, rng):
    """Unitary DFT with randomly phase-rotated rows."""
    phases = np.exp(2j * np.pi * rng.random(n))
    return phases[:, None] * unitary_dft(n)


def build_stage1_plan(K, M, Q_r, S, rng):
    """Feature matrices and a column-cyclic, row-stratified sampling schedule.

    Step ``s`` transmits on column ``s mod K`` of ``X_T`` and combines with
    ``Q_r`` columns of ``X_R``; the rows observed within one column of
    ``C_0`` never repeat.
    """
    if Q_r > M:
        raise ValueError("Q_r cannot exceed M")
    if S * Q_r > M * K:
        raise ValueError(f"S*Q_r = {S * Q_r} exceeds the {M}x{K} grid")
    if math.ceil(S / K) * Q_r > M:
        raise ValueError("schedule needs more distinct combiner columns than M")
    rng = np.random.default_rng(rng)
    X_T = random_phase_dft(K, rng)
    X_R = random_phase_dft(M, rng)
    perms = [rng.permutation(M) for _ in range(K)]
    used = [0] * K
    schedule, rows, cols = [], [], []
    for s in range(S):
        t = s % K
        r = perms[t][used[t]:used[t] + Q_r]
        used[t] += Q_r
        schedule.append((t, tuple(int(x) for x in r)))
        rows.extend(r)
        cols.extend([t] * Q_r)
    return Stage1Plan(X_T, X_R, schedule, np.asarray(rows, dtype=int),
                      np.asarray(cols, dtype=int))


def stage1_observe(plan, H0, sigma, rng):
    """Received symbols, ordered like ``plan.rows``/``plan.cols``.

    Each step sees ``W_s^H H0 p_s + W_s^H n_s`` with fresh ``n_s ~ CN(0, σ²I)``
    and pilot ``x_s = 1``.
    """
    M = H0.shape[0]
    out = []
    for t, r in plan.schedule:
        W = plan.X_R[:, list(r)]
        y = W.conj().T @ (H0 @ plan.X_T[:, t])
        if sigma > 0:
            y = y + W.conj().T @ (sigma * _complex_normal(rng, M))
        out.append(y)
    return np.concatenate(out) if out else np.zeros(0, complex)


def _lstsq(A, B):
    return np.linalg.lstsq(A, B, rcond=None)[0]


def _rel_residual(T, RF, BB, norm_T):
    return np.linalg.norm(T - RF @ BB) / norm_T


def hybrid_approximation(target, q_chains, iters=20, return_history=False):
    """Factor ``target ≈ RF @ BB`` with a unit-modulus analog stage.

    Alternates a least-squares baseband update with phase extraction
    ``RF = exp(j arg(target BB^H)) / sqrt(n)``. A phase-extraction step is
    only kept when it does not increase the fitting error. The result is
    rescaled to the power of ``target``.

    Returns ``(RF, BB, residual)`` and, if requested, the per-iteration
    relative residuals before rescaling.
    """
    T = np.asarray(target, dtype=complex)
    if T.ndim == 1:
        T = T[:, None]
    n, m = T.shape
    if q_chains < m:
        raise ValueError(f"{q_chains} RF chains cannot realise {m} streams")
    if iters < 1:
        raise ValueError("iters must be >= 1")
    norm_T = np.linalg.norm(T)
    if norm_T == 0:
        RF = np.exp(1j * np.angle(unitary_dft(n)[:, :q_chains])) / np.sqrt(n)
        out = (RF, np.zeros((q_chains, m), complex), 0.0)
        return (*out, [0.0]) if return_history else out

    extra = unitary_dft(n)[:, : q_chains - m] if q_chains > m else np.zeros((n, 0))
    RF = np.exp(1j * np.angle(np.hstack([T, extra]))) / np.sqrt(n)
    BB = _lstsq(RF, T)
    res = _rel_residual(T, RF, BB, norm_T)
    history = [res]
    for _ in range(iters):
        RF_new = np.exp(1j * np.angle(T @ BB.conj().T)) / np.sqrt(n)
        BB_new = _lstsq(RF_new, T)
        res_new = _rel_residual(T, RF_new, BB_new, norm_T)
        if res_new <= res:
            RF, BB, res = RF_new, BB_new, res_new
        history.append(res)

    produced = np.linalg.norm(RF @ BB)
    if produced > 0:
        BB = BB * (norm_T / produced)
    residual = _rel_residual(T, RF, BB, norm_T)
    if return_history:
        return RF, BB, residual, history
    return RF, BB, residual


def build_stage2_plan(phi_T_hat, theta_R_hat, tx, irs, rx, D, Q_t, Q_r, subarray=None,
                      hybrid_iters=20, min_D=None):
    """Beam-steered precoder/combiner and the subarray DFT IRS schedule.

    ``P ≈ A_T(phi_T_hat)`` and ``W ≈ A_R(theta_R_hat)`` are synthesised with
    ``Q_t`` and ``Q_r`` RF chains. Rows of ``Omega_bar`` at switched-off IRS
    elements are zero; the active rows carry a ``D x D`` DFT ``Theta``.
    """
    L_F, L_G = len(phi_T_hat), len(theta_R_hat)
    N = irs.n_elements
    min_D = L_F * L_G + 1 if min_D is None else min_D
    if D < min_D or D > N:
        raise ValueError(f"D={D} must lie in [{min_D}, {N}]")
    if subarray is None:
        if irs.kind == ArrayKind.UPA:
            raise ValueError("a planar IRS needs an explicit subarray selection")
        subarray = leading_selection(N, D)
    if subarray.D != D:
        raise ValueError(f"subarray has {subarray.D} elements, expected D={D}")

    A_T = response_matrix(phi_T_hat, tx.n_elements, tx.spacing)
    A_R = response_matrix(theta_R_hat, rx.n_elements, rx.spacing)
    P_rf, P_bb, res_p = hybrid_approximation(A_T, Q_t, hybrid_iters)
    W_rf, W_bb, res_w = hybrid_approximation(A_R, Q_r, hybrid_iters)

    Theta = dft(D)
    Omega_bar = np.zeros((N, D), dtype=complex)
    Omega_bar[subarray.active_indices, :] = Theta
    return Stage2Plan(P=P_rf @ P_bb, W=W_rf @ W_bb, Omega_bar=Omega_bar, Theta=Theta,
                      subarray=subarray, hybrid_residuals={"P": res_p, "W": res_w})


def stage2_observe(plan, F, G, sigma, rng):
    """Stage-2 observation ``Y`` ((L_F L_G) x D).

    Column ``d`` is ``vec(W^H G diag(w_d) F P)`` plus ``vec(W^H N_d)`` with
    identity pilots over the ``L_F`` channel uses of the step.
    """
    Z = khatri_rao((F @ plan.P).T, plan.W.conj().T @ G)
    Y = Z @ plan.Omega_bar
    if sigma > 0:
        L_F = plan.P.shape[1]
        M = plan.W.shape[0]
        N_d = sigma * _complex_normal(rng, (plan.D, M, L_F))
        noise = np.einsum("mg,dml->lgd", plan.W.conj(), N_d)
        Y = Y + noise.reshape(-1, plan.D)
    return Y


def psi_matrix(plan, phi_T, theta_R, tx, rx):
    """Beamformed outer-response coupling ``(P^T A_T^*) ⊗ (W^H A_R)``."""
    A_T = response_matrix(phi_T, tx.n_elements, tx.spacing)
    A_R = response_matrix(theta_R, rx.n_elements, rx.spacing)
    return np.kron(plan.P.T @ A_T.conj(), plan.W.conj().T @ A_R)
