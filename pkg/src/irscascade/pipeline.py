"""
End-to-end estimators: the two-stage parametric scheme (ULA or planar IRS)
and the unstructured least-squares baseline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import dft

from .channel import effective_channel, vec
from .completion import CompletionProblem, gcg_altmin, recover_H0
from .frontend import (build_stage1_plan, build_stage2_plan, hybrid_approximation,
                       random_phase_dft, stage1_observe, stage2_observe)
from .sparse import gain_dictionary, omp, reconstruct_cascade
from .spectral import (EstimationFailure, estimate_irs_angles_ula,
                       estimate_irs_angles_upa, estimate_outer_angles)


@dataclass
class EstimationResult:
    theta_R_hat: np.ndarray | None = None
    phi_T_hat: np.ndarray | None = None
    irs_hat: object = None
    gamma_hat: np.ndarray | None = None
    H_hat: np.ndarray | None = None
    dictionary: object = None
    overhead: int = 0
    diagnostics: dict = field(default_factory=dict)

    @property
    def failed(self):
        return bool(self.diagnostics.get("failure_flags"))


def random_reflection(n, rng):
    """Unit-modulus IRS phases drawn uniformly on the circle."""
    return np.exp(2j * np.pi * rng.random(n))


def run_two_stage(config, channel, sigma, rng, use_fbss=True):
    """Run both training stages and all estimation steps on one channel.

    A step that cannot produce estimates records a failure flag; the
    partially filled result is returned rather than raising.
    """
    rng = np.random.default_rng(rng)
    tx, irs, rx = channel.tx, channel.irs, channel.rx
    K, M, N = tx.n_elements, rx.n_elements, irs.n_elements
    L_F, L_G = config.L_F, config.L_G
    res = EstimationResult(overhead=config.overhead)
    diag = res.diagnostics
    diag["failure_flags"] = []

    # stage 1: effective channel through a fixed random IRS state
    omega0 = random_reflection(N, rng)
    H0 = effective_channel(channel.F, channel.G, omega0)
    plan1 = build_stage1_plan(K, M, config.Q_r, config.S, rng)
    y0 = stage1_observe(plan1, H0, sigma, rng)
    mu = config.mu_scale * sigma * math.sqrt(config.S * config.Q_r)
    problem = CompletionProblem(plan1.rows, plan1.cols, y0, (M, K), mu=mu,
                                max_rank=config.rank_cap, tol=config.completion_tol)
    completion = gcg_altmin(problem)
    diag["imc_rank"] = completion.rank_found
    diag["imc_residual"] = completion.objective_trace[-1]
    diag["imc_converged"] = completion.converged
    if completion.rank_found == 0:
        diag["failure_flags"].append("completion_empty")
        return res
    H0_hat = recover_H0(completion, plan1.X_R, plan1.X_T)

    try:
        res.theta_R_hat, res.phi_T_hat = estimate_outer_angles(
            H0_hat, L_G, L_F, rx.spacing, use_fbss=use_fbss)
    except EstimationFailure as exc:
        diag["failure_flags"].append(f"outer_angles: {exc}")
        return res

    # stage 2: beams on the estimated outer angles, DFT sweep over a subarray
    plan2 = build_stage2_plan(res.phi_T_hat, res.theta_R_hat, tx, irs, rx, config.D,
                              config.Q_t, config.Q_r, subarray=config.subarray(),
                              hybrid_iters=config.hybrid_iters)
    diag["hybrid_residuals"] = dict(plan2.hybrid_residuals)
    Y = stage2_observe(plan2, channel.F, channel.G, sigma, rng)

    try:
        if config.planar:
            res.irs_hat = estimate_irs_angles_upa(Y, plan2.Theta, plan2.subarray, config.L,
                                                  irs.spacing, use_fbss=use_fbss)
        else:
            res.irs_hat = estimate_irs_angles_ula(Y, plan2.Theta, config.L, irs.spacing,
                                                  use_fbss=use_fbss)
    except EstimationFailure as exc:
        diag["failure_flags"].append(f"irs_angles: {exc}")
        return res

    dictionary = gain_dictionary(plan2, res.irs_hat, res.phi_T_hat, res.theta_R_hat,
                                 tx, irs, rx)
    fit = omp(vec(Y), dictionary, config.L)
    diag["omp_residual"] = fit.residual_norms[-1]
    diag["omp_rank_deficient"] = fit.rank_deficient
    res.dictionary = dictionary
    res.gamma_hat = fit.gamma
    res.H_hat = reconstruct_cascade(res.phi_T_hat, res.theta_R_hat, dictionary.irs_atoms,
                                    fit.gamma, tx, irs, rx)
    return res


def run_two_stage_ula(config, channel, sigma, rng, use_fbss=True):
    if config.planar:
        raise ValueError("configuration describes a planar IRS")
    return run_two_stage(config, channel, sigma, rng, use_fbss)


def run_two_stage_upa(config, channel, sigma, rng, use_fbss=True):
    if not config.planar:
        raise ValueError("configuration describes a linear IRS")
    return run_two_stage(config, channel, sigma, rng, use_fbss)


def _hybrid_sweep(n, q_chains, rng, iters):
    """Approximately unitary ``n x n`` beam set, one hybrid beam per column."""
    target = random_phase_dft(n, rng)
    cols = []
    for c in range(n):
        rf, bb, _ = hybrid_approximation(target[:, c], q_chains, iters)
        cols.append((rf @ bb)[:, 0])
    return np.column_stack(cols)


def ls_baseline(channel, config, sigma, rng):
    """Least-squares cascade estimate from a full precoder/combiner/IRS sweep.

    Every IRS state (a column of the ``N``-point DFT) is probed with all
    ``K`` precoders and all ``M`` combiners, ``Q_r`` combiners per channel
    use. Each effective channel is recovered by inverting the sweep
    matrices, and ``H`` by inverting the IRS sweep.
    """
    rng = np.random.default_rng(rng)
    K, M, N = channel.tx.n_elements, channel.rx.n_elements, channel.irs.n_elements
    P = _hybrid_sweep(K, config.Q_t, rng, config.hybrid_iters)
    W = _hybrid_sweep(M, config.Q_r, rng, config.hybrid_iters)
    Omega = dft(N)
    n_groups = math.ceil(M / config.Q_r)
    groups = [list(range(g * config.Q_r, min((g + 1) * config.Q_r, M)))
              for g in range(n_groups)]
    W_inv_H = np.linalg.inv(W.conj().T)
    P_inv = np.linalg.inv(P)

    stacked = np.empty((M * K, N), dtype=complex)
    for n in range(N):
        Hn = effective_channel(channel.F, channel.G, Omega[:, n])
        Yn = W.conj().T @ Hn @ P
        if sigma > 0:
            noise = sigma * (rng.standard_normal((n_groups, M, K))
                             + 1j * rng.standard_normal((n_groups, M, K))) / np.sqrt(2)
            for g, rows in enumerate(groups):
                Yn[rows] += W[:, rows].conj().T @ noise[g]
        stacked[:, n] = vec(W_inv_H @ Yn @ P_inv)
    return stacked @ np.linalg.inv(Omega)
