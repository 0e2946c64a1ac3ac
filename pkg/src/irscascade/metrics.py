"""Per-trial error metrics."""

from __future__ import annotations

import numpy as np

from .channel import composite_params, wrap_coordinate
from .sparse import align_atoms, estimated_atoms

METRIC_NAMES = ("mse_theta_R", "mse_phi_T", "mse_irs", "mse_u", "mse_v", "mse_gamma", "nmse_H")


def nmse(H, H_hat):
    return float(np.linalg.norm(H - H_hat) ** 2 / np.linalg.norm(H) ** 2)


def sorted_cosine_mse(truth, estimate):
    truth = np.sort(np.asarray(truth, dtype=float))
    estimate = np.sort(np.asarray(estimate, dtype=float))
    return float(np.sum((truth - estimate) ** 2) / len(truth))


def truth_atoms(channel):
    """Ground-truth ``(irs_coord, phi_T, theta_R, gain)`` atoms, wrapped."""
    comp = composite_params(channel.paths, channel.tx, channel.irs, channel.rx)
    L_G = len(comp.theta_R)
    spacing = channel.irs.spacing
    atoms = []
    for c, g in enumerate(comp.gamma):
        i, j = divmod(c, L_G)
        atoms.append((wrap_coordinate(comp.psi[c], spacing), comp.phi_T[i], comp.theta_R[j], g))
    return atoms


def compute_metrics(channel, result):
    """Metric dict for one trial; entries an estimator cannot supply are NaN."""
    out = dict.fromkeys(METRIC_NAMES, float("nan"))
    H = channel.H
    if result.H_hat is not None:
        out["nmse_H"] = nmse(H, result.H_hat)
    paths = channel.paths
    if result.theta_R_hat is not None:
        out["mse_theta_R"] = sorted_cosine_mse(paths.theta_R, result.theta_R_hat)
        out["mse_phi_T"] = sorted_cosine_mse(paths.phi_T, result.phi_T_hat)
    if result.gamma_hat is None or result.dictionary is None:
        return out

    truth = truth_atoms(channel)
    est = estimated_atoms(result.dictionary, result.gamma_hat)
    pairs = align_atoms(truth, est, channel.irs.spacing)
    L = len(truth)
    spacing = channel.irs.spacing
    gain_err = sum(abs(t[3]) ** 2 for t in truth)
    irs_err = np.zeros(2 if channel.paths.planar else 1)
    for ti, ei in pairs:
        t, e = truth[ti], est[ei]
        gain_err += abs(t[3] - e[3]) ** 2 - abs(t[3]) ** 2
        irs_err += np.atleast_1d(wrap_coordinate(np.asarray(t[0]) - np.asarray(e[0]),
                                                 spacing)) ** 2
    out["mse_gamma"] = float(gain_err / L)
    if len(pairs) == L:
        if channel.paths.planar:
            out["mse_u"], out["mse_v"] = (float(x) for x in irs_err / L)
            out["mse_irs"] = 0.5 * (out["mse_u"] + out["mse_v"])
        else:
            out["mse_irs"] = float(irs_err[0] / L)
    return out


def ls_metrics(channel, H_hat):
    out = dict.fromkeys(METRIC_NAMES, float("nan"))
    out["nmse_H"] = nmse(channel.H, H_hat)
    return out
