"""
Composite-gain recovery on a small dictionary built from estimated angles.

The outer and IRS angles are estimated separately, so which IRS coordinate
belongs to which (TX, RX) pair is unknown. Every combination becomes one
dictionary column; OMP picks the ``L_F * L_G`` that explain the stage-2
data, which associates the angles and yields the gains in one pass.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import outer_response, wrap_coordinate
from .frontend import psi_matrix
from .geometry import ArrayKind, irs_response


@dataclass
class GainDictionary:
    """Dictionary ``(Omega_bar^T A_I^*) ⊗ Psi`` and its column bookkeeping.

    Column ``a * L + i * L_G + j`` couples IRS atom ``a`` with TX angle ``i``
    and RX angle ``j`` (IRS slowest, RX fastest).
    """

    matrix: np.ndarray
    irs_atoms: np.ndarray
    phi_T: np.ndarray
    theta_R: np.ndarray
    irs_index: np.ndarray
    tx_index: np.ndarray
    rx_index: np.ndarray

    @property
    def n_outer(self):
        return len(self.phi_T) * len(self.theta_R)

    @property
    def n_irs(self):
        return len(self.irs_atoms)


@dataclass
class OMPResult:
    gamma: np.ndarray
    support: list[int]
    residual_norms: list[float] = field(default_factory=list)
    rank_deficient: bool = False


def irs_atom_grid(irs_hat, irs):
    """IRS atoms: the coordinates themselves (ULA) or all ``(u, v)`` pairs (UPA)."""
    if irs.kind == ArrayKind.UPA:
        u_hat, v_hat = irs_hat
        uu, vv = np.meshgrid(np.asarray(u_hat), np.asarray(v_hat), indexing="ij")
        return np.column_stack([uu.ravel(), vv.ravel()])
    return np.asarray(irs_hat, dtype=float)


def _atom_response(atoms, irs):
    atoms = np.asarray(atoms)
    if atoms.ndim == 2:
        return irs_response(irs, (atoms[:, 0], atoms[:, 1]))
    return irs_response(irs, atoms)


def gain_dictionary(plan, irs_hat, phi_T_hat, theta_R_hat, tx, irs, rx):
    """Build the gain-recovery dictionary from estimated angles."""
    phi_T_hat = np.atleast_1d(phi_T_hat)
    theta_R_hat = np.atleast_1d(theta_R_hat)
    atoms = irs_atom_grid(irs_hat, irs)
    if len(atoms) == 0 or len(phi_T_hat) == 0 or len(theta_R_hat) == 0:
        raise ValueError("empty angle estimates")
    A_I = _atom_response(atoms, irs)
    Psi = psi_matrix(plan, phi_T_hat, theta_R_hat, tx, rx)
    Phi = np.kron(plan.Omega_bar.T @ A_I.conj(), Psi)

    L_F, L_G = len(phi_T_hat), len(theta_R_hat)
    a, i, j = np.meshgrid(np.arange(len(atoms)), np.arange(L_F), np.arange(L_G),
                          indexing="ij")
    return GainDictionary(matrix=Phi, irs_atoms=atoms, phi_T=phi_T_hat, theta_R=theta_R_hat,
                          irs_index=a.ravel(), tx_index=i.ravel(), rx_index=j.ravel())


def omp(y, Phi, k):
    """Orthogonal matching pursuit with exactly ``k`` selections.

    Columns are compared after normalisation; coefficients are the
    least-squares fit on the selected (unnormalised) columns.
    """
    A = Phi.matrix if isinstance(Phi, GainDictionary) else np.asarray(Phi)
    y = np.asarray(y, dtype=complex).ravel()
    n_rows, n_cols = A.shape
    if k > n_cols or k > n_rows:
        raise ValueError(f"sparsity {k} exceeds dictionary size {A.shape}")
    gamma = np.zeros(n_cols, dtype=complex)
    norms = np.linalg.norm(A, axis=0)
    norms[norms == 0] = np.inf
    residual = y.copy()
    history = [float(np.linalg.norm(residual))]
    if history[0] == 0:
        return OMPResult(gamma, [], history)

    support = []
    rank_deficient = False
    coef = np.zeros(0, complex)
    for _ in range(k):
        corr = np.abs(A.conj().T @ residual) / norms
        corr[support] = -np.inf
        support.append(int(np.argmax(corr)))
        sub = A[:, support]
        coef, _, rank, _ = np.linalg.lstsq(sub, y, rcond=None)
        rank_deficient |= rank < len(support)
        residual = y - sub @ coef
        history.append(float(np.linalg.norm(residual)))
    gamma[support] = coef
    return OMPResult(gamma, support, history, rank_deficient)


def gain_matrix(gamma, n_outer):
    """``Mat(gamma)``: outer-pair rows by IRS-atom columns."""
    return np.asarray(gamma).reshape(-1, n_outer).T


def reconstruct_cascade(phi_T_hat, theta_R_hat, irs_atoms, gamma_hat, tx, irs, rx):
    """``(A_T^* ⊗ A_R) Mat(gamma) A_I^H`` over every IRS element."""
    A_TR = outer_response(phi_T_hat, theta_R_hat, tx, rx)
    A_I = _atom_response(irs_atoms, irs)
    return A_TR @ gain_matrix(gamma_hat, A_TR.shape[1]) @ A_I.conj().T


def estimated_atoms(dictionary, gamma):
    """Non-zero atoms as ``(irs_coord, phi_T, theta_R, gain)`` tuples."""
    out = []
    for c in np.flatnonzero(gamma):
        out.append((dictionary.irs_atoms[dictionary.irs_index[c]],
                    dictionary.phi_T[dictionary.tx_index[c]],
                    dictionary.theta_R[dictionary.rx_index[c]],
                    gamma[c]))
    return out


def atom_distance(irs_a, irs_b, phi_a, phi_b, theta_a, theta_b, spacing=0.5):
    d_irs = np.sum(np.atleast_1d(wrap_coordinate(np.asarray(irs_a) - np.asarray(irs_b),
                                                 spacing)) ** 2)
    return float(np.sqrt(d_irs + (phi_a - phi_b) ** 2 + (theta_a - theta_b) ** 2))


def align_atoms(truth, estimates, spacing=0.5):
    """Greedy nearest-neighbour matching of estimated to true atoms.

    Both arguments are lists of ``(irs_coord, phi_T, theta_R, gain)``.
    Returns ``(truth_index, estimate_index)`` pairs, closest first.
    """
    cand = []
    for ti, t in enumerate(truth):
        for ei, e in enumerate(estimates):
            cand.append((atom_distance(t[0], e[0], t[1], e[1], t[2], e[2], spacing), ti, ei))
    cand.sort()
    used_t, used_e, pairs = set(), set(), []
    for _, ti, ei in cand:
        if ti in used_t or ei in used_e:
            continue
        used_t.add(ti)
        used_e.add(ei)
        pairs.append((ti, ei))
    return pairs
