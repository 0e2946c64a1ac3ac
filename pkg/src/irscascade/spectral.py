"""
Subspace angle estimation: sample covariances, forward-backward spatial
smoothing (FBSS) and root-MUSIC.

Used for the outer angles (columns/rows of the recovered effective channel)
and for the IRS angles (rows of the de-spread stage-2 observation).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import wrap_coordinate


class EstimationFailure(RuntimeError):
    """Raised when a trial cannot produce the requested number of estimates."""


@dataclass
class CovarianceEstimate:
    matrix: np.ndarray
    n_snapshots: int
    smoothed: bool = False
    subarray_len: int | None = None

    def __post_init__(self):
        if self.subarray_len is None:
            self.subarray_len = self.matrix.shape[0]


def _as_matrix(R):
    return R.matrix if isinstance(R, CovarianceEstimate) else np.asarray(R)


def column_scm(samples):
    """Sample covariance ``X X^H / k`` of the ``k`` columns of ``samples``."""
    X = np.asarray(samples)
    if X.ndim == 1:
        X = X[:, None]
    k = X.shape[1]
    if k < 1:
        raise ValueError("need at least one snapshot")
    R = X @ X.conj().T / k
    return CovarianceEstimate(0.5 * (R + R.conj().T), n_snapshots=k)


def smoothing_count(n, L):
    """Number of FBSS subarrays for ``L`` sources on ``n`` elements.

    ``L + 1`` subarrays of ``n - L`` elements when that still leaves more
    elements than sources; otherwise as many as possible while keeping
    ``L + 1`` elements per subarray.
    """
    if n <= L:
        raise ValueError(f"{n} elements cannot resolve {L} sources")
    if n - L > L:
        return L + 1
    return n - L


def fbss(R, L, n_sub=None):
    """Forward-backward spatially smoothed covariance.

    Averages the ``U`` overlapping ``S x S`` diagonal blocks of ``R`` with
    their exchange-conjugated counterparts ``J R* J``. ``U = L + 1`` and
    ``S = n - L`` unless ``n_sub`` overrides the subarray count.
    """
    Rm = _as_matrix(R)
    n = Rm.shape[0]
    if n_sub is None:
        if n <= L:
            raise ValueError(f"array of {n} elements too short for L={L}")
        n_sub = L + 1
    if not (1 <= n_sub <= n):
        raise ValueError(f"n_sub={n_sub} must lie in [1, {n}]")
    size = n - n_sub + 1
    acc = np.zeros((size, size), dtype=complex)
    for u in range(n_sub):
        acc += Rm[u:u + size, u:u + size]
    acc /= n_sub
    out = 0.5 * (acc + acc[::-1, ::-1].conj())
    out = 0.5 * (out + out.conj().T)
    snaps = R.n_snapshots if isinstance(R, CovarianceEstimate) else 1
    return CovarianceEstimate(out, n_snapshots=snaps, smoothed=True, subarray_len=size)


def music_polynomial(R, L):
    """Coefficients (highest power first) of the root-MUSIC polynomial."""
    Rm = _as_matrix(R)
    S = Rm.shape[0]
    _, vecs = np.linalg.eigh(Rm)
    En = vecs[:, : S - L]
    C = En @ En.conj().T
    return np.array([np.trace(C, offset=p) for p in range(S - 1, -S, -1)])


def _select_roots(roots, L):
    """Pick the ``L`` root pairs nearest the unit circle.

    Roots of the MUSIC polynomial come in pairs ``(z, 1/z*)``. Each inside
    root is merged with its partner (the phase of the two unit phasors is
    averaged), which keeps noise-free double roots on the circle accurate
    to machine precision.
    """
    roots = roots[np.isfinite(roots) & (roots != 0)]
    mags = np.abs(roots)
    order = np.lexsort((np.angle(roots), np.abs(1 - mags)))
    used = np.zeros(len(roots), dtype=bool)
    picked = []
    for i in order:
        if used[i]:
            continue
        used[i] = True
        z = roots[i]
        dist = np.abs(roots - 1 / np.conj(z))
        dist[used] = np.inf
        phasor = z / abs(z)
        inner = abs(z)
        if np.isfinite(dist).any():
            j = int(np.argmin(dist))
            used[j] = True
            phasor = phasor + roots[j] / abs(roots[j])
            inner = min(inner, abs(roots[j]))
        if inner <= 1.0 + 1e-9:
            picked.append((np.angle(phasor), inner))
        if len(picked) == L:
            break
    return picked


def root_music(R, L, spacing=0.5):
    """Root-MUSIC estimates of ``L`` phase coordinates, sorted ascending.

    Returns ``arg(z) / (2π spacing)`` folded onto ``[-1/(2 spacing),
    1/(2 spacing))``, i.e. ``[-1, 1)`` at half-wavelength spacing.
    """
    Rm = _as_matrix(R)
    S = Rm.shape[0]
    if S <= L:
        raise ValueError(f"subarray of {S} elements cannot resolve {L} sources")
    coeffs = music_polynomial(Rm, L)
    if not np.all(np.isfinite(coeffs)):
        raise EstimationFailure("non-finite MUSIC polynomial")
    roots = np.roots(coeffs)
    picked = _select_roots(roots, L)
    if len(picked) < L:
        raise EstimationFailure(f"only {len(picked)} admissible roots for L={L}")
    phases = np.array([p for p, _ in picked])
    return np.sort(wrap_coordinate(phases / (2 * np.pi * spacing), spacing))


def _angles_from_samples(X, L, spacing, use_fbss):
    R = column_scm(X)
    if use_fbss:
        R = fbss(R, L, n_sub=smoothing_count(R.matrix.shape[0], L))
    return root_music(R, L, spacing)


def estimate_outer_angles(H0_hat, L_G, L_F, spacing=0.5, use_fbss=True):
    """RX cosines from the columns and TX cosines from the rows of ``H0_hat``."""
    M, K = H0_hat.shape
    if M <= L_G or K <= L_F:
        raise ValueError("arrays too short for the requested path counts")
    theta_R = _angles_from_samples(H0_hat, L_G, spacing, use_fbss)
    phi_T = _angles_from_samples(H0_hat.conj().T, L_F, spacing, use_fbss)
    return np.clip(theta_R, -1, 1), np.clip(phi_T, -1, 1)


def despread(Y, Theta):
    """Undo the DFT IRS sweep: ``Y Theta^H / D``."""
    return Y @ Theta.conj().T / Theta.shape[0]


def _irs_coordinates(Z_rows, L, spacing, use_fbss):
    # rows of Z~ carry conj steering phases, so Z~^H Z~ has a(psi) columns
    R = CovarianceEstimate(Z_rows.conj().T @ Z_rows / Z_rows.shape[0],
                           n_snapshots=Z_rows.shape[0])
    if use_fbss:
        R = fbss(R, L, n_sub=smoothing_count(R.matrix.shape[0], L))
    return root_music(R, L, spacing)


def estimate_irs_angles_ula(Y, Theta, L_total, spacing=0.5, use_fbss=True):
    """IRS difference coordinates (wrapped, sorted) from a ULA subarray sweep."""
    D = Theta.shape[0]
    if D <= L_total:
        raise ValueError(f"D={D} must exceed the number of composite paths {L_total}")
    return _irs_coordinates(despread(Y, Theta), L_total, spacing, use_fbss)


def stack_groups(Z, selection, groups):
    """Stack the columns of ``Z`` belonging to each line in ``groups``."""
    return np.vstack([Z[:, selection.positions(g)] for g in groups])


def estimate_irs_angles_upa(Y, Theta, selection, L_total, spacing=0.5, use_fbss=True):
    """Separate ``u`` and ``v`` estimates from an L-shaped subarray sweep.

    The two coordinate sets are returned unassociated, each sorted.
    """
    n_y = len(selection.row_groups[0])
    n_z = len(selection.col_groups[0])
    if n_y <= L_total or n_z <= L_total:
        raise ValueError("subarray lines too short for the composite path count")
    Z = despread(Y, Theta)
    u_hat = _irs_coordinates(stack_groups(Z, selection, selection.row_groups), L_total,
                             spacing, use_fbss)
    v_hat = _irs_coordinates(stack_groups(Z, selection, selection.col_groups), L_total,
                             spacing, use_fbss)
    return u_hat, v_hat
