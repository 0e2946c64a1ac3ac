"""
Geometric subchannels and the cascaded IRS channel.

The TX->IRS link ``F`` (N x K) and IRS->RX link ``G`` (M x N) are sums of a
few far-field paths. The cascaded channel ``H = F^T ⋄ G`` (MK x N) maps the
IRS reflection vector to the vectorised effective channel, and admits the
low-dimensional factorisation

    H = (A_T^*(phi_T) ⊗ A_R(theta_R)) diag(gamma) A_I^H(psi)

with one composite atom per (F-path, G-path) pair.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import khatri_rao

from .geometry import (ArrayGeometry, ArrayKind, difference_response, irs_response,
                       response_matrix, upa_response_matrix)


@dataclass
class PathSet:
    """Path angles (as direction cosines) and complex gains of both links.

    For a planar IRS, ``theta_I`` and ``phi_I`` are ``(L, 2)`` arrays of
    ``(u, v)`` coordinates instead of cosine vectors.
    """

    theta_I: np.ndarray
    phi_T: np.ndarray
    gamma_F: np.ndarray
    theta_R: np.ndarray
    phi_I: np.ndarray
    gamma_G: np.ndarray

    def __post_init__(self):
        for name in ("phi_T", "theta_R"):
            a = getattr(self, name)
            if np.any(np.abs(a) > 1.0):
                raise ValueError(f"{name} cosines must lie in [-1, 1]")
        if len(self.theta_I) != len(self.phi_T) or len(self.gamma_F) != len(self.phi_T):
            raise ValueError("F-link angle and gain vectors differ in length")
        if len(self.phi_I) != len(self.theta_R) or len(self.gamma_G) != len(self.theta_R):
            raise ValueError("G-link angle and gain vectors differ in length")
        if self.L_F < 1 or self.L_G < 1:
            raise ValueError("each link needs at least one path")

    @property
    def L_F(self):
        return len(self.phi_T)

    @property
    def L_G(self):
        return len(self.theta_R)

    @property
    def planar(self):
        return np.ndim(self.theta_I) == 2


@dataclass
class CompositeParams:
    """Composite atoms of the cascade, flat index ``i * L_G + j``.

    ``psi`` holds IRS difference coordinates in ``[-2, 2]`` (ULA) or an
    ``(L, 2)`` array of ``(u, v)`` differences (UPA). ``gamma`` absorbs the
    deterministic link scalings so that the factorisation is exact.
    """

    psi: np.ndarray
    gamma: np.ndarray
    phi_T: np.ndarray
    theta_R: np.ndarray

    @property
    def planar(self):
        return np.ndim(self.psi) == 2


@dataclass
class ChannelRealization:
    F: np.ndarray
    G: np.ndarray
    paths: PathSet
    tx: ArrayGeometry
    irs: ArrayGeometry
    rx: ArrayGeometry

    @property
    def H(self):
        return cascaded_channel(self.F, self.G)

    def effective(self, omega):
        return effective_channel(self.F, self.G, omega)


def _uniform_cosines(rng, n, bounds_deg):
    lo, hi = np.deg2rad(bounds_deg[0]), np.deg2rad(bounds_deg[1])
    return np.cos(rng.uniform(lo, hi, n))


def _complex_normal(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def wrap_coordinate(x, spacing=0.5):
    """Fold a phase coordinate onto its unambiguous interval.

    With spacing ``d`` the steering phase ``2π d k x`` determines ``x`` only
    modulo ``1/d``; the representative is taken in ``[-1/(2d), 1/(2d))``.
    """
    period = 1.0 / spacing
    return np.mod(np.asarray(x, dtype=float) + period / 2, period) - period / 2


def circular_distance(a, b, spacing=0.5):
    return np.abs(wrap_coordinate(np.asarray(a) - np.asarray(b), spacing))


def _min_gap(values, spacing=None):
    values = np.asarray(values, dtype=float)
    if values.size < 2:
        return np.inf
    diff = values[:, None] - values[None, :]
    if spacing is not None:
        diff = wrap_coordinate(diff, spacing)
    diff = np.abs(diff)
    np.fill_diagonal(diff, np.inf)
    return diff.min()


def sample_paths(l_f, l_g, angle_bounds=(30.0, 150.0), rng=None, *, planar_irs=False,
                 azimuth_bounds=(-90.0, 90.0), elevation_bounds=(30.0, 150.0),
                 min_separation=0.0, spacing=0.5, max_draws=10_000):
    """Draw a random :class:`PathSet`.

    Angles are i.i.d. uniform in degrees and stored as cosines; gains are
    i.i.d. CN(0, 1). With ``min_separation > 0`` the draw is repeated until
    the RX cosines, the TX cosines and every IRS difference coordinate set
    (wrapped) are pairwise at least that far apart.
    """
    rng = np.random.default_rng(rng)
    for _ in range(max_draws):
        phi_T = _uniform_cosines(rng, l_f, angle_bounds)
        theta_R = _uniform_cosines(rng, l_g, angle_bounds)
        if planar_irs:
            def uv(n):
                az = np.deg2rad(rng.uniform(*azimuth_bounds, n))
                el = np.deg2rad(rng.uniform(*elevation_bounds, n))
                return np.column_stack([np.sin(az) * np.sin(el), np.cos(el)])
            theta_I, phi_I = uv(l_f), uv(l_g)
        else:
            theta_I = _uniform_cosines(rng, l_f, angle_bounds)
            phi_I = _uniform_cosines(rng, l_g, angle_bounds)
        gamma_F = _complex_normal(rng, l_f)
        gamma_G = _complex_normal(rng, l_g)
        paths = PathSet(theta_I, phi_T, gamma_F, theta_R, phi_I, gamma_G)
        if min_separation <= 0 or _separated(paths, min_separation, spacing):
            return paths
    raise RuntimeError(f"no path set with separation {min_separation} in {max_draws} draws")


def _separated(paths, sep, spacing):
    if _min_gap(paths.theta_R) < sep or _min_gap(paths.phi_T) < sep:
        return False
    psi = irs_differences(paths)
    if psi.ndim == 2:
        return all(_min_gap(psi[:, c], spacing) >= sep for c in range(2))
    return _min_gap(psi, spacing) >= sep


def _irs_matrix(coords, irs):
    if irs.kind == ArrayKind.UPA:
        coords = np.asarray(coords)
        return upa_response_matrix(coords[:, 0], coords[:, 1], irs.n_y, irs.n_z, irs.spacing)
    return response_matrix(coords, irs.n_elements, irs.spacing)


def subchannel_F(paths, tx, irs):
    """TX->IRS channel ``sqrt(KN/L_F) A_I(theta_I) Gamma_F A_T^H(phi_T)``."""
    K, N = tx.n_elements, irs.n_elements
    A_I = _irs_matrix(paths.theta_I, irs)
    A_T = response_matrix(paths.phi_T, K, tx.spacing)
    scale = np.sqrt(K * N / paths.L_F)
    return scale * (A_I * paths.gamma_F) @ A_T.conj().T


def subchannel_G(paths, irs, rx):
    """IRS->RX channel ``sqrt(NM/L_G) A_R(theta_R) Gamma_G A_I^H(phi_I)``."""
    N, M = irs.n_elements, rx.n_elements
    A_I = _irs_matrix(paths.phi_I, irs)
    A_R = response_matrix(paths.theta_R, M, rx.spacing)
    scale = np.sqrt(N * M / paths.L_G)
    return scale * (A_R * paths.gamma_G) @ A_I.conj().T


def realize_channel(paths, tx, irs, rx):
    return ChannelRealization(F=subchannel_F(paths, tx, irs), G=subchannel_G(paths, irs, rx),
                              paths=paths, tx=tx, irs=irs, rx=rx)


def effective_channel(F, G, omega):
    """``G diag(omega) F``; entries of ``omega`` are unit-modulus or zero."""
    return (G * np.asarray(omega)[None, :]) @ F


def cascaded_channel(F, G):
    """Khatri-Rao cascade ``F^T ⋄ G`` (MK x N), so vec(G diag(w) F) = H w."""
    if F.shape[0] != G.shape[1]:
        raise ValueError("F and G disagree on the number of IRS elements")
    return khatri_rao(F.T, G)


def vec(X):
    """Column-major vectorisation."""
    return np.asarray(X).reshape(-1, order="F")


def irs_differences(paths):
    """IRS difference coordinates ``cos(phi_I,j) - cos(theta_I,i)``, j fastest."""
    if paths.planar:
        th, ph = np.asarray(paths.theta_I), np.asarray(paths.phi_I)
        return (ph[None, :, :] - th[:, None, :]).reshape(-1, 2)
    return (np.asarray(paths.phi_I)[None, :] - np.asarray(paths.theta_I)[:, None]).ravel()


def composite_params(paths, tx, irs, rx):
    """Composite IRS coordinates and scaled gains of every (i, j) atom."""
    K, N, M = tx.n_elements, irs.n_elements, rx.n_elements
    scale = np.sqrt(K * N / paths.L_F) * np.sqrt(N * M / paths.L_G) / np.sqrt(N)
    gamma = scale * np.kron(paths.gamma_F, paths.gamma_G)
    return CompositeParams(psi=irs_differences(paths), gamma=gamma,
                           phi_T=np.asarray(paths.phi_T), theta_R=np.asarray(paths.theta_R))


def outer_response(phi_T, theta_R, tx, rx):
    """``A_T^*(phi_T) ⊗ A_R(theta_R)`` (MK x L_F L_G)."""
    A_T = response_matrix(phi_T, tx.n_elements, tx.spacing)
    A_R = response_matrix(theta_R, rx.n_elements, rx.spacing)
    return np.kron(A_T.conj(), A_R)


def parametric_cascade(phi_T, theta_R, composite, tx, irs, rx):
    """Rebuild ``H`` from outer cosines and composite atoms."""
    A_TR = outer_response(phi_T, theta_R, tx, rx)
    psi = np.asarray(composite.psi)
    if irs.kind == ArrayKind.UPA:
        A_I = irs_response(irs, (psi[:, 0], psi[:, 1]))
    else:
        A_I = difference_response(psi, irs.n_elements, irs.spacing)
    return (A_TR * composite.gamma[None, :]) @ A_I.conj().T


def add_awgn(signal, sigma, rng):
    """Add circularly-symmetric complex Gaussian noise of variance ``sigma**2``."""
    signal = np.asarray(signal)
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    if sigma == 0:
        return signal.astype(complex, copy=True)
    return signal + sigma * _complex_normal(rng, signal.shape)


def pnr_to_sigma(pnr_db):
    """Noise standard deviation for pilot-to-noise ratio ``10 log10(1/sigma^2)``."""
    return float(np.sqrt(10.0 ** (-pnr_db / 10.0)))
