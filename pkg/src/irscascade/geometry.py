"""
Array geometry
==============

Steering vectors and array-response matrices for uniform linear (ULA) and
uniform planar (UPA) arrays, plus bookkeeping for the L-shaped subarray that
is switched on at a planar IRS during IRS-angle training.

Angles are carried as direction cosines (ULA) or ``(u, v)`` pairs (UPA).
Element spacing is given in wavelengths.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np


class ArrayKind(str, Enum):
    ULA = "ula"
    UPA = "upa"


@dataclass(frozen=True)
class ArrayGeometry:
    """Element layout of one array (TX, RX or IRS).

    For a UPA, element ``p * n_z + q`` sits at grid position ``(p, q)`` with
    ``p`` along y and ``q`` along z, so the response is ``a_y(u) ⊗ a_z(v)``.
    """

    kind: ArrayKind
    n_elements: int
    n_y: int = 1
    n_z: int = 1
    spacing: float = 0.5

    def __post_init__(self):
        if self.n_elements < 1:
            raise ValueError("n_elements must be positive")
        if self.spacing <= 0:
            raise ValueError("spacing must be positive")
        if self.kind == ArrayKind.UPA and self.n_y * self.n_z != self.n_elements:
            raise ValueError("UPA requires n_y * n_z == n_elements")

    @classmethod
    def ula(cls, n, spacing=0.5):
        return cls(ArrayKind.ULA, int(n), n_y=int(n), n_z=1, spacing=spacing)

    @classmethod
    def upa(cls, n_y, n_z, spacing=0.5):
        return cls(ArrayKind.UPA, int(n_y) * int(n_z), n_y=int(n_y), n_z=int(n_z),
                   spacing=spacing)


@dataclass
class SubarraySelection:
    """Active elements of a subarray and the ULAs contained in it.

    ``row_groups`` hold the parent indices of each switched-on line parallel
    to y (``n_y`` elements each); ``col_groups`` those of each line parallel
    to z (``n_z`` elements each). Both are ordered along the line.
    """

    active_indices: list[int]
    row_groups: list[list[int]] = field(default_factory=list)
    col_groups: list[list[int]] = field(default_factory=list)

    @property
    def D(self):
        return len(self.active_indices)

    def positions(self, group):
        """Map parent indices in ``group`` to column positions in the active set."""
        lookup = {idx: pos for pos, idx in enumerate(self.active_indices)}
        return [lookup[i] for i in group]


def _phase_ramp(cosine, n, spacing):
    return np.exp(2j * np.pi * spacing * np.arange(n) * cosine) / np.sqrt(n)


def ula_steering(cosine, n, spacing=0.5):
    """Unit-norm ULA response ``exp(j 2π d k c) / sqrt(n)``, ``k = 0..n-1``."""
    cosine = float(cosine)
    if abs(cosine) > 1.0:
        raise ValueError(f"direction cosine {cosine} outside [-1, 1]")
    if n < 1:
        raise ValueError("n must be >= 1")
    return _phase_ramp(cosine, n, spacing)


def upa_steering(u, v, n_y, n_z, spacing=0.5):
    """UPA response ``a_y(u) ⊗ a_z(v)``.

    ``u`` and ``v`` may be difference coordinates, so both range over
    ``[-2, 2]``.
    """
    if abs(u) > 2.0 or abs(v) > 2.0:
        raise ValueError("(u, v) must lie in [-2, 2]")
    return np.kron(_phase_ramp(u, n_y, spacing), _phase_ramp(v, n_z, spacing))


def response_matrix(cosines, n, spacing=0.5):
    """Stack ULA steering vectors column-wise into an ``n x L`` matrix."""
    cosines = np.atleast_1d(np.asarray(cosines, dtype=float))
    if np.any(np.abs(cosines) > 1.0):
        raise ValueError("direction cosines must lie in [-1, 1]")
    k = np.arange(n)[:, None]
    return np.exp(2j * np.pi * spacing * k * cosines[None, :]) / np.sqrt(n)


def difference_response(coords, n, spacing=0.5):
    """ULA response matrix for difference coordinates in ``[-2, 2]``.

    Used for the IRS, where the phase progression is set by the difference
    of two direction cosines.
    """
    coords = np.atleast_1d(np.asarray(coords, dtype=float))
    k = np.arange(n)[:, None]
    return np.exp(2j * np.pi * spacing * k * coords[None, :]) / np.sqrt(n)


def upa_response_matrix(u, v, n_y, n_z, spacing=0.5):
    """Columns ``a_y(u_l) ⊗ a_z(v_l)`` for paired coordinate vectors."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    v = np.atleast_1d(np.asarray(v, dtype=float))
    if u.shape != v.shape:
        raise ValueError("u and v must have the same length")
    ay = difference_response(u, n_y, spacing)
    az = difference_response(v, n_z, spacing)
    return (ay[:, None, :] * az[None, :, :]).reshape(n_y * n_z, len(u))


def irs_response(geom, coords, spacing=None):
    """IRS response over all elements of ``geom``.

    ``coords`` is a vector of difference coordinates (ULA) or a pair
    ``(u, v)`` of vectors (UPA).
    """
    d = geom.spacing if spacing is None else spacing
    if geom.kind == ArrayKind.UPA:
        u, v = coords
        return upa_response_matrix(u, v, geom.n_y, geom.n_z, d)
    return difference_response(coords, geom.n_elements, d)


def l_shaped_selection(n_y, n_z, j_y, j_z):
    """Corner-anchored L-shaped subarray of an ``n_y x n_z`` UPA.

    Keeps the first ``j_y`` lines parallel to y (fixed z index ``q < j_y``)
    and the first ``j_z`` lines parallel to z (fixed y index ``p < j_z``).
    The overlap is counted once, giving
    ``D = j_y*n_y + j_z*n_z - j_y*j_z`` active elements.
    """
    if not (1 <= j_y <= n_z):
        raise ValueError(f"j_y={j_y} must lie in [1, n_z={n_z}]")
    if not (1 <= j_z <= n_y):
        raise ValueError(f"j_z={j_z} must lie in [1, n_y={n_y}]")

    def idx(p, q):
        return p * n_z + q

    row_groups = [[idx(p, q) for p in range(n_y)] for q in range(j_y)]
    col_groups = [[idx(p, q) for q in range(n_z)] for p in range(j_z)]
    active = sorted({i for g in row_groups + col_groups for i in g})
    return SubarraySelection(active_indices=active, row_groups=row_groups,
                             col_groups=col_groups)


def leading_selection(n, D):
    """First ``D`` elements of a ULA, treated as one contiguous line."""
    if not (1 <= D <= n):
        raise ValueError(f"D={D} must lie in [1, {n}]")
    active = list(range(D))
    return SubarraySelection(active_indices=active, row_groups=[active])
