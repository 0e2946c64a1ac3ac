"""
Nuclear-norm regularised matrix completion by greedy rank expansion.

Solves

    min_{U,V} 1/2 ||P_Ω(U V^H) - Y||_F^2 + mu/2 (||U||_F^2 + ||V||_F^2)

by growing the factors one rank-one atom at a time (the atom is the top
singular pair of the current residual) and polishing at fixed rank with
alternating ridge least squares.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class CompletionProblem:
    rows: np.ndarray
    cols: np.ndarray
    values: np.ndarray
    dims: tuple[int, int]
    mu: float = 0.0
    max_rank: int = 1
    tol: float = 1e-8
    max_outer: int = 50
    max_inner: int = 500

    def __post_init__(self):
        self.rows = np.asarray(self.rows, dtype=int)
        self.cols = np.asarray(self.cols, dtype=int)
        self.values = np.asarray(self.values, dtype=complex)
        if self.mu < 0:
            raise ValueError("mu must be non-negative")
        if self.max_rank < 1:
            raise ValueError("max_rank must be >= 1")
        m, k = self.dims
        if self.rows.size and (self.rows.min() < 0 or self.rows.max() >= m
                               or self.cols.min() < 0 or self.cols.max() >= k):
            raise ValueError("sampling pattern outside the matrix")

    def observed_matrix(self):
        Y = np.zeros(self.dims, dtype=complex)
        Y[self.rows, self.cols] = self.values
        return Y

    def mask(self):
        mask = np.zeros(self.dims, dtype=bool)
        mask[self.rows, self.cols] = True
        return mask


@dataclass
class CompletionResult:
    U: np.ndarray
    V: np.ndarray
    rank_found: int
    objective_trace: list[float] = field(default_factory=list)
    inner_trace: list[float] = field(default_factory=list)
    converged: bool = True

    @property
    def estimate(self):
        return self.U @ self.V.conj().T


def objective(U, V, Y, mask, mu):
    R = np.where(mask, U @ V.conj().T - Y, 0)
    return 0.5 * np.vdot(R, R).real + 0.5 * mu * (np.vdot(U, U).real + np.vdot(V, V).real)


def top_singular_pair(A, iters=100, tol=1e-10):
    """Dominant singular triplet of ``A`` by power iteration on ``A A^H``."""
    norms = np.linalg.norm(A, axis=0)
    if not np.any(norms):
        return 0.0, np.zeros(A.shape[0], complex), np.zeros(A.shape[1], complex)
    v = np.zeros(A.shape[1], complex)
    v[np.argmax(norms)] = 1.0
    sigma = 0.0
    for _ in range(iters):
        u = A @ v
        nu = np.linalg.norm(u)
        if nu == 0:
            break
        u /= nu
        v = A.conj().T @ u
        new_sigma = np.linalg.norm(v)
        v /= new_sigma
        if abs(new_sigma - sigma) <= tol * new_sigma:
            sigma = new_sigma
            break
        sigma = new_sigma
    u = A @ v
    sigma = np.linalg.norm(u)
    return sigma, u / sigma, v


def _ridge_rows(Y, mask, B, mu):
    """Row-wise minimiser of 1/2||P_Ω(X B^H) - Y||^2 + mu/2||X||^2 over X."""
    r = B.shape[1]
    gram = np.einsum("mk,kr,ks->mrs", mask.astype(float), B, B.conj())
    gram = gram + mu * np.eye(r)[None]
    rhs = np.where(mask, Y, 0) @ B
    # pinv gives the minimum-norm minimiser when a row has too few samples
    return np.einsum("mrs,ms->mr", np.linalg.pinv(gram, hermitian=True), rhs)


def gcg_altmin(problem):
    """Greedy rank expansion with alternating least-squares refinement.

    Stops when the residual's top singular value falls to ``mu`` or below,
    or when ``max_rank`` atoms are in place.
    """
    if problem.values.size == 0:
        raise ValueError("no observed entries")
    Y = problem.observed_matrix()
    mask = problem.mask()
    mu = problem.mu
    m, k = problem.dims
    U = np.zeros((m, 0), complex)
    V = np.zeros((k, 0), complex)
    f = objective(U, V, Y, mask, mu)
    trace, inner_trace = [f], [f]
    scale = max(0.5 * np.vdot(Y, Y).real, np.finfo(float).tiny)
    converged = True

    for _ in range(problem.max_outer):
        R = np.where(mask, Y - U @ V.conj().T, 0)
        sigma, u, v = top_singular_pair(R)
        if sigma <= mu or U.shape[1] >= problem.max_rank or f <= 1e-28 * scale:
            break
        # exact line search along the new atom
        a = np.where(mask, np.outer(u, v.conj()), 0)
        a2 = np.vdot(a, a).real
        if (sigma - mu) ** 2 / (2 * a2) <= problem.tol * f:
            break
        t = (sigma - mu) / a2
        U = np.hstack([U, np.sqrt(t) * u[:, None]])
        V = np.hstack([V, np.sqrt(t) * v[:, None]])
        f = objective(U, V, Y, mask, mu)
        inner_trace.append(f)

        for _ in range(problem.max_inner):
            U = _ridge_rows(Y, mask, V, mu)
            V = _ridge_rows(Y.conj().T, mask.T, U, mu)
            f_new = objective(U, V, Y, mask, mu)
            inner_trace.append(f_new)
            done = f - f_new <= problem.tol * f or f_new <= 1e-28 * scale
            f = f_new
            if done:
                break
        else:
            converged = False
        trace.append(f)
    else:
        converged = False

    return CompletionResult(U=U, V=V, rank_found=U.shape[1], objective_trace=trace,
                            inner_trace=inner_trace, converged=converged)


def recover_H0(result, X_R, X_T):
    """Undo the feature transform: ``(X_R^H)^{-1} U V^H X_T^{-1}``."""
    C = result.estimate
    return np.linalg.solve(X_R.conj().T, C) @ np.linalg.inv(X_T)
