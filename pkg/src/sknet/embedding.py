"""Spectral embedding and randomized truncated SVD / GSVD.

The spectral embedding finds the leading eigenpairs of the degree-
normalized adjacency N = D^{-1/2} A_g D^{-1/2} (A_g optionally carries a
rank-one regularization term) with a Lanczos iteration that is fully
reorthogonalized and explicitly deflated against the known trivial
eigenvector proportional to sqrt(degrees). Reported eigenvalues are the
normalized-Laplacian values 1 - mu, ascending, with the always-zero
trivial value omitted.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (ConvergenceError, DegenerateInputError, ParameterError)
from .sparse import CsrMatrix, Graph, RegularizedOperator


@dataclass
class SpectralParams:
    dim: int = 16
    gamma: float = 0.0
    max_lanczos_iters: int = None
    tol: float = 1e-6
    seed: int = 0

    def validated(self):
        if self.dim < 1:
            raise ParameterError("dim must be >= 1")
        if self.gamma < 0:
            raise ParameterError("gamma must be >= 0")
        if self.tol <= 0:
            raise ParameterError("tol must be > 0")
        return self


@dataclass
class EmbeddingMatrix:
    """Dense node coordinates plus the matching spectrum values."""

    coords: np.ndarray
    spectrum: np.ndarray


def _sign_fix(vec):
    """Flip so the largest-magnitude entry is positive (first on ties)."""
    i = int(np.argmax(np.abs(vec)))
    return -vec if vec[i] < 0 else vec


def _lanczos_deflated(apply_n, n, n_pairs, deflate, rng, tol, max_iters):
    """Top eigenpairs of a symmetric operator restricted to deflate^perp.

    Full reorthogonalization against both the deflation vector and the
    whole Krylov basis; exact breakdowns restart with a fresh random
    direction, which recovers eigenvalue multiplicities. Returns
    (eigenvalues desc, vectors, residual estimates).
    """
    max_dim = n - 1  # dimension of the deflated subspace
    if max_iters is None:
        # small problems tridiagonalize fully (exact); large ones rely on
        # Lanczos convergence of the extremal pairs
        max_iters = max_dim if n <= 600 else max(4 * n_pairs + 40, 300)
    max_iters = min(max_iters, max_dim)
    basis = np.zeros((max_iters, n))
    alphas = []
    betas = []  # beta[j] couples v_j and v_{j+1}; 0 marks a restart

    def fresh_vector(j):
        for _ in range(20):
            v = rng.standard_normal(n)
            v -= deflate * (deflate @ v)
            if j:
                v -= basis[:j].T @ (basis[:j] @ v)
            norm = np.linalg.norm(v)
            if norm > 1e-8:
                return v / norm
        return None

    v = fresh_vector(0)
    j = 0
    ritz = None
    while j < max_iters:
        basis[j] = v
        w = apply_n(v)
        alpha = float(v @ w)
        alphas.append(alpha)
        w -= deflate * (deflate @ w)
        w -= basis[: j + 1].T @ (basis[: j + 1] @ w)
        w -= basis[: j + 1].T @ (basis[: j + 1] @ w)
        beta = float(np.linalg.norm(w))
        j += 1
        if j == max_iters:
            betas.append(0.0)
            break
        if beta < 1e-10:
            betas.append(0.0)
            v = fresh_vector(j)
            if v is None:
                break
        else:
            betas.append(beta)
            v = w / beta
        if j >= n_pairs and (j % 10 == 0 or beta < 1e-10):
            ritz = _ritz_pairs(alphas, betas, j)
            if np.all(ritz[2][:n_pairs] <= 0.1 * tol):
                break
    k = len(alphas)
    ritz = _ritz_pairs(alphas, betas, k)
    vals, coeffs, resid = ritz
    take = min(n_pairs, k)
    vectors = basis[:k].T @ coeffs[:, :take]
    return vals[:take], vectors, resid[:take]


def _ritz_pairs(alphas, betas, k):
    t = np.diag(np.asarray(alphas[:k]))
    off = np.asarray(betas[: k - 1])
    t += np.diag(off, 1) + np.diag(off, -1)
    vals, vecs = np.linalg.eigh(t)
    order = np.argsort(vals)[::-1]  # descending
    vals = vals[order]
    vecs = vecs[:, order]
    tail_beta = betas[k - 1] if len(betas) >= k else 0.0
    resid = np.abs(tail_beta * vecs[-1, :])
    return vals, vecs, resid


def spectral_embedding(g: Graph, params: SpectralParams = None) -> EmbeddingMatrix:
    """Coordinates from the leading nontrivial normalized eigenvectors.

    ``spectrum`` holds the corresponding 1 - mu values ascending; with
    gamma = 0 a graph with c components yields c - 1 zeros here (the
    deflated trivial pair accounts for the remaining one).
    """
    params = (params or SpectralParams()).validated()
    work = g.undirected()
    adj = work.adjacency
    n = work.n
    if n < 2:
        raise ParameterError("spectral embedding needs at least two nodes")
    if params.dim > n - 1:
        raise ParameterError(f"dim must be <= n - 1 = {n - 1}")
    if adj.total() == 0:
        raise DegenerateInputError("graph has no edges")
    degree = adj.degrees("rows") + params.gamma
    if degree.min() <= 0:
        raise DegenerateInputError(
            "isolated nodes make the normalized adjacency undefined; "
            "set gamma > 0 to regularize")
    inv_sqrt_d = 1.0 / np.sqrt(degree)
    op = RegularizedOperator(adj, params.gamma)

    def apply_n(x):
        return inv_sqrt_d * op.matvec(inv_sqrt_d * x)

    trivial = np.sqrt(degree)
    trivial /= np.linalg.norm(trivial)
    rng = np.random.default_rng(params.seed)
    mu, vectors, _ = _lanczos_deflated(apply_n, n, params.dim, trivial, rng,
                                       params.tol, params.max_lanczos_iters)
    if mu.shape[0] < params.dim:
        raise ConvergenceError(
            f"found only {mu.shape[0]} of {params.dim} eigenpairs")
    residuals = np.array([np.linalg.norm(apply_n(vectors[:, t]) - mu[t] * vectors[:, t])
                          for t in range(params.dim)])
    if np.any(residuals > params.tol):
        raise ConvergenceError(
            "eigenpair residuals above tolerance "
            f"(max {residuals.max():.3e} > {params.tol:.1e}); "
            "raise max_lanczos_iters", residuals=residuals)
    coords = inv_sqrt_d[:, None] * vectors
    norms = np.linalg.norm(coords, axis=0)
    coords = coords / np.where(norms > 0, norms, 1.0)
    for t in range(coords.shape[1]):
        coords[:, t] = _sign_fix(coords[:, t])
    spectrum = 1.0 - mu
    return EmbeddingMatrix(coords=coords, spectrum=spectrum)


def _matmat(m, x):
    return np.column_stack([m.matvec(x[:, j]) for j in range(x.shape[1])])


def truncated_svd(m: CsrMatrix, k: int, seed: int = 0, rtol: float = 1e-9,
                  max_rounds: int = 200):
    """Randomized truncated SVD: oversampling 10, power iterations.

    Runs at least two power iterations and keeps iterating until every
    returned triplet satisfies ||M v_i - s_i u_i|| <= rtol * s_1 (flat
    spectra need the extra rounds). Returns (U, S, V), S descending.
    """
    small = min(m.n_rows, m.n_cols)
    if not 1 <= k <= small:
        raise ParameterError(f"k must lie in [1, {small}]")
    rng = np.random.default_rng(seed)
    ell = min(k + 10, small)
    mt = m.transpose()
    omega = rng.standard_normal((m.n_cols, ell))
    q, _ = np.linalg.qr(_matmat(m, omega))
    residuals = None
    for round_no in range(1, max_rounds + 1):
        z, _ = np.linalg.qr(_matmat(mt, q))
        q, _ = np.linalg.qr(_matmat(m, z))
        if round_no < 2:
            continue
        b = _matmat(mt, q).T  # = Q^T M
        ub, s, vt = np.linalg.svd(b, full_matrices=False)
        u = q @ ub[:, :k]
        v = vt[:k].T
        s = s[:k]
        residuals = np.linalg.norm(_matmat(m, v) - u * s, axis=0)
        if s[0] == 0 or residuals.max() <= rtol * s[0]:
            break
    else:
        raise ConvergenceError(
            f"singular triplets did not reach rtol={rtol:.1e} within "
            f"{max_rounds} power iterations", residuals=residuals)
    for i in range(k):
        j = int(np.argmax(np.abs(u[:, i])))
        if u[j, i] < 0:
            u[:, i] = -u[:, i]
            v[:, i] = -v[:, i]
    return u, s, v


def gsvd(b: CsrMatrix, k: int, seed: int = 0):
    """SVD of the degree-normalized matrix, embeddings rescaled back.

    Computes the truncated SVD of D_r^{-1/2} B D_c^{-1/2} and returns
    (D_r^{-1/2} U, S, D_c^{-1/2} V).
    """
    dr = b.degrees("rows")
    dc = b.degrees("cols")
    for name, d in (("row", dr), ("column", dc)):
        zero = np.flatnonzero(d == 0)
        if zero.size:
            raise DegenerateInputError(
                f"zero {name} {int(zero[0])} makes the normalization "
                "undefined")
    rows = np.repeat(np.arange(b.n_rows), np.diff(b.indptr))
    scaled = CsrMatrix(
        b.n_rows, b.n_cols, b.indptr, b.indices,
        b.data / np.sqrt(dr[rows] * dc[b.indices]), validate=False)
    u, s, v = truncated_svd(scaled, k, seed)
    return u / np.sqrt(dr)[:, None], s, v / np.sqrt(dc)[:, None]
