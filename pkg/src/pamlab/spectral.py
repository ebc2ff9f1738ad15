"""Dirichlet eigenproblem for kappa*Laplacian + V on boxes, and the boxed
solution through its spectral expansion.

The grid is cell-centered, so the wall at +-r lies half a cell beyond the
outermost centers; the mirror ghost convention (ghost = -edge value) places
the homogeneous Dirichlet condition exactly at the wall and keeps the
operator symmetric.  Eigenfunctions are L2-orthonormal with the h^(d/2)
weight and extend by zero outside Q_r.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.linalg import eigh_tridiagonal
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from .errors import EigensolveFailure, TruncationDominates
from .fields import Field
from .noise import RescaledNoiseParams, rescale_noise


def _second_difference_1d(n: int, h: float) -> sparse.csr_matrix:
    """1-D Laplacian, Dirichlet wall at the box edge (mirror ghost: diag -3)."""
    main = np.full(n, -2.0)
    main[0] = main[-1] = -3.0
    off = np.ones(n - 1)
    return sparse.diags([off, main, off], [-1, 0, 1], format="csr") / h**2


def dirichlet_operator(V: Field, kappa: float) -> sparse.csr_matrix:
    """Sparse symmetric matrix of kappa*Laplacian + V on the field's grid."""
    n, d, h = V.points_per_dim, V.dimension, V.h
    lap1 = _second_difference_1d(n, h)
    eye = sparse.identity(n, format="csr")
    lap = None
    for ax in range(d):
        term = None
        for j in range(d):
            blk = lap1 if j == ax else eye
            term = blk if term is None else sparse.kron(term, blk, format="csr")
        lap = term if lap is None else lap + term
    A = kappa * lap + sparse.diags(V.values.ravel())
    return A.tocsr()


@dataclass
class SpectralDecomposition:
    """Top Dirichlet eigenpairs of kappa*Laplacian + V on Q_r, decreasing."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # shape (k, n^d), L2-orthonormal with weight h^d
    box_radius: float
    grid_shape: tuple
    kappa: float

    @property
    def k(self) -> int:
        return len(self.eigenvalues)

    def eigenfunction(self, i: int) -> Field:
        return Field(self.box_radius, self.eigenvectors[i].reshape(self.grid_shape))

    def export(self, directory, stem="spectrum"):
        import os

        os.makedirs(directory, exist_ok=True)
        with open(os.path.join(directory, f"{stem}_eigenvalues.csv"), "w", newline="\n") as fh:
            fh.write("index,eigenvalue\n")
            for i, lam in enumerate(self.eigenvalues):
                fh.write(f"{i + 1},{lam!r}\n")
        for i in range(self.k):
            self.eigenfunction(i).save(os.path.join(directory, f"{stem}_mode{i + 1}.field"))


def dirichlet_eigens(V: Field, kappa: float, k: int) -> SpectralDecomposition:
    """Top-k eigenpairs of the finite-difference kappa*Laplacian + V.

    d=1 uses the dense tridiagonal solver (exact, cheap); d>=2 uses ARPACK
    in shift-invert mode above the spectrum's top.
    """
    n, d, h = V.points_per_dim, V.dimension, V.h
    size = n**d
    if not 1 <= k <= size - 1:
        raise ValueError("need 1 <= k <= n^d - 1")
    if d == 1:
        main = np.full(n, -2.0)
        main[0] = main[-1] = -3.0
        diag = kappa * main / h**2 + V.values
        off = np.full(n - 1, kappa / h**2)
        lams, vecs = eigh_tridiagonal(diag, off, select="i", select_range=(n - k, n - 1))
        order = np.argsort(lams)[::-1]
        lams, vecs = lams[order], vecs[:, order]
    else:
        A = dirichlet_operator(V, kappa)
        shift = float(V.values.max()) + 1.0
        try:
            lams, vecs = eigsh(A, k=k, sigma=shift, which="LM", mode="normal")
        except (ArpackNoConvergence, RuntimeError):
            try:
                lams, vecs = eigsh(A, k=k, which="LA", maxiter=5000 * k)
            except ArpackNoConvergence as exc:
                raise EigensolveFailure(str(exc)) from exc
        order = np.argsort(lams)[::-1]
        lams, vecs = lams[order], vecs[:, order]
    # L2 normalization with the grid weight
    vecs = vecs.T / h ** (d / 2)
    return SpectralDecomposition(
        eigenvalues=np.asarray(lams, dtype=float),
        eigenvectors=np.ascontiguousarray(vecs),
        box_radius=V.box_radius,
        grid_shape=V.values.shape,
        kappa=kappa,
    )


def spectral_solution(dec: SpectralDecomposition, t: float) -> Field:
    """Boxed solution at time t: sum_k e^(t lam_k) (e_k, 1) e_k, from flat 1.

    The reported truncation bound is e^(t lam_k_last) * ||remaining mass of
    the initial condition||; TruncationDominates if it exceeds 1% of the
    result norm.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    d = len(dec.grid_shape)
    h = 2.0 * dec.box_radius / dec.grid_shape[0]
    hd = h**d
    ones_coeff = hd * dec.eigenvectors.sum(axis=1)  # (e_k, 1)
    weights = np.exp(t * dec.eigenvalues) * ones_coeff
    vals = (weights[:, np.newaxis] * dec.eigenvectors).sum(axis=0)
    mass_total = (2.0 * dec.box_radius) ** d  # ||1||_2^2 on Q_r
    rem2 = max(mass_total - float(np.sum(ones_coeff**2)), 0.0)
    bound = np.exp(t * dec.eigenvalues[-1]) * np.sqrt(rem2)
    out = Field(dec.box_radius, vals.reshape(dec.grid_shape))
    norm = out.l2_norm()
    if dec.k < np.prod(dec.grid_shape) and bound > 0.01 * max(norm, 1e-300):
        raise TruncationDominates(
            f"truncation bound {bound:.3e} exceeds 1% of the solution norm {norm:.3e}"
        )
    return out


def default_mode_count(dec_size: int, t: float, lam1: float = 0.0) -> int:
    """k selection rule: 64 modes or until e^(t(lam_k - lam_1)) < 1e-12."""
    return min(64, dec_size - 1)


def eigen_rescaling_check(
    xi_eps: Field,
    params: RescaledNoiseParams,
    R: float,
    kappa: float,
    points_per_dim: int | None = None,
) -> tuple[float, float]:
    """Both sides of the leading-eigenvalue rescaling identity, same draw.

    Returns (p t lam_1 of kappa*Lap + xi on Q_{R alpha},
             H + beta lam_1 of kappa*Lap + Xi on Q_R)
    computed on matched grids; the caller asserts closeness.
    """
    alpha, pt = params.alpha, params.p * params.t
    beta = pt / alpha**2
    n = points_per_dim or xi_eps.points_per_dim
    d = xi_eps.dimension

    # left side: the raw field restricted to Q_{R alpha}
    from .fields import grid_centers

    r_small = R * alpha
    if r_small > xi_eps.box_radius + 1e-12:
        raise ValueError("R*alpha exceeds the sampled box")
    c = grid_centers(r_small, n)
    mesh = np.meshgrid(*([c] * d), indexing="ij")
    pts = np.stack(mesh, axis=-1)
    V_small = Field(r_small, xi_eps.interp(pts))
    lam_left = dirichlet_eigens(V_small, kappa, 1).eigenvalues[0]

    # right side: the rescaled field on Q_R
    Xi = rescale_noise(xi_eps, params, box_radius=R, points_per_dim=n)
    lam_right = dirichlet_eigens(Xi, kappa, 1).eigenvalues[0]
    return pt * lam_left, params.H + beta * lam_right
