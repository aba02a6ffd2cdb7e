"""The standard Kahler structure on G x g, presented in the left-trivialized
frame.

Conventions, fixed once and used by every routine here:

* A point is a pair (x, Y) with x in the group and Y in the algebra; the
  polar map sends it to x * exp(iY) in the complexification.
* Tangent vectors are pairs (X1, X2) of algebra vectors in the
  left-trivialized frame; covectors are coefficient pairs (a, b) on the dual
  frame {alpha_k, dy_k}.
* The tautological 1-form is theta(X1, X2) = <Y, X1>; its exterior
  derivative is the symplectic form
      omega((X1,X2),(Z1,Z2)) = <X2,Z1> - <X1,Z2> - <Y,[X1,Z1]>.
* The polar-map differential acts blockwise through analytic functions of
  A = ad(Y); the complex structure is its pullback of the flat structure
  (X1, X2) -> (-X2, X1), and the metric is g(v, w) = omega(Jv, w).

Analytic functions of ad(Y) are evaluated by eigendecomposition of the
Hermitian matrix i ad(Y) with series fallbacks near zero eigenvalues, since
the block formulas have removable singularities there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from quantlab.lie_core import (
    AlgebraVec,
    GroupPoint,
    LieModel,
    algebra_vec,
    bracket,
    exp_alg,
)
from quantlab.report import CheckReport

__all__ = [
    "BasePoint",
    "TangentPair",
    "CovectorPair",
    "theta_form",
    "omega_matrix",
    "omega_batch",
    "omega_form",
    "dphi_matrix",
    "dphi_batch",
    "complex_structure_J",
    "complex_structure_batch",
    "metric_matrix",
    "metric_g",
    "df_coords",
    "dbar_function",
    "completeness_certificate",
]


@dataclass(frozen=True, eq=False)
class BasePoint:
    x: GroupPoint
    Y: AlgebraVec


@dataclass(frozen=True, eq=False)
class TangentPair:
    X1: AlgebraVec
    X2: AlgebraVec


@dataclass(frozen=True, eq=False)
class CovectorPair:
    """Coefficients on the left-invariant coframe: ``a`` against {alpha_k},
    ``b`` against {dy_k}.  Entries may be complex."""

    a: np.ndarray
    b: np.ndarray

    def stacked(self) -> np.ndarray:
        return np.concatenate([self.a, self.b])

    def pair(self, v: TangentPair) -> complex:
        return complex(
            np.dot(self.a, v.X1.coords) + np.dot(self.b, v.X2.coords)
        )


def theta_form(p: BasePoint, v: TangentPair) -> float:
    """The tautological 1-form: <Y, X1>, blind to x and to X2."""
    return float(np.dot(p.Y.coords, v.X1.coords))


def omega_matrix(model: LieModel, y_coords: np.ndarray) -> np.ndarray:
    """Matrix of omega in the frame {(e_k,0),(0,e_k)}: [[-B, -I], [I, 0]]
    with B[i,j] = <Y, [e_i, e_j]>."""
    n = model.dim
    b = np.einsum("ijk,k->ij", model.structure_constants,
                  np.asarray(y_coords, float))
    out = np.zeros((2 * n, 2 * n))
    out[:n, :n] = -b
    out[:n, n:] = -np.eye(n)
    out[n:, :n] = np.eye(n)
    return out


def omega_form(p: BasePoint, v: TangentPair, w: TangentPair) -> float:
    x1, x2 = v.X1.coords, v.X2.coords
    z1, z2 = w.X1.coords, w.X2.coords
    lie = bracket(v.X1, w.X1).coords
    return float(np.dot(x2, z1) - np.dot(x1, z2) - np.dot(p.Y.coords, lie))


# ---------------------------------------------------------------------------
# the polar-map differential and everything built on it


def _ad_eigensystem(model: LieModel, ys: np.ndarray):
    """Batched eigendecomposition of i ad(Y); ys has shape (N, n)."""
    c = model.structure_constants
    ad = np.einsum("mi,ijk->mkj", ys, c)
    lam, vec = np.linalg.eigh(1j * ad)
    return lam, vec


def omega_batch(model: LieModel, ys: np.ndarray) -> np.ndarray:
    """Batched omega Gram matrices; ys has shape (N, n)."""
    ys = np.atleast_2d(np.asarray(ys, float))
    n = model.dim
    out = np.zeros((ys.shape[0], 2 * n, 2 * n))
    out[:, :n, :n] = -np.einsum("ijk,mk->mij", model.structure_constants, ys)
    out[:, :n, n:] = -np.eye(n)
    out[:, n:, :n] = np.eye(n)
    return out


def _assemble(vec: np.ndarray, vals: np.ndarray) -> np.ndarray:
    """V diag(vals) V^* (batched), real part."""
    return np.einsum("mij,mj,mkj->mik", vec, vals, vec.conj()).real


def _block_values(lam: np.ndarray):
    """Eigenvalues of the four blocks as functions of the eigenvalues of
    i ad(Y).  ad(Y) itself has eigenvalue -i*lam, so the entire functions
    cos, (1-cos)/z, -sin, sin(z)/z are evaluated at z = -i*lam, turning
    them into cosh/sinh expressions of the real variable lam."""
    lam = np.asarray(lam, float)
    small = np.abs(lam) < 1e-6
    safe = np.where(small, 1.0, lam)
    cos_v = np.cosh(lam).astype(complex)
    ratio = np.where(small, -lam / 2.0 * (1.0 + lam**2 / 12.0),
                     (1.0 - np.cosh(lam)) / safe)
    onemcos_v = 1j * ratio
    msin_v = 1j * np.sinh(lam)
    sinc_v = np.where(small, 1.0 + lam**2 / 6.0, np.sinh(lam) / safe)
    return cos_v, onemcos_v, msin_v, sinc_v.astype(complex)


def dphi_batch(model: LieModel, ys: np.ndarray) -> np.ndarray:
    """Differentials of the polar map at (anything, Y), batched over Y.

    Returns (N, 2n, 2n) real matrices with block layout
    [[cos A, (1-cos A)/A], [-sin A, sin A / A]], A = ad(Y).
    """
    ys = np.atleast_2d(np.asarray(ys, float))
    n = model.dim
    lam, vec = _ad_eigensystem(model, ys)
    cos_v, onemcos_v, msin_v, sinc_v = _block_values(lam)
    out = np.empty((ys.shape[0], 2 * n, 2 * n))
    out[:, :n, :n] = _assemble(vec, cos_v)
    out[:, :n, n:] = _assemble(vec, onemcos_v)
    out[:, n:, :n] = _assemble(vec, msin_v)
    out[:, n:, n:] = _assemble(vec, sinc_v)
    return out


def dphi_matrix(Y: AlgebraVec) -> np.ndarray:
    return dphi_batch(Y.model, Y.coords[None, :])[0]


def _flat_J(n: int) -> np.ndarray:
    j = np.zeros((2 * n, 2 * n))
    j[:n, n:] = -np.eye(n)
    j[n:, :n] = np.eye(n)
    return j


def complex_structure_batch(model: LieModel, ys: np.ndarray) -> np.ndarray:
    """J = (TPhi)^{-1} J_flat (TPhi), batched over Y."""
    ys = np.atleast_2d(np.asarray(ys, float))
    dphi = dphi_batch(model, ys)
    je = _flat_J(model.dim)
    return np.linalg.solve(dphi, np.einsum("ij,mjk->mik", je, dphi))


def complex_structure_J(Y: AlgebraVec) -> np.ndarray:
    return complex_structure_batch(Y.model, Y.coords[None, :])[0]


def metric_matrix(model: LieModel, y_coords: np.ndarray) -> np.ndarray:
    """Gram matrix of g in the left-trivialized frame: J^T Omega."""
    j = complex_structure_batch(model, np.asarray(y_coords)[None, :])[0]
    return j.T @ omega_matrix(model, y_coords)


def metric_g(p: BasePoint, v: TangentPair, w: TangentPair) -> float:
    g = metric_matrix(p.Y.model, p.Y.coords)
    vv = np.concatenate([v.X1.coords, v.X2.coords])
    ww = np.concatenate([w.X1.coords, w.X2.coords])
    return float(vv @ g @ ww)


# ---------------------------------------------------------------------------
# differentials of scalar fields


def df_coords(
    f: Callable[[BasePoint], float], p: BasePoint, h: float = 1e-5
) -> np.ndarray:
    """Central-difference differential of f at p in the coframe
    {alpha_k, dy_k}: group directions move along x exp(s e_k), flat
    directions along Y + s e_k."""
    model = p.Y.model
    n = model.dim
    out = np.zeros(2 * n, dtype=complex)
    for k in range(n):
        step = np.zeros(n)
        step[k] = h
        xp = GroupPoint(model, p.x.matrix @ exp_alg(
            AlgebraVec(model, step)).matrix)
        xm = GroupPoint(model, p.x.matrix @ exp_alg(
            AlgebraVec(model, -step)).matrix)
        out[k] = (f(BasePoint(xp, p.Y)) - f(BasePoint(xm, p.Y))) / (2 * h)
        yp = AlgebraVec(model, p.Y.coords + step)
        ym = AlgebraVec(model, p.Y.coords - step)
        out[n + k] = (f(BasePoint(p.x, yp)) - f(BasePoint(p.x, ym))) / (2 * h)
    if np.abs(out.imag).max() < 1e-14:
        return out.real
    return out


def dbar_function(
    f: Callable[[BasePoint], float], p: BasePoint, h: float = 1e-5
) -> CovectorPair:
    """The (0,1)-part of df for real f: (df - i J df) / 2.

    J acts on covectors by (J alpha)(X) = -alpha(JX), i.e. by -J^T on
    coefficient vectors; the sign convention is pinned by the closed-form
    value (i pi Y, pi Y) that pi |Y|^2 must produce on the torus slice.
    """
    model = p.Y.model
    c = df_coords(f, p, h)
    j = complex_structure_batch(model, p.Y.coords[None, :])[0]
    coeffs = 0.5 * (c + 1j * (j.T @ c))
    n = model.dim
    return CovectorPair(coeffs[:n], coeffs[n:])


def completeness_certificate(
    model: LieModel, sample_count: int = 100_000, seed: int = 0
) -> CheckReport:
    """Bounded differential of f = log(1 + |Y|^2), the witness for geodesic
    completeness.

    Two routes to |df|^2_g at each sample: (i) raise the index with the
    metric Gram matrix and contract, (ii) the closed form
    4 |Y|^2 / (1 + |Y|^2)^2.  Both must agree to 1e-6 and stay below the
    global bound 4 (+1e-9 slack); the report folds any bound violation
    into max_error.
    """
    rng = np.random.default_rng(seed)
    n = model.dim
    ys = rng.standard_normal((sample_count, n)) * rng.uniform(
        0.1, 3.0, size=(sample_count, 1)
    )
    norms_sq = np.sum(ys**2, axis=1)
    # df = (0, 2 Y / (1 + |Y|^2)) in the {alpha_k, dy_k} coframe.
    cov = np.zeros((sample_count, 2 * n))
    cov[:, n:] = 2.0 * ys / (1.0 + norms_sq)[:, None]
    js = complex_structure_batch(model, ys)
    omegas = omega_batch(model, ys)
    grams = np.einsum("mji,mjk->mik", js, omegas)
    sharped = np.linalg.solve(grams, cov[:, :, None])[:, :, 0]
    via_metric = np.einsum("mi,mi->m", cov, sharped)
    closed = 4.0 * norms_sq / (1.0 + norms_sq) ** 2
    agreement = float(np.abs(via_metric - closed).max())
    sup_val = float(max(via_metric.max(), closed.max()))
    bound_excess = max(0.0, sup_val - 4.0 - 1e-9)
    return CheckReport.from_error(
        "kahler.completeness",
        "the squared metric norm of d log(1 + |Y|^2) equals "
        "4|Y|^2/(1+|Y|^2)^2 and never exceeds 4, so the metric is complete",
        tolerance=1e-6,
        max_error=max(agreement, bound_excess),
        samples=sample_count,
        sup_norm_sq=sup_val,
        agreement=agreement,
        seed=seed,
    )
