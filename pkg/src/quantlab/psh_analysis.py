"""Convexity and plurisubharmonicity certificates for invariant potentials.

A Weyl-invariant function on t extends to an invariant potential on the
whole phase space; its complex Hessian at a torus point is unitarily
equivalent to a hermitian endomorphism of the algebra whose spectrum splits
into the flat Hessian eigenvalues plus one value per root,

    alpha(mu(Y)) * (coth(alpha(Y)) + 1),

where mu is the equivariant gradient.  On a root hyperplane the quotient is
taken as a limit: the ratio alpha(mu)/alpha(Y) degenerates to a second
derivative of the potential across the wall.

Everything here is checked twice: a closed-form spectrum and an independent
finite-difference assembly of the hermitian matrix itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from quantlab import density_weights as dw
from quantlab.kahler_geom import BasePoint, complex_structure_J, dphi_matrix
from quantlab.lie_core import (
    AlgebraVec,
    GroupPoint,
    LieModel,
    adjoint_action,
    algebra_vec,
    bracket,
    exp_alg,
    weyl_group,
)
from quantlab.report import CheckReport

__all__ = [
    "InvariantPotential",
    "SpectrumReport",
    "make_potential",
    "load_potential_table",
    "mu_gradient",
    "theta_spectrum",
    "theta_matrix_oracle",
    "psh_verdict",
    "canonical_semi_negativity_certificate",
    "twist_positivity_certificate",
]


@dataclass(frozen=True, eq=False)
class InvariantPotential:
    """A Weyl-invariant potential on t with optional analytic derivatives."""

    name: str
    model: LieModel
    tilde: Callable[[np.ndarray], float]
    grad_fn: Callable[[np.ndarray], np.ndarray] | None = None
    hess_fn: Callable[[np.ndarray], np.ndarray] | None = None
    symmetry_checked: bool = False

    def value(self, t: np.ndarray) -> float:
        return float(self.tilde(np.asarray(t, float)))

    def grad(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, float)
        if self.grad_fn is not None:
            return np.asarray(self.grad_fn(t), float)
        h = 1e-6
        out = np.zeros_like(t)
        for k in range(t.size):
            e = np.zeros_like(t)
            e[k] = h
            out[k] = (self.value(t + e) - self.value(t - e)) / (2 * h)
        return out

    def hess(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, float)
        if self.hess_fn is not None:
            return np.asarray(self.hess_fn(t), float)
        h = 1e-4
        r = t.size
        out = np.zeros((r, r))
        for a in range(r):
            for b in range(r):
                ea = np.zeros(r)
                eb = np.zeros(r)
                ea[a] = h
                eb[b] = h
                if a == b:
                    out[a, a] = (
                        self.value(t + ea) - 2 * self.value(t)
                        + self.value(t - ea)
                    ) / h**2
                else:
                    out[a, b] = (
                        self.value(t + ea + eb) - self.value(t + ea - eb)
                        - self.value(t - ea + eb) + self.value(t - ea - eb)
                    ) / (4 * h**2)
        return 0.5 * (out + out.T)


@dataclass(frozen=True, eq=False)
class SpectrumReport:
    point: np.ndarray
    hessian_eigenvalues: np.ndarray
    root_eigenvalues: list[tuple[tuple[float, ...], float]]
    min_eigenvalue: float
    oracle_residual: float | None = None

    def all_values(self) -> np.ndarray:
        vals = list(self.hessian_eigenvalues)
        vals += [v for (_, v) in self.root_eigenvalues]
        return np.asarray(vals)


def _verify_symmetry(model: LieModel, tilde, seed: int = 99) -> bool:
    rng = np.random.default_rng(seed)
    ws = weyl_group(model)
    for _ in range(24):
        t = rng.standard_normal(model.rank) * 2.0
        base = tilde(t)
        for w in ws:
            if abs(tilde(w.matrix @ t) - base) > 1e-10:
                return False
    return True


def _coth_guarded(x: float) -> float:
    # coth(x) - 1/x with its removable singularity, plus the raw coth
    if abs(x) < 1e-4:
        return x / 3.0 - x**3 / 45.0
    return 1.0 / math.tanh(x) - 1.0 / x


def make_potential(model: LieModel, spec: str) -> InvariantPotential:
    """Built-in potentials by name: "square", "logeta", "combined:a,b"."""
    if spec == "square":
        return InvariantPotential(
            "square",
            model,
            tilde=lambda t: float(np.dot(t, t)),
            grad_fn=lambda t: 2.0 * t,
            hess_fn=lambda t: 2.0 * np.eye(t.size),
            symmetry_checked=True,
        )
    if spec == "logeta":
        def grad(t):
            out = np.zeros_like(t)
            for root in model.positive_roots():
                x = float(t @ root.covector)
                out += _coth_guarded(x) * root.covector
            return out

        def hess(t):
            r = t.size
            out = np.zeros((r, r))
            for root in model.positive_roots():
                x = float(t @ root.covector)
                if abs(x) < 1e-4:
                    second = 1.0 / 3.0 - x * x / 15.0
                else:
                    second = 1.0 / x**2 - 1.0 / math.sinh(x) ** 2
                out += second * np.outer(root.covector, root.covector)
            return out

        return InvariantPotential(
            "logeta",
            model,
            tilde=lambda t: float(dw.log_eta_tilde(model, t)),
            grad_fn=grad,
            hess_fn=hess,
            symmetry_checked=True,
        )
    if spec.startswith("combined:"):
        try:
            a_str, b_str = spec.split(":", 1)[1].split(",")
            a, b = float(a_str), float(b_str)
        except ValueError as exc:
            raise ValueError(
                f"combined potential wants 'combined:a,b', got {spec!r}"
            ) from exc
        sq = make_potential(model, "square")
        le = make_potential(model, "logeta")
        return InvariantPotential(
            spec,
            model,
            tilde=lambda t: a * sq.value(t) + b * le.value(t),
            grad_fn=lambda t: a * sq.grad(t) + b * le.grad(t),
            hess_fn=lambda t: a * sq.hess(t) + b * le.hess(t),
            symmetry_checked=True,
        )
    raise ValueError(f"unknown potential {spec!r}")


def load_potential_table(model: LieModel, path: str) -> InvariantPotential:
    """Custom rank-1 potential from a two-column table (t, value), cubic
    interpolation.  The table must cover a symmetric range; symmetry is
    verified on samples like any other potential."""
    from scipy.interpolate import CubicSpline

    data = np.loadtxt(path)
    if data.ndim != 2 or data.shape[1] != 2:
        raise ValueError("potential table must have two columns: t, value")
    if model.rank != 1:
        raise ValueError("tabulated potentials support rank-1 models only")
    order = np.argsort(data[:, 0])
    spline = CubicSpline(data[order, 0], data[order, 1])

    def tilde(t):
        return float(spline(float(t[0])))

    ok = _verify_symmetry(model, tilde)
    return InvariantPotential(
        f"table:{path}",
        model,
        tilde=tilde,
        grad_fn=lambda t: np.array([float(spline(float(t[0]), 1))]),
        hess_fn=lambda t: np.array([[float(spline(float(t[0]), 2))]]),
        symmetry_checked=ok,
    )


def _require_invariant(K: InvariantPotential) -> None:
    if not (K.symmetry_checked or _verify_symmetry(K.model, K.value)):
        raise ValueError(
            f"potential {K.name!r} is not Weyl-invariant on samples"
        )


def _flat_gradient(K: InvariantPotential, y_coords: np.ndarray) -> np.ndarray:
    """The equivariant gradient on the algebra, evaluated at Y.

    Torus models: the flat gradient in torus coordinates.  The rank-1
    non-abelian model: the radial extension grad(Y) = (K~'(r)/r) Y, whose
    limit at 0 is K~''(0) Y.
    """
    model = K.model
    if model.is_abelian:
        out = np.zeros(model.dim)
        tidx = list(model.torus_indices)
        out[tidx] = K.grad(y_coords[tidx])
        return out
    r = float(np.linalg.norm(y_coords))
    if r < 1e-9:
        return float(K.hess(np.zeros(model.rank))[0, 0]) * y_coords
    slope = float(K.grad(np.array([r]))[0]) / r
    return slope * y_coords


def mu_gradient(K: InvariantPotential, p: BasePoint) -> AlgebraVec:
    """The equivariant moment-style map: Ad_x applied to the invariant
    gradient of the potential at Y."""
    _require_invariant(K)
    model = K.model
    flat = _flat_gradient(K, p.Y.coords)
    return adjoint_action(p.x, AlgebraVec(model, flat))


def _torus_part_checked(Y: AlgebraVec) -> np.ndarray:
    model = Y.model
    tidx = list(model.torus_indices)
    off = np.delete(Y.coords, tidx)
    if off.size and np.abs(off).max() > 1e-12:
        raise ValueError("expected a point of t")
    return Y.coords[tidx]


def theta_spectrum(K: InvariantPotential, Y: AlgebraVec) -> SpectrumReport:
    """Closed-form spectrum of the hermitian curvature endomorphism at a
    torus point: Hessian eigenvalues plus one value per root.

    Within 1e-6 of a root hyperplane the root value switches to its limit
    form: the across-wall second derivative of the potential times
    (alpha(Y) coth(alpha(Y)) + alpha(Y)).
    """
    _require_invariant(K)
    model = K.model
    t = _torus_part_checked(Y)
    hess = K.hess(t)
    heigs = np.linalg.eigvalsh(hess)
    grad = K.grad(t)
    root_vals: list[tuple[tuple[float, ...], float]] = []
    for root in model.roots:
        a = root.covector
        ay = float(a @ t)
        amu = float(a @ grad)
        if abs(ay) < 1e-6:
            # limit form on the wall
            proj = t - (ay / float(a @ a)) * a
            ratio = float(a @ K.hess(proj) @ a) / float(a @ a)
        else:
            ratio = amu / ay
        if abs(ay) < 1e-4:
            factor = 1.0 + ay + ay * ay / 3.0
        else:
            factor = ay / math.tanh(ay) + ay
        root_vals.append((tuple(a), ratio * factor))
    all_vals = np.concatenate([heigs, [v for _, v in root_vals]]) if (
        root_vals
    ) else heigs
    return SpectrumReport(
        point=t.copy(),
        hessian_eigenvalues=heigs,
        root_eigenvalues=root_vals,
        min_eigenvalue=float(all_vals.min()),
    )


def _mu_coords(K: InvariantPotential, x_mat: np.ndarray,
               y_coords: np.ndarray) -> np.ndarray:
    model = K.model
    flat = _flat_gradient(K, y_coords)
    if model.is_abelian:
        return flat
    return adjoint_action(
        GroupPoint(model, x_mat), AlgebraVec(model, flat)
    ).coords


def theta_matrix_oracle(K: InvariantPotential, Y: AlgebraVec) -> np.ndarray:
    """Finite-difference assembly of the hermitian endomorphism whose
    spectrum theta_spectrum predicts.

    Column k: the covariant derivative of the equivariant gradient along
    the horizontal direction J(e_k, 0), minus i times the bracket with the
    gradient itself.  The covariant correction subtracts the connection
    reading of the direction; derivatives are central differences with one
    Richardson extrapolation step.
    """
    _require_invariant(K)
    model = Y.model
    n = model.dim
    _torus_part_checked(Y)
    jmat = complex_structure_J(Y)
    # (1 - cos ad Y)/ad Y is the upper-right block of the polar differential
    q_block = dphi_matrix(Y)[:n, n:]
    mu0 = _mu_coords(K, np.eye(model.defining_rep_dim, dtype=complex),
                     Y.coords)

    def mu_along(h1: np.ndarray, h2: np.ndarray, s: float) -> np.ndarray:
        x = exp_alg(AlgebraVec(model, s * h1))
        return _mu_coords(K, x.matrix, Y.coords + s * h2)

    def dmu(h1: np.ndarray, h2: np.ndarray, h: float) -> np.ndarray:
        d1 = (mu_along(h1, h2, h) - mu_along(h1, h2, -h)) / (2 * h)
        d2 = (mu_along(h1, h2, h / 2) - mu_along(h1, h2, -h / 2)) / h
        return (4.0 * d2 - d1) / 3.0

    out = np.zeros((n, n), dtype=complex)
    muvec = AlgebraVec(model, mu0)
    for k in range(n):
        unit = np.zeros(2 * n)
        unit[k] = 1.0
        hvec = jmat @ unit
        h1, h2 = hvec[:n], hvec[n:]
        deriv = dmu(h1, h2, 1e-5)
        conn = h1 - q_block @ h2
        covariant = deriv - bracket(
            AlgebraVec(model, conn), muvec
        ).coords
        ek = np.zeros(n)
        ek[k] = 1.0
        out[:, k] = covariant - 1j * bracket(muvec, AlgebraVec(model, ek)
                                             ).coords
    herm_defect = float(np.abs(out - out.conj().T).max())
    if herm_defect > 1e-8:
        raise ArithmeticError(
            f"assembled endomorphism is not hermitian: defect {herm_defect:g}"
        )
    return out


def _spectra_match(closed: np.ndarray, oracle: np.ndarray) -> float:
    a = np.sort(closed)
    b = np.sort(oracle)
    scale = max(1e-8, float(np.abs(a).max()), float(np.abs(b).max()))
    return float(np.abs(a - b).max() / scale)


def psh_verdict(
    K: InvariantPotential, grid: np.ndarray, margin: float = 0.0
) -> CheckReport:
    """Spectrum scan over a grid on t: the potential is accepted when every
    eigenvalue stays above -1e-8 + margin, and otherwise the worst witness
    point is reported."""
    _require_invariant(K)
    model = K.model
    grid = np.atleast_2d(np.asarray(grid, float))
    if grid.shape[1] != model.rank:
        grid = grid.reshape(-1, model.rank)
    worst_val = np.inf
    worst_point = None
    for t in grid:
        coords = np.zeros(model.dim)
        coords[list(model.torus_indices)] = t
        rep = theta_spectrum(K, AlgebraVec(model, coords))
        if rep.min_eigenvalue < worst_val:
            worst_val = rep.min_eigenvalue
            worst_point = t.copy()
    return CheckReport.from_error(
        f"psh.verdict.{K.name}",
        "an invariant potential is plurisubharmonic exactly when its flat "
        "Hessian and all root values alpha(mu)(coth(alpha)+1) are "
        "nonnegative over t",
        tolerance=1e-8,
        max_error=max(0.0, margin - worst_val),
        min_eigenvalue=float(worst_val),
        witness_point=list(worst_point) if worst_point is not None else None,
        grid_points=int(grid.shape[0]),
        margin=margin,
    )


def canonical_semi_negativity_certificate(
    model: LieModel, grid: np.ndarray | None = None
) -> CheckReport:
    """Convexity of the log-density over a grid: the curvature of the
    top-degree holomorphic form bundle is semi-negative iff this spectrum
    is nonnegative; tori give the identically flat case."""
    if grid is None:
        grid = np.linspace(-5.0, 5.0, 201).reshape(-1, 1)
        if model.rank > 1:
            grid = np.hstack([grid] + [0.3 * grid] * (model.rank - 1))
    K = make_potential(model, "logeta")
    inner = psh_verdict(K, grid)
    return CheckReport.from_error(
        "psh.canonical_semi_negativity",
        "log of the fiber density is convex on t (limit value 1/3 at the "
        "origin for each root), so the dual of the top-form bundle has "
        "nonnegative curvature spectrum",
        tolerance=inner.tolerance,
        max_error=inner.max_error,
        **inner.metadata,
    )


def twist_positivity_certificate(
    a: float, b: float, grid: np.ndarray | None = None,
    model: LieModel | None = None, margin: float = 1e-6
) -> CheckReport:
    """Strict positivity of the combined potential a|Y|^2 + b log(eta):
    the curvature form of the twisted bundle is positive when this
    spectrum clears a positive margin."""
    if a <= 0:
        raise ValueError("twist coefficient a must be positive")
    if model is None:
        from quantlab.lie_core import get_model

        model = get_model("su2")
    if grid is None:
        grid = np.linspace(-5.0, 5.0, 201).reshape(-1, 1)
        if model.rank > 1:
            grid = np.hstack([grid, 0.3 * grid])
    K = make_potential(model, f"combined:{a},{b}")
    inner = psh_verdict(K, grid, margin=margin)
    meta = dict(inner.metadata)
    meta.update({"a": a, "b": b})
    return CheckReport.from_error(
        "psh.twist_positivity",
        "the quadratic prequantum potential plus b times the log-density "
        "stays strictly convex in the curvature-spectrum sense",
        tolerance=1e-15,
        max_error=max(0.0, margin - meta["min_eigenvalue"]),
        **meta,
    )
