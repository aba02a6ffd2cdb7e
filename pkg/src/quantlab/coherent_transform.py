"""Truncated harmonic-analysis transform onto holomorphic coefficients.

The workbench expands functions on the compact group in the orthonormal
matrix-coefficient basis b^j_ab = sqrt(dim_j) pi_j(x)_ab.  The coherent
transform convolves with an entire kernel built from per-irrep weights

    sigma(pi) = (1/dim) INT |pi(e^{iY})^{-1}|_HS^2 e^{-2 pi |Y|^2} dY,

and on each irrep block it acts as the scalar sigma^{-1/2}.  Unitarity onto
the Gaussian-weighted holomorphic space is not assumed: the certificates
here recompute the Gram matrices by quadrature over group x algebra and
compare against the flat L2 Gram.

Irrep labels: integer tuples for torus models, half-integers for the rank-1
non-abelian model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import logsumexp

from quantlab.density_weights import eta_tilde
from quantlab.lie_core import GroupPoint, LieModel, get_model, unitary_log
from quantlab.quadrature import (
    QuadratureRule,
    gaussian_rule,
    radial_rule,
    su2_haar_rule,
    torus_rule,
)
from quantlab.report import CheckReport

__all__ = [
    "Irrep",
    "PeterWeylVector",
    "SigmaTable",
    "irrep",
    "irrep_labels",
    "sigma",
    "build_sigma_table",
    "phi_kernel",
    "transform_C_phi",
    "group_action",
    "unitarity_certificate",
    "equivariance_certificate",
    "character_gram",
    "spin_weighted_gram",
]

DEFAULT_CUTOFF = {"abelian": 8, "su2": 2.0}


@dataclass(frozen=True, eq=False)
class Irrep:
    """An irreducible representation with holomorphic extension data."""

    model: LieModel
    label: object
    dim: int
    generator_images: np.ndarray

    def character(self, mat: np.ndarray) -> complex:
        """Trace of the representation at a (possibly complexified)
        defining-representation point."""
        if self.model.is_abelian:
            diag = np.diagonal(np.asarray(mat, complex))
            out = 1.0 + 0.0j
            for t, n in zip(diag, self.label):
                out *= t**n
            return complex(out)
        return complex(_su2_character(np.asarray(mat, complex)[None],
                                      self.label)[0])

    def rep_unitary(self, g: GroupPoint) -> np.ndarray:
        """pi(g) for a unitary group point, via the exponentiated log."""
        x = unitary_log(g)
        skew = np.einsum("k,kab->ab", x.coords, self.generator_images)
        h = -1j * skew
        lam, vec = np.linalg.eigh(h)
        return (vec * np.exp(1j * lam)) @ vec.conj().T

    def weight_diag(self) -> np.ndarray:
        """Torus weights m in basis order: the diagonal of the hermitian
        operator i * pi(torus generator), which the spin construction keeps
        diagonal."""
        h = 1j * self.generator_images[self.model.torus_indices[0]]
        return np.real(np.diagonal(h)).copy()


def _su2_character(mats: np.ndarray, j: float) -> np.ndarray:
    # sum of z^{2m} over m = -j..j with z an eigenvalue of the 2x2 point;
    # the |z| >= 1 branch keeps complexified powers stable
    tr = np.trace(mats, axis1=-2, axis2=-1)
    half = tr / 2.0
    root = np.sqrt(half * half - 1.0 + 0j)
    z1, z2 = half + root, half - root
    z = np.where(np.abs(z1) >= np.abs(z2), z1, z2)
    out = np.zeros_like(z)
    for k in range(int(round(2 * j)) + 1):
        out = out + z ** (2 * (k - j))
    return out


def _su2_spin_matrices(j: float) -> np.ndarray:
    d = int(round(2 * j + 1))
    m = j - np.arange(d)
    jz = np.diag(m)
    jp = np.zeros((d, d))
    for i in range(1, d):
        mm = m[i]
        jp[i - 1, i] = math.sqrt(j * (j + 1) - mm * (mm + 1))
    jm = jp.T
    jx = (jp + jm) / 2.0
    jy = (jp - jm) / 2.0j
    return np.stack([-1j * jx, -1j * jy, -1j * jz])


def _normalize_label(model: LieModel, label) -> object:
    if model.is_abelian:
        if isinstance(label, (int, np.integer)):
            if model.rank != 1:
                raise ValueError("higher-rank torus labels must be tuples")
            return (int(label),)
        if not hasattr(label, "__len__") or len(label) != model.rank:
            raise ValueError("abelian irrep labels are rank-length int tuples")
        out = []
        for n in label:
            if float(n) != int(n):
                raise ValueError("torus mode labels must be integers")
            out.append(int(n))
        return tuple(out)
    jj = float(label)
    if round(2 * jj) != 2 * jj or jj < 0:
        raise ValueError("spin labels are nonnegative half-integers")
    return jj


@lru_cache(maxsize=None)
def _irrep_cached(model_name: str, label) -> Irrep:
    model = get_model(model_name)
    if model.is_abelian:
        gens = np.zeros((model.dim, 1, 1), dtype=complex)
        for k, n in enumerate(label):
            gens[k, 0, 0] = 1j * n
        out = Irrep(model, label, 1, gens)
    else:
        gens = _su2_spin_matrices(label)
        out = Irrep(model, label, gens.shape[1], gens)
    _validate_irrep(out)
    return out


def irrep(model: LieModel, label) -> Irrep:
    return _irrep_cached(model.name, _normalize_label(model, label))


def _validate_irrep(ir: Irrep) -> None:
    g = ir.generator_images
    skew = np.abs(g + np.transpose(g.conj(), (0, 2, 1))).max()
    if skew > 1e-10:
        raise ValueError("generator images must be skew-hermitian")
    c = ir.model.structure_constants
    comm = np.einsum("iab,jbc->ijac", g, g)
    comm = comm - np.transpose(comm, (1, 0, 2, 3))
    target = np.einsum("ijk,kab->ijab", c, g)
    if np.abs(comm - target).max() > 1e-10:
        raise ValueError("generator images violate the bracket table")
    ident = np.eye(ir.model.defining_rep_dim)
    if abs(ir.character(ident) - ir.dim) > 1e-10:
        raise ValueError("character at the identity must equal the dimension")


def irrep_labels(model: LieModel, cutoff) -> list:
    """All labels up to the cutoff: |n_k| <= cutoff componentwise for torus
    models, j in {0, 1/2, ..., cutoff} for the non-abelian model."""
    if model.is_abelian:
        n = int(cutoff)
        ranges = [range(-n, n + 1)] * model.rank
        out: list = []

        def rec(prefix, rest):
            if not rest:
                out.append(tuple(prefix))
                return
            for v in rest[0]:
                rec(prefix + [v], rest[1:])

        rec([], ranges)
        return out
    steps = int(round(2 * float(cutoff)))
    return [k / 2.0 for k in range(steps + 1)]


def _label_within(model: LieModel, label, cutoff) -> bool:
    if model.is_abelian:
        return max(abs(n) for n in label) <= int(cutoff)
    return float(label) <= float(cutoff) + 1e-12


@dataclass(frozen=True, eq=False)
class PeterWeylVector:
    """Finite coefficient vector in the orthonormal matrix-coefficient
    basis; keys are (label, row, column)."""

    model: LieModel
    cutoff: object
    coeffs: dict

    def __post_init__(self) -> None:
        for (label, a, b) in self.coeffs:
            norm = _normalize_label(self.model, label)
            if norm != label:
                raise ValueError(f"unnormalized label {label!r}")
            if not _label_within(self.model, label, self.cutoff):
                raise ValueError(f"label {label!r} exceeds cutoff")
            d = irrep(self.model, label).dim
            if not (0 <= a < d and 0 <= b < d):
                raise ValueError("matrix index outside the irrep block")

    @property
    def norm_sq(self) -> float:
        return float(sum(abs(v) ** 2 for v in self.coeffs.values()))

    def block(self, label) -> np.ndarray:
        d = irrep(self.model, label).dim
        out = np.zeros((d, d), dtype=complex)
        for (lab, a, b), v in self.coeffs.items():
            if lab == label:
                out[a, b] = v
        return out


@dataclass(frozen=True, eq=False)
class SigmaTable:
    model: LieModel
    cutoff: object
    values: dict
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        for label, v in self.values.items():
            if not (np.isfinite(v) and v > 0):
                raise ValueError(f"sigma({label!r}) must be positive finite")

    def __getitem__(self, label) -> float:
        return self.values[label]


def sigma(ir: Irrep, level: int = 3) -> float:
    """Quadrature value of the per-irrep Gaussian weight.

    Torus models integrate e^{2 n.y} against the Gaussian with the
    Gauss-Hermite product rule.  The rank-1 non-abelian model reduces by
    unitary invariance to the radial rule with the Hilbert-Schmidt norm
    summed in log-space over the weights of the representation.
    """
    model = ir.model
    if model.is_abelian:
        rule = gaussian_rule(model.rank, level)
        n = np.asarray(ir.label, float)
        vals = np.exp(2.0 * rule.nodes @ n)
        return float(rule.weights @ vals)
    j = float(ir.label)
    rule = radial_rule(level, tilt=2.0 * j)
    r = rule.nodes[:, 0]
    m = ir.weight_diag()
    hs = np.exp(logsumexp(2.0 * np.outer(r, m), axis=1))
    return float(rule.weights @ hs) / ir.dim


def build_sigma_table(model: LieModel, cutoff=None, level: int = 3) -> SigmaTable:
    """SigmaTable over all labels within the cutoff, with a doubling error
    estimate per label."""
    if cutoff is None:
        cutoff = DEFAULT_CUTOFF["abelian" if model.is_abelian else "su2"]
    values = {}
    errors = {}
    for label in irrep_labels(model, cutoff):
        ir = irrep(model, label)
        v = sigma(ir, level)
        v2 = sigma(ir, level + 1)
        values[label] = v
        errors[str(label)] = abs(v - v2)
    meta = {
        "rule": "gauss-hermite" if model.is_abelian else "radial-legendre",
        "level": level,
        "max_error_estimate": max(errors.values()),
        "error_estimates": errors,
    }
    return SigmaTable(model, cutoff, values, meta)


def phi_kernel(tmat: np.ndarray, table: SigmaTable) -> complex:
    """Truncated entire kernel: sum over irreps of dim / sqrt(sigma) times
    the character of the inverse point."""
    model = table.model
    tinv = np.linalg.inv(np.asarray(tmat, complex))
    out = 0.0 + 0.0j
    for label, s in table.values.items():
        ir = irrep(model, label)
        out += ir.dim / math.sqrt(s) * ir.character(tinv)
    return complex(out)


def transform_C_phi(f: PeterWeylVector, table: SigmaTable) -> PeterWeylVector:
    """Blockwise scalar action: each irrep coefficient is scaled by
    sigma^{-1/2}; the output lives in the holomorphically extended basis."""
    out = {}
    for (label, a, b), v in f.coeffs.items():
        if label not in table.values:
            raise ValueError(f"label {label!r} missing from the sigma table")
        out[(label, a, b)] = v / math.sqrt(table.values[label])
    return PeterWeylVector(f.model, f.cutoff, out)


def group_action(f: PeterWeylVector, h1: GroupPoint,
                 h2: GroupPoint) -> PeterWeylVector:
    """The two-sided action (h1, h2) . f (x) = f(h1^{-1} x h2) expressed on
    coefficient blocks: C -> conj(pi(h1)) C pi(h2)^T."""
    out = {}
    labels = {lab for (lab, _, _) in f.coeffs}
    for label in labels:
        ir = irrep(f.model, label)
        c = f.block(label)
        u1 = ir.rep_unitary(h1)
        u2 = ir.rep_unitary(h2)
        cnew = u1.conj() @ c @ u2.T
        d = ir.dim
        for a in range(d):
            for b in range(d):
                if cnew[a, b] != 0:
                    out[(label, a, b)] = out.get((label, a, b), 0) + cnew[a, b]
    return PeterWeylVector(f.model, f.cutoff, out)


def _stack_unitary_reps(ir: Irrep, rule: QuadratureRule) -> np.ndarray:
    mats = np.empty((rule.nodes.shape[0], ir.dim, ir.dim), dtype=complex)
    for i, g in enumerate(rule.nodes):
        mats[i] = ir.rep_unitary(GroupPoint(ir.model, g))
    return mats


def _gram_blocks(model: LieModel, labels, level: int):
    """Quadrature Gram of the orthonormal basis over group x algebra.

    Returns (hl2_blocks, l2_blocks): dicts keyed by label pairs.  The
    product measure Haar x Gaussian factorizes the double sum, so the Haar
    tensor A and the Gaussian tensor B are contracted per block pair; for
    the non-abelian model the Gaussian integral runs in polar form with the
    direction average done by a second Haar rule.
    """
    irs = {lab: irrep(model, lab) for lab in labels}
    if model.is_abelian:
        n_cut = max(max(abs(c) for c in lab) for lab in labels)
        g_rule = torus_rule(model.rank, 2 * int(n_cut))
        y_rule = gaussian_rule(model.rank, level)
        hl2 = {}
        l2 = {}
        for la in labels:
            for lb in labels:
                na = np.asarray(la, float)
                nb = np.asarray(lb, float)
                a_fac = np.sum(
                    g_rule.weights
                    * np.exp(1j * g_rule.nodes @ (na - nb))
                )
                b_fac = np.sum(
                    y_rule.weights * np.exp(-y_rule.nodes @ (na + nb))
                )
                hl2[(la, lb)] = np.array([[a_fac * b_fac]])
                l2[(la, lb)] = np.array([[a_fac]])
        return hl2, l2
    level_g = max(1, int(math.ceil(2 * max(float(l) for l in labels))))
    g_rule = su2_haar_rule(level_g)
    max_tilt = 4.0 * max(float(l) for l in labels)
    r_rule = radial_rule(level, tilt=max_tilt)
    r = r_rule.nodes[:, 0]
    ustack = {lab: _stack_unitary_reps(irs[lab], g_rule) for lab in labels}
    estack = {}
    for lab in labels:
        m = irs[lab].weight_diag()
        dvals = np.exp(np.outer(r, m))
        estack[lab] = np.einsum(
            "uab,rb,ucb->urac", ustack[lab], dvals, ustack[lab].conj()
        )
    hl2 = {}
    l2 = {}
    for la in labels:
        for lb in labels:
            da, db = irs[la].dim, irs[lb].dim
            scale = math.sqrt(da * db)
            a_t = np.einsum(
                "g,gap,gcq->apcq", g_rule.weights, ustack[la],
                ustack[lb].conj()
            )
            b_t = np.einsum(
                "u,r,urpb,urqd->pbqd", g_rule.weights, r_rule.weights,
                estack[la], estack[lb].conj()
            )
            hl2[(la, lb)] = scale * np.einsum(
                "apcq,pbqd->abcd", a_t, b_t
            ).reshape(da * da, db * db)
            l2[(la, lb)] = scale * a_t.reshape(da * da, db * db)
    return hl2, l2


def _assemble_big(blocks, labels, dims) -> np.ndarray:
    sizes = [dims[lab] ** 2 for lab in labels]
    offs = np.concatenate([[0], np.cumsum(sizes)])
    big = np.zeros((offs[-1], offs[-1]), dtype=complex)
    for i, la in enumerate(labels):
        for k, lb in enumerate(labels):
            big[offs[i]:offs[i + 1], offs[k]:offs[k + 1]] = blocks[(la, lb)]
    return big


def unitarity_certificate(model: LieModel, cutoff=None,
                          level: int = 3) -> CheckReport:
    """Gram of the transformed basis in the Gaussian-weighted holomorphic
    inner product versus the flat Gram of the source basis.

    Exactness of the Haar-side rule makes the flat Gram the identity, so
    the reported deviation is dominated by the Gaussian-side quadrature and
    by the sigma values themselves.
    """
    if cutoff is None:
        cutoff = DEFAULT_CUTOFF["abelian" if model.is_abelian else "su2"]
    labels = irrep_labels(model, cutoff)
    dims = {lab: irrep(model, lab).dim for lab in labels}
    table = build_sigma_table(model, cutoff, level)
    hl2, l2 = _gram_blocks(model, labels, level)
    scaled = {}
    for la in labels:
        for lb in labels:
            s = 1.0 / math.sqrt(table[la] * table[lb])
            scaled[(la, lb)] = s * hl2[(la, lb)]
    big_c = _assemble_big(scaled, labels, dims)
    big_l2 = _assemble_big(l2, labels, dims)
    leakage = 0.0
    for la in labels:
        for lb in labels:
            if la != lb:
                leakage = max(leakage, float(np.abs(scaled[(la, lb)]).max()))
    tol = 1e-6 if model.is_abelian else 1e-4
    max_err = float(np.abs(big_c - big_l2).max())
    return CheckReport.from_error(
        f"transform.unitarity.{model.name}",
        "the sigma^{-1/2}-scaled matrix-coefficient basis has the same Gram "
        "in the Gaussian-weighted holomorphic inner product as the source "
        "basis has on the group",
        tolerance=tol,
        max_error=max_err,
        cutoff=cutoff,
        basis_size=int(big_c.shape[0]),
        block_leakage=leakage,
        quadrature_level=level,
        sigma_error_estimate=table.metadata["max_error_estimate"],
    )


def equivariance_certificate(model: LieModel, cutoff=None, samples: int = 20,
                             seed: int = 0) -> CheckReport:
    """Two-sided translations commute with the transform, and the Weyl flip
    commutes with the torus-restricted transform."""
    from quantlab.lie_core import random_group_point

    if cutoff is None:
        cutoff = DEFAULT_CUTOFF["abelian" if model.is_abelian else "su2"]
    rng = np.random.default_rng(seed)
    table = build_sigma_table(model, cutoff)
    labels = irrep_labels(model, cutoff)
    worst = 0.0
    for _ in range(samples):
        coeffs = {}
        for lab in labels:
            d = irrep(model, lab).dim
            block = rng.standard_normal((d, d)) + 1j * rng.standard_normal(
                (d, d))
            for a in range(d):
                for b in range(d):
                    coeffs[(lab, a, b)] = block[a, b]
        f = PeterWeylVector(model, cutoff, coeffs)
        h1 = random_group_point(model, rng)
        h2 = random_group_point(model, rng)
        left = transform_C_phi(group_action(f, h1, h2), table)
        right = group_action(transform_C_phi(f, table), h1, h2)
        keys = set(left.coeffs) | set(right.coeffs)
        worst = max(
            worst,
            max(
                abs(left.coeffs.get(k, 0) - right.coeffs.get(k, 0))
                for k in keys
            ),
        )
    # torus restriction: the Weyl flip m -> -m commutes with the diagonal
    # sigma^T scaling because sigma^T is even in the mode
    weyl_res = 0.0
    if not model.is_abelian:
        modes = np.arange(-2 * float(cutoff), 2 * float(cutoff) + 1) / 2.0
        sig_t = np.exp(modes**2 / (2.0 * math.pi)) / math.sqrt(2.0)
        c = rng.standard_normal(modes.size) + 1j * rng.standard_normal(
            modes.size)
        flipped_then = (c / np.sqrt(sig_t))[::-1]
        then_flipped = c[::-1] / np.sqrt(sig_t[::-1])
        weyl_res = float(np.abs(flipped_then - then_flipped).max())
    return CheckReport.from_error(
        f"transform.equivariance.{model.name}",
        "the transform scales each irrep block by a scalar, so two-sided "
        "translations and the Weyl flip pass through it",
        tolerance=1e-8,
        max_error=max(worst, weyl_res),
        samples=samples,
        weyl_residual=weyl_res,
        cutoff=cutoff,
    )


def character_gram(model: LieModel, labels, level: int = 4,
                   eta_weight: bool = False) -> np.ndarray:
    """Quadrature Gram of the holomorphically extended characters in the
    Gaussian-weighted inner product over group x algebra, optionally with
    the fiber density as an extra radial weight.

    Class invariance lets the algebra integral run in polar form with a
    fixed direction: the group average is exact for the spins involved, so
    the direction dependence integrates away.
    """
    labels = list(labels)
    nlab = len(labels)
    if model.is_abelian:
        n_cut = max(max(abs(c) for c in lab) for lab in labels)
        g_rule = torus_rule(model.rank, 2 * int(n_cut))
        y_rule = gaussian_rule(model.rank, level)
        gram = np.zeros((nlab, nlab), dtype=complex)
        for i, la in enumerate(labels):
            for k, lb in enumerate(labels):
                na = np.asarray(la, float)
                nb = np.asarray(lb, float)
                a_fac = np.sum(g_rule.weights
                               * np.exp(1j * g_rule.nodes @ (na - nb)))
                b_fac = np.sum(y_rule.weights
                               * np.exp(-y_rule.nodes @ (na + nb)))
                gram[i, k] = a_fac * b_fac
        return gram
    level_g = max(1, int(math.ceil(2 * max(float(l) for l in labels))))
    g_rule = su2_haar_rule(level_g)
    r_rule = radial_rule(level, tilt=4.0 * max(float(l) for l in labels))
    r = r_rule.nodes[:, 0]
    half = np.exp(r / 2.0)
    chi = np.empty((nlab, g_rule.nodes.shape[0], r.size), dtype=complex)
    g00 = g_rule.nodes[:, 0, 0]
    g11 = g_rule.nodes[:, 1, 1]
    tr = np.outer(g00, half) + np.outer(g11, 1.0 / half)
    rootv = np.sqrt(tr * tr / 4.0 - 1.0 + 0j)
    z1, z2 = tr / 2.0 + rootv, tr / 2.0 - rootv
    z = np.where(np.abs(z1) >= np.abs(z2), z1, z2)
    for i, lab in enumerate(labels):
        j = float(lab)
        acc = np.zeros_like(z)
        for kk in range(int(round(2 * j)) + 1):
            acc = acc + z ** (2 * (kk - j))
        chi[i] = acc
    wr = r_rule.weights
    if eta_weight:
        wr = wr * np.atleast_1d(
            np.asarray(eta_tilde(model, r.reshape(-1, 1)), float)
        )
    return np.einsum("g,r,agr,bgr->ab", g_rule.weights, wr, chi, chi.conj())


def spin_weighted_gram(model: LieModel, cutoff=None,
                       level: int = 4) -> CheckReport:
    """Gram of the holomorphic characters under the fiber-density-weighted
    Gaussian measure, reported next to the unweighted one.

    For torus models the density is 1 and the two Grams coincide.
    """
    if cutoff is None:
        cutoff = DEFAULT_CUTOFF["abelian" if model.is_abelian else "su2"]
    labels = irrep_labels(model, cutoff)
    gram = character_gram(model, labels, level, eta_weight=False)
    if model.is_abelian:
        gram_eta = gram.copy()
    else:
        gram_eta = character_gram(model, labels, level, eta_weight=True)
    diag = np.real(np.diagonal(gram_eta))
    off_eta = float(np.abs(gram_eta - np.diag(np.diagonal(gram_eta))).max())
    off_eps = float(np.abs(gram - np.diag(np.diagonal(gram))).max())
    positivity = 0.0 if np.all(diag > 0) and np.all(np.isfinite(diag)) else 1.0
    return CheckReport.from_error(
        f"transform.spin_gram.{model.name}",
        "holomorphic characters stay orthogonal under the fiber-density "
        "weight, with positive finite norms",
        tolerance=1e-6,
        max_error=max(off_eta, off_eps, positivity),
        labels=[str(l) for l in labels],
        eta_diagonal=[float(v) for v in diag],
        flat_diagonal=[float(v) for v in np.real(np.diagonal(gram))],
        off_diagonal_eta=off_eta,
        off_diagonal_flat=off_eps,
    )
