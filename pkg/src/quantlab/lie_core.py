"""Desk-scale models of compact connected Lie groups.

The package works with three built-in models, selectable by name:

* ``"u1"``  - the circle, angles mod 2*pi.
* ``"t2"``  - the 2-torus.
* ``"su2"`` - SU(2) with basis e_j = -(i/2) sigma_j in the defining
  representation and inner product <X, Y> = -2 trace(XY).  This makes
  {e_1, e_2, e_3} orthonormal, [e_1, e_2] = e_3 cyclically, picks
  t = span{e_3}, and normalizes the positive root so that alpha(y e_3) = y.

All numeric examples and tolerances in the test suite are pinned to this
normalization.  Everything downstream (densities, transforms, reduction)
consumes a LieModel and stays model-generic where it can.

Types are immutable after construction and safe to share across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg

__all__ = [
    "LieModel",
    "RealRoot",
    "WeylElement",
    "AlgebraVec",
    "GroupPoint",
    "get_model",
    "load_model_file",
    "bracket",
    "adjoint_action",
    "exp_alg",
    "weyl_group",
    "weyl_determinant",
    "algebra_vec",
    "alg_to_matrix",
    "coords_from_matrix",
    "ad_matrix",
    "torus_point",
    "unitary_log",
    "random_algebra",
    "random_group_point",
    "validate_model",
]


@dataclass(frozen=True, eq=False)
class RealRoot:
    """A real root: a linear functional on t given by coefficients on the
    orthonormal torus basis, so ``alpha(Y) = dot(covector, Y_t-part)``."""

    covector: np.ndarray

    def value(self, torus_coords: np.ndarray) -> float:
        return float(np.dot(self.covector, torus_coords))


@dataclass(frozen=True, eq=False)
class WeylElement:
    """One Weyl-group element, as an orthogonal matrix acting on t."""

    matrix: np.ndarray
    word: str


@dataclass(frozen=True, eq=False)
class LieModel:
    """A compact group at desk scale.

    Fields
    ------
    name : str
    dim : int
        Dimension n of the Lie algebra.
    structure_constants : (n, n, n) array
        c[i, j, k] with [e_i, e_j] = sum_k c[i, j, k] e_k.
    inner : (n, n) array
        Gram matrix of the Ad-invariant inner product; the identity in the
        orthonormal basis used throughout.
    torus_indices : tuple of int
        0-based indices of the basis vectors spanning t.
    torus_periods : tuple of float
        Period of each torus coordinate: exp(period * e_k) = identity.
    roots : tuple of RealRoot
        The full real root set (closed under negation); empty for tori.
    defining_rep_dim : int
        Matrix size of the faithful defining representation.
    generators : tuple of arrays
        Defining-representation images of the basis {e_k}.
    """

    name: str
    dim: int
    structure_constants: np.ndarray
    inner: np.ndarray
    torus_indices: tuple[int, ...]
    torus_periods: tuple[float, ...]
    roots: tuple[RealRoot, ...]
    defining_rep_dim: int
    generators: tuple[np.ndarray, ...]
    _coord_proj: np.ndarray = field(repr=False, default=None)

    @property
    def rank(self) -> int:
        return len(self.torus_indices)

    @property
    def is_abelian(self) -> bool:
        return not np.any(self.structure_constants)

    def positive_roots(self) -> list[RealRoot]:
        """Roots whose first nonzero coefficient is positive."""
        out = []
        for root in self.roots:
            nz = root.covector[np.nonzero(root.covector)[0]]
            if nz.size and nz[0] > 0:
                out.append(root)
        return out

    def torus_part(self, coords: np.ndarray) -> np.ndarray:
        return np.asarray(coords)[list(self.torus_indices)]


@dataclass(frozen=True, eq=False)
class AlgebraVec:
    """An algebra element by its coordinates in the orthonormal basis."""

    model: LieModel
    coords: np.ndarray

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.coords))


@dataclass(frozen=True, eq=False)
class GroupPoint:
    """A group (or complexified-group) point in the defining representation.

    Unitary matrices are honest group points; merely invertible matrices
    represent points of the complexification and are accepted wherever the
    operation makes sense there.
    """

    model: LieModel
    matrix: np.ndarray

    @property
    def is_unitary(self) -> bool:
        m = self.matrix
        return bool(
            np.allclose(m @ m.conj().T, np.eye(m.shape[0]), atol=1e-10)
        )


def algebra_vec(model: LieModel, coords: Sequence[float]) -> AlgebraVec:
    arr = np.asarray(coords, dtype=float)
    if arr.shape != (model.dim,):
        raise ValueError(
            f"expected {model.dim} coordinates for model {model.name!r}, "
            f"got shape {arr.shape}"
        )
    return AlgebraVec(model, arr)


# ---------------------------------------------------------------------------
# built-in models


def _su2_generators() -> tuple[np.ndarray, ...]:
    s1 = np.array([[0, 1], [1, 0]], dtype=complex)
    s2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
    s3 = np.array([[1, 0], [0, -1]], dtype=complex)
    return tuple(-0.5j * s for s in (s1, s2, s3))


def _coord_projector(generators: Sequence[np.ndarray]) -> np.ndarray:
    cols = np.stack([g.reshape(-1) for g in generators], axis=1)
    return np.linalg.pinv(cols)


def _finish(model: LieModel) -> LieModel:
    object.__setattr__(model, "_coord_proj", _coord_projector(model.generators))
    validate_model(model)
    return model


def _build_torus(name: str, rank: int) -> LieModel:
    gens = []
    for k in range(rank):
        g = np.zeros((rank, rank), dtype=complex)
        g[k, k] = 1j
        gens.append(g)
    return _finish(
        LieModel(
            name=name,
            dim=rank,
            structure_constants=np.zeros((rank, rank, rank)),
            inner=np.eye(rank),
            torus_indices=tuple(range(rank)),
            torus_periods=(2.0 * math.pi,) * rank,
            roots=(),
            defining_rep_dim=rank,
            generators=tuple(gens),
        )
    )


def _build_su2() -> LieModel:
    c = np.zeros((3, 3, 3))
    for i, j, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        c[i, j, k] = 1.0
        c[j, i, k] = -1.0
    gens = _su2_generators()
    # With this basis, t = exp(tau e_3) = diag(e^{-i tau/2}, e^{i tau/2}):
    # the torus coordinate has period 4*pi, and exp(2*pi e_3) = -identity.
    return _finish(
        LieModel(
            name="su2",
            dim=3,
            structure_constants=c,
            inner=np.eye(3),
            torus_indices=(2,),
            torus_periods=(4.0 * math.pi,),
            roots=(RealRoot(np.array([1.0])), RealRoot(np.array([-1.0]))),
            defining_rep_dim=2,
            generators=gens,
        )
    )


_MODELS = {}


def get_model(name: str) -> LieModel:
    """Return a built-in model by name: "u1", "t2", or "su2"."""
    if name not in _MODELS:
        if name == "u1":
            _MODELS[name] = _build_torus("u1", 1)
        elif name == "t2":
            _MODELS[name] = _build_torus("t2", 2)
        elif name == "su2":
            _MODELS[name] = _build_su2()
        else:
            raise ValueError(f"unknown model {name!r}; try u1, t2, su2")
    return _MODELS[name]


def load_model_file(path: str) -> LieModel:
    """Load a model from a plain-text description.

    Line format (1-based indices, '#' comments):

        name mygroup
        dim 3
        torus 3
        period 12.566370614359172
        c 1 2 3 1.0
        root 1.0

    'c i j k v' sets the e_k-coefficient of [e_i, e_j]; the antisymmetric
    partner is filled in automatically.  Abelian models get the diagonal
    torus representation; non-abelian ones fall back to the adjoint
    representation, which is faithful only up to the center.
    """
    name = "custom"
    dim = None
    torus: list[int] = []
    periods: list[float] = []
    c_entries: list[tuple[int, int, int, float]] = []
    root_rows: list[np.ndarray] = []
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            key = parts[0]
            if key == "name":
                name = parts[1]
            elif key == "dim":
                dim = int(parts[1])
            elif key == "torus":
                torus = [int(p) - 1 for p in parts[1:]]
            elif key == "period":
                periods = [float(p) for p in parts[1:]]
            elif key == "c":
                i, j, k = (int(p) - 1 for p in parts[1:4])
                c_entries.append((i, j, k, float(parts[4])))
            elif key == "root":
                root_rows.append(np.array([float(p) for p in parts[1:]]))
            else:
                raise ValueError(f"unrecognized model-file line: {raw!r}")
    if dim is None:
        raise ValueError("model file must declare 'dim'")
    c = np.zeros((dim, dim, dim))
    for i, j, k, v in c_entries:
        c[i, j, k] = v
        c[j, i, k] = -v
    if not torus:
        torus = list(range(dim)) if not np.any(c) else []
    if not periods:
        periods = [2.0 * math.pi] * len(torus)
    if np.any(c):
        gens = tuple(
            np.ascontiguousarray(c[i].T, dtype=complex) for i in range(dim)
        )
        rep_dim = dim
    else:
        gens = tuple(
            np.diag([1j if m == k else 0.0 for m in range(dim)])
            for k in range(dim)
        )
        rep_dim = dim
    return _finish(
        LieModel(
            name=name,
            dim=dim,
            structure_constants=c,
            inner=np.eye(dim),
            torus_indices=tuple(torus),
            torus_periods=tuple(periods),
            roots=tuple(RealRoot(r) for r in root_rows),
            defining_rep_dim=rep_dim,
            generators=gens,
        )
    )


def validate_model(model: LieModel) -> None:
    """Check the structural invariants; raise on violation.

    Antisymmetry, the Jacobi identity, ad-invariance of the inner product,
    commuting torus basis, and the generator bracket table must all hold to
    1e-12.
    """
    c = model.structure_constants
    if np.abs(c + np.swapaxes(c, 0, 1)).max() > 1e-12:
        raise ValueError(f"{model.name}: structure constants not antisymmetric")
    # Jacobi: sum over cyclic permutations of [[e_i, e_j], e_k] vanishes.
    jac = (
        np.einsum("ijm,mkl->ijkl", c, c)
        + np.einsum("jkm,mil->ijkl", c, c)
        + np.einsum("kim,mjl->ijkl", c, c)
    )
    if np.abs(jac).max() > 1e-12:
        raise ValueError(f"{model.name}: Jacobi identity fails")
    # ad-invariance of the (identity) inner product: total antisymmetry.
    if np.abs(c + np.swapaxes(c, 1, 2)).max() > 1e-12:
        raise ValueError(f"{model.name}: inner product is not ad-invariant")
    for a in model.torus_indices:
        for b in model.torus_indices:
            if np.abs(c[a, b]).max() > 1e-12:
                raise ValueError(f"{model.name}: torus basis does not commute")
    for i in range(model.dim):
        for j in range(model.dim):
            lhs = (
                model.generators[i] @ model.generators[j]
                - model.generators[j] @ model.generators[i]
            )
            rhs = sum(
                c[i, j, k] * model.generators[k] for k in range(model.dim)
            )
            if not np.allclose(lhs, rhs, atol=1e-12):
                # The adjoint fallback of file models reproduces brackets
                # exactly; a mismatch means the file itself is inconsistent.
                raise ValueError(
                    f"{model.name}: generators do not satisfy the bracket table"
                )


# ---------------------------------------------------------------------------
# operations


def bracket(X: AlgebraVec, Y: AlgebraVec) -> AlgebraVec:
    """Lie bracket [X, Y] by structure-constant contraction."""
    if X.model is not Y.model:
        raise ValueError("bracket arguments belong to different models")
    c = X.model.structure_constants
    out = np.einsum("i,j,ijk->k", X.coords, Y.coords, c)
    return AlgebraVec(X.model, out)


def ad_matrix(model: LieModel, coords: np.ndarray) -> np.ndarray:
    """Matrix of ad(Y): X -> [Y, X] on coordinates; real antisymmetric."""
    return np.einsum("i,ijk->kj", np.asarray(coords, float),
                     model.structure_constants)


def alg_to_matrix(model: LieModel, coords: np.ndarray) -> np.ndarray:
    """Defining-representation image of an algebra coordinate vector."""
    out = np.zeros((model.defining_rep_dim,) * 2, dtype=complex)
    for yk, gen in zip(np.asarray(coords), model.generators):
        if yk:
            out += yk * gen
    return out


def coords_from_matrix(model: LieModel, mat: np.ndarray) -> np.ndarray:
    """Coordinates of a defining-rep algebra matrix (least-squares projection)."""
    return np.real(model._coord_proj @ mat.reshape(-1))


def adjoint_action(g: GroupPoint, Y: AlgebraVec) -> AlgebraVec:
    """Ad_g Y, computed by conjugation in the defining representation."""
    model = g.model
    if Y.model is not model:
        raise ValueError("adjoint_action arguments belong to different models")
    if not g.is_unitary:
        raise ValueError("adjoint_action requires a unitary group point")
    if model.is_abelian:
        return AlgebraVec(model, Y.coords.copy())
    m = g.matrix @ alg_to_matrix(model, Y.coords) @ g.matrix.conj().T
    return AlgebraVec(model, coords_from_matrix(model, m))


def _exp_matrix(model: LieModel, mat: np.ndarray) -> np.ndarray:
    if model.is_abelian:
        return np.diag(np.exp(np.diag(mat)))
    if model.defining_rep_dim == 2 and abs(np.trace(mat)) < 1e-13:
        # Closed form for traceless 2x2: mat^2 = -det(mat) * identity.
        det = mat[0, 0] * mat[1, 1] - mat[0, 1] * mat[1, 0]
        z = np.sqrt(complex(-det))
        if abs(z) < 1e-30:
            return np.eye(2, dtype=complex) + mat
        return np.cosh(z) * np.eye(2) + (np.sinh(z) / z) * mat
    return scipy.linalg.expm(mat)


def exp_alg(Y: AlgebraVec, complex_part: AlgebraVec | None = None) -> GroupPoint:
    """The polar-form exponential: exp(Y) * exp(i * complex_part).

    With a zero second argument this is the group exponential; with a zero
    first argument it is the positive-definite Hermitian factor.
    """
    model = Y.model
    u = _exp_matrix(model, alg_to_matrix(model, Y.coords))
    if complex_part is not None and np.any(complex_part.coords):
        if complex_part.model is not model:
            raise ValueError("exp_alg arguments belong to different models")
        p = _exp_matrix(model, 1j * alg_to_matrix(model, complex_part.coords))
        return GroupPoint(model, u @ p)
    return GroupPoint(model, u)


def torus_point(model: LieModel, angles: Sequence[float]) -> GroupPoint:
    """exp of an element of t given by torus coordinates."""
    coords = np.zeros(model.dim)
    for idx, a in zip(model.torus_indices, angles):
        coords[idx] = a
    return exp_alg(AlgebraVec(model, coords))


def unitary_log(g: GroupPoint) -> AlgebraVec:
    """A logarithm of a unitary group point, landing in the model's algebra.

    Torus models read angles off the diagonal (wrapped to (-pi, pi]).  For
    su(2) the branch is chosen traceless, so the center element -identity
    maps to a vector of norm 2*pi rather than escaping the algebra.
    """
    model = g.model
    if not g.is_unitary:
        raise ValueError("unitary_log requires a unitary group point")
    if model.is_abelian:
        ang = np.angle(np.diag(g.matrix))
        coords = np.zeros(model.dim)
        for idx, a in zip(model.torus_indices, ang):
            coords[idx] = a
        return AlgebraVec(model, coords)
    vals, vecs = np.linalg.eig(g.matrix)
    if model.defining_rep_dim == 2:
        phi = float(np.angle(vals[0]))
        if abs(vals[0] - vals[1]) < 1e-12:
            mat = np.diag([1j * phi, -1j * phi]).astype(complex)
        else:
            q, _ = np.linalg.qr(vecs)
            # QR may flip eigenvector phases; re-derive each eigenvalue.
            lam = np.diag(q.conj().T @ g.matrix @ q)
            phi = float(np.angle(lam[0]))
            mat = q @ np.diag([1j * phi, -1j * phi]) @ q.conj().T
        return AlgebraVec(model, coords_from_matrix(model, mat))
    mat = scipy.linalg.logm(g.matrix)
    return AlgebraVec(model, coords_from_matrix(model, mat))


def weyl_group(model: LieModel) -> list[WeylElement]:
    """The Weyl group as orthogonal matrices on t, generated by root
    reflections and closed under composition."""
    r = model.rank
    elements = [WeylElement(np.eye(r), "e")]
    gens = []
    for idx, root in enumerate(model.positive_roots()):
        a = root.covector
        refl = np.eye(r) - 2.0 * np.outer(a, a) / float(a @ a)
        gens.append(WeylElement(refl, f"s{idx}"))
    frontier = list(gens)
    seen = [np.eye(r)] + [g.matrix for g in gens]
    elements += gens
    guard = 0
    while frontier:
        guard += 1
        if guard > 64:
            raise ValueError(f"{model.name}: Weyl group failed to close")
        new = []
        for w in frontier:
            for s in gens:
                m = s.matrix @ w.matrix
                if not any(np.allclose(m, t, atol=1e-12) for t in seen):
                    el = WeylElement(m, s.word + w.word)
                    seen.append(m)
                    elements.append(el)
                    new.append(el)
        frontier = new
    return elements


def weyl_determinant(w: WeylElement) -> int:
    """det of the Weyl action on t; always +1 or -1."""
    d = float(np.linalg.det(w.matrix))
    out = int(round(d))
    if out not in (1, -1) or abs(d - out) > 1e-9:
        raise ValueError("Weyl element determinant is not a unit")
    return out


# ---------------------------------------------------------------------------
# sampling helpers shared by the test suites


def random_algebra(model: LieModel, rng: np.random.Generator,
                   scale: float = 1.0) -> AlgebraVec:
    return AlgebraVec(model, scale * rng.standard_normal(model.dim))


def random_group_point(model: LieModel, rng: np.random.Generator) -> GroupPoint:
    if model.is_abelian:
        angles = rng.uniform(0.0, 2.0 * math.pi, size=model.rank)
        return torus_point(model, angles)
    return exp_alg(random_algebra(model, rng, scale=2.0))
