import math

import numpy as np
import pytest
from scipy.special import erf
from scipy.stats import norm, qmc

from quantlab.coherent_transform import (
    PeterWeylVector,
    build_sigma_table,
    equivariance_certificate,
    group_action,
    irrep,
    irrep_labels,
    phi_kernel,
    sigma,
    spin_weighted_gram,
    transform_C_phi,
    unitarity_certificate,
)
from quantlab.lie_core import (
    GroupPoint,
    algebra_vec,
    exp_alg,
    get_model,
    random_group_point,
)
from quantlab.quadrature import su2_haar_rule, torus_rule

SU2 = get_model("su2")
U1 = get_model("u1")
T2 = get_model("t2")


def sigma_u1_closed(n: int) -> float:
    # complete the square: int e^{2ny} e^{-2pi y^2} dy
    return math.exp(n * n / (2 * math.pi)) / math.sqrt(2.0)


def radial_piece_closed(b: float) -> float:
    # int_0^inf r^2 e^{br} e^{-2pi r^2} dr by completing the square to erf
    a = 2.0 * math.pi
    c = b / (2.0 * a)
    gauss = 0.5 * math.sqrt(math.pi / a) * (1.0 + erf(c * math.sqrt(a)))
    return c / (2 * a) + math.exp(a * c * c) * (1.0 / (2 * a) + c * c) * gauss


def sigma_su2_closed(j: float) -> float:
    total = 0.0
    m = -j
    while m <= j + 1e-9:
        total += radial_piece_closed(2.0 * m)
        m += 1.0
    return 4.0 * math.pi * total / (2 * j + 1)


def test_irrep_construction_and_validation():
    for n in (-3, 0, 5):
        ir = irrep(U1, n)
        assert ir.dim == 1
        assert abs(ir.character(np.eye(1)) - 1) < 1e-12
    for j in (0.0, 0.5, 1.0, 2.0):
        ir = irrep(SU2, j)
        assert ir.dim == int(2 * j + 1)
        assert abs(ir.character(np.eye(2)) - ir.dim) < 1e-10
    with pytest.raises(ValueError):
        irrep(SU2, 0.3)
    with pytest.raises(ValueError):
        irrep(T2, 4)


def test_spin_half_matches_defining_rep():
    ir = irrep(SU2, 0.5)
    assert np.abs(ir.generator_images - SU2.generators).max() < 1e-12


def test_rep_unitary_is_homomorphism():
    rng = np.random.default_rng(3)
    ir = irrep(SU2, 1.5)
    for _ in range(10):
        g = random_group_point(SU2, rng)
        h = random_group_point(SU2, rng)
        gh = GroupPoint(SU2, g.matrix @ h.matrix)
        lhs = ir.rep_unitary(gh)
        rhs = ir.rep_unitary(g) @ ir.rep_unitary(h)
        assert np.abs(lhs - rhs).max() < 1e-10
        # unitary and character consistent with the eigenvalue route
        assert np.abs(lhs @ lhs.conj().T - np.eye(ir.dim)).max() < 1e-10
        assert abs(np.trace(lhs) - ir.character(gh.matrix)) < 1e-10


def test_character_on_torus_points():
    ir = irrep(SU2, 1.0)
    for tau in (0.3, 1.7, -2.2):
        g = exp_alg(algebra_vec(SU2, [0, 0, tau]))
        want = sum(np.exp(1j * m * tau) for m in (-1, 0, 1))
        assert abs(ir.character(g.matrix) - want) < 1e-12


def test_sigma_u1_against_closed_form():
    for n in range(-8, 9):
        got = sigma(irrep(U1, n), level=4)
        assert abs(got - sigma_u1_closed(n)) / sigma_u1_closed(n) < 1e-10


def test_sigma_trivial_is_gaussian_mass():
    assert abs(sigma(irrep(U1, 0)) - 2 ** -0.5) < 1e-12
    assert abs(sigma(irrep(T2, (0, 0))) - 0.5) < 1e-12
    assert abs(sigma(irrep(SU2, 0.0)) - 2 ** -1.5) < 1e-12


def test_sigma_su2_against_erf_oracle():
    for j in (0.5, 1.0, 1.5, 2.0):
        got = sigma(irrep(SU2, j), level=4)
        want = sigma_su2_closed(j)
        assert abs(got - want) / want < 1e-10


def test_sigma_su2_against_quasirandom_3d():
    # independent 3-D check: scrambled-Sobol points mapped to the Gaussian
    # N(0, 1/(4 pi)); sigma = 2^{-3/2} E[HS^2(|Y|)] / dim
    j = 1.0
    sampler = qmc.Sobol(d=3, scramble=True, seed=12345)
    pts = sampler.random_base2(m=21)
    y = norm.ppf(pts) / math.sqrt(4 * math.pi)
    r = np.linalg.norm(y, axis=1)
    ms = np.arange(-j, j + 1)
    hs = np.exp(2.0 * np.outer(r, ms)).sum(axis=1)
    est = 2 ** -1.5 * hs.mean() / (2 * j + 1)
    want = sigma_su2_closed(j)
    assert abs(est - want) / want < 1e-3


def test_sigma_symmetric_under_weyl():
    for n in range(9):
        a = sigma(irrep(U1, n))
        b = sigma(irrep(U1, -n))
        assert abs(a - b) <= 1e-10 * max(1.0, a)


def test_sigma_table_positive_with_estimates():
    table = build_sigma_table(SU2, 2.0)
    assert set(table.values) == {0.0, 0.5, 1.0, 1.5, 2.0}
    assert all(v > 0 for v in table.values.values())
    assert table.metadata["max_error_estimate"] < 1e-9


def test_phi_kernel_u1_direct_sum():
    table = build_sigma_table(U1, 8)
    theta = 0.9
    t = np.array([[np.exp(1j * theta)]])
    want = sum(
        np.exp(-1j * n * theta) / math.sqrt(table[(n,)])
        for n in range(-8, 9)
    )
    assert abs(phi_kernel(t, table) - want) < 1e-12


def test_phi_kernel_conjugation_invariance():
    rng = np.random.default_rng(11)
    table = build_sigma_table(SU2, 2.0)
    x = random_group_point(SU2, rng)
    g = random_group_point(SU2, rng)
    conj = GroupPoint(SU2, g.matrix @ x.matrix @ g.matrix.conj().T)
    assert abs(phi_kernel(x.matrix, table)
               - phi_kernel(conj.matrix, table)) < 1e-9


def test_phi_truncation_tail():
    # at the identity the N -> N+5 difference is exactly the sigma tail
    t = np.array([[1.0 + 0j]])
    t8 = build_sigma_table(U1, 8)
    t13 = build_sigma_table(U1, 13)
    diff = phi_kernel(t, t13) - phi_kernel(t, t8)
    tail = sum(
        1.0 / math.sqrt(t13[(n,)]) for n in range(-13, 14) if abs(n) > 8
    )
    assert abs(diff - tail) < 1e-10
    assert tail < 12 * math.exp(-(9 ** 2) / (4 * math.pi))


def test_transform_diagonal_action_u1_against_quadrature():
    # quadrature of the defining convolution against the diagonal rule,
    # at a complexified point t = e^{i(theta + i y)}
    cutoff = 6
    table = build_sigma_table(U1, cutoff)
    rule = torus_rule(1, 2 * cutoff + 2)
    theta, yy = 0.7, 0.4
    tpoint = np.array([[np.exp(1j * (theta + 1j * yy))]])
    for n in (-4, 0, 3):
        vals = []
        for (ang,) in rule.nodes:
            x = np.array([[np.exp(1j * ang)]])
            xinv_t = np.linalg.inv(x) @ tpoint
            vals.append(np.exp(1j * n * ang) * phi_kernel(xinv_t, table))
        got = complex(np.dot(rule.weights, vals))
        want = irrep(U1, n).character(tpoint) / math.sqrt(table[(n,)])
        assert abs(got - want) < 1e-8


def test_transform_su2_character_against_quadrature():
    cutoff = 2.0
    table = build_sigma_table(SU2, cutoff)
    rule = su2_haar_rule(3)
    ir = irrep(SU2, 0.5)
    tpoint = exp_alg(
        algebra_vec(SU2, [0.2, -0.1, 0.4]), algebra_vec(SU2, [0.0, 0.0, 0.3])
    ).matrix
    vals = np.empty(rule.nodes.shape[0], dtype=complex)
    for i, x in enumerate(rule.nodes):
        vals[i] = ir.character(x) * phi_kernel(
            np.linalg.inv(x) @ tpoint, table
        )
    got = complex(np.dot(rule.weights, vals))
    want = ir.character(tpoint) / math.sqrt(table[0.5])
    assert abs(got - want) < 1e-8


def test_transform_zero_and_cutoff_mismatch():
    table = build_sigma_table(U1, 4)
    zero = PeterWeylVector(U1, 4, {})
    assert transform_C_phi(zero, table).norm_sq == 0
    f = PeterWeylVector(U1, 6, {((6,), 0, 0): 1.0})
    with pytest.raises(ValueError):
        transform_C_phi(f, table)


def test_parseval_truncated():
    # quadrature norm equals coefficient norm for a trig polynomial
    rng = np.random.default_rng(5)
    cutoff = 5
    coeffs = {
        ((n,), 0, 0): complex(*rng.standard_normal(2))
        for n in range(-cutoff, cutoff + 1)
    }
    f = PeterWeylVector(U1, cutoff, coeffs)
    rule = torus_rule(1, 2 * cutoff)
    vals = np.zeros(rule.nodes.shape[0], dtype=complex)
    for (lab, _, _), c in coeffs.items():
        vals += c * np.exp(1j * lab[0] * rule.nodes[:, 0])
    quad_norm = float(np.dot(rule.weights, np.abs(vals) ** 2))
    assert abs(quad_norm - f.norm_sq) < 1e-10


def test_group_action_u1_phases():
    a = 0.8
    h1 = GroupPoint(U1, np.array([[np.exp(1j * a)]]))
    h2 = GroupPoint(U1, np.eye(1, dtype=complex))
    f = PeterWeylVector(U1, 3, {((2,), 0, 0): 1.0})
    acted = group_action(f, h1, h2)
    assert abs(acted.coeffs[((2,), 0, 0)] - np.exp(-2j * a)) < 1e-12


def test_unitarity_certificate_u1():
    rep = unitarity_certificate(U1, 8)
    assert rep.passed
    assert rep.max_error < 1e-6
    assert rep.metadata["basis_size"] == 17


def test_unitarity_certificate_su2():
    rep = unitarity_certificate(SU2, 2.0)
    assert rep.passed
    assert rep.max_error < 1e-4
    assert rep.metadata["basis_size"] == 55
    assert rep.metadata["block_leakage"] < 1e-10


def test_gram_entries_stable_under_cutoff_growth():
    # entries shared between cutoffs move by less than 1e-8 even though the
    # larger cutoff re-derives its quadrature rules
    from quantlab.coherent_transform import _gram_blocks

    small_labels = irrep_labels(SU2, 1.0)
    big_labels = irrep_labels(SU2, 2.0)
    hl2_small, _ = _gram_blocks(SU2, small_labels, 3)
    hl2_big, _ = _gram_blocks(SU2, big_labels, 3)
    for key, block in hl2_small.items():
        assert np.abs(block - hl2_big[key]).max() < 1e-8


def test_equivariance_certificates():
    for model, cutoff in ((U1, 6), (SU2, 1.5)):
        rep = equivariance_certificate(model, cutoff, samples=8, seed=2)
        assert rep.passed
        assert rep.max_error < 1e-8


def test_spin_weighted_gram_su2():
    rep = spin_weighted_gram(SU2, 2.0)
    assert rep.passed
    diag = rep.metadata["eta_diagonal"]
    assert all(d > 0 for d in diag)
    assert rep.metadata["off_diagonal_eta"] < 1e-6
    # the flat diagonal reproduces the sigma values
    table = build_sigma_table(SU2, 2.0)
    flat = rep.metadata["flat_diagonal"]
    for lab, got in zip(rep.metadata["labels"], flat):
        want = table[float(lab)]
        assert abs(got - want) / want < 1e-6


def test_spin_weighted_gram_torus_trivial():
    rep = spin_weighted_gram(U1, 4)
    assert rep.passed
    assert rep.metadata["eta_diagonal"] == rep.metadata["flat_diagonal"]
