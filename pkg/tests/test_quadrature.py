"""Exactness and convergence checks for the integration rules.

Characters of the spin-j representations are evaluated here through the
Chebyshev polynomials of the second kind (an independent route that never
touches the package's own representation code): if a group element has
eigenvalues e^{+/- i tau/2}, its spin-j character is U_{2j}(cos(tau/2)).
"""

import math

import numpy as np
import pytest
from scipy.special import erf, eval_chebyu

from quantlab import quadrature as quad
from quantlab.lie_core import get_model


def test_torus_rule_mass_and_exactness():
    rule = quad.torus_rule(1, modes=8)
    assert abs(rule.mass - 1.0) < 1e-14
    theta = rule.nodes[:, 0]
    for n in range(1, 9):
        val = quad.integrate(rule, np.exp(1j * n * theta))
        assert abs(val) < 1e-13


def test_torus_rule_rank2():
    rule = quad.torus_rule(2, modes=5)
    assert abs(rule.mass - 1.0) < 1e-14
    t1, t2 = rule.nodes[:, 0], rule.nodes[:, 1]
    assert abs(quad.integrate(rule, np.exp(1j * (3 * t1 - 2 * t2)))) < 1e-13
    # frequency 0 integrates to 1
    assert abs(quad.integrate(rule, np.ones(len(t1))) - 1.0) < 1e-14


def test_model_torus_rule_su2_half_integer_weights():
    # The su(2) torus coordinate has period 4*pi and characters e^{i m tau}
    # with half-integer m; the rescaled frequency 2m must be resolved.
    su2 = get_model("su2")
    rule = quad.model_torus_rule(su2, modes=6)
    tau = rule.nodes[:, 0]
    assert tau.max() > 2 * math.pi  # covers the full 4*pi period
    for m in (0.5, 1.0, 1.5, 2.5, 3.0):
        assert abs(quad.integrate(rule, np.exp(1j * m * tau))) < 1e-13
    assert abs(quad.integrate(rule, np.ones_like(tau)) - 1.0) < 1e-14


def _su2_character(mats: np.ndarray, j: float) -> np.ndarray:
    half_trace = np.real(np.trace(mats, axis1=-2, axis2=-1)) / 2.0
    return eval_chebyu(int(round(2 * j)), half_trace)


def test_su2_haar_rule_schur_orthogonality():
    rule = quad.su2_haar_rule(level=4)
    assert abs(rule.mass - 1.0) < 1e-13
    js = [0.0, 0.5, 1.0, 1.5, 2.0]
    chars = {j: _su2_character(rule.nodes, j) for j in js}
    for j in js:
        for k in js:
            val = quad.integrate(rule, chars[j] * np.conj(chars[k]))
            expect = 1.0 if j == k else 0.0
            assert abs(val - expect) < 1e-12, (j, k, val)


def test_su2_haar_rule_against_monte_carlo():
    # Uniform quaternions on S^3 sample probability Haar; compare a smooth
    # non-class integrand between rule and Monte Carlo.
    rule = quad.su2_haar_rule(level=3)
    rng = np.random.default_rng(101)
    q = rng.standard_normal((200_000, 4))
    q /= np.linalg.norm(q, axis=1, keepdims=True)
    # g = q0 + i(q1 sigma1 + q2 sigma2 + q3 sigma3): entry (0,0) = q0 + i q3
    def integrand_mats(mats):
        g00 = mats[..., 0, 0]
        g01 = mats[..., 0, 1]
        return np.abs(g00) ** 2 * np.real(g01) ** 2
    mc_g00 = q[:, 0] + 1j * q[:, 3]
    mc_g01 = q[:, 2] + 1j * q[:, 1]
    mc = np.mean(np.abs(mc_g00) ** 2 * np.real(mc_g01) ** 2)
    val = quad.integrate(rule, integrand_mats(rule.nodes))
    assert abs(val - mc) < 5e-3


def test_su2_haar_nodes_are_unitary():
    rule = quad.su2_haar_rule(level=2)
    mats = rule.nodes
    prods = mats @ np.conj(np.swapaxes(mats, -1, -2))
    assert np.abs(prods - np.eye(2)).max() < 1e-12
    dets = mats[:, 0, 0] * mats[:, 1, 1] - mats[:, 0, 1] * mats[:, 1, 0]
    assert np.abs(dets - 1.0).max() < 1e-12


def test_gaussian_rule_mass_and_moments():
    # closed forms: int e^{-2 pi y^2} dy = 2^{-1/2},
    #               int y^2 e^{-2 pi y^2} dy = 2^{-1/2} / (4 pi).
    rule = quad.gaussian_rule(1, level=1)
    assert abs(rule.mass - 2**-0.5) < 1e-13
    y = rule.nodes[:, 0]
    m2 = quad.integrate(rule, y**2)
    assert abs(m2 - 2**-0.5 / (4 * math.pi)) < 1e-13
    rule2 = quad.gaussian_rule(2, level=1)
    assert abs(rule2.mass - 0.5) < 1e-13


def test_radial_rule_mass():
    rule = quad.radial_rule(level=2)
    assert abs(rule.mass - 2**-1.5) < 1e-12


def test_radial_rule_tilted_against_erf_closed_form():
    # int_0^inf r^2 e^{b r} e^{-2 pi r^2} dr, by completing the square:
    a = 2 * math.pi
    def closed(b):
        c = b / (2 * a)
        tail = math.sqrt(math.pi / a) / 2 * (1 + erf(c * math.sqrt(a)))
        return c / (2 * a) + math.exp(a * c * c) * (1 / (2 * a) + c * c) * tail
    for b in (0.0, 2.0, 6.0, 8.0):
        rule = quad.radial_rule(level=3, tilt=b)
        r = rule.nodes[:, 0]
        val = quad.integrate(rule, np.exp(b * r)) / (4 * math.pi)
        assert abs(val - closed(b)) < 1e-12 * max(1.0, closed(b)), b


def test_doubling_gate_radial():
    gap = quad.doubling_gate(
        lambda lv: quad.radial_rule(lv, tilt=4.0),
        lambda rule: np.exp(4.0 * rule.nodes[:, 0]),
        level=2,
    )
    assert gap < 1e-9


def test_weights_nonnegative_everywhere():
    for rule in (
        quad.torus_rule(2, 6),
        quad.su2_haar_rule(2),
        quad.gaussian_rule(3, 1),
        quad.radial_rule(1, tilt=8.0),
    ):
        assert np.all(rule.weights >= 0)


def test_bad_level_rejected():
    with pytest.raises(ValueError):
        quad.su2_haar_rule(0)
    with pytest.raises(ValueError):
        quad.gaussian_rule(1, 0)
