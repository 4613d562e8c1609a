from math import comb

import numpy as np
import pytest

from flipflow import (
    GuardExceededError,
    Rule,
    StepGraphon,
    complementing_rule,
    component_completion_rule,
    constant,
    cut_lipschitz_constant,
    cut_norm_exact,
    erdos_renyi_rule,
    eval_poly,
    extremist_rule,
    kernel_sub,
    linf_dist,
    linf_lipschitz_constant,
    removal_rule,
    stirring_rule,
    triangle_removal_rule,
    two_block,
    velocity,
    velocity_monte_carlo,
    velocity_poly,
)
from flipflow import BUILTIN_RULES, LabeledGraph
from flipflow.rules import deltas

from conftest import random_graphon, random_graphon_pair


def identity_rule(k):
    return Rule(k, [[(f, 1.0)] for f in range(1 << comb(k, 2))])


def test_velocity_on_constants_closed_forms():
    tr = triangle_removal_rule()
    for d in (0.2, 0.5, 0.9):
        assert velocity(tr, constant(d)).values[0, 0] == pytest.approx(
            -6 * d**3, abs=1e-13
        )
    er = erdos_renyi_rule()
    for d in (0.0, 0.4, 1.0):
        assert velocity(er, constant(d)).values[0, 0] == pytest.approx(
            2 * (1 - d), abs=1e-13
        )
    for k in (2, 3, 4):
        rule = complementing_rule(k)
        for d in (0.1, 0.5, 0.8):
            assert velocity(rule, constant(d)).values[0, 0] == pytest.approx(
                k * (k - 1) * (1 - 2 * d), abs=1e-12
            )
        assert velocity(rule, constant(0.5)).values[0, 0] == pytest.approx(0.0, abs=1e-13)


def test_velocity_poly_forms():
    er_poly = velocity_poly(erdos_renyi_rule())
    assert np.allclose(er_poly.monomial, [2.0, -2.0])
    tr_poly = velocity_poly(triangle_removal_rule())
    assert np.allclose(tr_poly.monomial, [0.0, 0.0, 0.0, -6.0])
    ext = velocity_poly(extremist_rule(3))
    for d in (0.0, 0.3, 0.5, 0.77, 1.0):
        assert eval_poly(ext, d) == pytest.approx(6 * d * (1 - d) * (2 * d - 1), abs=1e-13)


def test_poly_endpoint_signs():
    for builder in BUILTIN_RULES.values():
        rule = builder()
        poly = velocity_poly(rule)
        d = deltas(rule)
        assert eval_poly(poly, 0.0) == pytest.approx(2 * d[0], abs=1e-12)
        assert eval_poly(poly, 1.0) == pytest.approx(2 * d[-1], abs=1e-12)
        assert eval_poly(poly, 0.0) >= -1e-12
        assert eval_poly(poly, 1.0) <= 1e-12


def test_poly_matches_operator_on_grid():
    for name, builder in BUILTIN_RULES.items():
        rule = builder()
        poly = velocity_poly(rule)
        worst = max(
            abs(eval_poly(poly, float(d)) - velocity(rule, constant(float(d))).values[0, 0])
            for d in np.linspace(0.0, 1.0, 21)
        )
        assert worst <= 1e-12, name


def test_monte_carlo_trivial_rule_exact_zero():
    mc = velocity_monte_carlo(identity_rule(3), constant(0.4), (0, 0), 500, seed=1)
    assert mc.estimate == 0.0


def test_monte_carlo_matches_exact():
    tr = triangle_removal_rule()
    mc = velocity_monte_carlo(tr, constant(0.5), (0, 0), 100_000, seed=2)
    assert abs(mc.estimate + 0.75) <= 4 * mc.stderr
    ext = extremist_rule(3)
    w = two_block((0.5, 0.5), 0.95, 0.95, 0.18)
    exact = velocity(ext, w)
    for cell in ((0, 0), (0, 1), (1, 1)):
        mc = velocity_monte_carlo(ext, w, cell, 100_000, seed=3)
        assert abs(mc.estimate - exact.values[cell]) <= 4 * mc.stderr


def test_velocity_bounds(rng):
    for builder in BUILTIN_RULES.values():
        rule = builder()
        k2 = rule.k * (rule.k - 1)
        for _ in range(8):
            w = random_graphon(rng, int(rng.integers(1, 5)))
            vel = velocity(rule, w).values
            assert np.all(vel >= -k2 * w.values - 1e-10)
            assert np.all(vel <= k2 * (1 - w.values) + 1e-10)
            assert np.max(np.abs(vel)) <= k2 + 1e-10


def test_velocity_lipschitz(rng):
    for builder in (erdos_renyi_rule, triangle_removal_rule, lambda: extremist_rule(4)):
        rule = builder()
        c_cut = cut_lipschitz_constant(rule.k)
        c_inf = linf_lipschitz_constant(rule.k)
        for _ in range(6):
            u, w = random_graphon_pair(rng, int(rng.integers(2, 5)))
            vu, vw = velocity(rule, u), velocity(rule, w)
            cut_in = cut_norm_exact(kernel_sub(u, w))
            cut_out = cut_norm_exact(kernel_sub(vu, vw))
            assert cut_out <= c_cut * cut_in + 1e-12
            assert linf_dist(vu, vw) <= c_inf * linf_dist(u, w) + 1e-12


def test_twin_parts_have_identical_velocity_rows(rng):
    # parts 0 and 1 are twins: same mass and identical value rows
    masses = np.array([0.3, 0.3, 0.4])
    x, y, z = 0.7, 0.25, 0.6
    values = np.array([[x, x, y], [x, x, y], [y, y, z]])
    w = StepGraphon(masses, values)
    for builder in (triangle_removal_rule, lambda: extremist_rule(3), lambda: stirring_rule(3, "loose")):
        vel = velocity(builder(), w).values
        assert np.allclose(vel[0], vel[1], atol=1e-12)
        assert vel[0, 0] == pytest.approx(vel[1, 1], abs=1e-12)


def test_symmetric_two_block_class_is_closed():
    # diagonal-equal two-part graphons keep that shape under the velocity
    ext = extremist_rule(3)
    for x, y in ((0.95, 0.18), (0.3, 0.8), (0.5, 0.5)):
        vel = velocity(ext, two_block((0.5, 0.5), x, x, y)).values
        assert vel[0, 0] == pytest.approx(vel[1, 1], abs=1e-13)


def test_zero_block_stays_zero_for_non_bridging_rules():
    # rules that never add edges between components keep disconnected
    # blocks at zero velocity
    block_diag = two_block((0.5, 0.5), 0.7, 0.4, 0.0)
    for rule in (
        component_completion_rule(3),
        triangle_removal_rule(),
        removal_rule(LabeledGraph.from_edges(3, [(0, 1)])),
    ):
        vel = velocity(rule, block_diag).values
        assert vel[0, 1] == pytest.approx(0.0, abs=1e-13)


def test_velocity_guard():
    big = StepGraphon(np.full(60, 1 / 60), np.full((60, 60), 0.5))
    with pytest.raises(GuardExceededError):
        velocity(extremist_rule(5), big)


def test_velocity_result_is_symmetric(rng):
    for _ in range(5):
        w = random_graphon(rng, 4)
        vel = velocity(extremist_rule(3), w).values
        assert np.array_equal(vel, vel.T)
