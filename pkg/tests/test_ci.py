import math
from fractions import Fraction

import numpy as np
import pytest

from syndeco.ci import (
    BracketError,
    InfeasibleStartError,
    PolytopeKind,
    build_polytope,
    compare,
    d2_via_polytope,
    family_channel,
    family_input,
    golden_section,
    heatmap,
    match_alpha,
    minimize_mi,
    sweep_lower_bound,
)
from syndeco.core import Channel, ChannelSpace, InputDistribution, compose_joint
from syndeco.corpus import AND_OR_TOTAL, example, random_channel
from syndeco.decomposition import synergy


def _exact_rank(rows):
    m = [[Fraction(int(v)) for v in r] for r in rows]
    rank, col = 0, 0
    ncol = len(m[0])
    while rank < len(m) and col < ncol:
        pivot = next((r for r in range(rank, len(m)) if m[r][col] != 0), None)
        if pivot is None:
            col += 1
            continue
        m[rank], m[pivot] = m[pivot], m[rank]
        for r in range(len(m)):
            if r != rank and m[r][col] != 0:
                f = m[r][col] / m[rank][col]
                m[r] = [a - f * b for a, b in zip(m[r], m[rank])]
        rank += 1
        col += 1
    return rank


def _h(t):
    return 0.0 if t in (0.0, 1.0) else -(t * math.log2(t) + (1 - t) * math.log2(1 - t))


@pytest.mark.parametrize("kind,dim", [(PolytopeKind.WEDGE, 2), (PolytopeKind.TRIANGLE, 1)])
def test_xor_polytope_dimension_matches_exact_rank(kind, dim):
    ex = example("xor_pair")
    poly = build_polytope(compose_joint(ex.p, ex.k), kind)
    # XOR marginals are all uniform, so the face is the full simplex slice
    assert 8 - _exact_rank(np.vstack([poly.A, np.ones(8)])) == dim
    assert poly.dimension == dim
    np.testing.assert_allclose(poly.A @ poly.null_space_basis.T, 0.0, atol=1e-12)


def test_xor_ci_and_d2():
    ex = example("xor_pair")
    c = compare(ex.p, ex.k)
    assert c.ci == pytest.approx(1.0, abs=1e-9)
    assert c.d2 == pytest.approx(1.0, abs=1e-9)


def test_and_ci_against_hand_parametrisation():
    # wedge of AND: q(1,1,1) = 1/4 and the y=0 block is [[a, 1/2-a], [1/2-a, a-1/4]], a in [1/4, 1/2];
    # I = h(1/4) - a h(1/(4a))
    i_min = min(AND_OR_TOTAL - a * _h(1 / (4 * a)) for a in np.linspace(0.25, 0.5, 2001))
    ex = example("and_gate")
    c = compare(ex.p, ex.k)
    assert c.wedge_minimum == pytest.approx(i_min, abs=1e-9)
    assert c.ci == pytest.approx(AND_OR_TOTAL - i_min, abs=1e-9)
    assert c.d2 == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_d2_routes_and_ordering(seed):
    space = ChannelSpace((2, 2), 2)
    p, k = random_channel(space, seed)
    s = synergy(p, k)
    assert d2_via_polytope(p, k) == pytest.approx(s, abs=1e-6)
    c = compare(p, k)
    assert c.ci >= c.d2 - 1e-9


def test_ternary_output_polytope():
    space = ChannelSpace((2, 3), 3)
    p, k = random_channel(space, 1)
    assert d2_via_polytope(p, k) == pytest.approx(synergy(p, k), abs=1e-6)


def test_start_must_be_feasible():
    ex = example("xor_pair")
    poly = build_polytope(compose_joint(ex.p, ex.k), PolytopeKind.TRIANGLE)
    with pytest.raises(InfeasibleStartError):
        minimize_mi(poly, start=np.full(8, 1 / 8) + np.eye(8)[0] * 0.1)


def test_minimum_unpacks_and_trace_decreases():
    ex = example("xor_pair")
    joint, value = minimize_mi(build_polytope(compose_joint(ex.p, ex.k), PolytopeKind.WEDGE), n_random_starts=0)
    assert value == pytest.approx(0.0, abs=1e-9)
    assert joint.table.sum() == pytest.approx(1.0)


def test_three_inputs_rejected():
    ex = example("parity3")
    with pytest.raises(ValueError):
        compare(ex.p, ex.k)


def test_family_binary_embedding_oracle():
    p = family_input(math.log(2), embedding="binary")
    np.testing.assert_allclose(p.table, [0.2, 0.2, 0.2, 0.4], atol=1e-15)


def test_family_channel_is_pairwise():
    k = family_channel(1.3)
    # spin: x=(-1,-1) favours y=-1 with odds e^{4 beta}
    assert k.rows[0, 0] / k.rows[0, 1] == pytest.approx(math.exp(4 * 1.3))
    np.testing.assert_allclose(k.rows[1], [0.5, 0.5])
    with pytest.raises(ValueError):
        family_channel(1.0, embedding="ternary")


def test_golden_section_quadratic():
    x, fx = golden_section(lambda t: (t - 0.3) ** 2, 0, 1)
    assert x == pytest.approx(0.3, abs=1e-9) and fx < 1e-16


def test_match_alpha_fixed_point_and_bracket():
    alpha, res = match_alpha(0.7, 1.0, 0.7)
    assert alpha == pytest.approx(1.0, abs=1e-8) and res < 1e-10
    with pytest.raises(BracketError):
        match_alpha(3.0, 1.0, 0.7, bracket=(0.0, 0.5))


def test_sweep_starts_at_zero():
    pts = sweep_lower_bound(beta_grid=[0.7, 1.5])
    assert pts[0].lower_bound == pytest.approx(0.0, abs=1e-12)
    assert pts[1].lower_bound > 0


def test_heatmap_monotone_in_beta_at_zero_alpha():
    hm = heatmap([0.0, 1.0, 2.0], np.linspace(0.1, 3.0, 12), references=((1.0, 0.7),))
    assert np.all(np.diff(hm.mi[0]) > 0)
    assert hm.mi.shape == (3, 12)
    assert len(hm.traces) == 1 and hm.traces[0].points


def test_triangle_minimum_not_below_wedge_on_100_channels():
    for s in range(100):
        p, k = random_channel(ChannelSpace((2, 2), 2), 7000 + s)
        c = compare(p, k, n_random_starts=2)
        assert c.triangle_minimum >= c.wedge_minimum - 1e-9, f"instance {s}"
        assert c.ci >= c.d2 - 1e-9


@pytest.mark.parametrize("kind", list(PolytopeKind))
def test_minimiser_is_feasible_and_descent_monotone(kind):
    p, k = random_channel(ChannelSpace((2, 3), 2), 3)
    poly = build_polytope(compose_joint(p, k), kind)
    res = minimize_mi(poly)
    q = res.joint.table.ravel()
    assert poly.residual(q) <= 1e-9
    assert q.min() >= -1e-12
    assert np.all(np.diff(res.trace) <= 1e-15)
    # the pairwise constraints pin q(Y)
    np.testing.assert_allclose(res.joint.table.sum(axis=0), compose_joint(p, k).table.sum(axis=0), atol=1e-12)


def test_constant_channel_has_no_ci():
    space = ChannelSpace((2, 2), 2)
    assert compare(InputDistribution.uniform(space), Channel.constant(space, [0.3, 0.7])).ci == pytest.approx(
        0.0, abs=1e-12
    )


@pytest.mark.parametrize("beta", [0.3, 1.0, 2.5])
def test_family_channel_has_no_pairwise_synergy(beta):
    assert synergy(family_input(0.8), family_channel(beta)) == pytest.approx(0.0, abs=1e-9)
    assert d2_via_polytope(family_input(0.8), family_channel(beta)) == pytest.approx(0.0, abs=1e-6)


def test_family_limits():
    np.testing.assert_allclose(family_channel(0.0).rows, 0.5)
    np.testing.assert_allclose(family_input(0.0).table, 0.25)
    assert family_channel(40.0).rows[3, 1] == pytest.approx(1.0)
    assert family_input(40.0, embedding="binary").table[3] == pytest.approx(1.0)


def test_match_alpha_moves_off_reference():
    alpha, _ = match_alpha(0.75, 1.0, 0.7)
    assert abs(alpha - 1.0) > 1e-4
