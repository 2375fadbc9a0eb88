import itertools
import math

import numpy as np
import pytest

from groupcodes import ChannelSpec, ThetaVector, decompose
from groupcodes.ensemble import (
    HomomorphismTable,
    InputGroup,
    apply_hom,
    brute_theta_set,
    congruence_solutions_from,
    constraint_violations,
    count_t_theta,
    encode,
    lemma_suite,
    mc_channel_error,
    pair_theta,
    sample_hom,
    solve_congruence,
    t_theta_bound,
    theta_census,
    verify_pairwise_law,
)
from groupcodes.rates import enumerate_theta_set

from conftest import additive_noise_channel, make_rng


def ig_of(orders, counts_map) -> InputGroup:
    spec = decompose(orders).spec
    return InputGroup.from_mapping(spec, counts_map)


# -- input groups -------------------------------------------------------------


def test_input_group_structure():
    ig = ig_of([8], {(2, 2): 1, (2, 3): 2})
    assert ig.spec.rings == ((2, 2, 1), (2, 3, 1), (2, 3, 2))
    assert ig.size == 4 * 8 * 8
    assert ig.total == 3
    assert ig.support == ((2, 2), (2, 3))
    w = ig.weights()
    assert w[(2, 2)] * 3 == 1 and w[(2, 3)] * 3 == 2


def test_input_group_validation():
    spec = decompose([8]).spec
    with pytest.raises(ValueError):
        InputGroup(spec, (0, 0, 0))
    with pytest.raises(ValueError):
        InputGroup(spec, (1, -1, 0))


# -- sampling -----------------------------------------------------------------


def test_sample_hom_deterministic():
    ig = ig_of([4], {(2, 2): 1})
    t1 = sample_hom(ig, 3, seed=42)
    t2 = sample_hom(ig, 3, seed=42)
    assert t1.images == t2.images and t1.dither == t2.dither
    t3 = sample_hom(ig, 3, seed=43)
    assert (t3.images, t3.dither) != (t1.images, t1.dither)


def test_sample_hom_supports():
    # full-exponent slot draws from the whole ring, the shallow slot from the
    # doubled subring, and cross-prime components stay zero
    ig44 = ig_of([4], {(2, 2): 1})
    seen = {sample_hom(ig44, 1, seed=s).images[0][0].residues[0] for s in range(120)}
    assert seen == {0, 1, 2, 3}

    ig42 = ig_of([4], {(2, 1): 1})
    seen = {sample_hom(ig42, 1, seed=s).images[0][0].residues[0] for s in range(60)}
    assert seen == {0, 2}

    ig_cross = ig_of([4, 3], {(3, 1): 1})
    for s in range(40):
        g = sample_hom(ig_cross, 1, seed=s).images[0][0]
        assert g.residues[0] == 0  # the Z_4 component of a Z_3 generator image


def test_table_constraints_enforced():
    ig = ig_of([4], {(2, 1): 1})
    spec = ig.group
    good = HomomorphismTable(ig, 1, ((spec.element([2]),),), (spec.zero(),))
    assert constraint_violations(good) == []
    with pytest.raises(ValueError):
        HomomorphismTable(ig, 1, ((spec.element([1]),),), (spec.zero(),))


def test_constraints_hold_for_many_samples():
    ig = ig_of([2, 4], {(2, 1): 1, (2, 2): 1})
    for s in range(1000):
        assert constraint_violations(sample_hom(ig, 1, seed=s)) == []


# -- applying -----------------------------------------------------------------


def test_apply_hom_zero_and_law():
    ig = ig_of([2, 4], {(2, 1): 1, (2, 2): 1})
    table = sample_hom(ig, 2, seed=7)
    zero_image = apply_hom(table, ig.spec.zero())
    assert all(x.is_zero() for x in zero_image)
    elements = list(ig.spec.elements())
    for s in range(100):
        table = sample_hom(ig, 2, seed=s)
        for a, b in itertools.product(elements, elements):
            lhs = apply_hom(table, a + b)
            rhs = tuple(
                x + y for x, y in zip(apply_hom(table, a), apply_hom(table, b))
            )
            assert lhs == rhs


def test_apply_hom_hand_value():
    # doubling generator image: input 1 lands on 2
    ig = ig_of([4], {(2, 1): 1})
    spec = ig.group
    table = HomomorphismTable(ig, 1, ((spec.element([2]),),), (spec.zero(),))
    assert apply_hom(table, [1])[0].residues == (2,)
    assert encode(table, [1])[0].residues == (2,)


# -- pair selectors -----------------------------------------------------------


def test_pair_theta_same_element_is_full():
    ig = ig_of([8], {(2, 2): 1, (2, 3): 1})
    for a in ig.spec.elements():
        assert pair_theta(ig, a, a).is_full()


def test_pair_theta_depth_examples():
    ig = ig_of([8], {(2, 3): 1})
    assert pair_theta(ig, [0], [4]).components == (2,)
    ig2 = ig_of([8], {(2, 1): 1, (2, 3): 1})
    assert pair_theta(ig2, [0, 0], [1, 2]).components == (1,)


def test_census_z8_counts():
    ig = ig_of([8], {(2, 3): 1})
    census = {t.components[0]: c for t, c in theta_census(ig).items()}
    assert census == {0: 4, 1: 2, 2: 1, 3: 1}
    for t, c in theta_census(ig).items():
        assert count_t_theta(ig, ig.spec.zero(), t) == c


def test_census_independent_of_base_point():
    ig = ig_of([8], {(2, 2): 1, (2, 3): 1})
    censuses = {
        tuple(sorted((t.components, c) for t, c in theta_census(ig, a).items()))
        for a in ig.spec.elements()
    }
    assert len(censuses) == 1


def test_census_bound_z8_pattern():
    # paper-style weights on the two top slots of Z_8
    ig = ig_of([8], {(2, 2): 1, (2, 3): 1})
    census = theta_census(ig)
    expected_bounds = {
        (0,): 2 ** (2 + 3),  # free everywhere
        (1,): 2 ** (2 + 2),  # only the deep slot pays one level
        (2,): 2 ** (1 + 1),
        (3,): 2 ** (0 + 0),
    }
    for t, count in census.items():
        bound = t_theta_bound(ig, t)
        assert bound == expected_bounds[t.components]
        assert count <= bound
    # the full selector class is exactly the diagonal
    assert census[ThetaVector(ig.group, (3,))] == 1


@pytest.mark.parametrize(
    "orders,counts",
    [
        ([8], {(2, 2): 1, (2, 3): 1}),
        ([8], {(2, 1): 1, (2, 2): 1, (2, 3): 1}),
        ([4, 3], {(2, 1): 1, (2, 2): 1, (3, 1): 1}),
        ([2, 4], {(2, 1): 1, (2, 2): 1}),
        ([2, 4], {(2, 2): 2}),
    ],
)
def test_brute_theta_matches_enumeration(orders, counts):
    ig = ig_of(orders, counts)
    census = theta_census(ig)
    for t, count in census.items():
        assert count <= t_theta_bound(ig, t)
    assert brute_theta_set(ig) == enumerate_theta_set(ig.group, ig.support)


def test_theta_set_depends_only_on_support():
    # two different count vectors with the same support produce the same set
    a = brute_theta_set(ig_of([8], {(2, 2): 1, (2, 3): 1}))
    b = brute_theta_set(ig_of([8], {(2, 2): 2, (2, 3): 3}))
    assert a == b


# -- pairwise law -------------------------------------------------------------


def test_pairwise_law_z4_example():
    ig = ig_of([4], {(2, 2): 1})
    rep = verify_pairwise_law(ig, 1, [0], [2])
    assert rep.mode == "exhaustive"
    assert rep.theta.components == (1,)
    assert rep.support_cells == 8  # pairs with difference in {0, 2}
    assert rep.passed and rep.off_support_mass == 0.0 and rep.tv_distance == 0.0


def test_pairwise_law_diagonal():
    ig = ig_of([4], {(2, 2): 1})
    a = ig.spec.element([3])
    rep = verify_pairwise_law(ig, 1, a, a)
    assert rep.theta.is_full()
    assert rep.support_cells == 4  # the diagonal, uniform 1/|G|
    assert rep.passed


def test_pairwise_law_shallow_generator():
    ig = ig_of([4], {(2, 1): 1})
    rep = verify_pairwise_law(ig, 1, [0], [1])
    assert rep.mode == "exhaustive"
    assert rep.theta.components == (1,)
    assert rep.passed


def test_pairwise_law_exhaustive_many_configs():
    for orders, n in ([2], 2), ([4], 2), ([2, 4], 1), ([4, 3], 1):
        spec = decompose(orders).spec
        for slot in spec.weight_slots:
            ig = InputGroup.from_mapping(spec, {slot: 1})
            for a, b in itertools.product(ig.spec.elements(), repeat=2):
                rep = verify_pairwise_law(ig, n, a, b)
                assert rep.mode == "exhaustive"
                assert rep.passed, (orders, n, slot, a, b)


def test_pairwise_law_sampled_mode():
    ig = ig_of([8], {(2, 3): 2})
    rep = verify_pairwise_law(ig, 2, [0, 0], [4, 4], samples=4096, seed=3)
    assert rep.mode == "sampled"
    assert rep.theta.components == (2,)
    assert rep.off_support_mass == 0.0
    assert rep.passed


def test_pairwise_law_cap():
    ig = ig_of([8], {(2, 3): 1})
    with pytest.raises(ValueError):
        verify_pairwise_law(ig, 3, [0], [1])  # 8^6 cells is over the cap


# -- congruence solver --------------------------------------------------------


def test_congruence_examples():
    assert solve_congruence(2, 3, 2, 2, 4) == (2, 6)
    assert solve_congruence(2, 3, 3, 1, 5) == (5,)  # unit coefficient
    assert solve_congruence(2, 3, 2, 2, 1) == ()
    with pytest.raises(ValueError):
        solve_congruence(2, 3, 2, 0, 4)
    with pytest.raises(ValueError):
        solve_congruence(2, 3, 2, 4, 0)  # 4 = 0 in Z_4


def test_congruence_exhaustive_small_primes():
    for p in (2, 3):
        for r in range(1, 4):
            mod = p**r
            for s in range(1, r + 1):
                for a in range(1, p**s):
                    for b in range(mod):
                        brute = tuple(
                            x for x in range(mod) if (a * x) % mod == b
                        )
                        assert solve_congruence(p, r, s, a, b) == brute


def test_congruence_representation_invariance():
    # alternate alpha and beta representatives give the same solution set
    p, r, s, a, b = 2, 3, 2, 2, 4
    theta_hat, theta = 1, 2
    base = solve_congruence(p, r, s, a, b)
    alpha0, beta0 = a // p**theta_hat, b // p**theta
    for i in range(p**theta_hat):
        for j in range(p**theta):
            alpha = alpha0 + i * p ** (r - theta_hat)
            beta = beta0 + j * p ** (r - theta)
            got = congruence_solutions_from(p, r, theta_hat, theta, alpha % p**r, beta % p**r)
            assert got == base


# -- Monte Carlo --------------------------------------------------------------


def test_mc_identity_channel_injective_errors():
    spec = decompose([4]).spec
    chan = ChannelSpec(spec, np.eye(4))
    ig = InputGroup.from_mapping(spec, {(2, 2): 1})
    rep = mc_channel_error(ig, 1, chan, trials=300, seed=5)
    assert rep.injective_trials > 0
    assert rep.injective_errors == 0


def test_mc_uniform_noise_is_blind_guessing():
    spec = decompose([4]).spec
    chan = ChannelSpec(spec, np.full((4, 3), 1 / 3))
    ig = InputGroup.from_mapping(spec, {(2, 2): 1})
    trials = 400
    rep = mc_channel_error(ig, 1, chan, trials=trials, seed=8)
    p = 1 - 1 / ig.size
    sigma = math.sqrt(p * (1 - p) / trials)
    assert abs(rep.error_rate - p) <= 3 * sigma


def test_mc_error_decreases_with_smaller_codebooks():
    spec = decompose([4]).spec
    chan = additive_noise_channel(spec, [0.9, 0.05, 0.0, 0.05])
    trials = 500
    rates = []
    for k22 in (3, 2, 1):
        ig = InputGroup.from_mapping(spec, {(2, 2): k22})
        rep = mc_channel_error(ig, 4, chan, trials=trials, seed=11)
        rates.append(rep.error_rate)
    slack = 3 * math.sqrt(0.25 / trials)
    assert rates[1] <= rates[0] + slack
    assert rates[2] <= rates[1] + slack


def test_mc_deterministic():
    spec = decompose([4]).spec
    chan = additive_noise_channel(spec, [0.8, 0.1, 0.05, 0.05])
    ig = InputGroup.from_mapping(spec, {(2, 1): 1, (2, 2): 1})
    a = mc_channel_error(ig, 2, chan, trials=100, seed=21)
    b = mc_channel_error(ig, 2, chan, trials=100, seed=21)
    assert a == b


def test_mc_cap():
    spec = decompose([8]).spec
    chan = ChannelSpec(spec, np.eye(8))
    ig = InputGroup.from_mapping(spec, {(2, 3): 3})
    with pytest.raises(ValueError):
        mc_channel_error(ig, 6, chan, trials=10, seed=0)


# -- suite --------------------------------------------------------------------


def test_lemma_suite_passes():
    ig = ig_of([4], {(2, 2): 1})
    checks = lemma_suite(ig, 1, samples=60, seed=2)
    assert all(c.passed for c in checks)
    names = [c.name for c in checks]
    assert names == [
        "generator-constraints",
        "homomorphism-law",
        "pairwise-joint-law",
        "census-bound",
        "theta-set-equality",
        "congruence-solver",
    ]
