import math

import pytest

from specauction import (
    CONFLICT_PACKER,
    InputError,
    PC_PACKER,
    SECONDARY_PACKER,
    admission_threshold,
    brute_force_max_cardinality,
    check_feasible,
    extend_to_multichannel,
    extended_packer,
    fixed_power_greedy,
    greedy_conflict_packing,
    oracle_packer,
    secondary_network_greedy,
    solve_power_assignment,
    unweighted_packing_pc,
)
from specauction.harness import InstanceSpec, generate_instance

from conftest import (
    conflict_instance,
    fixed_instance,
    link,
    pc_instance,
    two_bidder_secondary,
)


class TestAdmissionPacking:
    def test_threshold_value(self):
        # alpha=2, beta=1: 1 / (2 * 9 * 6) = 1/108
        assert admission_threshold(2.0, 1.0) == pytest.approx(1.0 / 108.0)

    def test_single_link_always_selected(self):
        inst = pc_instance([link(0, 0, 0, 1, 0)])
        alloc = unweighted_packing_pc({0}, inst)
        assert alloc.channel_winners[0] == frozenset({0})
        assert check_feasible(inst, alloc).ok

    def test_far_apart_equal_lengths_both_selected(self):
        inst = pc_instance([link(0, 0, 0, 1, 0), link(1, 1000, 0, 1001, 0)])
        alloc = unweighted_packing_pc({0, 1}, inst)
        assert alloc.winners == frozenset({0, 1})

    def test_far_apart_cross_terms_evaluated(self):
        # second link strictly longer so the admission sum is actually exercised
        inst = pc_instance([link(0, 0, 0, 1, 0), link(1, 1000, 0, 1001.2, 0)])
        # independent evaluation of the admission sum for link 1 against link 0
        d_short = 1.0
        toward_new = 1001.2  # sender 0 -> receiver 1
        toward_sel = 1000.0 - 1.0  # sender 1 -> receiver 0
        admission = d_short**2 / toward_new**2 + d_short**2 / toward_sel**2
        assert admission < admission_threshold(2.0, 1.0)
        assert admission == pytest.approx(2.0e-6, rel=0.05)
        alloc = unweighted_packing_pc({0, 1}, inst)
        assert alloc.winners == frozenset({0, 1})

    def test_equal_length_cluster_packs_jointly(self):
        # three co-located unit links: equal lengths never block each other,
        # so the admission rule packs them together and powers must still solve
        links = [link(i, 0, 0.001 * i, 1, 0.001 * i) for i in range(3)]
        inst = pc_instance(links, channels=2, beta=0.1)
        alloc = unweighted_packing_pc({0, 1, 2}, inst)
        assert check_feasible(inst, alloc).ok

    def test_output_always_power_solvable(self):
        for seed in range(25):
            inst = generate_instance(
                InstanceSpec(environment="pc", n=10, channels=2, area=30.0), seed
            )
            alloc = unweighted_packing_pc(set(range(10)), inst)
            assert check_feasible(inst, alloc).ok
            for group in alloc.channel_winners:
                if group:
                    assert solve_power_assignment(group, inst).feasible

    def test_wrong_environment_rejected(self):
        inst = conflict_instance(2, [])
        with pytest.raises(InputError):
            unweighted_packing_pc({0}, inst)

    def test_deterministic(self):
        inst = generate_instance(InstanceSpec(environment="pc", n=8, channels=2), 3)
        assert unweighted_packing_pc(set(range(8)), inst) == unweighted_packing_pc(
            set(range(8)), inst
        )


class TestConflictGreedy:
    def test_no_conflicts_selects_everyone(self):
        inst = conflict_instance(5, [])
        alloc = greedy_conflict_packing(set(range(5)), inst)
        assert alloc.winners == frozenset(range(5))

    def test_triangle(self):
        triangle = [(0, 1), (1, 2), (0, 2)]
        one = greedy_conflict_packing({0, 1, 2}, conflict_instance(3, triangle, channels=1))
        assert len(one.winners) == 1
        three = greedy_conflict_packing({0, 1, 2}, conflict_instance(3, triangle, channels=3))
        assert three.winners == frozenset({0, 1, 2})

    def test_path_graph_trace(self):
        # ids a=0, b=1, c=2: a takes channel 1, b blocked, c joins a
        inst = conflict_instance(3, [(0, 1), (1, 2)])
        alloc = greedy_conflict_packing({0, 1, 2}, inst)
        assert alloc.winners == frozenset({0, 2})

    def test_candidates_only(self):
        inst = conflict_instance(4, [])
        alloc = greedy_conflict_packing({1, 3}, inst)
        assert alloc.winners == frozenset({1, 3})


class TestFixedPowerGreedy:
    def test_solo_pass_selected(self):
        inst = fixed_instance([link(0, 0, 0, 1, 0)], base_power=10.0)
        alloc = fixed_power_greedy({0}, inst)
        assert alloc.winners == frozenset({0})
        assert check_feasible(inst, alloc).ok

    def test_noise_dominated_link_prediscarded(self):
        # solo SINR = 0.5/1 < beta = 1
        inst = fixed_instance([link(0, 0, 0, 1, 0)], base_power=0.5, noise=1.0)
        alloc = fixed_power_greedy({0}, inst)
        assert alloc.winners == frozenset()

    def test_random_output_feasible(self):
        for seed in range(10):
            inst = generate_instance(
                InstanceSpec(environment="fixed-power", n=6, channels=2, area=25.0), seed
            )
            alloc = fixed_power_greedy(set(range(6)), inst)
            assert check_feasible(inst, alloc).ok


class TestSecondaryGreedy:
    def test_single_edge_bidder_wins(self):
        inst = two_bidder_secondary(conflicting=False, channels=1)
        alloc = secondary_network_greedy({0}, inst)
        assert alloc.winners == frozenset({0})
        assert alloc.paths[0] == ((0, 1),)
        assert check_feasible(inst, alloc).ok

    def test_conflicting_pair_lower_id_wins(self):
        inst = two_bidder_secondary(conflicting=True, channels=1)
        alloc = secondary_network_greedy({0, 1}, inst)
        assert alloc.winners == frozenset({0})
        # a second channel resolves the conflict
        inst2 = two_bidder_secondary(conflicting=True, channels=2)
        alloc2 = secondary_network_greedy({0, 1}, inst2)
        assert alloc2.winners == frozenset({0, 1})
        assert check_feasible(inst2, alloc2).ok

    def test_grid_with_random_conflicts_feasible(self):
        for seed in range(8):
            inst = generate_instance(
                InstanceSpec(environment="secondary", n=4, channels=2, density=0.08), seed
            )
            alloc = secondary_network_greedy(set(range(4)), inst)
            assert check_feasible(inst, alloc).ok

    def test_own_path_self_conflicts_respected(self):
        # one bidder, forced two-edge path whose edges conflict with each other
        from specauction import BidderNetwork, SecondaryNetworkInstance

        bidder = BidderNetwork(
            id=0, nodes=(0, 1, 2), edges=((0, 1), (1, 2)), source=0, dest=2
        )
        conflict = frozenset({((0, 0), (0, 1))})
        one = SecondaryNetworkInstance(bidders=(bidder,), channels=1, conflict=conflict)
        assert secondary_network_greedy({0}, one).winners == frozenset()
        two = SecondaryNetworkInstance(bidders=(bidder,), channels=2, conflict=conflict)
        alloc = secondary_network_greedy({0}, two)
        assert alloc.winners == frozenset({0})
        assert check_feasible(two, alloc).ok


class TestMultichannelExtension:
    def test_single_channel_is_identity(self):
        inst = conflict_instance(4, [(0, 1)], channels=1)
        direct = greedy_conflict_packing(set(range(4)), inst)
        extended = extend_to_multichannel(CONFLICT_PACKER, set(range(4)), inst)
        assert extended == direct

    def test_empty_candidates(self):
        inst = conflict_instance(3, [], channels=2)
        alloc = extend_to_multichannel(CONFLICT_PACKER, set(), inst)
        assert alloc.winners == frozenset()

    def test_exact_subroutine_meets_bound(self):
        # with an exact single-channel subroutine the union is within 1 - 1/e
        bound = 1.0 - 1.0 / math.e
        sub = oracle_packer()
        for seed in range(6):
            inst = generate_instance(
                InstanceSpec(environment="conflict", n=8, channels=2, density=0.5), seed
            )
            alloc = extend_to_multichannel(sub, set(range(8)), inst)
            optimum = brute_force_max_cardinality(inst).best_value
            assert check_feasible(inst, alloc).ok
            assert len(alloc.winners) + 1e-9 >= bound * optimum

    def test_pc_extension_keeps_per_channel_powers(self):
        inst = generate_instance(
            InstanceSpec(environment="pc", n=8, channels=2, area=40.0), 12
        )
        alloc = extend_to_multichannel(PC_PACKER, set(range(8)), inst)
        assert check_feasible(inst, alloc).ok

    def test_secondary_not_supported(self):
        inst = two_bidder_secondary(channels=2)
        with pytest.raises(InputError):
            extend_to_multichannel(SECONDARY_PACKER, {0, 1}, inst)

    def test_advertised_quality(self):
        ext = extended_packer(oracle_packer())
        assert ext.psi == pytest.approx(1.0 - 1.0 / math.e)
        assert extended_packer(CONFLICT_PACKER).psi is None
