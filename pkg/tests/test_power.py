import pytest

from specauction import InputError, solve_power_assignment
from specauction.model import Link

from conftest import conflict_instance, link, pc_instance, spread_links


def test_single_link_equality_solution():
    # one equation, one unknown: sigma = beta * noise * d**alpha = 1
    inst = pc_instance([link(0, 0, 0, 1, 0)], alpha=2.0, beta=1.0, noise=1.0)
    result = solve_power_assignment({0}, inst)
    assert result.feasible
    assert result.powers[0] == pytest.approx(1.0)
    assert result.residuals[0] == pytest.approx(0.0, abs=1e-12)


def test_colocated_pair_infeasible():
    # identical links: symmetry forces x = beta*(noise+x), no positive solution
    links = (
        link(0, 0, 0, 0, 1),
        Link(id=1, sender=(0.0, 0.0), receiver=(0.0, 1.0)),
    )
    inst = pc_instance(links, alpha=2.0, beta=1.0, noise=1.0)
    result = solve_power_assignment({0, 1}, inst)
    assert not result.feasible
    assert result.powers is None


def test_well_separated_triple_feasible_with_tight_residuals():
    inst = pc_instance(spread_links(3, seed=7), alpha=2.5, beta=1.5, noise=1.0)
    result = solve_power_assignment({0, 1, 2}, inst)
    assert result.feasible
    beta = inst.params.beta
    for sigma in result.powers.values():
        assert sigma > 0
    for residual in result.residuals.values():
        assert residual >= -1e-9 * beta


def test_subset_of_feasible_set_stays_feasible():
    inst = pc_instance(spread_links(4, seed=21))
    full = solve_power_assignment(range(4), inst)
    assert full.feasible
    for drop in range(4):
        rest = set(range(4)) - {drop}
        assert solve_power_assignment(rest, inst).feasible


def test_distance_scaling_preserves_status_without_noise():
    # the coupling matrix is scale-free, so the zero-noise status cannot move
    for seed in (1, 2, 3):
        base_links = spread_links(3, seed, spacing=8.0)
        scaled = [
            link(l.id, 10 * l.sender[0], 10 * l.sender[1], 10 * l.receiver[0], 10 * l.receiver[1])
            for l in base_links
        ]
        a = pc_instance(base_links, noise=0.0)
        b = pc_instance(scaled, noise=0.0)
        assert (
            solve_power_assignment(range(3), a).feasible
            == solve_power_assignment(range(3), b).feasible
        )


def test_zero_noise_equality_solve_reports_infeasible():
    # the equality system collapses to x = 0 at zero noise; there is no
    # component-wise minimal positive assignment to return
    inst = pc_instance([link(0, 0, 0, 1, 0)], noise=0.0)
    assert not solve_power_assignment({0}, inst).feasible


def test_input_errors():
    inst = pc_instance([link(0, 0, 0, 1, 0)])
    with pytest.raises(InputError):
        solve_power_assignment(set(), inst)
    with pytest.raises(InputError):
        solve_power_assignment({3}, inst)
    graph_inst = conflict_instance(2, [])
    with pytest.raises(InputError):
        solve_power_assignment({0}, graph_inst)
