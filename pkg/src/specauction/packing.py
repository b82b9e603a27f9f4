"""Bid-blind channel packing subroutines.

Every packer maps a candidate set of bidders to a feasible allocation while
never looking at bids; the auction's truthfulness rests on that blindness.
Packers advertise a quality factor psi in (0, 1] when one is known: the
packer's winner count is at least psi times the largest feasible winner
count inside the candidate set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Mapping

from .model import (
    Allocation,
    AnyInstance,
    CONFLICT_GRAPH,
    ConflictGraph,
    FIXED_POWER,
    FixedPower,
    HEdge,
    InputError,
    Instance,
    POWER_CONTROL,
    PowerControl,
    SECONDARY_NETWORK,
    SecondaryNetworkInstance,
    sinr_ratio,
)
from .power import solve_power_assignment

LINK_ENVIRONMENTS = frozenset({POWER_CONTROL, FIXED_POWER, CONFLICT_GRAPH})


@dataclass(frozen=True)
class Packer:
    """A packing procedure plus its advertised quality factor.

    ``psi=None`` means no constant is claimed.  ``environments`` restricts
    which instance kinds the packer accepts (``None`` accepts all).
    """

    name: str
    fn: Callable[[set[int], AnyInstance], Allocation] = field(compare=False)
    psi: float | None = None
    environments: frozenset[str] | None = None

    def pack(self, candidates: Iterable[int], instance: AnyInstance) -> Allocation:
        if self.environments is not None and instance.kind not in self.environments:
            raise InputError(
                f"packer {self.name!r} does not support {instance.kind} instances"
            )
        return self.fn(set(candidates), instance)


def _require_ids(candidates: set[int], instance: AnyInstance) -> None:
    for i in candidates:
        if not 0 <= i < instance.n:
            raise InputError(f"unknown bidder id {i}")


def admission_threshold(alpha: float, beta: float) -> float:
    """Interference budget admitting a link next to shorter co-channel links."""
    return 1.0 / (2.0 * 3.0**alpha * (4.0 * beta + 2.0))


def unweighted_packing_pc(candidates: set[int], instance: Instance) -> Allocation:
    """Increasing-length admission packing for the power-control environment.

    Links are scanned in order of increasing length (ties by id).  A link is
    placed on the first channel where the already-selected strictly shorter
    links (s, r) keep the admission sum

        sum  d(s,r)**a / d(s,r')**a  +  d(s,r)**a / d(s',r)**a

    within the threshold; otherwise it is discarded.  Afterwards a power
    assignment is solved per channel; by construction one always exists.
    """
    if not isinstance(instance.environment, PowerControl):
        raise InputError("unweighted_packing_pc requires the power-control environment")
    _require_ids(candidates, instance)

    lengths = instance.lengths
    length_gain = instance.length_gain
    cross_gain = instance.cross_gain
    threshold = admission_threshold(instance.params.alpha, instance.params.beta)

    order = sorted(candidates, key=lambda i: (lengths[i], i))
    channels: list[list[int]] = [[] for _ in range(instance.channels)]
    for new in order:
        new_len = lengths[new]
        for group in channels:
            admission = 0.0
            for sel in group:
                if not lengths[sel] < new_len:
                    continue  # equal-length links contribute nothing
                toward_new = cross_gain[sel, new]
                toward_sel = cross_gain[new, sel]
                if toward_new == 0.0 or toward_sel == 0.0:
                    admission = math.inf
                    break
                admission += length_gain[sel] / toward_new + length_gain[sel] / toward_sel
            if admission <= threshold:
                group.append(new)
                break

    powers: dict[int, float] = {}
    for group in channels:
        if not group:
            continue
        solved = solve_power_assignment(group, instance)
        if not solved.feasible:
            raise RuntimeError(
                "admission-packed channel has no feasible power assignment "
                f"(links {sorted(group)}); this should be impossible for "
                "instances with positive noise"
            )
        assert solved.powers is not None
        powers.update(solved.powers)
    return Allocation(tuple(frozenset(g) for g in channels), powers=powers)


def greedy_conflict_packing(candidates: set[int], instance: Instance) -> Allocation:
    """First-fit greedy for conflict-graph instances, bidders in ascending id."""
    graph = instance.environment
    if not isinstance(graph, ConflictGraph):
        raise InputError("greedy_conflict_packing requires the conflict-graph environment")
    _require_ids(candidates, instance)

    channels: list[set[int]] = [set() for _ in range(instance.channels)]
    for i in sorted(candidates):
        for group in channels:
            if not any(graph.adjacent(i, j) for j in group):
                group.add(i)
                break
    return Allocation(tuple(frozenset(g) for g in channels))


def fixed_solo_feasible(instance: Instance, link_id: int) -> bool:
    """Whether a link meets the SINR threshold alone under its scheme power."""
    env = instance.environment
    if not isinstance(env, FixedPower):
        raise InputError("fixed_solo_feasible requires the fixed-power environment")
    power = float(instance.fixed_powers[link_id])
    ratio = sinr_ratio(instance, link_id, {link_id}, {link_id: power})
    return ratio >= instance.params.beta


def fixed_power_greedy(candidates: set[int], instance: Instance) -> Allocation:
    """Increasing-length greedy for fixed-power instances.

    Links that cannot overcome noise alone are pre-discarded.  A link joins
    the first channel where it and every already-selected link on that channel
    still meet the threshold under the scheme powers.
    """
    if not isinstance(instance.environment, FixedPower):
        raise InputError("fixed_power_greedy requires the fixed-power environment")
    _require_ids(candidates, instance)

    scheme = instance.fixed_powers
    beta = instance.params.beta
    viable = [i for i in candidates if fixed_solo_feasible(instance, i)]
    order = sorted(viable, key=lambda i: (instance.lengths[i], i))

    channels: list[list[int]] = [[] for _ in range(instance.channels)]
    for new in order:
        for group in channels:
            trial = group + [new]
            powers = {i: float(scheme[i]) for i in trial}
            if all(sinr_ratio(instance, i, trial, powers) >= beta for i in trial):
                group.append(new)
                break

    winners = [i for group in channels for i in group]
    powers = {i: float(scheme[i]) for i in winners}
    return Allocation(tuple(frozenset(g) for g in channels), powers=powers)


def find_secondary_path(
    instance: SecondaryNetworkInstance,
    bidder_id: int,
    committed: Mapping[HEdge, int],
) -> tuple[tuple[int, int], ...] | None:
    """Fewest-edge source-to-destination path with greedy per-edge channels.

    Breadth-first search over nodes; each tree edge takes the lowest channel
    that conflicts neither with the committed edges nor with the edges already
    on its own tree path.  Returns ``((edge index, channel), ...)`` or None.
    """
    if not 0 <= bidder_id < instance.n:
        raise InputError(f"unknown bidder id {bidder_id}")
    bidder = instance.bidders[bidder_id]
    if bidder.source == bidder.dest:
        return ()

    out_edges = instance.out_edges[bidder_id]
    adjacency = instance.conflict_adjacency
    k = instance.channels

    # parent[node] = (previous node, edge index, channel); source maps to None
    parent: dict[int, tuple[int, int, int] | None] = {bidder.source: None}
    queue = [bidder.source]
    while queue:
        next_queue = []
        for u in queue:
            for edge_idx, v in out_edges.get(u, ()):
                if v in parent:
                    continue
                neighbours = adjacency.get((bidder_id, edge_idx), frozenset())
                blocked = set()
                for vertex, chan in committed.items():
                    if vertex in neighbours:
                        blocked.add(chan)
                back = parent[u]
                while back is not None:
                    prev_node, prev_edge, prev_chan = back
                    if (bidder_id, prev_edge) in neighbours:
                        blocked.add(prev_chan)
                    back = parent[prev_node]
                channel = next((c for c in range(1, k + 1) if c not in blocked), None)
                if channel is None:
                    continue
                parent[v] = (u, edge_idx, channel)
                if v == bidder.dest:
                    path: list[tuple[int, int]] = []
                    step: tuple[int, int, int] | None = parent[v]
                    while step is not None:
                        prev_node, edge, chan = step
                        path.append((edge, chan))
                        step = parent[prev_node]
                    path.reverse()
                    return tuple(path)
                next_queue.append(v)
        queue = next_queue
    return None


def secondary_network_greedy(
    candidates: set[int], instance: SecondaryNetworkInstance
) -> Allocation:
    """Greedy path allocation for secondary networks, bidders in ascending id."""
    if not isinstance(instance, SecondaryNetworkInstance):
        raise InputError("secondary_network_greedy requires a secondary-network instance")
    _require_ids(candidates, instance)

    committed: dict[HEdge, int] = {}
    paths: dict[int, tuple[tuple[int, int], ...]] = {}
    for i in sorted(candidates):
        path = find_secondary_path(instance, i, committed)
        if path is None:
            continue
        paths[i] = path
        for edge_idx, channel in path:
            committed[(i, edge_idx)] = channel

    channels: list[set[int]] = [set() for _ in range(instance.channels)]
    for winner, path in paths.items():
        channel = path[0][1] if path else 1
        channels[channel - 1].add(winner)
    return Allocation(tuple(frozenset(g) for g in channels), paths=paths)


def extend_to_multichannel(
    single_channel_alg: Packer,
    candidates: set[int],
    instance: Instance,
) -> Allocation:
    """Fill channels one by one with a single-channel packer.

    Round j runs the packer on the bidders not selected in earlier rounds and
    assigns its output to channel j.  If the packer is a psi-approximation for
    one channel, the union is a ((1 - 1/e) * psi)-approximation for k channels.
    Only link environments are supported: a secondary-network winner's path may
    spread over several channels, which breaks the one-channel-per-round shape.
    """
    if isinstance(instance, SecondaryNetworkInstance):
        raise InputError("extend_to_multichannel does not support secondary networks")
    _require_ids(candidates, instance)

    base = replace(instance, channels=1)
    remaining = set(candidates)
    groups: list[frozenset[int]] = []
    powers: dict[int, float] = {}
    for _ in range(instance.channels):
        round_alloc = single_channel_alg.pack(remaining, base)
        selected = round_alloc.channel_winners[0]
        groups.append(selected)
        if round_alloc.powers is not None:
            powers.update({i: round_alloc.powers[i] for i in selected})
        remaining -= selected
    return Allocation(tuple(groups), powers=powers or None)


PC_PACKER = Packer(
    name="pc",
    fn=unweighted_packing_pc,
    psi=None,  # a constant exists but no numeric value is claimed
    environments=frozenset({POWER_CONTROL}),
)

CONFLICT_PACKER = Packer(
    name="conflict",
    fn=greedy_conflict_packing,
    psi=None,
    environments=frozenset({CONFLICT_GRAPH}),
)

FIXED_POWER_PACKER = Packer(
    name="fixed-power",
    fn=fixed_power_greedy,
    psi=None,
    environments=frozenset({FIXED_POWER}),
)

SECONDARY_PACKER = Packer(
    name="secondary",
    fn=secondary_network_greedy,
    psi=None,
    environments=frozenset({SECONDARY_NETWORK}),
)


def extended_packer(single_channel_alg: Packer) -> Packer:
    """Multi-channel packer built from a single-channel one, quality (1-1/e)*psi."""
    psi = None
    if single_channel_alg.psi is not None:
        psi = (1.0 - 1.0 / math.e) * single_channel_alg.psi
    environments = LINK_ENVIRONMENTS
    if single_channel_alg.environments is not None:
        environments = environments & single_channel_alg.environments
    return Packer(
        name=f"extend:{single_channel_alg.name}",
        fn=lambda m, inst: extend_to_multichannel(single_channel_alg, m, inst),
        psi=psi,
        environments=environments,
    )
