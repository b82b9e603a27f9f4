"""Domain model for secondary spectrum allocation.

Bidders request the use of one of several identical channels.  Four
interference environments are supported:

* ``power-control``   -- links in the plane, transmit powers are free
  variables, success is a signal-to-interference-plus-noise (SINR) test.
* ``fixed-power``     -- links in the plane, powers fixed by a scheme
  (uniform / linear / square-root of link length).
* ``conflict-graph``  -- binary interference: adjacent links may not share
  a channel.
* ``secondary-network`` -- each bidder owns a directed graph and wins by
  receiving a source-to-destination path whose edges carry per-edge channel
  labels that avoid a global edge-conflict graph.

All environments share the packing structure that makes the auction work:
removing a winner from a feasible allocation never breaks feasibility for
the remaining winners (downward closure).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import ClassVar, Iterable, Mapping

import numpy as np


class InputError(ValueError):
    """An operation was called outside its contract (bad ids, ranges, modes)."""


POWER_CONTROL = "power-control"
FIXED_POWER = "fixed-power"
CONFLICT_GRAPH = "conflict-graph"
SECONDARY_NETWORK = "secondary-network"

FIXED_POWER_SCHEMES = ("uniform", "linear", "square-root")

#: Relative slack applied to the SINR threshold when re-checking solved powers.
DEFAULT_RELATIVE_TOLERANCE = 1e-9


@dataclass(frozen=True)
class Link:
    """A transmission request: sender and receiver points in the plane."""

    id: int
    sender: tuple[float, float]
    receiver: tuple[float, float]

    def __post_init__(self) -> None:
        if tuple(self.sender) == tuple(self.receiver):
            raise InputError(f"link {self.id}: sender and receiver coincide")

    @property
    def length(self) -> float:
        return math.dist(self.sender, self.receiver)


@dataclass(frozen=True)
class PhysicalParams:
    """Path-loss exponent, SINR threshold and ambient noise."""

    alpha: float
    beta: float
    noise: float

    def __post_init__(self) -> None:
        if not self.alpha > 1:
            raise InputError(f"alpha must exceed 1, got {self.alpha}")
        if not self.beta > 0:
            raise InputError(f"beta must be positive, got {self.beta}")
        if self.noise < 0:
            raise InputError(f"noise must be nonnegative, got {self.noise}")


@dataclass(frozen=True)
class PowerControl:
    """SINR environment with transmit powers as free variables."""

    kind: ClassVar[str] = POWER_CONTROL


@dataclass(frozen=True)
class FixedPower:
    """SINR environment with powers fixed by a named scheme.

    ``uniform`` assigns every link the base power, ``linear`` scales it with
    length**alpha, ``square-root`` with length**(alpha/2).
    """

    scheme: str
    base_power: float

    kind: ClassVar[str] = FIXED_POWER

    def __post_init__(self) -> None:
        if self.scheme not in FIXED_POWER_SCHEMES:
            raise InputError(f"unknown fixed-power scheme {self.scheme!r}")
        if not self.base_power > 0:
            raise InputError("base_power must be positive")


@dataclass(frozen=True)
class ConflictGraph:
    """Binary interference: an edge forbids co-channel use of its endpoints."""

    edges: frozenset[tuple[int, int]]

    kind: ClassVar[str] = CONFLICT_GRAPH

    def __post_init__(self) -> None:
        for a, b in self.edges:
            if a == b:
                raise InputError(f"conflict graph has a self-loop at {a}")
            if a > b:
                raise InputError("conflict edges must be stored as (low, high) pairs")

    @staticmethod
    def from_pairs(pairs: Iterable[tuple[int, int]]) -> "ConflictGraph":
        """Normalise arbitrary symmetric pairs into the canonical edge set."""
        edges = frozenset((min(a, b), max(a, b)) for a, b in pairs)
        return ConflictGraph(edges)

    def adjacent(self, i: int, j: int) -> bool:
        return (min(i, j), max(i, j)) in self.edges


Environment = PowerControl | FixedPower | ConflictGraph


@dataclass(frozen=True)
class Instance:
    """A link-based auction instance: geometry, channel count, environment."""

    links: tuple[Link, ...]
    channels: int
    params: PhysicalParams
    environment: Environment

    def __post_init__(self) -> None:
        if len(self.links) < 1:
            raise InputError("an instance needs at least one link")
        if self.channels < 1:
            raise InputError("an instance needs at least one channel")
        for pos, link in enumerate(self.links):
            if link.id != pos:
                raise InputError("link ids must be contiguous from 0 in order")
        if isinstance(self.environment, ConflictGraph):
            n = len(self.links)
            for a, b in self.environment.edges:
                if not (0 <= a < n and 0 <= b < n):
                    raise InputError(f"conflict edge ({a},{b}) references unknown links")

    @property
    def n(self) -> int:
        return len(self.links)

    @property
    def kind(self) -> str:
        return self.environment.kind

    @cached_property
    def lengths(self) -> np.ndarray:
        return np.array([link.length for link in self.links])

    @cached_property
    def cross_distance(self) -> np.ndarray:
        """``cross_distance[j, i]`` is the distance from sender j to receiver i."""
        senders = np.array([link.sender for link in self.links])
        receivers = np.array([link.receiver for link in self.links])
        diff = senders[:, None, :] - receivers[None, :, :]
        return np.sqrt((diff**2).sum(axis=2))

    @cached_property
    def cross_gain(self) -> np.ndarray:
        """``cross_distance ** alpha``; the path-loss denominator matrix."""
        return self.cross_distance**self.params.alpha

    @cached_property
    def length_gain(self) -> np.ndarray:
        """``lengths ** alpha`` per link."""
        return self.lengths**self.params.alpha

    @cached_property
    def fixed_powers(self) -> np.ndarray:
        """Per-link transmit power under the fixed-power scheme."""
        env = self.environment
        if not isinstance(env, FixedPower):
            raise InputError("fixed_powers is only defined for fixed-power instances")
        if env.scheme == "uniform":
            return np.full(self.n, env.base_power)
        if env.scheme == "linear":
            return env.base_power * self.length_gain
        return env.base_power * self.lengths ** (self.params.alpha / 2.0)


HEdge = tuple[int, int]  # (bidder id, edge index): a vertex of the conflict graph H


@dataclass(frozen=True)
class BidderNetwork:
    """One bidder's directed graph with designated source and destination."""

    id: int
    nodes: tuple[int, ...]
    edges: tuple[tuple[int, int], ...]
    source: int
    dest: int

    def __post_init__(self) -> None:
        node_set = set(self.nodes)
        if self.source not in node_set or self.dest not in node_set:
            raise InputError(f"bidder {self.id}: source/destination not in node set")
        for u, v in self.edges:
            if u not in node_set or v not in node_set:
                raise InputError(f"bidder {self.id}: edge ({u},{v}) leaves the node set")


@dataclass(frozen=True)
class SecondaryNetworkInstance:
    """Path-auction instance: per-bidder graphs plus a global edge conflict graph.

    Vertices of the conflict relation are ``(bidder id, edge index)`` pairs;
    two co-channel edges joined by a conflict pair may not be used together.
    """

    bidders: tuple[BidderNetwork, ...]
    channels: int
    conflict: frozenset[tuple[HEdge, HEdge]]

    kind: ClassVar[str] = SECONDARY_NETWORK

    def __post_init__(self) -> None:
        if len(self.bidders) < 1:
            raise InputError("an instance needs at least one bidder")
        if self.channels < 1:
            raise InputError("an instance needs at least one channel")
        for pos, bidder in enumerate(self.bidders):
            if bidder.id != pos:
                raise InputError("bidder ids must be contiguous from 0 in order")
        for a, b in self.conflict:
            if a == b:
                raise InputError(f"conflict graph has a self-loop at {a}")
            if a > b:
                raise InputError("conflict pairs must be stored as (low, high) pairs")
            for bidder_id, edge_idx in (a, b):
                if not 0 <= bidder_id < len(self.bidders):
                    raise InputError(f"conflict pair references unknown bidder {bidder_id}")
                if not 0 <= edge_idx < len(self.bidders[bidder_id].edges):
                    raise InputError(
                        f"conflict pair references unknown edge {edge_idx} of bidder {bidder_id}"
                    )

    @property
    def n(self) -> int:
        return len(self.bidders)

    @cached_property
    def conflict_adjacency(self) -> dict[HEdge, frozenset[HEdge]]:
        adj: dict[HEdge, set[HEdge]] = {}
        for a, b in self.conflict:
            adj.setdefault(a, set()).add(b)
            adj.setdefault(b, set()).add(a)
        return {v: frozenset(s) for v, s in adj.items()}

    @cached_property
    def out_edges(self) -> tuple[dict[int, tuple[tuple[int, int], ...]], ...]:
        """Per bidder: node -> ((edge index, head node), ...) in edge order."""
        table = []
        for bidder in self.bidders:
            out: dict[int, list[tuple[int, int]]] = {}
            for idx, (u, v) in enumerate(bidder.edges):
                out.setdefault(u, []).append((idx, v))
            table.append({u: tuple(lst) for u, lst in out.items()})
        return tuple(table)


AnyInstance = Instance | SecondaryNetworkInstance


@dataclass(frozen=True)
class Allocation:
    """Per-channel winner sets, with powers (SINR modes) or paths (network mode).

    Each winner appears on exactly one channel.  In the secondary-network
    environment the real channel assignment lives on path edges; the winner
    is listed on the channel of its first path edge (channel 1 for an empty
    path) purely as a bookkeeping convention.
    """

    channel_winners: tuple[frozenset[int], ...]
    powers: Mapping[int, float] | None = None
    paths: Mapping[int, tuple[tuple[int, int], ...]] | None = None

    def __post_init__(self) -> None:
        seen: set[int] = set()
        for group in self.channel_winners:
            overlap = seen & group
            if overlap:
                raise InputError(f"winners {sorted(overlap)} appear on more than one channel")
            seen |= group

    @staticmethod
    def empty(channels: int) -> "Allocation":
        return Allocation(tuple(frozenset() for _ in range(channels)))

    @cached_property
    def winners(self) -> frozenset[int]:
        result: set[int] = set()
        for group in self.channel_winners:
            result |= group
        return frozenset(result)

    def channel_of(self, bidder: int) -> int:
        """1-based channel of a winner."""
        for j, group in enumerate(self.channel_winners):
            if bidder in group:
                return j + 1
        raise InputError(f"bidder {bidder} is not a winner")


@dataclass(frozen=True)
class FeasibilityReport:
    """Outcome of a feasibility check with one entry per violated constraint."""

    ok: bool
    violations: tuple[str, ...]

    def __bool__(self) -> bool:
        return self.ok


def sinr_ratio(
    instance: Instance,
    link_id: int,
    co_channel: Iterable[int],
    powers: Mapping[int, float],
) -> float:
    """Signal-to-interference-plus-noise ratio of one link among co-channel links.

    Returns ``(p_i / d_ii**alpha) / (noise + sum_j p_j / d_ji**alpha)`` over the
    other members of ``co_channel``; ``+inf`` when the denominator is zero
    (no noise and no interferers).
    """
    if isinstance(instance, SecondaryNetworkInstance):
        raise InputError("sinr_ratio is undefined for secondary-network instances")
    group = set(co_channel)
    n = instance.n
    for j in group:
        if not 0 <= j < n:
            raise InputError(f"unknown link id {j}")
        if j not in powers:
            raise InputError(f"missing power for link {j}")
        if not powers[j] > 0:
            raise InputError(f"nonpositive power for link {j}")
    if link_id not in group:
        raise InputError(f"link {link_id} is not in the co-channel set")

    gain = instance.cross_gain
    signal = powers[link_id] / instance.length_gain[link_id]
    interference = 0.0
    for j in group:
        if j == link_id:
            continue
        d = gain[j, link_id]
        if d == 0.0:
            return 0.0  # interferer sits on top of the receiver
        interference += powers[j] / d
    denom = instance.params.noise + interference
    if denom == 0.0:
        return math.inf
    return signal / denom


def _sinr_tolerance(instance: Instance, tolerance: float | None) -> float:
    if tolerance is None:
        return DEFAULT_RELATIVE_TOLERANCE * instance.params.beta
    if tolerance < 0:
        raise InputError("tolerance must be nonnegative")
    return tolerance


def _check_structure(instance: AnyInstance, allocation: Allocation) -> None:
    if len(allocation.channel_winners) != instance.channels:
        raise InputError(
            f"allocation has {len(allocation.channel_winners)} channels, "
            f"instance has {instance.channels}"
        )
    for winner in allocation.winners:
        if not 0 <= winner < instance.n:
            raise InputError(f"allocation references unknown bidder {winner}")


def _check_sinr(
    instance: Instance, allocation: Allocation, tolerance: float | None
) -> list[str]:
    tol = _sinr_tolerance(instance, tolerance)
    beta = instance.params.beta
    powers = allocation.powers
    if powers is None:
        if allocation.winners:
            raise InputError("SINR-mode allocations must carry a power assignment")
        powers = {}
    for winner in allocation.winners:
        if winner not in powers:
            raise InputError(f"missing power for winner {winner}")
        if not powers[winner] > 0:
            raise InputError(f"nonpositive power for winner {winner}")

    violations = []
    if isinstance(instance.environment, FixedPower):
        scheme = instance.fixed_powers
        for winner in sorted(allocation.winners):
            expected = scheme[winner]
            if abs(powers[winner] - expected) > DEFAULT_RELATIVE_TOLERANCE * expected:
                violations.append(
                    f"link {winner}: power {powers[winner]} differs from the "
                    f"scheme power {expected}"
                )
    for j, group in enumerate(allocation.channel_winners):
        for winner in sorted(group):
            ratio = sinr_ratio(instance, winner, group, powers)
            if ratio < beta - tol:
                violations.append(
                    f"link {winner} on channel {j + 1}: SINR {ratio:.6g} below "
                    f"threshold {beta:.6g}"
                )
    return violations


def _check_conflict(instance: Instance, allocation: Allocation) -> list[str]:
    graph = instance.environment
    assert isinstance(graph, ConflictGraph)
    violations = []
    for j, group in enumerate(allocation.channel_winners):
        members = sorted(group)
        for a_pos, a in enumerate(members):
            for b in members[a_pos + 1 :]:
                if graph.adjacent(a, b):
                    violations.append(
                        f"links {a} and {b} conflict but share channel {j + 1}"
                    )
    return violations


def _check_secondary(
    instance: SecondaryNetworkInstance, allocation: Allocation
) -> list[str]:
    paths = allocation.paths
    if paths is None:
        if allocation.winners:
            raise InputError("secondary-network allocations must carry paths")
        paths = {}
    violations = []
    used: list[tuple[HEdge, int, int]] = []  # (H vertex, channel, owner)
    for winner in sorted(allocation.winners):
        if winner not in paths:
            raise InputError(f"missing path for winner {winner}")
        bidder = instance.bidders[winner]
        at = bidder.source
        for edge_idx, channel in paths[winner]:
            if not 0 <= edge_idx < len(bidder.edges):
                raise InputError(
                    f"winner {winner}: path references unknown edge {edge_idx}"
                )
            if not 1 <= channel <= instance.channels:
                violations.append(
                    f"winner {winner}: edge {edge_idx} uses invalid channel {channel}"
                )
            u, v = bidder.edges[edge_idx]
            if u != at:
                violations.append(
                    f"winner {winner}: path breaks at node {at} (edge {edge_idx} "
                    f"starts at {u})"
                )
            at = v
            used.append(((winner, edge_idx), channel, winner))
        if at != bidder.dest:
            violations.append(
                f"winner {winner}: path ends at node {at}, not destination "
                f"{bidder.dest}"
            )
    adjacency = instance.conflict_adjacency
    for pos, (vertex_a, chan_a, _) in enumerate(used):
        neighbours = adjacency.get(vertex_a)
        if not neighbours:
            continue
        for vertex_b, chan_b, _ in used[pos + 1 :]:
            if chan_a == chan_b and vertex_b in neighbours:
                violations.append(
                    f"edges {vertex_a} and {vertex_b} conflict but share "
                    f"channel {chan_a}"
                )
    return violations


def check_feasible(
    instance: AnyInstance,
    allocation: Allocation,
    tolerance: float | None = None,
) -> FeasibilityReport:
    """Verify an allocation against its environment's interference constraints.

    SINR modes check every winner's ratio against ``beta - tolerance`` (the
    default tolerance is 1e-9 relative to beta); the conflict-graph mode checks
    co-channel adjacency; the secondary-network mode checks path connectivity
    and co-channel edge conflicts.  The report lists every violated constraint.
    """
    _check_structure(instance, allocation)
    if isinstance(instance, SecondaryNetworkInstance):
        violations = _check_secondary(instance, allocation)
    elif isinstance(instance.environment, ConflictGraph):
        violations = _check_conflict(instance, allocation)
    else:
        violations = _check_sinr(instance, allocation, tolerance)
    return FeasibilityReport(ok=not violations, violations=tuple(violations))


def remove_winner(allocation: Allocation, removed: int) -> Allocation:
    """Allocation with one winner (and its power/path) deleted, rest untouched."""
    if removed not in allocation.winners:
        raise InputError(f"bidder {removed} is not a winner")
    channels = tuple(group - {removed} for group in allocation.channel_winners)
    powers = None
    if allocation.powers is not None:
        powers = {i: p for i, p in allocation.powers.items() if i != removed}
    paths = None
    if allocation.paths is not None:
        paths = {i: p for i, p in allocation.paths.items() if i != removed}
    return Allocation(channels, powers=powers, paths=paths)


def downward_closure_probe(
    instance: AnyInstance,
    allocation: Allocation,
    removed: int,
    tolerance: float | None = None,
) -> bool:
    """Check that deleting one winner keeps the allocation feasible.

    Powers and paths of the remaining winners are left unchanged: interference
    only decreases, so this must always return True in every environment.
    """
    reduced = remove_winner(allocation, removed)
    return bool(check_feasible(instance, reduced, tolerance))
