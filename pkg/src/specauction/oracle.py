"""Exact solvers for small instances, used as ground truth in tests.

Subsets of bidders are enumerated in decreasing total-value order; the first
feasible subset is optimal because feasibility is downward closed.  Multi-
channel feasibility of a subset is decided by a memoised split search that
pins the lowest-id member to the first channel, cutting the channel-relabeling
symmetry.  Everything is deterministic: ties between equal-value subsets go to
the lexicographically smallest id sequence.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

from .model import (
    Allocation,
    AnyInstance,
    ConflictGraph,
    DEFAULT_RELATIVE_TOLERANCE,
    FixedPower,
    InputError,
    Instance,
    PowerControl,
    SecondaryNetworkInstance,
    sinr_ratio,
)
from .packing import Packer
from .power import solve_power_assignment

DEFAULT_BIDDER_LIMIT = 14
DEFAULT_CHANNEL_LIMIT = 3
SECONDARY_PATH_LIMIT = 2048


class OracleLimitError(InputError):
    """The instance exceeds the oracle's enumeration limits."""


@dataclass(frozen=True)
class OracleResult:
    """Optimal value, a witness allocation achieving it, and search effort."""

    best_value: float
    witness: Allocation
    explored: int


def _bits(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


class _LinkChecker:
    """Memoised subset feasibility for link-based environments (bitmasks)."""

    def __init__(self, instance: Instance):
        self.instance = instance
        self._single: dict[int, bool] = {0: True}
        self._split: dict[tuple[int, int], int | None] = {}
        env = instance.environment
        self._adjacency: list[int] | None = None
        if isinstance(env, ConflictGraph):
            adjacency = [0] * instance.n
            for a, b in env.edges:
                adjacency[a] |= 1 << b
                adjacency[b] |= 1 << a
            self._adjacency = adjacency

    def single(self, mask: int) -> bool:
        cached = self._single.get(mask)
        if cached is not None:
            return cached
        ids = _bits(mask)
        env = self.instance.environment
        if self._adjacency is not None:
            ok = all(self._adjacency[i] & mask == 0 for i in ids)
        elif isinstance(env, PowerControl):
            ok = solve_power_assignment(ids, self.instance).feasible
        else:
            assert isinstance(env, FixedPower)
            inst = self.instance
            beta = inst.params.beta
            tol = DEFAULT_RELATIVE_TOLERANCE * beta
            powers = {i: float(inst.fixed_powers[i]) for i in ids}
            ok = all(sinr_ratio(inst, i, ids, powers) >= beta - tol for i in ids)
        self._single[mask] = ok
        return ok

    def multi(self, mask: int, k: int) -> bool:
        """Can ``mask`` be partitioned into at most k single-channel sets?"""
        if mask == 0:
            return True
        if k == 1:
            return self.single(mask)
        key = (mask, k)
        if key in self._split:
            return self._split[key] is not None
        low = mask & -mask
        rest = mask ^ low
        sub = rest
        while True:
            group = low | sub
            if self.single(group) and self.multi(mask ^ group, k - 1):
                self._split[key] = group
                return True
            if sub == 0:
                break
            sub = (sub - 1) & rest
        self._split[key] = None
        return False

    def split(self, mask: int, k: int) -> list[int]:
        """Channel masks for a subset known to be feasible at k channels."""
        groups: list[int] = []
        current = mask
        for level in range(k, 1, -1):
            if current == 0:
                groups.append(0)
                continue
            chosen = self._split[(current, level)]
            assert chosen is not None
            groups.append(chosen)
            current ^= chosen
        groups.append(current)
        return groups

    def witness(self, mask: int) -> Allocation:
        instance = self.instance
        group_masks = self.split(mask, instance.channels)
        groups = tuple(frozenset(_bits(g)) for g in group_masks)
        env = instance.environment
        if isinstance(env, PowerControl):
            powers: dict[int, float] = {}
            for group in groups:
                if not group:
                    continue
                solved = solve_power_assignment(group, instance)
                assert solved.feasible and solved.powers is not None
                powers.update(solved.powers)
            return Allocation(groups, powers=powers)
        if isinstance(env, FixedPower):
            powers = {i: float(instance.fixed_powers[i]) for g in groups for i in g}
            return Allocation(groups, powers=powers)
        return Allocation(groups)


class _SecondaryChecker:
    """Memoised subset feasibility for secondary networks.

    For a bidder subset, search over each bidder's simple paths and over
    per-edge channel choices, backtracking across both.
    """

    def __init__(self, instance: SecondaryNetworkInstance):
        self.instance = instance
        self.adjacency = instance.conflict_adjacency
        self.paths: list[tuple[tuple[int, ...], ...]] = [
            self._simple_paths(i) for i in range(instance.n)
        ]
        self._memo: dict[int, dict[int, tuple[tuple[int, int], ...]] | None] = {}

    def _simple_paths(self, bidder_id: int) -> tuple[tuple[int, ...], ...]:
        bidder = self.instance.bidders[bidder_id]
        out_edges = self.instance.out_edges[bidder_id]
        found: list[tuple[int, ...]] = []
        if bidder.source == bidder.dest:
            found.append(())

        def walk(node: int, visited: set[int], trail: list[int]) -> None:
            if len(found) > SECONDARY_PATH_LIMIT:
                raise OracleLimitError(
                    f"bidder {bidder_id} has more than {SECONDARY_PATH_LIMIT} simple paths"
                )
            for edge_idx, head in out_edges.get(node, ()):
                if head in visited:
                    continue
                trail.append(edge_idx)
                if head == bidder.dest:
                    found.append(tuple(trail))
                else:
                    visited.add(head)
                    walk(head, visited, trail)
                    visited.remove(head)
                trail.pop()

        if bidder.source != bidder.dest:
            walk(bidder.source, {bidder.source}, [])
        return tuple(sorted(found, key=lambda p: (len(p), p)))

    def _colorings(self, bidder: int, path: tuple[int, ...], used: dict):
        """Yield channel tuples for ``path``; ``used`` holds them while yielded."""
        k = self.instance.channels

        def rec(pos: int, acc: list[int]):
            if pos == len(path):
                yield tuple(acc)
                return
            vertex = (bidder, path[pos])
            neighbours = self.adjacency.get(vertex, frozenset())
            for channel in range(1, k + 1):
                if any(used.get(v) == channel for v in neighbours):
                    continue
                used[vertex] = channel
                acc.append(channel)
                yield from rec(pos + 1, acc)
                del used[vertex]
                acc.pop()

        yield from rec(0, [])

    def feasible(self, mask: int) -> bool:
        return self.assignment(mask) is not None

    def assignment(self, mask: int) -> dict[int, tuple[tuple[int, int], ...]] | None:
        if mask in self._memo:
            return self._memo[mask]
        ids = _bits(mask)
        used: dict[tuple[int, int], int] = {}
        chosen: dict[int, tuple[tuple[int, int], ...]] = {}

        def place(pos: int) -> bool:
            if pos == len(ids):
                return True
            bidder = ids[pos]
            for path in self.paths[bidder]:
                for colors in self._colorings(bidder, path, used):
                    chosen[bidder] = tuple(zip(path, colors))
                    if place(pos + 1):
                        return True
                    del chosen[bidder]
            return False

        result = dict(chosen) if place(0) else None
        self._memo[mask] = result
        return result

    def witness(self, mask: int) -> Allocation:
        assignment = self.assignment(mask)
        assert assignment is not None
        groups: list[set[int]] = [set() for _ in range(self.instance.channels)]
        for winner, path in assignment.items():
            channel = path[0][1] if path else 1
            groups[channel - 1].add(winner)
        return Allocation(tuple(frozenset(g) for g in groups), paths=assignment)


@lru_cache(maxsize=32)
def _checker(instance: AnyInstance) -> "_LinkChecker | _SecondaryChecker":
    if isinstance(instance, SecondaryNetworkInstance):
        return _SecondaryChecker(instance)
    return _LinkChecker(instance)


def _search(
    instance: AnyInstance,
    candidates: Sequence[int],
    values: dict[int, float],
    limit: int,
    channel_limit: int,
) -> OracleResult:
    if len(candidates) > limit:
        raise OracleLimitError(
            f"{len(candidates)} bidders exceed the oracle limit of {limit}"
        )
    if instance.channels > channel_limit:
        raise OracleLimitError(
            f"{instance.channels} channels exceed the oracle limit of {channel_limit}"
        )
    checker = _checker(instance)
    k = instance.channels
    candidates = sorted(candidates)
    m = len(candidates)

    total = [0.0] * (1 << m)
    raw = [0] * (1 << m)
    members: list[tuple[int, ...]] = [()] * (1 << m)
    for mask in range(1, 1 << m):
        low = mask & -mask
        pos = low.bit_length() - 1
        prev = mask ^ low
        total[mask] = total[prev] + values[candidates[pos]]
        raw[mask] = raw[prev] | (1 << candidates[pos])
        members[mask] = (candidates[pos],) + members[prev]

    order = sorted(range(1 << m), key=lambda mk: (-total[mk], tuple(sorted(members[mk]))))
    explored = 0
    for mask in order:
        explored += 1
        raw_mask = raw[mask]
        if isinstance(checker, _SecondaryChecker):
            ok = checker.feasible(raw_mask)
        else:
            ok = checker.multi(raw_mask, k)
        if ok:
            witness = checker.witness(raw_mask)
            return OracleResult(best_value=total[mask], witness=witness, explored=explored)
    raise AssertionError("the empty set is always feasible")  # pragma: no cover


def brute_force_max_welfare(
    instance: AnyInstance,
    bids: "list[float] | tuple[float, ...]",
    limit: int = DEFAULT_BIDDER_LIMIT,
    channel_limit: int = DEFAULT_CHANNEL_LIMIT,
) -> OracleResult:
    """Maximum-welfare feasible bidder set by exhaustive subset search."""
    if len(bids) != instance.n:
        raise InputError(f"expected {instance.n} bids, got {len(bids)}")
    values = {i: float(b) for i, b in enumerate(bids)}
    if any(v < 0 for v in values.values()):
        raise InputError("bids must be nonnegative")
    return _search(instance, range(instance.n), values, limit, channel_limit)


def brute_force_max_cardinality(
    instance: AnyInstance,
    candidates: Iterable[int] | None = None,
    limit: int = DEFAULT_BIDDER_LIMIT,
    channel_limit: int = DEFAULT_CHANNEL_LIMIT,
) -> OracleResult:
    """Maximum-cardinality feasible subset of ``candidates`` (unit values)."""
    if candidates is None:
        candidates = range(instance.n)
    candidate_list = sorted(set(candidates))
    for i in candidate_list:
        if not 0 <= i < instance.n:
            raise InputError(f"unknown bidder id {i}")
    values = {i: 1.0 for i in candidate_list}
    result = _search(instance, candidate_list, values, limit, channel_limit)
    return OracleResult(
        best_value=int(round(result.best_value)),
        witness=result.witness,
        explored=result.explored,
    )


def oracle_packer(
    limit: int = DEFAULT_BIDDER_LIMIT, channel_limit: int = DEFAULT_CHANNEL_LIMIT
) -> Packer:
    """An exact packer (psi = 1) backed by the cardinality oracle."""

    def pack(candidates: set[int], instance: AnyInstance) -> Allocation:
        return brute_force_max_cardinality(instance, candidates, limit, channel_limit).witness

    return Packer(name="oracle", fn=pack, psi=1.0, environments=None)
