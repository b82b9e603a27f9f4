"""Seeded generators for instances and valuation profiles.

All generators are deterministic functions of their seed (numpy
``default_rng``; draw order is fixed per environment), so experiment runs
replay bit-exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..model import (
    AnyInstance,
    BidderNetwork,
    CONFLICT_GRAPH,
    ConflictGraph,
    FIXED_POWER,
    FixedPower,
    InputError,
    Instance,
    Link,
    POWER_CONTROL,
    PhysicalParams,
    PowerControl,
    SECONDARY_NETWORK,
    SecondaryNetworkInstance,
)

ENVIRONMENT_ALIASES = {
    "pc": POWER_CONTROL,
    "power-control": POWER_CONTROL,
    "fixed-power": FIXED_POWER,
    "fixed": FIXED_POWER,
    "conflict": CONFLICT_GRAPH,
    "conflict-graph": CONFLICT_GRAPH,
    "secondary": SECONDARY_NETWORK,
    "secondary-network": SECONDARY_NETWORK,
}


@dataclass(frozen=True)
class InstanceSpec:
    """Generator parameters; which fields matter depends on the environment."""

    environment: str
    n: int
    channels: int = 1
    alpha: float = 2.5
    beta: float = 1.5
    noise: float = 1.0
    area: float = 100.0
    length_low: float = 1.0
    length_high: float = 4.0
    density: float = 0.3
    scheme: str = "uniform"
    base_power: float | None = None
    grid: int = 3
    edge_keep: float = 0.85


def _resolve_environment(name: str) -> str:
    try:
        return ENVIRONMENT_ALIASES[name]
    except KeyError:
        raise InputError(f"unknown environment {name!r}") from None


def _default_base_power(spec: InstanceSpec) -> float:
    # Chosen so short links comfortably overcome noise while the longest
    # uniform-scheme links may fail the solo check.
    mean_len = 0.5 * (spec.length_low + spec.length_high)
    floor_noise = max(spec.noise, 1e-6)
    if spec.scheme == "uniform":
        return 2.0 * spec.beta * floor_noise * mean_len**spec.alpha
    if spec.scheme == "linear":
        return 2.0 * spec.beta * floor_noise
    return 2.0 * spec.beta * floor_noise * mean_len ** (spec.alpha / 2.0)


def _draw_links(spec: InstanceSpec, rng: np.random.Generator) -> tuple[Link, ...]:
    senders = rng.uniform(0.0, spec.area, size=(spec.n, 2))
    lengths = rng.uniform(spec.length_low, spec.length_high, size=spec.n)
    angles = rng.uniform(0.0, 2.0 * math.pi, size=spec.n)
    links = []
    for i in range(spec.n):
        sx, sy = senders[i]
        rx = sx + lengths[i] * math.cos(angles[i])
        ry = sy + lengths[i] * math.sin(angles[i])
        links.append(Link(id=i, sender=(float(sx), float(sy)), receiver=(float(rx), float(ry))))
    return tuple(links)


def _draw_secondary(spec: InstanceSpec, rng: np.random.Generator) -> SecondaryNetworkInstance:
    side = spec.grid
    if side < 2:
        raise InputError("secondary-network generation needs a grid side of at least 2")
    nodes = tuple(range(side * side))
    base_edges: list[tuple[int, int]] = []
    for row in range(side):
        for col in range(side):
            node = row * side + col
            if col + 1 < side:
                base_edges.append((node, node + 1))
                base_edges.append((node + 1, node))
            if row + 1 < side:
                base_edges.append((node, node + side))
                base_edges.append((node + side, node))

    bidders = []
    for i in range(spec.n):
        keep = rng.random(len(base_edges)) < spec.edge_keep
        edges = tuple(e for e, kept in zip(base_edges, keep) if kept)
        source, dest = (int(v) for v in rng.choice(len(nodes), size=2, replace=False))
        bidders.append(
            BidderNetwork(id=i, nodes=nodes, edges=edges, source=source, dest=dest)
        )

    vertices = [
        (bidder.id, edge_idx) for bidder in bidders for edge_idx in range(len(bidder.edges))
    ]
    conflict = set()
    for a_pos in range(len(vertices)):
        for b_pos in range(a_pos + 1, len(vertices)):
            if rng.random() < spec.density:
                conflict.add((vertices[a_pos], vertices[b_pos]))
    return SecondaryNetworkInstance(
        bidders=tuple(bidders), channels=spec.channels, conflict=frozenset(conflict)
    )


def generate_instance(spec: InstanceSpec, seed: int) -> AnyInstance:
    """Deterministic instance from a generator spec and a seed."""
    environment = _resolve_environment(spec.environment)
    if spec.n < 1:
        raise InputError("n must be at least 1")
    if spec.channels < 1:
        raise InputError("channels must be at least 1")
    if not 0.0 <= spec.density <= 1.0:
        raise InputError("density must lie in [0, 1]")
    if not 0.0 < spec.length_low <= spec.length_high:
        raise InputError("need 0 < length_low <= length_high")
    rng = np.random.default_rng(seed)

    if environment == SECONDARY_NETWORK:
        return _draw_secondary(spec, rng)

    params = PhysicalParams(alpha=spec.alpha, beta=spec.beta, noise=spec.noise)
    links = _draw_links(spec, rng)
    if environment == POWER_CONTROL:
        if spec.noise <= 0:
            raise InputError(
                "power-control generation requires positive noise: the "
                "equality power solve is degenerate at zero noise"
            )
        return Instance(links, spec.channels, params, PowerControl())
    if environment == FIXED_POWER:
        base = spec.base_power if spec.base_power is not None else _default_base_power(spec)
        return Instance(links, spec.channels, params, FixedPower(spec.scheme, base))
    edges = set()
    for a in range(spec.n):
        for b in range(a + 1, spec.n):
            if rng.random() < spec.density:
                edges.add((a, b))
    return Instance(links, spec.channels, params, ConflictGraph(frozenset(edges)))


def generate_values(n: int, seed: int, low: float = 0.1, high: float = 10.0) -> tuple[float, ...]:
    """Independent uniform valuations in [low, high]."""
    if n < 1:
        raise InputError("n must be at least 1")
    if not 0 <= low <= high:
        raise InputError("need 0 <= low <= high")
    rng = np.random.default_rng(seed)
    return tuple(float(v) for v in rng.uniform(low, high, size=n))


def dominant_values(n: int, seed: int, top: float = 10.0) -> tuple[float, ...]:
    """Valuations with bidder 0 dominant: the rest sum to top/16 < top/8."""
    if n < 1:
        raise InputError("n must be at least 1")
    if top <= 0:
        raise InputError("top must be positive")
    if n == 1:
        return (top,)
    rng = np.random.default_rng(seed)
    weights = rng.uniform(0.5, 1.0, size=n - 1)
    rest = weights / weights.sum() * (top / 16.0)
    return (top,) + tuple(float(v) for v in rest)
