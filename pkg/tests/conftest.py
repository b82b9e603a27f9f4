"""Shared instance factories for the test suite."""

from __future__ import annotations

import numpy as np
from hypothesis import settings

settings.register_profile("deterministic", derandomize=True, deadline=None)
settings.load_profile("deterministic")

from specauction import (
    BidderNetwork,
    ConflictGraph,
    FixedPower,
    Instance,
    Link,
    PhysicalParams,
    PowerControl,
    SecondaryNetworkInstance,
)


def link(i, sx, sy, rx, ry):
    return Link(id=i, sender=(float(sx), float(sy)), receiver=(float(rx), float(ry)))


def pc_instance(links, channels=1, alpha=2.0, beta=1.0, noise=1.0):
    return Instance(
        links=tuple(links),
        channels=channels,
        params=PhysicalParams(alpha=alpha, beta=beta, noise=noise),
        environment=PowerControl(),
    )


def fixed_instance(links, channels=1, alpha=2.0, beta=1.0, noise=1.0,
                   scheme="uniform", base_power=10.0):
    return Instance(
        links=tuple(links),
        channels=channels,
        params=PhysicalParams(alpha=alpha, beta=beta, noise=noise),
        environment=FixedPower(scheme=scheme, base_power=base_power),
    )


def conflict_instance(n, edges, channels=1):
    """n dummy unit links in a row plus an explicit conflict graph."""
    links = [link(i, 3.0 * i, 0.0, 3.0 * i + 1.0, 0.0) for i in range(n)]
    return Instance(
        links=tuple(links),
        channels=channels,
        params=PhysicalParams(alpha=2.0, beta=1.0, noise=1.0),
        environment=ConflictGraph.from_pairs(edges),
    )


def spread_links(n, seed, spacing=50.0, length=(1.0, 4.0)):
    """n links far enough apart that joint power control is comfortable."""
    rng = np.random.default_rng(seed)
    links = []
    for i in range(n):
        sx = spacing * i
        sy = float(rng.uniform(0, 5))
        ln = float(rng.uniform(*length))
        ang = float(rng.uniform(0, 2 * np.pi))
        links.append(link(i, sx, sy, sx + ln * np.cos(ang), sy + ln * np.sin(ang)))
    return links


def two_bidder_secondary(conflicting=True, channels=1):
    """Two bidders, one edge each (node 0 -> 1); optionally H-adjacent."""
    bidders = (
        BidderNetwork(id=0, nodes=(0, 1), edges=((0, 1),), source=0, dest=1),
        BidderNetwork(id=1, nodes=(0, 1), edges=((0, 1),), source=0, dest=1),
    )
    conflict = frozenset({((0, 0), (1, 0))}) if conflicting else frozenset()
    return SecondaryNetworkInstance(bidders=bidders, channels=channels, conflict=conflict)
