"""The universally truthful random-sampling auction.

One run works as follows.  With probability epsilon a plain second-price
auction serves only the highest bidder.  Otherwise each bidder lands in a
statistics group (probability epsilon) or the fixed group; the highest
statistics-group bid B sets a posted price p = 2**(-X) * B with X drawn
uniformly from {0, ..., ceil(log2 n) + 1}; the fixed-group bidders willing to
pay p are handed to a bid-blind packer, and every packed winner pays exactly
p.  Statistics-group bidders are never allocated and never pay.

All randomness is materialised up front in a :class:`RandomTape`, so a run is
a pure function of (instance, bids, epsilon, packer, tape) and can be replayed
bit-exactly.  Conditioned on any fixed tape the mechanism is a deterministic
truthful auction, which is what the audit harness verifies.

Tapes are generated from a 64-bit seed with numpy's PCG64 generator; the draw
order is fixed (auction-type coin, then the per-bidder group coins, then the
price exponent) and documented in the README so results replay everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .model import (
    Allocation,
    AnyInstance,
    ConflictGraph,
    FixedPower,
    InputError,
    Instance,
    PowerControl,
    SecondaryNetworkInstance,
)
from .packing import Packer, find_secondary_path, fixed_solo_feasible
from .power import solve_power_assignment


def ceil_log2(n: int) -> int:
    """Smallest integer x with 2**x >= n, for n >= 1."""
    if n < 1:
        raise InputError(f"n must be at least 1, got {n}")
    return (n - 1).bit_length()


def max_price_exponent(n: int) -> int:
    """Largest admissible price exponent: ceil(log2 n) + 1."""
    return ceil_log2(n) + 1


@dataclass(frozen=True)
class RandomTape:
    """Fully materialised randomness of one mechanism run.

    ``secprice`` selects the second-price branch; ``stat_flags[i]`` puts
    bidder i into the statistics group; ``price_exponent`` is the X in the
    posted price 2**(-X) * B.  ``seed`` records the 64-bit seed that generated
    the tape, enabling replay.
    """

    secprice: bool
    stat_flags: tuple[bool, ...]
    price_exponent: int
    seed: int

    def __post_init__(self) -> None:
        if not self.stat_flags:
            raise InputError("a tape needs at least one bidder coin")
        if not 0 <= self.price_exponent <= max_price_exponent(len(self.stat_flags)):
            raise InputError(
                f"price exponent {self.price_exponent} out of range for "
                f"n={len(self.stat_flags)}"
            )

    @property
    def n(self) -> int:
        return len(self.stat_flags)


def tape_from_seed(seed: int, n: int, epsilon: float) -> RandomTape:
    """Deterministic tape from a 64-bit seed (PCG64, fixed draw order)."""
    if seed < 0:
        raise InputError("seed must be a nonnegative integer")
    if not 0.0 < epsilon < 1.0:
        raise InputError(f"epsilon must lie in (0, 1), got {epsilon}")
    if n < 1:
        raise InputError(f"n must be at least 1, got {n}")
    rng = np.random.Generator(np.random.PCG64(seed))
    secprice = bool(rng.random() < epsilon)
    stat_flags = tuple(bool(v) for v in rng.random(n) < epsilon)
    price_exponent = int(rng.integers(0, max_price_exponent(n) + 1))
    return RandomTape(secprice, stat_flags, price_exponent, seed)


def sample_price(top_sample_bid: float, n: int, exponent: int) -> float:
    """The posted price 2**(-exponent) * B on the geometric ladder."""
    if top_sample_bid < 0:
        raise InputError("the sampled bid must be nonnegative")
    if not 0 <= exponent <= max_price_exponent(n):
        raise InputError(f"price exponent {exponent} out of range for n={n}")
    return (2.0**-exponent) * top_sample_bid


def vickrey(bids: "list[float] | tuple[float, ...]") -> tuple[int, float]:
    """Second-price auction: highest bid wins (ties to the lowest id).

    The winner pays the highest remaining bid, or 0 with no competitor.
    """
    if len(bids) == 0:
        raise InputError("vickrey needs at least one bidder")
    winner = max(range(len(bids)), key=lambda i: (bids[i], -i))
    payment = max((b for i, b in enumerate(bids) if i != winner), default=0.0)
    return winner, float(payment)


def prefilter(instance: AnyInstance) -> frozenset[int]:
    """Bidders that can win on their own; the rest can never be allocated.

    Downward closure makes the singleton check sufficient.  Power control
    keeps everyone (large enough powers always serve a lone link); fixed
    power keeps links whose solo SINR meets the threshold; conflict graphs
    keep everyone; secondary networks keep bidders the path allocator can
    serve in an empty network.
    """
    if isinstance(instance, SecondaryNetworkInstance):
        return frozenset(
            i for i in range(instance.n) if find_secondary_path(instance, i, {}) is not None
        )
    env = instance.environment
    if isinstance(env, FixedPower):
        return frozenset(i for i in range(instance.n) if fixed_solo_feasible(instance, i))
    return frozenset(range(instance.n))


@dataclass(frozen=True)
class Outcome:
    """Allocation, per-bidder payments, the posted price and the tape used.

    Non-winners pay 0; posted-price winners pay exactly ``price``; the
    second-price winner pays the second-highest bid.  ``removed_pre`` lists
    bidders dropped by the singleton prefilter.
    """

    allocation: Allocation
    payments: tuple[float, ...]
    price: float
    tape: RandomTape
    removed_pre: frozenset[int]

    @property
    def winners(self) -> frozenset[int]:
        return self.allocation.winners


@lru_cache(maxsize=4096)
def _solo_allocation(instance: AnyInstance, winner: int) -> Allocation:
    """Feasible allocation serving exactly one bidder, on channel 1."""
    groups = [frozenset()] * instance.channels
    groups[0] = frozenset({winner})
    channel_winners = tuple(groups)
    if isinstance(instance, SecondaryNetworkInstance):
        path = find_secondary_path(instance, winner, {})
        if path is None:
            raise RuntimeError(
                f"bidder {winner} survived the prefilter but cannot be served alone"
            )
        channel = path[0][1] if path else 1
        groups = [frozenset()] * instance.channels
        groups[channel - 1] = frozenset({winner})
        return Allocation(tuple(groups), paths={winner: path})
    env = instance.environment
    if isinstance(env, PowerControl):
        solved = solve_power_assignment({winner}, instance)
        if not solved.feasible:
            raise RuntimeError(
                f"no solo power assignment for link {winner}; power-control "
                "instances need positive noise for the equality solve"
            )
        return Allocation(channel_winners, powers=solved.powers)
    if isinstance(env, FixedPower):
        return Allocation(
            channel_winners, powers={winner: float(instance.fixed_powers[winner])}
        )
    assert isinstance(env, ConflictGraph)
    return Allocation(channel_winners)


def run_mechanism(
    instance: AnyInstance,
    bids: "list[float] | tuple[float, ...]",
    epsilon: float,
    packer: Packer,
    tape: RandomTape | None = None,
    seed: int | None = None,
    survivors: frozenset[int] | None = None,
) -> Outcome:
    """One full auction run on a fixed tape (or a fresh tape from ``seed``).

    ``survivors`` may carry a precomputed prefilter result; it must equal
    ``prefilter(instance)``.  The run is pure: identical arguments give an
    identical outcome.
    """
    n = instance.n
    if len(bids) != n:
        raise InputError(f"expected {n} bids, got {len(bids)}")
    bids = tuple(float(b) for b in bids)
    if any(b < 0 for b in bids):
        raise InputError("bids must be nonnegative")
    if not 0.0 < epsilon < 1.0:
        raise InputError(f"epsilon must lie in (0, 1), got {epsilon}")
    if tape is None:
        if seed is None:
            raise InputError("provide a tape or a seed; silent nondeterminism is not allowed")
        tape = tape_from_seed(seed, n, epsilon)
    elif seed is not None:
        raise InputError("provide either a tape or a seed, not both")
    if tape.n != n:
        raise InputError(f"tape is for {tape.n} bidders, instance has {n}")
    if packer.environments is not None and instance.kind not in packer.environments:
        raise InputError(f"packer {packer.name!r} does not match a {instance.kind} instance")

    if survivors is None:
        survivors = prefilter(instance)
    removed_pre = frozenset(range(n)) - survivors

    if tape.secprice:
        if not survivors:
            return Outcome(
                Allocation.empty(instance.channels), (0.0,) * n, 0.0, tape, removed_pre
            )
        winner = max(survivors, key=lambda i: (bids[i], -i))
        payment = max((bids[i] for i in survivors if i != winner), default=0.0)
        payments = tuple(payment if i == winner else 0.0 for i in range(n))
        return Outcome(_solo_allocation(instance, winner), payments, 0.0, tape, removed_pre)

    stat = [i for i in survivors if tape.stat_flags[i]]
    top_sample = max((bids[i] for i in stat), default=0.0)
    price = sample_price(top_sample, n, tape.price_exponent)
    market = {i for i in survivors if not tape.stat_flags[i] and bids[i] >= price}
    allocation = packer.pack(market, instance)
    if not allocation.winners <= market:
        raise RuntimeError(
            f"packer {packer.name!r} selected bidders outside its candidate set"
        )
    payments = tuple(price if i in allocation.winners else 0.0 for i in range(n))
    return Outcome(allocation, payments, price, tape, removed_pre)


def utility(outcome: Outcome, true_values: "list[float] | tuple[float, ...]") -> tuple[float, ...]:
    """Quasi-linear utilities: value minus payment for winners, 0 otherwise."""
    winners = outcome.winners
    return tuple(
        true_values[i] - outcome.payments[i] if i in winners else 0.0
        for i in range(len(outcome.payments))
    )
