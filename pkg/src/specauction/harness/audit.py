"""Truthfulness auditor: replay the mechanism against bid deviations.

For each sampled tape and each bidder, the auditor replays the mechanism on
the *same* tape with a grid of deviant bids and compares the bidder's
quasi-linear utility against truthful bidding.  The grid spans zero, fractions
and multiples of the true value, and values just below and above every rung of
the realized price ladder, so all the interesting membership flips are hit.
A single positive utility gain anywhere is a truthfulness violation and is
reported with the tape seed that reproduces it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from ..mechanism import max_price_exponent, prefilter, run_mechanism, tape_from_seed
from ..model import Allocation, AnyInstance, InputError
from ..packing import Packer


def trial_seed(master: int, index: int) -> int:
    """Per-trial 64-bit tape seed derived from a master seed (SeedSequence)."""
    state = np.random.SeedSequence([master, index]).generate_state(2, np.uint32)
    return int(state[0]) | (int(state[1]) << 32)


class CachingPacker:
    """Memoises a packer's output per candidate set for one instance.

    Packers are pure, so replaying thousands of bid profiles against the same
    tape only ever needs a handful of distinct packings.
    """

    def __init__(self, packer: Packer):
        self._packer = packer
        self._cache: dict[frozenset[int], Allocation] = {}
        self._instance: AnyInstance | None = None
        self.name = packer.name
        self.psi = packer.psi
        self.environments = packer.environments

    def pack(self, candidates: Iterable[int], instance: AnyInstance) -> Allocation:
        if self._instance is None:
            self._instance = instance
        elif self._instance is not instance:
            raise InputError("a CachingPacker serves exactly one instance")
        key = frozenset(candidates)
        allocation = self._cache.get(key)
        if allocation is None:
            allocation = self._packer.pack(key, instance)
            self._cache[key] = allocation
        return allocation


def deviation_grid(
    value: float,
    price: float,
    top_sample: float,
    n: int,
    count: int = 20,
) -> tuple[float, ...]:
    """At least ``count`` deviant bids for one bidder on one realized tape.

    Includes 0, fractions and multiples of the true value, straddles of every
    ladder price 2**(-x) * B, and straddles of the realized price itself.
    """
    delta = 1e-6 * top_sample if top_sample > 0 else 1e-6 * max(value, 1.0)
    grid = {
        0.0,
        value / 8.0,
        value / 4.0,
        value / 2.0,
        3.0 * value / 4.0,
        7.0 * value / 8.0,
        9.0 * value / 8.0,
        3.0 * value / 2.0,
        2.0 * value,
        4.0 * value,
        8.0 * value,
    }
    for exponent in range(max_price_exponent(n) + 1):
        rung = (2.0**-exponent) * top_sample
        grid.update((rung - delta, rung, rung + delta))
    grid.update((price - delta, price, price + delta))
    grid = {g for g in grid if g >= 0.0}
    grid.add(0.0)
    filler = max(value, top_sample, 1.0)
    step = 1
    while len(grid) < count:
        grid.add(filler * (1.0 + 0.37 * step))
        step += 1
    return tuple(sorted(grid))


@dataclass(frozen=True)
class AuditViolation:
    """One utility-gaining deviation; the tape seed replays it exactly."""

    tape_seed: int
    bidder: int
    deviation: float
    truthful_utility: float
    deviant_utility: float

    @property
    def gain(self) -> float:
        return self.deviant_utility - self.truthful_utility


@dataclass(frozen=True)
class AuditReport:
    """Count of examined (tape, bidder, deviation) triples and any violations."""

    examined: int
    violations: tuple[AuditViolation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations

    @property
    def max_gain(self) -> float:
        return max((v.gain for v in self.violations), default=0.0)


def audit_truthfulness(
    instance: AnyInstance,
    true_values: "list[float] | tuple[float, ...]",
    epsilon: float,
    packer: Packer,
    tapes: int = 10,
    deviations: int = 20,
    seed: int = 0,
) -> AuditReport:
    """Replay-based check that no deviation ever beats truthful bidding."""
    n = instance.n
    true_values = tuple(float(v) for v in true_values)
    if len(true_values) != n:
        raise InputError(f"expected {n} values, got {len(true_values)}")
    if tapes < 1 or deviations < 1:
        raise InputError("tapes and deviations must be at least 1")

    survivors = prefilter(instance)
    cache = CachingPacker(packer)
    examined = 0
    violations: list[AuditViolation] = []
    for index in range(tapes):
        tape_seed_value = trial_seed(seed, index)
        tape = tape_from_seed(tape_seed_value, n, epsilon)
        truthful = run_mechanism(
            instance, true_values, epsilon, cache, tape=tape, survivors=survivors
        )
        truthful_winners = truthful.allocation.winners
        top_sample = max(
            (true_values[i] for i in survivors if tape.stat_flags[i]), default=0.0
        )
        for bidder in range(n):
            truthful_utility = (
                true_values[bidder] - truthful.payments[bidder]
                if bidder in truthful_winners
                else 0.0
            )
            grid = deviation_grid(
                true_values[bidder], truthful.price, top_sample, n, deviations
            )
            for deviant_bid in grid:
                examined += 1
                bids = (
                    true_values[:bidder] + (deviant_bid,) + true_values[bidder + 1 :]
                )
                outcome = run_mechanism(
                    instance, bids, epsilon, cache, tape=tape, survivors=survivors
                )
                deviant_utility = (
                    true_values[bidder] - outcome.payments[bidder]
                    if bidder in outcome.allocation.winners
                    else 0.0
                )
                if deviant_utility > truthful_utility:
                    violations.append(
                        AuditViolation(
                            tape_seed=tape_seed_value,
                            bidder=bidder,
                            deviation=deviant_bid,
                            truthful_utility=truthful_utility,
                            deviant_utility=deviant_utility,
                        )
                    )
    return AuditReport(examined=examined, violations=tuple(violations))
