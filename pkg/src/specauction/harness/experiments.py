"""Monte Carlo welfare/revenue experiments and packer quality measurement."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..mechanism import ceil_log2, prefilter, run_mechanism, tape_from_seed
from ..model import AnyInstance, InputError
from ..oracle import (
    DEFAULT_BIDDER_LIMIT,
    DEFAULT_CHANNEL_LIMIT,
    brute_force_max_cardinality,
    brute_force_max_welfare,
)
from ..packing import Packer
from .audit import CachingPacker, trial_seed


def theoretical_floor(n: int, epsilon: float, psi: float) -> float:
    """Guaranteed fraction of optimal welfare for a psi-approximate packer:
    (1 - eps)**2 * eps * psi / (8 * (ceil(log2 n) + 2))."""
    if not 0.0 < epsilon < 1.0:
        raise InputError(f"epsilon must lie in (0, 1), got {epsilon}")
    if not 0.0 < psi <= 1.0:
        raise InputError(f"psi must lie in (0, 1], got {psi}")
    return (1.0 - epsilon) ** 2 * epsilon * psi / (8.0 * (ceil_log2(n) + 2))


@dataclass(frozen=True)
class TrialRecord:
    """One mechanism run: replayable seed plus realized welfare and revenue."""

    index: int
    tape_seed: int
    secprice: bool
    price: float
    welfare: float
    revenue: float


@dataclass(frozen=True)
class WelfareStats:
    trials: int
    epsilon: float
    n: int
    psi: float | None
    mean_welfare: float
    stderr_welfare: float
    mean_revenue: float
    stderr_revenue: float
    optimum: float | None
    welfare_ratio: float | None
    floor_factor: float | None
    floor_value: float | None
    floor_satisfied: bool | None
    records: tuple[TrialRecord, ...]


def _mean_stderr(values: list[float]) -> tuple[float, float]:
    arr = np.array(values)
    mean = float(arr.mean())
    if len(values) < 2:
        return mean, 0.0
    return mean, float(arr.std(ddof=1) / math.sqrt(len(values)))


def welfare_experiment(
    instance: AnyInstance,
    true_values: "list[float] | tuple[float, ...]",
    epsilon: float,
    packer: Packer,
    trials: int,
    seed: int,
    oracle: bool = False,
    oracle_limit: int = DEFAULT_BIDDER_LIMIT,
    channel_limit: int = DEFAULT_CHANNEL_LIMIT,
) -> WelfareStats:
    """Run the mechanism over fresh tapes under truthful bids and aggregate.

    With ``oracle=True`` the optimal welfare is computed exactly and the mean
    is compared (at three standard errors) against the theoretical floor,
    which is available whenever the packer advertises a quality factor.
    Trials accumulate in index order, so repeated runs aggregate identically.
    """
    if trials < 1:
        raise InputError("trials must be at least 1")
    n = instance.n
    true_values = tuple(float(v) for v in true_values)
    if len(true_values) != n:
        raise InputError(f"expected {n} values, got {len(true_values)}")

    survivors = prefilter(instance)
    cache = CachingPacker(packer)
    records: list[TrialRecord] = []
    welfares: list[float] = []
    revenues: list[float] = []
    for index in range(trials):
        tape_seed_value = trial_seed(seed, index)
        tape = tape_from_seed(tape_seed_value, n, epsilon)
        outcome = run_mechanism(
            instance, true_values, epsilon, cache, tape=tape, survivors=survivors
        )
        welfare = sum(true_values[i] for i in outcome.allocation.winners)
        revenue = sum(outcome.payments)
        welfares.append(welfare)
        revenues.append(revenue)
        records.append(
            TrialRecord(
                index=index,
                tape_seed=tape_seed_value,
                secprice=tape.secprice,
                price=outcome.price,
                welfare=welfare,
                revenue=revenue,
            )
        )

    mean_welfare, stderr_welfare = _mean_stderr(welfares)
    mean_revenue, stderr_revenue = _mean_stderr(revenues)

    optimum = None
    welfare_ratio = None
    floor_factor = None
    floor_value = None
    floor_satisfied = None
    if oracle:
        optimum = brute_force_max_welfare(
            instance, true_values, oracle_limit, channel_limit
        ).best_value
        if optimum > 0:
            welfare_ratio = mean_welfare / optimum
        if packer.psi is not None:
            floor_factor = theoretical_floor(n, epsilon, packer.psi)
            floor_value = floor_factor * optimum
            floor_satisfied = mean_welfare >= floor_value - 3.0 * stderr_welfare

    return WelfareStats(
        trials=trials,
        epsilon=epsilon,
        n=n,
        psi=packer.psi,
        mean_welfare=mean_welfare,
        stderr_welfare=stderr_welfare,
        mean_revenue=mean_revenue,
        stderr_revenue=stderr_revenue,
        optimum=optimum,
        welfare_ratio=welfare_ratio,
        floor_factor=floor_factor,
        floor_value=floor_value,
        floor_satisfied=floor_satisfied,
        records=tuple(records),
    )


@dataclass(frozen=True)
class PsiRow:
    index: int
    packed: int
    optimum: int
    ratio: float


@dataclass(frozen=True)
class PsiReport:
    rows: tuple[PsiRow, ...]
    min_ratio: float
    mean_ratio: float


def measure_psi(
    packer: Packer,
    instances: "list[AnyInstance] | tuple[AnyInstance, ...]",
    oracle_limit: int = DEFAULT_BIDDER_LIMIT,
    channel_limit: int = DEFAULT_CHANNEL_LIMIT,
) -> PsiReport:
    """Measured packing quality: winner count over exact optimum, per instance.

    Candidates are the prefilter survivors.  An instance with optimum 0 counts
    as ratio 1 (the packer cannot do worse than nothing).
    """
    if not instances:
        raise InputError("measure_psi needs at least one instance")
    rows = []
    for index, instance in enumerate(instances):
        candidates = prefilter(instance)
        packed = len(packer.pack(candidates, instance).winners)
        optimum = brute_force_max_cardinality(
            instance, candidates, oracle_limit, channel_limit
        ).best_value
        ratio = packed / optimum if optimum > 0 else 1.0
        rows.append(PsiRow(index=index, packed=packed, optimum=optimum, ratio=ratio))
    ratios = [row.ratio for row in rows]
    return PsiReport(
        rows=tuple(rows),
        min_ratio=min(ratios),
        mean_ratio=float(np.mean(ratios)),
    )
