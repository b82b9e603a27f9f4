"""Transmit-power computation for co-channel link sets.

Setting every SINR constraint to equality gives a linear system in the
normalised variables ``x_i = p_i / d_ii**alpha``:

    x_i = beta * (noise + sum_{j != i} x_j * d_jj**alpha / d_ji**alpha)

i.e. ``(I - beta*G) x = beta*noise*1`` with ``G[i, j] = d_jj**alpha / d_ji**alpha``.
When a strictly positive solution exists it is the component-wise minimal
feasible assignment (every ratio sits exactly at the threshold), which is what
this module returns.  A nonpositive component, a singular system, or a
condition estimate above ``COND_LIMIT`` is reported as infeasible.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .model import (
    DEFAULT_RELATIVE_TOLERANCE,
    InputError,
    Instance,
    PowerControl,
    sinr_ratio,
)

#: Condition-number estimate above which the equality system is declared
#: unreliable (and the set infeasible) rather than solved.
COND_LIMIT = 1e12


@dataclass(frozen=True)
class PowerSolveResult:
    """Result of a power solve: powers per link and achieved SINR slack."""

    feasible: bool
    powers: dict[int, float] | None
    residuals: dict[int, float]

    @staticmethod
    def infeasible() -> "PowerSolveResult":
        return PowerSolveResult(feasible=False, powers=None, residuals={})


def solve_power_assignment(
    co_channel: Iterable[int], instance: Instance
) -> PowerSolveResult:
    """Minimal positive power assignment meeting all SINR constraints, if any.

    ``residuals`` maps each link to its recomputed SINR minus beta; on a
    feasible result every residual is at least ``-1e-9 * beta``.
    """
    if not isinstance(instance.environment, PowerControl):
        raise InputError("power solving requires the power-control environment")
    ids = sorted(set(co_channel))
    if not ids:
        raise InputError("co-channel set must be nonempty")
    for i in ids:
        if not 0 <= i < instance.n:
            raise InputError(f"unknown link id {i}")

    idx = np.array(ids)
    beta = instance.params.beta
    noise = instance.params.noise
    gain = instance.cross_gain[np.ix_(idx, idx)]  # gain[j, i] = d_ji**alpha
    length_gain = instance.length_gain[idx]

    off_diag = ~np.eye(len(ids), dtype=bool)
    if np.any(gain[off_diag] == 0.0):
        return PowerSolveResult.infeasible()  # a sender sits on another receiver

    coupling = length_gain[:, None] / gain  # coupling[j, i] = d_jj**a / d_ji**a
    system = np.eye(len(ids)) - beta * coupling.T
    np.fill_diagonal(system, 1.0)
    rhs = np.full(len(ids), beta * noise)

    if np.linalg.cond(system) > COND_LIMIT:
        return PowerSolveResult.infeasible()
    try:
        x = np.linalg.solve(system, rhs)
    except np.linalg.LinAlgError:
        return PowerSolveResult.infeasible()
    if np.any(x <= 0.0):
        return PowerSolveResult.infeasible()

    powers = {i: float(x_i * lg) for i, x_i, lg in zip(ids, x, length_gain)}
    group = set(ids)
    residuals = {i: sinr_ratio(instance, i, group, powers) - beta for i in ids}
    if min(residuals.values()) < -DEFAULT_RELATIVE_TOLERANCE * beta:
        return PowerSolveResult.infeasible()
    return PowerSolveResult(feasible=True, powers=powers, residuals=residuals)
