"""Universally truthful auctions for secondary spectrum allocation.

A library and CLI for random-sampling posted-price channel auctions over
SINR, conflict-graph and secondary-network interference models, with exact
brute-force oracles and a deterministic-tape truthfulness auditor.
"""

from .mechanism import (
    Outcome,
    RandomTape,
    ceil_log2,
    max_price_exponent,
    prefilter,
    run_mechanism,
    sample_price,
    tape_from_seed,
    utility,
    vickrey,
)
from .model import (
    Allocation,
    AnyInstance,
    BidderNetwork,
    CONFLICT_GRAPH,
    ConflictGraph,
    FIXED_POWER,
    FIXED_POWER_SCHEMES,
    FeasibilityReport,
    FixedPower,
    InputError,
    Instance,
    Link,
    POWER_CONTROL,
    PhysicalParams,
    PowerControl,
    SECONDARY_NETWORK,
    SecondaryNetworkInstance,
    check_feasible,
    downward_closure_probe,
    sinr_ratio,
)
from .oracle import (
    OracleLimitError,
    OracleResult,
    brute_force_max_cardinality,
    brute_force_max_welfare,
    oracle_packer,
)
from .packing import (
    CONFLICT_PACKER,
    FIXED_POWER_PACKER,
    PC_PACKER,
    Packer,
    SECONDARY_PACKER,
    admission_threshold,
    extend_to_multichannel,
    extended_packer,
    fixed_power_greedy,
    find_secondary_path,
    greedy_conflict_packing,
    secondary_network_greedy,
    unweighted_packing_pc,
)
from .power import PowerSolveResult, solve_power_assignment
from .serialize import (
    dumps_instance,
    dumps_outcome,
    instance_from_dict,
    instance_to_dict,
    load_instance,
    loads_instance,
    outcome_from_dict,
    outcome_to_dict,
    save_instance,
)

__version__ = "0.1.0"

__all__ = [
    "Allocation",
    "AnyInstance",
    "BidderNetwork",
    "CONFLICT_GRAPH",
    "CONFLICT_PACKER",
    "ConflictGraph",
    "FIXED_POWER",
    "FIXED_POWER_PACKER",
    "FIXED_POWER_SCHEMES",
    "FeasibilityReport",
    "FixedPower",
    "InputError",
    "Instance",
    "Link",
    "OracleLimitError",
    "OracleResult",
    "Outcome",
    "PC_PACKER",
    "POWER_CONTROL",
    "Packer",
    "PhysicalParams",
    "PowerControl",
    "PowerSolveResult",
    "RandomTape",
    "SECONDARY_NETWORK",
    "SECONDARY_PACKER",
    "SecondaryNetworkInstance",
    "admission_threshold",
    "brute_force_max_cardinality",
    "brute_force_max_welfare",
    "ceil_log2",
    "check_feasible",
    "downward_closure_probe",
    "dumps_instance",
    "dumps_outcome",
    "extend_to_multichannel",
    "extended_packer",
    "find_secondary_path",
    "fixed_power_greedy",
    "greedy_conflict_packing",
    "instance_from_dict",
    "instance_to_dict",
    "load_instance",
    "loads_instance",
    "max_price_exponent",
    "oracle_packer",
    "outcome_from_dict",
    "outcome_to_dict",
    "prefilter",
    "run_mechanism",
    "sample_price",
    "save_instance",
    "secondary_network_greedy",
    "sinr_ratio",
    "solve_power_assignment",
    "tape_from_seed",
    "unweighted_packing_pc",
    "utility",
    "vickrey",
]
