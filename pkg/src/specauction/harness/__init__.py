"""Experiment harness: generators, truthfulness audit, Monte Carlo runs, CLI."""

from .audit import (
    AuditReport,
    AuditViolation,
    CachingPacker,
    audit_truthfulness,
    deviation_grid,
    trial_seed,
)
from .experiments import (
    PsiReport,
    PsiRow,
    TrialRecord,
    WelfareStats,
    measure_psi,
    theoretical_floor,
    welfare_experiment,
)
from .generators import (
    ENVIRONMENT_ALIASES,
    InstanceSpec,
    dominant_values,
    generate_instance,
    generate_values,
)

__all__ = [
    "AuditReport",
    "AuditViolation",
    "CachingPacker",
    "ENVIRONMENT_ALIASES",
    "InstanceSpec",
    "PsiReport",
    "PsiRow",
    "TrialRecord",
    "WelfareStats",
    "audit_truthfulness",
    "deviation_grid",
    "dominant_values",
    "generate_instance",
    "generate_values",
    "measure_psi",
    "theoretical_floor",
    "trial_seed",
    "welfare_experiment",
]
