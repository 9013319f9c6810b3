"""Test functions, Rademacher sums and Toeplitz/Berezin-type operators between weighted Bergman spaces."""

from .rademacher import KhinchineReport, khinchine_check, rademacher
from .test_functions import (
    KernelSum,
    TestFunction,
    kernel_type,
    normalized_kernel,
    superposition,
    superposition_check,
    test_function_eval,
    weighted_test_function,
)
from .toeplitz import (
    CrossoverReport,
    OperatorNormReport,
    SequenceReport,
    axis_probes,
    berezin_op_apply,
    compactness_profile,
    locate_crossover,
    operator_norm_estimate,
    operator_sequence,
    sequence_consistency,
    sequence_criterion,
    toeplitz_apply,
    toeplitz_image,
)

__all__ = [
    "CrossoverReport",
    "KernelSum",
    "KhinchineReport",
    "OperatorNormReport",
    "SequenceReport",
    "TestFunction",
    "axis_probes",
    "berezin_op_apply",
    "compactness_profile",
    "kernel_type",
    "khinchine_check",
    "locate_crossover",
    "normalized_kernel",
    "operator_norm_estimate",
    "operator_sequence",
    "rademacher",
    "sequence_consistency",
    "sequence_criterion",
    "superposition",
    "superposition_check",
    "test_function_eval",
    "toeplitz_apply",
    "toeplitz_image",
    "weighted_test_function",
]
