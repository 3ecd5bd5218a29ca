"""Long polynomial modular multiplication over Z_q[x]/(x^n+1) via RNS/CRT
decomposition into NTT-friendly special primes, with a cycle-accurate
simulator of the 2-parallel feed-forward transform pipeline."""

from .foldsched import (FoldingSchedule, intt_schedule, ntt_schedule,
                        verify_cascade)
from .nttref import (NttParams, ResiduePoly, ntt_forward, ntt_inverse,
                     polymul_ntt)
from .pipesim import (CycleReport, PipeConfig, PipelineModel,
                      ScheduleViolation, build_cascade, simulate,
                      simulate_shuffled_baseline)
from .primeforge import SpecialPrime, search_special_primes
from .rnspoly import BigPoly, RnsContext, build_context, parentt_multiply

__version__ = "0.1.0"

__all__ = [
    "BigPoly", "CycleReport", "FoldingSchedule", "NttParams", "PipeConfig",
    "PipelineModel", "ResiduePoly", "RnsContext", "ScheduleViolation",
    "SpecialPrime", "build_cascade", "build_context", "intt_schedule",
    "ntt_forward", "ntt_inverse", "ntt_schedule", "parentt_multiply",
    "polymul_ntt", "search_special_primes", "simulate",
    "simulate_shuffled_baseline", "verify_cascade",
]
