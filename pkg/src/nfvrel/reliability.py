"""End-to-end reliability: exact enumeration, Monte Carlo, and the hinge surrogate.

The service succeeds under a failure realization iff every RVNF has at least
one active server pair (controller host, RVNF host) joined by a physical link.
Exact values enumerate all 2^n_servers failure vectors; beyond the enumeration
limit the Monte Carlo estimator is the supported path.
"""

from dataclasses import dataclass
from enum import Enum
import math

import numpy as np

from . import kernels
from .errors import DimensionMismatch, EnumerationLimitExceeded
from .model import (
    ChainComposition,
    Embedding,
    FailureModel,
    FailureVector,
    Instance,
    PhysicalTopology,
)

ENUMERATION_LIMIT = 24
_MC_CHUNK = 1 << 16


class Method(str, Enum):
    EXACT_ENUMERATION = "exact_enumeration"
    MONTE_CARLO = "monte_carlo"


@dataclass(frozen=True)
class ReliabilityResult:
    value: float
    method: Method
    stderr: float | None = None
    n_samples: int | None = None

    def __post_init__(self):
        if not 0.0 <= self.value <= 1.0:
            raise ValueError(f"reliability {self.value} outside [0, 1]")
        if (self.method is Method.MONTE_CARLO) != (self.stderr is not None):
            raise ValueError("stderr must be present iff method is monte_carlo")


def failure_vector_prob(f: FailureVector, fm: FailureModel) -> float:
    """Probability of one on/off realization under independent server failures."""
    bits = f.bits
    if bits.shape[0] != len(fm):
        raise DimensionMismatch("failure vector length does not match model")
    return float(np.prod(np.where(bits, 1.0 - fm.p, fm.p)))


def solution_masks(cc: ChainComposition, emb: Embedding, topo: PhysicalTopology):
    """Bitmask encoding of a solution: per-RVNF controller-host and host masks,
    plus per-server adjacency masks."""
    n_s = topo.n_servers
    weights = 1 << np.arange(n_s, dtype=np.int64)
    cvnf_row_masks = emb.x_c.astype(np.int64) @ weights
    cvnf_masks = cvnf_row_masks[cc.assignment]
    rvnf_masks = emb.x_r.astype(np.int64) @ weights
    adj_masks = topo.adjacency.astype(np.int64) @ weights
    return cvnf_masks, rvnf_masks, adj_masks


def rvnf_executed(v: int, f: FailureVector, cc: ChainComposition,
                  emb: Embedding, topo: PhysicalTopology) -> bool:
    """Whether RVNF v runs: some on-server hosting its controller is linked to
    some on-server hosting v."""
    if not 0 <= v < emb.x_r.shape[0]:
        raise DimensionMismatch(f"RVNF index {v} out of range")
    cvnf_masks, rvnf_masks, adj_masks = solution_masks(cc, emb, topo)
    mask = f.mask
    cm = cvnf_masks[v] & mask
    rm = rvnf_masks[v] & mask
    for s in range(topo.n_servers):
        if (cm >> s) & 1 and (adj_masks[s] & rm):
            return True
    return False


def _check_enumerable(inst: Instance, limit: int):
    if inst.n_servers > limit:
        raise EnumerationLimitExceeded(
            f"n_servers={inst.n_servers} exceeds enumeration limit {limit}; "
            "use the Monte Carlo estimator"
        )


def exact_reliability(inst: Instance, cc: ChainComposition, emb: Embedding,
                      enumeration_limit: int = ENUMERATION_LIMIT) -> ReliabilityResult:
    """Exact success probability by enumerating every failure vector."""
    _check_enumerable(inst, enumeration_limit)
    cvnf_masks, rvnf_masks, adj_masks = solution_masks(cc, emb, inst.topology)
    value = kernels.exact_sum(
        inst.n_servers, inst.failures.p, cvnf_masks, rvnf_masks, adj_masks
    )
    return ReliabilityResult(value=min(1.0, max(0.0, value)),
                             method=Method.EXACT_ENUMERATION)


def monte_carlo_reliability(inst: Instance, cc: ChainComposition, emb: Embedding,
                            n_samples: int, seed: int) -> ReliabilityResult:
    """Monte Carlo estimate of the success probability.

    Sampling is chunked, with chunk i drawn from a generator seeded by
    SeedSequence([seed, i]); estimates are therefore reproducible and
    independent of how chunks are distributed across workers.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    cvnf_masks, rvnf_masks, adj_masks = solution_masks(cc, emb, inst.topology)
    n_s = inst.n_servers
    on_prob = 1.0 - inst.failures.p
    weights = 1 << np.arange(n_s, dtype=np.int64)
    successes = 0
    for chunk_idx, start in enumerate(range(0, n_samples, _MC_CHUNK)):
        size = min(_MC_CHUNK, n_samples - start)
        rng = np.random.default_rng(np.random.SeedSequence([seed, chunk_idx]))
        on = rng.random((size, n_s)) < on_prob
        f_samples = on.astype(np.int64) @ weights
        successes += kernels.mc_count(f_samples, n_s, cvnf_masks, rvnf_masks, adj_masks)
    value = successes / n_samples
    stderr = math.sqrt(value * (1.0 - value) / n_samples)
    return ReliabilityResult(value=value, method=Method.MONTE_CARLO,
                             stderr=stderr, n_samples=n_samples)


def surrogate_objective(inst: Instance, cc: ChainComposition, emb: Embedding,
                        enumeration_limit: int = ENUMERATION_LIMIT) -> float:
    """Hinge relaxation of the reliability: per failure vector, the success
    indicator is replaced by min(1, 1 - n_rvnf + total supporting pair count).

    Can exceed the exact reliability when one RVNF has surplus supporting
    pairs (the pair-count relaxation is one-sided), and can be negative for
    sparse embeddings.
    """
    _check_enumerable(inst, enumeration_limit)
    cvnf_masks, rvnf_masks, adj_masks = solution_masks(cc, emb, inst.topology)
    return kernels.surrogate_sum(
        inst.n_servers, inst.failures.p, cvnf_masks, rvnf_masks, adj_masks,
        inst.logical.n_rvnf,
    )
