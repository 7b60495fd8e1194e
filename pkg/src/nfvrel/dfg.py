"""Disconnected forwarding graph: union bound and balanced replication.

With no logical edges every VNF succeeds independently when at least one of
its replicas is on, so the exact reliability is a closed-form product and the
union bound has a provably optimal balanced-replication minimizer whenever
r * L is an integer (r = n_servers / n_vnfs).
"""

from dataclasses import dataclass
from itertools import product

import numpy as np

from .errors import EnumerationLimitExceeded, NonIntegerReplication

_INTEGRALITY_TOL = 1e-9


@dataclass(frozen=True)
class DfgInstance:
    n_vnfs: int
    n_servers: int
    p: float
    load_budget: int

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("p must lie in [0, 1]")
        if self.load_budget < 0:
            raise ValueError("load_budget must be nonnegative")

    @property
    def rate(self):
        return self.n_servers / self.n_vnfs


@dataclass(frozen=True)
class DfgEmbedding:
    x: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.x, dtype=np.uint8)
        object.__setattr__(self, "x", m)

    @property
    def replica_counts(self):
        return self.x.sum(axis=1).astype(np.int64)


def dfg_reliability(inst: DfgInstance, emb: DfgEmbedding) -> float:
    """Exact success probability: product over VNFs of (1 - p^replicas).

    A VNF with zero replicas contributes 1 - p^0 = 0, so any uninstantiated
    VNF zeroes the whole product.
    """
    if emb.x.shape != (inst.n_vnfs, inst.n_servers):
        raise ValueError("embedding shape inconsistent with instance")
    value = 1.0
    for k in emb.replica_counts:
        value *= 1.0 - inst.p ** int(k)
    return value


def union_bound_value(n_v: int, p: float, r: float, load: int) -> float:
    """Lower bound 1 - n_v * p^(r * min(load, n_v)) on the optimal reliability.

    Valid only when r * load is an integer; may be negative (vacuous), and is
    returned unclamped so callers can see where the bound is informative.
    """
    if r <= 0:
        raise ValueError("overprovisioning rate must be positive")
    rl = r * load
    if abs(rl - round(rl)) > _INTEGRALITY_TOL:
        raise NonIntegerReplication(
            f"r*L = {rl} is not an integer; the balanced-optimality argument "
            "does not apply"
        )
    return 1.0 - n_v * p ** (r * min(load, n_v))


def balanced_embedding(n_v: int, n_s: int, load: int) -> DfgEmbedding:
    """Round-robin placement: every server hosts exactly min(load, n_v)
    distinct VNFs and replica counts differ by at most one across VNFs."""
    x = np.zeros((n_v, n_s), dtype=np.uint8)
    per_server = min(load, n_v)
    if per_server == 0:
        return DfgEmbedding(x)
    for j in range(n_s * per_server):
        x[j % n_v, j // per_server] = 1
    return DfgEmbedding(x)


def union_bound_objective(emb: DfgEmbedding, p: float) -> float:
    """Sum over VNFs of p^replicas - the quantity the balanced placement
    provably minimizes."""
    return float(sum(p ** int(k) for k in emb.replica_counts))


def brute_force_min_union_bound(n_v: int, n_s: int, load: int, p: float):
    """Exhaustive minimizer of the union-bound objective over all embeddings
    with per-server load <= load.  Optimality oracle; guarded to tiny sizes."""
    if n_v * n_s > 20:
        raise EnumerationLimitExceeded(
            f"{n_v}x{n_s} embedding matrix too large to enumerate"
        )
    # enumerate per-server columns with load <= budget, then all combinations
    columns = [c for c in product((0, 1), repeat=n_v) if sum(c) <= load]
    best_val = None
    best_x = None
    for cols in product(columns, repeat=n_s):
        x = np.array(cols, dtype=np.uint8).T
        val = union_bound_objective(DfgEmbedding(x), p)
        if best_val is None or val < best_val:
            best_val = val
            best_x = x
    return best_val, DfgEmbedding(best_x)
