"""Block coordinate descent for joint chain composition and embedding.

Each block update solves the linearized binary subproblem to global optimality
by enumerating capacity-feasible RVNF->CVNF assignments and, per assignment,
running a depth-first branch-and-bound over the block's free placement bits
(kernels.search_block).  The epigraph variables are eliminated in closed form:
for fixed binaries the optimal per-failure-vector value is
min(1, 1 - n_rvnf + supporting pair count), so the search scores leaves with
that expression directly.

Canonical tie-breaking is the first solution in deterministic search order:
assignments in lexicographic order, placement bits explored set-first in
round-robin order over servers sorted by descending degree.  On a flat
objective (e.g. the first block solve after zero initialization) this yields
maximum feasible replication spread round-robin across servers.
"""

from dataclasses import dataclass
from enum import Enum
from itertools import product
import math
import time

import numpy as np

from . import kernels
from .errors import DimensionMismatch, EnumerationLimitExceeded
from .kernels import _vector_probs
from .model import (
    ChainComposition,
    Embedding,
    Instance,
    LogicalLayer,
    check_feasibility,
)
from .reliability import exact_reliability


class Block(str, Enum):
    REGULAR = "regular"        # optimize x_r (and cc) with x_c fixed
    CONTROLLER = "controller"  # optimize x_c (and cc) with x_r fixed


class InitStrategy(str, Enum):
    ZERO = "zero"
    ROUND_ROBIN = "round_robin"
    RANDOM = "random"


@dataclass(frozen=True)
class SolverConfig:
    max_iterations: int = 20
    epsilon: float = 1e-9
    init_strategy: InitStrategy = InitStrategy.ROUND_ROBIN
    seed: int = 0
    restarts: int = 1
    node_limit: int = 0  # 0 = unlimited

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        object.__setattr__(self, "init_strategy", InitStrategy(self.init_strategy))


@dataclass(frozen=True)
class Subproblem:
    block: Block
    fixed_block: np.ndarray  # the frozen placement matrix of the other block
    instance: Instance
    cc_fixed: ChainComposition | None = None


@dataclass
class SolveReport:
    embedding: Embedding
    cc: ChainComposition
    surrogate_trace: list
    exact_reliability: float
    iterations: int
    converged: bool
    wall_time: float
    nodes_explored: int
    node_limit_hit: bool = False


def _server_order(inst: Instance):
    deg = inst.topology.adjacency.sum(axis=1)
    return sorted(range(inst.n_servers), key=lambda s: (-int(deg[s]), s))


def _masks(matrix, n_s):
    weights = 1 << np.arange(n_s, dtype=np.int64)
    return matrix.astype(np.int64) @ weights


def _capacity_ok(asg, capacities):
    counts = np.bincount(np.asarray(asg), minlength=len(capacities))
    return bool(np.all(counts <= capacities))


def _assignments(logical: LogicalLayer, cc_fixed):
    if cc_fixed is not None:
        yield tuple(int(u) for u in cc_fixed.assignment)
        return
    for asg in product(range(logical.n_cvnf), repeat=logical.n_rvnf):
        if _capacity_ok(asg, logical.capacities):
            yield asg


def _pair_count_table(host_masks, adj_masks, n_s):
    """table[i, t, f] = [bit t of f] * popcount(f & host_masks[i] & adj_masks[t]):
    active linked partners for a VNF placed on server t under failure state f."""
    n_f = 1 << n_s
    f_arr = np.arange(n_f, dtype=np.int64)
    table = np.zeros((host_masks.shape[0], n_s, n_f), dtype=np.int64)
    for i in range(host_masks.shape[0]):
        for t in range(n_s):
            m = int(host_masks[i]) & int(adj_masks[t])
            table[i, t] = ((f_arr >> t) & 1) * np.bitwise_count(
                (f_arr & m).astype(np.uint64)
            ).astype(np.int64)
    return table


def _solve_block(sub: Subproblem, weights, inc_value, node_limit, reserve=0):
    """Exact block solve; returns (found, block_matrix, assignment, value,
    nodes, limit_hit).  Only solutions strictly better than inc_value count.

    reserve withholds load slots per server from this block (used by the BCD
    warm-up so a flat first fill cannot starve the other block).
    """
    inst = sub.instance
    n_s = inst.n_servers
    logical = inst.logical
    adj_masks = _masks(inst.topology.adjacency, n_s)
    fixed = np.asarray(sub.fixed_block, dtype=np.uint8)
    fixed_masks = _masks(fixed, n_s)

    cap = inst.load_budget - fixed.sum(axis=0).astype(np.int64)
    if np.any(cap < 0):
        raise DimensionMismatch("fixed block already violates the load budget")
    if reserve:
        cap = np.maximum(cap - reserve, 0)

    # pair-count deltas for one free bit, indexed by fixed-side row
    table = _pair_count_table(fixed_masks, adj_masks, n_s)
    # bit (row, t) may be set only if every fixed-side host of row is linked to t
    link_ok = np.array(
        [[(int(fixed_masks[i]) & ~int(adj_masks[t])) == 0 for t in range(n_s)]
         for i in range(fixed.shape[0])],
        dtype=bool,
    )

    n_rows = logical.n_rvnf if sub.block is Block.REGULAR else logical.n_cvnf
    order = _server_order(inst)

    best = (False, None, None, inc_value)
    total_nodes = 0
    limit_hit = False
    for asg in _assignments(logical, sub.cc_fixed):
        if sub.block is Block.REGULAR:
            # free row v pairs with fixed controller row asg[v]
            row_delta = [table[asg[v]] for v in range(n_rows)]
            row_ok = [link_ok[asg[v]] for v in range(n_rows)]
        else:
            # free controller row u aggregates its assigned RVNFs
            row_delta = []
            row_ok = []
            for u in range(n_rows):
                vs = [v for v in range(logical.n_rvnf) if asg[v] == u]
                if vs:
                    row_delta.append(table[vs].sum(axis=0))
                    row_ok.append(link_ok[vs].all(axis=0))
                else:
                    row_delta.append(np.zeros_like(table[0]))
                    row_ok.append(np.ones(n_s, dtype=bool))

        bits = []
        for rnd in range(n_s):
            for row in range(n_rows):
                t = order[(row + rnd) % n_s]
                if row_ok[row][t]:
                    bits.append((row, t))
        if bits:
            delta = np.stack([row_delta[row][t] for row, t in bits])
            colidx = np.array([t for _, t in bits], dtype=np.int64)
        else:
            delta = np.zeros((0, weights.shape[0]), dtype=np.int64)
            colidx = np.zeros(0, dtype=np.int64)

        remaining = 0
        if node_limit > 0:
            remaining = node_limit - total_nodes
            if remaining <= 0:
                limit_hit = True
                break
        found, value, chosen, nodes, hit = kernels.search_block(
            delta, colidx, cap.copy(), weights, logical.n_rvnf, best[3], remaining
        )
        total_nodes += int(nodes)
        limit_hit = limit_hit or bool(hit)
        if found:
            matrix = np.zeros((n_rows, n_s), dtype=np.uint8)
            for (row, t), bit in zip(bits, chosen):
                if bit:
                    matrix[row, t] = 1
            best = (True, matrix, asg, float(value))
    return best[0], best[1], best[2], best[3], total_nodes, limit_hit


def failure_weights(inst: Instance):
    n_f = 1 << inst.n_servers
    return _vector_probs(np.arange(n_f, dtype=np.int64), inst.n_servers, inst.failures.p)


def solve_subproblem_exact(sub: Subproblem, node_limit: int = 0):
    """Globally optimal block update; returns (block matrix, chain, value).

    Never infeasible: the zero placement (with any capacity-feasible chain)
    is always a candidate.
    """
    weights = failure_weights(sub.instance)
    found, matrix, asg, value, _, limit_hit = _solve_block(
        sub, weights, -math.inf, node_limit
    )
    if not found:  # only possible if the node budget died before any leaf
        raise EnumerationLimitExceeded("node limit exhausted before any solution")
    return matrix, ChainComposition(np.array(asg)), value, limit_hit


def _initial_x_c(inst: Instance, cfg: SolverConfig, restart: int):
    n_c, n_s = inst.logical.n_cvnf, inst.n_servers
    strategy = cfg.init_strategy
    if cfg.restarts > 1 and restart > 0:
        strategy = InitStrategy.RANDOM
    if strategy is InitStrategy.ZERO:
        return np.zeros((n_c, n_s), dtype=np.uint8)
    if strategy is InitStrategy.ROUND_ROBIN:
        x = np.zeros((n_c, n_s), dtype=np.uint8)
        order = _server_order(inst)
        for u in range(n_c):
            s = order[u % n_s]
            if x[:, s].sum() < inst.load_budget:
                x[u, s] = 1
        return x
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, restart]))
    x = (rng.random((n_c, n_s)) < 0.5).astype(np.uint8)
    for s in range(n_s):  # repair column overloads, keeping lowest rows
        over = int(x[:, s].sum()) - inst.load_budget
        if over > 0:
            ones = np.flatnonzero(x[:, s])
            x[ones[len(ones) - over:], s] = 0
    return x


def _bcd_restart(inst: Instance, cfg: SolverConfig, cc_fixed, restart: int,
                 x_c_init=None):
    weights = failure_weights(inst)
    n_r, n_c, n_s = inst.logical.n_rvnf, inst.logical.n_cvnf, inst.n_servers
    x_c = _initial_x_c(inst, cfg, restart) if x_c_init is None else x_c_init.copy()
    x_r = np.zeros((n_r, n_s), dtype=np.uint8)
    cc = cc_fixed
    current = 1.0 - n_r  # surrogate of the empty regular placement
    trace = []
    nodes = 0
    limit_hit = False
    converged = False
    iterations = 0
    for _ in range(cfg.max_iterations):
        iterations += 1
        prev = current
        for block in (Block.REGULAR, Block.CONTROLLER):
            fixed = x_c if block is Block.REGULAR else x_r
            sub = Subproblem(block=block, fixed_block=fixed, instance=inst,
                             cc_fixed=cc_fixed)
            remaining = 0
            if cfg.node_limit > 0:
                remaining = cfg.node_limit - nodes
                if remaining <= 0:
                    limit_hit = True
                    break
            # accept equal-value solutions so flat objectives still move off
            # the degenerate empty placement (canonical max-replication fill);
            # with no controllers placed yet, hold one slot per server back so
            # the flat fill cannot starve the controller block
            reserve = 1 if (block is Block.REGULAR and x_c.sum() == 0) else 0
            found, matrix, asg, value, n_nodes, hit = _solve_block(
                sub, weights, current - 1e-12, remaining, reserve=reserve
            )
            nodes += n_nodes
            limit_hit = limit_hit or hit
            if found:
                if block is Block.REGULAR:
                    x_r = matrix
                else:
                    x_c = matrix
                cc = ChainComposition(np.array(asg))
                current = value
            trace.append(current)
        if limit_hit:
            break
        if current - prev < cfg.epsilon:
            converged = True
            break
    if cc is None:  # degenerate: never found any block solution
        cc = cc_min(inst.logical)
    emb = Embedding(x_c=x_c, x_r=x_r)
    rel = exact_reliability(inst, cc, emb).value
    return SolveReport(
        embedding=emb, cc=cc, surrogate_trace=trace, exact_reliability=rel,
        iterations=iterations, converged=converged, wall_time=0.0,
        nodes_explored=nodes, node_limit_hit=limit_hit,
    )


def _polish(inst: Instance, cc: ChainComposition, x_c, x_r):
    """Greedy local search on the exact objective: single-replica additions
    and relocations.

    The surrogate is blind to ties such as "two pairs on one RVNF" vs "one
    pair each", which can strand an RVNF with zero replicas even at a
    surrogate optimum.  Repeatedly apply the feasible addition or move with
    the largest strict exact-reliability gain (deterministic scan order)."""
    n_s = inst.n_servers
    n_c, n_r = x_c.shape[0], x_r.shape[0]
    asg = [int(u) for u in cc.assignment]
    bit_weights = 1 << np.arange(n_s, dtype=np.int64)
    adj_arr = inst.topology.adjacency.astype(np.int64) @ bit_weights
    adj_m = [int(m) for m in adj_arr]
    not_adj = [~m for m in adj_m]
    p = inst.failures.p
    # rows 0..n_c-1 are controllers, rows n_c.. are RVNFs, all as bitmasks
    masks = [int(m) for m in x_c.astype(np.int64) @ bit_weights]
    masks += [int(m) for m in x_r.astype(np.int64) @ bit_weights]

    def exact_value():
        cvnf = np.array([masks[asg[v]] for v in range(n_r)], dtype=np.int64)
        rvnf = np.array(masks[n_c:], dtype=np.int64)
        return kernels.exact_sum(n_s, p, cvnf, rvnf, adj_arr)

    def partner_mask(row):
        if row < n_c:
            out = 0
            for v in range(n_r):
                if asg[v] == row:
                    out |= masks[n_c + v]
            return out
        return masks[asg[row - n_c]]

    def loads():
        out = [0] * n_s
        for m in masks:
            for t in range(n_s):
                out[t] += (m >> t) & 1
        return out

    n_rows = n_c + n_r
    while True:
        base = exact_value()
        best_gain = 1e-15
        best = None
        removals = [None] + [(row, t) for row in range(n_rows)
                             for t in range(n_s) if (masks[row] >> t) & 1]
        for removal in removals:
            if removal is not None:
                masks[removal[0]] ^= 1 << removal[1]
            load = loads()
            for row in range(n_rows):
                pm = partner_mask(row)
                for t in range(n_s):
                    if (masks[row] >> t) & 1 or load[t] >= inst.load_budget:
                        continue
                    if removal == (row, t):
                        continue
                    # every host of every logical partner must be linked to t
                    if pm & not_adj[t]:
                        continue
                    masks[row] |= 1 << t
                    gain = exact_value() - base
                    masks[row] ^= 1 << t
                    if gain > best_gain:
                        best_gain = gain
                        best = (removal, (row, t))
            if removal is not None:
                masks[removal[0]] |= 1 << removal[1]
        if best is None:
            break
        removal, (row, t) = best
        if removal is not None:
            masks[removal[0]] ^= 1 << removal[1]
        masks[row] |= 1 << t
    x_c = np.array([[(masks[u] >> t) & 1 for t in range(n_s)]
                    for u in range(n_c)], dtype=np.uint8)
    x_r = np.array([[(masks[n_c + v] >> t) & 1 for t in range(n_s)]
                    for v in range(n_r)], dtype=np.uint8)
    return x_c, x_r


def _report_key(report: SolveReport):
    return (
        report.exact_reliability,
        report.surrogate_trace[-1] if report.surrogate_trace else -math.inf,
    )


def _candidate_reports(inst: Instance, cfg: SolverConfig, cc_fixed):
    """One BCD descent per start: the configured initialization and, for
    joint solves, the empty start plus free-chain continuations warm-started
    from the even-spread and fill-first baseline compositions.  Extra
    restarts beyond the first use seeded random starts."""
    candidates = [_bcd_restart(inst, cfg, cc_fixed, 0)]
    if cc_fixed is None:
        if cfg.init_strategy is not InitStrategy.ZERO:
            zero_cfg = SolverConfig(
                max_iterations=cfg.max_iterations, epsilon=cfg.epsilon,
                init_strategy=InitStrategy.ZERO, seed=cfg.seed,
                restarts=1, node_limit=cfg.node_limit,
            )
            candidates.append(_bcd_restart(inst, zero_cfg, None, 0))
        for cc0 in (cc_min(inst.logical), cc_max(inst.logical)):
            base = _bcd_restart(inst, cfg, cc0, 0)
            candidates.append(
                _bcd_restart(inst, cfg, None, 0, x_c_init=base.embedding.x_c)
            )
    for restart in range(1, max(1, cfg.restarts)):
        candidates.append(_bcd_restart(inst, cfg, cc_fixed, restart))
    return candidates


def bcd_solve(inst: Instance, cfg: SolverConfig = SolverConfig(),
              cc_fixed: ChainComposition | None = None) -> SolveReport:
    """Alternate exact regular-block and controller-block solves until the
    surrogate stops improving; best candidate wins by exact reliability
    (ties by final surrogate).

    With a fixed chain composition the solve is the plain single-trajectory
    descent (plus any configured restarts): that is the baseline algorithm
    the joint method is compared against, so it gets no extra machinery.

    Joint solves additionally polish every candidate with the exact-objective
    local search, and — because surrogate optima can get *worse* as the load
    budget loosens (the hinge rewards pair hoarding the exact objective does
    not) — descend at every tighter budget too, lifting those solutions to
    the full budget.  Extra replicas never lower the exact reliability, so
    the joint value is non-decreasing in the load budget by construction.
    """
    start = time.perf_counter()
    if cc_fixed is not None:
        candidates = _candidate_reports(inst, cfg, cc_fixed)
    else:
        budgets = list(range(1, min(inst.load_budget, inst.logical.n_vnf)))
        budgets.append(inst.load_budget)
        candidates = []
        for budget in budgets:
            tight = inst if budget == inst.load_budget else Instance(
                topology=inst.topology, failures=inst.failures,
                logical=inst.logical, load_budget=budget)
            for report in _candidate_reports(tight, cfg, None):
                x_c, x_r = _polish(inst, report.cc, report.embedding.x_c,
                                   report.embedding.x_r)
                report.embedding = Embedding(x_c=x_c, x_r=x_r)
                report.exact_reliability = exact_reliability(
                    inst, report.cc, report.embedding).value
                candidates.append(report)
    best = max(candidates, key=_report_key)
    best.wall_time = time.perf_counter() - start
    return best


def fge_only_solve(inst: Instance, cc: ChainComposition,
                   cfg: SolverConfig = SolverConfig()) -> SolveReport:
    """Embedding-only optimization with the chain composition frozen."""
    cc.validate(inst.logical)
    return bcd_solve(inst, cfg, cc_fixed=cc)


def cc_min(logical: LogicalLayer) -> ChainComposition:
    """Spread RVNFs over controllers as evenly as capacities allow."""
    counts = np.zeros(logical.n_cvnf, dtype=np.int64)
    asg = np.zeros(logical.n_rvnf, dtype=np.int64)
    for v in range(logical.n_rvnf):
        open_u = [u for u in range(logical.n_cvnf)
                  if counts[u] < logical.capacities[u]]
        u = min(open_u, key=lambda u: (counts[u], u))
        asg[v] = u
        counts[u] += 1
    return ChainComposition(asg).validate(logical)


def cc_max(logical: LogicalLayer) -> ChainComposition:
    """Fill controllers to capacity in index order."""
    asg = np.zeros(logical.n_rvnf, dtype=np.int64)
    u = 0
    used = 0
    for v in range(logical.n_rvnf):
        while used >= logical.capacities[u]:
            u += 1
            used = 0
        asg[v] = u
        used += 1
    return ChainComposition(asg).validate(logical)


def brute_force_joint(inst: Instance, combo_limit: int = 1 << 22,
                      cc_fixed: ChainComposition | None = None):
    """Exhaustive maximizer of the exact reliability over all feasible
    (embedding, chain) pairs; ties go to the smallest bit encoding."""
    logical = inst.logical
    n_s = inst.n_servers
    n_v = logical.n_vnf
    n_cc = 1 if cc_fixed is not None else logical.n_cvnf ** logical.n_rvnf
    if n_cc * (1 << (n_v * n_s)) > combo_limit:
        raise EnumerationLimitExceeded(
            f"{n_cc} chains x 2^{n_v * n_s} embeddings exceed the guard"
        )
    row_mask = (1 << n_s) - 1
    best_val = -1.0
    best = None
    for asg in _assignments(logical, cc_fixed):
        cc = ChainComposition(np.array(asg))
        for code in range(1 << (n_v * n_s)):
            rows = [(code >> (i * n_s)) & row_mask for i in range(n_v)]
            loads = [sum((m >> s) & 1 for m in rows) for s in range(n_s)]
            if max(loads) > inst.load_budget:
                continue
            x_c = np.array(
                [[(rows[u] >> s) & 1 for s in range(n_s)]
                 for u in range(logical.n_cvnf)], dtype=np.uint8)
            x_r = np.array(
                [[(rows[logical.n_cvnf + v] >> s) & 1 for s in range(n_s)]
                 for v in range(logical.n_rvnf)], dtype=np.uint8)
            emb = Embedding(x_c=x_c, x_r=x_r)
            if not check_feasibility(inst, cc, emb).feasible:
                continue
            val = exact_reliability(inst, cc, emb).value
            if val > best_val:
                best_val = val
                best = (cc, emb)
    return best_val, best
