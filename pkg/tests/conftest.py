"""Shared builders and independent oracles for the test suite."""

from itertools import product

import numpy as np
import pytest

from nfvrel.model import (
    ChainComposition,
    Embedding,
    FailureModel,
    Instance,
    LogicalLayer,
    PhysicalTopology,
    SelfLinkPolicy,
    check_feasibility,
)
from nfvrel.reliability import surrogate_objective
from nfvrel.solver import Block, Subproblem, _assignments


def make_instance(adjacency, p, n_cvnf, n_rvnf, capacities, load_budget,
                  policy=SelfLinkPolicy.ALWAYS_ON):
    adjacency = np.asarray(adjacency)
    return Instance(
        topology=PhysicalTopology(n_servers=adjacency.shape[0],
                                  adjacency=adjacency, self_link_policy=policy),
        failures=FailureModel(p),
        logical=LogicalLayer(n_cvnf=n_cvnf, n_rvnf=n_rvnf, capacities=capacities),
        load_budget=load_budget,
    )


def full_instance(n_s, p, n_cvnf=1, n_rvnf=1, capacities=None, load_budget=2):
    """Fully connected topology (self-links on) with uniform failure prob."""
    if capacities is None:
        capacities = [n_rvnf] * n_cvnf
    return make_instance(np.ones((n_s, n_s), dtype=int), [p] * n_s,
                         n_cvnf, n_rvnf, capacities, load_budget)


@pytest.fixture
def pair_instance():
    """Two fully connected servers, CVNF pinned to server 0, RVNF to server 1.

    Exact reliability is 0.81: the only supporting pair is (0, 1), which needs
    both servers on, probability 0.9 * 0.9.
    """
    inst = full_instance(2, 0.1)
    cc = ChainComposition([0])
    emb = Embedding(x_c=[[1, 0]], x_r=[[0, 1]])
    return inst, cc, emb


def random_instance(rng, n_s=4, n_cvnf=2, n_rvnf=4, edge_prob=0.8,
                    load_budget=3):
    """Random connected-ish topology with random failure probabilities."""
    adj = np.zeros((n_s, n_s), dtype=np.uint8)
    for s in range(n_s):
        for t in range(s + 1, n_s):
            if rng.random() < edge_prob:
                adj[s, t] = adj[t, s] = 1
    p = rng.uniform(0.05, 0.3, size=n_s)
    return make_instance(adj, p, n_cvnf, n_rvnf, [n_rvnf] * n_cvnf, load_budget)


def random_feasible_solution(inst, rng, max_tries=500):
    """Rejection-sample a feasible (chain, embedding): each CVNF on one host,
    each RVNF on one server linked to its controller's host."""
    logical = inst.logical
    adj = inst.topology.adjacency
    for _ in range(max_tries):
        asg = rng.integers(0, logical.n_cvnf, size=logical.n_rvnf)
        counts = np.bincount(asg, minlength=logical.n_cvnf)
        if np.any(counts > logical.capacities):
            continue
        load = np.zeros(inst.n_servers, dtype=int)
        x_c = np.zeros((logical.n_cvnf, inst.n_servers), dtype=np.uint8)
        hosts = rng.integers(0, inst.n_servers, size=logical.n_cvnf)
        ok = True
        for u, s in enumerate(hosts):
            if load[s] >= inst.load_budget:
                ok = False
                break
            x_c[u, s] = 1
            load[s] += 1
        if not ok:
            continue
        x_r = np.zeros((logical.n_rvnf, inst.n_servers), dtype=np.uint8)
        for v in range(logical.n_rvnf):
            s = hosts[asg[v]]
            options = [t for t in range(inst.n_servers)
                       if adj[s, t] and load[t] < inst.load_budget]
            if not options:
                ok = False
                break
            t = options[rng.integers(0, len(options))]
            x_r[v, t] = 1
            load[t] += 1
        if not ok:
            continue
        cc = ChainComposition(asg)
        emb = Embedding(x_c=x_c, x_r=x_r)
        if check_feasibility(inst, cc, emb).feasible:
            return cc, emb
    raise RuntimeError("could not sample a feasible solution")


def enumerate_block_optimum(sub: Subproblem):
    """Independent brute-force block oracle built on surrogate_objective.

    Enumerates every chain assignment and every 0/1 matrix for the free block,
    keeps candidates whose combined solution is feasible, and returns the best
    surrogate value (None if no candidate is feasible, which cannot happen:
    the zero matrix always is).
    """
    inst = sub.instance
    logical = inst.logical
    n_s = inst.n_servers
    n_rows = logical.n_rvnf if sub.block is Block.REGULAR else logical.n_cvnf
    fixed = np.asarray(sub.fixed_block, dtype=np.uint8)
    best = None
    for asg in _assignments(logical, sub.cc_fixed):
        cc = ChainComposition(np.array(asg))
        for code in range(1 << (n_rows * n_s)):
            matrix = np.array(
                [[(code >> (i * n_s + t)) & 1 for t in range(n_s)]
                 for i in range(n_rows)], dtype=np.uint8)
            if sub.block is Block.REGULAR:
                emb = Embedding(x_c=fixed, x_r=matrix)
            else:
                emb = Embedding(x_c=matrix, x_r=fixed)
            if not check_feasibility(inst, cc, emb).feasible:
                continue
            val = surrogate_objective(inst, cc, emb)
            if best is None or val > best:
                best = val
    return best


def all_failure_masks(n_s):
    return range(1 << n_s)
