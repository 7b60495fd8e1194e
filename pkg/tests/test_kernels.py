"""Parity between the numba and numpy kernel implementations, plus an
independent brute-force check of the branch-and-bound block search."""

from itertools import product

import numpy as np
import pytest

from conftest import random_feasible_solution, random_instance
from nfvrel import kernels
from nfvrel.reliability import solution_masks
from nfvrel.solver import failure_weights


def _random_case(seed):
    rng = np.random.default_rng(seed)
    inst = random_instance(rng, n_s=4, n_cvnf=2, n_rvnf=3)
    cc, emb = random_feasible_solution(inst, rng)
    cvnf_masks, rvnf_masks, adj_masks = solution_masks(cc, emb, inst.topology)
    return inst, cvnf_masks, rvnf_masks, adj_masks


numba_required = pytest.mark.skipif(not kernels.HAS_NUMBA,
                                    reason="numba not installed")


def test_pop16_matches_bitwise_count():
    vals = np.arange(1 << 16, dtype=np.uint16)
    assert np.array_equal(kernels._POP16, np.bitwise_count(vals).astype(np.int64))


@numba_required
@pytest.mark.parametrize("seed", range(5))
def test_exact_sum_parity(seed):
    inst, cm, rm, am = _random_case(seed)
    a = kernels.exact_sum_nb(inst.n_servers, inst.failures.p, cm, rm, am)
    b = kernels.exact_sum_py(inst.n_servers, inst.failures.p, cm, rm, am)
    assert a == pytest.approx(b, abs=1e-13)


@numba_required
@pytest.mark.parametrize("seed", range(5))
def test_surrogate_sum_parity(seed):
    inst, cm, rm, am = _random_case(seed)
    n_r = inst.logical.n_rvnf
    a = kernels.surrogate_sum_nb(inst.n_servers, inst.failures.p, cm, rm, am, n_r)
    b = kernels.surrogate_sum_py(inst.n_servers, inst.failures.p, cm, rm, am, n_r)
    assert a == pytest.approx(b, abs=1e-13)


@numba_required
@pytest.mark.parametrize("seed", range(5))
def test_mc_count_parity(seed):
    inst, cm, rm, am = _random_case(seed)
    rng = np.random.default_rng(seed)
    f_samples = rng.integers(0, 1 << inst.n_servers, size=500, dtype=np.int64)
    a = kernels.mc_count_nb(f_samples, inst.n_servers, cm, rm, am)
    b = kernels.mc_count_py(f_samples, inst.n_servers, cm, rm, am)
    assert a == b


def _random_block_inputs(seed, n_bits=8, n_cols=3, n_f=8, n_rvnf=3):
    rng = np.random.default_rng(seed)
    delta = rng.integers(0, 3, size=(n_bits, n_f)).astype(np.int64)
    colidx = rng.integers(0, n_cols, size=n_bits).astype(np.int64)
    cap = rng.integers(0, 3, size=n_cols).astype(np.int64)
    weights = rng.dirichlet(np.ones(n_f))
    return delta, colidx, cap, weights, n_rvnf


def _brute_force_block(delta, colidx, cap, weights, n_rvnf):
    n_bits = delta.shape[0]
    best = None
    for bits in product((0, 1), repeat=n_bits):
        loads = np.zeros(cap.shape[0], dtype=np.int64)
        for b, bit in enumerate(bits):
            loads[colidx[b]] += bit
        if np.any(loads > cap):
            continue
        psi = sum(delta[b] for b, bit in enumerate(bits) if bit)
        if isinstance(psi, int):  # no bits set
            psi = np.zeros(delta.shape[1], dtype=np.int64)
        t = np.minimum(1.0, 1.0 - n_rvnf + psi)
        val = float((weights * t).sum())
        if best is None or val > best:
            best = val
    return best


@pytest.mark.parametrize("seed", range(10))
def test_search_block_matches_brute_force(seed):
    delta, colidx, cap, weights, n_rvnf = _random_block_inputs(seed)
    expected = _brute_force_block(delta, colidx, cap, weights, n_rvnf)
    found, value, bits, nodes, hit = kernels.search_block(
        delta, colidx, cap.copy(), weights, n_rvnf, -1e18, 0
    )
    assert found and not hit
    assert value == pytest.approx(expected, abs=1e-12)
    # the reported bit vector must reproduce the reported value
    psi = (delta * bits[:, None].astype(np.int64)).sum(axis=0)
    t = np.minimum(1.0, 1.0 - n_rvnf + psi)
    assert float((weights * t).sum()) == pytest.approx(value, abs=1e-12)
    loads = np.bincount(colidx[bits.astype(bool)], minlength=cap.shape[0])
    assert np.all(loads <= cap)


@numba_required
@pytest.mark.parametrize("seed", range(10))
def test_search_block_parity(seed):
    delta, colidx, cap, weights, n_rvnf = _random_block_inputs(seed)
    a = kernels.search_block_nb(delta, colidx, cap.copy(), weights, n_rvnf, -1e18, 0)
    b = kernels.search_block_py(delta, colidx, cap.copy(), weights, n_rvnf, -1e18, 0)
    assert a[0] == b[0]
    assert a[1] == pytest.approx(b[1], abs=1e-13)
    assert np.array_equal(a[2], b[2])


def test_search_block_incumbent_pruning():
    delta, colidx, cap, weights, n_rvnf = _random_block_inputs(3)
    optimum = _brute_force_block(delta, colidx, cap, weights, n_rvnf)
    # an incumbent at the optimum means no strictly better leaf exists
    found, _, _, _, _ = kernels.search_block(
        delta, colidx, cap.copy(), weights, n_rvnf, optimum, 0
    )
    assert not found


def test_search_block_node_limit():
    delta, colidx, cap, weights, n_rvnf = _random_block_inputs(4, n_bits=12)
    _, _, _, nodes, _ = kernels.search_block(
        delta, colidx, cap.copy(), weights, n_rvnf, -1e18, 0
    )
    assert nodes > 1
    found, _, _, nodes2, hit = kernels.search_block(
        delta, colidx, cap.copy(), weights, n_rvnf, -1e18, 1
    )
    assert hit
    assert nodes2 <= 2


def test_env_flag_name():
    assert kernels.NUMBA_ENV_FLAG == "NFVREL_DISABLE_NUMBA"
