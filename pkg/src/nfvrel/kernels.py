"""Hot numeric kernels with numba-compiled and pure-numpy implementations.

The numba path is used by default; set NFVREL_DISABLE_NUMBA=1 (or leave numba
uninstalled) to fall back to vectorized numpy.  Both implementations of every
kernel are exported so the benchmark and parity tests can compare them.

Failure states are encoded as integer bitmasks: bit s of a mask is 1 iff
server s is on.  Per-RVNF masks give the servers hosting its controller and
the servers hosting the RVNF itself; adjacency masks give each server's
physical neighbors.
"""

import os

import numpy as np

NUMBA_ENV_FLAG = "NFVREL_DISABLE_NUMBA"

_disabled = os.environ.get(NUMBA_ENV_FLAG, "0") not in ("", "0")
try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAS_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        if args and callable(args[0]):
            return args[0]
        return wrap

USE_NUMBA = HAS_NUMBA and not _disabled

# 16-bit popcount table; numba-friendly replacement for np.bitwise_count.
_POP16 = np.bitwise_count(np.arange(1 << 16, dtype=np.uint16)).astype(np.int64)


# --- exact reliability: sum over all 2^n_s failure vectors ---

def _exact_sum_loop(n_s, p, cvnf_masks, rvnf_masks, adj_masks):
    total = 0.0
    n_rvnf = cvnf_masks.shape[0]
    for f in range(1 << n_s):
        pf = 1.0
        for s in range(n_s):
            if (f >> s) & 1:
                pf *= 1.0 - p[s]
            else:
                pf *= p[s]
        ok = True
        for v in range(n_rvnf):
            sup = False
            cm = cvnf_masks[v] & f
            rm = rvnf_masks[v] & f
            if cm != 0 and rm != 0:
                for s in range(n_s):
                    if (cm >> s) & 1 and (adj_masks[s] & rm) != 0:
                        sup = True
                        break
            if not sup:
                ok = False
                break
        if ok:
            total += pf
    return total


exact_sum_nb = njit(cache=True)(_exact_sum_loop)


def _vector_probs(f_arr, n_s, p):
    pf = np.ones(f_arr.shape[0], dtype=np.float64)
    for s in range(n_s):
        on = ((f_arr >> s) & 1).astype(bool)
        pf *= np.where(on, 1.0 - p[s], p[s])
    return pf


def _success_np(f_arr, n_s, cvnf_masks, rvnf_masks, adj_masks):
    ok = np.ones(f_arr.shape[0], dtype=bool)
    for v in range(cvnf_masks.shape[0]):
        sup = np.zeros(f_arr.shape[0], dtype=bool)
        rm = rvnf_masks[v]
        for s in range(n_s):
            if (cvnf_masks[v] >> s) & 1:
                sup |= (((f_arr >> s) & 1) != 0) & ((f_arr & (adj_masks[s] & rm)) != 0)
        ok &= sup
    return ok


_CHUNK = 1 << 16


def exact_sum_py(n_s, p, cvnf_masks, rvnf_masks, adj_masks):
    total = 0.0
    n = 1 << n_s
    for start in range(0, n, _CHUNK):
        f_arr = np.arange(start, min(start + _CHUNK, n), dtype=np.int64)
        pf = _vector_probs(f_arr, n_s, p)
        ok = _success_np(f_arr, n_s, cvnf_masks, rvnf_masks, adj_masks)
        total += float(pf[ok].sum())
    return total


def exact_sum(n_s, p, cvnf_masks, rvnf_masks, adj_masks):
    if USE_NUMBA:
        return exact_sum_nb(n_s, p, cvnf_masks, rvnf_masks, adj_masks)
    return exact_sum_py(n_s, p, cvnf_masks, rvnf_masks, adj_masks)


# --- hinge surrogate: sum over f of P(f) * min(1, 1 - n_rvnf + psi(f)) ---

def _surrogate_sum_loop(n_s, p, cvnf_masks, rvnf_masks, adj_masks, n_rvnf):
    total = 0.0
    for f in range(1 << n_s):
        pf = 1.0
        for s in range(n_s):
            if (f >> s) & 1:
                pf *= 1.0 - p[s]
            else:
                pf *= p[s]
        psi = 0
        for v in range(cvnf_masks.shape[0]):
            cm = cvnf_masks[v] & f
            rm = rvnf_masks[v] & f
            if cm != 0 and rm != 0:
                for s in range(n_s):
                    if (cm >> s) & 1:
                        m = adj_masks[s] & rm
                        psi += _POP16[m & 0xFFFF] + _POP16[(m >> 16) & 0xFFFF]
        if psi >= n_rvnf:
            total += pf
        else:
            total += pf * (1.0 - n_rvnf + psi)
    return total


surrogate_sum_nb = njit(cache=True)(_surrogate_sum_loop)


def surrogate_sum_py(n_s, p, cvnf_masks, rvnf_masks, adj_masks, n_rvnf):
    total = 0.0
    n = 1 << n_s
    for start in range(0, n, _CHUNK):
        f_arr = np.arange(start, min(start + _CHUNK, n), dtype=np.int64)
        pf = _vector_probs(f_arr, n_s, p)
        psi = np.zeros(f_arr.shape[0], dtype=np.int64)
        for v in range(cvnf_masks.shape[0]):
            rm = rvnf_masks[v]
            for s in range(n_s):
                if (cvnf_masks[v] >> s) & 1:
                    active = f_arr & (adj_masks[s] & rm)
                    psi += ((f_arr >> s) & 1) * np.bitwise_count(active.astype(np.uint64)).astype(np.int64)
        t = np.minimum(1.0, 1.0 - n_rvnf + psi)
        total += float((pf * t).sum())
    return total


def surrogate_sum(n_s, p, cvnf_masks, rvnf_masks, adj_masks, n_rvnf):
    if USE_NUMBA:
        return surrogate_sum_nb(n_s, p, cvnf_masks, rvnf_masks, adj_masks, n_rvnf)
    return surrogate_sum_py(n_s, p, cvnf_masks, rvnf_masks, adj_masks, n_rvnf)


# --- Monte Carlo: count samples where every RVNF executes ---

def _mc_count_loop(f_samples, n_s, cvnf_masks, rvnf_masks, adj_masks):
    count = 0
    for i in range(f_samples.shape[0]):
        f = f_samples[i]
        ok = True
        for v in range(cvnf_masks.shape[0]):
            sup = False
            cm = cvnf_masks[v] & f
            rm = rvnf_masks[v] & f
            if cm != 0 and rm != 0:
                for s in range(n_s):
                    if (cm >> s) & 1 and (adj_masks[s] & rm) != 0:
                        sup = True
                        break
            if not sup:
                ok = False
                break
        if ok:
            count += 1
    return count


mc_count_nb = njit(cache=True)(_mc_count_loop)


def mc_count_py(f_samples, n_s, cvnf_masks, rvnf_masks, adj_masks):
    return int(_success_np(f_samples, n_s, cvnf_masks, rvnf_masks, adj_masks).sum())


def mc_count(f_samples, n_s, cvnf_masks, rvnf_masks, adj_masks):
    if USE_NUMBA:
        return mc_count_nb(f_samples, n_s, cvnf_masks, rvnf_masks, adj_masks)
    return mc_count_py(f_samples, n_s, cvnf_masks, rvnf_masks, adj_masks)


# --- depth-first branch-and-bound over one block's free placement bits ---

def _search_block_impl(delta, colidx, cap, weights, n_rvnf, inc_value, node_limit):
    """Maximize sum_f weights[f] * min(1, 1 - n_rvnf + psi[f]) over bit choices.

    delta[b, f] is the pair count bit b adds to psi[f] when set; colidx[b] is
    the server column of bit b and cap[] the remaining per-column load budget.
    Bits are explored in order, set-to-1 branch first, with an admissible
    optimistic bound (remaining column capacity times the best undecided delta
    per column).  Only solutions strictly better than inc_value are recorded.
    Returns (found, best_value, best_bits, nodes, limit_hit).
    """
    n_bits = delta.shape[0]
    n_f = delta.shape[1]
    n_cols = cap.shape[0]

    # suffix tables over undecided bits: count per column, max delta per column
    cnt = np.zeros((n_bits + 1, n_cols), dtype=np.int64)
    mx = np.zeros((n_bits + 1, n_cols, n_f), dtype=np.int64)
    for i in range(n_bits - 1, -1, -1):
        for t in range(n_cols):
            cnt[i, t] = cnt[i + 1, t]
            for f in range(n_f):
                mx[i, t, f] = mx[i + 1, t, f]
        c = colidx[i]
        cnt[i, c] += 1
        for f in range(n_f):
            if delta[i, f] > mx[i, c, f]:
                mx[i, c, f] = delta[i, f]

    trial = np.zeros(n_bits, dtype=np.uint8)
    stage = np.zeros(n_bits, dtype=np.int64)
    nopts = np.zeros(n_bits, dtype=np.int64)
    psi = np.zeros(n_f, dtype=np.int64)
    capr = cap.copy()
    best = inc_value
    best_bits = np.zeros(n_bits, dtype=np.uint8)
    found = False
    nodes = 0
    limit_hit = False
    pos = 0
    descend = True
    while True:
        if descend:
            if pos == n_bits:
                nodes += 1
                val = 0.0
                for f in range(n_f):
                    if psi[f] >= n_rvnf:
                        val += weights[f]
                    else:
                        val += weights[f] * (1.0 - n_rvnf + psi[f])
                if val > best:
                    best = val
                    found = True
                    for i in range(n_bits):
                        best_bits[i] = trial[i]
                descend = False
                pos -= 1
                continue
            nodes += 1
            if node_limit > 0 and nodes > node_limit:
                limit_hit = True
                break
            bound = 0.0
            for f in range(n_f):
                opt = psi[f]
                for t in range(n_cols):
                    m = capr[t] if capr[t] < cnt[pos, t] else cnt[pos, t]
                    opt += m * mx[pos, t, f]
                if opt >= n_rvnf:
                    bound += weights[f]
                else:
                    bound += weights[f] * (1.0 - n_rvnf + opt)
            if bound <= best + 1e-15:
                descend = False
                pos -= 1
                continue
            c = colidx[pos]
            if capr[c] > 0:
                nopts[pos] = 2
                trial[pos] = 1
                capr[c] -= 1
                for f in range(n_f):
                    psi[f] += delta[pos, f]
            else:
                nopts[pos] = 1
                trial[pos] = 0
            stage[pos] = 1
            pos += 1
        else:
            if pos < 0:
                break
            if trial[pos] == 1:
                capr[colidx[pos]] += 1
                for f in range(n_f):
                    psi[f] -= delta[pos, f]
            if stage[pos] < nopts[pos]:
                trial[pos] = 0
                stage[pos] += 1
                descend = True
                pos += 1
            else:
                pos -= 1
    return found, best, best_bits, nodes, limit_hit


search_block_nb = njit(cache=True)(_search_block_impl)
search_block_py = _search_block_impl


def search_block(delta, colidx, cap, weights, n_rvnf, inc_value, node_limit=0):
    if USE_NUMBA:
        return search_block_nb(delta, colidx, cap, weights, n_rvnf, inc_value, node_limit)
    return search_block_py(delta, colidx, cap, weights, n_rvnf, inc_value, node_limit)
