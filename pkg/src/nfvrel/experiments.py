"""Random-topology sweeps: generation, per-trial method runs, aggregation.

Per-trial seeds derive from the sweep seed and trial index (plus the grid
index when the swept parameter shapes the topology itself), so results do not
depend on execution order or on how trials are spread over workers.  All
compared methods see the same sampled topology within a trial, and trials are
paired across grid values so curves over e.g. the load budget use common
random topologies.
"""

from dataclasses import dataclass, field
import csv
import time

import numpy as np

from . import dfg
from .errors import NfvRelError
from .model import (
    FailureModel,
    Instance,
    LogicalLayer,
    PhysicalTopology,
    SelfLinkPolicy,
    check_feasibility,
)
from .solver import SolverConfig, bcd_solve, cc_max, cc_min, fge_only_solve

METHODS = ("Joint", "CCminFGE", "CCmaxFGE", "DfgBound", "DfgBalanced")

CSV_COLUMNS = (
    "param_name", "param_value", "method", "mean_outage", "stderr",
    "n_trials", "n_failed", "mean_iters", "mean_wall_time_s",
)


@dataclass(frozen=True)
class TopologyDistribution:
    n_servers: int
    edge_prob: float
    self_link_policy: SelfLinkPolicy = SelfLinkPolicy.ALWAYS_ON
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.edge_prob <= 1.0:
            raise ValueError("edge_prob must lie in [0, 1]")


def sample_topology(dist: TopologyDistribution) -> PhysicalTopology:
    """Independent edge per unordered server pair with probability edge_prob."""
    rng = np.random.default_rng(dist.seed)
    n = dist.n_servers
    adj = np.zeros((n, n), dtype=np.uint8)
    for s in range(n):
        for t in range(s + 1, n):
            if rng.random() < dist.edge_prob:
                adj[s, t] = adj[t, s] = 1
    return PhysicalTopology(n_servers=n, adjacency=adj,
                            self_link_policy=dist.self_link_policy)


@dataclass(frozen=True)
class SweepSpec:
    n_servers: int = 4
    p: float = 0.15
    n_cvnf: int = 2
    n_rvnf: int = 4
    capacity: int = 4
    load_budget: int = 3
    edge_prob: float = 0.8
    self_link_policy: SelfLinkPolicy = SelfLinkPolicy.ALWAYS_ON
    sweep_param: str = "load_budget"
    sweep_values: tuple = (1, 2, 3, 4, 5, 6)
    n_topologies: int = 100
    methods: tuple = ("Joint", "CCminFGE", "CCmaxFGE")
    seed: int = 0
    solver: SolverConfig = field(default_factory=SolverConfig)

    def __post_init__(self):
        if not self.sweep_values:
            raise ValueError("sweep grid must be nonempty")
        if self.n_topologies < 1:
            raise ValueError("n_topologies must be >= 1")
        unknown = set(self.methods) - set(METHODS)
        if unknown:
            raise ValueError(f"unknown methods: {sorted(unknown)}")
        object.__setattr__(self, "sweep_values", tuple(self.sweep_values))
        object.__setattr__(self, "methods", tuple(self.methods))


@dataclass
class SweepResult:
    param_name: str
    rows: list

    def write_csv(self, fh):
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in self.rows:
            writer.writerow([row[c] if not isinstance(row[c], float)
                             else repr(row[c]) for c in CSV_COLUMNS])


def _grid_instance(spec: SweepSpec, value):
    params = {
        "n_servers": spec.n_servers,
        "p": spec.p,
        "n_cvnf": spec.n_cvnf,
        "n_rvnf": spec.n_rvnf,
        "capacity": spec.capacity,
        "load_budget": spec.load_budget,
        "edge_prob": spec.edge_prob,
    }
    if spec.sweep_param not in params:
        raise ValueError(f"unknown sweep parameter: {spec.sweep_param}")
    params[spec.sweep_param] = value
    return params


def _run_method(method, inst, spec: SweepSpec, params):
    """Returns (outage, iterations).  Solutions from solver methods are
    re-checked for feasibility before their outage is reported."""
    if method == "Joint":
        report = bcd_solve(inst, spec.solver)
    elif method == "CCminFGE":
        report = fge_only_solve(inst, cc_min(inst.logical), spec.solver)
    elif method == "CCmaxFGE":
        report = fge_only_solve(inst, cc_max(inst.logical), spec.solver)
    elif method == "DfgBound":
        n_v = params["n_rvnf"]
        r = params["n_servers"] / n_v
        bound = dfg.union_bound_value(n_v, params["p"], r, params["load_budget"])
        return 1.0 - bound, 0
    elif method == "DfgBalanced":
        n_v = params["n_rvnf"]
        d_inst = dfg.DfgInstance(n_vnfs=n_v, n_servers=params["n_servers"],
                                 p=params["p"], load_budget=params["load_budget"])
        emb = dfg.balanced_embedding(n_v, params["n_servers"], params["load_budget"])
        return 1.0 - dfg.dfg_reliability(d_inst, emb), 0
    else:
        raise ValueError(f"unknown method {method}")
    if not check_feasibility(inst, report.cc, report.embedding).feasible:
        raise NfvRelError("solver returned an infeasible solution")
    return 1.0 - report.exact_reliability, report.iterations


def run_sweep(spec: SweepSpec, progress=None) -> SweepResult:
    rows = []
    for gi, value in enumerate(spec.sweep_values):
        params = _grid_instance(spec, value)
        outages = {m: [] for m in spec.methods}
        iters = {m: [] for m in spec.methods}
        times = {m: [] for m in spec.methods}
        failed = {m: 0 for m in spec.methods}
        for ti in range(spec.n_topologies):
            # pair topologies across grid values (common random numbers)
            # unless the swept parameter itself shapes the topology
            if spec.sweep_param in ("n_servers", "edge_prob"):
                entropy = [spec.seed, gi, ti]
            else:
                entropy = [spec.seed, ti]
            topo_seed = int(np.random.SeedSequence(entropy).generate_state(1)[0])
            topo = sample_topology(TopologyDistribution(
                n_servers=params["n_servers"], edge_prob=params["edge_prob"],
                self_link_policy=spec.self_link_policy, seed=topo_seed,
            ))
            inst = Instance(
                topology=topo,
                failures=FailureModel([params["p"]] * params["n_servers"]),
                logical=LogicalLayer(
                    n_cvnf=params["n_cvnf"], n_rvnf=params["n_rvnf"],
                    capacities=[params["capacity"]] * params["n_cvnf"],
                ),
                load_budget=params["load_budget"],
            )
            for method in spec.methods:
                t0 = time.perf_counter()
                try:
                    outage, n_iters = _run_method(method, inst, spec, params)
                except NfvRelError:
                    failed[method] += 1
                    continue
                times[method].append(time.perf_counter() - t0)
                outages[method].append(outage)
                iters[method].append(n_iters)
            if progress is not None:
                progress(spec.sweep_param, value, ti)
        for method in spec.methods:
            vals = np.array(outages[method], dtype=np.float64)
            n = vals.size
            rows.append({
                "param_name": spec.sweep_param,
                "param_value": value,
                "method": method,
                "mean_outage": float(vals.mean()) if n else float("nan"),
                "stderr": float(vals.std(ddof=1) / np.sqrt(n)) if n > 1 else 0.0,
                "n_trials": n,
                "n_failed": failed[method],
                "mean_iters": float(np.mean(iters[method])) if n else 0.0,
                "mean_wall_time_s": float(np.mean(times[method])) if n else 0.0,
            })
    return SweepResult(param_name=spec.sweep_param, rows=rows)


def dfg_sweep(n_v, p, n_servers=None, loads=None, servers_grid=None, load=None):
    """Union bound vs exact balanced reliability along a load or server grid.

    Exactly one of loads (with n_servers fixed) or servers_grid (with load
    fixed) must be given.  Points where r*L is not an integer report the
    exact value with the bound marked inapplicable.
    """
    if (loads is None) == (servers_grid is None):
        raise ValueError("specify exactly one of loads or servers_grid")
    if loads is not None:
        points = [("load_budget", n_servers, l) for l in loads]
    else:
        points = [("n_servers", ns, load) for ns in servers_grid]
    rows = []
    for param, ns, l in points:
        r = ns / n_v
        try:
            bound = dfg.union_bound_value(n_v, p, r, l)
            applicable = True
        except NfvRelError:
            bound = None
            applicable = False
        inst = dfg.DfgInstance(n_vnfs=n_v, n_servers=ns, p=p, load_budget=l)
        emb = dfg.balanced_embedding(n_v, ns, l)
        rows.append({
            "param_name": param,
            "param_value": l if param == "load_budget" else ns,
            "bound": bound,
            "applicable": applicable,
            "exact_balanced": dfg.dfg_reliability(inst, emb),
        })
    return rows
