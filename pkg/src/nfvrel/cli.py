"""Command-line front end.

Machine-readable payload (JSON/CSV) goes to stdout or the output file;
diagnostics go to stderr.  Exit codes: 0 success, 2 bad input or flags,
3 enumeration limit exceeded, 4 node limit exceeded (solution still written),
5 Monte Carlo consistency check failed.
"""

import argparse
import json
import sys

from .errors import EnumerationLimitExceeded, NfvRelError
from .experiments import SweepSpec, run_sweep
from .model import (
    SelfLinkPolicy,
    check_feasibility,
    load_instance,
    solution_from_dict,
    solution_to_dict,
)
from .reliability import (
    exact_reliability,
    monte_carlo_reliability,
    surrogate_objective,
)
from .solver import (
    InitStrategy,
    SolverConfig,
    bcd_solve,
    brute_force_joint,
    cc_max,
    cc_min,
    fge_only_solve,
)
from . import dfg
from .experiments import TopologyDistribution, sample_topology

EXIT_OK = 0
EXIT_BAD_INPUT = 2
EXIT_ENUM_LIMIT = 3
EXIT_NODE_LIMIT = 4
EXIT_MC_MISMATCH = 5


def _emit(payload):
    json.dump(payload, sys.stdout, indent=2)
    sys.stdout.write("\n")


def _fail(msg, code=EXIT_BAD_INPUT):
    print(f"error: {msg}", file=sys.stderr)
    return code


def _load_pair(instance_path, solution_path):
    inst = load_instance(instance_path)
    with open(solution_path, "r", encoding="utf-8") as fh:
        cc, emb = solution_from_dict(json.load(fh))
    cc.validate(inst.logical)
    if emb.x_c.shape != (inst.logical.n_cvnf, inst.n_servers) or \
            emb.x_r.shape != (inst.logical.n_rvnf, inst.n_servers):
        raise NfvRelError("solution matrices inconsistent with instance")
    return inst, cc, emb


def cmd_evaluate(args):
    inst, cc, emb = _load_pair(args.instance, args.solution)
    report = check_feasibility(inst, cc, emb)
    payload = {
        "feasible": report.feasible,
        "load_violations": report.load_violations,
        "link_violations": report.link_violations,
    }
    try:
        rel = exact_reliability(inst, cc, emb).value
        payload["reliability"] = rel
        payload["outage"] = 1.0 - rel
        payload["surrogate"] = surrogate_objective(inst, cc, emb)
        payload["method"] = "exact_enumeration"
    except EnumerationLimitExceeded as exc:
        if not args.monte_carlo:
            return _fail(f"{exc} (pass --monte-carlo N)", EXIT_ENUM_LIMIT)
        res = monte_carlo_reliability(inst, cc, emb, args.monte_carlo, args.seed)
        payload.update({
            "reliability": res.value,
            "outage": 1.0 - res.value,
            "surrogate": None,
            "method": "monte_carlo",
            "stderr": res.stderr,
            "n_samples": res.n_samples,
        })
    _emit(payload)
    return EXIT_OK


def cmd_solve(args):
    if args.cc == "joint" and args.method not in ("bcd", "brute"):
        return _fail("--cc joint requires --method bcd or brute")
    if args.method == "fge-only" and args.cc == "joint":
        return _fail("--method fge-only requires --cc ccmin or ccmax")
    inst = load_instance(args.instance)
    cfg = SolverConfig(
        max_iterations=args.max_iters, epsilon=args.epsilon,
        init_strategy=args.init, seed=args.seed, restarts=args.restarts,
        node_limit=args.node_limit,
    )
    cc_fixed = None
    if args.cc == "ccmin":
        cc_fixed = cc_min(inst.logical)
    elif args.cc == "ccmax":
        cc_fixed = cc_max(inst.logical)

    if args.method == "brute":
        value, (cc, emb) = brute_force_joint(inst, cc_fixed=cc_fixed)
        payload = {"reliability": value, "outage": 1.0 - value,
                   "method": "brute", "iterations": 0, "converged": True,
                   "node_limit_hit": False}
    else:
        if cc_fixed is not None:
            report = fge_only_solve(inst, cc_fixed, cfg)
        else:
            report = bcd_solve(inst, cfg)
        cc, emb = report.cc, report.embedding
        payload = {
            "reliability": report.exact_reliability,
            "outage": 1.0 - report.exact_reliability,
            "method": args.method,
            "surrogate": report.surrogate_trace[-1] if report.surrogate_trace else None,
            "iterations": report.iterations,
            "converged": report.converged,
            "nodes_explored": report.nodes_explored,
            "wall_time_s": report.wall_time,
            "node_limit_hit": report.node_limit_hit,
        }
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            json.dump(solution_to_dict(cc, emb), fh, indent=2)
            fh.write("\n")
    _emit(payload)
    if payload["node_limit_hit"]:
        return EXIT_NODE_LIMIT
    return EXIT_OK


def cmd_sweep(args):
    with open(args.spec, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    solver_doc = doc.pop("solver", {})
    try:
        spec = SweepSpec(solver=SolverConfig(**solver_doc), **doc)
    except (TypeError, ValueError) as exc:
        return _fail(f"bad sweep spec: {exc}")

    def progress(param, value, trial):
        print(f"{param}={value} trial {trial + 1}/{spec.n_topologies}",
              file=sys.stderr)

    result = run_sweep(spec, progress=progress)
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            result.write_csv(fh)
    else:
        result.write_csv(sys.stdout)
    return EXIT_OK


def cmd_dfg_bound(args):
    if args.n_vnfs < 1 or args.n_servers < 1 or args.load < 0:
        return _fail("counts must be positive and load nonnegative")
    if not 0.0 <= args.p <= 1.0:
        return _fail("p must lie in [0, 1]")
    r = args.n_servers / args.n_vnfs
    try:
        bound = dfg.union_bound_value(args.n_vnfs, args.p, r, args.load)
        applicable = True
    except NfvRelError:
        bound = None
        applicable = False
    inst = dfg.DfgInstance(n_vnfs=args.n_vnfs, n_servers=args.n_servers,
                           p=args.p, load_budget=args.load)
    emb = dfg.balanced_embedding(args.n_vnfs, args.n_servers, args.load)
    _emit({"bound": bound, "applicable": applicable,
           "exact_balanced": dfg.dfg_reliability(inst, emb)})
    return EXIT_OK


def cmd_validate(args):
    if args.samples < 1:
        return _fail("--samples must be >= 1")
    inst, cc, emb = _load_pair(args.instance, args.solution)
    exact = exact_reliability(inst, cc, emb).value
    res = monte_carlo_reliability(inst, cc, emb, args.samples, args.seed)
    ok = abs(exact - res.value) <= 3.0 * res.stderr
    _emit({"exact": exact, "monte_carlo": res.value, "stderr": res.stderr,
           "n_samples": res.n_samples, "pass": ok})
    return EXIT_OK if ok else EXIT_MC_MISMATCH


def cmd_gen_topology(args):
    if not 0.0 <= args.edge_prob <= 1.0:
        return _fail("--edge-prob must lie in [0, 1]")
    if args.n_servers < 1:
        return _fail("--n-servers must be positive")
    policy = (SelfLinkPolicy.ALWAYS_ON if args.self_links == "on"
              else SelfLinkPolicy.ALWAYS_OFF)
    topo = sample_topology(TopologyDistribution(
        n_servers=args.n_servers, edge_prob=args.edge_prob,
        self_link_policy=policy, seed=args.seed,
    ))
    _emit({
        "n_servers": topo.n_servers,
        "adjacency": topo.adjacency.astype(int).tolist(),
        "self_link_policy": topo.self_link_policy.value,
    })
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="nfvrel",
        description="Reliability-aware chain composition and embedding.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("evaluate", help="score an instance/solution pair")
    p.add_argument("instance")
    p.add_argument("solution")
    p.add_argument("--monte-carlo", type=int, default=0, metavar="N")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("solve", help="optimize an instance")
    p.add_argument("instance")
    p.add_argument("--method", choices=("bcd", "brute", "fge-only"), default="bcd")
    p.add_argument("--cc", choices=("joint", "ccmin", "ccmax"), default="joint")
    p.add_argument("--output", "-o", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-iters", type=int, default=20)
    p.add_argument("--epsilon", type=float, default=1e-9)
    p.add_argument("--init", choices=tuple(s.value for s in InitStrategy),
                   default="round_robin")
    p.add_argument("--restarts", type=int, default=1)
    p.add_argument("--node-limit", type=int, default=0)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("sweep", help="run a parameter sweep from a spec file")
    p.add_argument("spec")
    p.add_argument("--output", "-o", default=None)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("dfg-bound", help="union bound for a disconnected graph")
    p.add_argument("--n-vnfs", type=int, required=True)
    p.add_argument("--n-servers", type=int, required=True)
    p.add_argument("--load", type=int, required=True)
    p.add_argument("--p", type=float, required=True)
    p.set_defaults(func=cmd_dfg_bound)

    p = sub.add_parser("validate", help="cross-check exact vs Monte Carlo")
    p.add_argument("instance")
    p.add_argument("solution")
    p.add_argument("--samples", type=int, default=100000)
    p.add_argument("--seed", type=int, required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("gen-topology", help="sample a random physical topology")
    p.add_argument("--n-servers", type=int, required=True)
    p.add_argument("--edge-prob", type=float, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--self-links", choices=("on", "off"), default="on")
    p.set_defaults(func=cmd_gen_topology)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (NfvRelError, json.JSONDecodeError, OSError, ValueError) as exc:
        return _fail(str(exc))


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
