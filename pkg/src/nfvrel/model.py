"""Instance model: physical topology, failure model, logical layer and decisions.

All types are plain dataclasses wrapping read-only numpy arrays.  Servers are
indexed 0..n_servers-1, controller VNFs (CVNFs) 0..n_cvnf-1 and regular VNFs
(RVNFs) 0..n_rvnf-1; every file format uses these dense indices.
"""

from dataclasses import dataclass, field
from enum import Enum
import json

import numpy as np

from .errors import CapacityDeficit, DimensionMismatch, ProbabilityOutOfRange


class SelfLinkPolicy(str, Enum):
    """Convention for the adjacency diagonal (can a server talk to itself?)."""

    ALWAYS_ON = "always_on"
    ALWAYS_OFF = "always_off"
    AS_GIVEN = "as_given"


def _frozen(a, dtype):
    # always copy so freezing never propagates to a caller-owned array
    out = np.array(a, dtype=dtype, copy=True, order="C")
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class PhysicalTopology:
    """Undirected server-to-server connectivity."""

    n_servers: int
    adjacency: np.ndarray
    self_link_policy: SelfLinkPolicy = SelfLinkPolicy.ALWAYS_ON

    def __post_init__(self):
        adj = np.asarray(self.adjacency)
        if adj.shape != (self.n_servers, self.n_servers):
            raise DimensionMismatch(
                f"adjacency shape {adj.shape} != ({self.n_servers}, {self.n_servers})"
            )
        adj = (adj != 0).astype(np.uint8)
        if not np.array_equal(adj, adj.T):
            raise DimensionMismatch("adjacency must be symmetric (undirected links)")
        policy = SelfLinkPolicy(self.self_link_policy)
        if policy is SelfLinkPolicy.ALWAYS_ON:
            np.fill_diagonal(adj, 1)
        elif policy is SelfLinkPolicy.ALWAYS_OFF:
            np.fill_diagonal(adj, 0)
        object.__setattr__(self, "adjacency", _frozen(adj, np.uint8))
        object.__setattr__(self, "self_link_policy", policy)


@dataclass(frozen=True)
class FailureModel:
    """Independent per-server failure probabilities."""

    p: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=np.float64)
        if p.ndim != 1:
            raise DimensionMismatch("failure probabilities must be a 1-D vector")
        if np.any(p < 0.0) or np.any(p > 1.0):
            raise ProbabilityOutOfRange("failure probabilities must lie in [0, 1]")
        object.__setattr__(self, "p", _frozen(p, np.float64))

    def __len__(self):
        return self.p.shape[0]


@dataclass(frozen=True)
class LogicalLayer:
    """Bipartite forwarding-graph dimensions and controller capacities."""

    n_cvnf: int
    n_rvnf: int
    capacities: np.ndarray

    def __post_init__(self):
        if self.n_cvnf < 1 or self.n_rvnf < 1:
            raise DimensionMismatch("need at least one CVNF and one RVNF")
        if self.n_cvnf > self.n_rvnf:
            raise DimensionMismatch("n_cvnf must not exceed n_rvnf")
        cap = np.asarray(self.capacities, dtype=np.int64)
        if cap.shape != (self.n_cvnf,):
            raise DimensionMismatch(
                f"capacities shape {cap.shape} != ({self.n_cvnf},)"
            )
        if np.any(cap < 1):
            raise DimensionMismatch("capacities must be positive")
        if int(cap.sum()) < self.n_rvnf:
            raise CapacityDeficit(
                f"total capacity {int(cap.sum())} < n_rvnf {self.n_rvnf}"
            )
        object.__setattr__(self, "capacities", _frozen(cap, np.int64))

    @property
    def n_vnf(self):
        return self.n_cvnf + self.n_rvnf


@dataclass(frozen=True)
class ChainComposition:
    """RVNF -> CVNF assignment; assignment[v] is the controller of RVNF v."""

    assignment: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.assignment, dtype=np.int64)
        if a.ndim != 1:
            raise DimensionMismatch("assignment must be a 1-D vector")
        if np.any(a < 0):
            raise DimensionMismatch("assignment entries must be nonnegative")
        object.__setattr__(self, "assignment", _frozen(a, np.int64))

    def validate(self, logical: LogicalLayer):
        a = self.assignment
        if a.shape[0] != logical.n_rvnf:
            raise DimensionMismatch(
                f"assignment length {a.shape[0]} != n_rvnf {logical.n_rvnf}"
            )
        if np.any(a >= logical.n_cvnf):
            raise DimensionMismatch("assignment references an unknown CVNF")
        counts = np.bincount(a, minlength=logical.n_cvnf)
        if np.any(counts > logical.capacities):
            raise CapacityDeficit("a CVNF monitors more RVNFs than its capacity")
        return self


@dataclass(frozen=True)
class Embedding:
    """Binary placement matrices; rows are VNFs, columns are servers.

    All-zero rows are legal (an uninstantiated VNF yields zero reliability).
    """

    x_c: np.ndarray
    x_r: np.ndarray

    def __post_init__(self):
        for name in ("x_c", "x_r"):
            m = np.asarray(getattr(self, name))
            if m.ndim != 2:
                raise DimensionMismatch(f"{name} must be a 2-D 0/1 matrix")
            if not np.all((m == 0) | (m == 1)):
                raise DimensionMismatch(f"{name} entries must be 0 or 1")
            object.__setattr__(self, name, _frozen(m, np.uint8))

    @property
    def n_servers(self):
        return self.x_c.shape[1]


@dataclass(frozen=True)
class FailureVector:
    """One realization of the server on/off states (True = server on)."""

    bits: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "bits", _frozen(np.asarray(self.bits) != 0, bool))

    @classmethod
    def from_mask(cls, mask: int, n_servers: int):
        return cls([(mask >> s) & 1 for s in range(n_servers)])

    @property
    def mask(self) -> int:
        return int(sum(1 << s for s, on in enumerate(self.bits) if on))


@dataclass(frozen=True)
class Instance:
    """A full problem instance: topology, failures, logical layer, load budget."""

    topology: PhysicalTopology
    failures: FailureModel
    logical: LogicalLayer
    load_budget: int

    @property
    def n_servers(self):
        return self.topology.n_servers

    @property
    def overprovisioning_rate(self):
        return self.n_servers / self.logical.n_vnf


def validate_instance(inst: Instance) -> Instance:
    """Check cross-type consistency; component invariants hold by construction."""
    if len(inst.failures) != inst.n_servers:
        raise DimensionMismatch(
            f"failure vector length {len(inst.failures)} != n_servers {inst.n_servers}"
        )
    if inst.load_budget < 0:
        raise DimensionMismatch("load_budget must be nonnegative")
    return inst


def server_load(emb: Embedding, s: int) -> int:
    """Number of VNF instances (controller plus regular) hosted on server s."""
    if not 0 <= s < emb.n_servers:
        raise DimensionMismatch(f"server index {s} out of range")
    return int(emb.x_c[:, s].sum() + emb.x_r[:, s].sum())


@dataclass(frozen=True)
class FeasibilityReport:
    """Per-constraint-family diagnostics for a (chain, embedding) pair."""

    load_violations: list = field(default_factory=list)      # (server, load)
    link_violations: list = field(default_factory=list)      # (u, v, s, t)

    @property
    def feasible(self):
        return not self.load_violations and not self.link_violations


def check_feasibility(inst: Instance, cc: ChainComposition, emb: Embedding) -> FeasibilityReport:
    """Diagnose load limits and physical consistency of a candidate solution.

    Physical consistency requires every server pair hosting a logically linked
    CVNF/RVNF pair to share a physical link.
    """
    cc.validate(inst.logical)
    if emb.x_c.shape != (inst.logical.n_cvnf, inst.n_servers):
        raise DimensionMismatch("x_c shape inconsistent with instance")
    if emb.x_r.shape != (inst.logical.n_rvnf, inst.n_servers):
        raise DimensionMismatch("x_r shape inconsistent with instance")

    load_violations = []
    for s in range(inst.n_servers):
        load = server_load(emb, s)
        if load > inst.load_budget:
            load_violations.append((s, load))

    adj = inst.topology.adjacency
    link_violations = []
    for v in range(inst.logical.n_rvnf):
        u = int(cc.assignment[v])
        for s in np.flatnonzero(emb.x_c[u]):
            for t in np.flatnonzero(emb.x_r[v]):
                if not adj[s, t]:
                    link_violations.append((u, v, int(s), int(t)))
    return FeasibilityReport(load_violations, link_violations)


# --- JSON instance / solution formats (consumed by the CLI) ---

INSTANCE_KEYS = (
    "n_servers", "adjacency", "self_link_policy", "failure_probs",
    "n_cvnf", "n_rvnf", "capacities", "load_budget",
)


def instance_from_dict(doc: dict) -> Instance:
    missing = [k for k in INSTANCE_KEYS if k not in doc]
    if missing:
        raise DimensionMismatch(f"instance document missing keys: {missing}")
    topo = PhysicalTopology(
        n_servers=int(doc["n_servers"]),
        adjacency=doc["adjacency"],
        self_link_policy=SelfLinkPolicy(doc["self_link_policy"]),
    )
    inst = Instance(
        topology=topo,
        failures=FailureModel(doc["failure_probs"]),
        logical=LogicalLayer(
            n_cvnf=int(doc["n_cvnf"]),
            n_rvnf=int(doc["n_rvnf"]),
            capacities=doc["capacities"],
        ),
        load_budget=int(doc["load_budget"]),
    )
    return validate_instance(inst)


def instance_to_dict(inst: Instance) -> dict:
    return {
        "n_servers": inst.n_servers,
        "adjacency": inst.topology.adjacency.astype(int).tolist(),
        "self_link_policy": inst.topology.self_link_policy.value,
        "failure_probs": inst.failures.p.tolist(),
        "n_cvnf": inst.logical.n_cvnf,
        "n_rvnf": inst.logical.n_rvnf,
        "capacities": inst.logical.capacities.tolist(),
        "load_budget": inst.load_budget,
    }


def load_instance(path) -> Instance:
    with open(path, "r", encoding="utf-8") as fh:
        return instance_from_dict(json.load(fh))


def solution_from_dict(doc: dict):
    for key in ("x_c", "x_r", "cc_assignment"):
        if key not in doc:
            raise DimensionMismatch(f"solution document missing key: {key}")
    return ChainComposition(doc["cc_assignment"]), Embedding(doc["x_c"], doc["x_r"])


def solution_to_dict(cc: ChainComposition, emb: Embedding) -> dict:
    return {
        "x_c": emb.x_c.astype(int).tolist(),
        "x_r": emb.x_r.astype(int).tolist(),
        "cc_assignment": cc.assignment.tolist(),
    }
