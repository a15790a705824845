"""Graph-support analysis: disconnected collections, p_max, and decay rates.

A disconnected collection is a set of realizable graphs whose edge union
is disconnected; p_max is the total probability of the most likely one.
Its |log| is the large-deviation decay rate of the consensus-gap tail for
symmetric positive-diagonal processes, so p_max doubles as a worst-case
homophily measure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    InsufficientEvents,
    InvalidProbability,
    SizeLimit,
    Unsupported,
)
from .generators import FiniteMixture, GeneratorSpec, islands_graph_atoms
from .matrices import StochasticMatrix
from .seeding import replica_seed

PROB_TOL = 1e-12
MIN_EVENTS = 20


class Graph:
    """Undirected simple graph as a symmetric boolean adjacency matrix.

    Self-weights live in interaction matrices, not here: the diagonal is
    required to be zero.
    """

    __slots__ = ("adjacency",)

    def __init__(self, adjacency):
        adj = np.array(adjacency, dtype=bool)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise DimensionMismatch(f"adjacency must be square, got shape {adj.shape}")
        if not np.array_equal(adj, adj.T):
            raise InvalidProbability("adjacency must be symmetric")
        if adj.diagonal().any():
            raise InvalidProbability("adjacency must have a zero diagonal")
        adj.setflags(write=False)
        self.adjacency = adj

    @property
    def n(self):
        return self.adjacency.shape[0]

    def edges(self):
        iu = np.triu_indices(self.n, 1)
        return [(int(i), int(j)) for i, j in zip(*iu) if self.adjacency[i, j]]

    def __eq__(self, other):
        return isinstance(other, Graph) and np.array_equal(self.adjacency, other.adjacency)

    def __hash__(self):
        return hash((self.n, self.adjacency.tobytes()))

    def __repr__(self):
        return f"Graph(n={self.n}, edges={len(self.edges())})"

    @classmethod
    def from_edges(cls, n, edges):
        adj = np.zeros((n, n), dtype=bool)
        for (u, v) in edges:
            adj[u, v] = adj[v, u] = True
        return cls(adj)


@dataclass(frozen=True)
class GraphDistribution:
    """Finite list of (graph, probability) atoms; atoms must be distinct.

    Probabilities may be floats or exact Fractions; downstream arithmetic
    follows the given type.
    """

    atoms: tuple

    def __post_init__(self):
        if not self.atoms:
            raise InvalidProbability("need at least one atom")
        n = self.atoms[0][0].n
        seen = set()
        total = 0
        for g, p in self.atoms:
            if g.n != n:
                raise DimensionMismatch("graph atoms must share a vertex set")
            if p <= 0:
                raise InvalidProbability("atom probabilities must be positive")
            if g in seen:
                raise InvalidProbability("atoms must be distinct")
            seen.add(g)
            total += p
        if abs(float(total) - 1.0) > PROB_TOL:
            raise InvalidProbability(f"atom probabilities sum to {float(total)}, not 1")

    @property
    def n(self):
        return self.atoms[0][0].n

    def to_dict(self):
        return {
            "n": self.n,
            "atoms": [
                {"adjacency": g.adjacency.astype(int).tolist(), "prob": float(p)}
                for g, p in self.atoms
            ],
        }

    @classmethod
    def from_dict(cls, doc):
        return cls(atoms=tuple((Graph(a["adjacency"]), a["prob"]) for a in doc["atoms"]))


@dataclass(frozen=True)
class FragmentationReport:
    p_max: float
    argmax_collection: tuple | None
    pi_g_empty: bool
    predicted_rate: float
    argmax_cut: tuple | None = None

    def to_dict(self):
        return {
            "p_max": float(self.p_max),
            "pi_g_empty": self.pi_g_empty,
            "predicted_rate": self.predicted_rate,
            "argmax_collection": None if self.argmax_collection is None else [
                g.adjacency.astype(int).tolist() for g in self.argmax_collection
            ],
            "argmax_cut": None if self.argmax_cut is None else list(self.argmax_cut),
        }


def accumulation_graph(graphs) -> Graph:
    """Edge union of a collection of graphs on a common vertex set."""
    graphs = list(graphs)
    if not graphs:
        raise InvalidProbability("need at least one graph")
    n = graphs[0].n
    acc = np.zeros((n, n), dtype=bool)
    for g in graphs:
        if g.n != n:
            raise DimensionMismatch("graphs must share a vertex set")
        acc |= g.adjacency
    return Graph(acc)


def is_connected(g: Graph) -> bool:
    return _connected(g.adjacency)


def _connected(adj: np.ndarray) -> bool:
    n = adj.shape[0]
    if n <= 1:
        return True
    seen = np.zeros(n, dtype=bool)
    stack = [0]
    seen[0] = True
    while stack:
        u = stack.pop()
        for v in np.flatnonzero(adj[u]):
            if not seen[v]:
                seen[v] = True
                stack.append(int(v))
    return bool(seen.all())


def _rate(p):
    p = float(p)
    if p <= 0.0:
        return math.inf
    return abs(math.log(p))


def p_max(dist: GraphDistribution, atom_limit: int = 20) -> FragmentationReport:
    """Most likely disconnected collection, by subset enumeration.

    Depth-first over atom subsets with superset pruning: once a partial
    union is connected, adding graphs only adds edges, so the whole
    superset branch is skipped.  Exhaustive within the atom limit.
    """
    atoms = dist.atoms
    if len(atoms) > atom_limit:
        raise SizeLimit(f"{len(atoms)} atoms exceeds the enumeration limit {atom_limit}")
    n = dist.n
    zero = atoms[0][1] * 0
    best = {"p": zero, "subset": None}

    def recurse(idx, union, prob, chosen):
        if chosen and _connected(union):
            # Adding graphs only adds edges: every superset is connected too.
            return
        if idx == len(atoms):
            if chosen and float(prob) > float(best["p"]):
                best["p"] = prob
                best["subset"] = list(chosen)
            return
        recurse(idx + 1, union, prob, chosen)
        g, p = atoms[idx]
        recurse(idx + 1, union | g.adjacency, prob + p, chosen + [idx])

    recurse(0, np.zeros((n, n), dtype=bool), zero, [])
    empty = best["subset"] is None
    if empty:
        return FragmentationReport(p_max=0.0, argmax_collection=None,
                                   pi_g_empty=True, predicted_rate=math.inf)
    collection = tuple(atoms[k][0] for k in best["subset"])
    return FragmentationReport(
        p_max=best["p"], argmax_collection=collection,
        pi_g_empty=False, predicted_rate=_rate(best["p"]),
    )


def p_max_by_cuts(dist: GraphDistribution, max_n: int = 16) -> FragmentationReport:
    """Most likely disconnected collection, by vertex-cut enumeration.

    For every cut (S, S^c) the best disconnected collection avoiding it is
    exactly the set of atoms with no edge across, so p_max is the maximum
    over cuts of that set's total probability.  Handles atom lists far
    beyond the subset-enumeration limit; exact, not approximate.
    """
    n = dist.n
    if n > max_n:
        raise SizeLimit(f"cut enumeration limited to n <= {max_n}")
    if all(_connected(g.adjacency) for g, _p in dist.atoms):
        return FragmentationReport(p_max=0.0, argmax_collection=None,
                                   pi_g_empty=True, predicted_rate=math.inf)
    edge_lists = [g.edges() for g, _p in dist.atoms]
    zero = dist.atoms[0][1] * 0
    best_p = zero
    best_cut = None
    for s_bits in range(0, 1 << (n - 1)):
        members = {0} | {v + 1 for v in range(n - 1) if s_bits >> v & 1}
        if len(members) == n:
            continue
        total = zero
        nonempty = False
        for (g, p), edges in zip(dist.atoms, edge_lists):
            if any((u in members) != (v in members) for (u, v) in edges):
                continue
            total = total + p
            nonempty = True
        if nonempty and float(total) > float(best_p):
            best_p = total
            best_cut = members
    if best_cut is None:
        return FragmentationReport(p_max=0.0, argmax_collection=None,
                                   pi_g_empty=True, predicted_rate=math.inf)
    collection = tuple(
        g for (g, _p), edges in zip(dist.atoms, edge_lists)
        if not any((u in best_cut) != (v in best_cut) for (u, v) in edges)
    )
    return FragmentationReport(
        p_max=best_p, argmax_collection=collection, pi_g_empty=False,
        predicted_rate=_rate(best_p), argmax_cut=tuple(sorted(best_cut)),
    )


def bernoulli_edge_p_max(base: Graph, p) -> FragmentationReport:
    """p_max for iid edge deletion on a base graph: each edge kept w.p. p.

    The atoms are all 2^|E| subgraphs; over any cut, the collection of
    subgraphs with no edge across it has probability (1-p)^(edges across),
    so p_max = (1-p)^(minimum edge boundary).  For a connected k-regular
    base with edge connectivity k this is (1-p)^k.
    """
    if not (0 < float(p) <= 1):
        raise InvalidProbability("p must lie in (0,1]")
    n = base.n
    if n > 20:
        raise SizeLimit("cut enumeration limited to n <= 20")
    one = p * 0 + 1
    edges = base.edges()
    if float(p) == 1.0:
        if _connected(base.adjacency):
            return FragmentationReport(p_max=0.0, argmax_collection=None,
                                       pi_g_empty=True, predicted_rate=math.inf)
        return FragmentationReport(p_max=one, argmax_collection=(base,),
                                   pi_g_empty=False, predicted_rate=0.0)
    best_cut = None
    best_count = None
    for s_bits in range(0, 1 << (n - 1)):
        members = {0} | {v + 1 for v in range(n - 1) if s_bits >> v & 1}
        if len(members) == n:
            continue
        count = sum(1 for (u, v) in edges if (u in members) != (v in members))
        if best_count is None or count < best_count:
            best_count = count
            best_cut = members
    value = (one - p) ** best_count
    return FragmentationReport(
        p_max=value, argmax_collection=None, pi_g_empty=False,
        predicted_rate=_rate(value), argmax_cut=tuple(sorted(best_cut)),
    )


def islands_distribution(g: int, p_s, p_d) -> GraphDistribution:
    """Exact finite graph distribution of the two-island model."""
    atoms = tuple((Graph(adj), prob) for adj, prob in islands_graph_atoms(g, p_s, p_d))
    return GraphDistribution(atoms=atoms)


def lazy_metropolis(graph: Graph) -> StochasticMatrix:
    """Lazy Metropolis weights: symmetric, stochastic, diagonal >= 1/2.

    Off-diagonal weight (1/2) / max(d_i, d_j) on edges, remainder on the
    diagonal; isolated vertices keep full self-weight.
    """
    adj = graph.adjacency
    n = graph.n
    deg = adj.sum(axis=1).astype(float)
    w = np.zeros((n, n))
    for (u, v) in graph.edges():
        w_uv = 0.5 / max(deg[u], deg[v])
        w[u, v] = w[v, u] = w_uv
    np.fill_diagonal(w, 1.0 - w.sum(axis=1))
    return StochasticMatrix(w)


def metropolis_mixture(dist: GraphDistribution) -> FiniteMixture:
    """IID generator over the lazy-Metropolis matrices of a graph law.

    Distinct graphs can map to the same weight matrix; probabilities merge.
    """
    merged = {}
    order = []
    for g, p in dist.atoms:
        m = lazy_metropolis(g)
        key = m.entries.tobytes()
        if key not in merged:
            merged[key] = [m, 0.0]
            order.append(key)
        merged[key][1] += float(p)
    atoms = tuple(merged[k][0] for k in order)
    probs = tuple(merged[k][1] for k in order)
    return FiniteMixture(atoms=atoms, probs=probs)


@dataclass(frozen=True)
class RateReport:
    empirical_rate: float
    per_t_logprob: tuple
    counts: tuple
    t_grid: tuple


def decay_rate_estimate(spec: GeneratorSpec, epsilon: float, t_grid, replicas: int,
                        seed: int = 0) -> RateReport:
    """Empirical decay rate of P(||X^(t) - (1/n)11'|| >= epsilon).

    Requires an iid process of symmetric positive-diagonal matrices; the
    spectral norm of X^(t) - J is then nonincreasing in t, so each replica
    is scanned once up to its crossing time.  The slope is fit by least
    squares over grid times with at least 20 exceedance events; when the
    exceedance count is identically zero beyond some finite time, the
    process disconnects with probability zero and the rate is +inf.
    """
    if not 0.0 < epsilon <= 1.0:
        raise InvalidProbability("epsilon must lie in (0,1]")
    t_grid = sorted(set(int(t) for t in t_grid))
    if not t_grid or t_grid[0] < 1:
        raise ValueError("t_grid must contain positive times")
    if not spec.is_iid:
        raise Unsupported("decay_rate_estimate requires an iid process")
    desc = spec.support()
    if desc.kind == "finite":
        probes = [atom.entries for atom in desc.atoms]
    else:
        probe_state = spec.start_state(replica_seed(seed, 0x5bd1e995))
        probes = [probe_state.next_array() for _ in range(3)]
    for e in probes:
        if not np.allclose(e, e.T, atol=1e-12) or (np.diag(e) <= 0).any():
            raise Unsupported("draws must be symmetric with positive diagonals")
    n = spec.n
    flat = np.full((n, n), 1.0 / n)
    t_max = t_grid[-1]
    counts = np.zeros(len(t_grid), dtype=int)
    for i in range(replicas):
        state = spec.start_state(replica_seed(seed, i))
        prod = np.eye(n)
        crossing = None
        for t in range(1, t_max + 1):
            prod = state.next_array() @ prod
            if np.linalg.norm(prod - flat, 2) < epsilon:
                crossing = t
                break
        for k, t in enumerate(t_grid):
            if crossing is None or t < crossing:
                counts[k] += 1
    logprob = tuple(
        math.log(c / replicas) if c > 0 else -math.inf for c in counts
    )
    usable = [(t, lp) for t, lp, c in zip(t_grid, logprob, counts) if c >= MIN_EVENTS]
    if len(usable) >= 2:
        xs = np.array([t for t, _ in usable], dtype=float)
        ys = np.array([lp for _, lp in usable])
        slope = float(np.polyfit(xs, ys, 1)[0])
        rate = -slope
    elif counts.max() == 0 or counts[-1] == 0:
        # Exceedances die out entirely: the +inf marker case.
        rate = math.inf
    else:
        raise InsufficientEvents("fewer than 2 grid points with enough exceedance events")
    return RateReport(empirical_rate=rate, per_t_logprob=logprob,
                      counts=tuple(int(c) for c in counts), t_grid=tuple(t_grid))
