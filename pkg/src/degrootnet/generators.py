"""Network generating processes.

A GeneratorSpec is a declarative description of the random process that
emits the interaction matrices {X_t}: which matrices can occur, how often,
and with what temporal dependence.  A GeneratorState is a seeded stream
that actually produces the sequence; advancing two states built from the
same (seed, spec) yields bit-identical matrices.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatch,
    EigenvectorFailure,
    InvalidProbability,
    NotStrictlyPositive,
    Unsupported,
)
from .matrices import StochasticMatrix, SkeletonMask, ZERO_TOL, is_strictly_positive

PROB_TOL = 1e-12
BALANCE_TOL = 1e-9


@dataclass(frozen=True)
class SupportDescriptor:
    """What one draw can look like.

    kind "finite": every support atom, listed exactly once.
    kind "continuous": the possible skeleton masks (each occurring with
    positive probability) plus the probability that a single draw is
    entrywise strictly positive.
    """

    kind: str
    atoms: tuple = ()
    skeletons: tuple = ()
    strictly_positive_prob: float = 0.0


class GeneratorState:
    """Single-owner seeded stream of interaction matrices.

    Not safe for concurrent mutation; replica parallelism uses independent
    states with distinct derived seeds (see seeding.replica_seed).
    """

    __slots__ = ("spec", "rng", "last", "aux", "t")

    def __init__(self, spec, seed):
        self.spec = spec
        self.rng = np.random.default_rng(seed)
        self.last = None      # previous matrix, for AR dependence
        self.aux = None       # previous support index, for Markov dependence
        self.t = 0

    def next_array(self) -> np.ndarray:
        arr = self.spec._draw(self)
        self.t += 1
        return arr


def sample_next(state: GeneratorState) -> StochasticMatrix:
    """Draw X_t for the next period and advance the state."""
    return StochasticMatrix._trusted(state.next_array())


def mean_matrix(spec: "GeneratorSpec") -> StochasticMatrix:
    """Exact expectation of one draw under the generating process."""
    return spec.mean_matrix()


def support(spec: "GeneratorSpec") -> SupportDescriptor:
    return spec.support()


class GeneratorSpec:
    """Base class for network generating processes."""

    kind = "abstract"

    @property
    def n(self) -> int:
        raise NotImplementedError

    @property
    def is_iid(self) -> bool:
        return True

    def start_state(self, seed) -> GeneratorState:
        return GeneratorState(self, seed)

    def _draw(self, state: GeneratorState) -> np.ndarray:
        raise NotImplementedError

    def mean_matrix(self) -> StochasticMatrix:
        raise Unsupported(f"{self.kind} has no mean rule")

    def support(self) -> SupportDescriptor:
        raise Unsupported(f"{self.kind} has no support descriptor")

    def to_dict(self) -> dict:
        raise NotImplementedError

    @staticmethod
    def from_dict(doc: dict) -> "GeneratorSpec":
        kind = doc.get("model")
        if kind not in _REGISTRY:
            raise Unsupported(f"unknown generator model {kind!r}")
        return _REGISTRY[kind](doc)


def _finite_support(atoms) -> SupportDescriptor:
    masks = tuple(SkeletonMask(a.entries > ZERO_TOL) for a in atoms)
    return SupportDescriptor(kind="finite", atoms=tuple(atoms), skeletons=masks)


@dataclass(frozen=True, eq=False)
class Fixed(GeneratorSpec):
    """Deterministic network: X_t = T every period."""

    matrix: StochasticMatrix
    kind = "fixed"

    @property
    def n(self):
        return self.matrix.n

    def _draw(self, state):
        return self.matrix.entries

    def mean_matrix(self):
        return self.matrix

    def support(self):
        return _finite_support((self.matrix,))

    def to_dict(self):
        return {"model": "fixed", "matrix": self.matrix.entries.tolist()}


@dataclass(frozen=True, eq=False)
class FiniteMixture(GeneratorSpec):
    """Finitely many interaction patterns drawn iid or with Markov dependence.

    ``probs`` is the marginal law of each draw.  With a ``transition``
    matrix over support indices the index sequence is a Markov chain started
    from ``probs``; stationarity then requires ``probs`` to be invariant for
    the transition, which is validated at construction.
    """

    atoms: tuple
    probs: tuple
    transition: tuple | None = None
    kind = "finite_mixture"

    def __post_init__(self):
        if not self.atoms:
            raise InvalidProbability("mixture needs at least one atom")
        n = self.atoms[0].n
        for a in self.atoms:
            if a.n != n:
                raise DimensionMismatch("mixture atoms must share a dimension")
        p = np.asarray(self.probs, dtype=float)
        if p.ndim != 1 or len(p) != len(self.atoms):
            raise InvalidProbability("need one probability per atom")
        if (p < 0).any() or abs(p.sum() - 1.0) > PROB_TOL:
            raise InvalidProbability(f"mixture probs must be nonnegative and sum to 1, got {p.tolist()}")
        if self.transition is not None:
            tr = np.asarray(self.transition, dtype=float)
            k = len(self.atoms)
            if tr.shape != (k, k):
                raise DimensionMismatch("transition must be square over support indices")
            if (tr < 0).any() or np.abs(tr.sum(axis=1) - 1.0).max() > PROB_TOL:
                raise InvalidProbability("transition rows must be distributions")
            if np.abs(p @ tr - p).max() > BALANCE_TOL:
                raise InvalidProbability("probs must be stationary for the transition")
            object.__setattr__(self, "_tr_cum", np.cumsum(tr, axis=1))
        object.__setattr__(self, "_cum", np.cumsum(p))
        object.__setattr__(self, "_arrays", tuple(a.entries for a in self.atoms))

    @property
    def n(self):
        return self.atoms[0].n

    @property
    def is_iid(self):
        return self.transition is None

    def _draw(self, state):
        if self.transition is None or state.aux is None:
            cum = self._cum
        else:
            cum = self._tr_cum[state.aux]
        idx = int(np.searchsorted(cum, state.rng.random(), side="right"))
        idx = min(idx, len(self.atoms) - 1)
        state.aux = idx
        return self._arrays[idx]

    def mean_matrix(self):
        acc = np.zeros((self.n, self.n))
        for a, p in zip(self.atoms, self.probs):
            acc += p * a.entries
        return StochasticMatrix._trusted(acc)

    def support(self):
        return _finite_support(self.atoms)

    def to_dict(self):
        doc = {
            "model": "finite_mixture",
            "atoms": [a.entries.tolist() for a in self.atoms],
            "probs": list(self.probs),
        }
        if self.transition is not None:
            doc["transition"] = [list(row) for row in self.transition]
        return doc


@dataclass(frozen=True, eq=False)
class DirichletRows(GeneratorSpec):
    """Independent Dirichlet rows, one concentration vector per row.

    A zero alpha entry is a structural zero: that weight is 0 almost surely,
    so the positive pattern of alpha is the common skeleton of every draw.
    Rows are sampled as independent Gamma draws normalized by their sum.
    """

    alpha: np.ndarray
    kind = "dirichlet_rows"

    def __post_init__(self):
        arr = np.array(self.alpha, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise DimensionMismatch(f"alpha must be square, got shape {arr.shape}")
        if (arr < 0).any():
            raise InvalidProbability("alpha entries must be nonnegative")
        if (arr.sum(axis=1) <= 0).any():
            raise InvalidProbability("every alpha row needs a positive entry")
        arr.setflags(write=False)
        object.__setattr__(self, "alpha", arr)
        # Sparse draw path: sample gammas only where alpha is positive.
        pos = np.flatnonzero(arr)
        object.__setattr__(self, "_dense", bool(len(pos) == arr.size))
        object.__setattr__(self, "_pos_idx", pos)
        object.__setattr__(self, "_pos_alpha", arr.ravel()[pos].copy())

    @property
    def n(self):
        return self.alpha.shape[0]

    @property
    def phi(self) -> np.ndarray:
        """Row sums of alpha; the Dirichlet parameter of pi when balanced."""
        return self.alpha.sum(axis=1)

    @property
    def balanced(self) -> bool:
        """True iff row sums of alpha equal column sums componentwise."""
        return bool(np.abs(self.alpha.sum(axis=1) - self.alpha.sum(axis=0)).max() <= BALANCE_TOL)

    def _draw(self, state):
        if self._dense:
            g = state.rng.gamma(self.alpha)
        else:
            n = self.alpha.shape[0]
            g = np.zeros(n * n)
            g[self._pos_idx] = state.rng.gamma(self._pos_alpha)
            g = g.reshape(n, n)
        return g / g.sum(axis=1, keepdims=True)

    def mean_matrix(self):
        return StochasticMatrix._trusted(self.alpha / self.alpha.sum(axis=1, keepdims=True))

    def support(self):
        mask = SkeletonMask(self.alpha > 0)
        spp = 1.0 if mask.all_true() else 0.0
        return SupportDescriptor(kind="continuous", skeletons=(mask,), strictly_positive_prob=spp)

    def to_dict(self):
        return {"model": "dirichlet_rows", "alpha": self.alpha.tolist()}


@dataclass(frozen=True, eq=False)
class PerturbedFixed(GeneratorSpec):
    """Random fluctuations around a strictly positive fixed network T.

    Row i is Dirichlet with parameters epsilon * s_i * T_i, where s is the
    influence vector of T, so the mean of every draw is T itself and the
    limiting influence vector is Dirichlet(epsilon * s).  Larger epsilon
    means smaller fluctuations.
    """

    matrix: StochasticMatrix
    epsilon: float
    s: np.ndarray = field(repr=False, default=None)
    kind = "perturbed_fixed"

    def __post_init__(self):
        if self.epsilon <= 0:
            raise InvalidProbability("epsilon must be positive")
        if not is_strictly_positive(self.matrix):
            raise NotStrictlyPositive("perturbed_fixed requires a strictly positive T")
        if self.s is None:
            object.__setattr__(self, "s", _left_unit_eigenvector(self.matrix.entries))
        arr = np.array(self.s, dtype=float)
        arr.setflags(write=False)
        object.__setattr__(self, "s", arr)
        alpha = self.epsilon * arr[:, None] * self.matrix.entries
        alpha.setflags(write=False)
        object.__setattr__(self, "_alpha", alpha)

    @property
    def n(self):
        return self.matrix.n

    @property
    def alpha(self) -> np.ndarray:
        return self._alpha

    @property
    def phi(self) -> np.ndarray:
        return self.epsilon * self.s

    def _draw(self, state):
        g = state.rng.gamma(self._alpha)
        return g / g.sum(axis=1, keepdims=True)

    def mean_matrix(self):
        return self.matrix

    def support(self):
        mask = SkeletonMask(np.ones((self.n, self.n), dtype=bool))
        return SupportDescriptor(kind="continuous", skeletons=(mask,), strictly_positive_prob=1.0)

    def to_dict(self):
        return {"model": "perturbed_fixed", "matrix": self.matrix.entries.tolist(), "epsilon": self.epsilon}


@dataclass(frozen=True, eq=False)
class LeaderFollower(GeneratorSpec):
    """Two-step communication: a leader's draw steers every follower.

    One uniform x per period.  Row 1 is (x, 1-x, 0, ...).  If x >= 1/2 the
    followers keep their own beliefs (identity rows); otherwise follower i
    pays full attention to agent i+1 (mod n).  Rows are correlated through
    the single draw, yet the limiting influence law matches the independent
    ring with uniform self-weights.
    """

    size: int
    kind = "leader_follower"

    def __post_init__(self):
        if self.size < 2:
            raise DimensionMismatch("leader_follower needs n >= 2")

    @property
    def n(self):
        return self.size

    def _draw(self, state):
        n = self.size
        x = state.rng.random()
        out = np.zeros((n, n))
        out[0, 0] = x
        out[0, 1] = 1.0 - x
        if x >= 0.5:
            for i in range(1, n):
                out[i, i] = 1.0
        else:
            for i in range(1, n):
                out[i, (i + 1) % n] = 1.0
        return out

    def mean_matrix(self):
        n = self.size
        out = np.zeros((n, n))
        out[0, 0] = out[0, 1] = 0.5
        for i in range(1, n):
            out[i, i] = 0.5
            out[i, (i + 1) % n] = 0.5
        return StochasticMatrix._trusted(out)

    def support(self):
        n = self.size
        hi = np.zeros((n, n), dtype=bool)
        lo = np.zeros((n, n), dtype=bool)
        hi[0, 0] = hi[0, 1] = lo[0, 0] = lo[0, 1] = True
        for i in range(1, n):
            hi[i, i] = True
            lo[i, (i + 1) % n] = True
        return SupportDescriptor(
            kind="continuous", skeletons=(SkeletonMask(hi), SkeletonMask(lo)), strictly_positive_prob=0.0
        )

    def to_dict(self):
        return {"model": "leader_follower", "n": self.size}


@dataclass(frozen=True, eq=False)
class Islands(GeneratorSpec):
    """Two islands of size g with within-island trees and one candidate cross link.

    Per draw: each island gets a uniformly random spanning tree whose g-1
    links are each kept with probability p_s; one uniformly random
    cross-island pair is linked with probability p_d.  The interaction
    matrix is the degree-normalized adjacency, with a self-loop added to
    any isolated agent so rows stay stochastic.
    """

    g: int
    p_s: float
    p_d: float
    kind = "islands"

    def __post_init__(self):
        if self.g < 2:
            raise DimensionMismatch("islands needs g >= 2")
        for name, p in (("p_s", self.p_s), ("p_d", self.p_d)):
            if not 0.0 <= p <= 1.0:
                raise InvalidProbability(f"{name} must lie in [0,1], got {p}")

    @property
    def n(self):
        return 2 * self.g

    @property
    def homophily(self) -> bool:
        return self.p_s > self.p_d

    def _draw(self, state):
        g, n = self.g, self.n
        adj = np.zeros((n, n), dtype=bool)
        for base in (0, g):
            for (u, v) in _random_tree_edges(g, state.rng):
                if state.rng.random() < self.p_s:
                    adj[base + u, base + v] = adj[base + v, base + u] = True
        i = int(state.rng.integers(g))
        j = g + int(state.rng.integers(g))
        if state.rng.random() < self.p_d:
            adj[i, j] = adj[j, i] = True
        return _graph_to_row_weights(adj)

    def mean_matrix(self):
        acc = None
        for adj, prob in islands_graph_atoms(self.g, self.p_s, self.p_d):
            w = _graph_to_row_weights(adj)
            acc = prob * w if acc is None else acc + prob * w
        return StochasticMatrix._trusted(np.asarray(acc, dtype=float))

    def support(self):
        atoms = []
        seen = set()
        for adj, _prob in islands_graph_atoms(self.g, self.p_s, self.p_d):
            m = StochasticMatrix._trusted(_graph_to_row_weights(adj))
            key = m.entries.tobytes()
            if key not in seen:
                seen.add(key)
                atoms.append(m)
        return _finite_support(atoms)

    def to_dict(self):
        return {"model": "islands", "g": self.g, "p_s": self.p_s, "p_d": self.p_d}


@dataclass(frozen=True, eq=False)
class UndirectedDegree(GeneratorSpec):
    """Random undirected graphs with a common degree sequence.

    Each period one adjacency matrix is drawn iid from ``graphs`` and every
    agent splits weight equally over its current neighbors.  Because the
    degree vector is the same for every graph, d/sum(d) is a common left
    unit vector of every atom and hence the almost-sure influence vector.
    """

    graphs: tuple
    probs: tuple
    kind = "undirected_degree"

    def __post_init__(self):
        if not self.graphs:
            raise InvalidProbability("need at least one graph")
        mats = []
        deg_ref = None
        for a in self.graphs:
            adj = np.array(a, dtype=bool)
            if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
                raise DimensionMismatch("adjacency matrices must be square")
            if not np.array_equal(adj, adj.T) or adj.diagonal().any():
                raise InvalidProbability("adjacency must be symmetric with a zero diagonal")
            if not _adjacency_connected(adj):
                raise InvalidProbability("every graph must be connected")
            deg = adj.sum(axis=1)
            if deg_ref is None:
                deg_ref = deg
            elif not np.array_equal(deg, deg_ref):
                raise InvalidProbability("all graphs must share the degree vector")
            mats.append(adj)
        p = np.asarray(self.probs, dtype=float)
        if len(p) != len(mats) or (p < 0).any() or abs(p.sum() - 1.0) > PROB_TOL:
            raise InvalidProbability("graph probs must be nonnegative and sum to 1")
        frozen = []
        for adj in mats:
            adj.setflags(write=False)
            frozen.append(adj)
        object.__setattr__(self, "graphs", tuple(frozen))
        object.__setattr__(self, "_degrees", deg_ref.astype(float))
        object.__setattr__(self, "_cum", np.cumsum(p))
        object.__setattr__(self, "_weight_atoms", tuple(adj.astype(float) / deg_ref.astype(float)[:, None] for adj in frozen))

    @property
    def n(self):
        return self.graphs[0].shape[0]

    @property
    def degrees(self) -> np.ndarray:
        return self._degrees

    def _matrix_atoms(self):
        return list(self._weight_atoms)

    def _draw(self, state):
        idx = int(np.searchsorted(self._cum, state.rng.random(), side="right"))
        idx = min(idx, len(self.graphs) - 1)
        return self._weight_atoms[idx]

    def mean_matrix(self):
        acc = np.zeros((self.n, self.n))
        for m, p in zip(self._matrix_atoms(), self.probs):
            acc += p * m
        return StochasticMatrix._trusted(acc)

    def support(self):
        return _finite_support([StochasticMatrix._trusted(m) for m in self._matrix_atoms()])

    def to_dict(self):
        return {
            "model": "undirected_degree",
            "graphs": [adj.astype(int).tolist() for adj in self.graphs],
            "probs": list(self.probs),
        }


@dataclass(frozen=True, eq=False)
class Ar1Mixture(GeneratorSpec):
    """Sticky weights: X_t = (1 - xi) X_{t-1} + xi Xi_t, started at X_0 = T0.

    Xi_t are iid draws from ``source``.  xi = 0 reproduces the fixed network
    T0, xi = 1 the iid source; intermediate xi interpolates with persistence.
    The start at T0 means the marginal law is only asymptotically stationary.
    """

    xi: float
    t0: StochasticMatrix
    source: GeneratorSpec
    kind = "ar1_mixture"

    def __post_init__(self):
        if not 0.0 <= self.xi <= 1.0:
            raise InvalidProbability("xi must lie in [0,1]")
        if self.t0.n != self.source.n:
            raise DimensionMismatch("T0 and source must share a dimension")
        if not self.source.is_iid:
            raise Unsupported("ar1_mixture source must be iid")

    @property
    def n(self):
        return self.t0.n

    @property
    def is_iid(self):
        return self.xi >= 1.0

    def _draw(self, state):
        prev = self.t0.entries if state.last is None else state.last
        if self.xi == 0.0:
            nxt = prev
        else:
            nxt = (1.0 - self.xi) * prev + self.xi * self.source._draw(state)
        state.last = nxt
        return nxt

    def mean_matrix(self):
        # Long-run (ergodic) mean: the source mean for xi > 0, T0 when frozen.
        if self.xi == 0.0:
            return self.t0
        return self.source.mean_matrix()

    def support(self):
        raise Unsupported("the stationary support of an AR(1) mixture has no finite description")

    def to_dict(self):
        return {
            "model": "ar1_mixture",
            "xi": self.xi,
            "t0": self.t0.entries.tolist(),
            "source": self.source.to_dict(),
        }


# --- named constructions ---------------------------------------------------


def ring_uniform_self(n: int) -> DirichletRows:
    """Ring where each agent keeps a Uniform(0,1) self-weight per period.

    Equals DirichletRows with alpha_ii = alpha_{i,i+1 mod n} = 1, so the
    balance vector is (2, ..., 2) and pi is Dirichlet(2, ..., 2).
    """
    if n < 2:
        raise DimensionMismatch("ring needs n >= 2")
    alpha = np.zeros((n, n))
    for i in range(n):
        alpha[i, i] = 1.0
        alpha[i, (i + 1) % n] = 1.0
    return DirichletRows(alpha)


def leader_follower(n: int) -> LeaderFollower:
    return LeaderFollower(n)


def perturbed_fixed(T: StochasticMatrix, epsilon: float) -> PerturbedFixed:
    return PerturbedFixed(T, epsilon)


def islands_graphs(g: int, p_s: float, p_d: float) -> Islands:
    return Islands(g, p_s, p_d)


def encounter_2x2(epsilon: float, p_meet: float, transition=None) -> FiniteMixture:
    """Two neighbors who meet at random; weight epsilon moves on encounters.

    Support is {I, ((1-eps, eps), (eps, 1-eps))}.  The default is iid with
    meet probability p_meet; pass a 2x2 ``transition`` over (stay-apart,
    meet) indices for correlated encounters.
    """
    if not 0.0 < epsilon < 1.0:
        raise InvalidProbability("epsilon must lie in (0,1)")
    if not 0.0 <= p_meet <= 1.0:
        raise InvalidProbability("p_meet must lie in [0,1]")
    eye = StochasticMatrix(np.eye(2))
    mix = StochasticMatrix([[1.0 - epsilon, epsilon], [epsilon, 1.0 - epsilon]])
    return FiniteMixture(atoms=(eye, mix), probs=(1.0 - p_meet, p_meet), transition=transition)


def two_point_swap(a: float) -> FiniteMixture:
    """Mass a on the identity and 1-a on the swap: mean ((a,1-a),(1-a,a))."""
    if not 0.0 < a < 1.0:
        raise InvalidProbability("a must lie in (0,1)")
    eye = StochasticMatrix(np.eye(2))
    swap = StochasticMatrix([[0.0, 1.0], [1.0, 0.0]])
    return FiniteMixture(atoms=(eye, swap), probs=(a, 1.0 - a))


def bernoulli_2x2(x: float, p_a: float, p_b: float) -> FiniteMixture:
    """Rows scaled Bernoulli: self-weights a_t = x Bern(p_a), b_t = x Bern(p_b)."""
    if not 0.0 < x <= 1.0:
        raise InvalidProbability("x must lie in (0,1]")
    for name, p in (("p_a", p_a), ("p_b", p_b)):
        if not 0.0 <= p <= 1.0:
            raise InvalidProbability(f"{name} must lie in [0,1]")

    def v(s, r):
        return StochasticMatrix([[s, 1.0 - s], [r, 1.0 - r]])

    atoms = (v(0, 0), v(0, x), v(x, 0), v(x, x))
    probs = ((1 - p_a) * (1 - p_b), (1 - p_a) * p_b, p_a * (1 - p_b), p_a * p_b)
    keep = [k for k, p in enumerate(probs) if p > 0]
    return FiniteMixture(atoms=tuple(atoms[k] for k in keep), probs=tuple(probs[k] for k in keep))


def mixing_identity_mixture(n: int, zeta: float) -> FiniteMixture:
    """Uniform-averaging matrix with probability zeta, identity otherwise."""
    if not 0.0 < zeta <= 1.0:
        raise InvalidProbability("zeta must lie in (0,1]")
    flat = StochasticMatrix(np.full((n, n), 1.0 / n))
    eye = StochasticMatrix(np.eye(n))
    if zeta == 1.0:
        return FiniteMixture(atoms=(flat,), probs=(1.0,))
    return FiniteMixture(atoms=(flat, eye), probs=(zeta, 1.0 - zeta))


# --- islands internals -------------------------------------------------------


def _random_tree_edges(g, rng):
    """Uniform labeled spanning tree on g vertices via a random Pruefer code."""
    if g == 2:
        return [(0, 1)]
    code = [int(rng.integers(g)) for _ in range(g - 2)]
    return _decode_pruefer(code, g)


def _decode_pruefer(code, g):
    degree = [1] * g
    for c in code:
        degree[c] += 1
    edges = []
    import heapq

    leaves = [i for i in range(g) if degree[i] == 1]
    heapq.heapify(leaves)
    for c in code:
        leaf = heapq.heappop(leaves)
        edges.append((leaf, c))
        degree[c] -= 1
        if degree[c] == 1:
            heapq.heappush(leaves, c)
    u = heapq.heappop(leaves)
    v = heapq.heappop(leaves)
    edges.append((u, v))
    return edges


def _all_trees(g):
    """All labeled spanning trees on g vertices (g^(g-2) of them)."""
    if g == 2:
        return [[(0, 1)]]
    trees = []
    for code in itertools.product(range(g), repeat=g - 2):
        trees.append(_decode_pruefer(list(code), g))
    return trees


def _island_edge_patterns(g, p_s):
    """Exact law of one island's realized edge set.

    Arithmetic follows the type of p_s, so Fraction inputs give exact
    rational probabilities.
    """
    one = p_s * 0 + 1
    trees = _all_trees(g)
    tree_prob = one / len(trees)
    out = {}
    for tree in trees:
        for keep_mask in itertools.product((False, True), repeat=len(tree)):
            kept = frozenset(e for e, keep in zip(tree, keep_mask) if keep)
            prob = tree_prob
            for keep in keep_mask:
                prob = prob * (p_s if keep else (one - p_s))
            out[kept] = out.get(kept, one * 0) + prob
    return list(out.items())


def islands_graph_atoms(g, p_s, p_d):
    """Exact finite graph distribution of the islands model.

    Yields (adjacency bool array, probability) with distinct graphs merged.
    Probabilities inherit the numeric type of p_s/p_d (floats or Fractions).
    Guarded to g <= 4; the pattern enumeration grows super-exponentially.
    """
    if g > 4:
        raise Unsupported("exact islands enumeration is limited to g <= 4")
    one = p_s * 0 + 1
    n = 2 * g
    patterns = _island_edge_patterns(g, p_s)
    cross_pairs = [(i, g + j) for i in range(g) for j in range(g)]
    cross_states = [(None, one - p_d)] + [(pair, p_d * (one / len(cross_pairs))) for pair in cross_pairs]
    merged = {}
    for e1, p1 in patterns:
        for e2, p2 in patterns:
            base = p1 * p2
            edges_base = [(u, v) for (u, v) in e1] + [(g + u, g + v) for (u, v) in e2]
            for cross, pc in cross_states:
                prob = base * pc
                if prob == 0:
                    continue
                edges = list(edges_base)
                if cross is not None:
                    edges.append(cross)
                key = frozenset(tuple(sorted(e)) for e in edges)
                merged[key] = merged.get(key, one * 0) + prob
    for key, prob in merged.items():
        adj = np.zeros((n, n), dtype=bool)
        for (u, v) in key:
            adj[u, v] = adj[v, u] = True
        yield adj, prob


def _graph_to_row_weights(adj: np.ndarray) -> np.ndarray:
    """Degree-normalized adjacency; isolated agents get a self-loop first."""
    a = adj.astype(float)
    deg = a.sum(axis=1)
    isolated = deg == 0
    if isolated.any():
        a = a.copy()
        a[np.ix_(isolated, isolated)] = np.eye(int(isolated.sum()))
        deg = a.sum(axis=1)
    return a / deg[:, None]


def _adjacency_connected(adj: np.ndarray) -> bool:
    n = adj.shape[0]
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


def _left_unit_eigenvector(T: np.ndarray, tol: float = 1e-13, max_iter: int = 100000) -> np.ndarray:
    """Influence vector of a strictly positive fixed network, by power iteration."""
    n = T.shape[0]
    s = np.full(n, 1.0 / n)
    for _ in range(max_iter):
        nxt = s @ T
        nxt /= nxt.sum()
        if np.abs(nxt - s).max() < tol:
            return nxt
        s = nxt
    raise EigenvectorFailure("left eigenvector iteration did not converge")


# --- serialization registry --------------------------------------------------


def _mk_fixed(doc):
    return Fixed(StochasticMatrix(doc["matrix"]))


def _mk_mixture(doc):
    atoms = tuple(StochasticMatrix(a) for a in doc["atoms"])
    tr = doc.get("transition")
    return FiniteMixture(atoms=atoms, probs=tuple(doc["probs"]), transition=tuple(map(tuple, tr)) if tr else None)


def _mk_dirichlet(doc):
    return DirichletRows(np.array(doc["alpha"], dtype=float))


def _mk_perturbed(doc):
    return PerturbedFixed(StochasticMatrix(doc["matrix"]), float(doc["epsilon"]))


def _mk_leader(doc):
    return LeaderFollower(int(doc["n"]))


def _mk_islands(doc):
    return Islands(int(doc["g"]), float(doc["p_s"]), float(doc["p_d"]))


def _mk_undirected(doc):
    return UndirectedDegree(tuple(np.array(a, dtype=bool) for a in doc["graphs"]), tuple(doc["probs"]))


def _mk_ar1(doc):
    return Ar1Mixture(float(doc["xi"]), StochasticMatrix(doc["t0"]), GeneratorSpec.from_dict(doc["source"]))


_REGISTRY = {
    "fixed": _mk_fixed,
    "finite_mixture": _mk_mixture,
    "dirichlet_rows": _mk_dirichlet,
    "perturbed_fixed": _mk_perturbed,
    "leader_follower": _mk_leader,
    "islands": _mk_islands,
    "undirected_degree": _mk_undirected,
    "ar1_mixture": _mk_ar1,
}
