"""Belief evolution and consensus diagnostics.

The engine owns the left-product accumulation X^(t) = X_t ... X_1, the
derived diagnostics (consensus gap, influence samples, condition checks,
convergence times, disagreement structure), and the replica-parallel Monte
Carlo harness around them.  Replica i of a run with master seed m draws
from the stream seeded by seeding.replica_seed(m, i).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import betaincinv, betaln

from .errors import (
    CapHit,
    DimensionMismatch,
    ExplosionGuard,
    InvalidProbability,
    NoConvergence,
    NotIid,
    SingularMass,
    SizeLimit,
    Unsupported,
)
from .generators import GeneratorSpec, GeneratorState
from .matrices import (
    SkeletonMask,
    StochasticMatrix,
    ZERO_TOL,
    boolean_product,
    dobrushin_coefficient,
    numeric_rank,
)
from .seeding import map_replicas, replica_seed

GAP_TOL = 1e-8

HOLDS = "holds"
FAILS = "fails"
UNDETERMINED = "undetermined"


@dataclass(frozen=True)
class BeliefState:
    """Initial signals plus the current belief vector of the linear dynamics."""

    p0: tuple
    p_t: tuple
    t: int = 0
    gamma: float | None = None

    def __post_init__(self):
        for name, vec in (("p0", self.p0), ("p_t", self.p_t)):
            arr = np.asarray(vec, dtype=float)
            if arr.ndim != 1 or len(arr) < 1:
                raise DimensionMismatch(f"{name} must be a vector")
            if (arr < 0).any() or (arr > 1).any():
                raise InvalidProbability(f"{name} entries must lie in [0,1]")
        if len(self.p0) != len(self.p_t):
            raise DimensionMismatch("p0 and p_t must have equal length")
        if self.gamma is not None and not 0.0 <= self.gamma <= 1.0:
            raise InvalidProbability("gamma must lie in [0,1]")

    @property
    def n(self):
        return len(self.p0)

    @classmethod
    def from_signals(cls, p0, gamma=None):
        vals = tuple(float(v) for v in p0)
        return cls(p0=vals, p_t=vals, t=0, gamma=gamma)


@dataclass(frozen=True)
class ProductAccumulator:
    """Running left product X^(t) with consensus diagnostics."""

    product: StochasticMatrix
    t: int
    consensus_gap: float
    strict_positive_seen: bool
    consensus_time: int | None


@dataclass(frozen=True)
class InfluenceEstimate:
    """Monte Carlo sample of the random influence vector pi."""

    samples: tuple
    per_replica_gap: tuple
    mean: tuple
    variance: tuple
    max_component_mean: float
    failures: int

    @property
    def replicas(self):
        return len(self.samples) + self.failures


@dataclass(frozen=True)
class DisagreementReport:
    eta_estimate: int
    rank_histogram: dict
    support_atoms: tuple | None


@dataclass(frozen=True)
class ConditionCReport:
    verdict: str
    method: str
    evidence: float
    horizon: int


@dataclass(frozen=True)
class SemigroupReport:
    skeletons: frozenset
    min_rank: int
    rank_one_atoms: tuple
    members: tuple

    @property
    def elements(self):
        return len(self.members)


@dataclass(frozen=True)
class Speed2x2Result:
    mean_t_phi: float
    samples: tuple
    capped: int


@dataclass(frozen=True)
class SkeletonEquivalenceReport:
    same_initial_skeleton: bool
    verdict_a: ConditionCReport
    verdict_b: ConditionCReport
    agree: bool


# --- core dynamics -----------------------------------------------------------


def _scan(state: GeneratorState, t_max: int, gap_tol: float,
          stop_when_converged: bool = False, renorm_every: int = 64):
    """Accumulate the left product step by step on raw arrays.

    Returns (product, t, gap, strict_positive_seen, consensus_time).
    Row sums are renormalized periodically to hold roundoff below 1e-9
    over desk-scale horizons.
    """
    n = state.spec.n
    prod = np.eye(n)
    strict_seen = False
    consensus_time = None
    gap = 1.0 if n > 1 else 0.0
    t_done = 0
    for t in range(1, t_max + 1):
        prod = state.next_array() @ prod
        if t % renorm_every == 0:
            prod = prod / prod.sum(axis=1, keepdims=True)
        mn = prod.min(axis=0)
        gap = float((prod.max(axis=0) - mn).max())
        if not strict_seen and mn.min() > ZERO_TOL:
            strict_seen = True
        t_done = t
        if consensus_time is None and gap <= gap_tol:
            consensus_time = t
            if stop_when_converged:
                break
    prod = prod / prod.sum(axis=1, keepdims=True)
    return prod, t_done, gap, strict_seen, consensus_time


def evolve(gen: GeneratorState, beliefs: BeliefState, steps: int) -> BeliefState:
    """Apply p <- X_t p for ``steps`` periods."""
    if steps < 0:
        raise ValueError("steps must be >= 0")
    if gen.spec.n != beliefs.n:
        raise DimensionMismatch("generator and belief dimensions differ")
    p = np.asarray(beliefs.p_t, dtype=float)
    for _ in range(steps):
        p = gen.next_array() @ p
    return BeliefState(p0=beliefs.p0, p_t=tuple(float(v) for v in p),
                       t=beliefs.t + steps, gamma=beliefs.gamma)


def accumulate(gen: GeneratorState, t_max: int, gap_tol: float = GAP_TOL,
               stop_when_converged: bool = False) -> ProductAccumulator:
    """Compute X^(t) by left composition up to t_max.

    Records the first time the consensus gap (max column spread) drops to
    gap_tol, and whether any partial product was strictly positive.  With
    ``stop_when_converged`` the scan ends at the consensus time; the
    recorded first-crossing time is the same either way.
    """
    if t_max < 1:
        raise ValueError("t_max must be >= 1")
    prod, t, gap, strict_seen, consensus_time = _scan(gen, t_max, gap_tol, stop_when_converged)
    return ProductAccumulator(
        product=StochasticMatrix._trusted(prod),
        t=t,
        consensus_gap=gap,
        strict_positive_seen=strict_seen,
        consensus_time=consensus_time,
    )


def estimate_influence(spec: GeneratorSpec, replicas: int, t_max: int,
                       gap_tol: float = GAP_TOL, seed: int = 0,
                       workers: int = 1) -> InfluenceEstimate:
    """Monte Carlo sample of pi: one converged product row per replica.

    Replicas whose product has not reached gap_tol by t_max count as
    failures; NoConvergence is raised when fewer than half converge,
    signalling consensus failure of the process rather than a bug.
    """
    if replicas < 1:
        raise ValueError("replicas must be >= 1")

    def one(i, rng):
        state = spec.start_state(rng)
        prod, _, gap, _, ctime = _scan(state, t_max, gap_tol, stop_when_converged=True)
        if ctime is None:
            return None
        return prod[0], gap

    results = map_replicas(one, replicas, seed, workers)
    samples = [r[0] for r in results if r is not None]
    gaps = [r[1] for r in results if r is not None]
    failures = replicas - len(samples)
    if len(samples) * 2 < replicas:
        raise NoConvergence(len(samples), replicas)
    stack = np.array(samples)
    return InfluenceEstimate(
        samples=tuple(tuple(float(v) for v in s) for s in samples),
        per_replica_gap=tuple(float(g) for g in gaps),
        mean=tuple(float(v) for v in stack.mean(axis=0)),
        variance=tuple(float(v) for v in stack.var(axis=0, ddof=1)) if len(samples) > 1 else tuple(0.0 for _ in range(spec.n)),
        max_component_mean=float(stack.max(axis=1).mean()),
        failures=failures,
    )


# --- condition (C) -----------------------------------------------------------


def _skeleton_closure(masks, horizon: int, cap: int = 4096):
    """Boolean-product closure of support skeletons up to the given length.

    Returns ("holds", length) once an all-true pattern appears, ("fails",
    length) when the closure stabilizes without one, or ("open", size) if
    the cap or horizon is exhausted first.  Exact for finite supports:
    the zero pattern of a product of nonnegative matrices is the boolean
    product of the factors' patterns.
    """
    atom_masks = []
    seen = set()
    for m in masks:
        key = m.mask.tobytes()
        if key not in seen:
            seen.add(key)
            atom_masks.append(m.mask)
    for m in atom_masks:
        if m.all():
            return HOLDS, 1
    frontier = list(atom_masks)
    for length in range(2, horizon + 1):
        new = []
        for a in atom_masks:
            for f in frontier:
                prod = boolean_product(a, f)
                if prod.all():
                    return HOLDS, length
                key = prod.tobytes()
                if key not in seen:
                    seen.add(key)
                    new.append(prod)
        if not new:
            return FAILS, length
        if len(seen) > cap:
            return "open", len(seen)
        frontier = new
    return "open", len(seen)


def check_condition_c(spec: GeneratorSpec, horizon: int = 64, replicas: int = 200,
                      seed: int = 0) -> ConditionCReport:
    """Decide whether some finite left product is strictly positive with
    positive probability.

    Decision cascade: (a) a single draw is strictly positive with positive
    probability; (b) boolean closure of the support skeletons reaches (or
    provably never reaches) an all-true pattern; (c) Monte Carlo fraction
    of replicas whose partial product turns strictly positive by the
    horizon; (d) Monte Carlo contraction-coefficient average below 1 at
    some horizon.  Returns Undetermined when no branch is conclusive:
    the condition is a tail event, certifiable one-sidedly by simulation.
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    try:
        desc = spec.support()
    except Unsupported:
        desc = None
    if desc is not None:
        if desc.kind == "continuous" and desc.strictly_positive_prob > 0.0:
            return ConditionCReport(HOLDS, "support_analytic", desc.strictly_positive_prob, horizon)
        verdict, evidence = _skeleton_closure(desc.skeletons, horizon)
        if verdict in (HOLDS, FAILS):
            return ConditionCReport(verdict, "skeleton_semigroup", float(evidence), horizon)

    # Monte Carlo branches share one pass: track positivity hits and the
    # contraction coefficient of every partial product.
    hits = 0
    c_sums = np.zeros(horizon)
    c_sqsums = np.zeros(horizon)
    for i in range(replicas):
        state = spec.start_state(replica_seed(seed, i))
        prod = np.eye(spec.n)
        positive = False
        for t in range(horizon):
            prod = state.next_array() @ prod
            prod = prod / prod.sum(axis=1, keepdims=True)
            if not positive and prod.min() > ZERO_TOL:
                positive = True
            c = dobrushin_coefficient(StochasticMatrix._trusted(prod))
            c_sums[t] += c
            c_sqsums[t] += c * c
        if positive:
            hits += 1
    if hits > 0:
        return ConditionCReport(HOLDS, "monte_carlo_positivity", hits / replicas, horizon)
    means = c_sums / replicas
    ses = np.sqrt(np.maximum(c_sqsums / replicas - means**2, 0.0) / replicas)
    upper = means + 3.0 * ses
    if upper.min() < 1.0:
        return ConditionCReport(HOLDS, "contraction_integral", float(means[upper.argmin()]), horizon)
    return ConditionCReport(UNDETERMINED, "contraction_integral", float(upper.min()), horizon)


def semigroup_explore(support, max_len: int, dedup_tol: float = 1e-9,
                      cap: int = 4000) -> SemigroupReport:
    """Breadth-first product generation from a finite support.

    Deduplicates elements by entrywise max distance (an epsilon net) and
    reports every rank-one element found plus the minimal numeric rank.
    A positive finding (rank-one element) is a certificate; absence is
    only evidence, since products are truncated at max_len.
    """
    atoms = [m.entries for m in support]
    if not atoms:
        raise ValueError("support must be nonempty")
    elements: list[np.ndarray] = []

    def add(arr):
        for known in elements:
            if np.max(np.abs(known - arr)) <= dedup_tol:
                return False
        elements.append(arr)
        return True

    frontier = []
    for a in atoms:
        if add(a):
            frontier.append(a)
    for _ in range(2, max_len + 1):
        new = []
        for a in atoms:
            for f in frontier:
                prod = a @ f
                if add(prod):
                    new.append(prod)
        if len(elements) > cap:
            raise ExplosionGuard(f"semigroup exploration exceeded {cap} elements")
        if not new:
            break
        frontier = new

    skeletons = frozenset(SkeletonMask(e > ZERO_TOL) for e in elements)
    members = tuple(StochasticMatrix._trusted(e) for e in elements)
    ranks = [numeric_rank(m).numeric_rank for m in members]
    rank_one = tuple(m for m, r in zip(members, ranks) if r == 1)
    return SemigroupReport(
        skeletons=skeletons,
        min_rank=min(ranks),
        rank_one_atoms=rank_one,
        members=members,
    )


# --- convergence speed -------------------------------------------------------


def default_t_cap(phi: float) -> int:
    return 50 * math.ceil(-math.log(phi))


def convergence_time_2x2(spec: GeneratorSpec, phi: float, replicas: int,
                         t_cap: int | None = None, seed: int = 0) -> Speed2x2Result:
    """Periods needed for a two-agent product to come within phi of consensus.

    Tracks the first-column spread x_t - y_t of X^(t), which for n = 2 is
    the running product of second eigenvalues and hence nonincreasing in
    magnitude; t_phi is the last period with |x_t - y_t| >= phi (0 when the
    first product is already within phi).
    """
    if spec.n != 2:
        raise DimensionMismatch("convergence_time_2x2 requires n = 2")
    if not 0.0 < phi < 1.0:
        raise ValueError("phi must lie in (0,1)")
    if t_cap is None:
        t_cap = default_t_cap(phi)
    samples = []
    capped = 0
    for i in range(replicas):
        state = spec.start_state(replica_seed(seed, i))
        spread = 1.0
        t_phi = 0
        hit_cap = True
        for t in range(1, t_cap + 1):
            x = state.next_array()
            spread *= x[0, 0] - x[1, 0]
            if abs(spread) >= phi:
                t_phi = t
            else:
                hit_cap = False
                break
        if hit_cap and abs(spread) >= phi:
            capped += 1
        samples.append(t_phi)
    if capped > 0.01 * replicas:
        raise CapHit(f"{capped}/{replicas} replicas still above phi at t_cap={t_cap}")
    return Speed2x2Result(mean_t_phi=float(np.mean(samples)), samples=tuple(samples), capped=capped)


@dataclass(frozen=True)
class BetaMarginalPair:
    """Joint weight law with iid Beta(a,b) marginals on [0,1]^2.

    a = b = 1 is the independent-uniform case; a = b = 1/2 the arcsine one.
    """

    a: float
    b: float

    def __post_init__(self):
        if self.a <= 0 or self.b <= 0:
            raise InvalidProbability("beta parameters must be positive")


@dataclass(frozen=True)
class AtomicWeightPairs:
    """Finitely many (x, y) weight atoms with masses."""

    atoms: tuple  # ((x, y), mass), ...

    def __post_init__(self):
        total = 0.0
        for (_xy, mass) in self.atoms:
            if mass < 0:
                raise InvalidProbability("atom masses must be nonnegative")
            total += mass
        if abs(total - 1.0) > 1e-9:
            raise InvalidProbability("atom masses must sum to 1")


def _gauss_panels(order: int, depth: int = 20):
    """Gauss-Legendre nodes/weights on [0,1] over dyadically refined panels."""
    x, w = np.polynomial.legendre.leggauss(order)
    lo = [0.0] + [2.0 ** (-k) for k in range(depth, 0, -1)]
    breaks = lo + [1.0 - b for b in reversed(lo[:-1])]
    nodes, weights = [], []
    for a, b in zip(breaks[:-1], breaks[1:]):
        half = 0.5 * (b - a)
        nodes.append(a + half * (x + 1.0))
        weights.append(half * w)
    return np.concatenate(nodes), np.concatenate(weights)


def log_energy(mu_2x2, quad_points: int = 256) -> float:
    """Expected log(1/|lambda_2|) of one 2x2 draw under the weight law mu.

    For Beta-marginal pairs the integral is computed in quantile space:
    with Q the marginal quantile function, the integrand splits into the
    exact uniform energy 3/2 plus a divided-difference correction
    -log((Q(u)-Q(v))/(u-v)) that is smooth across the diagonal, where it
    equals log f(Q(u)).  Tensor Gauss-Legendre on dyadically refined
    panels then resolves the endpoint behavior of the quantile map.
    """
    if isinstance(mu_2x2, AtomicWeightPairs):
        total = 0.0
        for (xy, mass) in mu_2x2.atoms:
            x, y = float(xy[0]), float(xy[1])
            if x == y:
                raise SingularMass(f"atom at x = y = {x} makes the energy infinite")
            total += mass * (-math.log(abs(x - y)))
        return total
    if not isinstance(mu_2x2, BetaMarginalPair):
        raise Unsupported("log_energy needs a BetaMarginalPair or AtomicWeightPairs descriptor")
    if quad_points < 64:
        raise ValueError("quad_points must be >= 64")
    a, b = mu_2x2.a, mu_2x2.b
    order = int(np.clip(quad_points // 32, 6, 24))
    u, w = _gauss_panels(order)
    q = betaincinv(a, b, u)
    # log density at the quantile points: the diagonal limit of the correction
    logf = (a - 1.0) * np.log(q) + (b - 1.0) * np.log1p(-q) - betaln(a, b)
    du = np.abs(u[:, None] - u[None, :])
    dq = np.abs(q[:, None] - q[None, :])
    with np.errstate(divide="ignore", invalid="ignore"):
        psi = np.log(du) - np.log(dq)
    np.fill_diagonal(psi, logf)
    correction = float(w @ psi @ w)
    return 1.5 + correction


def lyapunov_exponent(spec: GeneratorSpec, t_max: int, replicas: int,
                      seed: int = 0) -> float:
    """Empirical decay rate of ||X^(t) - (1/n) 11'|| at horizon t_max.

    Averages (1/t) log of the spectral norm over replicas and exponentiates;
    a generator without contraction reports 1, exact rank-one products 0.
    """
    n = spec.n
    flat = np.full((n, n), 1.0 / n)
    slopes = []
    for i in range(replicas):
        state = spec.start_state(replica_seed(seed, i))
        prod = np.eye(n)
        for _ in range(t_max):
            prod = state.next_array() @ prod
        prod = prod / prod.sum(axis=1, keepdims=True)
        norm = float(np.linalg.norm(prod - flat, 2))
        slopes.append(math.log(norm) / t_max if norm > 0.0 else -math.inf)
    avg = float(np.mean(slopes))
    return math.exp(avg) if avg != -math.inf else 0.0


# --- disagreement ------------------------------------------------------------


def disagreement_degree(spec: GeneratorSpec, replicas: int, t_max: int,
                        atom_tol: float = 1e-4, seed: int = 0,
                        max_atoms: int = 64) -> DisagreementReport:
    """Empirical law of X^(t_max): modal numeric rank plus clustered atoms.

    Limit products are clustered by greedy nearest-atom assignment with
    entrywise max-distance tolerance atom_tol; atoms are reported only
    when the limits concentrate on at most max_atoms matrices.
    """
    if replicas < 100:
        raise ValueError("disagreement_degree needs at least 100 replicas")
    rank_counts: dict[int, int] = {}
    atoms: list[np.ndarray] = []
    counts: list[int] = []
    overflow = False
    for i in range(replicas):
        state = spec.start_state(replica_seed(seed, i))
        prod = np.eye(spec.n)
        for t in range(t_max):
            prod = state.next_array() @ prod
            if (t + 1) % 64 == 0:
                prod = prod / prod.sum(axis=1, keepdims=True)
        prod = prod / prod.sum(axis=1, keepdims=True)
        r = numeric_rank(StochasticMatrix._trusted(prod)).numeric_rank
        rank_counts[r] = rank_counts.get(r, 0) + 1
        if overflow:
            continue
        for k, atom in enumerate(atoms):
            if np.max(np.abs(atom - prod)) <= atom_tol:
                counts[k] += 1
                break
        else:
            atoms.append(prod)
            counts.append(1)
            if len(atoms) > max_atoms:
                overflow = True
    histogram = {r: c / replicas for r, c in sorted(rank_counts.items())}
    eta = max(rank_counts, key=lambda r: (rank_counts[r], -r))
    support_atoms = None
    if not overflow:
        order = np.argsort(counts)[::-1]
        support_atoms = tuple(
            (StochasticMatrix._trusted(atoms[k]), counts[k] / replicas) for k in order
        )
    return DisagreementReport(eta_estimate=int(eta), rank_histogram=histogram, support_atoms=support_atoms)


def cyclicity_check(support, zero_tol: float = ZERO_TOL):
    """Search for a partition cycle that every support matrix respects.

    A witness is an ordered tuple (A_1, ..., A_m) of pairwise-disjoint
    nonempty agent sets, m >= 2, such that every matrix moves all of A_s's
    weight into A_{s+1} (indices mod m).  The search enumerates the first
    set and follows row supports, which is exhaustive: any witness can be
    shrunk to the union-of-supports chain it generates.
    """
    mats = [m.entries for m in support]
    if not mats:
        raise ValueError("support must be nonempty")
    n = mats[0].shape[0]
    if n > 12:
        raise SizeLimit("cyclicity_check enumerates partitions only up to n = 12")
    union_support = [frozenset(np.flatnonzero(
        np.any([m[i] > zero_tol for m in mats], axis=0)).tolist()) for i in range(n)]

    def follow(block):
        out = set()
        for i in block:
            out |= union_support[i]
        return frozenset(out)

    for size in range(1, n + 1):
        for first in _subsets_of_size(n, size):
            a1 = frozenset(first)
            for m in range(2, n + 1):
                blocks = [a1]
                ok = True
                for _ in range(m - 1):
                    nxt = follow(blocks[-1])
                    if not nxt or any(nxt & b for b in blocks):
                        ok = False
                        break
                    blocks.append(nxt)
                if not ok:
                    continue
                if follow(blocks[-1]) <= a1:
                    witness = [sorted(b) for b in blocks]
                    return {"cyclic": True, "witness_partition": witness}
    return {"cyclic": False, "witness_partition": None}


def _subsets_of_size(n, size):
    import itertools

    return itertools.combinations(range(n), size)


def skeleton_equivalence_test(spec_a: GeneratorSpec, spec_b: GeneratorSpec,
                              horizon: int = 64, replicas: int = 200,
                              seed: int = 0) -> SkeletonEquivalenceReport:
    """Same initial social topology implies the same consensus verdict.

    Compares the skeleton sets of one draw from each iid process (atom-set
    equality for finite supports, declared masks for continuous ones), then
    runs the condition check on both and reports whether the verdicts agree.
    """
    if not spec_a.is_iid or not spec_b.is_iid:
        raise NotIid("skeleton equivalence is defined for iid processes")
    if spec_a.n != spec_b.n:
        raise DimensionMismatch("societies must have equal size")
    masks_a = set(spec_a.support().skeletons)
    masks_b = set(spec_b.support().skeletons)
    same = masks_a == masks_b
    va = check_condition_c(spec_a, horizon=horizon, replicas=replicas, seed=seed)
    vb = check_condition_c(spec_b, horizon=horizon, replicas=replicas, seed=replica_seed(seed, 1))
    return SkeletonEquivalenceReport(
        same_initial_skeleton=same,
        verdict_a=va,
        verdict_b=vb,
        agree=va.verdict == vb.verdict,
    )
