"""Command-line simulator: deterministic experiments, plot-ready output.

Every subcommand accepts either flags or ``--config file.json`` holding the
same parameters; results go to ``--out`` as CSV or JSON with floats printed
at 17 significant digits, which round-trips doubles exactly.  Replica i of
master seed m uses the stream documented in seeding.replica_seed, so output
bytes are identical for any worker count.

Exit codes: 0 success, 1 internal error, 2 usage error, 3 when a run ends
in a NoConvergence-class outcome (reported, not crashed).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import engine, fragmentation, generators, wisdom
from .errors import DegrootNetError, NoConvergence
from .matrices import StochasticMatrix

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_USAGE = 2
EXIT_NO_CONVERGENCE = 3


# --- float-exact serialization ----------------------------------------------


def fmt_float(x) -> str:
    if x != x:
        return "nan"
    if x == math.inf:
        return "inf"
    if x == -math.inf:
        return "-inf"
    return format(float(x), ".17g")


def _fmt_float_json(x) -> str:
    # the spellings the stdlib json parser accepts for non-finite values
    if x != x:
        return "NaN"
    if x == math.inf:
        return "Infinity"
    if x == -math.inf:
        return "-Infinity"
    return format(float(x), ".17g")


def _json_text(obj, indent=0) -> str:
    pad = " " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = ",\n".join(
            f'{pad}  {json.dumps(str(k))}: {_json_text(v, indent + 2)}' for k, v in obj.items()
        )
        return "{\n" + items + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = ", ".join(_json_text(v, indent) for v in obj)
        return "[" + items + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float_json(obj)
    return json.dumps(obj)


def emit(rows_or_doc, fmt: str, path: str, header=None) -> None:
    """Write a result record: CSV rows with a fixed header, or a JSON doc."""
    if fmt == "csv":
        lines = [",".join(header)]
        for row in rows_or_doc:
            lines.append(",".join(fmt_float(v) if isinstance(v, float) else str(v) for v in row))
        text = "\n".join(lines) + "\n"
    elif fmt == "json":
        text = _json_text(rows_or_doc) + "\n"
    else:
        raise ValueError(f"unknown format {fmt!r}")
    with open(path, "w") as fh:
        fh.write(text)


# --- model construction from flags/config ------------------------------------


def build_spec(params: dict) -> generators.GeneratorSpec:
    if params.get("spec") is not None:
        doc = params["spec"]
        if isinstance(doc, str):
            with open(doc) as fh:
                doc = json.load(fh)
        return generators.GeneratorSpec.from_dict(doc)
    model = params.get("model")
    if model == "encounter2x2":
        return generators.encounter_2x2(params["eps"], params["pmeet"])
    if model == "two-point-swap":
        return generators.two_point_swap(params["a"])
    if model == "bernoulli2x2":
        return generators.bernoulli_2x2(params["x"], params["pa"], params["pb"])
    if model == "ring":
        return generators.ring_uniform_self(params["n"])
    if model == "leader-follower":
        return generators.leader_follower(params["n"])
    if model == "beta2x2":
        a = params["alpha"]
        return generators.DirichletRows(np.full((2, 2), float(a)))
    if model == "dirichlet":
        return generators.DirichletRows(np.asarray(params["alpha_matrix"], dtype=float))
    if model == "perturbed":
        return generators.perturbed_fixed(StochasticMatrix(params["matrix"]), params["eps"])
    if model == "islands":
        return generators.islands_graphs(params["g"], params["ps"], params["pd"])
    if model == "fixed":
        return generators.Fixed(StochasticMatrix(params["matrix"]))
    if model == "mix-identity":
        return generators.mixing_identity_mixture(params["n"], params["zeta"])
    raise ValueError(f"unknown or missing model {model!r}")


_FAMILIES = {
    "ring": lambda n, params: generators.ring_uniform_self(n),
    "leader-follower": lambda n, params: generators.leader_follower(n),
    "mix-identity": lambda n, params: generators.mixing_identity_mixture(n, params.get("zeta", 0.5)),
    "fixed-ring": lambda n, params: generators.Fixed(StochasticMatrix(np.roll(np.eye(n), 1, axis=1))),
}

_ENERGY_MARGINALS = {
    "uniform-indep": (1.0, 1.0),
    "arcsine-indep": (0.5, 0.5),
}


def build_energy_mu(params: dict):
    name = params["mu"]
    if name in _ENERGY_MARGINALS:
        a, b = _ENERGY_MARGINALS[name]
        return engine.BetaMarginalPair(a, b)
    if name == "beta-indep":
        return engine.BetaMarginalPair(params["a"], params["b"])
    if name == "atoms":
        with open(params["atoms"]) as fh:
            doc = json.load(fh)
        return engine.AtomicWeightPairs(atoms=tuple(((d["x"], d["y"]), d["mass"]) for d in doc))
    raise ValueError(f"unknown mu descriptor {name!r}")


# --- argument parsing ---------------------------------------------------------


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _add_common(p):
    p.add_argument("--config", default=None, help="JSON file with this subcommand's parameters")
    p.add_argument("--seed", type=int, default=0, help="master seed (64-bit unsigned)")
    p.add_argument("--out", default=None, help="output path (default: stdout summary only)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--workers", type=int, default=None,
                   help="worker threads (default: DEGROOT_THREADS or 1)")


def _add_model_flags(p):
    p.add_argument("--model", default=None)
    p.add_argument("--spec", default=None, help="generator spec JSON file")
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--pmeet", type=float, default=None)
    p.add_argument("--a", type=float, default=None)
    p.add_argument("--x", type=float, default=None)
    p.add_argument("--pa", type=float, default=None)
    p.add_argument("--pb", type=float, default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--zeta", type=float, default=None)
    p.add_argument("--g", type=int, default=None)
    p.add_argument("--ps", type=float, default=None)
    p.add_argument("--pd", type=float, default=None)
    p.add_argument("--matrix", default=None, help="JSON file holding a matrix")


def make_parser() -> _Parser:
    parser = _Parser(prog="degrootnet", description=__doc__)
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("simulate", help="evolve a belief vector and write the trajectory")
    _add_common(p)
    _add_model_flags(p)
    p.add_argument("--p0", default=None, help="comma-separated initial beliefs")
    p.add_argument("--steps", type=int, default=100)

    p = sub.add_parser("influence", help="Monte Carlo influence-vector estimate")
    _add_common(p)
    _add_model_flags(p)
    p.add_argument("--replicas", type=int, default=1000)
    p.add_argument("--tmax", type=int, default=2000)
    p.add_argument("--gap-tol", type=float, default=engine.GAP_TOL)

    p = sub.add_parser("wisdom", help="consensus-error diagnostics across sizes")
    _add_common(p)
    p.add_argument("--family", choices=sorted(_FAMILIES), default="ring")
    p.add_argument("--sizes", default="5,10,20")
    p.add_argument("--gamma", type=float, default=0.5)
    p.add_argument("--signal-width", type=float, default=0.25)
    p.add_argument("--zeta", type=float, default=0.5)
    p.add_argument("--replicas", type=int, default=500)
    p.add_argument("--tmax", type=int, default=20000)
    p.add_argument("--gap-tol", type=float, default=engine.GAP_TOL)

    p = sub.add_parser("speed2x2", help="two-agent convergence times")
    _add_common(p)
    p.add_argument("--mu", default="uniform-indep",
                   help="uniform-indep | arcsine-indep | beta-indep (with --a/--b)")
    p.add_argument("--a", type=float, default=None)
    p.add_argument("--b", type=float, default=None)
    p.add_argument("--phi", type=float, default=1e-6)
    p.add_argument("--replicas", type=int, default=2000)
    p.add_argument("--tcap", type=int, default=None)

    p = sub.add_parser("energy", help="logarithmic energy of a 2x2 weight law")
    _add_common(p)
    p.add_argument("--mu", default="uniform-indep")
    p.add_argument("--a", type=float, default=None)
    p.add_argument("--b", type=float, default=None)
    p.add_argument("--atoms", default=None, help="JSON list of {x, y, mass}")
    p.add_argument("--quad-points", type=int, default=256)

    p = sub.add_parser("pmax", help="most likely disconnected collection")
    _add_common(p)
    p.add_argument("--dist", default=None, help="GraphDistribution JSON file")
    p.add_argument("--islands", default=None, help="g,p_s,p_d triple, e.g. 2,0.8,0.3")
    p.add_argument("--method", choices=("subsets", "cuts"), default="subsets")

    p = sub.add_parser("rate", help="decay rate of the consensus-gap tail")
    _add_common(p)
    _add_model_flags(p)
    p.add_argument("--dist", default=None, help="GraphDistribution JSON (lazy-Metropolis coupling)")
    p.add_argument("--epsilon", type=float, default=0.5)
    p.add_argument("--tgrid", default="1:40")
    p.add_argument("--replicas", type=int, default=20000)

    p = sub.add_parser("disagree", help="empirical law of the limiting product")
    _add_common(p)
    _add_model_flags(p)
    p.add_argument("--replicas", type=int, default=2000)
    p.add_argument("--tmax", type=int, default=200)
    p.add_argument("--atom-tol", type=float, default=1e-4)

    p = sub.add_parser("check-c", help="primitivity (consensus certificate) check")
    _add_common(p)
    _add_model_flags(p)
    p.add_argument("--horizon", type=int, default=64)
    p.add_argument("--replicas", type=int, default=200)

    p = sub.add_parser("skeleton", help="same-topology consensus equivalence")
    _add_common(p)
    p.add_argument("--spec-a", required=False, default=None)
    p.add_argument("--spec-b", required=False, default=None)
    p.add_argument("--horizon", type=int, default=64)
    p.add_argument("--replicas", type=int, default=200)

    p = sub.add_parser("semigroup", help="product closure of a finite support")
    _add_common(p)
    p.add_argument("--support", default=None, help="JSON list of matrices")
    p.add_argument("--max-len", type=int, default=12)
    p.add_argument("--dedup-tol", type=float, default=1e-9)

    p = sub.add_parser("conjugacy", help="Dirichlet influence-law verification")
    _add_common(p)
    _add_model_flags(p)
    p.add_argument("--replicas", type=int, default=5000)
    p.add_argument("--tmax", type=int, default=4000)
    p.add_argument("--phi", default=None, help="comma-separated reference phi override")

    return parser


def _collect_params(args) -> dict:
    params = {k.replace("-", "_"): v for k, v in vars(args).items() if k != "config" and v is not None}
    if args.config:
        with open(args.config) as fh:
            doc = json.load(fh)
        for k, v in doc.items():
            if k == "command":
                continue
            params[k.replace("-", "_")] = v
    return params


def serialize_config(command: str, params: dict) -> str:
    doc = {"command": command}
    doc.update({k: v for k, v in sorted(params.items())})
    return _json_text(doc)


def parse_config(text: str) -> tuple:
    doc = json.loads(text)
    command = doc.pop("command")
    return command, doc


# --- subcommand bodies --------------------------------------------------------


def _workers(params):
    if params.get("workers") is not None:
        return int(params["workers"])
    return int(os.environ.get("DEGROOT_THREADS", "1"))


def _load_matrix_param(params):
    m = params.get("matrix")
    if isinstance(m, str):
        with open(m) as fh:
            return json.load(fh)
    return m


def _cmd_simulate(params):
    params = dict(params)
    params["matrix"] = _load_matrix_param(params)
    spec = build_spec(params)
    p0 = [float(v) for v in str(params.get("p0", "")).split(",") if v != ""]
    if not p0:
        raise ValueError("simulate needs --p0")
    beliefs = engine.BeliefState.from_signals(p0)
    state = spec.start_state(params.get("seed", 0))
    rows = [(0, *beliefs.p_t)]
    for t in range(1, params.get("steps", 100) + 1):
        beliefs = engine.evolve(state, beliefs, 1)
        rows.append((t, *beliefs.p_t))
    header = ["t"] + [f"p_{i+1}" for i in range(spec.n)]
    doc = {"final": list(beliefs.p_t), "steps": params.get("steps", 100)}
    summary = f"simulate: n={spec.n} steps={params.get('steps', 100)} final={[round(v, 6) for v in beliefs.p_t]}"
    return rows, header, doc, summary, EXIT_OK


def _cmd_influence(params):
    params = dict(params)
    params["matrix"] = _load_matrix_param(params)
    spec = build_spec(params)
    est = engine.estimate_influence(
        spec,
        replicas=params.get("replicas", 1000),
        t_max=params.get("tmax", 2000),
        gap_tol=params.get("gap_tol", engine.GAP_TOL),
        seed=params.get("seed", 0),
        workers=_workers(params),
    )
    header = ["replica", "gap"] + [f"pi_{i+1}" for i in range(spec.n)]
    rows = [(k, float(g), *s) for k, (s, g) in enumerate(zip(est.samples, est.per_replica_gap))]
    doc = {
        "mean": list(est.mean),
        "variance": list(est.variance),
        "max_component_mean": est.max_component_mean,
        "failures": est.failures,
        "replicas": est.replicas,
    }
    summary = (f"influence: replicas={est.replicas} failures={est.failures} "
               f"mean={[round(v, 4) for v in est.mean]}")
    return rows, header, doc, summary, EXIT_OK


def _cmd_wisdom(params):
    sizes = tuple(int(s) for s in str(params.get("sizes", "5,10,20")).split(","))
    family = _FAMILIES[params.get("family", "ring")]
    cfg = wisdom.WisdomConfig(
        family=lambda n: family(n, params),
        sizes=sizes,
        gamma=params.get("gamma", 0.5),
        signal_law=wisdom.UniformSignal(params.get("gamma", 0.5), params.get("signal_width", 0.25)),
        replicas=params.get("replicas", 500),
        t_max=params.get("tmax", 20000),
        gap_tol=params.get("gap_tol", engine.GAP_TOL),
        seed=params.get("seed", 0),
    )
    res = wisdom.run_wisdom(cfg)
    header = ["n", "mean_abs_error", "q50", "q90", "e_max_pi", "var_max_pi", "convergence_fraction"]
    rows = [
        (r.n, r.mean_abs_error, r.q50, r.q90, r.e_max_pi, r.var_max_pi, r.convergence_fraction)
        for r in res.per_size
    ]
    doc = {"per_size": [dict(zip(header, row)) for row in rows]}
    worst = min(r.convergence_fraction for r in res.per_size)
    summary = f"wisdom: sizes={list(sizes)} min_convergence_fraction={worst:.3f}"
    code = EXIT_OK if worst >= 0.5 else EXIT_NO_CONVERGENCE
    return rows, header, doc, summary, code


def _speed_spec(params):
    name = params.get("mu", "uniform-indep")
    if name in _ENERGY_MARGINALS:
        a, b = _ENERGY_MARGINALS[name]
    elif name == "beta-indep":
        a, b = params["a"], params["b"]
    else:
        raise ValueError(f"speed2x2 does not understand mu={name!r}")
    return generators.DirichletRows(np.array([[a, b], [a, b]], dtype=float))


def _cmd_speed2x2(params):
    spec = _speed_spec(params)
    res = engine.convergence_time_2x2(
        spec,
        phi=params.get("phi", 1e-6),
        replicas=params.get("replicas", 2000),
        t_cap=params.get("tcap"),
        seed=params.get("seed", 0),
    )
    header = ["replica", "t_phi"]
    rows = list(enumerate(res.samples))
    doc = {"mean_t_phi": res.mean_t_phi, "capped": res.capped, "samples": list(res.samples)}
    summary = f"speed2x2: mean_t_phi={res.mean_t_phi:.4f} over {len(res.samples)} replicas"
    return rows, header, doc, summary, EXIT_OK


def _cmd_energy(params):
    mu = build_energy_mu(params)
    value = engine.log_energy(mu, quad_points=params.get("quad_points", 256))
    doc = {"i_mu": value}
    summary = f"energy: I_mu={value:.10f}"
    return [(value,)], ["i_mu"], doc, summary, EXIT_OK


def _load_distribution(params):
    if params.get("dist"):
        with open(params["dist"]) as fh:
            return fragmentation.GraphDistribution.from_dict(json.load(fh))
    if params.get("islands"):
        g, ps, pd = str(params["islands"]).split(",")
        return fragmentation.islands_distribution(int(g), float(ps), float(pd))
    raise ValueError("need --dist or --islands")


def _cmd_pmax(params):
    dist = _load_distribution(params)
    if params.get("method", "subsets") == "cuts":
        report = fragmentation.p_max_by_cuts(dist)
    else:
        report = fragmentation.p_max(dist)
    doc = report.to_dict()
    header = ["p_max", "pi_g_empty", "predicted_rate"]
    rows = [(float(report.p_max), report.pi_g_empty, report.predicted_rate)]
    summary = f"pmax: p_max={float(report.p_max):.10g} rate={report.predicted_rate}"
    return rows, header, doc, summary, EXIT_OK


def _cmd_rate(params):
    params = dict(params)
    if params.get("dist"):
        dist = _load_distribution(params)
        spec = fragmentation.metropolis_mixture(dist)
    else:
        params["matrix"] = _load_matrix_param(params)
        spec = build_spec(params)
    grid = params.get("tgrid", "1:40")
    if isinstance(grid, str) and ":" in grid:
        lo, hi = grid.split(":")
        t_grid = list(range(int(lo), int(hi) + 1))
    else:
        t_grid = [int(v) for v in str(grid).split(",")]
    report = fragmentation.decay_rate_estimate(
        spec,
        epsilon=params.get("epsilon", 0.5),
        t_grid=t_grid,
        replicas=params.get("replicas", 20000),
        seed=params.get("seed", 0),
    )
    header = ["t", "count", "logprob"]
    rows = list(zip(report.t_grid, report.counts, report.per_t_logprob))
    doc = {
        "empirical_rate": report.empirical_rate,
        "t_grid": list(report.t_grid),
        "counts": list(report.counts),
        "per_t_logprob": list(report.per_t_logprob),
    }
    summary = f"rate: empirical_rate={report.empirical_rate}"
    return rows, header, doc, summary, EXIT_OK


def _cmd_disagree(params):
    params = dict(params)
    params["matrix"] = _load_matrix_param(params)
    spec = build_spec(params)
    rep = engine.disagreement_degree(
        spec,
        replicas=params.get("replicas", 2000),
        t_max=params.get("tmax", 200),
        atom_tol=params.get("atom_tol", 1e-4),
        seed=params.get("seed", 0),
    )
    header = ["rank", "frequency"]
    rows = sorted(rep.rank_histogram.items())
    doc = {
        "eta_estimate": rep.eta_estimate,
        "rank_histogram": {str(k): v for k, v in rep.rank_histogram.items()},
        "support_atoms": None if rep.support_atoms is None else [
            {"matrix": m.entries.tolist(), "frequency": f} for m, f in rep.support_atoms
        ],
    }
    summary = f"disagree: eta={rep.eta_estimate} histogram={rep.rank_histogram}"
    return rows, header, doc, summary, EXIT_OK


def _cmd_check_c(params):
    params = dict(params)
    params["matrix"] = _load_matrix_param(params)
    spec = build_spec(params)
    rep = engine.check_condition_c(
        spec,
        horizon=params.get("horizon", 64),
        replicas=params.get("replicas", 200),
        seed=params.get("seed", 0),
    )
    doc = {"verdict": rep.verdict, "method": rep.method, "evidence": rep.evidence, "horizon": rep.horizon}
    rows = [(rep.verdict, rep.method, rep.evidence, rep.horizon)]
    header = ["verdict", "method", "evidence", "horizon"]
    summary = f"check-c: {rep.verdict} via {rep.method}"
    return rows, header, doc, summary, EXIT_OK


def _load_spec_file(path):
    with open(path) as fh:
        return generators.GeneratorSpec.from_dict(json.load(fh))


def _cmd_skeleton(params):
    spec_a = _load_spec_file(params["spec_a"])
    spec_b = _load_spec_file(params["spec_b"])
    rep = engine.skeleton_equivalence_test(
        spec_a, spec_b,
        horizon=params.get("horizon", 64),
        replicas=params.get("replicas", 200),
        seed=params.get("seed", 0),
    )
    doc = {
        "same_initial_skeleton": rep.same_initial_skeleton,
        "verdict_a": rep.verdict_a.verdict,
        "verdict_b": rep.verdict_b.verdict,
        "agree": rep.agree,
    }
    rows = [(rep.same_initial_skeleton, rep.verdict_a.verdict, rep.verdict_b.verdict, rep.agree)]
    header = ["same_initial_skeleton", "verdict_a", "verdict_b", "agree"]
    summary = (f"skeleton: same={rep.same_initial_skeleton} "
               f"A={rep.verdict_a.verdict} B={rep.verdict_b.verdict} agree={rep.agree}")
    return rows, header, doc, summary, EXIT_OK


def _cmd_semigroup(params):
    with open(params["support"]) as fh:
        mats = [StochasticMatrix(m) for m in json.load(fh)]
    rep = engine.semigroup_explore(
        mats,
        max_len=params.get("max_len", 12),
        dedup_tol=params.get("dedup_tol", 1e-9),
    )
    doc = {
        "min_rank": rep.min_rank,
        "elements": rep.elements,
        "rank_one_atoms": [m.entries.tolist() for m in rep.rank_one_atoms],
        "skeletons": [s.mask.astype(int).tolist() for s in sorted(rep.skeletons, key=lambda s: s.mask.tobytes())],
    }
    rows = [(rep.min_rank, rep.elements, len(rep.rank_one_atoms), len(rep.skeletons))]
    header = ["min_rank", "elements", "rank_one_atoms", "skeletons"]
    summary = f"semigroup: elements={rep.elements} min_rank={rep.min_rank} rank_one={len(rep.rank_one_atoms)}"
    return rows, header, doc, summary, EXIT_OK


def _cmd_conjugacy(params):
    params = dict(params)
    params["matrix"] = _load_matrix_param(params)
    spec = build_spec(params)
    phi = params.get("phi")
    if isinstance(phi, str):
        phi = [float(v) for v in phi.split(",")]
    res = wisdom.dirichlet_conjugacy_test(
        spec,
        replicas=params.get("replicas", 5000),
        seed=params.get("seed", 0),
        phi=phi,
        t_max=params.get("tmax", 4000),
        workers=_workers(params),
    )
    doc = dict(res)
    doc["phi"] = list(res["phi"])
    rows = [(res["pass"], res["mean_err"], res["var_err"])]
    header = ["pass", "mean_err", "var_err"]
    summary = f"conjugacy: pass={res['pass']} mean_err={res['mean_err']:.5f} var_err={res['var_err']:.6f}"
    return rows, header, doc, summary, EXIT_OK


_COMMANDS = {
    "simulate": _cmd_simulate,
    "influence": _cmd_influence,
    "wisdom": _cmd_wisdom,
    "speed2x2": _cmd_speed2x2,
    "energy": _cmd_energy,
    "pmax": _cmd_pmax,
    "rate": _cmd_rate,
    "disagree": _cmd_disagree,
    "check-c": _cmd_check_c,
    "skeleton": _cmd_skeleton,
    "semigroup": _cmd_semigroup,
    "conjugacy": _cmd_conjugacy,
}


def run(argv) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.command is None:
        print("usage error: missing subcommand", file=sys.stderr)
        return EXIT_USAGE
    try:
        params = _collect_params(args)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"usage error: bad config: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        rows, header, doc, summary, code = _COMMANDS[args.command](params)
    except NoConvergence as exc:
        print(f"{args.command}: no convergence: {exc}")
        return EXIT_NO_CONVERGENCE
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, KeyError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DegrootNetError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    out = params.get("out")
    if out:
        fmt = params.get("format", "csv")
        try:
            if fmt == "csv":
                emit(rows, "csv", out, header=header)
            else:
                emit(doc, "json", out)
        except OSError as exc:
            print(f"error: cannot write {out}: {exc}", file=sys.stderr)
            return EXIT_INTERNAL
    print(summary)
    return code


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
