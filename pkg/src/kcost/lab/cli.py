"""kcost command line.

Every subcommand writes a JSON report (stdout unless ``--report``) that
echoes its full configuration, and optional CSV artifacts (``--out``).
Exit status: 0 when every certificate passes, 2 when one fails, 1 on usage
errors (bad flags, unreadable input, invalid parameters).

Datasets are given with ``--data`` as a CSV path or as a generator spec,
e.g. ``lower1d:epsilon=0.03125,t=2`` or ``random:family=uniform-box,n=200,d=2``.
Seeds default to the ``KCOST_SEED`` environment variable, then 0.
"""
from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from .. import constructions, coreset, generators, metricspace, nets, sampling, solvers
from ..cost import cost, evaluate
from ..geometry import (REL_TOL, CostKind, FiniteMetric, read_dataset, read_metric, read_weighted,
                        validate_metric, write_dataset, write_weighted)
from .report import emit_report, format_curve

EXIT_OK, EXIT_USAGE, EXIT_FAIL = 0, 1, 2


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    """ArgumentParser that raises instead of exiting with status 2."""

    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def default_seed() -> int:
    raw = os.environ.get("KCOST_SEED")
    if raw is None or raw == "":
        return 0
    try:
        return int(raw)
    except ValueError as exc:
        raise UsageError(f"KCOST_SEED must be an integer, got {raw!r}") from exc


# --- inputs ------------------------------------------------------------------

def _parse_spec(text: str) -> tuple[str, dict]:
    name, _, body = text.partition(":")
    params = {}
    for item in filter(None, body.split(",")):
        key, eq, value = item.partition("=")
        if not eq:
            raise UsageError(f"bad generator parameter {item!r}; expected key=value")
        params[key.strip()] = value.strip()
    return name, params


def _num(params: dict, key: str, cast, default=None):
    if key not in params:
        if default is None:
            raise UsageError(f"generator needs {key}=")
        return default
    try:
        return cast(params[key])
    except ValueError as exc:
        raise UsageError(f"bad value for {key}: {params[key]!r}") from exc


def _fraction(text: str) -> float:
    if "/" in text:
        a, b = text.split("/", 1)
        return float(a) / float(b)
    return float(text)


def load_data(spec: str) -> np.ndarray:
    """CSV path, or a ``lower1d``, ``lowerd``, ``random`` or ``heavylight`` generator spec.

    ``heavylight`` takes ``spreads`` as a ``;``-separated list, one per cluster.
    """
    if os.path.exists(spec):
        try:
            return read_dataset(spec)
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read dataset {spec}: {exc}") from exc
    name, p = _parse_spec(spec)
    if name == "lower1d":
        X, _ = generators.gen_lower_1d(_num(p, "epsilon", _fraction), _num(p, "t", int), compress=False)
        return X
    if name == "lowerd":
        X, _ = generators.gen_lower_ddim(_num(p, "epsilon", _fraction), _num(p, "k", int),
                                         _num(p, "d", int), _num(p, "t", int), None,
                                         p.get("kind", "means"), rng_seed=_num(p, "seed", int, 0))
        return X
    if name == "random":
        X, _ = generators.gen_random(p.get("family", "uniform-box"), _num(p, "n", int, 100),
                                     _num(p, "d", int, 2), k=_num(p, "k", int, 3),
                                     sigma=_num(p, "sigma", float, 1.0), box=_num(p, "box", float, 1.0),
                                     separation=_num(p, "separation", float, 100.0),
                                     rng_seed=_num(p, "seed", int, 0))
        return X
    if name == "heavylight":
        spreads = _num(p, "spreads", lambda v: [_fraction(x) for x in v.split(";")], [1.0, 10.0])
        X, _ = generators.gen_heavy_light(_num(p, "k", int, len(spreads)), _num(p, "heavy", int, 3), spreads,
                                          _num(p, "d", int, 2), rng_seed=_num(p, "seed", int, 0))
        return X
    raise UsageError(f"dataset {spec!r} is neither a readable file nor a generator spec")


def load_metric(args) -> FiniteMetric:
    if args.metric and args.points:
        raise UsageError("give either --metric or --points, not both")
    if args.metric:
        try:
            m = read_metric(args.metric)
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read metric {args.metric}: {exc}") from exc
        bad = validate_metric(m)
        if bad is not None:
            raise UsageError(f"{args.metric} is not a metric: {bad}")
        return m
    if args.points:
        return FiniteMetric.from_points(load_data(args.points))
    raise UsageError("one of --metric or --points is required")


def _config(args) -> dict:
    skip = {"func", "report"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _finish(args, results: dict, passed: bool) -> int:
    emit_report(args.command_path, _config(args), results, passed, args.report)
    return EXIT_OK if passed else EXIT_FAIL


def _write_text(path, text: str):
    with open(path, "w") as fh:
        fh.write(text)


# --- subcommands ---------------------------------------------------------------

def cmd_gen(args) -> int:
    if args.family_cmd == "lower1d":
        X, spec = generators.gen_lower_1d(args.epsilon, args.t, compress=args.compress or None)
        curve = None
        if not spec.compressed and spec.realized_n <= 5000:
            est = solvers.estimate_L(X, 1, args.epsilon)
            curve = {"L_hat": est.L_hat, "exceeds_t": est.L_hat > args.t}
        ok = curve is None or curve["exceeds_t"]
        results = {"spec": spec.to_dict(), "certificate": curve}
    elif args.family_cmd == "lowerd":
        X, spec = generators.gen_lower_ddim(args.epsilon, args.k, args.d, args.t, None, args.kind,
                                            rng_seed=args.seed, candidate_pool=args.pool,
                                            compress=args.compress or None)
        disjoint, slack = generators.check_disjoint_balls(spec)
        cells = generators.check_apex_cells(X, spec)
        ok = disjoint and cells
        results = {"spec": spec.to_dict(), "disjoint_balls": disjoint, "min_slack": slack,
                   "apex_cells": cells}
    else:
        X, labels = generators.gen_random(args.family, args.n, args.d, k=args.k, sigma=args.sigma,
                                          box=args.box, separation=args.separation, rng_seed=args.seed)
        ok = True
        results = {"family": args.family, "n": int(X.shape[0]), "d": int(X.shape[1])}
    if args.out:
        if hasattr(X, "weights"):
            write_weighted(args.out, X)
        else:
            write_dataset(args.out, X)
    return _finish(args, results, ok)


def cmd_solve(args) -> int:
    X = load_data(args.data)
    res = solvers.solve(X, args.k, args.kind, args.method, args.restarts, args.seed)
    if args.out:
        write_dataset(args.out, res.centers)
    return _finish(args, res.to_dict() | {"report": evaluate(res.centers, X, args.kind).to_dict()}, True)


def cmd_seed(args) -> int:
    X = load_data(args.data)
    if args.overseed:
        if args.k is None or args.epsilon is None:
            raise UsageError("--overseed needs --k and --epsilon")
        rep = sampling.overseed_experiment(X, args.k, args.epsilon, args.c_const, args.trials,
                                           args.seed, args.kind, args.oracle, args.restarts)
        if args.out:
            exact = rep.exact_curve or [None] * len(rep.mean_curve)
            pairs = [(m + 1, c, e is not None) for m, (c, e) in enumerate(zip(rep.mean_curve, exact))]
            _write_text(args.out, format_curve(pairs))
        passed = rep.trials > 0 and rep.success_rate >= args.min_rate
        return _finish(args, rep.to_dict() | {"min_rate": args.min_rate}, passed)
    if args.m is None:
        raise UsageError("seed needs --m (or --overseed)")
    trace = sampling.d2_sample(X, args.m, args.kind, args.seed)
    out = trace.to_dict()
    out["seed"] = args.seed
    if args.out:
        write_dataset(args.out, X[trace.chosen])
    return _finish(args, out, True)


def cmd_construct(args) -> int:
    X = load_data(args.data) if args.shape != "annuli" else None
    if args.shape == "upper1d":
        try:
            S = constructions.build_1d_upper(X, args.epsilon, args.kind)
        except constructions.GuaranteeError as exc:
            return _finish(args, {"error": str(exc)}, False)
        base = cost(np.zeros((1, 1)), X, args.kind)
        got = cost(S[:, None], X, args.kind)
        ok = got <= args.epsilon * base * (1 + REL_TOL)
        if args.out:
            write_dataset(args.out, S[:, None])
        return _finish(args, {"size": int(S.size), "cost": got, "base_cost": base,
                              "cost_ratio": got / base if base else 0.0,
                              "size_bound": constructions.size_bound_1d(X.shape[0], args.epsilon)}, ok)
    if args.shape == "fan":
        if args.clusters:
            try:
                C = read_dataset(args.clusters)
            except (OSError, ValueError) as exc:
                raise UsageError(f"cannot read clusters {args.clusters}: {exc}") from exc
            labels = None
        elif args.k:
            sol = solvers.lloyd_multistart(X, args.k, args.restarts, args.seed, args.kind)
            C, labels = sol.centers, sol.labels
        else:
            raise UsageError("construct fan needs --clusters or --k")
        try:
            fan = constructions.build_fan_coreset(X, C, labels, args.epsilon, args.kind,
                                                  rng_seed=args.seed, candidate_pool=args.pool)
        except constructions.GuaranteeError as exc:
            return _finish(args, {"error": str(exc)}, False)
        if args.out:
            write_dataset(args.out, fan.points)
        ok = fan.cost <= args.epsilon * fan.baseline * (1 + REL_TOL)
        return _finish(args, fan.to_dict(), ok)
    metric = load_metric(args)
    res = constructions.build_metric_annuli(metric, args.center, args.epsilon)
    ok = res.cost <= args.epsilon * res.base_cost * (1 + REL_TOL)
    ok = ok and all(res.rep_distance[y] <= res.radii[j] * (1 + REL_TOL) for y, j in res.annulus_of.items())
    return _finish(args, res.to_dict(), ok)


def cmd_coreset(args) -> int:
    X = load_data(args.data)
    if args.action == "build":
        b = coreset.build_coreset(X, args.k, args.epsilon, args.method, args.kind, args.seed,
                                  args.restarts, args.beta, candidate_pool=args.pool)
        if args.out:
            write_weighted(args.out, b.coreset)
        results = b.to_dict()
        ok = True
        if args.trials > 0:
            cert = coreset.validate_coreset(X, b.coreset, args.k, args.epsilon, args.trials, args.seed,
                                            args.kind, beta=args.beta if args.method == "d2" else None)
            results["certificate"] = cert.to_dict()
            ok = cert.passed
        return _finish(args, results, ok)
    if not args.coreset:
        raise UsageError("coreset validate needs --coreset")
    try:
        S = read_weighted(args.coreset)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read coreset {args.coreset}: {exc}") from exc
    cert = coreset.validate_coreset(X, S, args.k, args.epsilon, args.trials, args.seed, args.kind,
                                    beta=args.beta)
    return _finish(args, cert.to_dict(), cert.passed)


def cmd_nets(args) -> int:
    net = nets.build_net(args.d, args.epsilon, args.pool, args.seed)
    cover = nets.verify_cover(net, args.probes, args.seed)
    packing = nets.verify_packing(net) if len(net) >= 2 else None
    bound = nets.covering_upper_bound(args.d, args.epsilon)
    cert = net.certificate(cover, packing) | {"size_bound": bound}
    ok = cover.passed and (packing is None or packing.passed) and len(net) <= bound
    if args.out:
        write_dataset(args.out, net.points)
    return _finish(args, cert, ok)


def cmd_metric(args) -> int:
    metric = load_metric(args)
    if args.action == "cover":
        res = metricspace.greedy_cover(metric, args.r)
        ok = metricspace.check_cover(metric, res)
        return _finish(args, res.to_dict() | {"valid": ok}, ok)
    if args.action == "doubling":
        est = metricspace.estimate_doubling(metric, args.balls, args.seed)
        return _finish(args, est.to_dict(), True)
    res = metricspace.soft_gamma_check(metric, args.epsilon, args.balls, args.seed)
    res["note"] = "soft check: both gamma_hat and d_hat are greedy estimates"
    return _finish(args, res, True)


def cmd_estimate_l(args) -> int:
    X = load_data(args.data)
    est = solvers.estimate_L(X, args.k, args.epsilon, args.kind, args.oracle, args.restarts, args.seed)
    return _finish(args, est.to_dict(), est.L_hat >= 1)


def cmd_decay_curve(args) -> int:
    X = load_data(args.data)
    if args.source == "oracle":
        curve = solvers.delta_curve(X, args.m_max, args.kind, args.oracle, args.restarts, args.seed)
        pairs = curve.pairs()
    else:
        m = X.shape[0] if args.m_max is None else min(args.m_max, X.shape[0])
        trace = sampling.d2_sample(X, m, args.kind, args.seed)
        pairs = [(i + 1, c, False) for i, c in enumerate(trace.cost_after)]
    monotone = all(b[1] <= a[1] for a, b in zip(pairs, pairs[1:]))
    if args.out:
        _write_text(args.out, format_curve(pairs))
    return _finish(args, {"curve": [list(p) for p in pairs], "non_increasing": monotone}, monotone)


# --- parser ---------------------------------------------------------------------

def _kind(text: str) -> int:
    try:
        return int(CostKind.coerce(text))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _positive_eps(text: str) -> float:
    try:
        v = _fraction(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from exc
    if not v > 0 or math.isinf(v):
        raise argparse.ArgumentTypeError(f"epsilon must be positive, got {text}")
    return v


def build_parser() -> Parser:
    common = Parser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="RNG seed (default: $KCOST_SEED, else 0)")
    common.add_argument("--report", default=None, help="JSON report path (default: stdout)")
    common.add_argument("--out", default=None, help="CSV artifact path")

    data = Parser(add_help=False)
    data.add_argument("--data", required=True, help="dataset CSV or generator spec (name:key=value,...)")
    data.add_argument("--kind", type=_kind, default=2, help="means|median or 2|1 (default: means)")

    oracle = Parser(add_help=False)
    oracle.add_argument("--oracle", default="auto", choices=["auto", "dp1d", "enumerate", "lloyd"],
                        help="Delta_k oracle (default: auto = dp1d in 1-D, enumerate for n<=12, else lloyd)")
    oracle.add_argument("--restarts", type=int, default=10, help="Lloyd restarts (default: 10)")

    metric = Parser(add_help=False)
    metric.add_argument("--metric", default=None, help="distance-matrix CSV")
    metric.add_argument("--points", default=None, help="point CSV or generator spec (Euclidean metric)")

    p = Parser(prog="kcost", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True, parser_class=Parser)

    g = sub.add_parser("gen", help="generate datasets")
    gsub = g.add_subparsers(dest="family_cmd", required=True, parser_class=Parser)
    g1 = gsub.add_parser("lower1d", parents=[common], help="1-D lower-bound instance")
    g1.add_argument("--epsilon", type=_positive_eps, required=True)
    g1.add_argument("--t", type=int, required=True)
    g1.add_argument("--compress", action="store_true", help="write sites with multiplicity weights")
    gd = gsub.add_parser("lowerd", parents=[common], help="d-dimensional lower-bound instance")
    gd.add_argument("--epsilon", type=_positive_eps, required=True)
    gd.add_argument("--k", type=int, required=True)
    gd.add_argument("--d", type=int, required=True)
    gd.add_argument("--t", type=int, required=True)
    gd.add_argument("--kind", type=_kind, default=2)
    gd.add_argument("--pool", type=int, default=None, help="net candidate pool (d>=3)")
    gd.add_argument("--compress", action="store_true")
    gr = gsub.add_parser("random", parents=[common], help="random test data")
    gr.add_argument("--family", choices=generators.RANDOM_KINDS, default="uniform-box")
    gr.add_argument("--n", type=int, default=100)
    gr.add_argument("--d", type=int, default=2)
    gr.add_argument("--k", type=int, default=3)
    gr.add_argument("--sigma", type=float, default=1.0)
    gr.add_argument("--box", type=float, default=1.0)
    gr.add_argument("--separation", type=float, default=100.0)
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("solve", parents=[common, data], help="Delta_k by exact or heuristic oracle")
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--method", default="auto", choices=["auto", "dp1d", "enumerate", "lloyd"])
    s.add_argument("--restarts", type=int, default=10)
    s.set_defaults(func=cmd_solve)

    sd = sub.add_parser("seed", parents=[common, data, oracle], help="D^2 seeding and over-seeding")
    sd.add_argument("--m", type=int, default=None, help="number of centers to sample")
    sd.add_argument("--overseed", action="store_true", help="run the over-seeding experiment")
    sd.add_argument("--k", type=int, default=None)
    sd.add_argument("--epsilon", type=_positive_eps, default=None)
    sd.add_argument("--c-const", type=float, default=1.0, help="divisor of epsilon for m (default: 1)")
    sd.add_argument("--trials", type=int, default=50)
    sd.add_argument("--min-rate", type=float, default=0.9,
                    help="success rate needed for exit 0 (default: 0.9)")
    sd.set_defaults(func=cmd_seed)

    c = sub.add_parser("construct", help="upper-bound constructions")
    csub = c.add_subparsers(dest="shape", required=True, parser_class=Parser)
    cu = csub.add_parser("upper1d", parents=[common, data], help="1-D grid set around 0")
    cu.add_argument("--epsilon", type=_positive_eps, required=True)
    cf = csub.add_parser("fan", parents=[common, data], help="fan geometric coreset")
    cf.add_argument("--epsilon", type=_positive_eps, required=True)
    cf.add_argument("--clusters", default=None, help="CSV of cluster centers (Voronoi cells)")
    cf.add_argument("--k", type=int, default=None, help="cluster with Lloyd instead of --clusters")
    cf.add_argument("--restarts", type=int, default=10)
    cf.add_argument("--pool", type=int, default=None)
    ca = csub.add_parser("annuli", parents=[common, metric], help="metric annuli representatives")
    ca.add_argument("--center", type=int, default=0)
    ca.add_argument("--epsilon", type=_positive_eps, required=True)
    c.set_defaults(func=cmd_construct)

    co = sub.add_parser("coreset", help="weighted coresets")
    cosub = co.add_subparsers(dest="action", required=True, parser_class=Parser)
    cb = cosub.add_parser("build", parents=[common, data], help="build (and optionally validate)")
    cb.add_argument("--k", type=int, required=True)
    cb.add_argument("--epsilon", type=_positive_eps, required=True)
    cb.add_argument("--method", choices=["fan", "d2"], default="fan")
    cb.add_argument("--beta", type=float, default=1.0, help="d2 method: sample L(eps^2/beta) (default: 1)")
    cb.add_argument("--restarts", type=int, default=5)
    cb.add_argument("--pool", type=int, default=None)
    cb.add_argument("--trials", type=int, default=0, help="validation trials (default: 0 = skip)")
    cv = cosub.add_parser("validate", parents=[common, data], help="validate a weighted coreset")
    cv.add_argument("--coreset", default=None, help="weighted CSV")
    cv.add_argument("--k", type=int, required=True)
    cv.add_argument("--epsilon", type=_positive_eps, required=True)
    cv.add_argument("--trials", type=int, default=1000)
    cv.add_argument("--beta", type=float, default=None)
    co.set_defaults(func=cmd_coreset)

    n = sub.add_parser("nets", help="sphere nets")
    nsub = n.add_subparsers(dest="action", required=True, parser_class=Parser)
    nb = nsub.add_parser("build", parents=[common], help="build and certify a net")
    nb.add_argument("--d", type=int, required=True)
    nb.add_argument("--epsilon", type=_positive_eps, required=True)
    nb.add_argument("--pool", type=int, default=None)
    nb.add_argument("--probes", type=int, default=10**5)
    n.set_defaults(func=cmd_nets)

    m = sub.add_parser("metric", help="finite-metric covers")
    msub = m.add_subparsers(dest="action", required=True, parser_class=Parser)
    mc = msub.add_parser("cover", parents=[common, metric], help="greedy r-cover")
    mc.add_argument("--r", type=float, required=True)
    md = msub.add_parser("doubling", parents=[common, metric], help="doubling dimension estimate")
    md.add_argument("--balls", type=int, default=64)
    mg = msub.add_parser("gamma", parents=[common, metric], help="covering number estimate")
    mg.add_argument("--epsilon", type=_positive_eps, required=True)
    mg.add_argument("--balls", type=int, default=64)
    m.set_defaults(func=cmd_metric)

    e = sub.add_parser("estimate-l", parents=[common, data, oracle], help="least m with Delta_m <= eps Delta_k")
    e.add_argument("--k", type=int, required=True)
    e.add_argument("--epsilon", type=_positive_eps, required=True)
    e.set_defaults(func=cmd_estimate_l)

    dc = sub.add_parser("decay-curve", parents=[common, data, oracle], help="cost versus number of centers")
    dc.add_argument("--m-max", type=int, default=None)
    dc.add_argument("--source", choices=["oracle", "seeding"], default="oracle")
    dc.set_defaults(func=cmd_decay_curve)
    return p


def _command_path(args) -> str:
    parts = [args.command]
    for attr in ("family_cmd", "shape", "action"):
        if getattr(args, attr, None):
            parts.append(getattr(args, attr))
    return " ".join(parts)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.seed is None:
            args.seed = default_seed()
        args.command_path = _command_path(args)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
