"""Acceptance criteria, each run at its stated tolerance and time budget."""
import math
import time

import numpy as np
import pytest
from scipy.sparse.csgraph import shortest_path
from scipy.spatial.distance import cdist

from acceptance_log import record
from kcost.constructions import build_1d_upper, build_fan_coreset, build_metric_annuli, fan_net_scale
from kcost.coreset import validate_coreset, weigh
from kcost.cost import cost
from kcost.generators import gen_heavy_light, gen_lower_1d, gen_random
from kcost.geometry import FiniteMetric, validate_metric
from kcost.metricspace import embed_lower_bound
from kcost.nets import build_net, verify_cover, verify_packing
from kcost.sampling import d2_sample, overseed_experiment
from kcost.solvers import delta_curve, enumerate_exact, estimate_L, exact_1d, lloyd_multistart

pytestmark = pytest.mark.acceptance
TOL = 1e-9


def _dataset_1d(i, n, rng):
    family = i % 5
    if family == 0:
        return rng.uniform(-10, 10, n)
    if family == 1:
        return rng.normal(3, 2, n)
    if family == 2:
        return np.concatenate([rng.normal(-50, 1, n // 2), rng.normal(40, 5, n - n // 2)])
    if family == 3:
        return rng.lognormal(0, 2, n)          # heavy tail, one side of 0
    return rng.integers(-5, 6, n).astype(float)  # many repeats


def test_criterion_1_upper_1d():
    t0 = time.perf_counter()
    rng = np.random.default_rng(1)
    worst, size_ok, checks = 0.0, True, 0
    for i in range(100):
        n = (100, 1000, 10000)[i % 3]
        x = _dataset_1d(i, n, rng)
        base = math.fsum(x * x)
        for eps in (1.0, 0.5, 0.25, 0.1):
            S = build_1d_upper(x, eps)
            got = cost(S[:, None], x[:, None])
            worst = max(worst, got / (eps * base))
            bound = 2 * (math.floor(math.sqrt(2 / eps)) + 1) + 2 * (math.ceil(math.log(n) / math.log(1 + math.sqrt(eps / 2))) + 1)
            size_ok &= S.size <= bound
            checks += 1
    ok = worst <= 1 + TOL and size_ok
    assert record(1, "1-D upper bound", ok, time.perf_counter() - t0, 10,
                  f"{checks} cases, worst cost/(eps*base)={worst:.4f}, sizes within bound={size_ok}")


def test_criterion_2_lower_1d():
    t0 = time.perf_counter()
    ok, notes = True, []
    for eps in (1 / 32, 1 / 16):
        for t in (1, 2, 3):
            X, spec = gen_lower_1d(eps, t)
            d1 = exact_1d(X, 1).value
            curve = [exact_1d(X, m).value for m in range(1, min(2 * t, X.shape[0]) + 1)]
            least = next(m for m, v in enumerate(curve, start=1) if v <= eps * d1)
            ok &= d1 == spec.reference_cost and curve[t - 1] > eps * d1 and least > t
            notes.append(f"(1/{round(1 / eps)},t={t}):L={least}")
    X, _ = gen_lower_1d(1 / 32, 2)
    d1 = exact_1d(X, 1).value
    least = next(m for m in range(1, 11) if exact_1d(X, m).value <= d1 / 32)
    ok &= d1 == 64 and least == 4
    assert record(2, "1-D lower bound", ok, time.perf_counter() - t0, 5,
                  f"{' '.join(notes)}; example Delta_1={d1:g}, least m={least}")


def _fan_instances(count, seed, n_max):
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        d = (2, 3)[i % 2]
        k = (1, 3)[(i // 2) % 2]
        n = int(rng.integers(50, n_max + 1))
        family = ("gaussian-mixture", "separated-clusters", "uniform-box")[i % 3]
        X, _ = gen_random(family, n=n, d=d, k=3, sigma=1.0, box=10.0, separation=10.0, rng_seed=seed + i)
        out.append((X, k))
    return out


def test_criterion_3_fan():
    t0 = time.perf_counter()
    nets = {}
    worst_ratio, worst_snap, cover_ok, runs = 0.0, 0.0, True, 0
    for idx, (X, k) in enumerate(_fan_instances(20, 300, 500)):
        sol = lloyd_multistart(X, k, restarts=3, rng_seed=idx)
        for eps in (0.5, 0.25):
            key = (X.shape[1], eps)
            if key not in nets:
                net = build_net(X.shape[1], fan_net_scale(eps, 2))
                check = verify_cover(net, 10 ** 5)
                cover_ok &= check.passed and (check.method != "probe" or check.probes == 10 ** 5)
                nets[key] = net
            fan = build_fan_coreset(X, sol.centers, sol.labels, eps, net=nets[key])
            worst_ratio = max(worst_ratio, fan.cost / (eps * fan.baseline))
            worst_snap = max(worst_snap, float(fan.snap_ratio.max()) / math.sqrt(eps / 2))
            runs += 1
    ok = worst_ratio <= 1 + TOL and worst_snap <= 1 + TOL and cover_ok
    assert record(3, "fan construction", ok, time.perf_counter() - t0, 60,
                  f"{runs} runs, worst cost/(eps*base)={worst_ratio:.4f}, "
                  f"worst snap/sqrt(eps/2)={worst_snap:.4f}, nets cover={cover_ok}")


def test_criterion_4_coreset_pipeline():
    t0 = time.perf_counter()
    nets = {}
    worst, all_pass, validations = 0.0, True, 0
    rng = np.random.default_rng(44)
    for i in range(10):
        d = (2, 3)[i % 2]
        k = (2, 3)[(i // 2) % 2]
        family = ("gaussian-mixture", "separated-clusters", "uniform-box")[i % 3]
        X, _ = gen_random(family, n=int(rng.integers(100, 301)), d=d, k=3, sigma=1.0, box=10.0,
                          separation=8.0, rng_seed=400 + i)
        sol = lloyd_multistart(X, k, restarts=3, rng_seed=i)
        for eps in (0.5, 0.25):
            inner = eps * eps / 32
            key = (d, inner)
            if key not in nets:
                nets[key] = build_net(d, fan_net_scale(inner, 2))
            fan = build_fan_coreset(X, sol.centers, sol.labels, inner, net=nets[key])
            cert = validate_coreset(X, weigh(fan.points, X), k, eps, trials=1000, rng_seed=i)
            all_pass &= cert.passed and cert.trials >= 1000
            worst = max(worst, cert.worst_relative_error / eps)
            validations += 1
    assert record(4, "coreset pipeline", all_pass, time.perf_counter() - t0, 120,
                  f"{validations} validations x 1000 candidates, worst error/eps={worst:.4f}")


def test_criterion_5_nets():
    t0 = time.perf_counter()
    cases = [(d, e) for d in (1, 2, 3) for e in (0.5, 0.25)] + [(d, e) for d in (4, 5) for e in (0.9, 0.5)]
    cases += [(2, 0.05), (2, 0.1)]
    ok, notes = True, []
    for d, eps in cases:
        net = build_net(d, eps)
        packing = verify_packing(net).min_pairwise >= eps
        cover = verify_cover(net, 10 ** 5)
        size_ok = len(net) <= (1 + 2 / eps) ** d
        if d == 2:
            size_ok &= len(net) >= 1 / (4 * eps)
        ok &= packing and cover.passed and size_ok
        notes.append(f"d{d}/{eps:g}:{len(net)}")
    assert record(5, "sphere nets", ok, time.perf_counter() - t0, 30, " ".join(notes))


def _overseed_corpus():
    corpus = [gen_heavy_light(2, 4, [1, 10], rng_seed=1)[0],
              gen_heavy_light(3, 3, [1, 1, 10], rng_seed=2)[0],
              gen_heavy_light(4, 2, [1, 1, 2, 10], rng_seed=3)[0]]
    for k, n in ((2, 10), (3, 12), (4, 12)):
        corpus.append(gen_random("separated-clusters", n=n, d=2, k=k, sigma=0.0, rng_seed=k)[0])
    return corpus


def test_criterion_6_sampling():
    t0 = time.perf_counter()
    X = np.array([0.0, 1.0, 3.0])
    rng = np.random.default_rng(6)
    picks = np.array([d2_sample(X, 2, 2, rng, first=0).chosen[1] for _ in range(10 ** 5)])
    freq = np.bincount(picks, minlength=3) / picks.size
    dist_ok = freq[0] == 0 and abs(freq[1] - 0.1) <= 0.01 and abs(freq[2] - 0.9) <= 0.01
    rates = []
    ks = (2, 3, 4, 2, 3, 4)
    for i, (Y, k) in enumerate(zip(_overseed_corpus(), ks)):
        rep = overseed_experiment(Y, k, 0.5, 1.0, trials=50, rng_seed=60 + i, oracle="enumerate")
        assert rep.exact_oracle
        rates.append(rep.success_rate)
    ok = dist_ok and min(rates) >= 0.9
    assert record(6, "D^2 sampling + over-seeding", ok, time.perf_counter() - t0, 60,
                  f"freq={freq[1]:.4f}/{freq[2]:.4f}, rates={[round(r, 2) for r in rates]}")


def _symmetric(D):
    # path sums can differ in the last bit between the two directions
    return FiniteMetric(np.minimum(D, D.T))


def _graph_metric(n, rng, extra):
    G = np.full((n, n), np.inf)
    np.fill_diagonal(G, 0.0)
    for i in range(1, n):  # random tree keeps it connected
        j = int(rng.integers(i))
        G[i, j] = G[j, i] = rng.uniform(0.5, 5)
    for _ in range(extra):
        i, j = rng.integers(n, size=2)
        if i != j:
            G[i, j] = G[j, i] = min(G[i, j], rng.uniform(0.5, 20))
    return _symmetric(shortest_path(G, directed=False))


def _star_metric(m, leaves, a):
    n = 1 + m + 1 + leaves + 1
    c = n - 1
    G = np.full((n, n), np.inf)
    np.fill_diagonal(G, 0.0)

    def edge(i, j, w):
        G[i, j] = G[j, i] = min(G[i, j], w)
    edge(0, c, a)
    for i in range(1, m + 1):
        edge(i, c, 1e-3)
        edge(i, 0, a)
    p = m + 1
    edge(p, c, 3.0)
    for leaf in range(p + 1, p + 1 + leaves):
        edge(leaf, p, 1.0)
        edge(leaf, c, 3.5)
    return _symmetric(shortest_path(G, directed=False)), c


def _metric_corpus():
    rng = np.random.default_rng(7)
    out = []
    for i in range(8):
        family = ("uniform-box", "gaussian-mixture", "separated-clusters")[i % 3]
        P, _ = gen_random(family, n=int(rng.integers(20, 80)), d=1 + i % 4, k=3, rng_seed=70 + i)
        out.append((FiniteMetric.from_points(P), [0, 1]))
    U = np.ones((12, 12))
    np.fill_diagonal(U, 0.0)
    out.append((FiniteMetric(U), [0]))
    out.append((FiniteMetric.from_points(np.arange(32.0)[:, None]), [0, 16, 31]))
    out.append((FiniteMetric.from_points(np.exp2(np.arange(12.0))[:, None]), [0, 11]))
    lattice = np.array([(a, b) for a in range(6) for b in range(6)], dtype=float)
    out.append((FiniteMetric(cdist(lattice, lattice, "cityblock")), [0, 14]))
    for i in range(4):
        out.append((_graph_metric(int(rng.integers(15, 60)), rng, extra=i * 10), [0, 3]))
    for m, leaves, a in ((5, 20, 0.5), (50, 5, 1.0)):
        M, c = _star_metric(m, leaves, a)
        out.append((M, [c, 0]))
    M, _, _ = embed_lower_bound(1 / 32, 2, 2, 2)
    out.append((M, [M.n - 1, 0]))
    P, _ = gen_heavy_light(3, 5, [1, 2, 3], rng_seed=8)
    out.append((FiniteMetric.from_points(P + 1e-3 * rng.standard_normal(P.shape)), [0, 6]))
    return out


def test_criterion_7_metric_annuli():
    t0 = time.perf_counter()
    corpus = _metric_corpus()
    assert len(corpus) == 20
    worst, reps_ok, runs = 0.0, True, 0
    for M, centers in corpus:
        assert validate_metric(M) is None
        for eps in (1.0, 0.5):
            for c in centers:
                res = build_metric_annuli(M, c, eps)
                worst = max(worst, res.cost / (eps * res.base_cost) if res.base_cost else 0.0)
                reps_ok &= all(res.rep_distance[y] <= res.radii[j] for y, j in res.annulus_of.items())
                reps_ok &= len(res.annulus_of) == M.n
                runs += 1
    ok = worst <= 1 + TOL and reps_ok
    assert record(7, "metric annuli", ok, time.perf_counter() - t0, 10,
                  f"{len(corpus)} metrics, {runs} runs, worst cost/(eps*base)={worst:.4f}, "
                  f"rep distances within radius={reps_ok}")


def test_criterion_8_oracles_agree():
    t0 = time.perf_counter()
    rng = np.random.default_rng(8)
    mismatches, comparisons = 0, 0
    for i in range(200):
        n = int(rng.integers(1, 11))
        if i % 2:
            X = rng.integers(-20, 21, size=(n, 1)).astype(float)
        else:
            X = rng.normal(0, 5, size=(n, 1))
        for k in range(1, n + 1):
            comparisons += 1
            mismatches += exact_1d(X, k).value != enumerate_exact(X, k).value
    assert record(8, "oracle cross-validation", mismatches == 0, time.perf_counter() - t0, 10,
                  f"{comparisons} comparisons, {mismatches} mismatches")


def test_criterion_9_monotonicity():
    t0 = time.perf_counter()
    rng = np.random.default_rng(9)
    corpus = [gen_lower_1d(1 / 32, 2)[0], gen_lower_1d(1 / 16, 3)[0]]
    corpus += [rng.normal(0, 3, size=(int(rng.integers(3, 13)), 1)) for _ in range(8)]
    corpus += [gen_random("gaussian-mixture", n=int(rng.integers(4, 11)), d=2, k=2, rng_seed=90 + i)[0]
               for i in range(6)]
    corpus += [gen_heavy_light(2, 4, [1, 10], rng_seed=3)[0]]
    failures = []
    for i, X in enumerate(corpus):
        oracle = "dp1d" if X.shape[1] == 1 else "enumerate"
        for kind in (2, 1):
            curve = delta_curve(X, X.shape[0], kind, oracle)
            if not curve.exact or any(b > a for a, b in zip(curve.values, curve.values[1:])):
                failures.append(f"delta#{i}/{kind}")
        for k in range(1, min(4, X.shape[0]) + 1):
            Ls = [estimate_L(X, k, eps, oracle=oracle).L_hat for eps in (1.0, 0.5, 0.25, 0.1, 0.05, 0.01)]
            if Ls[0] != k:
                failures.append(f"L1#{i}/k{k}")
            if any(b < a for a, b in zip(Ls, Ls[1:])):
                failures.append(f"L#{i}/k{k}")
        for seed in range(5):
            trace = d2_sample(X, X.shape[0], 2, seed)
            if any(b > a for a, b in zip(trace.cost_after, trace.cost_after[1:])):
                failures.append(f"seed#{i}/{seed}")
    assert record(9, "monotonicity", not failures, time.perf_counter() - t0, None,
                  f"{len(corpus)} datasets, failures={failures[:5]}")
