"""Acceptance criteria 1-12, each at its stated tolerance.

Every test prints one PASS/FAIL line; the lines are repeated in a summary
section at the end of the pytest run.
"""
import itertools
import math
import subprocess
import sys
import time

import numpy as np

from forrlab import dist, fourier, identities, moments, protocols, quantum, trees
from forrlab.params import ForrelationParams
from forrlab.rng import stream
from forrlab.wht import fwht, mod2_inner, naive_hadamard_apply


def test_01_wht_oracle(acceptance):
    started = time.perf_counter()
    rng = stream(1001)
    worst = 0.0
    for n in range(1, 11):
        v = rng.normal(size=(20, 2 ** n))
        worst = max(worst, float(np.abs(fwht(v) - naive_hadamard_apply(v)).max()))
    big = rng.normal(size=2 ** 20)
    inv = float(np.abs(fwht(fwht(big)) - big).max())
    elapsed = time.perf_counter() - started
    acceptance(1, "WHT oracle equivalence", worst < 1e-10 and inv < 1e-10 and elapsed < 5,
               f"oracle dev {worst:.2e}, involution dev at 2^20 {inv:.2e}, {elapsed:.2f}s")


def test_02_moment_oracle(acceptance):
    eps = 0.2
    first_dev = 0.0
    nonzero_bad = 0
    bound_bad = 0
    for N in (2, 4, 8):
        p = ForrelationParams(N, 1, eps)
        for i, j in itertools.product(range(N), repeat=2):
            want = eps * (-1) ** mod2_inner(i, j) / math.sqrt(N)
            first_dev = max(first_dev, abs(moments.gaussian_moment_exact([i], [j], p) - want))
        for size in range(7):
            for I in itertools.combinations(range(2 * N), size):
                S, T = moments.split_copy_index(I, N)
                if len(S) != len(T) or size % 2:
                    nonzero_bad += moments.gaussian_moment_exact(S, T, p) != 0.0
        for S in itertools.combinations(range(N), 2):
            for T in itertools.combinations(range(N), 2):
                bound_bad += abs(moments.gaussian_moment_exact(S, T, p)) > eps ** 2 * 2 / N + 1e-15

    # Monte Carlo: 10^6 draws at N=16, 20 random indices
    p = ForrelationParams(16, 1, eps)
    rng = stream(1002)
    indices = []
    for t in range(20):
        half = 1 if t < 10 else 2
        S = rng.choice(16, half, replace=False)
        T = rng.choice(16, half, replace=False)
        indices.append((sorted(S.tolist()), sorted(T.tolist())))
    n = 10 ** 6
    sums = np.zeros(20)
    sq = np.zeros(20)
    for _ in range(10):
        z = dist.sample_gaussian_forrelation(p, rng, n // 10)
        for t, (S, T) in enumerate(indices):
            vals = np.prod(z[:, S + [16 + j for j in T]], axis=1)
            sums[t] += vals.sum()
            sq[t] += (vals ** 2).sum()
    means = sums / n
    se = np.sqrt((sq / n - means ** 2) / n)
    exact = np.array([moments.gaussian_moment_exact(S, T, p) for S, T in indices])
    z_scores = np.abs(means - exact) / se
    ok = first_dev < 1e-15 and nonzero_bad == 0 and bound_bad == 0 and np.all(z_scores <= 3)
    acceptance(2, "Gaussian moment oracle", ok,
               f"first-moment dev {first_dev:.1e}, nonzero-where-zero {nonzero_bad}, bound violations {bound_bad}, "
               f"MC max |z| {z_scores.max():.2f} over 20 indices")


def test_03_moment_differences(acceptance):
    p = ForrelationParams(2, 2, 0.2)
    L = p.copy_length
    zero_bad = bound_bad = checked = 0
    for size in range(7):
        for I in itertools.combinations(range(p.length), size):
            parts = [[c - j * L for c in I if j * L <= c < (j + 1) * L] for j in range(p.k)]
            d = moments.mu_moment_difference(parts, p)
            checked += 1
            if size < 2 * p.k or any(not q for q in parts) or any(len(q) % 2 for q in parts):
                zero_bad += d != 0.0
            if size % 2 == 0:
                bound_bad += abs(d) > moments.moment_difference_bound(size, p) + 1e-15
    acceptance(3, "moment-difference suite", zero_bad == 0 and bound_bad == 0,
               f"{checked} index tuples, {zero_bad} nonzero where zero required, {bound_bad} bound violations")


def test_04_telescoping(acceptance):
    started = time.perf_counter()
    mismatches = 0
    for k in (1, 2, 3):
        for T in (1, 2, 3, 4):
            for b in itertools.product(range(T + 1), repeat=k):
                mismatches += identities.telescoping_coefficient(b, T) != identities.corner_product(b, T)
    rng = stream(1004)
    worst = 0.0
    for k, T in ((2, 3), (3, 4)):
        for _ in range(100):
            worst = max(worst, identities.check_telescoping_pathwise(rng.normal(size=(T + 1,) * k)).deviation)
    elapsed = time.perf_counter() - started
    acceptance(4, "k-dimensional telescoping", mismatches == 0 and worst < 1e-12 and elapsed < 1,
               f"{mismatches} coefficient mismatches, pathwise dev {worst:.1e}, {elapsed:.3f}s")


def test_05_rounding_law(acceptance):
    rng = stream(1005)
    failures = 0
    worst = 0.0
    for _ in range(50):
        H = identities.random_low_degree(8, int(rng.integers(1, 9)), rng)
        z = rng.uniform(-2, 2, size=8)
        r = identities.check_rounding_law(H, z, 10 ** 6, rng, n_sigma=4.0)
        failures += not r.passed
        worst = max(worst, abs(r.estimate - r.extra["exact"]) / r.stderr)
    acceptance(5, "rounding law", failures == 0, f"50 cases at M=8, 10^6 roundings each, max |z| {worst:.2f}")


def test_06_quantum_success(acceptance):
    p = ForrelationParams(2 ** 12, 2, 0.2)
    plan = quantum.make_plan(p)
    r = quantum.quantum_success(p, 1000, stream(1006), plan)
    rej = r.extra["rejection_rate"]
    acceptance(6, "quantum success", r.estimate >= 0.85 and rej <= 0.05,
               f"success {r.estimate:.3f} over 1000 instances (r={plan.repetitions}), sigma rejection {rej:.4f}")


def test_07_correlation_scaling(acceptance):
    Ns = [2 ** 4, 2 ** 6, 2 ** 8, 2 ** 10]
    advs = []
    for t, N in enumerate(Ns):
        r = trees.correlation_advantage(ForrelationParams(N, 1, 0.2), [(1, 1)], 10 ** 7, stream(1007, t))
        advs.append(r.estimate)
    slope = float(np.polyfit(np.log(Ns), np.log(advs), 1)[0])
    k1 = advs[0]
    k2 = trees.correlation_advantage(ForrelationParams(16, 2, 0.2), [(1, 1), (1, 1)], 10 ** 8, stream(1007, 9))
    ratio = k2.estimate / k1 ** 2
    ok = abs(slope + 0.5) <= 0.1 and 0.5 <= ratio <= 2
    acceptance(7, "correlation tester scaling", ok,
               f"advantages {', '.join(f'{a:.5f}' for a in advs)}; slope {slope:.3f}; "
               f"k=2 advantage {k2.estimate:.2e} vs squared k=1 {k1 ** 2:.2e} (ratio {ratio:.2f})")


def test_08_exhaustive_trees(acceptance):
    p = ForrelationParams(4, 1, 0.2)
    a = trees.tree_advantage_scan(p, 2, "exhaustive", 20_000, 1008)
    b = trees.tree_advantage_scan(p, 2, "exhaustive", 20_000, 1008)
    deeper = trees.tree_advantage_scan(p, 3, "exhaustive", 20_000, 1008)
    ok = (math.isfinite(a.estimate) and a.estimate == b.estimate and a.extra["tree"] == b.extra["tree"]
          and a.extra["trees_in_class"] == 9250 and a.estimate < deeper.estimate)
    acceptance(8, "exhaustive depth-2 trees", ok,
               f"depth-2 max {a.estimate:.4f} over {a.extra['trees_in_class']} trees ({p.length} input bits), "
               f"repeat identical {a.estimate == b.estimate}, depth-3 max {deeper.estimate:.4f}")


def test_09_restriction_identity(acceptance):
    rng = stream(1009)
    worst = 0.0
    for _ in range(20):
        C = protocols.random_protocol(6, 6, rng)
        v = protocols.random_restriction(6, rng)
        H = protocols.junk_averaged_lift(C, 1)
        lhs = protocols.junk_averaged_lift(protocols.restrict_xor_protocol(C, v), 1)
        rhs = H[protocols.restrict_index(np.arange(2 ** 6), v)]
        worst = max(worst, float(np.abs(lhs - rhs).max()))
    acceptance(9, "restricted-protocol identity", worst < 1e-12,
               f"20 restrictions at M=6, l=1, all z: max dev {worst:.1e}")


def _random_indicator(rng):
    while True:
        M = int(rng.integers(2, 11))
        alpha = math.exp(rng.uniform(math.log(2.0 ** -M), math.log(0.5)))
        A = rng.random(2 ** M) < alpha
        if A.any() and not A.all():
            a = A.mean()
            k_max = int(2 * math.log(1 / a))
            if k_max >= 1:
                return A, int(rng.integers(1, min(k_max, M) + 1))


def test_10_weight_probes(acceptance):
    rng = stream(1010)
    ratios = []
    # (k, base arity, base cost); the extension adds l junk bits, keeping arity <= 10
    specs = [(1, M, c) for M in (4, 5, 6) for c in (2, 4, 6, 8)]
    specs += [(2, 3, c) for c in (2, 4, 6)] + [(2, 4, c) for c in (1, 2, 3, 4, 4)]
    min_cost_ok = True
    for k, M, c in specs:
        l = math.ceil(2 * k * math.log2(math.e))
        E = protocols.extend_protocol(protocols.random_protocol(M, c, rng), l)
        min_cost_ok &= E.min_cost >= l and E.arity <= 10
        mass = fourier.level_mass(protocols.lift_fourier_from_rectangles(E), 2 * k)
        ratios.append(mass / fourier.lift_weight_bound(k, E.cost))
    constant = max(ratios)
    level_fail = 0
    for _ in range(200):
        A, k = _random_indicator(rng)
        r = fourier.check_level_k_inequality(A, k)
        level_fail += not (r.applicable and r.passed)
    ok = len(specs) == 20 and min_cost_ok and constant <= 4 and level_fail == 0
    acceptance(10, "weight-bound probes", ok,
               f"measured constant {constant:.2e} over 20 extended protocols; level-k failures {level_fail}/200")


def test_11_concentration(acceptance):
    p = ForrelationParams(2 ** 12, 1, 0.2)
    conc = identities.check_gaussian_concentration(p, 10 ** 5, stream(1011, 0))
    stab = identities.check_rounding_stability(p, 10 ** 4, stream(1011, 1))
    ok = conc.extra["low_tail_count"] == 0 and stab.estimate <= 0.01
    acceptance(11, "concentration", ok,
               f"{conc.extra['low_tail_count']} of 10^5 below 3eps/4 (min forr {conc.extra['min_forr']:.4f}); "
               f"stability violation fraction {stab.estimate:.4f}")


def _cli(*args, cwd=None):
    return subprocess.run([sys.executable, "-m", "forrlab.cli", *args], capture_output=True, cwd=cwd, check=False)


def test_12_cli_reproducibility(acceptance, tmp_path):
    cfg = tmp_path / "exp.ini"
    cfg.write_text("[forrlab]\nN = 64\nk = 2\ntrials = 200\nseed = 77\nworkers = 2\n")
    runs = [
        ("verify", "--seed", "5", "--workers", "3"),
        ("quantum-success", "--config", str(cfg)),
        ("tree-advantage", "--N", "4", "--depth", "2", "--samples", "3000", "--seed", "4", "--format", "csv"),
        ("estimate-moments", "--N", "8", "--index", "1 9", "--samples", "300000", "--workers", "2"),
        ("lift-eval", "--arity", "5", "--cost", "5", "--extend", "1", "--seed", "8"),
        ("fourier-mass", "--arity", "6", "--cost", "6", "--seed", "8", "--format", "csv"),
        ("sample", "--N", "16", "--k", "2", "--count", "20", "--seed", "3", "--instances", "inst.frrl"),
        ("label", "--instances", "inst.frrl"),
    ]
    identical = 0
    for args in runs:
        outs = []
        for rep in range(2):
            d = tmp_path / f"rep{rep}"
            d.mkdir(exist_ok=True)
            res = _cli(*args, cwd=d)
            extra = (d / "inst.frrl").read_bytes() if (d / "inst.frrl").exists() else b""
            outs.append((res.returncode, res.stdout, extra))
        identical += outs[0] == outs[1] and outs[0][0] == 0 and bool(outs[0][1])
    acceptance(12, "CLI reproducibility", identical == len(runs),
               f"{identical}/{len(runs)} subcommand runs byte-identical across two invocations")
