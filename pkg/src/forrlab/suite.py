"""The ``verify`` identity suite: each check returns a report with a pass flag.

Checks are independent tasks; check ``i`` draws from stream ``(seed, i)``.
"""
from __future__ import annotations

import itertools
import math

import numpy as np

from forrlab import fourier, identities, moments, protocols, wht
from forrlab.params import ForrelationParams
from forrlab.report import ExperimentReport


def _report(name, value, passed, n=0, **extra):
    return ExperimentReport(name, {}, float(value), 0.0, n, passed=bool(passed), extra=extra)


def check_wht(rng):
    worst = 0.0
    for n in range(1, 11):
        v = rng.normal(size=(4, 2 ** n))
        worst = max(worst, float(np.abs(wht.fwht(v) - wht.naive_hadamard_apply(v)).max()))
    big = rng.normal(size=2 ** 20)
    inv = float(np.abs(wht.fwht(wht.fwht(big)) - big).max())
    return _report("wht-oracle", max(worst, inv), worst < 1e-10 and inv < 1e-10, oracle_dev=worst, involution_dev=inv)


def check_gaussian_moments(rng):
    worst = 0.0
    ok = True
    for N in (2, 4, 8):
        p = ForrelationParams(N, 1, 0.1)
        for i in range(N):
            for j in range(N):
                want = p.eps * (-1) ** wht.mod2_inner(i, j) / math.sqrt(N)
                worst = max(worst, abs(moments.gaussian_moment_exact([i], [j], p) - want))
        for S in itertools.combinations(range(N), 2):
            for T in itertools.combinations(range(N), 2):
                ok &= abs(moments.gaussian_moment_exact(S, T, p)) <= moments.gaussian_moment_bound(2, p) + 1e-15
    return _report("gaussian-moments", worst, ok and worst < 1e-15)


def check_moment_differences(rng):
    p = ForrelationParams(2, 2, 0.1)
    L = p.copy_length
    ok = True
    for size in range(0, 7):
        for I in itertools.combinations(range(p.length), size):
            parts = [[c - j * L for c in I if j * L <= c < (j + 1) * L] for j in range(p.k)]
            d = moments.mu_moment_difference(parts, p)
            if size < 2 * p.k or any(not q for q in parts) or any(len(q) % 2 for q in parts):
                ok &= d == 0.0
            if size % 2 == 0:
                ok &= abs(d) <= moments.moment_difference_bound(size, p) + 1e-15
    return _report("moment-differences", 0.0, ok)


def check_telescoping(rng):
    ok = True
    for k in (1, 2, 3):
        for T in (1, 2, 3, 4):
            for b in itertools.product(range(T + 1), repeat=k):
                ok &= identities.telescoping_coefficient(b, T) == identities.corner_product(b, T)
    worst = 0.0
    for k, T in ((2, 3), (3, 4)):
        for _ in range(100):
            r = identities.check_telescoping_pathwise(rng.normal(size=(T + 1,) * k))
            worst = max(worst, r.deviation)
    return _report("telescoping", worst, ok and worst < 1e-12)


def check_walk_telescoping(rng):
    p = ForrelationParams(2, 2, 0.2)
    H = identities.random_low_degree(p.length, 4, rng)
    grid = identities.WalkGrid(p, 3, rng)
    r = identities.check_telescoping_pathwise(identities.walk_values(grid, H))
    return _report("walk-telescoping", r.deviation, r.deviation < 1e-12)


def check_rounding(rng):
    worst = 0.0
    ok = True
    for _ in range(5):
        H = identities.random_low_degree(8, 3, rng)
        z = rng.uniform(-2, 2, size=8)
        r = identities.check_rounding_law(H, z, 200_000, rng)
        ok &= bool(r.passed)
        worst = max(worst, abs(r.estimate - r.extra["exact"]) / max(r.stderr, 1e-300))
    return _report("rounding-law", worst, ok, max_sigma=worst)


def check_convolution(rng):
    worst = 0.0
    for _ in range(5):
        f, g = rng.choice([-1.0, 1.0], size=(2, 2 ** 8))
        worst = max(worst, fourier.check_convolution(f, g).value)
    return _report("convolution", worst, worst < 1e-10)


def check_level_k(rng):
    ok = True
    tested = 0
    for _ in range(50):
        M = int(rng.integers(2, 9))
        A = rng.random(2 ** M) < rng.uniform(0.01, 0.5)
        if not A.any() or A.all():
            continue
        for k in range(1, M + 1):
            r = fourier.check_level_k_inequality(A, k)
            if r.applicable:
                ok &= bool(r.passed)
                tested += 1
    return _report("level-k-inequality", tested, ok, cases=tested)


def check_restriction(rng):
    worst = 0.0
    for _ in range(5):
        C = protocols.random_protocol(5, 5, rng)
        H = protocols.junk_averaged_lift(C, 1)
        v = protocols.random_restriction(5, rng)
        lhs = protocols.junk_averaged_lift(protocols.restrict_xor_protocol(C, v), 1)
        rhs = H[protocols.restrict_index(np.arange(2 ** 5), v)]
        worst = max(worst, float(np.abs(lhs - rhs).max()))
    return _report("restriction-closure", worst, worst < 1e-12)


def check_lift_fourier(rng):
    worst = 0.0
    for _ in range(5):
        C = protocols.random_protocol(6, 6, rng)
        direct = fourier.brute_fourier(protocols.xor_lift_table(C)).coeffs
        via_rect = protocols.lift_fourier_from_rectangles(C).coeffs
        ext = fourier.brute_fourier(protocols.xor_lift_table(protocols.extend_protocol(C, 2))).coeffs
        worst = max(worst, float(np.abs(direct - via_rect).max()), float(np.abs(ext[:64] - direct).max()),
                    float(np.abs(ext[64:]).max()))
    return _report("lift-fourier", worst, worst < 1e-12)


def check_concentration(rng, n_samples=10_000):
    p = ForrelationParams(2 ** 12, 1, 0.2)
    r = identities.check_gaussian_concentration(p, n_samples, rng)
    return r


def check_stability(rng, n_samples=2000):
    p = ForrelationParams(2 ** 12, 1, 0.2)
    return identities.check_rounding_stability(p, n_samples, rng)


CHECKS = [
    check_wht, check_gaussian_moments, check_moment_differences, check_telescoping, check_walk_telescoping,
    check_rounding, check_convolution, check_level_k, check_restriction, check_lift_fourier,
    check_concentration, check_stability,
]
