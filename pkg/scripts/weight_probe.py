"""Level-2k Fourier mass of extended random protocols against (e/k)^{2k} c^{2k}.

    python scripts/weight_probe.py --count 40
"""
import argparse
import math
import sys

from forrlab import fourier, protocols
from forrlab.report import ExperimentReport, emit
from forrlab.rng import stream


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--count", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out")
    args = ap.parse_args(argv)

    rng = stream(args.seed)
    reports = []
    for i in range(args.count):
        k = 1 if i % 2 == 0 else 2
        l = math.ceil(2 * k * math.log2(math.e))
        M = int(rng.integers(3, 11 - l))
        C = protocols.random_protocol(M, int(rng.integers(1, 7)), rng)
        E = protocols.extend_protocol(C, l)
        mass = fourier.level_mass(protocols.lift_fourier_from_rectangles(E), 2 * k)
        bound = fourier.lift_weight_bound(k, E.cost)
        reports.append(ExperimentReport(
            "weight-probe", {"k": k, "arity": E.arity, "base_cost": C.cost, "l": l}, mass, 0.0, 2 ** E.arity,
            args.seed, extra={"cost": E.cost, "min_cost": E.min_cost, "bound_shape": bound, "ratio": mass / bound}))
    print(f"largest ratio {max(r.extra['ratio'] for r in reports):.3e}", file=sys.stderr)
    text = emit(reports, "csv")
    if args.out:
        open(args.out, "w").write(text)
    else:
        sys.stdout.write(text)


if __name__ == "__main__":
    main()
