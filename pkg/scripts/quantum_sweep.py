"""Success rate and query count of the amplified quantum test over (N, k).

    python scripts/quantum_sweep.py --log2-n 8 10 12 --k 1 2 3 --trials 1000
"""
import argparse
import sys

from forrlab.params import ForrelationParams
from forrlab.quantum import quantum_success
from forrlab.report import emit
from forrlab.rng import stream


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--log2-n", type=int, nargs="+", default=[8, 10, 12])
    ap.add_argument("--k", type=int, nargs="+", default=[1, 2, 3])
    ap.add_argument("--eps", type=float, default=0.2)
    ap.add_argument("--trials", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out")
    args = ap.parse_args(argv)

    reports = []
    for i, n in enumerate(args.log2_n):
        for j, k in enumerate(args.k):
            p = ForrelationParams(2 ** n, k, args.eps)
            reports.append(quantum_success(p, args.trials, stream(args.seed, i, j), seed=args.seed))
    text = emit(reports, "csv")
    if args.out:
        open(args.out, "w").write(text)
    else:
        sys.stdout.write(text)


if __name__ == "__main__":
    main()
