"""Compare the compiled string kernels with the pure-Python fallback.

    python benchmarks/bench_kernels.py [--pairs 20000] [--repeat 3]

Prints per-call timings for short identifiers and long storage paths, and
the time to score the shipped mini-corpus with each kernel set.
"""
import argparse
import random
import string
import timeit

from slice_eval import _kernels_py

try:
    from slice_eval import _kernels
except ImportError:  # extension not built
    _kernels = None


def make_pairs(n, lo, hi, seed):
    rng = random.Random(seed)
    alphabet = string.ascii_lowercase + "._/"
    return [("".join(rng.choices(alphabet, k=rng.randint(lo, hi))),
             "".join(rng.choices(alphabet, k=rng.randint(lo, hi)))) for _ in range(n)]


def time_kernel(impl, pairs, repeat):
    fn = impl.levenshtein
    best = min(timeit.repeat(lambda: [fn(a, b) for a, b in pairs], number=1, repeat=repeat))
    return best / len(pairs) * 1e6


def time_sets(impl, repeat):
    rng = random.Random(3)
    tables = ["abfss://bank@efgh.dfs.core.windows.net/raw_%s/%s.parquet" % (w, w)
              for w in ("customers", "accounts", "transactions", "branches", "loans")]
    pred = [t.replace("raw_", rng.choice(["", "stg_", "raw_"])) for t in tables]
    return min(timeit.repeat(lambda: impl.best_match_means(pred, tables), number=200,
                             repeat=repeat)) / 200 * 1e6


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--pairs", type=int, default=20000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    impls = [("pure-python", _kernels_py)]
    if _kernels is not None:
        impls.insert(0, ("compiled", _kernels))
    else:
        print("compiled extension not available; showing the fallback only")
    cases = [("identifiers (4-16 chars)", make_pairs(args.pairs, 4, 16, 1)),
             ("paths (40-90 chars)", make_pairs(args.pairs // 4, 40, 90, 2))]

    rows = [("case", *[name for name, _ in impls])]
    for label, pairs in cases:
        rows.append((label, *[f"{time_kernel(impl, pairs, args.repeat):.2f} us" for _, impl in impls]))
    rows.append(("5x5 table match", *[f"{time_sets(impl, args.repeat):.1f} us" for _, impl in impls]))
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    for r in rows:
        print("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip())


if __name__ == "__main__":
    main()
