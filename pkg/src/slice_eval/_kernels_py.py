"""Pure-Python kernels. Used when the compiled extension is unavailable."""


def levenshtein(a, b):
    """Bit-parallel edit distance (Myers, in Hyyrö's Levenshtein form).

    Python ints serve as arbitrarily wide bit vectors over the shorter
    string, so each character of the longer one costs a few integer ops.
    """
    if a == b:
        return 0
    if len(a) < len(b):
        a, b = b, a
    m = len(b)
    if not m:
        return len(a)
    peq = {}
    for i, c in enumerate(b):
        peq[c] = peq.get(c, 0) | (1 << i)
    mask = (1 << m) - 1
    last = 1 << (m - 1)
    pv, mv, score = mask, 0, m
    for c in a:
        eq = peq.get(c, 0)
        xv = eq | mv
        xh = (((eq & pv) + pv) ^ pv) | eq
        ph = mv | ~(xh | pv)
        mh = pv & xh
        if ph & last:
            score += 1
        elif mh & last:
            score -= 1
        ph = (ph << 1) | 1
        mh <<= 1
        pv = (mh | ~(xv | ph)) & mask
        mv = ph & xv & mask
    return score


def similarity(a, b):
    n = max(len(a), len(b))
    if n == 0:
        return 1.0
    return 1.0 - levenshtein(a, b) / n


def best_match_means(pred, gold):
    """Mean over ``pred`` of the best similarity to ``gold``, and vice versa."""
    sims = [[similarity(p, g) for g in gold] for p in pred]
    row = sum(max(r) for r in sims) / len(pred)
    col = sum(max(sims[i][j] for i in range(len(pred))) for j in range(len(gold))) / len(gold)
    return row, col
