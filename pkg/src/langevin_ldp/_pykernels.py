"""Pure-Python twin of the compiled recursion kernel."""

BLOWUP = 1e100


def _hit(p, q, row):
    code = int(row[0])
    if code == 0:
        return row[1] <= p <= row[2] and row[3] <= q <= row[4]
    r2 = p * p + q * q
    if code == 1:
        return row[1] * row[1] <= r2 <= row[2] * row[2]
    return r2 >= row[1] * row[1]


def run_block(coef, state, z, step0, burn_in, stats, sets, hits):
    a11, a12, a21, a22, c1, c2 = (float(c) for c in coef)
    p, q = float(state[0]), float(state[1])
    n, mp, mq, spp, spq, sqq = (float(s) for s in stats)
    rows = [tuple(float(v) for v in r) for r in sets]
    counts = [int(h) for h in hits]
    bad = -1
    for i, zi in enumerate(z.tolist()):
        step = step0 + i
        pn = a11 * p + a12 * q + c1 * zi
        q = a21 * p + a22 * q + c2 * zi
        p = pn
        if not (abs(p) <= BLOWUP and abs(q) <= BLOWUP):
            bad = step
            break
        if step >= burn_in:
            n = n + 1.0
            dp = p - mp
            dq = q - mq
            mp = mp + dp / n
            mq = mq + dq / n
            spp = spp + dp * (p - mp)
            spq = spq + dp * (q - mq)
            sqq = sqq + dq * (q - mq)
            for k, row in enumerate(rows):
                if _hit(p, q, row):
                    counts[k] += 1
    state[0], state[1] = p, q
    stats[:] = (n, mp, mq, spp, spq, sqq)
    hits[:] = counts
    return bad
