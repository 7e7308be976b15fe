# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loop of the affine-Gaussian recursion.

Mirrors :mod:`langevin_ldp._pykernels` operation for operation so both
backends produce bit-identical summaries.
"""

from libc.math cimport fabs

cdef enum:
    BOX = 0
    ANNULUS = 1
    BALL_COMPLEMENT = 2

cdef double BLOWUP = 1e100


cdef inline bint _hit(double p, double q, const double[:, ::1] sets, Py_ssize_t k) noexcept nogil:
    cdef int code = <int>sets[k, 0]
    cdef double r2
    if code == BOX:
        return sets[k, 1] <= p <= sets[k, 2] and sets[k, 3] <= q <= sets[k, 4]
    r2 = p * p + q * q
    if code == ANNULUS:
        return sets[k, 1] * sets[k, 1] <= r2 <= sets[k, 2] * sets[k, 2]
    return r2 >= sets[k, 1] * sets[k, 1]


def run_block(double[::1] coef, double[::1] state, const double[::1] z,
              long long step0, long long burn_in, double[::1] stats,
              const double[:, ::1] sets, long long[::1] hits):
    """Advance the chain over one block of standard normal draws ``z``.

    ``coef = (a11, a12, a21, a22, c1, c2)`` with ``c = sqrt(eps h) b``.
    ``stats = (n, mean_p, mean_q, m_pp, m_pq, m_qq)`` is updated in place by
    Welford's recurrence for every step index ``>= burn_in``.  Returns the
    global index of the first step whose state exceeds ``1e100`` in absolute
    value, or ``-1``.
    """
    cdef double a11 = coef[0], a12 = coef[1], a21 = coef[2], a22 = coef[3]
    cdef double c1 = coef[4], c2 = coef[5]
    cdef double p = state[0], q = state[1], pn, dp, dq, n
    cdef double n0 = stats[0], mp = stats[1], mq = stats[2]
    cdef double spp = stats[3], spq = stats[4], sqq = stats[5]
    cdef Py_ssize_t i, k, m = z.shape[0], ns = sets.shape[0]
    cdef long long step, bad = -1
    n = n0
    with nogil:
        for i in range(m):
            step = step0 + i
            pn = a11 * p + a12 * q + c1 * z[i]
            q = a21 * p + a22 * q + c2 * z[i]
            p = pn
            if not (fabs(p) <= BLOWUP and fabs(q) <= BLOWUP):
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
                for k in range(ns):
                    if _hit(p, q, sets, k):
                        hits[k] += 1
    state[0] = p
    state[1] = q
    stats[0] = n
    stats[1] = mp
    stats[2] = mq
    stats[3] = spp
    stats[4] = spq
    stats[5] = sqq
    return bad
