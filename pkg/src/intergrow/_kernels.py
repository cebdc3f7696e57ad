"""Compiled kernels: fixed-point Horner evaluation and compensated sums.

All heavy loops live here.  Design constraints:

* 256-bit fixed point.  A phase polynomial with coefficients reduced mod 1
  is evaluated at integer offsets t by Horner directly in Z/2^256 (eight
  32-bit limbs held in uint64 slots).  Multiplying a fraction by an integer
  and wrapping IS reduction mod 1, so the evaluation is exact apart from the
  initial 2^-256 coefficient truncations, whose amplification the planner
  budgets (t^m < 2^160).

* Determinism.  No fastmath, no parallel reductions: every kernel consumes
  an explicitly ordered range and accumulates with Neumaier compensation in
  a fixed order, so results are bit-identical for any thread count (threads
  only ever split work at block boundaries chosen by the planner).
"""

from __future__ import annotations

import numpy as np
from numba import njit

MASK32 = np.uint64(0xFFFFFFFF)
SHIFT32 = np.uint64(32)
INV_2_64 = 5.421010862427522e-20  # 2^-64
TWO_PI = 6.283185307179586


@njit(cache=True, nogil=True)
def horner_fracs(limbs, order, span, out):
    """Evaluate sum_k a_k t^k mod 1 for t = 0..span-1 into out (float64).

    limbs: (order+1, 8) uint64 array, limbs[k] = frac(a_k) * 2^256 in
    little-endian 32-bit limbs.  Top 64 bits of the result become the float.
    """
    for t in range(span):
        s0 = limbs[order, 0]; s1 = limbs[order, 1]
        s2 = limbs[order, 2]; s3 = limbs[order, 3]
        s4 = limbs[order, 4]; s5 = limbs[order, 5]
        s6 = limbs[order, 6]; s7 = limbs[order, 7]
        tu = np.uint64(t)
        for k in range(order - 1, -1, -1):
            p = s0 * tu + limbs[k, 0]
            s0 = p & MASK32; c = p >> SHIFT32
            p = s1 * tu + limbs[k, 1] + c
            s1 = p & MASK32; c = p >> SHIFT32
            p = s2 * tu + limbs[k, 2] + c
            s2 = p & MASK32; c = p >> SHIFT32
            p = s3 * tu + limbs[k, 3] + c
            s3 = p & MASK32; c = p >> SHIFT32
            p = s4 * tu + limbs[k, 4] + c
            s4 = p & MASK32; c = p >> SHIFT32
            p = s5 * tu + limbs[k, 5] + c
            s5 = p & MASK32; c = p >> SHIFT32
            p = s6 * tu + limbs[k, 6] + c
            s6 = p & MASK32; c = p >> SHIFT32
            p = s7 * tu + limbs[k, 7] + c
            s7 = p & MASK32
        f = (float(s7) * 4294967296.0 + float(s6)) * INV_2_64
        if f >= 1.0:
            f = 0.0
        out[t] = f


@njit(cache=True, nogil=True)
def esum_fracs(fracs, lo, hi):
    """Neumaier-compensated sum of e(2 pi i fracs[n]) for n in [lo, hi)."""
    sr = 0.0; si = 0.0; cr = 0.0; ci = 0.0
    for n in range(lo, hi):
        ang = TWO_PI * fracs[n]
        x = np.cos(ang)
        y = np.sin(ang)
        t = sr + x
        if abs(sr) >= abs(x):
            cr += (sr - t) + x
        else:
            cr += (x - t) + sr
        sr = t
        t = si + y
        if abs(si) >= abs(y):
            ci += (si - t) + y
        else:
            ci += (y - t) + si
        si = t
    return sr + cr, si + ci


@njit(cache=True, nogil=True)
def combo_sum_shared(zre, zim, offs, exps, start, count):
    """Sum over n of prod_j z(n + offs[j])^exps[j], one shared base table.

    zre/zim: base table of unit-circle points, z = e(2 pi i phase(m)).
    Exponents are small nonzero integers; negative means conjugate.
    """
    sr = 0.0; si = 0.0; cr = 0.0; ci = 0.0
    r = offs.size
    for n in range(start, start + count):
        pr = 1.0; pi = 0.0
        for j in range(r):
            e = exps[j]
            idx = n + offs[j]
            zr = zre[idx]; zi = zim[idx]
            if e < 0:
                zi = -zi
                e = -e
            wr = zr; wi = zi
            for _ in range(e - 1):
                wr, wi = wr * zr - wi * zi, wr * zi + wi * zr
            pr, pi = pr * wr - pi * wi, pr * wi + pi * wr
        t = sr + pr
        if abs(sr) >= abs(pr):
            cr += (sr - t) + pr
        else:
            cr += (pr - t) + sr
        sr = t
        t = si + pi
        if abs(si) >= abs(pi):
            ci += (si - t) + pi
        else:
            ci += (pi - t) + si
        si = t
    return sr + cr, si + ci


@njit(cache=True, nogil=True)
def combo_sum_multi(zre2, zim2, offs, exps, start, count):
    """Like combo_sum_shared but term j draws from its own table row j."""
    sr = 0.0; si = 0.0; cr = 0.0; ci = 0.0
    r = offs.size
    for n in range(start, start + count):
        pr = 1.0; pi = 0.0
        for j in range(r):
            e = exps[j]
            idx = n + offs[j]
            zr = zre2[j, idx]; zi = zim2[j, idx]
            if e < 0:
                zi = -zi
                e = -e
            wr = zr; wi = zi
            for _ in range(e - 1):
                wr, wi = wr * zr - wi * zi, wr * zi + wi * zr
            pr, pi = pr * wr - pi * wi, pr * wi + pi * wr
        t = sr + pr
        if abs(sr) >= abs(pr):
            cr += (sr - t) + pr
        else:
            cr += (pr - t) + sr
        sr = t
        t = si + pi
        if abs(si) >= abs(pi):
            ci += (si - t) + pi
        else:
            ci += (pi - t) + si
        si = t
    return sr + cr, si + ci


@njit(cache=True, nogil=True)
def residue_combo_sum(res, offs, coefs, q, roots_re, roots_im, start, count):
    """Sum over n of e((sum_j coefs[j] * res[n + offs[j]]) / q).

    res: residue table (int64, values in [0, q)); roots: e(2 pi i k/q).
    Integer accumulation keeps the phase exact in (1/q)Z.
    """
    sr = 0.0; si = 0.0; cr = 0.0; ci = 0.0
    r = offs.size
    for n in range(start, start + count):
        acc = np.int64(0)
        for j in range(r):
            acc += coefs[j] * res[n + offs[j]]
        k = acc % q
        if k < 0:
            k += q
        x = roots_re[k]; y = roots_im[k]
        t = sr + x
        if abs(sr) >= abs(x):
            cr += (sr - t) + x
        else:
            cr += (x - t) + sr
        sr = t
        t = si + y
        if abs(si) >= abs(y):
            ci += (si - t) + y
        else:
            ci += (y - t) + si
        si = t
    return sr + cr, si + ci


@njit(cache=True, nogil=True)
def weighted_frac_combine(tables, weights, offs, start, count, out):
    """out[i] = frac(sum_j weights[j] * tables[j, n + offs[j]]), n = start + i.

    Used for floor phases with real multipliers: each row of `tables` is
    already a phase table and the weights are small reals.
    """
    r = weights.size
    for i in range(count):
        n = start + i
        acc = 0.0
        for j in range(r):
            acc += weights[j] * tables[j, n + offs[j]]
        f = acc - np.floor(acc)
        if f >= 1.0:
            f = 0.0
        out[i] = f


def warmup():
    """Force-compile every kernel (first call JIT cost, cached on disk)."""
    limbs = np.zeros((2, 8), dtype=np.uint64)
    out = np.zeros(4, dtype=np.float64)
    horner_fracs(limbs, 1, 4, out)
    esum_fracs(out, 0, 4)
    z = np.ones(8, dtype=np.float64)
    combo_sum_shared(z, z * 0.0, np.zeros(1, np.int64), np.ones(1, np.int64), 0, 4)
    combo_sum_multi(
        np.ones((1, 8)), np.zeros((1, 8)), np.zeros(1, np.int64),
        np.ones(1, np.int64), 0, 4,
    )
    residue_combo_sum(
        np.zeros(8, np.int64), np.zeros(1, np.int64), np.ones(1, np.int64),
        3, np.ones(3), np.zeros(3), 0, 4,
    )
    weighted_frac_combine(
        np.zeros((1, 8)), np.ones(1), np.zeros(1, np.int64), 0, 4, out
    )
