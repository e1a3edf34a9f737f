"""Hot kernels: rigorous discrete convolutions on interval coefficient grids.

A complex interval array is four float64 grids (re_lo, re_hi, im_lo,
im_hi); a real one is two. Convolutions are full 2-D linear convolutions
over (order, mode) grids; 1-D sequences pass a leading axis of size 1.
Every elementwise operation rounds outward one ulp, so outputs enclose
the exact convolution of any selection of points from the inputs.

The numba path (default) runs the nested accumulation loops compiled;
set GAPSOL_NO_NUMBA=1 to force the pure-numpy path. Both paths use the
same accumulation order (ascending first-operand index), so they agree
bit for bit. benchmarks/bench_kernels.py compares them.
"""

from __future__ import annotations

import os

import numpy as np

_INF = np.inf

USE_NUMBA = os.environ.get("GAPSOL_NO_NUMBA", "") not in ("1", "true", "yes")

if USE_NUMBA:
    try:
        import numba
        from numba import njit
    except ImportError:  # pragma: no cover
        USE_NUMBA = False

__all__ = ["conv2_complex", "conv2_real", "USE_NUMBA", "backend_name"]


def backend_name() -> str:
    return "numba" if USE_NUMBA else "numpy"


# ---------------------------------------------------------------------
# numpy path
# ---------------------------------------------------------------------

def _mul_ri_vec(alo, ahi, blo, bhi):
    """Elementwise interval product, outward rounded."""
    p1 = alo * blo
    p2 = alo * bhi
    p3 = ahi * blo
    p4 = ahi * bhi
    lo = np.minimum(np.minimum(p1, p2), np.minimum(p3, p4))
    hi = np.maximum(np.maximum(p1, p2), np.maximum(p3, p4))
    return np.nextafter(lo, -_INF), np.nextafter(hi, _INF)


def _conv2_complex_numpy(are_lo, are_hi, aim_lo, aim_hi,
                         bre_lo, bre_hi, bim_lo, bim_hi):
    na, ka = are_lo.shape
    nb, kb = bre_lo.shape
    no, ko = na + nb - 1, ka + kb - 1
    ore_lo = np.zeros((no, ko)); ore_hi = np.zeros((no, ko))
    oim_lo = np.zeros((no, ko)); oim_hi = np.zeros((no, ko))
    # exact zeros in b are skipped (as in the numba path) so that zero
    # coefficients stay exactly zero in the output support
    bmask = ~((bre_lo == 0.0) & (bre_hi == 0.0) & (bim_lo == 0.0) & (bim_hi == 0.0))
    for i in range(na):
        for j in range(ka):
            arl, arh = are_lo[i, j], are_hi[i, j]
            ail, aih = aim_lo[i, j], aim_hi[i, j]
            if arl == 0.0 and arh == 0.0 and ail == 0.0 and aih == 0.0:
                continue
            rr_lo, rr_hi = _mul_ri_vec(arl, arh, bre_lo, bre_hi)
            ii_lo, ii_hi = _mul_ri_vec(ail, aih, bim_lo, bim_hi)
            ri_lo, ri_hi = _mul_ri_vec(arl, arh, bim_lo, bim_hi)
            ir_lo, ir_hi = _mul_ri_vec(ail, aih, bre_lo, bre_hi)
            re_lo = np.nextafter(rr_lo - ii_hi, -_INF)
            re_hi = np.nextafter(rr_hi - ii_lo, _INF)
            im_lo = np.nextafter(ri_lo + ir_lo, -_INF)
            im_hi = np.nextafter(ri_hi + ir_hi, _INF)
            for view, upd, direction in ((ore_lo, re_lo, -_INF), (ore_hi, re_hi, _INF),
                                         (oim_lo, im_lo, -_INF), (oim_hi, im_hi, _INF)):
                v = view[i:i + nb, j:j + kb]
                v[bmask] = np.nextafter(v[bmask] + upd[bmask], direction)
    return ore_lo, ore_hi, oim_lo, oim_hi


def _conv2_real_numpy(alo, ahi, blo, bhi):
    na, ka = alo.shape
    nb, kb = blo.shape
    no, ko = na + nb - 1, ka + kb - 1
    olo = np.zeros((no, ko)); ohi = np.zeros((no, ko))
    bmask = ~((blo == 0.0) & (bhi == 0.0))
    for i in range(na):
        for j in range(ka):
            al, ah = alo[i, j], ahi[i, j]
            if al == 0.0 and ah == 0.0:
                continue
            p_lo, p_hi = _mul_ri_vec(al, ah, blo, bhi)
            for view, upd, direction in ((olo, p_lo, -_INF), (ohi, p_hi, _INF)):
                v = view[i:i + nb, j:j + kb]
                v[bmask] = np.nextafter(v[bmask] + upd[bmask], direction)
    return olo, ohi


# ---------------------------------------------------------------------
# numba path
# ---------------------------------------------------------------------

if USE_NUMBA:

    @njit(cache=True)
    def _mul_ri(al, ah, bl, bh):
        p1 = al * bl
        p2 = al * bh
        p3 = ah * bl
        p4 = ah * bh
        lo = min(min(p1, p2), min(p3, p4))
        hi = max(max(p1, p2), max(p3, p4))
        return np.nextafter(lo, -np.inf), np.nextafter(hi, np.inf)

    @njit(cache=True)
    def _conv2_complex_numba(are_lo, are_hi, aim_lo, aim_hi,
                             bre_lo, bre_hi, bim_lo, bim_hi):
        na, ka = are_lo.shape
        nb, kb = bre_lo.shape
        no, ko = na + nb - 1, ka + kb - 1
        ore_lo = np.zeros((no, ko)); ore_hi = np.zeros((no, ko))
        oim_lo = np.zeros((no, ko)); oim_hi = np.zeros((no, ko))
        for i in range(na):
            for j in range(ka):
                arl = are_lo[i, j]; arh = are_hi[i, j]
                ail = aim_lo[i, j]; aih = aim_hi[i, j]
                if arl == 0.0 and arh == 0.0 and ail == 0.0 and aih == 0.0:
                    continue
                for p in range(nb):
                    for q in range(kb):
                        brl = bre_lo[p, q]; brh = bre_hi[p, q]
                        bil = bim_lo[p, q]; bih = bim_hi[p, q]
                        if brl == 0.0 and brh == 0.0 and bil == 0.0 and bih == 0.0:
                            continue
                        rr_lo, rr_hi = _mul_ri(arl, arh, brl, brh)
                        ii_lo, ii_hi = _mul_ri(ail, aih, bil, bih)
                        ri_lo, ri_hi = _mul_ri(arl, arh, bil, bih)
                        ir_lo, ir_hi = _mul_ri(ail, aih, brl, brh)
                        re_lo = np.nextafter(rr_lo - ii_hi, -np.inf)
                        re_hi = np.nextafter(rr_hi - ii_lo, np.inf)
                        im_lo = np.nextafter(ri_lo + ir_lo, -np.inf)
                        im_hi = np.nextafter(ri_hi + ir_hi, np.inf)
                        oi = i + p; oj = j + q
                        ore_lo[oi, oj] = np.nextafter(ore_lo[oi, oj] + re_lo, -np.inf)
                        ore_hi[oi, oj] = np.nextafter(ore_hi[oi, oj] + re_hi, np.inf)
                        oim_lo[oi, oj] = np.nextafter(oim_lo[oi, oj] + im_lo, -np.inf)
                        oim_hi[oi, oj] = np.nextafter(oim_hi[oi, oj] + im_hi, np.inf)
        return ore_lo, ore_hi, oim_lo, oim_hi

    @njit(cache=True)
    def _conv2_real_numba(alo, ahi, blo, bhi):
        na, ka = alo.shape
        nb, kb = blo.shape
        no, ko = na + nb - 1, ka + kb - 1
        olo = np.zeros((no, ko)); ohi = np.zeros((no, ko))
        for i in range(na):
            for j in range(ka):
                al = alo[i, j]; ah = ahi[i, j]
                if al == 0.0 and ah == 0.0:
                    continue
                for p in range(nb):
                    for q in range(kb):
                        bl = blo[p, q]; bh = bhi[p, q]
                        if bl == 0.0 and bh == 0.0:
                            continue
                        p_lo, p_hi = _mul_ri(al, ah, bl, bh)
                        oi = i + p; oj = j + q
                        olo[oi, oj] = np.nextafter(olo[oi, oj] + p_lo, -np.inf)
                        ohi[oi, oj] = np.nextafter(ohi[oi, oj] + p_hi, np.inf)
        return olo, ohi


def conv2_complex(a4, b4):
    """Full 2-D convolution of complex interval grids.

    a4, b4: tuples (re_lo, re_hi, im_lo, im_hi) of equal-shape 2-D float
    arrays. Returns the same tuple layout with shape grown by each axis.
    """
    a4 = tuple(np.ascontiguousarray(x, dtype=np.float64) for x in a4)
    b4 = tuple(np.ascontiguousarray(x, dtype=np.float64) for x in b4)
    if USE_NUMBA:
        return _conv2_complex_numba(*a4, *b4)
    return _conv2_complex_numpy(*a4, *b4)


def conv2_real(a2, b2):
    """Full 2-D convolution of real interval grids ((lo, hi) tuples)."""
    a2 = tuple(np.ascontiguousarray(x, dtype=np.float64) for x in a2)
    b2 = tuple(np.ascontiguousarray(x, dtype=np.float64) for x in b2)
    if USE_NUMBA:
        return _conv2_real_numba(*a2, *b2)
    return _conv2_real_numpy(*a2, *b2)
