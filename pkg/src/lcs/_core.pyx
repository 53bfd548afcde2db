# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: the Walsh-Hadamard butterfly and the dense
thresholded gradient-projection solve loop (plain and known-support
variants).

Semantics here mirror the pure-Python engine in lcs.solvers exactly:
same tie-breaks (lowest index wins), same step rule, same backtracking
guard, same stopping rule. The Python engine remains the fallback and the
only path for matrix-free operators and custom model projections.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, isfinite, isnan, log1p
from libc.string cimport memcpy, memset

cnp.import_array()

ctypedef cnp.int64_t i64


def fwht(double[::1] x):
    """In-place Walsh-Hadamard transform (Sylvester order, unnormalized)."""
    cdef Py_ssize_t n = x.shape[0]
    if n == 0 or (n & (n - 1)):
        raise ValueError("length must be a positive power of two")
    _fwht(&x[0], n)


cdef void _fwht(double* x, Py_ssize_t n) noexcept:
    cdef Py_ssize_t h = 1, i, j
    cdef double a, b
    while h < n:
        for i in range(0, n, 2 * h):
            for j in range(i, i + h):
                a = x[j]
                b = x[j + h]
                x[j] = a + b
                x[j + h] = a - b
        h *= 2


cdef double _select_ascending(double* a, Py_ssize_t n, Py_ssize_t k) noexcept:
    """k-th smallest (0-based) element; destroys a. Iterative quickselect
    with median-of-three pivoting."""
    cdef Py_ssize_t lo = 0, hi = n - 1, i, j, mid
    cdef double pivot, t
    while lo < hi:
        mid = lo + ((hi - lo) >> 1)
        if a[mid] < a[lo]:
            t = a[lo]; a[lo] = a[mid]; a[mid] = t
        if a[hi] < a[lo]:
            t = a[lo]; a[lo] = a[hi]; a[hi] = t
        if a[hi] < a[mid]:
            t = a[mid]; a[mid] = a[hi]; a[hi] = t
        pivot = a[mid]
        i = lo
        j = hi
        while i <= j:
            while a[i] < pivot:
                i += 1
            while a[j] > pivot:
                j -= 1
            if i <= j:
                t = a[i]; a[i] = a[j]; a[j] = t
                i += 1
                j -= 1
        if k <= j:
            hi = j
        elif k >= i:
            lo = i
        else:
            return a[k]
    return a[lo]


cdef Py_ssize_t _topk(const double* mag, Py_ssize_t n, Py_ssize_t k,
                      double* scratch, Py_ssize_t* out) noexcept:
    """Indices (ascending) of the k largest entries of mag; boundary ties
    resolved by lowest index. Returns the count written (== min(k, n))."""
    cdef Py_ssize_t i, c = 0, need
    cdef double v
    if k <= 0:
        return 0
    if k >= n:
        for i in range(n):
            out[i] = i
        return n
    memcpy(scratch, mag, n * sizeof(double))
    v = _select_ascending(scratch, n, n - k)
    need = k
    for i in range(n):
        if mag[i] > v:
            need -= 1
    for i in range(n):
        if mag[i] > v:
            out[c] = i
            c += 1
        elif mag[i] == v and need > 0:
            out[c] = i
            c += 1
            need -= 1
    return c


cdef Py_ssize_t _project(const double* a, Py_ssize_t n, Py_ssize_t s,
                         const i64* t0, Py_ssize_t k,
                         double* mags, double* scratch,
                         Py_ssize_t* selbuf, double* out,
                         Py_ssize_t* suppbuf) noexcept:
    """Hard threshold (preserving t0 when k > 0) of a into out; fills
    suppbuf with the ascending nonzero support of out and returns its size."""
    cdef Py_ssize_t i, j, cnt, c = 0
    for i in range(n):
        mags[i] = fabs(a[i])
    for j in range(k):
        mags[t0[j]] = -1.0
    cnt = _topk(mags, n, s - k, scratch, selbuf)
    memset(out, 0, n * sizeof(double))
    for j in range(k):
        out[t0[j]] = a[t0[j]]
    for j in range(cnt):
        out[selbuf[j]] = a[selbuf[j]]
    for i in range(n):
        if out[i] != 0.0:
            suppbuf[c] = i
            c += 1
    return c


cdef void _mv(const double[:, ::1] A, const double* v, double* out) noexcept:
    """out = A v."""
    cdef Py_ssize_t i, j, m = A.shape[0], n = A.shape[1]
    cdef double acc
    for i in range(m):
        acc = 0.0
        for j in range(n):
            acc += A[i, j] * v[j]
        out[i] = acc


cdef void _mtv(const double[:, ::1] A, const double* v, double* out) noexcept:
    """out = A^T v, accumulated row-wise so the matrix streams in memory
    order."""
    cdef Py_ssize_t i, j, m = A.shape[0], n = A.shape[1]
    cdef double c
    memset(out, 0, n * sizeof(double))
    for i in range(m):
        c = v[i]
        for j in range(n):
            out[j] += A[i, j] * c


cdef double _weighted_den(const double[:, ::1] A, const double* g,
                          const Py_ssize_t* idx, Py_ssize_t cnt,
                          const double* w, bint lorentz) noexcept:
    """||W^(1/2) A_S g_S||^2 with W = I in the identity-weight mode."""
    cdef Py_ssize_t i, j, m = A.shape[0]
    cdef double acc, den = 0.0
    for i in range(m):
        acc = 0.0
        for j in range(cnt):
            acc += A[i, idx[j]] * g[idx[j]]
        if lorentz:
            den += w[i] * acc * acc
        else:
            den += acc * acc
    return den


cdef double _objective(const double* r, Py_ssize_t m, double gamma,
                       bint lorentz) noexcept:
    cdef Py_ssize_t i
    cdef double acc = 0.0, t
    if lorentz:
        for i in range(m):
            t = r[i] / gamma
            acc += log1p(t * t)
    else:
        for i in range(m):
            acc += r[i] * r[i]
    return acc


cdef bint _supports_differ(const Py_ssize_t* a, Py_ssize_t na,
                           const Py_ssize_t* b, Py_ssize_t nb) noexcept:
    cdef Py_ssize_t i
    if na != nb:
        return True
    for i in range(na):
        if a[i] != b[i]:
            return True
    return False


def dense_solve(const double[:, ::1] phi, const double[::1] y, double gamma,
                Py_ssize_t s, const i64[::1] t0, bint adaptive,
                double mu_fixed, Py_ssize_t max_iters, double tol,
                Py_ssize_t backtrack_max, bint keep_iterates):
    """Run the dense thresholded gradient-projection loop.

    gamma > 0 selects Lorentzian weights; gamma <= 0 selects identity
    weights (the plain least-squares update) with a squared-l2 objective
    trace. Returns a dict mirroring the Python engine output; stop codes
    are 0 max-iters, 1 converged, 2 stalled, 3 diverged.
    """
    cdef Py_ssize_t m = phi.shape[0], n = phi.shape[1]
    cdef Py_ssize_t k0 = t0.shape[0]
    cdef bint lorentz = gamma > 0.0
    cdef Py_ssize_t cap = s if s > 0 else 1

    x_arr = np.zeros(n)
    r_arr = np.empty(m)
    wr_arr = np.empty(m)
    w_arr = np.empty(m)
    g_arr = np.empty(n)
    a_arr = np.empty(n)
    cand_arr = np.empty(n)
    candr_arr = np.empty(m)
    bestx_arr = np.empty(n)
    bestr_arr = np.empty(m)
    mags_arr = np.empty(n)
    scratch_arr = np.empty(n)
    selbuf_arr = np.empty(n, dtype=np.intp)
    kept_arr = np.empty(n, dtype=np.intp)
    cursupp_arr = np.empty(cap, dtype=np.intp)
    candsupp_arr = np.empty(cap, dtype=np.intp)
    bestsupp_arr = np.empty(cap, dtype=np.intp)

    trace_arr = np.empty(max_iters + 1)
    sizes_arr = np.empty(max_iters + 1, dtype=np.int64)
    flat_arr = np.empty((max_iters + 1) * cap, dtype=np.int64)
    changed_arr = np.zeros(max_iters, dtype=np.uint8)
    bts_arr = np.zeros(max_iters, dtype=np.int64)
    iterates_arr = np.zeros((max_iters + 1, n)) if keep_iterates else None

    cdef double[::1] x = x_arr, r = r_arr, wr = wr_arr, w = w_arr
    cdef double[::1] g = g_arr, av = a_arr, cand = cand_arr, candr = candr_arr
    cdef double[::1] bestx = bestx_arr, bestr = bestr_arr
    cdef double[::1] mags = mags_arr, scratch = scratch_arr
    cdef Py_ssize_t[::1] selbuf = selbuf_arr, kept = kept_arr
    cdef Py_ssize_t[::1] cursupp = cursupp_arr, candsupp = candsupp_arr
    cdef Py_ssize_t[::1] bestsupp = bestsupp_arr
    cdef double[::1] trace = trace_arr
    cdef i64[::1] sizes = sizes_arr, flat = flat_arr, bts = bts_arr
    cdef cnp.uint8_t[::1] changed = changed_arr
    cdef double[:, ::1] iterates = iterates_arr if keep_iterates else None

    cdef Py_ssize_t i, j, t, csize = 0, candsize, bsize, kcnt, flat_pos = 0
    cdef Py_ssize_t iters = 0, bt, stall_events = 0, diverged_at = -1
    cdef int stop_code = 0
    cdef double g2, obj, cand_obj, best_obj, mu, num, den, gmax, dx2, xn2
    cdef bint changed_flag, stalled_ls, conv

    for i in range(m):
        r[i] = y[i]
    obj = _objective(&r[0], m, gamma, lorentz)
    trace[0] = obj
    sizes[0] = 0

    for t in range(max_iters):
        # gradient of the weighted residual
        if lorentz:
            g2 = gamma * gamma
            for i in range(m):
                w[i] = g2 / (g2 + r[i] * r[i])
                wr[i] = w[i] * r[i]
        else:
            for i in range(m):
                wr[i] = r[i]
        _mtv(phi, &wr[0], &g[0])

        gmax = 0.0
        for j in range(n):
            if fabs(g[j]) > gmax:
                gmax = fabs(g[j])
        if not isfinite(gmax):
            stop_code = 3
            diverged_at = t
            break

        # step size
        if not adaptive:
            mu = mu_fixed
        elif gmax == 0.0:
            mu = 1.0
        else:
            num = 0.0
            if csize > 0:
                for j in range(csize):
                    num += g[cursupp[j]] * g[cursupp[j]]
            if csize > 0 and num > 0.0:
                den = _weighted_den(phi, &g[0], &cursupp[0], csize, &w[0], lorentz)
                kcnt = 0
            else:
                # empty or gradient-dead support: use the kept set of the
                # projected gradient for the normalization
                for j in range(n):
                    mags[j] = fabs(g[j])
                for j in range(k0):
                    mags[t0[j]] = -1.0
                kcnt = _topk(&mags[0], n, s - k0, &scratch[0], &kept[0])
                for j in range(k0):
                    kept[kcnt + j] = t0[j]
                kcnt += k0
                num = 0.0
                for j in range(kcnt):
                    num += g[kept[j]] * g[kept[j]]
                den = _weighted_den(phi, &g[0], &kept[0], kcnt, &w[0], lorentz)
            if num == 0.0:
                mu = 1.0
            elif den < 1e-300:
                stop_code = 2
                break
            else:
                mu = num / den

        # candidate
        for j in range(n):
            av[j] = x[j] + mu * g[j]
            if not isfinite(av[j]):
                stop_code = 3
                diverged_at = t
                break
        if stop_code == 3:
            break
        candsize = _project(&av[0], n, s, &t0[0] if k0 else NULL, k0,
                            &mags[0], &scratch[0], &selbuf[0], &cand[0],
                            &candsupp[0])
        _mv(phi, &cand[0], &candr[0])
        for i in range(m):
            candr[i] = y[i] - candr[i]
        cand_obj = _objective(&candr[0], m, gamma, lorentz)
        if isnan(cand_obj):
            cand_obj = np.inf

        bt = 0
        stalled_ls = False
        changed_flag = _supports_differ(&cursupp[0], csize, &candsupp[0], candsize)
        if adaptive and changed_flag and cand_obj > obj:
            best_obj = cand_obj
            memcpy(&bestx[0], &cand[0], n * sizeof(double))
            memcpy(&bestr[0], &candr[0], m * sizeof(double))
            if candsize:
                memcpy(&bestsupp[0], &candsupp[0], candsize * sizeof(Py_ssize_t))
            bsize = candsize
            while cand_obj > obj and bt < backtrack_max:
                mu *= 0.5
                bt += 1
                for j in range(n):
                    av[j] = x[j] + mu * g[j]
                candsize = _project(&av[0], n, s, &t0[0] if k0 else NULL, k0,
                                    &mags[0], &scratch[0], &selbuf[0],
                                    &cand[0], &candsupp[0])
                _mv(phi, &cand[0], &candr[0])
                for i in range(m):
                    candr[i] = y[i] - candr[i]
                cand_obj = _objective(&candr[0], m, gamma, lorentz)
                if isnan(cand_obj):
                    cand_obj = np.inf
                if cand_obj < best_obj:
                    best_obj = cand_obj
                    memcpy(&bestx[0], &cand[0], n * sizeof(double))
                    memcpy(&bestr[0], &candr[0], m * sizeof(double))
                    if candsize:
                        memcpy(&bestsupp[0], &candsupp[0],
                               candsize * sizeof(Py_ssize_t))
                    bsize = candsize
            if cand_obj > obj:
                cand_obj = best_obj
                memcpy(&cand[0], &bestx[0], n * sizeof(double))
                memcpy(&candr[0], &bestr[0], m * sizeof(double))
                if bsize:
                    memcpy(&candsupp[0], &bestsupp[0], bsize * sizeof(Py_ssize_t))
                candsize = bsize
                stalled_ls = True
                stall_events += 1
            changed_flag = _supports_differ(&cursupp[0], csize,
                                            &candsupp[0], candsize)

        dx2 = 0.0
        xn2 = 0.0
        for j in range(n):
            dx2 += (cand[j] - x[j]) * (cand[j] - x[j])
            xn2 += x[j] * x[j]

        memcpy(&x[0], &cand[0], n * sizeof(double))
        memcpy(&r[0], &candr[0], m * sizeof(double))
        obj = cand_obj
        if candsize:
            memcpy(&cursupp[0], &candsupp[0], candsize * sizeof(Py_ssize_t))
        csize = candsize

        iters = t + 1
        trace[iters] = obj
        sizes[iters] = csize
        for j in range(csize):
            flat[flat_pos] = cursupp[j]
            flat_pos += 1
        changed[t] = 1 if changed_flag else 0
        bts[t] = bt
        if keep_iterates:
            for j in range(n):
                iterates[iters, j] = x[j]

        if xn2 > 0.0:
            conv = dx2 <= tol * tol * xn2
        else:
            conv = dx2 == 0.0
        if conv:
            stop_code = 1
            break
    else:
        stop_code = 0

    return {
        "x": x_arr,
        "obj_trace": trace_arr[:iters + 1].copy(),
        "iterations": iters,
        "stop_code": stop_code,
        "supports_flat": flat_arr[:flat_pos].copy(),
        "support_sizes": sizes_arr[:iters + 1].copy(),
        "support_changed": changed_arr[:iters].copy(),
        "backtracks_per_iter": bts_arr[:iters].copy(),
        "stall_events": stall_events,
        "diverged_at": diverged_at,
        "iterates": iterates_arr[:iters + 1].copy() if keep_iterates else None,
    }
