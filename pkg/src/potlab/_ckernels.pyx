# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: Aberth root solving, branch matching, path tracking
and grid mean-value deficits.  Same contracts as ``potlab._pykernels``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, ceil, floor, fabs, INFINITY, M_PI, isfinite
from libc.stdlib cimport malloc, free

cdef extern from "complex.h" nogil:
    double cabs(double complex)
    double complex cexp(double complex)

cnp.import_array()

cdef double EPS = 2.220446049250313e-16

TRACK_OK = 0
TRACK_UNDERFLOW = 1

_gx, _gw = np.polynomial.legendre.leggauss(8)
cdef double GL_T[8]
cdef double GL_W[8]
for _i in range(8):
    GL_T[_i] = (1.0 + _gx[_i]) / 2.0
    GL_W[_i] = _gw[_i]


cdef void _eval_coeffs(const double complex[:, ::1] C, double complex z,
                       double complex* a) noexcept nogil:
    cdef Py_ssize_t k1 = C.shape[0], d1 = C.shape[1], j, i
    cdef double complex acc
    for j in range(k1):
        acc = 0
        for i in range(d1 - 1, -1, -1):
            acc = acc * z + C[j, i]
        a[j] = acc


cdef void _initial_guesses(const double complex* a, int k, double complex* r) noexcept nogil:
    cdef double rad = 0.0, t
    cdef int j
    cdef double complex lead = a[k]
    for j in range(k):
        if a[j] != 0:
            t = cabs(a[j] / lead) ** (1.0 / (k - j))
            if t > rad:
                rad = t
    if rad == 0.0:
        rad = 1.0
    for j in range(k):
        r[j] = rad * cexp(1j * (2.0 * M_PI * j / k + 0.7))


cdef bint _aberth(const double complex* a, int k, double complex* r, int max_iter) noexcept nogil:
    """In-place Aberth iteration on initial guesses ``r``; returns convergence."""
    cdef int it, i, j
    cdef double complex x, p, dp, s, ratio, denom, diff
    cdef double b, ax
    cdef bint done, ok
    if k == 1:
        r[0] = -a[0] / a[1]
        return True
    for it in range(max_iter):
        done = True
        for i in range(k):
            x = r[i]
            p = a[k]
            dp = 0
            b = cabs(a[k])
            ax = cabs(x)
            for j in range(k - 1, -1, -1):
                dp = dp * x + p
                p = p * x + a[j]
                b = b * ax + cabs(a[j])
            if cabs(p) <= 8.0 * EPS * b:
                continue
            done = False
            if dp == 0:
                r[i] = x + 1e-8 * (1.0 + ax)
                continue
            ratio = p / dp
            s = 0
            for j in range(k):
                if j != i:
                    diff = x - r[j]
                    if diff != 0:
                        s = s + 1.0 / diff
            denom = 1.0 - ratio * s
            if denom != 0:
                r[i] = x - ratio / denom
            else:
                r[i] = x - ratio
        if done:
            return True
    ok = True
    for i in range(k):
        x = r[i]
        p = a[k]
        b = cabs(a[k])
        for j in range(k - 1, -1, -1):
            p = p * x + a[j]
            b = b * cabs(x) + cabs(a[j])
        if cabs(p) > 64.0 * EPS * b:
            ok = False
    return ok


cdef bint _match(const double complex* prev, const double complex* new, int k, double frac,
                 int* perm) noexcept nogil:
    cdef double gap = INFINITY, d, bd, limit
    cdef int i, j, best
    for i in range(k):
        for j in range(i + 1, k):
            d = cabs(prev[i] - prev[j])
            if d < gap:
                gap = d
    limit = frac * gap
    for i in range(k):
        best = -1
        bd = INFINITY
        for j in range(k):
            d = cabs(new[j] - prev[i])
            if d < bd:
                bd = d
                best = j
        if not bd < limit:
            return False
        for j in range(i):
            if perm[j] == best:
                return False
        perm[i] = best
    return True


cdef bint _solve_matched(const double complex[:, ::1] C, double complex z,
                         double complex* guess, double frac, int max_iter,
                         double degenerate_tol, double complex* a,
                         double complex* work, int* perm,
                         double complex* out) noexcept nogil:
    cdef int k = C.shape[0] - 1, j
    cdef double scale = 0.0
    _eval_coeffs(C, z, a)
    for j in range(k + 1):
        if cabs(a[j]) > scale:
            scale = cabs(a[j])
    if cabs(a[k]) <= degenerate_tol * scale:
        return False
    for j in range(k):
        work[j] = guess[j]
    if not _aberth(a, k, work, max_iter):
        return False
    if not _match(guess, work, k, frac, perm):
        return False
    for j in range(k):
        out[j] = work[perm[j]]
    return True


def eval_coeffs(C, z):
    cdef const double complex[:, ::1] Cv = np.ascontiguousarray(C, dtype=complex)
    cdef int k1 = Cv.shape[0]
    out = np.empty(k1, dtype=complex)
    cdef double complex[::1] ov = out
    _eval_coeffs(Cv, z, &ov[0])
    return list(out)


def aberth(a, init=None, max_iter=200):
    cdef const double complex[::1] av = np.ascontiguousarray(a, dtype=complex)
    cdef int k = av.shape[0] - 1
    r = np.empty(k, dtype=complex)
    cdef double complex[::1] rv = r
    if init is None:
        _initial_guesses(&av[0], k, &rv[0])
    else:
        r[:] = np.asarray(init, dtype=complex)
    ok = _aberth(&av[0], k, &rv[0], max_iter)
    return list(r), bool(ok)


def match(prev, new, frac=0.5):
    cdef const double complex[::1] pv = np.ascontiguousarray(prev, dtype=complex)
    cdef const double complex[::1] nv = np.ascontiguousarray(new, dtype=complex)
    cdef int k = pv.shape[0]
    perm = np.empty(k, dtype=np.intc)
    cdef int[::1] permv = perm
    if not _match(&pv[0], &nv[0], k, frac, &permv[0]):
        return None
    return [int(p) for p in perm]


cdef int _track_core(const double complex[:, ::1] C, const double complex* path, int npath,
                     double complex* r, bint integrate, double motion_frac,
                     int max_iter, double min_step, double degenerate_tol,
                     double complex* acc, object rec):
    """Shared tracking loop; appends samples to ``rec`` when it is a list."""
    cdef int k = C.shape[0] - 1, s, i, q
    cdef double complex a0, seg, z, znew, dz, zq
    cdef double L, u, h, unew, hphys = INFINITY, t
    cdef int status = 0
    cdef bint ok
    cdef double complex* a = <double complex*> malloc((k + 1) * sizeof(double complex))
    cdef double complex* work = <double complex*> malloc(k * sizeof(double complex))
    cdef double complex* rn = <double complex*> malloc(k * sizeof(double complex))
    cdef double complex* rq = <double complex*> malloc(k * sizeof(double complex))
    cdef double complex* guess = <double complex*> malloc(k * sizeof(double complex))
    cdef double complex* inc = <double complex*> malloc(k * sizeof(double complex))
    cdef int* perm = <int*> malloc(k * sizeof(int))
    cdef bint record = rec is not None
    z = path[0]
    try:
        for s in range(npath - 1):
            a0 = path[s]
            seg = path[s + 1] - a0
            L = cabs(seg)
            if L == 0.0:
                continue
            u = 0.0
            h = hphys / L
            if h > 1.0:
                h = 1.0
            while u < 1.0:
                if h > 1.0 - u:
                    h = 1.0 - u
                if h >= 1.0 - u:
                    unew = 1.0
                else:
                    unew = u + h
                znew = a0 + unew * seg
                ok = _solve_matched(C, znew, r, motion_frac, max_iter,
                                    degenerate_tol, a, work, perm, rn)
                if ok and integrate:
                    dz = znew - z
                    for i in range(k):
                        inc[i] = 0
                    for q in range(8):
                        t = GL_T[q]
                        zq = z + t * dz
                        for i in range(k):
                            guess[i] = r[i] + t * (rn[i] - r[i])
                        if not _solve_matched(C, zq, guess, 0.5, max_iter,
                                              degenerate_tol, a, work, perm, rq):
                            ok = False
                            break
                        for i in range(k):
                            inc[i] = inc[i] + GL_W[q] * rq[i]
                if not ok:
                    h *= 0.5
                    if h * L < min_step:
                        status = 1
                        break
                    continue
                for i in range(k):
                    r[i] = rn[i]
                    if integrate:
                        acc[i] = acc[i] + 0.5 * dz * inc[i]
                z = znew
                if record:
                    rec.append((z, [r[i] for i in range(k)], [acc[i] for i in range(k)]))
                hphys = h * L * 2.0
                u = unew
                h = 2.0 * h
                if h > 1.0:
                    h = 1.0
            if status != 0:
                break
    finally:
        free(a); free(work); free(rn); free(rq); free(guess); free(inc); free(perm)
    return status


def track(C, path, roots0, integrate=False, motion_frac=0.5, max_iter=60,
          min_step=1e-10, degenerate_tol=1e-12):
    cdef const double complex[:, ::1] Cv = np.ascontiguousarray(C, dtype=complex)
    cdef const double complex[::1] pv = np.ascontiguousarray(path, dtype=complex)
    r = np.array(roots0, dtype=complex)
    cdef double complex[::1] rv = r
    cdef int k = rv.shape[0]
    acc = np.zeros(k, dtype=complex)
    cdef double complex[::1] accv = acc
    rec = [(pv[0], list(r), list(acc))]
    status = _track_core(Cv, &pv[0], pv.shape[0], &rv[0], integrate, motion_frac,
                         max_iter, min_step, degenerate_tol, &accv[0], rec)
    zs = np.array([x[0] for x in rec], dtype=complex)
    rs = np.array([x[1] for x in rec], dtype=complex).reshape(len(rec), k)
    its = np.array([x[2] for x in rec], dtype=complex).reshape(len(rec), k)
    return zs, rs, its, status


def track_many(C, starts, roots0, ends, integrate=False, motion_frac=0.5,
               max_iter=60, min_step=1e-10, degenerate_tol=1e-12):
    cdef const double complex[:, ::1] Cv = np.ascontiguousarray(C, dtype=complex)
    cdef const double complex[::1] sv = np.ascontiguousarray(starts, dtype=complex)
    cdef const double complex[::1] ev = np.ascontiguousarray(ends, dtype=complex)
    out = np.array(roots0, dtype=complex, order="C", copy=True)
    cdef double complex[:, ::1] ov = out
    cdef Py_ssize_t m = ov.shape[0], i
    cdef int k = ov.shape[1]
    ints = np.zeros((m, k), dtype=complex)
    cdef double complex[:, ::1] iv = ints
    st = np.zeros(m, dtype=np.int64)
    cdef long long[::1] stv = st
    cdef double complex seg[2]
    for i in range(m):
        seg[0] = sv[i]
        seg[1] = ev[i]
        stv[i] = _track_core(Cv, seg, 2, &ov[i, 0], integrate, motion_frac,
                             max_iter, min_step, degenerate_tol, &iv[i, 0], None)
    return out, ints, st


def aberth_batch(A, R0=None, max_iter=200):
    cdef const double complex[:, ::1] Av = np.ascontiguousarray(A, dtype=complex)
    cdef Py_ssize_t m = Av.shape[0], i
    cdef int k = Av.shape[1] - 1
    R = np.empty((m, k), dtype=complex)
    cdef double complex[:, ::1] Rv = R
    ok = np.empty(m, dtype=bool)
    cdef cnp.npy_bool[::1] okv = ok
    if R0 is not None:
        R[:] = np.asarray(R0, dtype=complex)
    for i in range(m):
        if R0 is None:
            _initial_guesses(&Av[i, 0], k, &Rv[i, 0])
        okv[i] = _aberth(&Av[i, 0], k, &Rv[i, 0], max_iter)
    return R, ok


def match_batch(prev, new, frac=0.5):
    cdef const double complex[:, ::1] pv = np.ascontiguousarray(prev, dtype=complex)
    cdef const double complex[:, ::1] nv = np.ascontiguousarray(new, dtype=complex)
    cdef Py_ssize_t m = pv.shape[0], i
    cdef int k = pv.shape[1], j
    perm = np.zeros((m, k), dtype=np.intc)
    cdef int[:, ::1] permv = perm
    ok = np.empty(m, dtype=bool)
    cdef cnp.npy_bool[::1] okv = ok
    cdef double d, bd
    cdef int q
    for i in range(m):
        okv[i] = _match(&pv[i, 0], &nv[i, 0], k, frac, &permv[i, 0])
        if not okv[i]:
            # still report nearest indices for diagnostics
            for j in range(k):
                bd = INFINITY
                for q in range(k):
                    d = cabs(nv[i, q] - pv[i, j])
                    if d < bd:
                        bd = d
                        permv[i, j] = q
    return perm.astype(np.int64), ok


def circle_deficits(V, radii, int nsamp=32):
    cdef const double[:, ::1] Vv = np.ascontiguousarray(V, dtype=float)
    cdef Py_ssize_t ny = Vv.shape[0], nx = Vv.shape[1], ii, jj
    cdef int nr = len(radii), ir, q, ri, x0, y0
    out = np.full((nr, ny, nx), np.nan)
    cdef double[:, :, ::1] ov = out
    cdef double r, xs, ys, fx, fy, mean, c, s
    for ir in range(nr):
        r = radii[ir]
        ri = <int> ceil(r)
        if 2 * ri >= nx or 2 * ri >= ny:
            continue
        for jj in range(ri, ny - ri):
            for ii in range(ri, nx - ri):
                mean = 0.0
                for q in range(nsamp):
                    c = cos(2.0 * M_PI * q / nsamp)
                    s = sin(2.0 * M_PI * q / nsamp)
                    xs = ii + r * c
                    ys = jj + r * s
                    x0 = <int> floor(xs)
                    y0 = <int> floor(ys)
                    if x0 < 0: x0 = 0
                    if x0 > nx - 2: x0 = nx - 2
                    if y0 < 0: y0 = 0
                    if y0 > ny - 2: y0 = ny - 2
                    fx = xs - x0
                    fy = ys - y0
                    mean += ((1 - fx) * (1 - fy) * Vv[y0, x0] + fx * (1 - fy) * Vv[y0, x0 + 1]
                             + (1 - fx) * fy * Vv[y0 + 1, x0] + fx * fy * Vv[y0 + 1, x0 + 1])
                ov[ir, jj, ii] = Vv[jj, ii] - mean / nsamp
    return out
