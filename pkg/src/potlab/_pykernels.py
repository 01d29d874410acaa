"""Pure-Python reference kernels.

Same algorithms and signatures as the compiled ``_ckernels`` module; this
one is used when the extension is not built or when ``POTLAB_PURE_PYTHON``
is set.  Scalar loops use Python complex arithmetic, batch routines use
numpy.
"""

import cmath
import math

import numpy as np

EPS = 2.220446049250313e-16

TRACK_OK = 0
TRACK_UNDERFLOW = 1

_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)
_GL_T = [(1.0 + x) / 2.0 for x in _GL_X]
_GL_W = [float(w) for w in _GL_W]


def eval_coeffs(C, z):
    """Coefficients ``a_j = p_j(z)`` of the fiber polynomial in y.

    ``C[j, i]`` is the coefficient of ``z**i * y**j``.
    """
    k1, d1 = C.shape
    out = []
    for j in range(k1):
        row = C[j]
        acc = 0j
        for i in range(d1 - 1, -1, -1):
            acc = acc * z + complex(row[i])
        out.append(acc)
    return out


def _initial_guesses(a):
    k = len(a) - 1
    lead = a[k]
    r = 0.0
    for j in range(k):
        if a[j] != 0:
            r = max(r, abs(a[j] / lead) ** (1.0 / (k - j)))
    if r == 0.0:
        r = 1.0
    return [r * cmath.exp(1j * (2.0 * math.pi * nu / k + 0.7)) for nu in range(k)]


def aberth(a, init=None, max_iter=200):
    """All roots of ``sum a[j] y**j`` by Aberth-Ehrlich iteration.

    Returns ``(roots, converged)``.  A root counts as converged once its
    residual is at rounding level, ``|p(r)| <= 8 eps sum |a_j| |r|**j``.
    """
    a = [complex(c) for c in a]
    k = len(a) - 1
    if k == 1:
        return [-a[0] / a[1]], True
    r = list(init) if init is not None else _initial_guesses(a)
    r = [complex(x) for x in r]
    absa = [abs(c) for c in a]
    for _ in range(max_iter):
        done = True
        for i in range(k):
            x = r[i]
            p = a[k]
            dp = 0j
            b = absa[k]
            ax = abs(x)
            for j in range(k - 1, -1, -1):
                dp = dp * x + p
                p = p * x + a[j]
                b = b * ax + absa[j]
            if abs(p) <= 8.0 * EPS * b:
                continue
            done = False
            if dp == 0:
                r[i] = x + 1e-8 * (1.0 + ax)
                continue
            ratio = p / dp
            s = 0j
            for j in range(k):
                if j != i:
                    diff = x - r[j]
                    if diff != 0:
                        s += 1.0 / diff
            denom = 1.0 - ratio * s
            r[i] = x - (ratio / denom if denom != 0 else ratio)
        if done:
            return r, True
    # final residual check
    ok = True
    for x in r:
        p = a[k]
        b = absa[k]
        for j in range(k - 1, -1, -1):
            p = p * x + a[j]
            b = b * abs(x) + absa[j]
        if abs(p) > 64.0 * EPS * b:
            ok = False
    return r, ok


def _min_gap(r):
    k = len(r)
    g = math.inf
    for i in range(k):
        for j in range(i + 1, k):
            d = abs(r[i] - r[j])
            if d < g:
                g = d
    return g


def match(prev, new, frac=0.5):
    """Greedy nearest-neighbour labelling of ``new`` against ``prev``.

    Returns the list ``perm`` with ``new[perm[i]]`` continuing ``prev[i]``,
    or ``None`` when some root moved by ``frac`` of the minimal gap of
    ``prev`` or more.
    """
    k = len(prev)
    limit = frac * _min_gap(prev)
    perm = []
    used = set()
    for i in range(k):
        best = -1
        bd = math.inf
        for j in range(k):
            d = abs(new[j] - prev[i])
            if d < bd:
                bd = d
                best = j
        if not bd < limit or best in used:
            return None
        used.add(best)
        perm.append(best)
    return perm


def _solve_matched(C, z, guess, frac, max_iter, degenerate_tol):
    a = eval_coeffs(C, z)
    scale = max(abs(c) for c in a)
    if abs(a[-1]) <= degenerate_tol * scale:
        return None
    rn, ok = aberth(a, guess, max_iter)
    if not ok:
        return None
    perm = match(guess, rn, frac)
    if perm is None:
        return None
    return [rn[p] for p in perm]


def track(C, path, roots0, integrate=False, motion_frac=0.5, max_iter=60,
          min_step=1e-10, degenerate_tol=1e-12):
    """Continue the roots of ``P(z, .)`` along the polyline ``path``.

    Steps adaptively: a step is accepted when every root moves less than
    ``motion_frac`` times the minimal root gap at the step start, and is
    bisected otherwise.  With ``integrate`` the running integrals
    ``int alpha_nu dz`` are accumulated with 8-point Gauss-Legendre rules.

    Returns ``(zs, roots, integrals, status)``; the arrays hold every
    accepted sample, path vertices included.
    """
    path = [complex(p) for p in path]
    r = [complex(x) for x in roots0]
    k = len(r)
    z = path[0]
    zs = [z]
    rs = [list(r)]
    acc = [0j] * k
    ints = [list(acc)]
    hphys = math.inf
    status = TRACK_OK
    for s in range(len(path) - 1):
        a, b = path[s], path[s + 1]
        seg = b - a
        L = abs(seg)
        if L == 0.0:
            continue
        u = 0.0
        h = min(1.0, hphys / L)
        while u < 1.0:
            h = min(h, 1.0 - u)
            unew = 1.0 if h >= 1.0 - u else u + h
            znew = a + unew * seg
            rn = _solve_matched(C, znew, r, motion_frac, max_iter, degenerate_tol)
            inc = None
            if rn is not None and integrate:
                dz = znew - z
                inc = [0j] * k
                for t, w in zip(_GL_T, _GL_W):
                    zq = z + t * dz
                    guess = [r[i] + t * (rn[i] - r[i]) for i in range(k)]
                    rq = _solve_matched(C, zq, guess, 0.5, max_iter, degenerate_tol)
                    if rq is None:
                        inc = None
                        break
                    for i in range(k):
                        inc[i] += w * rq[i]
                if inc is None:
                    rn = None
                else:
                    inc = [0.5 * dz * v for v in inc]
            if rn is None:
                h *= 0.5
                if h * L < min_step:
                    status = TRACK_UNDERFLOW
                    break
                continue
            r = rn
            z = znew
            if inc is not None:
                acc = [acc[i] + inc[i] for i in range(k)]
            zs.append(z)
            rs.append(list(r))
            ints.append(list(acc))
            hphys = h * L * 2.0
            u = unew
            h = min(2.0 * h, 1.0)
        if status != TRACK_OK:
            break
    return (np.array(zs, dtype=complex), np.array(rs, dtype=complex).reshape(len(zs), k),
            np.array(ints, dtype=complex).reshape(len(zs), k), status)


def track_many(C, starts, roots0, ends, integrate=False, motion_frac=0.5,
               max_iter=60, min_step=1e-10, degenerate_tol=1e-12):
    """Continue each row of ``roots0`` along the segment ``starts[m] -> ends[m]``.

    Returns ``(roots_end, integrals, status)`` with per-item status codes.
    """
    m = len(starts)
    k = roots0.shape[1]
    out = np.empty((m, k), dtype=complex)
    ints = np.zeros((m, k), dtype=complex)
    st = np.zeros(m, dtype=np.int64)
    for i in range(m):
        _, rs, it, s = track(C, [starts[i], ends[i]], roots0[i], integrate,
                             motion_frac, max_iter, min_step, degenerate_tol)
        out[i] = rs[-1]
        ints[i] = it[-1]
        st[i] = s
    return out, ints, st


def aberth_batch(A, R0=None, max_iter=200):
    """Vectorised Aberth iteration over the rows of ``A`` (m, k+1).

    Returns ``(roots (m, k), converged (m,))``.
    """
    A = np.asarray(A, dtype=complex)
    m, k1 = A.shape
    k = k1 - 1
    if k == 1:
        return (-A[:, 0] / A[:, 1])[:, None], np.ones(m, dtype=bool)
    if R0 is None:
        R = np.array([_initial_guesses(list(row)) for row in A], dtype=complex)
    else:
        R = np.array(R0, dtype=complex, copy=True)
    absA = np.abs(A)
    active = np.ones(m, dtype=bool)
    eye = np.eye(k, dtype=bool)
    for _ in range(max_iter):
        idx = np.nonzero(active)[0]
        if idx.size == 0:
            break
        a = A[idx]
        x = R[idx]
        p = np.repeat(a[:, k:k1], k, axis=1)
        dp = np.zeros_like(x)
        b = np.repeat(absA[idx, k:k1], k, axis=1)
        ax = np.abs(x)
        for j in range(k - 1, -1, -1):
            dp = dp * x + p
            p = p * x + a[:, j:j + 1]
            b = b * ax + absA[idx, j:j + 1]
        conv = np.abs(p) <= 8.0 * EPS * b
        rowdone = conv.all(axis=1)
        diff = x[:, :, None] - x[:, None, :]
        diff[:, eye] = 1.0
        inv = 1.0 / diff
        inv[:, eye] = 0.0
        s = inv.sum(axis=2)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = p / dp
            w = ratio / (1.0 - ratio * s)
        w = np.where(conv | ~np.isfinite(w), 0.0, w)
        R[idx] = x - w
        active[idx[rowdone]] = False
    return R, ~active


def match_batch(prev, new, frac=0.5):
    """Vectorised :func:`match`; returns ``(perm (m, k), ok (m,))``."""
    prev = np.asarray(prev)
    new = np.asarray(new)
    m, k = prev.shape
    D = np.abs(prev[:, :, None] - new[:, None, :])
    perm = D.argmin(axis=2)
    dmin = np.take_along_axis(D, perm[:, :, None], axis=2)[:, :, 0]
    if k == 1:
        return perm, np.ones(m, dtype=bool)
    G = np.abs(prev[:, :, None] - prev[:, None, :])
    G[:, np.eye(k, dtype=bool)] = np.inf
    gap = G.min(axis=(1, 2))
    ok = (dmin < frac * gap[:, None]).all(axis=1)
    ok &= (np.sort(perm, axis=1) == np.arange(k)).all(axis=1)
    return perm, ok


def circle_deficits(V, radii, nsamp=32):
    """Sub-mean-value deficits ``V(p) - mean_{|q-p|=r} V(q)`` on a grid.

    Radii are in grid units; circle values use bilinear interpolation.
    Nodes whose circle leaves the grid get ``nan``.
    Returns an array of shape ``(len(radii), ny, nx)``.
    """
    V = np.asarray(V, dtype=float)
    ny, nx = V.shape
    th = 2.0 * np.pi * np.arange(nsamp) / nsamp
    out = np.full((len(radii), ny, nx), np.nan)
    for ir, r in enumerate(radii):
        ri = int(math.ceil(r))
        if 2 * ri >= nx or 2 * ri >= ny:
            continue
        jj, ii = np.mgrid[ri:ny - ri, ri:nx - ri]
        mean = np.zeros(jj.shape)
        for t in th:
            xs = ii + r * math.cos(t)
            ys = jj + r * math.sin(t)
            x0 = np.clip(np.floor(xs).astype(int), 0, nx - 2)
            y0 = np.clip(np.floor(ys).astype(int), 0, ny - 2)
            fx = xs - x0
            fy = ys - y0
            v = ((1 - fx) * (1 - fy) * V[y0, x0] + fx * (1 - fy) * V[y0, x0 + 1]
                 + (1 - fx) * fy * V[y0 + 1, x0] + fx * fy * V[y0 + 1, x0 + 1])
            mean += v
        mean /= nsamp
        out[ir, ri:ny - ri, ri:nx - ri] = V[ri:ny - ri, ri:nx - ri] - mean
    return out
