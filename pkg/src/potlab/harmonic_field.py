"""Harmonic primitives H_nu with dH_nu/dz = g_nu (the continued root
functions of P), level-curve tracing, local sector decomposition and
tangential-derivative ordering.

Convention: dH/dz = (H_x - i H_y) / 2.  With A_nu the analytic primitive of
g_nu (A_nu' = g_nu, A_nu(p) = 0) this gives H_nu = 2 Re A_nu + c_nu and
grad H_nu = (2 Re g_nu, -2 Im g_nu).  Gradients are handled as complex
numbers ``G = H_x + i H_y = 2 conj(g)``.
"""

from __future__ import annotations

import csv
import json
import math
import threading
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .algebraic_core import BivariatePolynomial, discriminant_nodes, solve_fiber
from .errors import (DegenerateCurve, GradientStall, InputError, NoConvergence,
                     OrderNotResolved, PathHitsSingularSet, QuadratureNoConvergence,
                     RadiusTooLarge, SeedNotOnCurve, StepUnderflow)
from .tolerances import TOL

__all__ = [
    "HarmonicTuple", "Cursor", "Grid", "LevelCurve", "Sector", "TangentialOrder",
    "primitive", "harmonic_value", "harmonic_gradient", "trace_level_curve",
    "sector_decomposition", "tangential_order", "sector_report",
]

_GL6_X, _GL6_W = np.polynomial.legendre.leggauss(8)
_GL6_T = (1.0 + _GL6_X) / 2.0


def _dot(a, b):
    """Euclidean dot product of complex numbers read as plane vectors."""
    return (a * np.conj(b)).real


@dataclass(frozen=True)
class Grid:
    """Rectangular lattice: nodes ``origin + h*(i + 1j*j)``; arrays are (ny, nx)."""

    origin: complex
    h: float
    nx: int
    ny: int

    @classmethod
    def square(cls, center=0.0, half_width=1.0, n=None):
        n = n or TOL.grid_default
        h = 2.0 * half_width / (n - 1)
        return cls(complex(center) - half_width * (1 + 1j), h, n, n)

    @classmethod
    def rect(cls, xmin, xmax, ymin, nx, ny=None):
        h = (xmax - xmin) / (nx - 1)
        if ny is None:
            ny = nx
        return cls(complex(xmin, ymin), h, nx, ny)

    @property
    def x(self):
        return self.origin.real + self.h * np.arange(self.nx)

    @property
    def y(self):
        return self.origin.imag + self.h * np.arange(self.ny)

    @property
    def Z(self):
        return self.x[None, :] + 1j * self.y[:, None]

    @property
    def shape(self):
        return (self.ny, self.nx)

    def contains(self, z, margin=0.0):
        z = complex(z)
        return (self.origin.real + margin <= z.real <= self.x[-1] - margin
                and self.origin.imag + margin <= z.imag <= self.y[-1] - margin)


class Cursor:
    """A point with its labelled roots and primitives, moved by continuation."""

    __slots__ = ("P", "z", "roots", "A")

    def __init__(self, P, z, roots, A):
        self.P = P
        self.z = complex(z)
        self.roots = np.asarray(roots, dtype=complex)
        self.A = np.asarray(A, dtype=complex)

    def copy(self):
        return Cursor(self.P, self.z, self.roots.copy(), self.A.copy())

    def move_to(self, znew):
        znew = complex(znew)
        if znew == self.z:
            return self
        zs, rs, ints, status = kernels.track(self.P.C, [self.z, znew], self.roots, True,
                                             0.125, 60, TOL.min_step, TOL.degenerate_tol)
        if status != kernels.TRACK_OK:
            raise StepUnderflow(f"continuation stalled near {zs[-1]}")
        self.z = znew
        self.roots = rs[-1]
        self.A = self.A + ints[-1]
        return self

    def walk(self, points):
        """Move through ``points`` in order; returns (roots, A) at each."""
        rs, As = [], []
        for p in points:
            self.move_to(p)
            rs.append(self.roots.copy())
            As.append(self.A.copy())
        return np.array(rs), np.array(As)


class HarmonicTuple:
    """Harmonic functions H_nu = 2 Re A_nu + c_nu built from the roots of P.

    ``base_labels`` fixes which root is branch nu at the base point
    (default: the sorted fiber); ``constants`` are the c_nu.
    """

    def __init__(self, P: BivariatePolynomial, base=0.0, base_labels=None, constants=None,
                 singular=None):
        self.P = P
        self.base = complex(base)
        self.singular = singular if singular is not None else discriminant_nodes(P)
        if self._too_close(self.base):
            raise PathHitsSingularSet("base point too close to the singular set")
        fiber = solve_fiber(P, self.base)
        if base_labels is None:
            labels = fiber
        else:
            labels = np.asarray(base_labels, dtype=complex)
            D = np.abs(labels[:, None] - fiber[None, :])
            if labels.shape != fiber.shape or np.any(D.min(axis=1) > 1e-8 * (1 + np.abs(fiber).max())):
                raise InputError("base_labels must be the roots of P at the base point")
            labels = fiber[D.argmin(axis=1)]
            if len(set(D.argmin(axis=1))) != len(fiber):
                raise InputError("base_labels repeat a root")
        self.base_labels = labels
        k = P.degree_y
        self.constants = (np.zeros(k) if constants is None
                          else np.asarray(constants, dtype=float).copy())
        if self.constants.shape != (k,):
            raise InputError("one constant per branch required")
        self._cache = {}
        self._grids = {}
        self._lock = threading.Lock()

    @property
    def k(self):
        return self.P.degree_y

    def _too_close(self, z):
        return len(self.singular) > 0 and (
            self.singular.distance(z) <= self.singular.safety_radius / 2.0)

    def with_constants(self, constants):
        H = HarmonicTuple.__new__(HarmonicTuple)
        H.__dict__.update(self.__dict__)
        H.constants = np.asarray(constants, dtype=float).copy()
        return H

    # paths
    def canonical_path(self, z):
        """Straight segment from the base point, with counterclockwise arc
        detours of radius ``safety_radius`` around singular points it passes."""
        z = complex(z)
        if self._too_close(z):
            raise PathHitsSingularSet(f"{z} within safety_radius/2 of the singular set")
        pts = [self.base]
        R = self.singular.safety_radius
        a, b = self.base, z
        d = b - a
        L2 = abs(d) ** 2
        hits = []
        if L2 > 0 and math.isfinite(R):
            for s in self.singular.points:
                t = ((s - a) * np.conj(d)).real / L2
                if -0.0 < t < 1.0 and abs(a + t * d - s) < R:
                    hits.append((t, complex(s)))
        for t, s in sorted(hits):
            # line-circle intersections
            off = math.sqrt(max(R * R - abs(a + t * d - s) ** 2, 0.0)) / math.sqrt(L2)
            t_in, t_out = t - off, t + off
            th0 = np.angle(a + max(t_in, 0.0) * d - s) if t_in > 0 else np.angle(a - s)
            th1 = np.angle(a + min(t_out, 1.0) * d - s) if t_out < 1 else np.angle(b - s)
            if t_in > 0:
                pts.append(a + t_in * d)
            dth = (th1 - th0) % (2 * np.pi)
            n = max(8, int(math.ceil(dth / (np.pi / 16))))
            r_in = R if t_in > 0 else abs(a - s)
            r_out = R if t_out < 1 else abs(b - s)
            for m in range(1, n):
                frac = m / n
                pts.append(s + (r_in + frac * (r_out - r_in)) * np.exp(1j * (th0 + frac * dth)))
            if t_out < 1:
                pts.append(a + t_out * d)
        pts.append(b)
        return self._refine(np.array(pts, dtype=complex))

    def _refine(self, path):
        """Split segments so each is short relative to its singular distance."""
        if len(self.singular) == 0:
            return path
        out = [path[0]]
        for a, b in zip(path[:-1], path[1:]):
            stack = [(a, b)]
            segs = []
            while stack:
                u, v = stack.pop()
                mid = 0.5 * (u + v)
                if abs(v - u) > 0.2 * self.singular.distance(mid) and abs(v - u) > 1e-9:
                    stack.append((mid, v))
                    stack.append((u, mid))
                else:
                    segs.append(v)
            out.extend(segs)
        return np.array(out, dtype=complex)

    def _track(self, path, roots, A):
        zs, rs, ints, status = kernels.track(self.P.C, path, roots, True, 0.125, 60,
                                             TOL.min_step, TOL.degenerate_tol)
        if status != kernels.TRACK_OK:
            raise QuadratureNoConvergence(f"integration along path stalled near {zs[-1]}")
        return rs[-1], A + ints[-1]

    def _key(self, z):
        return (round(z.real, 13), round(z.imag, 13))

    def state(self, z, path=None):
        """Labelled roots and primitives ``(g, A)`` at ``z``."""
        z = complex(z)
        if path is not None:
            path = np.asarray(path, dtype=complex).ravel()
            if abs(path[0] - self.base) > 1e-12 * (1 + abs(self.base)) or abs(path[-1] - z) > 1e-12 * (1 + abs(z)):
                raise InputError("path must run from the base point to z")
            for v in path:
                if self._too_close(v):
                    raise PathHitsSingularSet(f"path vertex {v} too close to the singular set")
            return self._track(self._refine(path), self.base_labels, np.zeros(self.k, complex))
        key = self._key(z)
        with self._lock:
            hit = self._cache.get(key)
        if hit is not None:
            return hit[0].copy(), hit[1].copy()
        g, A = self._track(self.canonical_path(z), self.base_labels, np.zeros(self.k, complex))
        with self._lock:
            self._cache.setdefault(key, (g.copy(), A.copy()))
        return g, A

    def cursor(self, z):
        g, A = self.state(z)
        return Cursor(self.P, z, g, A)

    # values
    def primitive(self, nu, z, path=None):
        return complex(self.state(z, path)[1][nu])

    def branches(self, z, path=None):
        return self.state(z, path)[0]

    def values(self, z, path=None):
        return 2.0 * self.state(z, path)[1].real + self.constants

    def value(self, nu, z, path=None):
        return float(self.values(z, path)[nu])

    def gradient(self, nu, z, path=None):
        g = self.branches(z, path)[nu]
        return np.array([2.0 * g.real, -2.0 * g.imag])

    def states_along(self, points):
        """Branches and primitives at ``points``, walking a cursor through them."""
        points = np.asarray(points, dtype=complex).ravel()
        cur = self.cursor(points[0])
        return cur.walk(points)

    def values_along(self, points):
        """H values and branches at ``points``, walking a cursor through them."""
        points = np.asarray(points, dtype=complex).ravel()
        cur = self.cursor(points[0])
        rs, As = cur.walk(points)
        return 2.0 * As.real + self.constants, rs

    def grid_state(self, grid: Grid):
        """Branches ``g`` and primitives ``A`` on a grid, shape (k, ny, nx)."""
        with self._lock:
            hit = self._grids.get(grid)
        if hit is None:
            hit = self._grid_state(grid)
            with self._lock:
                self._grids[grid] = hit
        return hit[0].copy(), hit[1].copy()

    def _grid_state(self, grid):
        Z = grid.Z
        if len(self.singular):
            d = np.min(np.abs(Z[..., None] - np.asarray(self.singular.points)[None, None, :]))
            if d <= self.singular.safety_radius / 2.0:
                raise PathHitsSingularSet("grid comes too close to the singular set")
        k = self.k
        ny, nx = grid.shape
        G = np.empty((ny, nx, k), dtype=complex)
        A = np.empty((ny, nx, k), dtype=complex)
        cur = self.cursor(Z[0, 0])
        G[0], A[0] = cur.walk(Z[0])
        step = 1j * grid.h
        C = self.P.C
        for j in range(1, ny):
            z0 = Z[j - 1]
            r0 = G[j - 1]
            z1 = Z[j]
            r1, ok = _batch_step(C, z1, r0, r0)
            acc = np.zeros((nx, k), dtype=complex)
            for t, w in zip(_GL6_T, _GL6_W):
                guess = r0 + t * (r1 - r0)
                rq, okq = _batch_step(C, z0 + t * step, guess, guess)
                ok &= okq
                acc += w * rq
            G[j] = r1
            A[j] = A[j - 1] + 0.5 * step * acc
            bad = np.nonzero(~ok)[0]
            if bad.size:
                rr, ii, st = kernels.track_many(C, z0[bad], r0[bad], z1[bad], True, 0.125,
                                                60, TOL.min_step, TOL.degenerate_tol)
                if np.any(st != 0):
                    raise StepUnderflow("grid continuation stalled")
                G[j, bad] = rr
                A[j, bad] = A[j - 1, bad] + ii
        return np.moveaxis(G, 2, 0), np.moveaxis(A, 2, 0)

    def grid_values(self, grid: Grid):
        """H values (k, ny, nx) and branches (k, ny, nx) on a grid."""
        G, A = self.grid_state(grid)
        return 2.0 * A.real + self.constants[:, None, None], G


def _batch_step(C, z, roots_prev, guess):
    """Solve fibers at points ``z`` warm-started at ``guess`` and label by
    nearest match to ``guess``; returns (roots, ok)."""
    k = C.shape[0] - 1
    # fiber coefficients for all points
    coef = np.empty((len(z), k + 1), dtype=complex)
    for j in range(k + 1):
        coef[:, j] = np.polynomial.polynomial.polyval(z, C[j])
    R, conv = kernels.aberth_batch(coef, guess, 60)
    perm, ok = kernels.match_batch(guess, R, 0.5)
    R = np.take_along_axis(R, perm, axis=1)
    return R, ok & conv & (np.abs(coef[:, -1]) > TOL.degenerate_tol * np.abs(coef).max(axis=1))


# module-level operations ---------------------------------------------------

def primitive(H: HarmonicTuple, nu, z, path=None):
    """A_nu(z) = integral of the continued branch g_nu from the base point."""
    return H.primitive(nu, z, path)


def harmonic_value(H: HarmonicTuple, nu, z, path=None):
    return H.value(nu, z, path)


def harmonic_gradient(H: HarmonicTuple, nu, z, path=None):
    return H.gradient(nu, z, path)


@dataclass
class LevelCurve:
    """Polyline samples of {H_i - H_j = c} with residuals and branch data."""

    indices: tuple | None
    offset: float
    samples: np.ndarray
    residuals: np.ndarray
    s: np.ndarray = None
    branches: np.ndarray | None = field(default=None, repr=False)
    stop_reasons: tuple = ()

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=complex)
        if self.s is None:
            self.s = np.concatenate([[0.0], np.cumsum(np.abs(np.diff(self.samples)))])

    def write_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["s", "re_z", "im_z", "residual"])
            for s, z, r in zip(self.s, self.samples, self.residuals):
                w.writerow([repr(float(s)), repr(float(z.real)), repr(float(z.imag)), repr(float(r))])

    def clip(self, s0, s1):
        m = (self.s >= s0) & (self.s <= s1)
        return LevelCurve(self.indices, self.offset, self.samples[m], self.residuals[m],
                          self.s[m], None if self.branches is None else self.branches[m])


class _PairFunction:
    """f = H_i - H_j - c and its gradient at a cursor."""

    def __init__(self, H, i, j, c):
        self.i, self.j = i, j
        self.shift = H.constants[i] - H.constants[j] - c

    def f(self, cur):
        return 2.0 * (cur.A[self.i] - cur.A[self.j]).real + self.shift

    def grad(self, cur):
        return 2.0 * np.conj(cur.roots[self.i] - cur.roots[self.j])


def _newton(F, cur, tol, max_iter=30, max_move=None):
    z0 = cur.z
    for _ in range(max_iter):
        f = F.f(cur)
        if abs(f) < tol:
            return True
        G = F.grad(cur)
        if abs(G) < TOL.stall_tol:
            return False
        cur.move_to(cur.z - f * G / abs(G) ** 2)
        if max_move is not None and abs(cur.z - z0) > max_move:
            return False
    return abs(F.f(cur)) < tol


def _trace_one_way(F, cur0, sign, budget, max_step, inside):
    """Predictor-corrector tracing from ``cur0`` in one tangent direction."""
    tol = 0.01 * TOL.trace_tol
    cur = cur0.copy()
    pts, res, brs = [], [], []
    s = 0.0
    h = max_step
    kappa = 0.0
    reason = "budget"
    G = F.grad(cur)
    T = sign * 1j * G / abs(G)
    while s < budget:
        h = min(h, budget - s, max_step)
        if kappa > 0:
            h = min(h, 0.1 / kappa)
        if h < 1e-13:
            reason = "step"
            break
        trial = cur.copy()
        try:
            trial.move_to(cur.z + h * T)
            ok = _newton(F, trial, tol, max_iter=8, max_move=0.5 * h)
        except (StepUnderflow, NoConvergence):
            ok = False
        if ok:
            G2 = F.grad(trial)
            if abs(G2) < TOL.stall_tol:
                reason = "stall"
                break
            T2 = sign * 1j * G2 / abs(G2)
            turn = abs(np.angle(T2 / T))
            step = abs(trial.z - cur.z)
            if turn > 0.2 or step > max_step * (1 + 1e-12):
                ok = False
        if not ok:
            h *= 0.5
            continue
        if not inside(trial.z):
            reason = "boundary"
            break
        kappa = turn / max(step, 1e-300)
        s += step
        cur = trial
        T = T2
        pts.append(cur.z)
        res.append(abs(F.f(cur)))
        brs.append(cur.roots.copy())
        h = 2.0 * h
    return pts, res, brs, reason


def trace_level_curve(H: HarmonicTuple, i, j, c, seed, arclength_budget, max_step=None,
                      domain=None, directions=(1, -1)) -> LevelCurve:
    """Trace {H_i - H_j = c} through ``seed`` in both tangent directions.

    Stops at the arclength budget, when leaving ``domain`` (a predicate on
    complex points), or on gradient stall.
    """
    if i == j:
        raise DegenerateCurve("H_i - H_j vanishes identically for i == j")
    F = _PairFunction(H, i, j, c)
    max_step = max_step or arclength_budget / 100.0
    inside = domain or (lambda z: True)
    cur = H.cursor(seed)
    G = F.grad(cur)
    if abs(G) <= TOL.stall_tol:
        raise GradientStall(f"|grad(H_i - H_j)| <= stall_tol at the seed {seed}")
    try:
        ok = _newton(F, cur, 0.01 * TOL.trace_tol, max_move=max(10 * max_step, 0.1 * arclength_budget))
    except (StepUnderflow, NoConvergence):
        ok = False
    if not ok:
        raise SeedNotOnCurve(f"Newton correction from {seed} did not reach the level set")
    parts = {}
    reasons = []
    for sg in directions:
        parts[sg] = _trace_one_way(F, cur, sg, arclength_budget, max_step, inside)
        reasons.append(parts[sg][3])
    back = parts.get(-1, ([], [], [], None))
    fwd = parts.get(1, ([], [], [], None))
    pts = back[0][::-1] + [cur.z] + fwd[0]
    res = back[1][::-1] + [abs(F.f(cur))] + fwd[1]
    brs = back[2][::-1] + [cur.roots.copy()] + fwd[2]
    return LevelCurve((i, j), float(c), np.array(pts), np.array(res), None,
                      np.array(brs), tuple(reasons))


@dataclass(frozen=True)
class Sector:
    apex: complex
    arcs: tuple           # indices into the arc list (clockwise, counterclockwise)
    order: int
    interior: complex
    angles: tuple


def _winding(values):
    ang = np.unwrap(np.angle(np.append(values, values[0])))
    return int(round((ang[-1] - ang[0]) / (2 * np.pi)))


def sector_decomposition(H: HarmonicTuple, center, radius, n_angles=720):
    """Arcs of the level curves {H_i - H_j = (H_i - H_j)(center)} through
    ``center`` and the sectors between consecutive arcs.

    Returns ``(arcs, sectors)``; arcs are ``LevelCurve`` objects traced from
    the exit point on the circle of radius ``radius/2`` inward, sorted by
    exit angle.
    """
    center = complex(center)
    for p in H.singular.points:
        if 1e-9 * (1 + abs(center)) < abs(p - center) < radius:
            raise RadiusTooLarge(f"singular point {p} inside the disk")
    rho = radius / 2.0
    th = 2.0 * np.pi * np.arange(n_angles) / n_angles
    circ = center + rho * np.exp(1j * th)
    cur = H.cursor(circ[0])
    start = cur.copy()
    rs, As = cur.walk(np.append(circ[1:], circ[0]))
    rs = np.vstack([start.roots[None], rs[:-1]])
    As = np.vstack([start.A[None], As[:-1]])
    if np.max(np.abs(cur.roots - start.roots)) > 1e-8 * (1 + np.abs(start.roots).max()):
        raise RadiusTooLarge("branches are permuted around the circle (branch point inside)")
    # winding of g_i - g_j on two radii detects a second critical point
    inner = center + (radius / 4.0) * np.exp(1j * th[::4])
    outer = center + radius * np.exp(1j * th[::4])
    _, r_in = H.values_along(inner)
    _, r_out = H.values_along(outer)
    k = H.k
    arcs = []
    exits = []
    max_step = radius / 50.0

    def inside(z):
        return abs(z - center) <= 1.05 * rho

    for i in range(k):
        for j in range(i + 1, k):
            f = 2.0 * (As[:, i] - As[:, j]).real
            fbar = f.mean()
            scale = np.max(np.abs(f - fbar))
            if scale <= 1e-12 * (1 + np.max(np.abs(f))):
                continue  # constant difference
            if _winding(r_in[:, i] - r_in[:, j]) != _winding(r_out[:, i] - r_out[:, j]):
                raise RadiusTooLarge(f"second critical point of H_{i+1} - H_{j+1} in the disk")
            F = _PairFunction(H, i, j, fbar + H.constants[i] - H.constants[j])
            g = f - fbar
            for m in range(n_angles):
                a, b = g[m], g[(m + 1) % n_angles]
                if a == 0 or a * b < 0:
                    t = 0.0 if a == 0 else a / (a - b)
                    z0 = circ[m] + t * (circ[(m + 1) % n_angles] - circ[m])
                    cur = Cursor(H.P, circ[m], rs[m], As[m]).move_to(z0)
                    if not _newton(F, cur, 0.01 * TOL.trace_tol, max_move=rho * 0.1):
                        raise RadiusTooLarge("could not locate a level-curve exit")
                    Gz = F.grad(cur)
                    T = 1j * Gz / abs(Gz)
                    sign = 1 if _dot(T, center - cur.z) > 0 else -1
                    pts, res, brs, reason = _trace_one_way(
                        F, cur, sign, 3.0 * rho, max_step,
                        lambda z: abs(z - center) >= rho / 25.0 and inside(z))
                    zlast = pts[-1] if pts else cur.z
                    if abs(zlast - center) > rho / 12.0:
                        raise RadiusTooLarge("a level curve re-exits the disk without reaching the center")
                    samples = [cur.z] + pts
                    curve = LevelCurve((i, j), float(fbar), np.array(samples),
                                       np.array([abs(F.f(cur))] + res), None,
                                       np.array([cur.roots.copy()] + brs))
                    arcs.append(curve)
                    exits.append(float(np.angle(cur.z - center) % (2 * np.pi)))
    order = np.argsort(exits, kind="stable")
    arcs = [arcs[o] for o in order]
    exits = [exits[o] for o in order]
    sectors = []
    n = len(arcs)
    for m in range(n):
        a0 = exits[m]
        a1 = exits[(m + 1) % n] if n > 1 else exits[m] + 2 * np.pi
        span = (a1 - a0) % (2 * np.pi) or (2 * np.pi if n == 1 else 0.0)
        mid = a0 + span / 2.0
        sectors.append(Sector(center, (m, (m + 1) % n), m, center + rho * np.exp(1j * mid),
                              (a0, a0 + span)))
    return arcs, sectors


def sector_report(arcs, sectors):
    """JSON-ready description: arcs by exit angle and sector samples."""
    return {
        "arcs": [{"indices": [a.indices[0] + 1, a.indices[1] + 1],
                  "exit_angle": float(np.angle(a.samples[0] - sectors[0].apex) % (2 * np.pi)),
                  "exit_point": [a.samples[0].real, a.samples[0].imag]} for a in arcs],
        "sectors": [{"order": s.order, "arcs": list(s.arcs),
                     "interior": [s.interior.real, s.interior.imag],
                     "angles": list(s.angles)} for s in sectors],
    }


@dataclass(frozen=True)
class TangentialOrder:
    order: tuple   # branch indices by increasing tangential derivative
    flags: tuple   # "strict" / "equal" between consecutive entries
    derivatives: np.ndarray = field(repr=False, default=None)


def tangential_order(H: HarmonicTuple, curve: LevelCurve, window=None) -> TangentialOrder:
    """Order the branches by their tangential derivative along ``curve``."""
    s0, s1 = window if window is not None else (curve.s[0], curve.s[-1])
    m = (curve.s >= s0) & (curve.s <= s1)
    idx = np.nonzero(m)[0]
    if idx.size < 2:
        raise InputError("window holds fewer than two curve samples")
    z = curve.samples
    if curve.branches is not None:
        br = curve.branches
    else:
        _, br = H.values_along(z)
    # polyline tangents (central differences), used for orientation
    Tpoly = np.gradient(z)
    Tpoly = Tpoly / np.abs(Tpoly)
    T = Tpoly
    if curve.indices is not None:
        i, j = curve.indices
        Gp = 2.0 * np.conj(br[:, i] - br[:, j])
        good = np.abs(Gp) > TOL.stall_tol
        Tex = np.where(good, 1j * Gp / np.where(good, np.abs(Gp), 1.0), Tpoly)
        Tex = np.where(_dot(Tex, Tpoly) < 0, -Tex, Tex)
        T = np.where(good, Tex, Tpoly)
    T = T[idx]
    Gall = 2.0 * np.conj(br[idx])            # (n, k)
    D = _dot(Gall, T[:, None])                 # tangential derivatives
    tol = TOL.order_rel * (s1 - s0)
    order = list(np.argsort(D.mean(axis=0), kind="stable"))
    flags = []
    for a, b in zip(order[:-1], order[1:]):
        diff = D[:, b] - D[:, a]
        if np.max(np.abs(diff)) < tol:
            flags.append("equal")
        elif np.min(diff) > 0:
            flags.append("strict")
        else:
            raise OrderNotResolved(
                f"tangential derivatives of H_{a+1} and H_{b+1} change sign in the window")
    return TangentialOrder(tuple(int(o) for o in order), tuple(flags), D)


def write_sector_json(path, arcs, sectors):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(sector_report(arcs, sectors), fh, indent=2)
