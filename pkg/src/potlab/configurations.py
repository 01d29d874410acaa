"""Subharmonic configurations built from a harmonic tuple.

Upper envelopes (maxima over an index set), the collinear normal form with
independent upper/lower index sequences, and grid-based verifiers for the
mean-value inequality, forward-star regions and interface slopes.
"""

from __future__ import annotations

import csv
import itertools
import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import InputError, NotAGraph, NotCollinear
from .harmonic_field import Grid, HarmonicTuple
from .tolerances import TOL

__all__ = [
    "Grid", "CollinearConfiguration", "ConfigurationField", "RegionMask", "EnvelopeRule",
    "SplitRule", "extreme_point_profile", "max_configuration", "envelope_configuration",
    "enumerate_collinear_configurations", "assemble_configuration", "collinear_frame",
    "verify_subharmonic", "verify_forward_star", "interface_lipschitz", "separation_angle",
    "max_adjacent_jump",
]


# convex hull -----------------------------------------------------------------

def _cross(o, a, b):
    return (a.real - o.real) * (b.imag - o.imag) - (a.imag - o.imag) * (b.real - o.real)


def _monotone_chain(pts):
    """Hull vertices (counterclockwise, collinear points dropped)."""
    pts = sorted(set(pts), key=lambda p: (p.real, p.imag))
    if len(pts) <= 2:
        return pts
    lower, upper = [], []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def _seg_dist(p, a, b):
    d = b - a
    L2 = abs(d) ** 2
    if L2 == 0:
        return abs(p - a)
    t = min(1.0, max(0.0, ((p - a) * d.conjugate()).real / L2))
    return abs(p - (a + t * d))


def extreme_point_profile(gradients):
    """Classify each point as ``"extreme"``, ``"on_edge"`` or ``"interior"``
    relative to the convex hull of all points.

    Points within ``hull_tol * diameter`` of a hull vertex count as extreme,
    of a hull edge as on_edge.  All-equal input is flagged on_edge with a
    warning.
    """
    g = [complex(x) for x in gradients]
    if not g:
        raise InputError("need at least one point")
    diam = max(abs(a - b) for a in g for b in g)
    if diam == 0.0:
        warnings.warn("degenerate hull: all points coincide", RuntimeWarning, stacklevel=2)
        return ["on_edge"] * len(g)
    tol = TOL.hull_tol * diam
    hull = _monotone_chain(g)
    # drop vertices that are within tol of the segment joining their neighbours
    changed = True
    while changed and len(hull) > 2:
        changed = False
        for i in range(len(hull)):
            a, b, c = hull[i - 1], hull[i], hull[(i + 1) % len(hull)]
            if _seg_dist(b, a, c) <= tol:
                hull.pop(i)
                changed = True
                break
    edges = [(hull[i], hull[(i + 1) % len(hull)]) for i in range(len(hull))] if len(hull) > 1 else []
    out = []
    for p in g:
        if min(abs(p - v) for v in hull) <= tol:
            out.append("extreme")
        elif edges and min(_seg_dist(p, a, b) for a, b in edges) <= tol:
            out.append("on_edge")
        else:
            out.append("interior")
    return out


def separation_angle(gradients, nu):
    """delta = min over other indices of (pi/2 - |arg(g_nu - g_other)|).

    Positive when ``g_nu`` has strictly the largest real part; the interface
    of {V = H_nu} is then Lipschitz with constant at most cot(delta).
    """
    g = np.asarray(gradients, dtype=complex)
    others = np.delete(g, nu)
    return float(np.min(np.pi / 2 - np.abs(np.angle(g[nu] - others))))


# fields -----------------------------------------------------------------------

@dataclass(frozen=True)
class EnvelopeRule:
    """V = max (or min) over ``indices`` (0-based)."""

    indices: tuple
    kind: str = "max"

    def apply(self, Hv, Z=None):
        idx = list(self.indices)
        sub = Hv[idx]
        pick = np.argmax(sub, axis=0) if self.kind == "max" else np.argmin(sub, axis=0)
        V = np.take_along_axis(sub, pick[None], axis=0)[0]
        return V, np.asarray(idx)[pick]


@dataclass(frozen=True)
class SplitRule:
    """Max over ``upper`` left of the line ``center + t*direction``, over ``lower`` right of it."""

    center: complex
    direction: complex
    upper: tuple
    lower: tuple
    kind = "max"

    def apply(self, Hv, Z):
        Z = np.asarray(Z, dtype=complex)
        up = ((Z - self.center) * np.conj(1j * self.direction)).real >= 0
        Vu, au = EnvelopeRule(self.upper).apply(Hv)
        Vl, al = EnvelopeRule(self.lower).apply(Hv)
        return np.where(up, Vu, Vl), np.where(up, au, al)


@dataclass
class RegionMask:
    grid: Grid
    mask: np.ndarray

    def __post_init__(self):
        self.mask = np.asarray(self.mask, dtype=bool)
        if self.mask.shape != self.grid.shape:
            raise InputError(f"mask shape {self.mask.shape} does not match grid {self.grid.shape}")


@dataclass
class ConfigurationField:
    """V and the index of the active harmonic function on a grid.

    ``active`` holds 0-based branch indices; the CSV export writes them
    1-based.  ``H`` carries the constants used, ``rule`` evaluates the same
    configuration exactly at arbitrary points.
    """

    grid: Grid
    V: np.ndarray
    active: np.ndarray
    H: HarmonicTuple = field(repr=False, default=None)
    rule: object = None
    Hvals: np.ndarray = field(repr=False, default=None)
    branches: np.ndarray = field(repr=False, default=None)

    def region(self, nu) -> RegionMask:
        return RegionMask(self.grid, self.active == nu)

    def evaluate(self, z):
        """Exact (V, active) at a point via the harmonic tuple."""
        z = complex(z)
        V, a = self.rule.apply(self.H.values(z)[:, None], np.array([z]))
        return float(V[0]), int(a[0])

    def evaluate_many(self, points):
        pts = np.asarray(points, dtype=complex).ravel()
        Hv, br = self.H.values_along(pts)
        V, a = self.rule.apply(Hv.T, pts)
        return V, a, br

    def write_csv(self, path):
        Z = self.grid.Z
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "y", "V", "active_index"])
            for z, v, a in zip(Z.ravel(), self.V.ravel(), self.active.ravel()):
                w.writerow([repr(float(z.real)), repr(float(z.imag)), repr(float(v)), int(a) + 1])


def _field(H, grid, rule):
    Hv, br = H.grid_values(grid)
    V, active = rule.apply(Hv, grid.Z)
    return ConfigurationField(grid, V, active, H, rule, Hv, br)


def _check_indices(H, index_set):
    idx = tuple(int(i) for i in index_set)
    if not idx or any(i < 0 or i >= H.k for i in idx) or len(set(idx)) != len(idx):
        raise InputError(f"bad index set {index_set!r} for k = {H.k}")
    return tuple(sorted(idx))


def max_configuration(H: HarmonicTuple, index_set, grid: Grid) -> ConfigurationField:
    """V = max over ``index_set`` (0-based) of H_nu + c_nu; ties go to the smallest index."""
    return _field(H, grid, EnvelopeRule(_check_indices(H, index_set), "max"))


def envelope_configuration(H: HarmonicTuple, index_set, grid: Grid, kind="max"):
    """Upper (``kind="max"``) or inverted (``"min"``) envelope over ``index_set``."""
    if kind not in ("max", "min"):
        raise InputError("kind must be 'max' or 'min'")
    return _field(H, grid, EnvelopeRule(_check_indices(H, index_set), kind))


# collinear normal form --------------------------------------------------------

@dataclass(frozen=True)
class CollinearConfiguration:
    """Two index sequences 1 = j_1 < ... < j_m = k (1-based positions in
    the order of increasing gradient projection)."""

    upper: tuple
    lower: tuple

    def __post_init__(self):
        for seq in (self.upper, self.lower):
            if len(seq) < 2 or seq[0] != 1 or any(b <= a for a, b in zip(seq[:-1], seq[1:])):
                raise InputError(f"sequence {seq} must increase strictly from 1 to k")
        if self.upper[-1] != self.lower[-1]:
            raise InputError("both halves must end at the same k")

    @property
    def k(self):
        return self.upper[-1]

    def uses(self, position):
        return position in self.upper or position in self.lower

    def to_dict(self):
        return {"upper": list(self.upper), "lower": list(self.lower)}


def enumerate_collinear_configurations(k):
    """All 4**(k-2) pairs of sequences, lexicographic in (upper, lower)."""
    if k < 2:
        raise InputError("k >= 2 required")
    middle = range(2, k)
    seqs = sorted((1,) + sub + (k,) for r in range(k - 1)
                  for sub in itertools.combinations(middle, r))
    return [CollinearConfiguration(u, l) for u in seqs for l in seqs]


def collinear_frame(H: HarmonicTuple, center=0.0):
    """Direction ``d`` and branch order for collinear gradients at ``center``.

    Returns ``(d, order)`` where ``order[p]`` is the 0-based branch at
    1-based position ``p + 1`` (increasing projection of the gradient on d).
    ``d`` is chosen with argument in (-pi/2, pi/2].
    """
    G = 2.0 * np.conj(H.branches(center))
    scale = np.max(np.abs(G - G.mean())) if len(G) > 1 else 0.0
    if scale == 0.0:
        raise NotCollinear("gradients coincide; the normal form needs distinct gradients")
    a, b = np.unravel_index(np.argmax(np.abs(G[:, None] - G[None, :])), (len(G), len(G)))
    d = (G[b] - G[a]) / abs(G[b] - G[a])
    if not (-np.pi / 2 < np.angle(d) <= np.pi / 2 + 1e-15):
        d = -d
    off = np.abs(((G - G[a]) * np.conj(d)).imag)
    if off.max() > TOL.collinear_tol * (1 + np.abs(G).max()):
        raise NotCollinear(f"gradients are not collinear (offset {off.max():.3e})")
    proj = ((G - G[a]) * np.conj(d)).real
    order = np.argsort(proj, kind="stable")
    gaps = np.diff(proj[order])
    if np.any(gaps <= TOL.collinear_tol * (1 + np.abs(G).max())):
        raise NotCollinear("two gradients coincide; distinct gradients required")
    return complex(d), tuple(int(o) for o in order)


def assemble_configuration(H: HarmonicTuple, cfg: CollinearConfiguration, grid: Grid,
                           center=0.0) -> ConfigurationField:
    """Configuration from a pair of position sequences.

    Constants are reset so that every H_nu vanishes at ``center``.  The upper
    half is the side to the left of the gradient direction.
    """
    if cfg.k != H.k:
        raise InputError(f"configuration is for k = {cfg.k}, tuple has k = {H.k}")
    d, order = collinear_frame(H, center)
    A = H.state(center)[1]
    Hc = H.with_constants(-2.0 * A.real)
    rule = SplitRule(complex(center), d, tuple(order[p - 1] for p in cfg.upper),
                     tuple(order[p - 1] for p in cfg.lower))
    return _field(Hc, grid, rule)


# verifiers --------------------------------------------------------------------

def _mv_tol(F: ConfigurationField):
    V, act, h = F.V, F.active, F.grid.h
    worst = 0.0
    # second differences only over stencils inside one smooth piece
    same = (act[:, :-2] == act[:, 1:-1]) & (act[:, 1:-1] == act[:, 2:])
    dxx = (V[:, :-2] - 2 * V[:, 1:-1] + V[:, 2:]) / h ** 2
    if same.any():
        worst = max(worst, np.abs(dxx[same]).max())
    same = (act[:-2] == act[1:-1]) & (act[1:-1] == act[2:])
    dyy = (V[:-2] - 2 * V[1:-1] + V[2:]) / h ** 2
    if same.any():
        worst = max(worst, np.abs(dyy[same]).max())
    return 1e-9 + 10.0 * h ** 2 * worst


def verify_subharmonic(F: ConfigurationField, radii=(1, 2, 4)):
    """Discrete mean-value check ``V(p) <= mean over circle + mv_tol``.

    Returns ``{"pass", "mv_tol", "violations": [{x, y, radius, deficit}]}``
    with radii in grid units.
    """
    tol = _mv_tol(F)
    D = kernels.circle_deficits(F.V, [float(r) for r in radii], TOL.mv_samples)
    Z = F.grid.Z
    viol = []
    for ir, r in enumerate(radii):
        jj, ii = np.nonzero(np.nan_to_num(D[ir], nan=-np.inf) > tol)
        for j, i in zip(jj, ii):
            viol.append({"x": float(Z[j, i].real), "y": float(Z[j, i].imag), "node": [int(i), int(j)],
                         "radius": float(r * F.grid.h), "deficit": float(D[ir, j, i])})
    return {"pass": not viol, "mv_tol": tol, "violations": viol}


def verify_forward_star(mask: RegionMask, direction) -> bool:
    """True when every ray ``p + t*direction`` (t > 0) from a marked node stays
    in the mask, tolerating nodes adjacent to a marked node."""
    M = mask.mask
    if not M.any():
        raise InputError("empty mask")
    d = complex(*direction) if not isinstance(direction, complex) else direction
    if abs(d) == 0:
        raise InputError("direction must be nonzero")
    d = d / abs(d)
    ny, nx = M.shape
    pad = np.pad(M, 1)
    band = np.zeros_like(M)
    for dj in (-1, 0, 1):
        for di in (-1, 0, 1):
            band |= pad[1 + dj:1 + dj + ny, 1 + di:1 + di + nx]
    jj, ii = np.nonzero(M)
    step = 1.0 / max(abs(d.real), abs(d.imag))
    m = 1
    alive = np.ones(jj.size, dtype=bool)
    while alive.any():
        ri = ii + np.rint(m * step * d.real).astype(int)
        rj = jj + np.rint(m * step * d.imag).astype(int)
        inside = (ri >= 0) & (ri < nx) & (rj >= 0) & (rj < ny)
        alive &= inside
        if not alive.any():
            break
        if not band[rj[alive], ri[alive]].all():
            return False
        m += 1
    return True


def interface_lipschitz(F: ConfigurationField, nu, delta=None):
    """Largest slope |d rho/dy| of the interface x = rho(y) bounding {active = nu}.

    Crossings are located between nodes by linear interpolation of
    H_nu minus the competing envelope.  Returns ``(estimate, bound)`` where
    ``bound = cot(delta) + 2`` (grid slack) when ``delta`` is given.
    """
    act = F.active
    M = act == nu
    ny, nx = M.shape
    x = F.grid.x
    idx = [i for i in (F.rule.indices if isinstance(F.rule, EnvelopeRule) else range(F.H.k))]
    others = [i for i in idx if i != nu]
    side = None
    rho = np.full(ny, np.nan)
    for j in range(ny):
        row = M[j]
        if row.all() or not row.any():
            continue
        t = np.nonzero(np.diff(row.astype(int)))[0]
        if t.size != 1:
            raise NotAGraph(f"row {j} crosses the interface {t.size} times")
        s = "right" if row[-1] else "left"
        if side is None:
            side = s
        elif s != side:
            raise NotAGraph("region changes side of its interface")
        i = t[0]
        if F.Hvals is not None and others:
            comp = F.Hvals[others][:, j, i:i + 2].max(axis=0)
            f = F.Hvals[nu, j, i:i + 2] - comp
            w = f[0] / (f[0] - f[1]) if f[0] != f[1] else 0.5
            w = min(max(w, 0.0), 1.0)
        else:
            w = 0.5
        rho[j] = x[i] + w * F.grid.h
    ok = ~np.isnan(rho)
    pairs = ok[:-1] & ok[1:]
    if not pairs.any():
        raise NotAGraph("interface does not span two consecutive scanlines")
    est = float(np.max(np.abs(np.diff(rho))[pairs]) / F.grid.h)
    bound = None if delta is None else (1.0 / math.tan(delta) if delta > 0 else math.inf) + 2.0
    return est, bound


def max_adjacent_jump(F: ConfigurationField):
    """Largest |V(p) - V(q)| over horizontally or vertically adjacent nodes."""
    return float(max(np.abs(np.diff(F.V, axis=0)).max(), np.abs(np.diff(F.V, axis=1)).max()))


def write_report(path, report):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2)
