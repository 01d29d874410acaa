"""Branch-cut measures on embedded trees.

For P(y) = y + c_2 y^2 + ... + c_k y^k the curve z P(y) = 1 has a branch
alpha*(z) = 1/z + O(1/z^2) near infinity.  Cutting the plane along a tree
that joins the critical values sigma and the origin makes alpha* single
valued, and the jump across each arc defines a (complex) measure
``(i / 2 pi) (alpha_+ - alpha_-) dz``.  This module computes that measure,
scores it (mass, total variation, positivity defect) and searches for trees
whose measure is positive.
"""

from __future__ import annotations

import csv
import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.spatial import cKDTree

from . import kernels
from .algebraic_core import BivariatePolynomial, solve_fiber
from .errors import (AmbiguousExteriorBranch, ContinuationBlocked, CriticalValueAtPole,
                     DegenerateCritical, InputError, InvalidTree, PotlabError,
                     SideCollision, StepUnderflow)
from .riesz_measure import gauss_jacobi_rule
from .tolerances import TOL, cluster_tol

__all__ = [
    "univariate_coeffs", "critical_values", "ExteriorBranch", "exterior_branch", "Edge",
    "AnalyticTree", "TreeMeasure", "tree_measure", "TreeScore", "score_tree", "SearchResult",
    "search_tree", "hausdorff", "star_tree",
]


def univariate_coeffs(py):
    """Coefficients c_0..c_k (ascending) of P(y); requires c_0 = 0, c_1 != 0."""
    c = np.atleast_1d(np.asarray(py, dtype=complex))
    c = np.trim_zeros(c, "b")
    if c.size < 2 or c[0] != 0 or c[1] == 0:
        raise InputError("P(y) must have the form c_1 y + c_2 y^2 + ... with c_1 != 0")
    return c


def _bivariate(py):
    return BivariatePolynomial.from_univariate(univariate_coeffs(py))


def critical_values(py):
    """sigma = {1/P(a) : P'(a) = 0}, k - 1 points sorted by (Re, Im)."""
    c = univariate_coeffs(py)
    k = c.size - 1
    if k == 1:
        return np.zeros(0, dtype=complex)
    P = np.polynomial.Polynomial(c)
    dP = P.deriv()
    a = dP.roots().astype(complex)
    d2P = dP.deriv()
    for _ in range(3):  # Newton polish
        step = dP(a) / np.where(d2P(a) == 0, 1, d2P(a))
        a = a - step
    scale = 1.0 + np.abs(a).max()
    if a.size > 1:
        gaps = np.abs(a[:, None] - a[None, :])
        gaps[np.eye(a.size, dtype=bool)] = np.inf
        if gaps.min() < 1e-8 * scale:
            raise DegenerateCritical("P' has a multiple root")
    vals = P(a)
    if np.any(np.abs(vals) < 1e-14 * np.abs(c).sum() * scale ** k):
        raise CriticalValueAtPole("P vanishes at a critical point; 1/P(a) undefined")
    sigma = 1.0 / vals
    order = np.lexsort((np.round(sigma.imag, 9), np.round(sigma.real, 9)))
    return sigma[order]


@dataclass(frozen=True)
class ExteriorBranch:
    P: BivariatePolynomial
    R: float
    value: complex        # alpha*(R)
    a2: complex           # second Laurent coefficient
    residual: float       # max |z alpha*(z) - 1| on |z| = R


def _pick_exterior(P, z):
    roots = solve_fiber(P, z)
    target = 1.0 / z
    d = np.abs(roots - target)
    order = np.argsort(d)
    if roots.size > 1 and d[order[1]] < 0.1 * abs(target):
        raise AmbiguousExteriorBranch(f"two roots within 10% of 1/z at z = {z}")
    return roots, int(order[0])


def exterior_branch(py, R) -> ExteriorBranch:
    """Select alpha* at z = R and check it on the circle |z| = R.

    ``a2`` is the mean of ``alpha*(z) z^2 - z`` over 64 points of the
    circle (the coefficient of 1/z^2 in the Laurent series).
    """
    P = _bivariate(py)
    sigma = critical_values(py)
    if sigma.size and R <= 2 * np.abs(sigma).max():
        raise InputError("R must exceed 2 max|sigma|")
    roots, i = _pick_exterior(P, complex(R))
    n = 64
    circ = R * np.exp(2j * np.pi * np.arange(n + 1) / n)
    zs, rs, _, st = kernels.track(P.C, circ, roots, False, 0.5, 60, TOL.min_step,
                                  TOL.degenerate_tol)
    if st != kernels.TRACK_OK:
        raise StepUnderflow("continuation around |z| = R failed")
    on = np.array([np.argmin(np.abs(zs - p)) for p in circ[:-1]])
    alpha = rs[on, i]
    z = zs[on]
    res = float(np.max(np.abs(z * alpha - 1.0)))
    if res >= 0.5:
        raise AmbiguousExteriorBranch(f"|z alpha - 1| = {res:.3g} on |z| = R")
    a2 = complex(np.mean(alpha * z * z - z))
    return ExteriorBranch(P, float(R), complex(roots[i]), a2, res)


# trees ------------------------------------------------------------------------

@dataclass
class Edge:
    """Arc from node ``a`` to node ``b``: natural cubic spline through
    ``[node_a, *ctrl, node_b]``, parametrised by chord length on [0, 1]."""

    a: int
    b: int
    ctrl: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=complex))

    def __post_init__(self):
        self.ctrl = np.asarray(self.ctrl, dtype=complex).ravel()

    def spline(self, nodes):
        pts = np.concatenate([[nodes[self.a]], self.ctrl, [nodes[self.b]]])
        ch = np.concatenate([[0.0], np.cumsum(np.abs(np.diff(pts)))])
        if ch[-1] == 0 or np.any(np.diff(ch) == 0):
            raise InvalidTree("edge has coincident control points")
        return CubicSpline(ch / ch[-1], pts, bc_type="natural")

    def to_dict(self):
        return {"a": self.a, "b": self.b, "ctrl": [[c.real, c.imag] for c in self.ctrl]}


def _cross2(a, b):
    return a.real * b.imag - a.imag * b.real


def _segments_cross(p0, p1, q0, q1):
    """Proper crossings between segments p and q (broadcast)."""
    d1, d2 = p1 - p0, q1 - q0
    den = _cross2(d1, d2)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = _cross2(q0 - p0, d2) / den
        u = _cross2(q0 - p0, d1) / den
    return (den != 0) & (t >= 0) & (t <= 1) & (u >= 0) & (u <= 1)


def _point_seg_dist(z, p0, p1):
    d = p1 - p0
    L2 = np.abs(d) ** 2
    L2 = np.where(L2 == 0, 1.0, L2)
    t = np.clip(((z[..., None] - p0) * np.conj(d)).real / L2, 0, 1)
    return np.abs(z[..., None] - (p0 + t * d)).min(axis=-1)


@dataclass
class AnalyticTree:
    nodes: np.ndarray
    edges: list

    def __post_init__(self):
        self.nodes = np.asarray(self.nodes, dtype=complex).ravel()
        self._poly = None

    @property
    def diameter(self):
        return float(np.max(np.abs(self.nodes[:, None] - self.nodes[None, :]))) if len(self.nodes) > 1 else 0.0

    def polylines(self, n=96):
        if self._poly is None or self._poly[0] != n:
            u = np.linspace(0, 1, n)
            self._poly = (n, [e.spline(self.nodes)(u) for e in self.edges])
        return self._poly[1]

    def to_json(self):
        return {"nodes": [[z.real, z.imag] for z in self.nodes],
                "edges": [e.to_dict() for e in self.edges]}

    @classmethod
    def from_json(cls, d):
        if isinstance(d, str):
            d = json.loads(d)
        nodes = [complex(*p) for p in d["nodes"]]
        edges = [Edge(int(e["a"]), int(e["b"]), [complex(*c) for c in e.get("ctrl", [])])
                 for e in d["edges"]]
        return cls(nodes, edges)

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json(), fh, indent=2)

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))

    def validate(self, required=()):
        """Check tree structure, required nodes and a planar simple embedding."""
        n = len(self.nodes)
        if n == 0 or not self.edges:
            raise InvalidTree("tree needs nodes and edges")
        if len(self.edges) != n - 1:
            raise InvalidTree(f"{len(self.edges)} edges for {n} nodes: not a tree")
        parent = list(range(n))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for e in self.edges:
            if not (0 <= e.a < n and 0 <= e.b < n) or e.a == e.b:
                raise InvalidTree(f"bad edge ({e.a}, {e.b})")
            ra, rb = find(e.a), find(e.b)
            if ra == rb:
                raise InvalidTree("edges form a cycle")
            parent[ra] = rb
        scale = 1.0 + np.abs(self.nodes).max()
        for p in np.atleast_1d(required):
            if np.min(np.abs(self.nodes - p)) > cluster_tol(abs(p)):
                raise InvalidTree(f"required node {p} missing")
        tol = TOL.embed_tol * scale
        polys = self.polylines()
        segs = [(p[:-1], p[1:]) for p in polys]
        for ie, (p0, p1) in enumerate(segs):
            m = len(p0)
            X = _segments_cross(p0[:, None], p1[:, None], p0[None, :], p1[None, :])
            idx = np.arange(m)
            X &= np.abs(idx[:, None] - idx[None, :]) > 1
            if X.any():
                raise InvalidTree(f"edge {ie} is not simple")
        for ie, je in itertools.combinations(range(len(self.edges)), 2):
            e, f = self.edges[ie], self.edges[je]
            p0, p1 = segs[ie]
            q0, q1 = segs[je]
            X = _segments_cross(p0[:, None], p1[:, None], q0[None, :], q1[None, :])
            shared = {e.a, e.b} & {f.a, f.b}
            for s in shared:
                i = 0 if e.a == s else len(p0) - 1
                j = 0 if f.a == s else len(q0) - 1
                X[i, j] = False
            if X.any():
                raise InvalidTree(f"edges {ie} and {je} cross")
        for v in range(n):
            for ie, e in enumerate(self.edges):
                if v in (e.a, e.b):
                    continue
                p0, p1 = segs[ie]
                if _point_seg_dist(np.array([self.nodes[v]]), p0, p1)[0] <= tol:
                    raise InvalidTree(f"node {v} lies on edge {ie}")
        return True


def star_tree(sigma, ctrl_per_edge=2):
    """Straight segments from 0 to each point of sigma."""
    nodes = np.concatenate([[0j], np.asarray(sigma, dtype=complex)])
    t = np.arange(1, ctrl_per_edge + 1) / (ctrl_per_edge + 1)
    edges = [Edge(0, i, nodes[i] * t) for i in range(1, len(nodes))]
    return AnalyticTree(nodes, edges)


# tree measure -----------------------------------------------------------------

@dataclass
class EdgeMeasure:
    edge: int
    u: np.ndarray
    W: np.ndarray          # Gauss-Jacobi weights on [0, 1]
    z: np.ndarray
    dz: np.ndarray         # dz/du
    alpha_plus: np.ndarray
    alpha_minus: np.ndarray
    density: np.ndarray    # complex, per unit u
    exponents: tuple

    @property
    def arclength_density(self):
        return self.density / np.abs(self.dz)


@dataclass
class TreeMeasure:
    tree: AnalyticTree
    edges: list

    def mass(self):
        return complex(sum(np.sum(e.W * e.density) for e in self.edges))

    def cauchy_transform(self, z):
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        out = np.zeros(z.shape, dtype=complex)
        for e in self.edges:
            out += ((e.W * e.density)[None, :] / (z[:, None] - e.z[None, :])).sum(axis=1)
        return out

    def to_measure(self):
        """Nonnegative ``Measure`` (raises if the densities are not real and >= 0)."""
        from .riesz_measure import Arc, Measure
        arcs = []
        for e in self.edges:
            rho = e.arclength_density
            scale = np.abs(rho).max()
            if np.any(np.abs(rho.imag) > 1e-8 * scale) or np.any(rho.real < -1e-8 * scale):
                raise InputError("tree measure is not real and nonnegative")
            sp = self.tree.edges[e.edge]
            arcs.append(Arc(e.z, np.maximum(rho.real, 0), e.W * np.abs(e.dz), "gauss_jacobi",
                            e.exponents[0], e.exponents[1],
                            (self.tree.nodes[sp.a], self.tree.nodes[sp.b])))
        return Measure([], arcs)

    def write_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["edge", "u", "re_z", "im_z", "weight", "re_density", "im_density"])
            for e in self.edges:
                rho = e.arclength_density
                for u, z, W, r in zip(e.u, e.z, e.W * np.abs(e.dz), rho):
                    w.writerow([e.edge, repr(float(u)), repr(float(z.real)), repr(float(z.imag)),
                                repr(float(W)), repr(float(r.real)), repr(float(r.imag))])


def _node_exponent(z, sigma, k):
    if abs(z) <= cluster_tol(0.0):
        return -1.0 / k
    if sigma.size and np.min(np.abs(sigma - z)) <= cluster_tol(abs(z)):
        return 0.5
    return 0.0


def _edge_rule(n, ea, eb, k):
    """Nodes and weights on [0, 1] for an arc with endpoint exponents.

    At the origin the branches expand in powers of z**(1/k); substituting
    u = v**k there makes the integrand smooth in v, with a Gauss-Jacobi rule
    in v carrying the other endpoint's exponent.
    """
    at0 = ea == -1.0 / k
    at1 = eb == -1.0 / k
    if at0 and k > 1:
        v, Wv = gauss_jacobi_rule(n, 0.0, eb)
        return v ** k, Wv * k * v ** (k - 1)
    if at1 and k > 1:
        v, Wv = gauss_jacobi_rule(n, 0.0, ea)
        return (1.0 - v ** k)[::-1], (Wv * k * v ** (k - 1))[::-1]
    return gauss_jacobi_rule(n, ea, eb)


def _edge_nodes(knots, n, ea, eb, k):
    """Composite rule over the spline pieces (the arc is only C^2 at knots)."""
    pieces = len(knots) - 1
    m = max(12, -(-n // pieces)) if pieces > 1 else n
    us, Ws = [], []
    for i in range(pieces):
        a = ea if i == 0 else 0.0
        b = eb if i == pieces - 1 else 0.0
        u, W = _edge_rule(m, a, b, k)
        h = knots[i + 1] - knots[i]
        us.append(knots[i] + h * u)
        Ws.append(h * W)
    return np.concatenate(us), np.concatenate(Ws)


class _Router:
    """Straight rays from far outside to points next to the tree."""

    def __init__(self, tree, R_ext):
        polys = tree.polylines()
        self.s0 = np.concatenate([p[:-1] for p in polys])
        self.s1 = np.concatenate([p[1:] for p in polys])
        self.R = R_ext

    def blocked(self, a, b):
        """Does any segment a[i] -> b[i] cross the tree?"""
        a = np.atleast_1d(a)
        b = np.atleast_1d(b)
        X = _segments_cross(a[:, None], b[:, None], self.s0[None, :], self.s1[None, :])
        return X.any(axis=1)

    def ray(self, w, d):
        # far point on |z| = R along w + t d
        B = 2 * (w * np.conj(d)).real
        C = abs(w) ** 2 - self.R ** 2
        t = (-B + math.sqrt(B * B - 4 * C)) / 2
        return w + t * d


def _side_polyline(sp, u, eps, side):
    """Offset points for nodes ``u``, densified until chords stay within eps/4."""
    def off(uu):
        d = sp(uu, 1)
        return sp(uu) + side * eps * 1j * d / np.abs(d)

    us = np.asarray(u, dtype=float)
    lo, hi = us[:-1], us[1:]
    w_lo, w_hi = off(lo), off(hi)
    extra = []
    for _ in range(40):
        if lo.size == 0:
            break
        mid = 0.5 * (lo + hi)
        wm = off(mid)
        bad = (np.abs(wm - 0.5 * (w_lo + w_hi)) > eps / 4) & (hi - lo > 1e-12)
        extra.append(mid[bad])
        lo, hi = np.concatenate([lo[bad], mid[bad]]), np.concatenate([mid[bad], hi[bad]])
        w_lo, w_hi = np.concatenate([w_lo[bad], wm[bad]]), np.concatenate([wm[bad], w_hi[bad]])
    us = np.sort(np.concatenate([us] + extra))
    return us, off(us)


def _sample_index(zs, pts):
    return np.argmin(np.abs(zs[None, :] - np.asarray(pts)[:, None]), axis=1)


def _track(C, path, roots):
    zs, rs, _, st = kernels.track(C, np.asarray(path, dtype=complex), roots, False, 0.5, 60,
                                  TOL.min_step, TOL.degenerate_tol)
    if st != kernels.TRACK_OK:
        raise StepUnderflow(f"continuation stalled near {zs[-1]}")
    return zs, rs


def tree_measure(T: AnalyticTree, py, n=32, R=None) -> TreeMeasure:
    """Jump measure of alpha* across the arcs of ``T``.

    Each side of each arc is reached by a straight ray from |z| = R_ext
    that avoids the tree, followed by a walk along the side curve offset by
    ``side_eps`` and a final perpendicular step onto the arc.  The two
    boundary values give the density ``(i/2 pi)(alpha_+ - alpha_-) z'(u)``,
    with ``+`` the side to the left of the arc direction.
    """
    c = univariate_coeffs(py)
    k = c.size - 1
    P = BivariatePolynomial.from_univariate(c)
    sigma = critical_values(c)
    T.validate(np.concatenate([sigma, [0j]]))
    pts = np.concatenate(T.polylines())
    R_ext = max(R or 0.0, 2.0 * np.abs(pts).max() + 1.0)
    router = _Router(T, R_ext)
    C = P.C
    out = []
    for ie, e in enumerate(T.edges):
        sp = e.spline(T.nodes)
        ea = _node_exponent(T.nodes[e.a], sigma, k)
        eb = _node_exponent(T.nodes[e.b], sigma, k)
        u, W = _edge_nodes(sp.x, n, ea, eb, k)
        z = sp(u)
        dz = sp(u, 1)
        L = float(np.sum(np.abs(np.diff(sp(np.linspace(0, 1, 257))))))
        eps = TOL.side_eps_rel * L
        vals = {}
        for side in (1, -1):
            us, w = _side_polyline(sp, u, eps, side)
            # the side walk must stay off the tree
            if router.blocked(w[:-1], w[1:]).any():
                raise SideCollision(f"side curve of edge {ie} crosses the tree")
            others = [p for j, p in enumerate(T.polylines()) if j != ie]
            if others:
                op = np.concatenate(others)
                if np.min(np.abs(w[:, None] - op[None, :])) < eps / 2:
                    raise SideCollision(f"side_eps too large near the ends of edge {ie}")
            node_pos = np.searchsorted(us, u)
            entry = None
            order = [n // 2, n // 4, (3 * n) // 4] + list(range(n))
            for m in order:
                wm = w[node_pos[m]]
                nrm = side * 1j * dz[m] / abs(dz[m])
                for ang in (0.0, 0.3, -0.3, 0.6, -0.6, 0.9, -0.9, 1.2, -1.2, 1.5, -1.5):
                    d = nrm * np.exp(1j * ang)
                    far = router.ray(wm, d)
                    start = wm + 0.5 * eps * d
                    if not router.blocked(np.array([start]), np.array([far]))[0]:
                        entry = (m, far)
                        break
                if entry is not None:
                    break
            if entry is None:
                raise ContinuationBlocked(f"no free ray reaches side {side:+d} of edge {ie}")
            m0, far = entry
            roots, i0 = _pick_exterior(P, far)
            j0 = node_pos[m0]
            _, rs = _track(C, [far, w[j0]], roots)
            r_entry = rs[-1]
            side_roots = np.empty((len(us), k), dtype=complex)
            side_roots[j0] = r_entry
            if j0 < len(us) - 1:
                zs, rs = _track(C, w[j0:], r_entry)
                side_roots[j0 + 1:] = rs[_sample_index(zs, w[j0 + 1:])]
            if j0 > 0:
                zs, rs = _track(C, w[j0::-1], r_entry)
                side_roots[:j0] = rs[_sample_index(zs, w[:j0])]
            rr, _, st = kernels.track_many(C, w[node_pos], side_roots[node_pos], z, False, 0.5, 60,
                                           TOL.min_step, TOL.degenerate_tol)
            if np.any(st != 0):
                raise StepUnderflow(f"step onto edge {ie} stalled")
            vals[side] = rr[:, i0]
        dens = (1j / (2 * np.pi)) * (vals[1] - vals[-1]) * dz
        out.append(EdgeMeasure(ie, u, W, z, dz, vals[1], vals[-1], dens, (ea, eb)))
    return TreeMeasure(T, out)


@dataclass(frozen=True)
class TreeScore:
    mass: complex
    total_variation: float
    positivity_defect: float

    @property
    def objective(self):
        return self.positivity_defect + abs(self.mass - 1.0)


def score_tree(tm: TreeMeasure) -> TreeScore:
    """Mass, total variation and positivity defect by the stored Gauss-Jacobi rules."""
    mass = 0j
    tv = 0.0
    defect = 0.0
    for e in tm.edges:
        mass += np.sum(e.W * e.density)
        tv += np.sum(e.W * np.abs(e.density))
        defect += np.sum(e.W * (np.maximum(0.0, -e.density.real) + np.abs(e.density.imag)))
    return TreeScore(complex(mass), float(tv), float(defect))


# search -----------------------------------------------------------------------

def _prufer_trees(n):
    """All labelled trees on n nodes as edge lists."""
    if n == 1:
        return [[]]
    if n == 2:
        return [[(0, 1)]]
    out = []
    for code in itertools.product(range(n), repeat=n - 2):
        deg = [1] * n
        for c in code:
            deg[c] += 1
        edges = []
        for c in code:
            leaf = min(i for i in range(n) if deg[i] == 1)
            edges.append((leaf, c))
            deg[leaf] -= 1
            deg[c] -= 1
        u, v = [i for i in range(n) if deg[i] == 1]
        edges.append((u, v))
        out.append(sorted(tuple(sorted(e)) for e in edges))
    return out


def _topologies(n_fixed, max_steiner):
    """Trees on fixed nodes plus s <= max_steiner Steiner nodes of degree >= 3."""
    tops = []
    for s in range(max_steiner + 1):
        n = n_fixed + s
        for edges in _prufer_trees(n):
            deg = np.zeros(n, dtype=int)
            for a, b in edges:
                deg[a] += 1
                deg[b] += 1
            if np.all(deg[n_fixed:] >= 3):
                tops.append((s, edges))
    return tops


def hausdorff(T: AnalyticTree, other_pts, samples=4000):
    """Hausdorff distance between the tree's arcs (sampled) and a point set."""
    a = np.concatenate(T.polylines(samples))
    b = np.asarray(other_pts, dtype=complex).ravel()
    A = np.column_stack([a.real, a.imag])
    B = np.column_stack([b.real, b.imag])
    return float(max(cKDTree(B).query(A)[0].max(), cKDTree(A).query(B)[0].max()))


@dataclass
class SearchResult:
    tree: AnalyticTree
    score: TreeScore
    trace: list
    initial_objective: float

    def write_trace(self, path):
        cols = ["iteration", "objective", "mass_re", "mass_im", "tv", "defect", "accepted", "best"]
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(cols)
            for row in self.trace:
                w.writerow([row[c] if not isinstance(row[c], float) else repr(float(row[c])) for c in cols])


def _evaluate(T, c, n):
    try:
        s = score_tree(tree_measure(T, c, n))
    except PotlabError:
        return None
    if not np.isfinite(s.objective):
        return None
    return s


def search_tree(py, seed=0, iterations=2000, ctrl_scale=0.1, rewire_prob=0.1, n=32,
                t0=None, decay=None, ctrl_per_edge=2, callback=None) -> SearchResult:
    """Simulated annealing over embedded trees through sigma and 0.

    State: a topology on sigma, 0 and up to k - 2 Steiner points, plus cubic
    control points per edge.  Proposals either move one control/Steiner
    point (Gaussian, scale ``ctrl_scale * diam * sqrt(T)``) or, with
    probability ``rewire_prob``, switch to another topology with straight
    edges.  Objective: positivity defect + |mass - 1|; failing trees score
    infinity.  Temperature T = t0 * decay**iteration.
    """
    c = univariate_coeffs(py)
    k = c.size - 1
    if k > 4:
        raise InputError("search is limited to k <= 4")
    t0 = TOL.anneal_t0 if t0 is None else t0
    decay = TOL.anneal_decay if decay is None else decay
    rng = np.random.default_rng(seed)
    sigma = critical_values(c)
    fixed = np.concatenate([[0j], sigma])
    nf = len(fixed)
    tops = _topologies(nf, max(k - 2, 0))
    diam = max(float(np.max(np.abs(fixed[:, None] - fixed[None, :]))), 1.0)
    tfrac = np.arange(1, ctrl_per_edge + 1) / (ctrl_per_edge + 1)

    def build(nodes, edges, ctrls):
        return AnalyticTree(nodes, [Edge(a, b, cc) for (a, b), cc in zip(edges, ctrls)])

    def straight(nodes, edges):
        return [nodes[a] + tfrac * (nodes[b] - nodes[a]) for a, b in edges]

    cur = star_tree(sigma, ctrl_per_edge)
    cur_edges = [(e.a, e.b) for e in cur.edges]
    cur_nodes = cur.nodes.copy()
    cur_ctrl = [e.ctrl.copy() for e in cur.edges]
    cur_score = _evaluate(cur, c, n)
    cur_obj = cur_score.objective if cur_score else math.inf
    best = (cur, cur_score, cur_obj)
    trace = [_row(0, cur_score, True, cur_obj)]
    for it in range(1, iterations + 1):
        T = t0 * decay ** it
        nodes, edges = cur_nodes.copy(), list(cur_edges)
        ctrl = [cc.copy() for cc in cur_ctrl]
        if len(tops) > 1 and rng.random() < rewire_prob:
            s, edges = tops[rng.integers(len(tops))]
            steiner = fixed.mean() + 0.25 * diam * (rng.standard_normal(s) + 1j * rng.standard_normal(s))
            nodes = np.concatenate([fixed, steiner])
            ctrl = straight(nodes, edges)
        else:
            n_st = len(nodes) - nf
            slots = sum(len(cc) for cc in ctrl) + n_st
            pick = rng.integers(slots)
            step = ctrl_scale * diam * math.sqrt(T / t0) * (rng.standard_normal() + 1j * rng.standard_normal())
            if pick < n_st:
                nodes[nf + pick] += step
            else:
                pick -= n_st
                for cc in ctrl:
                    if pick < len(cc):
                        cc[pick] += step
                        break
                    pick -= len(cc)
        cand = build(nodes, edges, ctrl)
        sc = _evaluate(cand, c, n)
        obj = sc.objective if sc else math.inf
        if obj <= cur_obj:
            accept = True
        elif math.isfinite(obj):
            accept = rng.random() < math.exp(-(obj - cur_obj) / max(T, 1e-300))
        else:
            accept = False
        if accept:
            cur_nodes, cur_edges, cur_ctrl, cur_obj = nodes, edges, ctrl, obj
            if obj < best[2]:
                best = (cand, sc, obj)
        trace.append(_row(it, sc, accept, best[2]))
        if callback is not None:
            callback(it, trace[-1])
    return SearchResult(best[0], best[1], trace, trace[0]["objective"])


def _row(it, sc, accepted, best):
    if sc is None:
        return {"iteration": it, "objective": math.inf, "mass_re": math.nan, "mass_im": math.nan,
                "tv": math.nan, "defect": math.nan, "accepted": int(accepted), "best": best}
    return {"iteration": it, "objective": float(sc.objective), "mass_re": sc.mass.real,
            "mass_im": sc.mass.imag, "tv": sc.total_variation, "defect": sc.positivity_defect,
            "accepted": int(accepted), "best": float(best)}
