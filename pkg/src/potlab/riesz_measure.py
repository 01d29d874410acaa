"""Measures on curves, Cauchy transforms, logarithmic potentials and the
Riesz measure of configuration fields.

Conventions: the Cauchy transform is ``mu_hat(z) = int dmu(w) / (z - w)``,
the potential ``V(z) = int log|z - w| dmu(w)``, so ``2 dV/dz = mu_hat``.
Riesz masses are normalised by 2 pi (``Delta log|z|`` has mass 1).
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import roots_jacobi

from .configurations import ConfigurationField
from .errors import (AmbiguousInterface, CircleExitsGrid, InputError, TooCloseToSupport)
from .harmonic_field import Cursor, LevelCurve
from .tolerances import TOL

__all__ = [
    "Arc", "Measure", "gauss_jacobi_rule", "example51_measure", "alpha_star",
    "cauchy_transform", "log_potential", "RieszDensity", "InterfaceDensity", "jump_density",
    "stokes_mass", "verify_algebraic_relation",
]


def gauss_jacobi_rule(n, alpha, beta):
    """Nodes ``u`` in (0, 1) and weights ``W`` with
    ``int_0^1 f(u) du ~ sum W f(u)`` for f behaving like
    ``u**alpha * (1 - u)**beta`` times a smooth function.
    """
    # scipy's weight is (1 - x)**a (1 + x)**b; u = 0 corresponds to x = -1
    x, w = roots_jacobi(n, beta, alpha)
    u = (1.0 + x) / 2.0
    # (1 + x)**alpha (1 - x)**beta = 2**(alpha + beta) u**alpha (1 - u)**beta
    W = 0.5 * w / (2.0 ** (alpha + beta) * u ** alpha * (1.0 - u) ** beta)
    return u, W


@dataclass
class Arc:
    """Density samples on a curve with their quadrature weights.

    ``weights`` integrate against arclength: ``int f dmu ~ sum(weights *
    density * f(nodes))``.  ``ends`` records the curve endpoints.
    """

    nodes: np.ndarray
    density: np.ndarray
    weights: np.ndarray
    rule: str = "trapezoid"
    alpha: float = 0.0
    beta: float = 0.0
    ends: tuple = None

    def __post_init__(self):
        self.nodes = np.asarray(self.nodes, dtype=complex).ravel()
        self.density = np.asarray(self.density, dtype=float).ravel()
        self.weights = np.asarray(self.weights, dtype=float).ravel()
        if not (len(self.nodes) == len(self.density) == len(self.weights)):
            raise InputError("nodes, density and weights must have equal length")
        if self.rule not in ("trapezoid", "gauss_jacobi"):
            raise InputError(f"unknown quadrature rule {self.rule!r}")
        if self.ends is None:
            self.ends = (complex(self.nodes[0]), complex(self.nodes[-1]))

    @property
    def masses(self):
        return self.weights * self.density

    @classmethod
    def trapezoid(cls, points, density):
        pts = np.asarray(points, dtype=complex).ravel()
        ds = np.abs(np.diff(pts))
        w = np.zeros(len(pts))
        w[:-1] += ds / 2
        w[1:] += ds / 2
        return cls(pts, density, w, "trapezoid")

    @classmethod
    def segment(cls, a, b, density_fn, alpha=0.0, beta=0.0, n=64):
        """Straight segment a -> b with density ``density_fn(z)`` per unit
        length, integrated by Gauss-Jacobi with exponent ``alpha`` at ``a``
        and ``beta`` at ``b``."""
        a, b = complex(a), complex(b)
        u, W = gauss_jacobi_rule(n, alpha, beta)
        z = a + u * (b - a)
        return cls(z, np.asarray(density_fn(z), dtype=float), W * abs(b - a), "gauss_jacobi",
                   alpha, beta, (a, b))

    def to_dict(self):
        return {"points": [[z.real, z.imag] for z in self.nodes],
                "density": self.density.tolist(), "weights": self.weights.tolist(),
                "rule": self.rule, "alpha": self.alpha, "beta": self.beta,
                "ends": [[e.real, e.imag] for e in self.ends]}

    @classmethod
    def from_dict(cls, d):
        pts = np.array([complex(*p) for p in d["points"]])
        dens = np.asarray(d["density"], dtype=float)
        rule = d.get("rule", "trapezoid")
        ends = tuple(complex(*e) for e in d["ends"]) if "ends" in d else None
        if "weights" in d:
            return cls(pts, dens, d["weights"], rule, d.get("alpha", 0.0), d.get("beta", 0.0), ends)
        if rule == "trapezoid":
            return cls.trapezoid(pts, dens)
        # Gauss-Jacobi nodes on the straight segment between the given ends
        if ends is None:
            raise InputError("gauss_jacobi arcs need 'ends' or explicit 'weights'")
        alpha, beta = d.get("alpha", 0.0), d.get("beta", 0.0)
        u, W = gauss_jacobi_rule(len(pts), alpha, beta)
        a, b = ends
        if np.max(np.abs(pts - (a + u * (b - a)))) > 1e-9 * (1 + abs(b - a)):
            raise InputError("points are not the Gauss-Jacobi nodes of the segment 'ends'")
        return cls(pts, dens, W * abs(b - a), rule, alpha, beta, ends)


@dataclass
class Measure:
    """Nonnegative measure made of point masses and weighted curve samples."""

    atoms: list = field(default_factory=list)
    arcs: list = field(default_factory=list)

    def __post_init__(self):
        self.atoms = [(complex(z), float(w)) for z, w in self.atoms]
        for z, w in self.atoms:
            if w < 0:
                raise InputError(f"negative atom weight {w} at {z}")
        for arc in self.arcs:
            scale = np.max(np.abs(arc.density)) if arc.density.size else 0.0
            if np.any(arc.density < -1e-12 * scale):
                raise InputError("negative density samples")

    @classmethod
    def atom(cls, z=0.0, w=1.0):
        return cls([(z, w)], [])

    @classmethod
    def uniform(cls, a, b, mass=1.0, n=64):
        L = abs(complex(b) - complex(a))
        return cls([], [Arc.segment(a, b, lambda z: np.full(z.shape, mass / L), 0.0, 0.0, n)])

    def _nodes_weights(self):
        zs = [np.array([z for z, _ in self.atoms], dtype=complex)]
        ws = [np.array([w for _, w in self.atoms], dtype=float)]
        for arc in self.arcs:
            zs.append(arc.nodes)
            ws.append(arc.masses)
        return np.concatenate(zs), np.concatenate(ws)

    def total_mass(self):
        return float(self._nodes_weights()[1].sum())

    def support_points(self):
        pts = [np.array([z for z, _ in self.atoms], dtype=complex)]
        for arc in self.arcs:
            pts.append(arc.nodes)
            pts.append(np.array(arc.ends, dtype=complex))
        return np.concatenate(pts)

    def diameter(self):
        p = self.support_points()
        if p.size < 2:
            return 0.0
        return float(np.max(np.abs(p[:, None] - p[None, :])))

    def distance(self, z):
        """Distance from points ``z`` to the support (atoms and arc polylines)."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        best = np.full(z.shape, np.inf)
        if self.atoms:
            a = np.array([p for p, _ in self.atoms])
            best = np.minimum(best, np.abs(z[:, None] - a[None, :]).min(axis=1))
        for arc in self.arcs:
            poly = np.concatenate([[arc.ends[0]], arc.nodes, [arc.ends[1]]])
            p0, p1 = poly[:-1], poly[1:]
            d = p1 - p0
            L2 = np.abs(d) ** 2
            L2 = np.where(L2 == 0, 1.0, L2)
            t = np.clip(((z[:, None] - p0[None]) * np.conj(d)[None]).real / L2[None], 0, 1)
            best = np.minimum(best, np.abs(z[:, None] - (p0[None] + t * d[None])).min(axis=1))
        return best

    def _check(self, z):
        clear = TOL.eval_clearance_rel * self.diameter()
        d = self.distance(z)
        if np.any(d <= clear):
            raise TooCloseToSupport(f"evaluation point within {clear:.3g} of the support")

    def cauchy_transform(self, z):
        scalar = np.ndim(z) == 0
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        self._check(z)
        nodes, w = self._nodes_weights()
        out = (w[None, :] / (z[:, None] - nodes[None, :])).sum(axis=1)
        return complex(out[0]) if scalar else out

    def log_potential(self, z):
        scalar = np.ndim(z) == 0
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        self._check(z)
        nodes, w = self._nodes_weights()
        out = (w[None, :] * np.log(np.abs(z[:, None] - nodes[None, :]))).sum(axis=1)
        return float(out[0]) if scalar else out

    def to_json(self):
        return {"atoms": [{"z": [z.real, z.imag], "w": w} for z, w in self.atoms],
                "arcs": [a.to_dict() for a in self.arcs]}

    @classmethod
    def from_json(cls, d):
        if isinstance(d, str):
            d = json.loads(d)
        atoms = [(complex(*a["z"]), a["w"]) for a in d.get("atoms", [])]
        return cls(atoms, [Arc.from_dict(a) for a in d.get("arcs", [])])

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json(), fh, indent=2)

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))


def alpha_star(z):
    """Closed-form root (-1 + sqrt(1 + 4/z))/2 of z y^2 + z y - 1 = 0 near infinity."""
    z = np.asarray(z, dtype=complex)
    return (-1.0 + np.sqrt(1.0 + 4.0 / z)) / 2.0


def example51_measure(n=64):
    """Density sqrt(4+x)/sqrt(-x)/(2 pi) on [-4, 0]; exponents 1/2 at -4, -1/2 at 0."""
    def dens(z):
        x = z.real
        return np.sqrt(4.0 + x) / np.sqrt(-x) / (2.0 * np.pi)
    return Measure([], [Arc.segment(-4.0, 0.0, dens, 0.5, -0.5, n)])


def cauchy_transform(mu: Measure, z):
    return mu.cauchy_transform(z)


def log_potential(mu: Measure, z):
    return mu.log_potential(z)


# Riesz measure of configuration fields ---------------------------------------

@dataclass
class InterfaceDensity:
    """Jump density along one traced curve.

    ``lam[m]`` is grad(H_a - H_b) . n at sample m with n pointing into the
    region where ``a`` is active; inactive samples carry 0.
    """

    curve: LevelCurve
    lam: np.ndarray
    active: np.ndarray
    a: int
    b: int
    convention: str = "n points into {V = H_a}; lambda = d_n (H_a - H_b)"

    @property
    def empty(self):
        return not self.active.any()

    def mass(self, center=None, radius=None):
        """(1/2 pi) int lambda ds, optionally restricted to a disk."""
        z, lam = self.curve.samples, np.where(self.active, self.lam, 0.0)
        if center is None:
            ds = np.abs(np.diff(z))
            return float(np.sum(ds * (lam[:-1] + lam[1:]) / 2) / (2 * np.pi))
        c = complex(center)
        tot = 0.0
        r = np.abs(z - c)
        for m in range(len(z) - 1):
            z0, z1, l0, l1 = z[m], z[m + 1], lam[m], lam[m + 1]
            in0, in1 = r[m] <= radius, r[m + 1] <= radius
            if not (in0 or in1):
                continue
            if in0 != in1:
                # clip the segment at the circle
                d = z1 - z0
                A, B, C = abs(d) ** 2, 2 * ((z0 - c) * np.conj(d)).real, abs(z0 - c) ** 2 - radius ** 2
                disc = math.sqrt(max(B * B - 4 * A * C, 0.0))
                t = (-B + disc) / (2 * A) if in0 else (-B - disc) / (2 * A)
                t = min(max(t, 0.0), 1.0)
                lt = l0 + t * (l1 - l0)
                if in0:
                    z1, l1 = z0 + t * d, lt
                else:
                    z0, l0 = z0 + t * d, lt
            tot += abs(z1 - z0) * (l0 + l1) / 2
        return tot / (2 * np.pi)

    def write_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["s", "re_z", "im_z", "lambda"])
            for s, z, l in zip(self.curve.s, self.curve.samples, self.lam):
                w.writerow([repr(float(s)), repr(float(z.real)), repr(float(z.imag)), repr(float(l))])


@dataclass
class RieszDensity:
    interfaces: list

    def mass(self, center=None, radius=None):
        return float(sum(i.mass(center, radius) for i in self.interfaces))

    def min_density(self):
        vals = [i.lam[i.active] for i in self.interfaces if not i.empty]
        return float(min(v.min() for v in vals)) if vals else 0.0


def _runs(mask):
    """(start, stop) index pairs of the True runs of a boolean array."""
    d = np.diff(np.concatenate([[0], mask.astype(int), [0]]))
    return list(zip(np.nonzero(d == 1)[0], np.nonzero(d == -1)[0]))


def jump_density(F: ConfigurationField, H=None, interfaces=()) -> RieszDensity:
    """Jump of the normal derivative of V across each traced interface.

    A curve sample of {H_i - H_j = c} is active when both H_i and H_j
    realise V there.  Isolated active samples (curve contact points of zero
    length) are dropped.  A curve that is active on part of its samples
    only is rejected: the caller should clip it to a window where the two
    sides do not change.
    """
    Ht = F.H if F.H is not None else H
    out = []
    for curve in interfaces:
        if curve.indices is None:
            raise InputError("interface curves must carry their index pair")
        i, j = curve.indices
        z = curve.samples
        Hv, br = Ht.values_along(z)
        V, _ = F.rule.apply(Hv.T, z)
        scale = 1.0 + np.abs(Hv).max()
        tol = TOL.assemble_tol * scale
        act = (np.abs(V - Hv[:, i]) <= tol) & (np.abs(V - Hv[:, j]) <= tol)
        for s0, s1 in _runs(act):
            if s1 - s0 == 1:
                act[s0] = False
        runs = _runs(act)
        if len(runs) > 1 or (runs and (runs[0][1] - runs[0][0]) != len(z)):
            raise AmbiguousInterface(
                f"sides of curve ({i + 1}, {j + 1}) change along the window; clip the curve")
        Gd = 2.0 * np.conj(br[:, i] - br[:, j])
        sign = -1.0 if getattr(F.rule, "kind", "max") == "min" else 1.0
        # under a max rule H_i is active on the side grad(H_i - H_j) points to
        lam = np.where(act, sign * np.abs(Gd), 0.0)
        out.append(InterfaceDensity(curve, lam, act, i, j))
    return RieszDensity(out)


def _circle_breaks(F, pts, active, roots, A, center, radius, th):
    """Angles where the active index changes, refined by bisection."""
    Hc = F.H
    n = len(pts)

    def at(m, t):
        zt = center + radius * np.exp(1j * t)
        cur = Cursor(Hc.P, pts[m], roots[m], A[m]).move_to(zt)
        v = 2.0 * cur.A.real + Hc.constants
        _, a = F.rule.apply(v[:, None], np.array([zt]))
        return int(a[0]), cur

    pieces = []  # (theta, cursor state, index before, index after)
    for m in range(n):
        a0, a1 = int(active[m]), int(active[(m + 1) % n])
        t0 = th[m]
        t1 = th[m + 1] if m + 1 < n else th[0] + 2 * np.pi
        lo, la = t0, a0
        while la != a1:
            hi, ha = t1, a1
            while hi - lo > 1e-14 * (1 + abs(hi)):
                mid = 0.5 * (lo + hi)
                am, _ = at(m, mid)
                if am == la:
                    lo = mid
                else:
                    hi, ha = mid, am
            tb = 0.5 * (lo + hi)
            _, cur = at(m, tb)
            pieces.append((tb, cur.A.copy(), la, ha))
            lo, la = hi, ha
    return pieces


def stokes_mass(F, center, radius, samples=None):
    """(1/2 pi) times the outward flux of grad V through a circle.

    For a ``ConfigurationField`` the flux through each arc where H_nu is
    active equals ``2 Im(A_nu(end) - A_nu(start))``; the arcs are found by
    bisection on the exact configuration rule.  For a plain callable V the
    normal derivative is taken by central differences at ``samples`` (256)
    equally spaced points and summed by the trapezoid rule.
    """
    center = complex(center)
    if isinstance(F, ConfigurationField):
        g = F.grid
        if not (g.contains(center + radius) and g.contains(center - radius)
                and g.contains(center + 1j * radius) and g.contains(center - 1j * radius)):
            raise CircleExitsGrid("circle is not inside the grid")
        n = samples or 16 * TOL.stokes_samples
        th = 2 * np.pi * np.arange(n) / n
        pts = center + radius * np.exp(1j * th)
        roots, A = F.H.states_along(np.append(pts, pts[0]))
        loopA = A[-1] - A[0]
        roots, A = roots[:-1], A[:-1]
        V, active = F.rule.apply((2.0 * A.real + F.H.constants).T, pts)
        breaks = _circle_breaks(F, pts, active, roots, A, center, radius, th)
        if not breaks:
            nu = int(active[0])
            return float(2.0 * loopA[nu].imag / (2 * np.pi))
        flux = 0.0
        for q in range(len(breaks)):
            t0, A0, _, nu = breaks[q]
            t1, A1, _, _ = breaks[(q + 1) % len(breaks)]
            dA = A1[nu] - A0[nu]
            if q == len(breaks) - 1:
                dA += loopA[nu]  # wrapped past the starting sample
            flux += 2.0 * dA.imag
        return float(flux / (2 * np.pi))
    n = samples or TOL.stokes_samples
    th = 2 * np.pi * np.arange(n) / n
    nrm = np.exp(1j * th)
    pts = center + radius * nrm
    h = 1e-5 * radius
    Vf = np.vectorize(lambda z: float(F(z)))
    dn = (Vf(pts + h * nrm) - Vf(pts - h * nrm)) / (2 * h)
    return float(dn.sum() * (2 * np.pi / n) * radius / (2 * np.pi))


def verify_algebraic_relation(P, mu: Measure, sample_points):
    """max |P(z, mu_hat(z))| / scale over the samples, with scale the sum
    of the absolute values of the terms of P at (z, mu_hat(z))."""
    z = np.atleast_1d(np.asarray(sample_points, dtype=complex))
    y = mu.cauchy_transform(z)
    C = P.C
    val = np.zeros(z.shape, dtype=complex)
    scale = np.zeros(z.shape)
    for j in range(C.shape[0]):
        for i in range(C.shape[1]):
            if C[j, i] != 0:
                t = C[j, i] * z ** i * y ** j
                val += t
                scale += np.abs(t)
    return float(np.max(np.abs(val) / np.maximum(scale, np.finfo(float).tiny)))
