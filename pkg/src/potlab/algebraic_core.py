"""Bivariate polynomials P(z, y), fiber root solving, singular sets and
numerical analytic continuation of the root functions along paths."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as npoly

from . import kernels
from .errors import (DegenerateDiscriminant, InputError, LeadingCoefficientVanishes,
                     NoConvergence, NotSquarefree, PathHitsSingularSet, StepUnderflow)
from .tolerances import TOL, cluster_tol

__all__ = [
    "BivariatePolynomial", "SingularSet", "BranchTrack", "solve_fiber",
    "discriminant_nodes", "continue_branches", "monodromy", "circle_path",
    "format_permutation",
]

# roots of a multiple factor split by ~eps**(1/m); merge them before deduplication
_GROUP_REL = 1e-6


def _trim(c, tol=0.0):
    c = np.asarray(c, dtype=complex)
    n = len(c)
    while n > 1 and abs(c[n - 1]) <= tol:
        n -= 1
    return c[:n]


class BivariatePolynomial:
    """P(z, y) = sum_j p_j(z) y**j with complex coefficients.

    ``C[j, i]`` holds the coefficient of ``z**i y**j``.  Construction
    checks that the leading coefficient p_k is not the zero polynomial and
    that P is squarefree in y.
    """

    def __init__(self, C, check=True):
        C = np.array(C, dtype=complex, ndmin=2)
        if C.ndim != 2 or C.shape[0] < 2:
            raise InputError("need at least p_0 and p_1 (degree_y >= 1)")
        # drop vanishing leading rows in y and trailing columns in z
        while C.shape[0] > 2 and not np.any(C[-1]):
            C = C[:-1]
        while C.shape[1] > 1 and not np.any(C[:, -1]):
            C = C[:, :-1]
        if not np.any(C[-1]):
            raise InputError("leading coefficient p_k is the zero polynomial")
        self.C = np.ascontiguousarray(C)
        self.C.setflags(write=False)
        self._disc = None
        if check and self.degree_y > 1 and self._discriminant_is_zero():
            raise NotSquarefree("P has a repeated factor in y (discriminant vanishes identically)")

    # construction helpers
    @classmethod
    def from_coeffs(cls, coeffs, check=True):
        """From a list ``[p_0, ..., p_k]`` of ascending z-coefficient lists."""
        rows = [np.atleast_1d(np.asarray(p, dtype=complex)) for p in coeffs]
        width = max(len(r) for r in rows)
        C = np.zeros((len(rows), width), dtype=complex)
        for j, r in enumerate(rows):
            C[j, :len(r)] = r
        return cls(C, check=check)

    @classmethod
    def from_univariate(cls, py):
        """``z * P(y) - 1`` for ``P(y) = sum py[j] y**j`` (ascending)."""
        py = np.asarray(py, dtype=complex)
        C = np.zeros((len(py), 2), dtype=complex)
        C[:, 1] = py
        C[0, 0] = -1.0
        return cls(C)

    @classmethod
    def from_roots(cls, branches):
        """Product of ``(y - g_nu(z))`` for polynomial branches ``g_nu``.

        Each branch is an ascending coefficient list in z; this realises a
        tuple of entire functions as the roots of one squarefree P.
        """
        prod = [np.array([1.0 + 0j])]  # prod[j]: coefficient of y**j
        for g in branches:
            g = np.atleast_1d(np.asarray(g, dtype=complex))
            new = [np.zeros(1, dtype=complex) for _ in range(len(prod) + 1)]
            for j, pj in enumerate(prod):
                new[j + 1] = npoly.polyadd(new[j + 1], pj)
                new[j] = npoly.polysub(new[j], npoly.polymul(pj, g))
            prod = new
        return cls.from_coeffs(prod)

    @classmethod
    def parse(cls, text):
        """Parse shorthand such as ``"y^2 - z"`` or ``"z*y^2 + z*y - 1"``.

        Only integer and rational coefficients are accepted.
        """
        import sympy

        y, z = sympy.symbols("y z")
        try:
            expr = sympy.parse_expr(text.replace("^", "**"), local_dict={"y": y, "z": z})
            poly = sympy.Poly(sympy.expand(expr), y, z)
        except (sympy.SympifyError, SyntaxError, TypeError, AttributeError, NameError, ValueError,
                sympy.PolynomialError) as exc:
            raise InputError(f"cannot parse polynomial {text!r}: {exc}") from None
        if not (poly.domain.is_ZZ or poly.domain.is_QQ):
            raise InputError(f"shorthand accepts integer/rational coefficients only: {text!r}")
        k, d = poly.degree(y), poly.degree(z)
        if k < 1:
            raise InputError(f"{text!r} does not involve y")
        C = np.zeros((k + 1, max(d, 0) + 1), dtype=complex)
        for (j, i), c in poly.terms():
            C[j, i] = complex(sympy.Rational(c))
        return cls(C)

    @classmethod
    def from_json(cls, obj):
        if isinstance(obj, str):
            obj = json.loads(obj)
        try:
            k = int(obj["degree_y"])
            coeffs = [[complex(re, im) for re, im in p] for p in obj["coeffs"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed polynomial JSON: {exc}") from None
        if len(coeffs) != k + 1:
            raise InputError(f"degree_y={k} but {len(coeffs)} coefficient polynomials")
        return cls.from_coeffs(coeffs)

    def to_json(self):
        return {
            "degree_y": self.degree_y,
            "coeffs": [[[c.real, c.imag] for c in _trim(row)] for row in self.C],
        }

    # basic queries
    @property
    def degree_y(self):
        return self.C.shape[0] - 1

    @property
    def degree_z(self):
        return self.C.shape[1] - 1

    def coeffs_at(self, z):
        """The fiber coefficients ``[p_0(z), ..., p_k(z)]``."""
        return np.array(kernels.eval_coeffs(self.C, complex(z)), dtype=complex)

    def leading(self, z):
        return npoly.polyval(z, self.C[-1])

    def __call__(self, z, y):
        return npoly.polyval(y, self.coeffs_at(z))

    def derivative_y(self):
        k = self.degree_y
        D = self.C[1:] * np.arange(1, k + 1)[:, None]
        return BivariatePolynomial(D, check=False)

    def __repr__(self):
        return f"BivariatePolynomial(degree_y={self.degree_y}, degree_z={self.degree_z})"

    # discriminant
    def _sylvester_values(self, zs):
        k = self.degree_y
        n = 2 * k - 1
        vals = np.empty(len(zs), dtype=complex)
        cond = np.empty(len(zs))
        for m, z in enumerate(zs):
            a = self.coeffs_at(z)[::-1]  # descending in y
            b = (np.arange(k, 0, -1) * a[:-1])
            S = np.zeros((n, n), dtype=complex)
            for r in range(k - 1):
                S[r, r:r + k + 1] = a
            for r in range(k):
                S[k - 1 + r, r:r + k] = b
            vals[m] = np.linalg.det(S)
            sv = np.linalg.svd(S, compute_uv=False)
            cond[m] = sv[-1] / sv[0]
        return vals, cond

    def _resultant_samples(self):
        k, d = self.degree_y, self.degree_z
        N = (2 * k - 1) * d + 1
        zs = np.exp(2j * np.pi * (np.arange(N) / N + 0.1234))
        return zs, N

    def _discriminant_is_zero(self):
        zs, _ = self._resultant_samples()
        # a repeated factor makes every Sylvester matrix singular
        _, cond = self._sylvester_values(zs)
        return bool(np.all(cond <= 1e-11))

    def discriminant(self):
        """Ascending z-coefficients of Disc_y P = Res_y(P, dP/dy) / p_k (up to sign)."""
        if self._disc is not None:
            return self._disc
        k = self.degree_y
        if k == 1:
            self._disc = np.array([1.0 + 0j])
            return self._disc
        zs, N = self._resultant_samples()
        vals, cond = self._sylvester_values(zs)
        if np.all(cond <= 1e-11):
            raise DegenerateDiscriminant("resultant of P and dP/dy vanishes identically")
        # values at rotated roots of unity -> coefficients
        phase = np.exp(2j * np.pi * 0.1234 * np.arange(N))
        res = np.fft.fft(vals) / N / phase
        res = _trim(res, 1e-13 * np.max(np.abs(res)))
        lead = _trim(self.C[-1])
        q, _ = npoly.polydiv(res, lead)
        self._disc = _trim(np.atleast_1d(q), 1e-13 * np.max(np.abs(q)))
        return self._disc


def _group(points, tol_rel):
    """Merge numerically split multiple roots into their centroids."""
    pts = sorted((complex(p) for p in points), key=lambda c: (c.real, c.imag))
    scale = max((abs(p) for p in pts), default=0.0)
    tol = tol_rel * (1.0 + scale)
    groups = []
    for p in pts:
        for g in groups:
            if abs(np.mean(g) - p) <= tol:
                g.append(p)
                break
        else:
            groups.append([p])
    return [complex(np.mean(g)) for g in groups]


@dataclass(frozen=True)
class SingularSet:
    """Points where p_k or the discriminant vanishes, with a safety radius."""

    points: np.ndarray
    kinds: tuple
    safety_radius: float

    def __iter__(self):
        return iter(zip(self.points, self.kinds))

    def __len__(self):
        return len(self.points)

    def distance(self, z):
        if len(self.points) == 0:
            return math.inf
        return float(np.min(np.abs(np.asarray(self.points) - z)))

    def to_json(self):
        return {
            "points": [{"z": [p.real, p.imag], "kind": k} for p, k in self],
            "safety_radius": self.safety_radius,
        }


def _safety_radius(points):
    pts = np.asarray(points)
    if len(pts) == 0:
        return math.inf
    if len(pts) == 1:
        return 0.25 * (1.0 + abs(pts[0]))
    d = np.abs(pts[:, None] - pts[None, :])
    d[np.diag_indices(len(pts))] = np.inf
    return float(d.min()) / 4.0


def discriminant_nodes(P: BivariatePolynomial) -> SingularSet:
    """Roots of p_k and of the discriminant in y, deduplicated."""
    lead = _trim(P.C[-1])
    lead_roots = _group(npoly.polyroots(lead), _GROUP_REL) if len(lead) > 1 else []
    disc = P.discriminant()
    disc_roots = _group(npoly.polyroots(disc), _GROUP_REL) if len(disc) > 1 else []
    scale = max((abs(p) for p in lead_roots + disc_roots), default=0.0)
    tol = max(cluster_tol(scale), _GROUP_REL * (1.0 + scale))
    points = list(lead_roots)
    kinds = ["leading_coeff_zero"] * len(points)
    for p in disc_roots:
        if all(abs(p - q) > tol for q in points):
            points.append(p)
            kinds.append("discriminant_zero")
    pts = np.array(points, dtype=complex)
    return SingularSet(pts, tuple(kinds), _safety_radius(pts))


def _sort_key(y):
    return (round(y.real, 9) + 0.0, y.imag)


def solve_fiber(P: BivariatePolynomial, z, init=None) -> np.ndarray:
    """All k roots of ``P(z, .)``, sorted lexicographically by (Re, Im)."""
    z = complex(z)
    a = P.coeffs_at(z)
    scale = float(np.max(np.abs(a)))
    if abs(a[-1]) <= TOL.degenerate_tol * max(1.0, scale):
        raise LeadingCoefficientVanishes(z)
    roots, ok = kernels.aberth(a, init, TOL.max_iter)
    roots = np.array(roots, dtype=complex)
    if not ok:
        raise NoConvergence(f"Aberth iteration did not converge at z={z}")
    k = P.degree_y
    res = np.abs(npoly.polyval(roots, a)) / (abs(a[-1]) * np.maximum(1.0, np.abs(roots)) ** k)
    if np.any(res >= TOL.residual_tol * max(1.0, scale)):
        raise NoConvergence(f"fiber residual {res.max():.3e} too large at z={z}")
    return np.array(sorted(roots, key=_sort_key), dtype=complex)


@dataclass(frozen=True)
class BranchTrack:
    """Root functions continued along a path with a stable labelling."""

    t: np.ndarray
    z: np.ndarray
    roots: np.ndarray
    end_permutation: tuple
    integrals: np.ndarray | None = field(default=None, repr=False)

    def residuals(self, P):
        """Per-sample max normalised residual ``|P(z, alpha_nu)| / scale``."""
        out = np.empty(len(self.z))
        for m, (z, r) in enumerate(zip(self.z, self.roots)):
            a = P.coeffs_at(z)
            scale = max(1.0, float(np.max(np.abs(a))))
            k = P.degree_y
            out[m] = np.max(np.abs(npoly.polyval(r, a))
                            / (abs(a[-1]) * np.maximum(1.0, np.abs(r)) ** k)) / scale
        return out

    def write_csv(self, path):
        k = self.roots.shape[1]
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            header = ["t", "re_z", "im_z"]
            for nu in range(1, k + 1):
                header += [f"re_alpha{nu}", f"im_alpha{nu}"]
            w.writerow(header)
            for t, z, r in zip(self.t, self.z, self.roots):
                row = [repr(float(t)), repr(float(z.real)), repr(float(z.imag))]
                for y in r:
                    row += [repr(float(y.real)), repr(float(y.imag))]
                w.writerow(row)
            fh.write("# " + json.dumps({"end_permutation": [p + 1 for p in self.end_permutation]})
                     + "\n")

    @staticmethod
    def read_csv(path):
        rows = []
        footer = None
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                if line.startswith("#"):
                    footer = json.loads(line[1:])
                else:
                    rows.append(line)
        data = list(csv.reader(rows))[1:]
        arr = np.array(data, dtype=float)
        k = (arr.shape[1] - 3) // 2
        roots = arr[:, 3::2][:, :k] + 1j * arr[:, 4::2][:, :k]
        perm = tuple(p - 1 for p in footer["end_permutation"])
        return BranchTrack(arr[:, 0], arr[:, 1] + 1j * arr[:, 2], roots, perm)


def circle_path(center, radius, n=64, start_angle=0.0):
    """Closed counterclockwise polygon with ``n`` vertices (first repeated at the end)."""
    th = start_angle + 2.0 * np.pi * np.arange(n + 1) / n
    pts = complex(center) + radius * np.exp(1j * th)
    pts[-1] = pts[0]
    return pts


def _nearest_permutation(end, ref):
    k = len(ref)
    D = np.abs(np.asarray(end)[:, None] - np.asarray(ref)[None, :])
    perm = tuple(int(j) for j in D.argmin(axis=1))
    if sorted(perm) != list(range(k)):
        raise NoConvergence("end fiber could not be matched to the reference labelling")
    return perm


def _check_path(path, singular):
    if singular is None or len(singular) == 0:
        return
    for z in path:
        if singular.distance(z) <= singular.safety_radius / 2.0:
            raise PathHitsSingularSet(
                f"path vertex {z} within safety_radius/2 of the singular set")


def continue_branches(P: BivariatePolynomial, path, start_labels=None, singular=None,
                      integrate=False) -> BranchTrack:
    """Continue all root functions of P along a polyline.

    ``start_labels`` fixes the labelling at ``path[0]`` (defaults to the
    sorted fiber).  The end permutation maps each continued label to the
    reference label at the end point: the start labelling for closed paths,
    the sorted fiber otherwise.
    """
    path = np.asarray(path, dtype=complex).ravel()
    if len(path) < 2:
        raise InputError("path needs at least two vertices")
    if singular is None:
        singular = discriminant_nodes(P)
    _check_path(path, singular)
    fiber0 = solve_fiber(P, path[0])
    if start_labels is None:
        roots0 = fiber0
    else:
        roots0 = np.asarray(start_labels, dtype=complex)
        if roots0.shape != fiber0.shape:
            raise InputError("start_labels must have one entry per root")
        try:
            _nearest_permutation(roots0, fiber0)
        except NoConvergence:
            raise InputError("start_labels do not solve the first fiber") from None
        if np.max(np.min(np.abs(roots0[:, None] - fiber0[None, :]), axis=1)) > 1e-8 * (
                1.0 + np.max(np.abs(fiber0))):
            raise InputError("start_labels do not solve the first fiber")
    motion = 0.125 if integrate else 0.5
    zs, rs, ints, status = kernels.track(P.C, path, roots0, integrate, motion,
                                         60, TOL.min_step, TOL.degenerate_tol)
    if status == kernels.TRACK_UNDERFLOW:
        raise StepUnderflow(f"step below min_step near z={zs[-1]}")
    closed = abs(path[-1] - path[0]) <= 1e-12 * (1.0 + abs(path[0]))
    ref = roots0 if closed else solve_fiber(P, path[-1])
    perm = _nearest_permutation(rs[-1], ref)
    s = np.concatenate([[0.0], np.cumsum(np.abs(np.diff(zs)))])
    t = s / s[-1] if s[-1] > 0 else s
    return BranchTrack(t, zs, rs, perm, ints if integrate else None)


def monodromy(P: BivariatePolynomial, base, loop, singular=None) -> tuple:
    """Permutation of root labels after continuation around a closed loop."""
    loop = np.asarray(loop, dtype=complex).ravel()
    base = complex(base)
    tol = 1e-12 * (1.0 + abs(base))
    if abs(loop[0] - base) > tol or abs(loop[-1] - base) > tol:
        raise InputError("loop must start and end at the base point")
    return continue_branches(P, loop, singular=singular).end_permutation


def format_permutation(perm) -> str:
    """Cycle notation with 1-based labels, e.g. ``(1 2)``; ``()`` for identity."""
    seen = set()
    cycles = []
    for i in range(len(perm)):
        if i in seen or perm[i] == i:
            seen.add(i)
            continue
        cyc = []
        j = i
        while j not in seen:
            seen.add(j)
            cyc.append(j + 1)
            j = perm[j]
        cycles.append("(" + " ".join(map(str, cyc)) + ")")
    return "".join(cycles) or "()"
