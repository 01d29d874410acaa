"""Command-line interface.

Every command writes its artifacts and a ``manifest.json`` into the output
directory (``--out``, overridden by the ``POTLAB_OUT`` environment variable).
Exit codes: 0 success, 1 input or validation error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, kernels
from .algebraic_core import (BivariatePolynomial, circle_path, continue_branches,
                             format_permutation, monodromy, solve_fiber)
from .configurations import (CollinearConfiguration, enumerate_collinear_configurations,
                             envelope_configuration, interface_lipschitz,
                             separation_angle, assemble_configuration, verify_forward_star,
                             verify_subharmonic, write_report)
from .errors import InputError, NumericalError, PotlabError
from .harmonic_field import Grid, HarmonicTuple, trace_level_curve
from .riesz_measure import (Measure, alpha_star, example51_measure, jump_density, stokes_mass,
                            verify_algebraic_relation)
from .tolerances import TOL
from .tree_lab import (AnalyticTree, critical_values, search_tree, score_tree, star_tree,
                       tree_measure)


class _Parser(argparse.ArgumentParser):
    """Usage errors become ``InputError`` so they map to exit code 1."""

    def error(self, message):
        raise InputError(f"{self.prog}: {message}")


# parsing helpers --------------------------------------------------------------

def parse_complex(text):
    s = str(text).strip().replace(" ", "").replace("i", "j")
    try:
        return complex(s)
    except ValueError:
        raise InputError(f"not a complex number: {text!r}") from None


def parse_complex_list(text):
    return [parse_complex(t) for t in str(text).split(";") if t.strip()]


def parse_int_list(text):
    try:
        return [int(t) for t in str(text).split(",") if t.strip()]
    except ValueError:
        raise InputError(f"not an integer list: {text!r}") from None


def parse_grid(text):
    vals = parse_int_list(text)
    if len(vals) == 1:
        vals *= 2
    if len(vals) != 2 or min(vals) < 3:
        raise InputError(f"--grid expects NX,NY with both >= 3, got {text!r}")
    return tuple(vals)


def _read_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from None


def load_poly(source):
    """A JSON file, an inline JSON object or integer/rational shorthand."""
    if source is None:
        raise InputError("--poly is required")
    if os.path.isfile(source):
        return BivariatePolynomial.from_json(_read_json(source))
    if source.endswith(".json"):
        raise InputError(f"polynomial file {source} not found")
    if source.lstrip().startswith("{"):
        try:
            return BivariatePolynomial.from_json(json.loads(source))
        except json.JSONDecodeError as exc:
            raise InputError(f"inline polynomial JSON is malformed: {exc}") from None
    return BivariatePolynomial.parse(source)


def load_univariate(source):
    """Coefficients of P(y) from a polynomial that does not involve z."""
    P = load_poly(source)
    if P.C.shape[1] > 1 and np.any(P.C[:, 1:] != 0):
        raise InputError("tree commands expect a polynomial in y only")
    return P.C[:, 0]


def load_path(path):
    pts = _read_json(path)
    if isinstance(pts, dict):
        pts = pts.get("path", pts.get("points"))
    try:
        return np.array([complex(*p) if isinstance(p, (list, tuple)) else complex(p)
                         for p in pts], dtype=complex)
    except (TypeError, ValueError):
        raise InputError(f"{path}: expected a list of [re, im] vertices") from None


def fmt(z, digits=15):
    """Short complex formatting; the imaginary part is dropped when negligible."""
    z = complex(z)
    tiny = 1e-13 * max(1.0, abs(z))
    re = 0.0 if abs(z.real) < tiny else z.real
    im = 0.0 if abs(z.imag) < tiny else z.imag
    if im == 0.0:
        return f"{re:.{digits}g}"
    return f"{re:.{digits}g}{im:+.{digits}g}j"


def three_branch_tuple():
    """Branches 0, 2 + z and -1/2 labelled (H1, H2, H3) = (0, 4x + x^2 - y^2, -x)."""
    P = BivariatePolynomial.from_roots([[0.0], [2.0, 1.0], [-0.5]])
    return HarmonicTuple(P, base=0.0, base_labels=[0.0, 2.0, -0.5])


EXAMPLES = {"2.11": three_branch_tuple}


def load_tuple(args):
    if getattr(args, "example", None):
        if args.example not in EXAMPLES:
            raise InputError(f"unknown example {args.example!r}; known: {sorted(EXAMPLES)}")
        return EXAMPLES[args.example]()
    P = load_poly(args.poly)
    labels = parse_complex_list(args.labels) if getattr(args, "labels", None) else None
    return HarmonicTuple(P, base=parse_complex(args.base), base_labels=labels)


def make_grid(args):
    nx, ny = parse_grid(args.grid) if args.grid else (TOL.grid_default,) * 2
    c = parse_complex(args.center)
    hw = float(args.half_width)
    if hw <= 0:
        raise InputError("--half-width must be positive")
    h = 2.0 * hw / (nx - 1)
    return Grid(c - hw - 1j * h * (ny - 1) / 2.0, h, nx, ny)


def parse_pair(text):
    try:
        up, lo = text.split("|")
    except ValueError:
        raise InputError(f"--pair expects 'UPPER|LOWER', got {text!r}") from None
    return CollinearConfiguration(tuple(parse_int_list(up)), tuple(parse_int_list(lo)))


def to_zero_based(idx, k):
    if any(i < 1 or i > k for i in idx):
        raise InputError(f"indices are 1-based and must lie in 1..{k}")
    return [i - 1 for i in idx]


# run context ------------------------------------------------------------------

class Run:
    """Output directory, artifact list and manifest writer."""

    def __init__(self, args, argv):
        self.args = args
        self.argv = argv
        out = os.environ.get("POTLAB_OUT") or args.out
        self.out = Path(out)
        self.out.mkdir(parents=True, exist_ok=True)
        self.artifacts = []
        self.inputs = []
        self.seeds = {}
        self.t0 = time.perf_counter()

    def path(self, name):
        p = self.out / name
        self.artifacts.append(str(p))
        return p

    def input(self, path):
        if path and os.path.isfile(path):
            self.inputs.append(str(path))

    def write_json(self, name, obj):
        with open(self.path(name), "w", encoding="utf-8") as fh:
            json.dump(obj, fh, indent=2, sort_keys=True)
            fh.write("\n")

    def finish(self, status):
        manifest = {
            "command": " ".join(c for c in (self.args.command, getattr(self.args, "sub", None)) if c),
            "argv": self.argv,
            "inputs": self.inputs,
            "tolerances": TOL.as_dict(),
            "tol_override": self.args.tol,
            "seeds": self.seeds,
            "threads": self.args.threads,
            "backend": kernels.BACKEND,
            "version": __version__,
            "wall_clock_s": time.perf_counter() - self.t0,
            "artifacts": self.artifacts,
            "exit_code": status,
        }
        with open(self.out / "manifest.json", "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=2)
            fh.write("\n")


# algebraic core commands ------------------------------------------------------

def cmd_fiber(run, a):
    run.input(a.poly)
    P = load_poly(a.poly)
    z = parse_complex(a.z)
    roots = solve_fiber(P, z)
    for r in roots:
        print(fmt(r))
    run.write_json("fiber.json", {"z": [z.real, z.imag],
                                  "roots": [[r.real, r.imag] for r in roots]})
    return 0


def _loop_from_args(a, closed):
    if a.path:
        return load_path(a.path)
    if a.circle:
        c, r = parse_complex(a.circle[0]), float(a.circle[1])
        if r <= 0:
            raise InputError("circle radius must be positive")
        return circle_path(c, r, a.samples)
    raise InputError("give --path FILE or --circle CENTER RADIUS")


def cmd_continue(run, a):
    run.input(a.poly)
    run.input(a.path)
    P = load_poly(a.poly)
    path = _loop_from_args(a, False)
    tr = continue_branches(P, path)
    res = tr.residuals(P)
    tr.write_csv(run.path("track.csv"))
    tol = a.tol if a.tol is not None else 1e-9
    print(f"samples {len(tr.z)}")
    print(f"max_residual {res.max():.3e}")
    print(f"end_permutation {format_permutation(tr.end_permutation)}")
    if res.max() >= tol:
        raise NumericalError(f"residual {res.max():.3e} exceeds {tol:g}")
    return 0


def cmd_monodromy(run, a):
    run.input(a.poly)
    run.input(a.path)
    P = load_poly(a.poly)
    loop = _loop_from_args(a, True)
    perm = monodromy(P, loop[0], loop)
    s = format_permutation(perm)
    print(s)
    run.write_json("permutation.json", {"base": [loop[0].real, loop[0].imag],
                                        "permutation": [p + 1 for p in perm], "cycles": s})
    return 0


# configuration commands -------------------------------------------------------

def cmd_config(run, a):
    if a.sub == "enumerate":
        if a.k is None:
            raise InputError("--k is required")
        cfgs = enumerate_collinear_configurations(a.k)
        rows = []
        for cfg in cfgs:
            middle = any(cfg.uses(p) for p in range(2, cfg.k))
            line = ",".join(map(str, cfg.upper)) + "|" + ",".join(map(str, cfg.lower))
            print(line + ("  middle-active" if middle else ""))
            rows.append({**cfg.to_dict(), "middle_active": middle})
        run.write_json("configurations.json", rows)
        return 0

    run.input(a.poly)
    H = load_tuple(a)
    grid = make_grid(a)
    if a.sub == "assemble":
        if not a.pair:
            raise InputError("--pair is required")
        F = assemble_configuration(H, parse_pair(a.pair), grid, parse_complex(a.center))
    else:
        idx = to_zero_based(parse_int_list(a.indices) if a.indices else list(range(1, H.k + 1)),
                            H.k)
        F = envelope_configuration(H, idx, grid, a.kind)

    if a.sub in ("assemble", "verify"):
        rep = verify_subharmonic(F)
        F.write_csv(run.path("field.csv"))
        write_report(run.path("verify.json"), rep)
        print(json.dumps({"pass": rep["pass"], "violations": len(rep["violations"]),
                          "mv_tol": rep["mv_tol"]}))
        return 0

    nu = to_zero_based([a.nu], H.k)[0]
    if a.sub == "forward-star":
        try:
            dx, dy = (float(t) for t in a.direction.split(","))
        except ValueError:
            raise InputError(f"--direction expects DX,DY, got {a.direction!r}") from None
        ok = verify_forward_star(F.region(nu), complex(dx, dy))
        print(json.dumps({"forward_star": bool(ok), "nu": a.nu, "direction": [dx, dy]}))
        run.write_json("forward_star.json", {"forward_star": bool(ok), "nu": a.nu})
        return 0

    # lipschitz
    g = 2.0 * np.conj(H.branches(parse_complex(a.center)))
    idx = list(F.rule.indices)
    delta = separation_angle(g[idx], idx.index(nu))
    est, bound = interface_lipschitz(F, nu, delta if delta > 0 else None)
    rep = {"estimate": est, "delta": delta, "bound": bound,
           "pass": bool(bound is not None and est <= bound)}
    print(json.dumps(rep))
    run.write_json("lipschitz.json", rep)
    return 0


# measure commands -------------------------------------------------------------

def _load_measure(run, a):
    if a.measure == "example51":
        return example51_measure()
    if not a.measure:
        raise InputError("--measure is required")
    run.input(a.measure)
    try:
        return Measure.from_json(_read_json(a.measure))
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed measure JSON: {exc}") from None


def cmd_measure(run, a):
    if a.sub in ("transform", "potential"):
        mu = _load_measure(run, a)
        zs = parse_complex_list(a.z) if a.z else []
        if not zs:
            raise InputError("--z is required")
        f = mu.cauchy_transform if a.sub == "transform" else mu.log_potential
        vals = [f(z) for z in zs]
        for v in vals:
            print(fmt(v))
        run.write_json(f"{a.sub}.json", {"z": [[z.real, z.imag] for z in zs],
                                         "values": [[complex(v).real, complex(v).imag]
                                                    for v in vals]})
        return 0

    if a.sub == "relation":
        run.input(a.poly)
        P = load_poly(a.poly)
        mu = _load_measure(run, a)
        if a.z:
            pts = parse_complex_list(a.z)
        else:
            rng = np.random.default_rng(a.seed)
            run.seeds["relation"] = a.seed
            R = 2.0 * max(mu.diameter(), 1.0) + np.abs(mu.support_points()).max()
            pts = R * (1 + rng.random(20)) * np.exp(2j * np.pi * rng.random(20))
        res = verify_algebraic_relation(P, mu, pts)
        tol = a.tol if a.tol is not None else 1e-8
        rep = {"residual": res, "tol": tol, "pass": res < tol}
        print(json.dumps(rep))
        run.write_json("relation.json", rep)
        return 0

    if a.sub == "stokes" and a.measure:
        mu = _load_measure(run, a)
        m = stokes_mass(mu.log_potential, parse_complex(a.center), a.radius)
        print(f"{m:.12g}")
        run.write_json("stokes.json", {"flux_mass": m, "total_mass": mu.total_mass()})
        return 0

    run.input(a.poly)
    H = load_tuple(a)
    idx = to_zero_based(parse_int_list(a.indices) if a.indices else list(range(1, H.k + 1)),
                        H.k)
    center = parse_complex(a.center)
    grid = make_grid(a)
    F = envelope_configuration(H, idx, grid, a.kind)
    if a.sub == "stokes":
        m = stokes_mass(F, center, a.radius)
        print(f"{m:.12g}")
        run.write_json("stokes.json", {"flux_mass": m, "radius": a.radius})
        return 0

    # jump
    if not a.curve:
        raise InputError("--curve I,J is required")
    i, j = to_zero_based(parse_int_list(a.curve), H.k)
    seed = parse_complex(a.seed_point) if a.seed_point else center
    c = float(H.value(i, seed) - H.value(j, seed))
    curve = trace_level_curve(H, i, j, c, seed, a.budget,
                              domain=lambda z: grid.contains(z))
    dens = jump_density(F, interfaces=[curve])
    dens.interfaces[0].write_csv(run.path("jump.csv"))
    m = dens.mass(center, a.radius) if a.radius else dens.mass()
    rep = {"mass": m, "min_density": dens.min_density(),
           "active": bool(not dens.interfaces[0].empty)}
    print(json.dumps(rep))
    run.write_json("jump.json", rep)
    return 0


# tree commands ----------------------------------------------------------------

def _load_tree(run, a, sigma):
    if a.tree:
        run.input(a.tree)
        try:
            return AnalyticTree.from_json(_read_json(a.tree))
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed tree JSON: {exc}") from None
    return star_tree(sigma)


def verify_example51(n=64, tol=1e-8):
    """Full chain for P = y^2 + y: sigma, tree [-4, 0], densities, score and transform."""
    c = np.array([0.0, 1.0, 1.0])
    sigma = critical_values(c)
    T = star_tree(sigma)
    T.validate(required=np.concatenate([[0.0], sigma]))
    tm = tree_measure(T, c, n)
    sc = score_tree(tm)
    x = np.concatenate([e.z for e in tm.edges]).real
    rho = np.concatenate([e.arclength_density for e in tm.edges])
    exact = np.sqrt(4.0 + x) / np.sqrt(-x) / (2.0 * np.pi)
    dens_err = float(np.max(np.abs(rho - exact) / exact))
    rng = np.random.default_rng(0)
    z = (5.0 + 45.0 * rng.random(100)) * np.exp(2j * np.pi * rng.random(100))
    ref = alpha_star(z)
    tr_err = float(np.max(np.abs(tm.cauchy_transform(z) - ref) / np.abs(ref)))
    checks = {
        "sigma": (abs(sigma[0] + 4.0) if sigma.size == 1 else np.inf, tol),
        "density_rel": (dens_err, 1e-6),
        "mass": (abs(sc.mass - 1.0), tol),
        "total_variation": (abs(sc.total_variation - 1.0), tol),
        "positivity_defect": (sc.positivity_defect, tol),
        "transform_rel": (tr_err, tol),
    }
    report = {k: {"value": float(v), "tol": t, "pass": bool(v <= t)}
              for k, (v, t) in checks.items()}
    report["pass"] = all(r["pass"] for r in report.values())
    return report, tm


def cmd_tree(run, a):
    if a.sub == "verify-example51":
        tol = a.tol if a.tol is not None else 1e-8
        rep, tm = verify_example51(a.n if a.n else 64, tol)
        for k, r in rep.items():
            if k != "pass":
                print(f"{k:18s} {r['value']:.3e}  (tol {r['tol']:g})  {'ok' if r['pass'] else 'FAIL'}")
        print("PASS" if rep["pass"] else "FAIL")
        tm.write_csv(run.path("density.csv"))
        run.write_json("verify_example51.json", rep)
        return 0 if rep["pass"] else 2

    run.input(a.poly)
    c = load_univariate(a.poly)
    sigma = critical_values(c)
    if a.sub == "sigma":
        for s in sigma:
            print(fmt(s))
        run.write_json("sigma.json", [[s.real, s.imag] for s in sigma])
        return 0

    if a.sub == "search":
        run.seeds["search"] = a.seed
        res = search_tree(c, seed=a.seed, iterations=a.iterations, n=a.n or 32)
        res.write_trace(run.path("trace.csv"))
        res.tree.save(run.path("best_tree.json"))
        rep = {"initial_objective": res.initial_objective, "best_objective": res.score.objective,
               "mass": [res.score.mass.real, res.score.mass.imag],
               "total_variation": res.score.total_variation,
               "positivity_defect": res.score.positivity_defect}
        print(json.dumps(rep))
        run.write_json("search.json", rep)
        return 0

    T = _load_tree(run, a, sigma)
    T.validate(required=np.concatenate([[0.0], sigma]))
    tm = tree_measure(T, c, a.n or 32)
    sc = score_tree(tm)
    rep = {"mass": [sc.mass.real, sc.mass.imag], "total_variation": sc.total_variation,
           "positivity_defect": sc.positivity_defect, "objective": sc.objective}
    if a.sub == "measure":
        tm.write_csv(run.path("tree_measure.csv"))
        print(fmt(sc.mass, 12))
    else:
        print(json.dumps(rep))
    run.write_json("score.json", rep)
    return 0


# parser -----------------------------------------------------------------------

def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--poly", help="polynomial: JSON file, inline JSON or shorthand such as 'y^2-z'")
    common.add_argument("--measure", help="measure JSON file ('example51' for the built-in measure)")
    common.add_argument("--tree", help="tree JSON file")
    common.add_argument("--grid", help="grid size NX,NY")
    common.add_argument("--tol", type=float, help="pass/fail threshold of verification commands")
    common.add_argument("--seed", type=int, default=0, help="random seed")
    common.add_argument("--threads", type=int, default=1, help="worker cap (recorded)")
    common.add_argument("--out", default="potlab_out", help="output directory")

    p = _Parser(prog="potlab", description="Potential theory of algebraic Cauchy transforms.")
    p.add_argument("--version", action="version", version=f"potlab {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def loop_args(sp):
        sp.add_argument("--path", help="JSON list of [re, im] vertices")
        sp.add_argument("--circle", nargs=2, metavar=("CENTER", "RADIUS"))
        sp.add_argument("--samples", type=int, default=64, help="vertices of a --circle loop")

    sp = sub.add_parser("fiber", parents=[common], help="roots of P(z, .)")
    sp.add_argument("--z", required=True)
    sp = sub.add_parser("continue", parents=[common], help="continue all branches along a path")
    loop_args(sp)
    sp = sub.add_parser("monodromy", parents=[common], help="permutation around a loop")
    loop_args(sp)

    def tuple_args(sp):
        sp.add_argument("--example", help="built-in harmonic tuple ('2.11')")
        sp.add_argument("--base", default="0", help="base point of the tuple")
        sp.add_argument("--labels", help="branch labels at the base, ';'-separated")
        sp.add_argument("--center", default="0")
        sp.add_argument("--half-width", type=float, default=0.1)
        sp.add_argument("--indices", help="1-based index set, e.g. 1,2,3")
        sp.add_argument("--kind", choices=["max", "min"], default="max")

    cp = sub.add_parser("config", help="subharmonic configurations")
    csub = cp.add_subparsers(dest="sub", required=True, parser_class=_Parser)
    sp = csub.add_parser("enumerate", parents=[common])
    sp.add_argument("--k", type=int)
    for name in ("assemble", "verify", "forward-star", "lipschitz"):
        sp = csub.add_parser(name, parents=[common])
        tuple_args(sp)
        if name == "assemble":
            sp.add_argument("--pair", help="position sequences 'UPPER|LOWER', e.g. '1,2,3|1,3'")
        if name in ("forward-star", "lipschitz"):
            sp.add_argument("--nu", type=int, required=True, help="1-based dominant index")
        if name == "forward-star":
            sp.add_argument("--direction", default="1,0")

    mp = sub.add_parser("measure", help="measures, transforms and Riesz masses")
    msub = mp.add_subparsers(dest="sub", required=True, parser_class=_Parser)
    for name in ("transform", "potential", "relation", "jump", "stokes"):
        sp = msub.add_parser(name, parents=[common])
        sp.add_argument("--z", help="evaluation points, ';'-separated")
        if name in ("jump", "stokes"):
            tuple_args(sp)
            sp.add_argument("--radius", type=float, default=None)
        if name == "jump":
            sp.add_argument("--curve", help="1-based pair I,J of the interface H_I - H_J")
            sp.add_argument("--seed-point", help="point on the interface")
            sp.add_argument("--budget", type=float, default=0.4, help="arclength per direction")

    tp = sub.add_parser("tree", help="branch-cut measures on trees")
    tsub = tp.add_subparsers(dest="sub", required=True, parser_class=_Parser)
    for name in ("sigma", "measure", "score", "search", "verify-example51"):
        sp = tsub.add_parser(name, parents=[common])
        sp.add_argument("--n", type=int, default=None, help="quadrature nodes per edge")
        if name == "search":
            sp.add_argument("--iterations", type=int, default=2000)
    return p


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    run = None
    try:
        args = build_parser().parse_args(argv)
        if args.threads < 1:
            raise InputError("--threads must be >= 1")
        if getattr(args, "sub", None) == "stokes" and args.radius is None:
            raise InputError("--radius is required")
        run = Run(args, argv)
        handler = {"fiber": cmd_fiber, "continue": cmd_continue, "monodromy": cmd_monodromy,
                   "config": cmd_config, "measure": cmd_measure, "tree": cmd_tree}[args.command]
        status = handler(run, args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        status = 1
    except (NumericalError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        status = 2
    except PotlabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        status = 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        status = 1
    if run is not None:
        run.finish(status)
    return status


if __name__ == "__main__":
    sys.exit(main())
