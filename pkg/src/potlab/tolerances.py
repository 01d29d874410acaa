"""Numerical knobs shared across modules.

Every constant here is recorded in a run manifest, so a run can be
reproduced from its manifest alone.
"""

from dataclasses import asdict, dataclass


@dataclass(frozen=True)
class Tolerances:
    # algebraic_core
    max_iter: int = 200
    residual_tol: float = 1e-12
    degenerate_tol: float = 1e-12
    cluster_rel: float = 1e-8
    min_step: float = 1e-10
    # harmonic_field
    quad_tol: float = 1e-10
    trace_tol: float = 1e-9
    grad_tol: float = 1e-6
    stall_tol: float = 1e-7
    order_rel: float = 1e-9
    # configurations
    collinear_tol: float = 1e-9
    assemble_tol: float = 1e-9
    hull_tol: float = 1e-10
    mv_samples: int = 32
    grid_default: int = 201
    # riesz_measure
    eval_clearance_rel: float = 1e-6
    jump_tol_rel: float = 1e-8
    stokes_samples: int = 256
    # tree_lab
    side_eps_rel: float = 1e-4
    tv_tol: float = 1e-6
    embed_tol: float = 1e-9
    anneal_t0: float = 1.0
    anneal_decay: float = 0.995

    def as_dict(self):
        return asdict(self)


TOL = Tolerances()


def cluster_tol(points_scale):
    """Deduplication radius for points of magnitude up to ``points_scale``."""
    return TOL.cluster_rel * (1.0 + points_scale)
