"""Time-convergence study against a fine-step reference run."""
import csv
import math
from dataclasses import dataclass, field

import numpy as np

from ..driver import run_simulation, scheme_context
from ..errors import ParameterError
from ..fluid.stokes import mass_matrix

FIELDS = ("u", "p", "eta")


@dataclass
class ConvergenceReport:
    """L2 errors at ``t_eval`` per time step and the observed orders between
    successive entries of ``dts`` (``orders[f][k]`` uses ``dts[k], dts[k+1]``)."""

    dts: list
    dt_ref: float
    t_eval: float
    errors: dict = field(default_factory=dict)
    orders: dict = field(default_factory=dict)
    reference_norms: dict = field(default_factory=dict)

    def relative_errors(self):
        return {f: [e / self.reference_norms[f] if self.reference_norms[f] else math.nan
                    for e in self.errors[f]] for f in FIELDS}

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["dt", "err_u", "err_p", "err_eta", "order_u", "order_p", "order_eta"])
            for k, dt in enumerate(self.dts):
                row = [repr(float(dt))] + [repr(float(self.errors[f][k])) for f in FIELDS]
                row += ["" if k == 0 else repr(float(self.orders[f][k - 1])) for f in FIELDS]
                w.writerow(row)


def observed_order(e1, e2, dt1, dt2):
    """``log(e1/e2) / log(dt1/dt2)``; nan if either error vanishes."""
    if e1 <= 0 or e2 <= 0:
        return math.nan
    return math.log(e1 / e2) / math.log(dt1 / dt2)


def l2_errors(state, ref_state, ctx):
    """L2 errors of velocity, pressure and wall displacement, measured with
    the mass matrices of the reference state's mesh."""
    mesh = ctx.mesh
    pts = ref_state.mesh.points
    M = mass_matrix(pts, mesh.tris)
    coarse_pts = pts[_coarse_in_fine(mesh)]
    Mc = mass_matrix(coarse_pts, mesh.coarse_tris)
    M1 = ctx.shell_ops.M1
    du = state.fluid.u - ref_state.fluid.u
    dp = state.fluid.p - ref_state.fluid.p
    dz = state.shell.eta_z - ref_state.shell.eta_z
    dr = state.shell.eta_r - ref_state.shell.eta_r
    return {
        "u": math.sqrt(max(0.0, du[:, 0] @ (M @ du[:, 0]) + du[:, 1] @ (M @ du[:, 1]))),
        "p": math.sqrt(max(0.0, dp @ (Mc @ dp))),
        "eta": math.sqrt(max(0.0, dz @ (M1 @ dz) + dr @ (M1 @ dr))),
    }


def _coarse_in_fine(mesh):
    I = np.arange(mesh.n_coarse) % mesh.n_z
    J = np.arange(mesh.n_coarse) // mesh.n_z
    return mesh.fine_index(2 * I, 2 * J)


def state_at(cfg, dt, t_eval):
    return run_simulation(cfg.with_(dt=dt, t_final=t_eval)).state


def convergence_study(cfg, dt_list, dt_ref, t_eval, reference=None, runner=None):
    """Errors of runs with each ``dt`` in ``dt_list`` against a ``dt_ref`` run.

    Parameters
    ----------
    reference : CoupledState, optional
        Precomputed reference state at ``t_eval`` (skips the reference run).
    runner : callable, optional
        ``runner(cfg, dt, t_eval) -> CoupledState``; defaults to a plain run.
    """
    dt_list = [float(d) for d in dt_list]
    if not dt_list:
        raise ParameterError("dt_list must not be empty")
    if dt_ref > min(dt_list):
        raise ParameterError("dt_ref must not exceed the smallest dt in dt_list")
    for dt in dt_list + [dt_ref]:
        n = t_eval / dt
        if abs(n - round(n)) > 1e-6 * max(1.0, n):
            raise ParameterError(f"t_eval={t_eval} is not a multiple of dt={dt}")
    run = runner or state_at
    ref = reference if reference is not None else run(cfg, dt_ref, t_eval)
    ctx = scheme_context(cfg)
    report = ConvergenceReport(dts=dt_list, dt_ref=float(dt_ref), t_eval=float(t_eval))
    zero = {f: 0.0 for f in FIELDS}
    for f in FIELDS:
        report.errors[f] = []
    for dt in dt_list:
        errs = zero if dt == dt_ref else l2_errors(run(cfg, dt, t_eval), ref, ctx)
        for f in FIELDS:
            report.errors[f].append(errs[f])
    for f in FIELDS:
        e = report.errors[f]
        report.orders[f] = [observed_order(e[k], e[k + 1], dt_list[k], dt_list[k + 1])
                            for k in range(len(dt_list) - 1)]
    norms = l2_errors(_ZeroLike(ref), ref, ctx)
    report.reference_norms = norms
    return report


class _ZeroLike:
    """A state with zero fields (for reference norms)."""

    def __init__(self, state):
        self.fluid = type(state.fluid)(np.zeros_like(state.fluid.u), np.zeros_like(state.fluid.p))
        self.shell = type(state.shell)(*(np.zeros_like(a) for a in
                                          (state.shell.eta_z, state.shell.eta_r,
                                           state.shell.zeta_z, state.shell.zeta_r)))
