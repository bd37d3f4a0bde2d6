"""Absorbing versus clamped wall end conditions."""
import math
from dataclasses import dataclass, field

import numpy as np

from ..driver import run_simulation, scheme_context
from ..errors import ParameterError
from ..shell import ABSORBING, CLAMPED


@dataclass
class BCComparison:
    """Radial displacement profiles ``eta_r(z)`` per boundary condition kind
    and requested time, plus the peak ``|eta_r|`` over the whole run."""

    z: np.ndarray
    times: list
    profiles: dict = field(default_factory=dict)
    peak: dict = field(default_factory=dict)


def _profiles(cfg, times):
    steps = {int(round(t / cfg.dt)): t for t in times}
    for n, t in steps.items():
        if abs(n * cfg.dt - t) > 1e-9 * max(1.0, t) + 1e-12:
            raise ParameterError(f"time {t} is not a multiple of dt={cfg.dt}")
    out = {}
    peak = [0.0]

    def grab(state):
        peak[0] = max(peak[0], float(np.max(np.abs(state.shell.eta_r))))
        if state.step in steps:
            out[steps[state.step]] = state.shell.eta_r.copy()

    run_simulation(cfg.with_(t_final=max(times)), callback=grab)
    return [out[t] for t in times], peak[0]


def bc_comparison(cfg, t_eval, kinds=(ABSORBING, CLAMPED)):
    """Run ``cfg`` once per wall end condition in ``kinds`` and collect the
    radial displacement at the times ``t_eval``."""
    times = sorted(float(t) for t in t_eval)
    if not times or times[0] <= 0:
        raise ParameterError("t_eval must contain positive times")
    result = BCComparison(z=scheme_context(cfg).mesh.wall_grid, times=times)
    cache = {}
    for kind in kinds:
        if kind not in cache:
            cache[kind] = _profiles(cfg.with_(bc_kind=kind), times)
        result.profiles[kind], result.peak[kind] = cache[kind]
    return result


def relative_l2(a, b, z, mask):
    """``||a - b|| / ||b||`` over the nodes selected by ``mask`` (trapezoid)."""
    zz = z[mask]
    num = np.trapezoid((a[mask] - b[mask]) ** 2, zz)
    den = np.trapezoid(b[mask] ** 2, zz)
    return math.sqrt(num / den) if den > 0 else math.inf
