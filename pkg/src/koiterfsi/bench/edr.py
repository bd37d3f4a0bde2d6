"""Energy dissipation ratio of a diameter-pressure hysteresis loop."""
import numpy as np

from ..errors import DataError

CLOSURE_TOL = 0.05


def _arc_area(x, y, base):
    """Signed integral of ``(y - base) dx`` along a polyline."""
    return float(np.sum(0.5 * ((y[1:] - base) + (y[:-1] - base)) * np.diff(x)))


def loop_areas(diameter, pressure, closure_tol=CLOSURE_TOL):
    """Areas ``(A1, A2)`` of a closed diameter-pressure loop.

    ``A1`` is the area enclosed by the loop (shoelace formula).  ``A2`` is
    the area between the lower branch of the loop and the horizontal line
    at the minimum pressure.  The branches are the two arcs joining the
    points of minimum and maximum diameter; the lower branch is the one
    with the smaller area above the baseline.

    Raises
    ------
    DataError
        If the series are too short, of unequal length, not finite, or the
        loop does not close within ``closure_tol`` of the data ranges.
    """
    x = np.asarray(diameter, dtype=float)
    y = np.asarray(pressure, dtype=float)
    if x.shape != y.shape or x.ndim != 1 or len(x) < 3:
        raise DataError("need two 1D series of equal length (>= 3 samples)")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise DataError("loop contains non-finite samples")
    xr = np.ptp(x)
    yr = np.ptp(y)
    if abs(x[-1] - x[0]) > closure_tol * max(xr, 1e-300) or \
            abs(y[-1] - y[0]) > closure_tol * max(yr, 1e-300):
        raise DataError("diameter-pressure loop is not closed: first and last samples differ "
                        f"by ({x[-1] - x[0]:.3g}, {y[-1] - y[0]:.3g})")
    if xr == 0.0:
        return 0.0, 0.0
    # close the polygon exactly
    if x[-1] != x[0] or y[-1] != y[0]:
        x = np.append(x, x[0])
        y = np.append(y, y[0])
    # centred coordinates avoid cancellation for loops far from the origin
    xc = x - x.mean()
    yc = y - y.mean()
    a1 = 0.5 * abs(float(np.dot(xc[:-1], yc[1:]) - np.dot(xc[1:], yc[:-1])))

    # rotate the closed loop so it starts at the minimum diameter
    xo, yo = x[:-1], y[:-1]
    i0 = int(np.argmin(xo))
    xo = np.roll(xo, -i0)
    yo = np.roll(yo, -i0)
    i1 = int(np.argmax(xo))
    base = float(np.min(yo))
    arc1 = _arc_area(xo[:i1 + 1], yo[:i1 + 1], base)
    xb = np.append(xo[i1:], xo[0])[::-1]
    yb = np.append(yo[i1:], yo[0])[::-1]
    arc2 = _arc_area(xb, yb, base)
    a2 = min(abs(arc1), abs(arc2))
    return a1, a2


def compute_edr(diameter, pressure, closure_tol=CLOSURE_TOL):
    """``EDR = A1 / (A1 + A2) * 100`` in percent (see :func:`loop_areas`)."""
    a1, a2 = loop_areas(diameter, pressure, closure_tol)
    if a1 + a2 == 0.0:
        return 0.0
    return 100.0 * a1 / (a1 + a2)


def ellipse_edr(phase):
    """Closed-form EDR of ``x = a cos t, y = b cos(t - phase)``."""
    s = np.pi * np.sin(phase)
    return 100.0 * s / (2.0 + 0.5 * s)
