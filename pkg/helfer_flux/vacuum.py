"""
Energy density / flux correlation functions of the massless scalar vacuum.

Both dimensions share C = (odd prefactor) * (coordinate sum) * [G''(sigma)]^2
with sigma half the squared interval; only the two-point function differs:
G = -ln(sigma)/(4 pi) in 2D and G = 1/(8 pi^2 sigma) in 4D.
"""
import logging
import math
from typing import Callable, List, Tuple

import numpy as np

from helfer_flux.errors import GridError, LightConeError, ParameterError
from helfer_flux.models import CaseLabel, CorrSample, GridScale, GridSpec

logger = logging.getLogger(__name__)

# tolerance on the squared interval x^2 - t^2
LIGHTCONE_EPS = 1e-9
MIN_FIT_POINTS = 32
MIN_FIT_SEPARATION = 10.0

Evaluator = Callable[[float, float], CorrSample]


def green_2d(sigma: float) -> Tuple[float, float]:
    """(G', G'') for G = -ln(sigma)/(4 pi)."""
    return -1.0 / (4.0 * math.pi * sigma), 1.0 / (4.0 * math.pi * sigma ** 2)


def green_4d(sigma: float) -> Tuple[float, float]:
    """(G', G'') for G = 1/(8 pi^2 sigma)."""
    return -1.0 / (8.0 * math.pi ** 2 * sigma ** 2), 1.0 / (4.0 * math.pi ** 2 * sigma ** 3)


def on_lightcone(a: float, b: float) -> bool:
    return abs(a * a - b * b) < LIGHTCONE_EPS


def corr2d_general(dx: float, dt: float) -> float:
    """<T^xt(x) :T^t't'(x'):> for separations dx = x - x', dt = t - t'."""
    if on_lightcone(dx, dt):
        raise LightConeError(f"(dx={dx}, dt={dt}) lies on the light cone")
    _, g2 = green_2d(0.5 * (dx * dx - dt * dt))
    return dx * dt * (dx * dx + dt * dt) * g2 * g2


def sign_case_2d(x: float, tprime: float) -> CaseLabel:
    if on_lightcone(x, tprime):
        return CaseLabel.LIGHTCONE
    if x == 0 or tprime == 0:
        return CaseLabel.UNCORRELATED
    if tprime < 0:
        return CaseLabel.A_POSITIVE if x > 0 else CaseLabel.A_NEGATIVE
    return CaseLabel.B_NEGATIVE if x > 0 else CaseLabel.B_POSITIVE


def corr2d(x: float, tprime: float) -> CorrSample:
    """Flux at (x, t=0) against energy density at (x'=0, t')."""
    label = sign_case_2d(x, tprime)
    if label == CaseLabel.LIGHTCONE:
        return CorrSample(coord_a=x, coord_b=tprime, case_label=label)
    return CorrSample(coord_a=x, coord_b=tprime, c_value=corr2d_general(x, -tprime), case_label=label)


def sign_case_4d(r: float, dt: float) -> CaseLabel:
    if on_lightcone(r, dt):
        return CaseLabel.LIGHTCONE
    if dt > 0:
        return CaseLabel.OUTGOING
    if dt < 0:
        return CaseLabel.INGOING
    return CaseLabel.UNCORRELATED


def corr4d(r: float, dt: float) -> CorrSample:
    """Radial flux at radius r against energy density at r'=0, dt = t - t'."""
    if not r > 0:
        raise ParameterError(f"corr4d needs r > 0 (radial direction undefined at the origin), got {r}")
    label = sign_case_4d(r, dt)
    if label == CaseLabel.LIGHTCONE:
        return CorrSample(coord_a=r, coord_b=dt, case_label=label)
    _, g2 = green_4d(0.5 * (r * r - dt * dt))
    value = r * dt * (dt * dt + r * r) * g2 * g2
    return CorrSample(coord_a=r, coord_b=dt, c_value=value, case_label=label)


def falloff_evaluator(mode: str, direction: str) -> Evaluator:
    """
    Correlator as a function of (varying, fixed).

    direction 'space' varies x (2D) or r (4D) at fixed t' or dt;
    'time' varies t' or dt at fixed x or r.
    """
    correlators = {"2d": corr2d, "4d": corr4d}
    if mode not in correlators:
        raise ParameterError(f"mode must be '2d' or '4d', got {mode!r}")
    corr = correlators[mode]
    if direction == "space":
        return lambda varying, fixed: corr(varying, fixed)
    if direction == "time":
        return lambda varying, fixed: corr(fixed, varying)
    raise ParameterError(f"direction must be 'space' or 'time', got {direction!r}")


def falloff_exponent(evaluator: Evaluator, fixed_coord_value: float, varying_range: GridSpec) -> float:
    """Least-squares slope of log|C| against log(varying coordinate)."""
    if varying_range.scale != GridScale.LOG:
        raise GridError("falloff fits need a log-scaled range")
    if varying_range.count < MIN_FIT_POINTS:
        raise GridError(f"falloff fits need at least {MIN_FIT_POINTS} points, got {varying_range.count}")
    if fixed_coord_value == 0:
        raise ParameterError("the fixed coordinate must be nonzero, C vanishes identically otherwise")
    if varying_range.min < MIN_FIT_SEPARATION * abs(fixed_coord_value):
        raise GridError(
            f"range must start at >= {MIN_FIT_SEPARATION}x the fixed coordinate "
            f"({MIN_FIT_SEPARATION * abs(fixed_coord_value)}), got {varying_range.min}"
        )

    points = varying_range.points()
    samples = [evaluator(float(v), fixed_coord_value) for v in points]
    crossing = [(i,) for i, s in enumerate(samples) if s.case_label == CaseLabel.LIGHTCONE]
    if crossing:
        raise LightConeError("falloff range crosses the light cone", crossing)

    magnitudes = np.abs([s.c_value for s in samples])
    slope, _ = np.polyfit(np.log(points), np.log(magnitudes), 1)
    logger.debug(f"falloff fit over [{varying_range.min}, {varying_range.max}]: slope={slope:.6f}")
    return float(slope)


def corr_grid(mode: str, grid_a: GridSpec, grid_b: GridSpec) -> List[CorrSample]:
    """Row-major correlator samples over grid_a x grid_b; rejects light-cone points."""
    corr = {"2d": corr2d, "4d": corr4d}.get(mode)
    if corr is None:
        raise ParameterError(f"mode must be '2d' or '4d', got {mode!r}")
    samples = []
    crossing = []
    for i, a in enumerate(grid_a.points()):
        for j, b in enumerate(grid_b.points()):
            sample = corr(float(a), float(b))
            if sample.case_label == CaseLabel.LIGHTCONE:
                crossing.append((i, j))
            samples.append(sample)
    if crossing:
        raise LightConeError(f"{mode} grid intersects the light-cone band", crossing)
    return samples


_NARRATIVE = {
    CaseLabel.A_POSITIVE: "positive density at x'=0 is followed by flux toward x>0; negative density by inflow",
    CaseLabel.A_NEGATIVE: "positive density at x'=0 is followed by flux toward x<0; negative density by inflow",
    CaseLabel.B_POSITIVE: "inflow from x<0 precedes positive density at x'=0",
    CaseLabel.B_NEGATIVE: "inflow from x>0 precedes positive density at x'=0",
    CaseLabel.OUTGOING: "positive density at the origin is followed by outgoing flux, negative by ingoing",
    CaseLabel.INGOING: "outgoing flux is followed by negative density at the origin, ingoing by positive",
    CaseLabel.LIGHTCONE: "correlator diverges on the light cone",
    CaseLabel.UNCORRELATED: "correlator vanishes identically here",
}


def correlation_narrative(label: CaseLabel) -> str:
    return _NARRATIVE[label]
