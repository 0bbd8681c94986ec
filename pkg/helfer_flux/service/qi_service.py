import logging
from typing import List, Tuple, Union

import numpy as np
from scipy import optimize

from helfer_flux import specfun
from helfer_flux.errors import GridError, ParameterError
from helfer_flux.models import GridScale, GridSpec, HelferParams, HorizonResult, QIReport
from helfer_flux.service.helfer_service import HelferService

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

MIN_HORIZON_POINTS = 64
# horizon grids start at this fraction of 1/lambda
HORIZON_START = 0.01


def _positive(values, name: str) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    if np.any(~(values > 0)):
        raise ParameterError(f"{name} must be positive")
    return values


class QIService:
    """Time-averaged energy density along static worldlines r = const."""

    def __init__(self, params: HelferParams):
        self.params = params
        self.helfer = HelferService(params)

    def lorentzian_average(self, r: float, tau: ArrayLike) -> ArrayLike:
        """
        rho(r, t) averaged with the weight tau / (pi (t^2 + tau^2)).

        The weight turns cos(2 w t) into exp(-2 w tau), so the rho2 log kernel
        becomes E1(2 q p0 tau) - E1(2 lambda tau).
        """
        taus = _positive(tau, "tau")
        p = self.params
        kernel = np.asarray(specfun.exp_integral_e1(2.0 * self.helfer.lower * taus)) - np.asarray(
            specfun.exp_integral_e1(2.0 * p.lambda_ * taus)
        )
        values = self.helfer.rho1(r) - self.helfer.linear_prefactor * specfun.f2(p.p0, r) * kernel
        if np.ndim(tau) == 0:
            return float(values)
        return values

    def window_integral(self, r: float, T: ArrayLike) -> ArrayLike:
        """Integral of rho(r, t) over -T <= t <= T."""
        ts = _positive(T, "T")
        lam, low = self.params.lambda_, self.helfer.lower
        ci_hi = np.asarray(specfun.cosine_integral(2.0 * lam * ts))
        ci_lo = np.asarray(specfun.cosine_integral(2.0 * low * ts))
        bracket = np.sin(2.0 * low * ts) / low - np.sin(2.0 * lam * ts) / lam + 2.0 * ts * (ci_hi - ci_lo)
        values = 2.0 * ts * self.helfer.rho1(r) - self.helfer.linear_prefactor * specfun.f2(self.params.p0, r) * bracket
        if np.ndim(T) == 0:
            return float(values)
        return values

    def sweep(self, r: float, T_grid: GridSpec) -> Tuple[np.ndarray, np.ndarray]:
        """W(T) over the grid; T_grid must stay in T > 0."""
        points = T_grid.points()
        if points[0] <= 0:
            raise GridError(f"window grid must start above 0, got {points[0]}")
        return points, np.asarray(self.window_integral(r, points))

    def horizon_grid(self, T_max: float, grid_n: int) -> GridSpec:
        if not T_max > 0:
            raise ParameterError(f"T_max must be positive, got {T_max}")
        if grid_n < MIN_HORIZON_POINTS:
            raise GridError(f"horizon grid needs at least {MIN_HORIZON_POINTS} points, got {grid_n}")
        start = HORIZON_START / self.params.lambda_
        if T_max <= start:
            start = T_max * 1e-3
        return GridSpec(min=start, max=T_max, count=grid_n, scale=GridScale.LOG)

    def positivity_horizon(self, r: float, T_max: float, grid_n: int = 256) -> HorizonResult:
        """Largest sign change T* of W(T) and whether W > 0 on every grid point past it."""
        points, values = self.sweep(r, self.horizon_grid(T_max, grid_n))
        # a grid point landing exactly on W = 0 closes the interval before it
        changes = (values[:-1] * values[1:] < 0) | ((values[1:] == 0) & (values[:-1] != 0))
        crossings = np.nonzero(changes)[0]
        if crossings.size == 0:
            logger.debug(f"r={r}: no sign change of W up to T={T_max}")
            return HorizonResult(t_star=None, all_positive_beyond=bool(np.all(values >= 0)), n_crossings=0)

        last = int(crossings[-1])
        t_star = optimize.brentq(
            lambda T: self.window_integral(r, T), points[last], points[last + 1], xtol=1e-14, rtol=1e-12
        )
        beyond = bool(np.all(values[points > t_star] > 0))
        logger.debug(f"r={r}: {crossings.size} sign change(s), last at T*={t_star:.6e}")
        return HorizonResult(t_star=float(t_star), all_positive_beyond=beyond, n_crossings=int(crossings.size))

    def qi_margin(self, r: float, tau_grid: GridSpec, bound_const: float) -> List[QIReport]:
        """Lorentzian average against the bound -bound_const / tau^4 at each tau."""
        if not bound_const > 0:
            raise ParameterError(f"bound_const must be positive, got {bound_const}")
        if tau_grid.scale != GridScale.LOG:
            raise GridError("tau grid must be log-scaled")
        taus = tau_grid.points()
        averaged = np.atleast_1d(self.lorentzian_average(r, taus))
        reports = []
        for tau, value in zip(taus, averaged):
            bound = float(-bound_const / tau ** 4)
            margin = float(value) - bound
            reports.append(
                QIReport(
                    r=r,
                    tau_or_T=float(tau),
                    averaged_rho=float(value),
                    bound_value=bound,
                    margin=margin,
                    passed=margin >= 0,
                )
            )
        failed = sum(not rep.passed for rep in reports)
        if failed:
            logger.warning(f"r={r}: {failed} of {len(reports)} tau values violate the bound")
        return reports
