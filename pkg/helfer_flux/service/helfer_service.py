import logging
import math
from typing import List, Tuple, Union

import numpy as np

from helfer_flux import specfun
from helfer_flux.errors import ParameterError
from helfer_flux.models import FieldSample, GridSpec, HelferParams
from helfer_flux.params import log_cutoff_ratio

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

# closed forms drop rho1's and I1's slow time dependence, valid for |t| < this / p0
VALIDITY_TIME = 0.1
TAYLOR_SWITCH = 1e-4


def _as_output(values: np.ndarray, *inputs) -> ArrayLike:
    if all(np.ndim(v) == 0 for v in inputs):
        return float(values)
    return values


class HelferService:
    """Energy density and radial flux of the Helfer state in the high-frequency approximation."""

    def __init__(self, params: HelferParams):
        self.params = params
        self.lower = params.q * params.p0
        # chi0 N^2 / (6 pi^2), common to rho2 and I2
        self.linear_prefactor = params.chi0 * params.n_norm ** 2 / (6.0 * math.pi ** 2)
        self.quadratic_prefactor = 2.0 * params.chi0 ** 2 * params.n_norm ** 2 / math.pi ** 2

    def log_kernel(self, t: ArrayLike) -> ArrayLike:
        """int_{q p0}^{lambda} cos(2 w t) / w dw; even in t."""
        t_abs = np.abs(np.atleast_1d(np.asarray(t, dtype=float)))
        out = np.full(t_abs.shape, log_cutoff_ratio(self.params))
        moving = t_abs > 0
        if np.any(moving):
            tm = t_abs[moving]
            out[moving] = specfun.cosine_integral(2.0 * self.params.lambda_ * tm) - specfun.cosine_integral(
                2.0 * self.lower * tm
            )
        return _as_output(out.reshape(np.shape(t)), t)

    def flux_kernel(self, t: ArrayLike) -> ArrayLike:
        """[cos(2 lambda t) - cos(2 q p0 t)] / t; odd in t, zero at t = 0."""
        times = np.atleast_1d(np.asarray(t, dtype=float))
        lam, low = self.params.lambda_, self.lower
        out = np.empty(times.shape)
        small = 2.0 * lam * np.abs(times) < TAYLOR_SWITCH
        ts = times[small]
        out[small] = (
            -2.0 * ts * (lam ** 2 - low ** 2)
            + (2.0 / 3.0) * ts ** 3 * (lam ** 4 - low ** 4)
            - (4.0 / 45.0) * ts ** 5 * (lam ** 6 - low ** 6)
        )
        tl = times[~small]
        out[~small] = -2.0 * np.sin((lam + low) * tl) * np.sin((lam - low) * tl) / tl
        return _as_output(out.reshape(np.shape(t)), t)

    def rho1(self, r: ArrayLike) -> ArrayLike:
        """Quadratic-in-b energy density; time independent for |t| << 1/p0."""
        p = self.params
        values = self.quadratic_prefactor * np.asarray(specfun.f1(p.p0, r)) * log_cutoff_ratio(p)
        return _as_output(values, r)

    def rho2(self, r: ArrayLike, t: ArrayLike) -> ArrayLike:
        values = -self.linear_prefactor * np.asarray(specfun.f2(self.params.p0, r)) * np.asarray(self.log_kernel(t))
        return _as_output(values, r, t)

    def rho_total(self, r: ArrayLike, t: ArrayLike) -> ArrayLike:
        return _as_output(np.asarray(self.rho1(r)) + np.asarray(self.rho2(r, t)), r, t)

    def flux_components(self, r: ArrayLike, t: ArrayLike) -> Tuple[ArrayLike, ArrayLike]:
        """(I2a, I2b) with I2b = -I2a/3; the radial flux is -(I2a + I2b)."""
        i2a = 1.5 * self.linear_prefactor * np.asarray(specfun.g2(self.params.p0, r)) * np.asarray(self.flux_kernel(t))
        i2b = -i2a / 3.0
        return _as_output(i2a, r, t), _as_output(i2b, r, t)

    def flux(self, r: ArrayLike, t: ArrayLike) -> ArrayLike:
        i2 = self.linear_prefactor * np.asarray(specfun.g2(self.params.p0, r)) * np.asarray(self.flux_kernel(t))
        return _as_output(-i2, r, t)

    def flux_slope_at_origin(self, r: float) -> float:
        """dF/dt at t = 0: (chi0 N^2 / 3 pi^2) g2 (lambda^2 - (q p0)^2)."""
        return 2.0 * self.linear_prefactor * specfun.g2(self.params.p0, r) * (
            self.params.lambda_ ** 2 - self.lower ** 2
        )

    def negativity_ratio(self, r: ArrayLike) -> ArrayLike:
        """
        |rho2| / rho1 at t = 0, i.e. f2 / (12 chi0 f1).

        Where f1 vanishes the ratio is +-inf (nan if f2 vanishes too).

        Raises:
            ParameterError: chi0 = 0, where both components vanish.
        """
        p = self.params
        if p.chi0 == 0:
            raise ParameterError("negativity ratio is undefined for chi0 = 0")
        f1 = np.asarray(specfun.f1(p.p0, r))
        f2 = np.asarray(specfun.f2(p.p0, r))
        with np.errstate(divide="ignore", invalid="ignore"):
            values = f2 / (12.0 * p.chi0 * f1)
        return _as_output(values, r)

    def field_grid(self, r_grid: GridSpec, t_grid: GridSpec) -> List[FieldSample]:
        """Samples over r x t, r outer."""
        r_points, t_points = r_grid.points(), t_grid.points()
        t_limit = VALIDITY_TIME / self.params.p0
        if np.max(np.abs(t_points)) > t_limit:
            logger.warning(
                f"t-grid reaches |t|={np.max(np.abs(t_points))}, beyond {t_limit}; "
                f"slow rho1/I1 time dependence is neglected there"
            )
        rr, tt = np.meshgrid(r_points, t_points, indexing="ij")
        rho1 = np.broadcast_to(np.asarray(self.rho1(r_points))[:, None], rr.shape)
        rho2 = self.rho2(rr, tt)
        flux = self.flux(rr, tt)
        samples = []
        for idx in np.ndindex(rr.shape):
            samples.append(
                FieldSample(
                    r=float(rr[idx]),
                    t=float(tt[idx]),
                    rho1=float(rho1[idx]),
                    rho2=float(rho2[idx]),
                    rho=float(rho1[idx] + rho2[idx]),
                    flux=float(flux[idx]),
                )
            )
        logger.debug(f"field grid evaluated: {len(samples)} samples")
        return samples

    def rho_time_series(self, r: float, t_grid: GridSpec) -> List[FieldSample]:
        return self.field_grid(GridSpec(min=r, max=r, count=1), t_grid)
