import logging
import math
from typing import Union

from helfer_flux.errors import (
    ApproximationRegimeError,
    EmptyIntegrationRangeError,
    ParameterError,
)
from helfer_flux.models import DEFAULT_CHI0_MODE, HelferParams, ParamsInput

logger = logging.getLogger(__name__)

DEFAULT_Q = 10.0
# below this q the omega >> p0 expansion is poorly justified
Q_WARNING_THRESHOLD = 5.0


def chi0_bound(p0: float) -> float:
    """Largest chi0 for which rho < 0 in the central region r <~ 1/p0."""
    if not p0 > 0:
        raise ParameterError(f"p0 must be positive, got {p0}")
    return 3.0 / (80.0 * math.pi * p0)


def default_chi0(p0: float) -> float:
    return chi0_bound(p0) / 10.0


def normalization_integral(params: HelferParams) -> float:
    """I = (16 pi^2 / 3) chi0^2 (p0^2/q - p0^3/lambda)."""
    p0 = params.p0
    return (16.0 * math.pi ** 2 / 3.0) * params.chi0 ** 2 * (p0 ** 2 / params.q - p0 ** 3 / params.lambda_)


def normalization(params: HelferParams) -> float:
    return (1.0 + 2.0 * normalization_integral(params)) ** -0.5


def normalization_limit(params: HelferParams) -> float:
    """Normalization in the lambda >> q*p0 limit (the p0^3/lambda term dropped)."""
    term = (32.0 * math.pi ** 2 / 3.0) * params.chi0 ** 2 * params.p0 ** 2 / params.q
    return (1.0 + term) ** -0.5


def log_cutoff_ratio(params: HelferParams) -> float:
    return math.log(params.lambda_ / (params.q * params.p0))


def make_params(
    lambda_: float,
    p0: float,
    q: float = DEFAULT_Q,
    chi0: Union[float, str] = DEFAULT_CHI0_MODE,
) -> HelferParams:
    """
    Validate the state parameters and attach the derived normalization.

    Args:
        lambda_: momentum cutoff.
        p0: pair-momentum cutoff.
        q: dimensionless multiplier of the lower omega cutoff q*p0.
        chi0: spectral amplitude, or "paper-default" for 3/(800 pi p0).

    Raises:
        ParameterError: nonpositive lambda or p0, negative or unknown chi0.
        ApproximationRegimeError: q <= 1.
        EmptyIntegrationRangeError: lambda <= q*p0.
    """
    for name, value in (("lambda", lambda_), ("p0", p0), ("q", q)):
        if not math.isfinite(value):
            raise ParameterError(f"{name} must be finite, got {value}")
    if p0 <= 0:
        raise ParameterError(f"p0 must be positive, got {p0}")
    if lambda_ <= 0:
        raise ParameterError(f"lambda must be positive, got {lambda_}")
    if q <= 1:
        raise ApproximationRegimeError(
            f"q must exceed 1 for the high-frequency approximation to apply, got {q}"
        )
    if lambda_ <= q * p0:
        raise EmptyIntegrationRangeError(
            f"empty omega range: lambda={lambda_} must exceed q*p0={q * p0}"
        )

    if isinstance(chi0, str):
        if chi0 != DEFAULT_CHI0_MODE:
            raise ParameterError(f"chi0 must be a number or '{DEFAULT_CHI0_MODE}', got {chi0!r}")
        chi0_value = default_chi0(p0)
    else:
        chi0_value = float(chi0)
        if not math.isfinite(chi0_value) or chi0_value < 0:
            raise ParameterError(f"chi0 must be finite and nonnegative, got {chi0}")

    if q < Q_WARNING_THRESHOLD:
        logger.warning(f"q={q} is below {Q_WARNING_THRESHOLD}; closed forms assume q >> 1")
    if chi0_value >= chi0_bound(p0):
        logger.info(f"chi0={chi0_value} is not below 3/(80 pi p0); the center will not be negative")

    provisional = HelferParams(lambda_=float(lambda_), p0=float(p0), q=float(q), chi0=chi0_value)
    return provisional.model_copy(update={"n_norm": normalization(provisional)})


def params_from_input(spec: ParamsInput) -> HelferParams:
    return make_params(spec.lambda_, spec.p0, spec.q, spec.chi0)
