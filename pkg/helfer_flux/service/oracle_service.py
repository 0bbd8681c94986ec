"""
Monte Carlo evaluation of the exact momentum-space integrals behind the
closed forms, restricted to a cutoff shell lambda_lo < |k| < lambda_hi.

The closed-form shell values depend on the cutoffs only through
ln(lambda_hi/lambda_lo) (or the matching Ci / cosine differences), never on q,
so agreement checks the logarithmic structure without fixing q.

Sampling: shell momenta uniform in the shell volume, pair momenta p uniform in
the p0-ball, Jacobians folded into the weight. Points with a partner momentum
above lambda are rejected and contribute zero. The n samples are split into
N_SUBSTREAMS substreams seeded by SeedSequence(seed).spawn(N_SUBSTREAMS);
substream i gets n // N_SUBSTREAMS samples plus one if i < n % N_SUBSTREAMS.
Partial sums are reduced in substream order with math.fsum, so the worker
count never changes the result.
"""
import asyncio
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, NamedTuple, Optional

import numpy as np

from helfer_flux import specfun
from helfer_flux.errors import ParameterError, ShellError
from helfer_flux.models import HelferParams, MCEstimate, OracleCheck, ShellSpec

logger = logging.getLogger(__name__)

N_SUBSTREAMS = 64
CHUNK_SIZE = 1 << 16
MIN_SHELL_FLOOR = 20.0
MIN_SAMPLES_6D = 10 ** 4
MIN_SAMPLES_9D = 10 ** 5
VALIDITY_TIME = 0.1
OSCILLATION_GUARD = 0.5

RHO2_TOLERANCE = 0.03
RHO1_TOLERANCE = 0.05
FLUX_TOLERANCE = 0.05
SIGMAS = 3.0


class Chunk(NamedTuple):
    values: np.ndarray
    accepted: np.ndarray


# integrand(rng, m) -> complex weighted values (zeros where rejected), accepted mask
Integrand = Callable[[np.random.Generator, int], Chunk]


class Partial(NamedTuple):
    total: float
    total_sq: float
    total_imag: float
    n_accepted: int


def _unit_vectors(rng: np.random.Generator, m: int) -> np.ndarray:
    cos_theta = 2.0 * rng.random(m) - 1.0
    phi = 2.0 * math.pi * rng.random(m)
    sin_theta = np.sqrt(1.0 - cos_theta ** 2)
    return np.column_stack((sin_theta * np.cos(phi), sin_theta * np.sin(phi), cos_theta))


def _uniform_shell(rng: np.random.Generator, m: int, lo: float, hi: float) -> np.ndarray:
    radius = np.cbrt(lo ** 3 + rng.random(m) * (hi ** 3 - lo ** 3))
    return radius[:, None] * _unit_vectors(rng, m)


def _radial_uniform_ball(rng: np.random.Generator, m: int, hi: float) -> np.ndarray:
    # density 1/(4 pi hi |k|^2): cancels a |k|^-2 factor in the integrand
    return (hi * rng.random(m))[:, None] * _unit_vectors(rng, m)


def _shell_volume(lo: float, hi: float) -> float:
    return 4.0 * math.pi / 3.0 * (hi ** 3 - lo ** 3)


def _norm(v: np.ndarray) -> np.ndarray:
    return np.sqrt(np.einsum("ij,ij->i", v, v))


def _accumulate(integrand: Integrand, seed_seq: np.random.SeedSequence, m: int) -> Partial:
    rng = np.random.default_rng(seed_seq)
    total = total_sq = total_imag = 0.0
    n_accepted = 0
    remaining = m
    while remaining > 0:
        size = min(CHUNK_SIZE, remaining)
        chunk = integrand(rng, size)
        real = chunk.values.real
        total += float(np.sum(real))
        total_sq += float(np.sum(real * real))
        total_imag += float(np.sum(chunk.values.imag))
        n_accepted += int(np.count_nonzero(chunk.accepted))
        remaining -= size
    return Partial(total, total_sq, total_imag, n_accepted)


def substream_sizes(n: int) -> List[int]:
    base, extra = divmod(n, N_SUBSTREAMS)
    return [base + (1 if i < extra else 0) for i in range(N_SUBSTREAMS)]


class OracleService:
    def __init__(self, params: HelferParams, workers: int = 8):
        if workers < 1:
            raise ParameterError(f"workers must be >= 1, got {workers}")
        self.params = params
        self.workers = workers
        # chi0 N^2 / (2 pi)^3 and 2 chi0^2 N^2 / (2 pi)^3
        self.linear_prefactor = params.chi0 * params.n_norm ** 2 / (2.0 * math.pi) ** 3
        self.quadratic_prefactor = 2.0 * params.chi0 ** 2 * params.n_norm ** 2 / (2.0 * math.pi) ** 3
        self.ball_volume = 4.0 * math.pi / 3.0 * params.p0 ** 3

    # -- validation -------------------------------------------------------

    def check_shell(self, shell: ShellSpec) -> None:
        p = self.params
        lo, hi = shell.lambda_lo, shell.lambda_hi
        if not (p.q * p.p0 < lo < hi <= p.lambda_):
            raise ShellError(
                f"shell ({lo}, {hi}) must satisfy q*p0={p.q * p.p0} < lo < hi <= lambda={p.lambda_}"
            )
        if lo < MIN_SHELL_FLOOR * p.p0:
            raise ShellError(f"shell lower edge {lo} is below the {MIN_SHELL_FLOOR}*p0 floor")

    def _check_samples(self, n: int, minimum: int) -> None:
        if n < minimum:
            raise ParameterError(f"need at least {minimum} samples, got {n}")

    def _check_time(self, shell: ShellSpec, t: float) -> None:
        if abs(t) >= VALIDITY_TIME / self.params.p0:
            raise ParameterError(f"|t|={abs(t)} is outside |t| < {VALIDITY_TIME}/p0")
        if abs(t) > OSCILLATION_GUARD / shell.lambda_lo:
            raise ParameterError(f"|t|={abs(t)} exceeds the oscillation guard {OSCILLATION_GUARD}/lambda_lo")

    def _check_radius(self, r: float) -> None:
        if not r >= 0:
            raise ParameterError(f"r must be >= 0, got {r}")

    # -- engine -------------------------------------------------------------

    async def _gather(self, integrand: Integrand, n: int, seed: int) -> List[Partial]:
        seeds = np.random.SeedSequence(seed).spawn(N_SUBSTREAMS)
        loop = asyncio.get_running_loop()
        with ThreadPoolExecutor(max_workers=self.workers) as pool:
            tasks = [
                loop.run_in_executor(pool, _accumulate, integrand, seed_seq, size)
                for seed_seq, size in zip(seeds, substream_sizes(n))
            ]
            return await asyncio.gather(*tasks)

    def estimate(self, integrand: Integrand, n: int, seed: int) -> MCEstimate:
        started = time.perf_counter()
        partials = asyncio.run(self._gather(integrand, n, seed))
        total = math.fsum(p.total for p in partials)
        total_sq = math.fsum(p.total_sq for p in partials)
        total_imag = math.fsum(p.total_imag for p in partials)
        mean = total / n
        variance = max(total_sq / n - mean * mean, 0.0) * n / (n - 1)
        elapsed = time.perf_counter() - started
        logger.debug(f"MC estimate n={n} seed={seed}: mean={mean:.6e} in {elapsed:.2f}s")
        return MCEstimate(
            mean=mean,
            std_error=math.sqrt(variance / n),
            n_samples=n,
            n_accepted=sum(p.n_accepted for p in partials),
            seed=seed,
            imag_mean=total_imag / n,
            elapsed=elapsed,
        )

    # -- integrands ---------------------------------------------------------

    def _rho2_integrand(self, shell: ShellSpec, r: float, t: float) -> Integrand:
        lam = self.params.lambda_
        p0 = self.params.p0
        weight = -self.linear_prefactor * _shell_volume(shell.lambda_lo, shell.lambda_hi) * self.ball_volume

        def integrand(rng, m):
            k = _uniform_shell(rng, m, shell.lambda_lo, shell.lambda_hi)
            p = _uniform_shell(rng, m, 0.0, p0)
            k_prime = p - k
            w, w_prime = _norm(k), _norm(k_prime)
            accepted = w_prime < lam
            cos_kk = np.einsum("ij,ij->i", k, k_prime) / (w * w_prime)
            phase = np.exp(1j * (p[:, 2] * r - (w + w_prime) * t))
            values = weight * (1.0 + cos_kk) / np.sqrt(w * w_prime) * phase
            return Chunk(np.where(accepted, values, 0.0), accepted)

        return integrand

    def _rho1_integrand(self, shell: ShellSpec, r: float) -> Integrand:
        lam = self.params.lambda_
        p0 = self.params.p0
        weight = self.quadratic_prefactor * _shell_volume(shell.lambda_lo, shell.lambda_hi) * self.ball_volume ** 2

        def integrand(rng, m):
            k1 = _uniform_shell(rng, m, shell.lambda_lo, shell.lambda_hi)
            p = _uniform_shell(rng, m, 0.0, p0)
            p_prime = _uniform_shell(rng, m, 0.0, p0)
            k, k_prime = p - k1, p_prime - k1
            w, w_prime, w1 = _norm(k), _norm(k_prime), _norm(k1)
            accepted = (w < lam) & (w_prime < lam)
            cos_kk = np.einsum("ij,ij->i", k, k_prime) / (w * w_prime)
            phase = np.exp(-1j * (p[:, 2] - p_prime[:, 2]) * r)
            values = weight * (1.0 + cos_kk) / (w1 * w1 * np.sqrt(w * w_prime)) * phase
            return Chunk(np.where(accepted, values, 0.0), accepted)

        return integrand

    def _flux_integrand(self, shell: ShellSpec, r: float, t: float) -> Integrand:
        lam = self.params.lambda_
        p0 = self.params.p0
        weight = self.linear_prefactor * _shell_volume(shell.lambda_lo, shell.lambda_hi) * self.ball_volume

        def integrand(rng, m):
            k = _uniform_shell(rng, m, shell.lambda_lo, shell.lambda_hi)
            p = _uniform_shell(rng, m, 0.0, p0)
            k_prime = p - k
            w, w_prime = _norm(k), _norm(k_prime)
            accepted = w_prime < lam
            current = (w * k_prime[:, 2] + w_prime * k[:, 2]) / (w * w_prime) ** 1.5
            phase = np.exp(1j * (p[:, 2] * r - (w + w_prime) * t))
            values = weight * current * phase
            return Chunk(np.where(accepted, values, 0.0), accepted)

        return integrand

    def _i1_integrand(self, r: float) -> Integrand:
        lam = self.params.lambda_
        p0 = self.params.p0
        # radial-uniform k1: the |k1|^-2 of the integrand cancels against the density
        weight = -self.quadratic_prefactor * 4.0 * math.pi * lam * self.ball_volume ** 2

        def integrand(rng, m):
            k1 = _radial_uniform_ball(rng, m, lam)
            p = _uniform_shell(rng, m, 0.0, p0)
            p_prime = _uniform_shell(rng, m, 0.0, p0)
            k, k_prime = p - k1, p_prime - k1
            w, w_prime = _norm(k), _norm(k_prime)
            accepted = (w < lam) & (w_prime < lam) & (w > 0) & (w_prime > 0)
            with np.errstate(divide="ignore", invalid="ignore"):
                current = (w * k_prime[:, 2] + w_prime * k[:, 2]) / (w * w_prime) ** 1.5
            phase = np.exp(1j * (p_prime[:, 2] - p[:, 2]) * r)
            values = np.where(accepted, weight * current * phase, 0.0)
            return Chunk(values, accepted)

        return integrand

    # -- operations ---------------------------------------------------------

    def mc_rho2_shell(self, shell: ShellSpec, r: float, t: float, n: int, seed: int) -> MCEstimate:
        """Exact rho2 contribution of modes with lambda_lo < |k| < lambda_hi."""
        self.check_shell(shell)
        self._check_samples(n, MIN_SAMPLES_6D)
        self._check_time(shell, t)
        self._check_radius(r)
        return self.estimate(self._rho2_integrand(shell, r, t), n, seed)

    def mc_rho1_shell(self, shell: ShellSpec, r: float, n: int, seed: int) -> MCEstimate:
        """Exact rho1 shell contribution at t = 0 (9-dimensional)."""
        self.check_shell(shell)
        self._check_samples(n, MIN_SAMPLES_9D)
        self._check_radius(r)
        return self.estimate(self._rho1_integrand(shell, r), n, seed)

    def mc_flux_shell(self, shell: ShellSpec, r: float, t: float, n: int, seed: int) -> MCEstimate:
        """Exact I2 shell contribution; the radial flux is minus this."""
        self.check_shell(shell)
        self._check_samples(n, MIN_SAMPLES_6D)
        self._check_time(shell, t)
        if not r > 0:
            raise ParameterError(f"flux oracle needs r > 0, got {r}")
        return self.estimate(self._flux_integrand(shell, r, t), n, seed)

    def mc_i1_t0(self, r: float, n: int, seed: int) -> MCEstimate:
        """I1 at t = 0 over the whole momentum range; zero by k -> -k symmetry."""
        self._check_samples(n, MIN_SAMPLES_9D)
        self._check_radius(r)
        return self.estimate(self._i1_integrand(r), n, seed)

    # -- closed-form shell targets -----------------------------------------------

    def _shell_log_kernel(self, shell: ShellSpec, t: float) -> float:
        if t == 0:
            return math.log(shell.lambda_hi / shell.lambda_lo)
        t_abs = abs(t)
        return specfun.cosine_integral(2.0 * shell.lambda_hi * t_abs) - specfun.cosine_integral(
            2.0 * shell.lambda_lo * t_abs
        )

    def closed_form_shell_rho2(self, shell: ShellSpec, r: float, t: float) -> float:
        p = self.params
        prefactor = p.chi0 * p.n_norm ** 2 / (6.0 * math.pi ** 2)
        return -prefactor * specfun.f2(p.p0, r) * self._shell_log_kernel(shell, t)

    def closed_form_shell_rho1(self, shell: ShellSpec, r: float) -> float:
        p = self.params
        prefactor = 2.0 * p.chi0 ** 2 * p.n_norm ** 2 / math.pi ** 2
        return prefactor * specfun.f1(p.p0, r) * math.log(shell.lambda_hi / shell.lambda_lo)

    def closed_form_shell_flux(self, shell: ShellSpec, r: float, t: float) -> float:
        """Closed-form I2 with the cutoffs (lambda_lo, lambda_hi) in place of (q p0, lambda)."""
        if t == 0:
            return 0.0
        p = self.params
        prefactor = p.chi0 * p.n_norm ** 2 / (6.0 * math.pi ** 2)
        kernel = (math.cos(2.0 * shell.lambda_hi * t) - math.cos(2.0 * shell.lambda_lo * t)) / t
        return prefactor * specfun.g2(p.p0, r) * kernel

    # -- validation sweep -----------------------------------------------------------

    def _check(
        self, name: str, r: float, t: float, estimate: MCEstimate, target: float, relative: float
    ) -> OracleCheck:
        tolerance = max(SIGMAS * estimate.std_error, relative * abs(target))
        passed = abs(estimate.mean - target) <= tolerance
        if passed:
            logger.info(f"{name} r={r} t={t}: {estimate.mean:.6e} vs {target:.6e} (tol {tolerance:.2e}) ok")
        else:
            logger.error(f"{name} r={r} t={t}: {estimate.mean:.6e} vs {target:.6e} (tol {tolerance:.2e}) FAILED")
        return OracleCheck(
            name=name, r=r, t=t, estimate=estimate, target=target, tolerance=tolerance, passed=passed
        )

    def validate(self, shell: ShellSpec, n: int, seed: int, flux_time: Optional[float] = None) -> List[OracleCheck]:
        """
        Run every oracle against its closed-form target.

        Check i uses seed (seed + i) mod 2^64. The flux check runs at the
        oscillation-guard time unless flux_time is given.
        """
        self.check_shell(shell)
        p = self.params
        if flux_time is None:
            flux_time = min(OSCILLATION_GUARD / shell.lambda_lo, 0.5 * VALIDITY_TIME / p.p0)
        seeds = iter((seed + i) % 2 ** 64 for i in range(16))
        checks = []
        for r in (0.0, 1.0 / p.p0):
            est = self.mc_rho2_shell(shell, r, 0.0, n, next(seeds))
            checks.append(self._check("rho2_shell", r, 0.0, est, self.closed_form_shell_rho2(shell, r, 0.0), RHO2_TOLERANCE))
        for r in (0.0, 1.0 / p.p0):
            est = self.mc_rho1_shell(shell, r, n, next(seeds))
            checks.append(self._check("rho1_shell", r, 0.0, est, self.closed_form_shell_rho1(shell, r), RHO1_TOLERANCE))
        r_flux = 1.0 / p.p0
        for t in (0.0, flux_time):
            est = self.mc_flux_shell(shell, r_flux, t, n, next(seeds))
            target = self.closed_form_shell_flux(shell, r_flux, t)
            checks.append(self._check("flux_shell", r_flux, t, est, target, FLUX_TOLERANCE))
        est = self.mc_i1_t0(2.0 / p.p0, n, next(seeds))
        checks.append(self._check("i1_t0", 2.0 / p.p0, 0.0, est, 0.0, 0.0))
        return checks
