"""Nonlinear coherent states of the confined oscillator and their statistics.

The state with label beta is

    |beta> = N sum_n beta^n / sqrt(n! g(n)) |n>,   g(n) = prod_{j=1}^n (gamma' j + eta),

the right eigenstate of A = a f(n) with f(n) = sqrt(gamma' n + eta).  The
"factorial" (gamma' n + eta)! is read as g(n) everywhere, including inside
the generalized Bessel series; with that reading the Bessel form of N^2
equals the direct normalization sum.

Every function taking ``p`` accepts either a ConfinementParams or a bare
DeformationFunction (for gamma', eta pairs that do not come from a well).
"""
from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special

from .errors import DomainError, TruncationError
from .fock import build_deformed, build_ladder, expectation
from .params import ConfinementParams, DeformationFunction, as_deformation

DEFAULT_EPS_TAIL = 1e-14
MAX_DIM = 4096
_SERIES_RTOL = 1e-16
_CHUNK = 64


def _log_g(n_max: int, d: DeformationFunction) -> np.ndarray:
    """log g(n) for n = 0..n_max."""
    j = np.arange(1, n_max + 1, dtype=float)
    return np.concatenate(([0.0], np.cumsum(np.log(d.gamma_prime * j + d.eta))))


def generalized_factorial(n: int, p) -> float:
    """g(n) = prod_{j=1}^n (gamma' j + eta), with g(0) = 1."""
    if n < 0:
        raise DomainError(f"n must be >= 0, got {n}")
    d = as_deformation(p)
    if n <= 30:
        out = 1.0
        for j in range(1, n + 1):
            out *= d.gamma_prime * j + d.eta
        return out
    return math.exp(_log_g(n, d)[-1])


def log_generalized_factorial(n: int, p) -> float:
    if n < 0:
        raise DomainError(f"n must be >= 0, got {n}")
    return float(_log_g(n, as_deformation(p))[-1])


def _log_weights(x: float, n_max: int, d: DeformationFunction) -> np.ndarray:
    # log of |beta|^(2n) / (n! g(n)), n = 0..n_max
    n = np.arange(n_max + 1, dtype=float)
    return n * math.log(x) - special.gammaln(n + 1) - _log_g(n_max, d)


def _log_series_sum(log_term, rtol=_SERIES_RTOL, max_terms=1 << 20):
    """logsumexp of a positive series, summed until the terms are past their
    peak and below ``rtol`` times the partial sum.  ``log_term(s)`` maps an
    index array to log-terms."""
    total = -math.inf
    start = 0
    prev_last = math.inf
    while start < max_terms:
        s = np.arange(start, start + _CHUNK)
        lt = log_term(s)
        total = np.logaddexp(total, special.logsumexp(lt))
        if lt[-1] < prev_last and lt[-1] < lt[-2] and lt[-1] < total + math.log(rtol):
            return float(total)
        prev_last = lt[-1]
        start += _CHUNK
    raise TruncationError("series did not converge")


@dataclass(frozen=True)
class NlcsState:
    """Truncated, renormalized nonlinear coherent state.

    ``tail_bound`` bounds the probability weight beyond ``trunc_dim`` in the
    untruncated state.
    """

    beta: complex
    params: ConfinementParams | DeformationFunction
    coeffs: np.ndarray = field(repr=False)
    trunc_dim: int
    tail_bound: float
    eps_tail: float = DEFAULT_EPS_TAIL

    @property
    def deformation(self) -> DeformationFunction:
        return as_deformation(self.params)

    def padded(self, extra: int = 2) -> np.ndarray:
        """Coefficients with ``extra`` trailing zeros, so that products of
        ladder operators act on the state without hitting the matrix edge."""
        return np.concatenate((self.coeffs, np.zeros(extra, dtype=complex)))


def build_nlcs(beta: complex, p, eps_tail: float = DEFAULT_EPS_TAIL,
               max_dim: int = MAX_DIM) -> NlcsState:
    """Construct |beta>_f in N Fock states, where N - 1 is the first index whose
    tail sum_{n >= N-1} P_n is below eps_tail.

    The tail beyond N is bounded with the ratio test: the probability ratio
    P_{n+1}/P_n = |beta|^2 / ((n+1)(gamma'(n+1) + eta)) decreases in n, so
    sum_{n>=N} P_n <= P_N / (1 - r_N) once r_N < 1.
    """
    beta = complex(beta)
    if not cmath.isfinite(beta):
        raise DomainError(f"beta must be finite, got {beta!r}")
    if not eps_tail > 0:
        raise DomainError(f"eps_tail must be positive, got {eps_tail!r}")
    d = as_deformation(p)
    x = abs(beta) ** 2
    if x == 0.0:
        coeffs = np.zeros(2, dtype=complex)
        coeffs[0] = 1.0
        return NlcsState(beta, p, coeffs, 2, 0.0, eps_tail)

    L = _CHUNK
    while True:
        lw = _log_weights(x, L, d)
        n = np.arange(L + 1, dtype=float)
        ratio = x / ((n + 1) * (d.gamma_prime * (n + 1) + d.eta))
        # ratio decreases, so once it's < 1/2 and the terms are tiny we have enough
        if ratio[-1] < 0.5 and lw[-1] < special.logsumexp(lw) + math.log(eps_tail) - 40:
            break
        if L >= max_dim:
            raise TruncationError(f"|beta|^2 = {x} needs more than {max_dim} Fock states")
        L = min(2 * L, max_dim)

    log_z = special.logsumexp(lw)
    log_p = lw - log_z
    with np.errstate(divide="ignore"):
        log_bound = log_p - np.log1p(-np.minimum(ratio, 1.0))
    log_bound[ratio >= 1.0] = math.inf
    # keep one state past the cut so that the edge coefficient itself is
    # below eps_tail; the eigen-residual is |beta c_{N-1}| and stays small
    ok = np.flatnonzero((log_bound < math.log(eps_tail)) & (n >= 1))
    if ok.size == 0:
        raise TruncationError(f"|beta|^2 = {x} needs more than {max_dim} Fock states")
    N = int(ok[0]) + 1
    if N > max_dim:
        raise TruncationError(f"|beta|^2 = {x} needs more than {max_dim} Fock states")

    kept = log_p[:N]
    amp = np.exp(0.5 * (kept - special.logsumexp(kept)))
    coeffs = amp * np.exp(1j * cmath.phase(beta) * np.arange(N))
    return NlcsState(beta, p, coeffs, N, float(math.exp(log_bound[N])), eps_tail)


def gen_bessel_I(eta: float, gamma_prime: float, x: float) -> float:
    """sum_s (x/2)^(2s+eta) / (s! g(s)), g(s) = prod_{j<=s}(gamma' j + eta).

    With gamma' = 1 this is Gamma(eta+1) I_eta(x); with gamma' = 0 it is
    (x/2)^eta exp(x^2/4).
    """
    if x < 0:
        raise DomainError(f"x must be >= 0, got {x!r}")
    if x == 0:
        return 0.0 if eta > 0 else 1.0
    return math.exp(log_gen_bessel_I(eta, gamma_prime, x))


def log_gen_bessel_I(eta: float, gamma_prime: float, x: float) -> float:
    if x <= 0:
        raise DomainError(f"x must be > 0 for the logarithm, got {x!r}")
    d = DeformationFunction(gamma_prime, eta)
    log_half = math.log(x / 2.0)
    log_g_cache = {"g": _log_g(_CHUNK, d)}

    def log_term(s):
        g = log_g_cache["g"]
        if s[-1] >= g.size:
            g = log_g_cache["g"] = _log_g(2 * int(s[-1]) + 1, d)
        return (2 * s + eta) * log_half - special.gammaln(s + 1) - g[s]

    return _log_series_sum(log_term)


def normalization_sq(beta: complex, p) -> float:
    """N^2 = 1 / sum_n |beta|^(2n) / (n! g(n)), summed directly."""
    x = abs(complex(beta)) ** 2
    if x == 0.0:
        return 1.0
    d = as_deformation(p)
    log_x = math.log(x)
    log_g_cache = {"g": _log_g(_CHUNK, d)}

    def log_term(n):
        g = log_g_cache["g"]
        if n[-1] >= g.size:
            g = log_g_cache["g"] = _log_g(2 * int(n[-1]) + 1, d)
        return n * log_x - special.gammaln(n + 1) - g[n]

    return math.exp(-_log_series_sum(log_term))


def normalization_sq_bessel(beta: complex, p) -> float:
    """N^2 = |beta|^eta / I_eta^{gamma'}(2|beta|)."""
    r = abs(complex(beta))
    if r == 0.0:
        return 1.0
    d = as_deformation(p)
    return math.exp(d.eta * math.log(r) - log_gen_bessel_I(d.eta, d.gamma_prime, 2.0 * r))


def photon_distribution(state: NlcsState) -> np.ndarray:
    return np.abs(state.coeffs) ** 2


def number_moments(state: NlcsState) -> tuple[float, float]:
    """(<n>, <n(n-1)>) from the photon distribution."""
    P = photon_distribution(state)
    n = np.arange(P.size, dtype=float)
    return float(P @ n), float(P @ (n * (n - 1)))


def mandel_parameter(state: NlcsState) -> float:
    """M = ((Delta n)^2 - <n>) / <n>; 0 at beta = 0 by continuity."""
    mean, fact2 = number_moments(state)
    if mean == 0.0:
        return 0.0
    # (Delta n)^2 - <n> = <n(n-1)> - <n>^2, without the cancellation
    return (fact2 - mean * mean) / mean


def _quadrature(lower: np.ndarray, phi: float) -> np.ndarray:
    e = cmath.exp(1j * phi)
    return 0.5 * (lower * e + lower.conj().T * e.conjugate())


def quadrature_variance(state: NlcsState, phi: float, deformed: bool = False) -> float:
    """Variance of X = (L e^{i phi} + L^dag e^{-i phi}) / 2 with L = a or A.

    Y is X at phi - pi/2.  ``phi`` is in radians.
    """
    psi = state.padded()
    N = psi.size
    if deformed:
        lower, _ = build_deformed(N, state.deformation)
    else:
        lower, _, _ = build_ladder(N)
    X = _quadrature(lower, phi)
    mean = expectation(X, psi).real
    second = expectation(X @ X, psi).real
    return second - mean * mean


def squeeze_s(state: NlcsState, phi: float) -> float:
    """s = 4 (Delta X_a)^2 - 1; negative means squeezing."""
    return 4.0 * quadrature_variance(state, phi) - 1.0


def deformed_commutator_mean(state: NlcsState) -> float:
    """<(n+1) f^2(n+1) - n f^2(n)> = <gamma'(2n+1) + eta>."""
    psi = state.padded()
    n = np.arange(psi.size, dtype=float)
    f2 = state.deformation.squared
    upper = expectation(np.diag((n + 1) * f2(n + 1)), psi).real
    lower = expectation(np.diag(n * f2(n)), psi).real
    return upper - lower


def squeeze_S_deformed(state: NlcsState, phi: float) -> float:
    """S = 4 (Delta X_A)^2 - <(n+1) f^2(n+1)> + <n f^2(n)>.

    On an exact eigenstate of A this is identically zero for every phi:
    <A^2> = beta^2 and <A^dag A> = |beta|^2 make all beta-dependence cancel,
    leaving 4 (Delta X_A)^2 = <[A, A^dag]>.  What remains here is truncation
    error of order ``tail_bound``.
    """
    return 4.0 * quadrature_variance(state, phi, deformed=True) - deformed_commutator_mean(state)


# resolution of the identity --------------------------------------------------

def _measure_orders(n: int, d: DeformationFunction, alpha: float):
    """Bessel-K order m and power l of the measure for the n-th diagonal element."""
    m = (d.gamma_prime - 1.0) * n + alpha
    l = (d.gamma_prime - 1.0) * n + 1.0
    return m, l


def identity_moment_closed_form(n: int, p, alpha: float | None = None) -> float:
    """M_n = 4 Gamma(n + 3/2 + (eta-alpha)/2) Gamma(gamma' n + (eta+alpha)/2 + 3/2) / (n! g(n)).

    Obtained by substituting x = t^2/4 and using
    int_0^inf K_nu(t) t^(mu-1) dt = 2^(mu-2) Gamma((mu-nu)/2) Gamma((mu+nu)/2).
    Returns inf when the moment integral diverges.
    """
    d = as_deformation(p)
    alpha = d.eta if alpha is None else float(alpha)
    g1 = n + 1.5 + 0.5 * (d.eta - alpha)
    g2 = d.gamma_prime * n + 0.5 * (d.eta + alpha) + 1.5
    if g1 <= 0 or g2 <= 0:
        return math.inf
    log_val = (math.log(4.0) + special.gammaln(g1) + special.gammaln(g2)
               - special.gammaln(n + 1) - log_generalized_factorial(n, d))
    return math.exp(log_val)


def _moment_integrand(n: int, d: DeformationFunction, alpha: float):
    m, l = _measure_orders(n, d, alpha)
    log_pref = math.log(math.pi) - special.gammaln(n + 1) - log_generalized_factorial(n, d)
    log_w_const = math.log(8.0 / math.pi)

    def integrand(x):
        if x <= 0.0:
            return 0.0
        z = 2.0 * math.sqrt(x)
        log_I = log_gen_bessel_I(d.eta, d.gamma_prime, z)
        # N^2(x) = x^(eta/2) / I(2 sqrt x)
        log_norm = 0.5 * d.eta * math.log(x) - log_I
        # w(sqrt x) = (8/pi) I(2 sqrt x) K_m(2 sqrt x) x^(l/2)
        kve = special.kve(abs(m), z)
        if kve == 0.0:
            return 0.0
        log_w = log_w_const + log_I + math.log(kve) - z + 0.5 * l * math.log(x)
        return math.exp(log_pref + n * math.log(x) + log_norm + log_w)

    return integrand


@dataclass(frozen=True)
class MomentReport:
    """Diagonal moments of the resolution-of-identity integral, target 1."""

    eta: float
    gamma_prime: float
    alpha: float
    alpha_interpretation: str
    n: tuple
    moments: tuple
    closed_form: tuple
    quad_error: tuple
    converged: tuple
    scheme: dict = field(default_factory=dict)

    @property
    def deviations(self) -> tuple:
        return tuple(abs(mv - 1.0) for mv in self.moments)

    def to_dict(self) -> dict:
        rows = [
            {"n": k, "moment": mv, "closed_form": cf, "deviation": abs(mv - 1.0),
             "quad_error": qe, "converged": ok}
            for k, mv, cf, qe, ok in zip(self.n, self.moments, self.closed_form,
                                          self.quad_error, self.converged)
        ]
        return {
            "eta": self.eta, "gamma_prime": self.gamma_prime, "alpha": self.alpha,
            "alpha_interpretation": self.alpha_interpretation,
            "scheme": self.scheme, "moments": rows,
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def identity_moment_check(p, n_max: int, alpha: float | str | None = "eta",
                          epsrel: float = 1e-10) -> MomentReport:
    """Evaluate M_n = pi/(n! g(n)) int_0^inf x^n N^2(x) w(sqrt x) dx for n <= n_max.

    The weight is w(sqrt x) = (8/pi) I(2 sqrt x) K_m(2 sqrt x) x^(l/2) with
    m = (gamma'-1) n + alpha and l = (gamma'-1) n + 1.  ``alpha="eta"`` (the
    default) sets alpha = eta; a number is used as given.  Moments come from
    adaptive quadrature; the Gamma-function reduction is returned alongside
    as ``closed_form``.  Non-convergent quadratures are flagged, not raised.
    """
    if int(n_max) != n_max or n_max < 1:
        raise DomainError(f"n_max must be an integer >= 1, got {n_max!r}")
    d = as_deformation(p)
    if alpha is None or alpha == "eta":
        alpha_val, interp = d.eta, "eta"
    else:
        alpha_val, interp = float(alpha), "user-value"

    ns, moments, closed, errs, flags = [], [], [], [], []
    for n in range(int(n_max) + 1):
        f = _moment_integrand(n, d, alpha_val)
        # the integrand peaks near x ~ (n + 1)^2; split there for quad
        split = float((n + 2) ** 2)
        ok = True
        total, err = 0.0, 0.0
        for lo, hi in ((0.0, split), (split, math.inf)):
            try:
                res = integrate.quad(f, lo, hi, epsabs=0.0, epsrel=epsrel,
                                     limit=400, full_output=1)
            except (OverflowError, ValueError):
                res = (math.nan, math.inf, None)
            val, e = res[0], res[1]
            # a fourth element is quad's warning message
            ok = ok and len(res) == 3
            total += val
            err += e
        ok = ok and math.isfinite(total) and err <= max(1e-8 * abs(total), 1e-300)
        ns.append(n)
        moments.append(total)
        closed.append(identity_moment_closed_form(n, d, alpha_val))
        errs.append(err)
        flags.append(ok)

    return MomentReport(
        eta=d.eta, gamma_prime=d.gamma_prime, alpha=alpha_val, alpha_interpretation=interp,
        n=tuple(ns), moments=tuple(moments), closed_form=tuple(closed),
        quad_error=tuple(errs), converged=tuple(flags),
        scheme={"method": "scipy.integrate.quad", "epsrel": epsrel,
                "intervals": "[0, (n+2)^2], [(n+2)^2, inf)"},
    )
