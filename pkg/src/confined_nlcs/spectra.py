"""Energy spectra: the analytic model-potential levels, the f-deformed
oscillator levels, and a finite-difference eigensolver for Dirichlet
problems on [-a, a] used to check both against numerics.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import DomainError
from .params import ConfinementParams, DeformationFunction, as_deformation

BASE_POINTS = 500
MIN_REFINEMENTS = 2
MAX_REFINEMENTS = 6


def model_energy(n, p: ConfinementParams):
    """E_n = gamma (n+1/2)^2 + sqrt(gamma^2 + omega^2)(n+1/2) + gamma/4  (hbar = 1)."""
    n_arr = np.asarray(n)
    if np.any(n_arr < 0):
        raise DomainError(f"n must be >= 0, got {n!r}")
    h = n_arr + 0.5
    return p.gamma * h * h + math.hypot(p.gamma, p.omega) * h + p.gamma / 4.0


def deformed_energy(n, f, Omega: float = 1.0):
    """E_n = (Omega/2)[(n+1) f(n+1)^2 + n f(n)^2] of the f-deformed Hamiltonian."""
    if Omega <= 0:
        raise DomainError(f"Omega must be positive, got {Omega!r}")
    n_arr = np.asarray(n)
    if np.any(n_arr < 0):
        raise DomainError(f"n must be >= 0, got {n!r}")
    if isinstance(f, (ConfinementParams, DeformationFunction)):
        sq = as_deformation(f).squared
    else:
        def sq(k):
            return np.vectorize(f, otypes=[float])(k) ** 2
    return 0.5 * Omega * ((n_arr + 1) * sq(n_arr + 1) + n_arr * sq(n_arr))


def shift_to_ground(energies):
    """Shift a spectrum so that its lowest level sits at zero."""
    E = np.asarray(energies, dtype=float)
    return E - E[0]


@dataclass(frozen=True)
class SpectrumResult:
    energies: np.ndarray
    est_error: np.ndarray
    grid_points: int
    domain: tuple
    converged: bool
    # raw FD eigenvalues per grid, coarsest first
    history: tuple = field(default=(), repr=False)

    def to_csv(self, params: ConfinementParams | None = None) -> str:
        buf = io.StringIO()
        if params is not None:
            buf.write(f"# a={params.a!r} m={params.m!r} omega={params.omega!r}\n")
        buf.write(f"# grid_points={self.grid_points} domain={self.domain[0]!r},{self.domain[1]!r} "
                  f"converged={str(self.converged).lower()}\n")
        buf.write("level,energy,est_error\n")
        for k, (e, err) in enumerate(zip(self.energies, self.est_error)):
            buf.write(f"{k},{e:.12g},{err:.3e}\n")
        return buf.getvalue()


def _fd_levels(potential, a, n_levels, points, mass):
    # uniform grid over [-a, a] with `points` nodes; endpoints carry psi = 0
    x, h = np.linspace(-a, a, points, retstep=True)
    xi = x[1:-1]
    V = np.asarray(potential(xi), dtype=float)
    if V.shape != xi.shape:
        V = np.broadcast_to(V, xi.shape).astype(float)
    if np.any(np.isnan(V)):
        raise DomainError("potential returned NaN on the grid")
    kin = 1.0 / (2.0 * mass * h * h)
    diag = 2.0 * kin + V
    off = np.full(xi.size - 1, -kin)
    return eigh_tridiagonal(diag, off, eigvals_only=True, select="i",
                            select_range=(0, n_levels - 1))


def solve_dirichlet(potential: Callable, a: float, n_levels: int, tol: float,
                    m: float = 1.0, max_refinements: int = MAX_REFINEMENTS) -> SpectrumResult:
    """Lowest ``n_levels`` eigenvalues of -(1/2m) psi'' + V psi = E psi, psi(+-a) = 0.

    Second-order central differences on grids of 500*2**k + 1 points,
    Richardson-extrapolated pairwise with an h**2 error model.  The error
    estimate of a level is the change of its extrapolant between the last
    two refinements.
    """
    if not (a > 0 and math.isfinite(a)):
        raise DomainError(f"a must be positive and finite, got {a!r}")
    if int(n_levels) != n_levels or n_levels < 1:
        raise DomainError(f"n_levels must be a positive integer, got {n_levels!r}")
    if not tol > 0:
        raise DomainError(f"tol must be positive, got {tol!r}")
    n_levels = int(n_levels)

    raw = []
    extrap = []
    points = None
    converged = False
    for k in range(max(max_refinements, MIN_REFINEMENTS) + 1):
        points = BASE_POINTS * 2**k + 1
        raw.append(_fd_levels(potential, a, n_levels, points, m))
        if k >= 1:
            extrap.append((4.0 * raw[-1] - raw[-2]) / 3.0)
        if k >= MIN_REFINEMENTS:
            err = np.abs(extrap[-1] - extrap[-2])
            if np.all(err <= tol):
                converged = True
                break

    best = extrap[-1]
    floor = 4.0 * np.finfo(float).eps * np.maximum(np.abs(best), 1.0)
    est = np.maximum(err, floor)
    return SpectrumResult(
        energies=best, est_error=est, grid_points=points, domain=(-a, a),
        converged=converged, history=tuple(raw),
    )


def harmonic_potential(p: ConfinementParams) -> Callable:
    """V(x) = k x^2 / 2 inside the box."""
    k = p.spring_constant
    return lambda x: 0.5 * k * np.asarray(x) ** 2


def model_potential(p: ConfinementParams) -> Callable:
    """V(x) = (k/2) (tan(delta x)/delta)^2 with delta = pi/(2a)."""
    k = p.spring_constant
    delta = math.pi / (2.0 * p.a)

    def V(x):
        return 0.5 * k * (np.tan(delta * np.asarray(x)) / delta) ** 2

    return V


def solve_confined_oscillator(p: ConfinementParams, n_levels: int, tol: float) -> SpectrumResult:
    """Harmonic oscillator between hard walls at +-a."""
    return solve_dirichlet(harmonic_potential(p), p.a, n_levels, tol, m=p.m)


def solve_model_potential(p: ConfinementParams, n_levels: int, tol: float) -> SpectrumResult:
    """Numerical spectrum of the tan^2 model potential, for comparison with model_energy."""
    V = model_potential(p)
    a = p.a

    def clamped(x):
        # tan diverges at the walls; only interior points reach here, but keep
        # them away from +-a in case of rounding
        limit = a * (1.0 - 1.0 / (2.0 * (x.size + 2)))
        return V(np.clip(x, -limit, limit))

    return solve_dirichlet(clamped, a, n_levels, tol, m=p.m)
