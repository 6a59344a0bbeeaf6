"""Unit system and derived constants of the confined oscillator.

Units are hbar = 1; by default m = omega = 1 so that lengths are measured
in the oscillator length l0 = 1/(m*omega) and energies in units of omega.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError


def _check_positive(name, value):
    value = float(value)
    if not math.isfinite(value) or value <= 0.0:
        raise DomainError(f"{name} must be positive and finite, got {value!r}")
    return value


@dataclass(frozen=True)
class DeformationFunction:
    """f(n) = sqrt(gamma_prime * n + eta).

    gamma_prime = 0, eta = 1 is the undeformed oscillator (f == 1).
    Instances are callable and accept integer scalars or arrays.
    """

    gamma_prime: float
    eta: float

    def __post_init__(self):
        if not (math.isfinite(self.gamma_prime) and self.gamma_prime >= 0.0):
            raise DomainError(f"gamma_prime must be >= 0, got {self.gamma_prime!r}")
        if not (math.isfinite(self.eta) and self.eta > 0.0):
            raise DomainError(f"eta must be > 0, got {self.eta!r}")

    @classmethod
    def identity(cls) -> DeformationFunction:
        return cls(0.0, 1.0)

    def squared(self, n):
        """f(n)**2 = gamma_prime*n + eta, exact in floating point."""
        n_arr = np.asarray(n)
        if np.any(n_arr < 0):
            raise DomainError(f"deformation function needs n >= 0, got {n!r}")
        return self.gamma_prime * n_arr + self.eta

    def __call__(self, n):
        return np.sqrt(self.squared(n))


@dataclass(frozen=True)
class ConfinementParams:
    """Physical inputs (a, m, omega) and the constants derived from them.

    Build with :func:`derive_params`; the derived fields are stored once
    so that every module sees bitwise-identical values.
    """

    a: float
    m: float
    omega: float
    gamma: float
    gamma_prime: float
    eta: float
    l0: float

    @property
    def spring_constant(self) -> float:
        return self.m * self.omega**2

    @property
    def a_l(self) -> float:
        """Half-width in units of the oscillator length."""
        return self.a / self.l0

    @property
    def deformation(self) -> DeformationFunction:
        return DeformationFunction(self.gamma_prime, self.eta)

    def to_dict(self) -> dict:
        return {"a": self.a, "m": self.m, "omega": self.omega}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> ConfinementParams:
        # derived fields in the input are ignored on purpose
        try:
            a = data["a"]
        except KeyError:
            raise DomainError("parameter object needs key 'a'") from None
        return derive_params(a, data.get("m", 1.0), data.get("omega", 1.0))

    @classmethod
    def from_json(cls, text: str) -> ConfinementParams:
        return cls.from_dict(json.loads(text))


def derive_params(a: float, m: float = 1.0, omega: float = 1.0) -> ConfinementParams:
    """Derive gamma, gamma', eta and l0 for a well of half-width ``a``.

    >>> p = derive_params(4.0)
    >>> round(p.eta, 8)
    1.00296828
    """
    a = _check_positive("a", a)
    m = _check_positive("m", m)
    omega = _check_positive("omega", omega)
    gamma = 4.0 * math.pi**2 / (32.0 * a * a * m)
    gamma_prime = gamma / omega
    eta = math.hypot(gamma_prime, 1.0)
    return ConfinementParams(
        a=a, m=m, omega=omega, gamma=gamma, gamma_prime=gamma_prime,
        eta=eta, l0=1.0 / (m * omega),
    )


def as_deformation(p) -> DeformationFunction:
    """Accept either a ConfinementParams or a DeformationFunction."""
    if isinstance(p, DeformationFunction):
        return p
    if isinstance(p, ConfinementParams):
        return p.deformation
    raise TypeError(f"expected ConfinementParams or DeformationFunction, got {type(p).__name__}")


def deformation_f(n: int, p) -> float:
    """sqrt(gamma' n + eta) for the confined oscillator."""
    if n < 0:
        raise DomainError(f"n must be >= 0, got {n}")
    return float(as_deformation(p)(n))
