"""Truncated number-basis operators.

Operators are dense complex ``numpy`` arrays of shape (N, N) and vectors are
complex arrays of length N, both indexed by the occupation number n.  The
last row/column of any commutator built from truncated ladder operators is
wrong by construction; identities are only checked on the "valid block"
``[:-1, :-1]``.
"""
from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, NumericError


def _check_dim(N):
    if int(N) != N or N < 2:
        raise DomainError(f"truncation dimension must be an integer >= 2, got {N!r}")
    return int(N)


def adjoint(op: np.ndarray) -> np.ndarray:
    return op.conj().T


def commutator(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return x @ y - y @ x


def basis_vector(n: int, N: int) -> np.ndarray:
    v = np.zeros(N, dtype=complex)
    v[n] = 1.0
    return v


def build_ladder(N: int):
    """Return (a, a_dagger, n_op) truncated to N levels."""
    N = _check_dim(N)
    a = np.diag(np.sqrt(np.arange(1, N, dtype=float)), 1).astype(complex)
    number = np.diag(np.arange(N, dtype=float)).astype(complex)
    return a, adjoint(a), number


def build_deformed(N: int, f: Callable[[int], float]):
    """Return (A, A_dagger) with A = a f(n), for any deformation rule ``f``.

    A has the entry sqrt(n) f(n) at (n-1, n).
    """
    N = _check_dim(N)
    diag = np.empty(N - 1)
    for n in range(1, N):
        fn = float(f(n))
        if not math.isfinite(fn):
            raise NumericError(f"deformation function is not finite at n={n}", index=n)
        diag[n - 1] = math.sqrt(n) * fn
    A = np.diag(diag, 1).astype(complex)
    return A, adjoint(A)


def ladder_from_spectrum(energies: Sequence[float]):
    """Ladder operators a^dag = sum_i sqrt(E_{i+1}) |i+1><i| built from a spectrum.

    ``energies`` must start at 0 (shift the spectrum first) and be
    non-decreasing.  Returns (annihilation, creation) of size len(energies).
    """
    E = np.asarray(energies, dtype=float)
    if E.ndim != 1 or E.size == 0:
        raise DomainError("spectrum must be a non-empty 1-d sequence")
    if not np.all(np.isfinite(E)):
        raise DomainError("spectrum contains non-finite energies")
    if E[0] != 0.0:
        raise DomainError(f"spectrum must start at E0 = 0, got {E[0]!r}")
    if np.any(E < 0.0) or np.any(np.diff(E) < 0.0):
        raise DomainError("spectrum must be non-negative and non-decreasing")
    create = np.diag(np.sqrt(E[1:]), -1).astype(complex)
    return adjoint(create), create


def expectation(op: np.ndarray, psi: np.ndarray) -> complex:
    """<psi|op|psi>."""
    op = np.asarray(op)
    psi = np.asarray(psi)
    if op.shape != (psi.size, psi.size):
        raise DomainError(f"operator shape {op.shape} does not match vector length {psi.size}")
    return complex(np.vdot(psi, op @ psi))


def heisenberg_phase_G(n: int, f: Callable[[int], float]) -> float:
    """G(n) = ((n+2) f(n+2)^2 - n f(n)^2) / 2, the number-dependent frequency factor."""
    if n < 0:
        raise DomainError(f"n must be >= 0, got {n}")
    return 0.5 * ((n + 2) * float(f(n + 2)) ** 2 - n * float(f(n)) ** 2)
