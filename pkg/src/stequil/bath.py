"""Kinetic coefficients induced by an Ohmic boson bath.

The upward/downward rates obey detailed balance at the dressed transition
frequency alpha = kappa * rabi rather than at the bare splitting, which is
what skews the steady state away from the instantaneous thermal state
under fast driving.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonPositiveFrequencyError
from .su2 import kappa

# Rate prefactor G in k_up = G * alpha * N(alpha).  The microscopic coupling
# fixes only the combination entering G up to bookkeeping of the jump-operator
# normalization; this default is the smallest value (with margin) for which
# every preset transformation admits a driving protocol at the reference
# duration 6*(2*pi/5).  Heating-direction syntheses fail below ~0.10.
DEFAULT_PREFACTOR = 0.105


@dataclass(frozen=True)
class BathSpec:
    """Bath temperature and rate prefactor, both in atomic units."""

    temperature: float
    prefactor: float = DEFAULT_PREFACTOR

    def __post_init__(self):
        if self.temperature <= 0:
            raise ValueError("bath temperature must be positive")
        if self.prefactor <= 0:
            raise ValueError("rate prefactor must be positive")


@dataclass(frozen=True)
class RatePair:
    """Upward and downward jump rates; k_up/k_down = exp(-alpha/T) exactly."""

    k_up: float
    k_down: float


def bose_occupation(alpha, temperature):
    """Planck occupation 1/(exp(alpha/T) - 1) of the bath mode at alpha."""
    alpha = np.asarray(alpha, dtype=float)
    if np.any(alpha <= 0):
        raise NonPositiveFrequencyError("occupation defined for alpha > 0 only")
    out = 1.0 / np.expm1(alpha / temperature)
    return float(out) if out.ndim == 0 else out


def rates(alpha, bath: BathSpec) -> RatePair:
    """Jump rates at transition frequency ``alpha``; accepts scalars or arrays."""
    n = bose_occupation(alpha, bath.temperature)
    k_up = bath.prefactor * alpha * n
    k_down = bath.prefactor * alpha * (n + 1.0)
    if np.ndim(alpha) == 0:
        return RatePair(float(k_up), float(k_down))
    return RatePair(k_up, k_down)


def effective_frequency(mu, rabi):
    """Driving-dressed transition frequency kappa(mu) * rabi >= rabi."""
    return kappa(mu) * rabi
