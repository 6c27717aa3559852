"""Spin-1/2 operator algebra for the driven two-level system.

Atomic units with hbar = k_B = 1 throughout. The driving Hamiltonian is
H = omega*S_z + epsilon*S_x; together with L = epsilon*S_z - omega*S_x and
C = rabi*S_y it forms a Liouville-orthogonal basis that closes under
commutation for any field values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateFrequencyError

SX = 0.5 * np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SY = 0.5 * np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SZ = 0.5 * np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
ID2 = np.eye(2, dtype=complex)


def generalized_rabi(omega: float, epsilon: float) -> float:
    """Instantaneous level splitting sqrt(omega^2 + epsilon^2) of the driven TLS."""
    if omega == 0.0 and epsilon == 0.0:
        raise DegenerateFrequencyError("omega = epsilon = 0: operator basis collapses")
    return float(np.hypot(omega, epsilon))


def adiabatic_parameter(omega, epsilon, omega_dot, epsilon_dot):
    """Driving speed measured against the level splitting.

    mu = (omega_dot*epsilon - omega*epsilon_dot) / rabi^3. Vanishes for a
    static Hamiltonian and for pure amplitude modulation (epsilon = 0 held).
    """
    rabi = generalized_rabi(omega, epsilon)
    return (omega_dot * epsilon - omega * epsilon_dot) / rabi**3


def kappa(mu):
    """Dressed-frequency factor sqrt(1 + mu^2); even in mu and >= 1."""
    return np.sqrt(1.0 + np.asarray(mu, dtype=float) ** 2)


@dataclass(frozen=True)
class BasisFrame:
    """The operator triple {H, L, C} for one pair of field values.

    Invariants: pairwise Liouville-orthogonal, each with Hilbert-Schmidt
    norm squared rabi^2/2, and closed under commutation.
    """

    h: np.ndarray
    l: np.ndarray
    c: np.ndarray
    omega: float
    epsilon: float
    rabi: float

    @classmethod
    def from_fields(cls, omega: float, epsilon: float) -> "BasisFrame":
        rabi = generalized_rabi(omega, epsilon)
        return cls(
            h=omega * SZ + epsilon * SX,
            l=epsilon * SZ - omega * SX,
            c=rabi * SY,
            omega=float(omega),
            epsilon=float(epsilon),
            rabi=rabi,
        )

    def operators(self) -> np.ndarray:
        """The triple stacked as a (3, 2, 2) array in (H, L, C) order."""
        return np.stack([self.h, self.l, self.c])


@dataclass(frozen=True)
class InertialParameters:
    """Slow-drive coordinates: mu, kappa = sqrt(1+mu^2), accumulated phase."""

    mu: float
    kappa: float
    theta_bar: float

    def __post_init__(self):
        if not np.isclose(self.kappa**2 - self.mu**2, 1.0, atol=1e-9):
            raise ValueError("kappa^2 - mu^2 must equal 1")


def b_matrix(mu: float) -> np.ndarray:
    """Constant generator of the scaled frame dynamics; eigenvalues {0, +-kappa}."""
    return 1.0j * np.array(
        [[0.0, mu, 0.0], [-mu, 0.0, 1.0], [0.0, -1.0, 0.0]], dtype=complex
    )


def v_matrix(mu: float) -> tuple[np.ndarray, np.ndarray]:
    """Diagonalizing matrix of ``b_matrix`` and its exact inverse.

    Columns are eigenvectors ordered for eigenvalues (0, +kappa, -kappa).
    """
    k = float(kappa(mu))
    v = np.array(
        [[1.0, -mu, -mu], [0.0, 1.0j * k, -1.0j * k], [mu, 1.0, 1.0]], dtype=complex
    )
    k2 = k * k
    v_inv = np.array(
        [
            [1.0 / k2, 0.0, mu / k2],
            [-mu / (2 * k2), -1.0j / (2 * k), 1.0 / (2 * k2)],
            [-mu / (2 * k2), 1.0j / (2 * k), 1.0 / (2 * k2)],
        ],
        dtype=complex,
    )
    return v, v_inv


@dataclass(frozen=True)
class EigenoperatorSet:
    """Eigenoperators {xi, sigma, sigma_dag} of the free propagator.

    xi is Hermitian with eigenvalues +-1/2; sigma is the lowering operator
    in the xi eigenbasis with spectral norm 1/(2*kappa). Together with the
    identity they span the 4-dimensional operator space.
    """

    xi: np.ndarray
    sigma: np.ndarray
    sigma_dag: np.ndarray
    eigenvalues: tuple[float, float, float]
    mu: float


def eigenoperators(mu: float, frame0: BasisFrame) -> EigenoperatorSet:
    """Eigenoperators for adiabatic parameter ``mu`` on the ``frame0`` operators."""
    k = float(kappa(mu))
    rabi0 = frame0.rabi
    xi = (frame0.h + mu * frame0.c) / (k * rabi0)
    sigma = (-mu * frame0.h - 1.0j * k * frame0.l + frame0.c) / (2 * k * k * rabi0)
    return EigenoperatorSet(
        xi=xi,
        sigma=sigma,
        sigma_dag=sigma.conj().T,
        eigenvalues=(0.0, k, -k),
        mu=float(mu),
    )


def eigenoperator_arrays(mu, frame0: BasisFrame) -> tuple[np.ndarray, np.ndarray]:
    """Batched (xi, sigma) matrices, shape (n, 2, 2), for an array of mu values."""
    mu = np.asarray(mu, dtype=float)[:, None, None]
    k = np.sqrt(1.0 + mu**2)
    xi = (frame0.h + mu * frame0.c) / (k * frame0.rabi)
    sigma = (-mu * frame0.h - 1.0j * k * frame0.l + frame0.c) / (2 * k * k * frame0.rabi)
    return xi, sigma


def v_matrix_arrays(mu) -> tuple[np.ndarray, np.ndarray]:
    """Batched diagonalizing matrices and inverses, shape (n, 3, 3)."""
    mu = np.asarray(mu, dtype=float)
    k = np.sqrt(1.0 + mu**2)
    k2 = k * k
    n = len(mu)
    one = np.ones(n)
    v = np.zeros((n, 3, 3), dtype=complex)
    v[:, 0, 0] = one
    v[:, 0, 1] = -mu
    v[:, 0, 2] = -mu
    v[:, 1, 1] = 1.0j * k
    v[:, 1, 2] = -1.0j * k
    v[:, 2, 0] = mu
    v[:, 2, 1] = one
    v[:, 2, 2] = one
    v_inv = np.zeros((n, 3, 3), dtype=complex)
    v_inv[:, 0, 0] = 1.0 / k2
    v_inv[:, 0, 2] = mu / k2
    v_inv[:, 1, 0] = -mu / (2 * k2)
    v_inv[:, 1, 1] = -1.0j / (2 * k)
    v_inv[:, 1, 2] = 1.0 / (2 * k2)
    v_inv[:, 2, 0] = -mu / (2 * k2)
    v_inv[:, 2, 1] = 1.0j / (2 * k)
    v_inv[:, 2, 2] = 1.0 / (2 * k2)
    return v, v_inv
