"""Isolated-system propagation: closed-form inertial frames and an exact
time-ordered oracle, plus state-distance metrics.

Expectation values along open trajectories follow the picture convention
<O(t)> = tr(rho_int(t) O_H(t)): the interaction-picture state is contracted
with Heisenberg-evolved operators, so the free rotation never has to be
reconstructed explicitly unless the exact oracle is requested.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import InertialViolationWarning, InvalidStateError, OutOfRangeError
from .protocol import ControlProtocol
from .su2 import SX, SY, SZ, ID2, v_matrix_arrays

ACCURACY_CLIP = 16.0


def theta_bar(protocol: ControlProtocol, t) -> float | np.ndarray:
    """Accumulated phase of the level splitting, int_0^t rabi dt'.

    Trapezoidal on the protocol lattice; linear within a lattice cell.
    """
    lat = protocol.lattice
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < -1e-12) or np.any(t_arr > protocol.t_f * (1 + 1e-12)):
        raise OutOfRangeError(f"t outside protocol support [0, {protocol.t_f}]")
    out = np.interp(t_arr, lat.t, lat.theta)
    return float(out) if out.ndim == 0 else out


def check_inertial(protocol: ControlProtocol, strict: bool = False) -> float:
    """Largest value of |d(mu)/dt| / (2 kappa^2 rabi) on the lattice.

    Values approaching one void the closed-form propagator; by default this
    only warns, since the accuracy loss is itself a quantity of interest.
    """
    ratio = float(np.max(protocol.inertial_ratio()))
    if ratio >= 1.0:
        msg = f"inertial condition violated: max |mu_dot|/(2 kappa^2 rabi) = {ratio:.3g}"
        if strict:
            raise InvalidStateError(msg)
        warnings.warn(msg, InertialViolationWarning, stacklevel=2)
    return ratio


@dataclass(frozen=True)
class HeisenbergFrame:
    """Linear map sending the t=0 operator triple to its Heisenberg image.

    v_i(t) = scale * sum_j matrix[i, j] v_j(0), with scale = rabi(t)/rabi(0).
    """

    matrix: np.ndarray
    scale: float
    t: float

    def full(self) -> np.ndarray:
        return self.scale * self.matrix

    def map_operators(self, ops0: np.ndarray) -> np.ndarray:
        """Heisenberg images of the frame-0 triple (stacked (3, 2, 2))."""
        return self.scale * np.einsum("ij,jab->iab", self.matrix, ops0)


def _frame_matrices(protocol: ControlProtocol, idx: np.ndarray) -> np.ndarray:
    """Batch of inertial frame matrices at the given lattice indices."""
    lat = protocol.lattice
    mu = lat.mu[idx]
    big_theta = lat.alpha_theta[idx]  # int_0^t kappa*rabi dt' = eigenphase of the +-kappa pair
    v, v_inv = v_matrix_arrays(mu)
    phases = np.stack(
        [np.ones_like(big_theta), np.exp(-1j * big_theta), np.exp(1j * big_theta)], axis=1
    )
    return (v * phases[:, None, :]) @ v_inv


def inertial_heisenberg(protocol: ControlProtocol, t: float, check: bool = True) -> HeisenbergFrame:
    """Closed-form Heisenberg map at time ``t`` (nearest lattice sample)."""
    if check:
        check_inertial(protocol)
    i = protocol.index_of(t)
    lat = protocol.lattice
    mat = _frame_matrices(protocol, np.array([i]))[0]
    return HeisenbergFrame(matrix=mat, scale=float(lat.rabi[i] / lat.rabi[0]), t=float(lat.t[i]))


def inertial_frames_on_grid(protocol: ControlProtocol) -> np.ndarray:
    """Frame matrices (including the rabi scale) on the protocol grid."""
    idx = np.arange(0, len(protocol.lattice.t), 2)
    mats = _frame_matrices(protocol, idx)
    scale = protocol.grid.rabi / protocol.lattice.rabi[0]
    return mats * scale[:, None, None]


def exact_propagate(protocol: ControlProtocol, dt_fine: float | None = None) -> np.ndarray:
    """Exact free propagators U(t) on the protocol grid.

    Midpoint-exponential stepping: each grid cell is advanced by
    exp(-i H(t + dt/2) dt), which is unitary to machine precision. Stage
    Hamiltonians are read from the stored half-step samples.
    """
    h = protocol.grid_step
    if dt_fine is not None and abs(dt_fine - h) > 1e-12 * max(1.0, h):
        raise ValueError(
            f"dt_fine={dt_fine} must match the protocol grid step {h}; "
            "build the protocol at the desired resolution instead"
        )
    mid = protocol.mid
    half_angle = 0.5 * mid.rabi * h
    cos = np.cos(half_angle)
    sinc = np.sin(half_angle) / np.where(mid.rabi == 0, 1.0, mid.rabi)
    # exp(-i H dt) = cos(rabi dt/2) I - 2i sin(rabi dt/2)/rabi * H
    steps = (
        cos[:, None, None] * ID2
        - 2j * sinc[:, None, None] * (mid.omega[:, None, None] * SZ + mid.epsilon[:, None, None] * SX)
    )
    n = protocol.n_grid
    out = np.empty((n, 2, 2), dtype=complex)
    out[0] = ID2
    u = ID2
    for i in range(n - 1):
        u = steps[i] @ u
        out[i + 1] = u
    return out


def propagate_state_exact(protocol: ControlProtocol, rho0: np.ndarray) -> np.ndarray:
    """Isolated evolution of a state under the exact propagator series."""
    us = exact_propagate(protocol)
    return np.einsum("nab,bc,ndc->nad", us, np.asarray(rho0, dtype=complex), us.conj())


def propagate_state_inertial(protocol: ControlProtocol, rho0: np.ndarray, check: bool = False) -> np.ndarray:
    """Isolated evolution reconstructed from the inertial Heisenberg frames.

    The state is rebuilt from the identity component plus the three frame
    expectations, using the Liouville orthogonality of the instantaneous
    triple (norms rabi^2/2 each).
    """
    if check:
        check_inertial(protocol)
    frames = inertial_frames_on_grid(protocol)
    ops0 = protocol.frame0.operators()
    m0 = np.einsum("ab,jba->j", np.asarray(rho0, dtype=complex), ops0)
    expect = np.real(np.einsum("nij,j->ni", frames, m0))

    grid = protocol.grid
    ops_t = np.empty((len(grid.t), 3, 2, 2), dtype=complex)
    ops_t[:, 0] = grid.omega[:, None, None] * SZ + grid.epsilon[:, None, None] * SX
    ops_t[:, 1] = grid.epsilon[:, None, None] * SZ - grid.omega[:, None, None] * SX
    ops_t[:, 2] = grid.rabi[:, None, None] * SY
    weight = 2.0 / grid.rabi**2
    rho = 0.5 * ID2 + np.einsum("n,ni,niab->nab", weight, expect, ops_t)
    return rho


def fidelity(rho1: np.ndarray, rho2: np.ndarray) -> float:
    """Uhlmann fidelity of two qubit states.

    For 2x2 density matrices the closed form
    F = tr(rho1 rho2) + 2 sqrt(det rho1 det rho2) is exact.
    """
    for rho in (rho1, rho2):
        if abs(np.trace(rho).real - 1.0) > 1e-8 or abs(np.trace(rho).imag) > 1e-8:
            raise InvalidStateError("density matrix trace deviates from 1")
        if np.min(np.linalg.eigvalsh(rho)) < -1e-10:
            raise InvalidStateError("density matrix has a negative eigenvalue")
    cross = float(np.real(np.trace(rho1 @ rho2)))
    d1 = max(float(np.real(np.linalg.det(rho1))), 0.0)
    d2 = max(float(np.real(np.linalg.det(rho2))), 0.0)
    return float(min(cross + 2.0 * np.sqrt(d1 * d2), 1.0))


def accuracy(rho_final: np.ndarray, rho_target: np.ndarray) -> float:
    """Order-of-magnitude closeness -log10(1 - F), clipped at 16."""
    deficit = 1.0 - fidelity(rho_final, rho_target)
    if deficit <= 10.0**-ACCURACY_CLIP:
        return ACCURACY_CLIP
    return float(-np.log10(deficit))
