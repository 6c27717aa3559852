"""Time-sampled driving protocols.

A protocol is stored on a uniform half-step lattice: integrators step over
consecutive even samples (the "grid", spacing ``grid_step``) and read their
midpoint stage values from the odd samples, so no stage value is ever
interpolated. Cumulative phases are trapezoidal integrals over the full
lattice.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import OutOfRangeError
from .su2 import BasisFrame


def _cumtrapz(y: np.ndarray, x: np.ndarray) -> np.ndarray:
    out = np.empty_like(y)
    out[0] = 0.0
    np.cumsum(0.5 * (y[1:] + y[:-1]) * np.diff(x), out=out[1:])
    return out


@dataclass(frozen=True)
class FieldSet:
    """Per-sample protocol quantities on one set of times."""

    t: np.ndarray
    omega: np.ndarray
    epsilon: np.ndarray
    rabi: np.ndarray
    phi: np.ndarray
    phi_dot: np.ndarray
    mu: np.ndarray
    kappa: np.ndarray
    alpha: np.ndarray
    mu_dot: np.ndarray
    theta: np.ndarray
    alpha_theta: np.ndarray

    def __getitem__(self, idx) -> "FieldSet":
        return FieldSet(**{f.name: getattr(self, f.name)[idx] for f in dataclasses.fields(self)})

    def __len__(self) -> int:
        return len(self.t)


@dataclass(frozen=True)
class ControlProtocol:
    """Driving fields omega(t), epsilon(t) and derived quantities.

    ``lattice`` holds 2N-1 uniformly spaced samples; ``grid`` (N samples) is
    the public time grid and ``mid`` the in-between stage values.
    """

    t_f: float
    lattice: FieldSet
    label: str = ""
    multiple_roots: bool = False

    @property
    def grid(self) -> FieldSet:
        return self.lattice[::2]

    @property
    def mid(self) -> FieldSet:
        return self.lattice[1::2]

    @property
    def t(self) -> np.ndarray:
        return self.lattice.t[::2]

    @property
    def n_grid(self) -> int:
        return (len(self.lattice) + 1) // 2

    @property
    def grid_step(self) -> float:
        return float(self.lattice.t[2] - self.lattice.t[0])

    @property
    def frame0(self) -> BasisFrame:
        return BasisFrame.from_fields(float(self.lattice.omega[0]), float(self.lattice.epsilon[0]))

    @property
    def frame_final(self) -> BasisFrame:
        return BasisFrame.from_fields(float(self.lattice.omega[-1]), float(self.lattice.epsilon[-1]))

    def inertial_ratio(self) -> np.ndarray:
        """|d(mu)/dt| / (2 kappa^2 rabi) on the lattice; the closed-form
        propagator assumes this stays well below one."""
        lat = self.lattice
        return np.abs(lat.mu_dot) / (2.0 * lat.kappa**2 * lat.rabi)

    def index_of(self, t: float) -> int:
        """Nearest lattice index for time ``t``."""
        if t < -1e-12 or t > self.t_f * (1 + 1e-12):
            raise OutOfRangeError(f"t={t} outside protocol support [0, {self.t_f}]")
        h2 = self.lattice.t[1] - self.lattice.t[0]
        return int(round(t / h2))


def _build_lattice(
    t_f: float,
    n_grid: int,
    omega: np.ndarray,
    epsilon: np.ndarray,
    mu: np.ndarray,
    phi: np.ndarray | None = None,
) -> FieldSet:
    times = np.linspace(0.0, t_f, 2 * n_grid - 1)
    rabi = np.hypot(omega, epsilon)
    kap = np.sqrt(1.0 + mu**2)
    alpha = kap * rabi
    if phi is None:
        phi = np.unwrap(np.arctan2(epsilon, omega))
    phi_dot = -mu * rabi
    mu_dot = np.gradient(mu, times)
    return FieldSet(
        t=times,
        omega=omega,
        epsilon=epsilon,
        rabi=rabi,
        phi=phi,
        phi_dot=phi_dot,
        mu=mu,
        kappa=kap,
        alpha=alpha,
        mu_dot=mu_dot,
        theta=_cumtrapz(rabi, times),
        alpha_theta=_cumtrapz(alpha, times),
    )


def from_callables(
    t_f: float,
    n_grid: int,
    omega: Callable[[np.ndarray], np.ndarray],
    epsilon: Callable[[np.ndarray], np.ndarray],
    omega_dot: Callable[[np.ndarray], np.ndarray],
    epsilon_dot: Callable[[np.ndarray], np.ndarray],
    label: str = "",
) -> ControlProtocol:
    """Sample analytically defined fields onto a protocol lattice."""
    times = np.linspace(0.0, t_f, 2 * n_grid - 1)
    om = np.asarray(omega(times), dtype=float) * np.ones_like(times)
    ep = np.asarray(epsilon(times), dtype=float) * np.ones_like(times)
    om_d = np.asarray(omega_dot(times), dtype=float) * np.ones_like(times)
    ep_d = np.asarray(epsilon_dot(times), dtype=float) * np.ones_like(times)
    rabi = np.hypot(om, ep)
    mu = (om_d * ep - om * ep_d) / rabi**3
    lat = _build_lattice(t_f, n_grid, om, ep, mu)
    return ControlProtocol(t_f=t_f, lattice=lat, label=label)


def constant(omega: float, epsilon: float, t_f: float, n_grid: int, label: str = "") -> ControlProtocol:
    """Static-Hamiltonian protocol (mu identically zero)."""
    zero = lambda ts: np.zeros_like(ts)
    return from_callables(
        t_f,
        n_grid,
        lambda ts: omega * np.ones_like(ts),
        lambda ts: epsilon * np.ones_like(ts),
        zero,
        zero,
        label=label,
    )
