"""Thermodynamic bookkeeping along a dissipative trajectory.

Energies and powers are Schroedinger-picture expectations obtained by
contracting the interaction-picture state with exactly-propagated
Heisenberg operators; the heat current contracts the Heisenberg-evolved
Hamiltonian with the (smooth) interaction-picture state derivative, so the
first law closes at every sample to quadrature accuracy.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .bath import BathSpec, RatePair, rates
from .dynamics import GibbsTrajectory
from .errors import (
    DegenerateHamiltonianError,
    NonThermalStateError,
    SingularLogWarning,
)
from .protocol import ControlProtocol, _cumtrapz
from .propagation import exact_propagate
from .su2 import SX, SY, SZ, ID2, eigenoperator_arrays

EIG_FLOOR = 1e-14


def von_neumann_entropy(rho: np.ndarray) -> float:
    """-tr(rho ln rho); 0 for pure states, ln 2 for the maximally mixed one."""
    lam = np.clip(np.linalg.eigvalsh(rho).real, 0.0, 1.0)
    lam = lam[lam > 0]
    return float(-np.sum(lam * np.log(lam)))


def energy_entropy(rho: np.ndarray, hamiltonian: np.ndarray) -> float:
    """Shannon entropy of the populations in the energy eigenbasis.

    Ignores coherences between energy states, so it never falls below the
    von Neumann entropy.
    """
    vals, vecs = np.linalg.eigh(hamiltonian)
    if abs(vals[1] - vals[0]) < 1e-12:
        raise DegenerateHamiltonianError("energy gap below 1e-12")
    pops = np.clip(np.real(np.einsum("ai,ab,bi->i", vecs.conj(), rho, vecs)), 0.0, 1.0)
    pops = pops[pops > 0]
    return float(-np.sum(pops * np.log(pops)))


def effective_temperature(beta: float, rabi: float) -> float:
    """-rabi/beta for a Gibbs-sector state; requires beta < 0."""
    if beta >= 0:
        raise NonThermalStateError(f"beta={beta} >= 0 has no effective temperature")
    return -rabi / beta


def work_efficiency(work: float, work_adiabatic: float, direction: str) -> float:
    """W_adi/W for expansion, W/W_adi for compression."""
    if direction == "expansion":
        num, den = work_adiabatic, work
    elif direction == "compression":
        num, den = work, work_adiabatic
    else:
        raise ValueError("direction must be 'expansion' or 'compression'")
    if den == 0.0:
        raise ZeroDivisionError("work efficiency undefined for zero denominator")
    return num / den


def _log2x2(rho: np.ndarray) -> np.ndarray:
    lam, vecs = np.linalg.eigh(rho)
    lam = lam.real
    if np.any(lam < EIG_FLOOR):
        warnings.warn(
            "near-singular state in entropy production; eigenvalue clipped",
            SingularLogWarning,
            stacklevel=3,
        )
        lam = np.maximum(lam, EIG_FLOOR)
    return (vecs * np.log(lam)) @ vecs.conj().T


def entropy_production_rate(
    rho_tilde: np.ndarray, attractor_state: np.ndarray, generator_rhs: np.ndarray
) -> float:
    """Irreversibility rate -tr[(drho/dt)(ln rho - ln rho_attractor)].

    Nonnegative (up to round-off) whenever ``generator_rhs`` is the output
    of the dissipative generator whose fixed point is ``attractor_state``.
    """
    diff = _log2x2(rho_tilde) - _log2x2(attractor_state)
    return float(-np.real(np.trace(generator_rhs @ diff)))


def speed_limit_bound(
    protocol: ControlProtocol,
    rates_series: RatePair,
    convention: str = "printed",
) -> float:
    """Upper bound on |ln(P(t_f)/P(0))| from the jump operators and rates.

    ``convention="printed"`` integrates 4 * sum_k r_k^2 ||F_k||_sp^2 (the
    rate inside the squared norm); ``convention="linear"`` uses r_k to the
    first power, for comparison. The zero-eigenvalue operator carries no
    rate and drops out.
    """
    grid = protocol.grid
    _, sigmas = eigenoperator_arrays(grid.mu, protocol.frame0)
    norms2 = np.linalg.svd(sigmas, compute_uv=False)[:, 0] ** 2
    ku, kd = rates_series.k_up, rates_series.k_down
    if convention == "printed":
        integrand = 4.0 * (kd**2 * norms2 + ku**2 * norms2)
    elif convention == "linear":
        integrand = 4.0 * (kd * norms2 + ku * norms2)
    else:
        raise ValueError("convention must be 'printed' or 'linear'")
    return float(np.trapz(integrand, grid.t))


def purity(rho: np.ndarray) -> float:
    return float(np.real(np.trace(rho @ rho)))


@dataclass(frozen=True)
class ThermoLedger:
    """Per-sample thermodynamic account of one trajectory (atomic units)."""

    t: np.ndarray
    energy: np.ndarray
    power: np.ndarray
    work: np.ndarray
    heat_current: np.ndarray
    heat: np.ndarray
    s_vn: np.ndarray
    s_e: np.ndarray
    ds_bath: np.ndarray
    ds_universe: np.ndarray
    sigma_dot: np.ndarray
    purity: np.ndarray
    t_eff: np.ndarray
    bloch: np.ndarray
    beta: np.ndarray
    temp_bath: float
    speed_bound: float

    @property
    def work_total(self) -> float:
        return float(self.work[-1])

    @property
    def heat_total(self) -> float:
        return float(self.heat[-1])

    @property
    def delta_energy(self) -> float:
        return float(self.energy[-1] - self.energy[0])

    @property
    def delta_s_universe(self) -> float:
        return float(self.ds_universe[-1])

    @property
    def ln_purity_ratio(self) -> float:
        return float(abs(math.log(self.purity[-1] / self.purity[0])))

    def first_law_residual(self) -> np.ndarray:
        """ΔE(t) - W(t) - Q(t); should vanish to quadrature accuracy."""
        return (self.energy - self.energy[0]) - self.work - self.heat


def _gibbs_sector_states(protocol: ControlProtocol, beta: np.ndarray) -> np.ndarray:
    """Interaction-picture states I/2 + tanh(beta/2) xi(mu) on the grid."""
    xis, _ = eigenoperator_arrays(protocol.grid.mu, protocol.frame0)
    r = np.tanh(0.5 * beta)
    return 0.5 * ID2 + r[:, None, None] * xis


def _batched_log(rhos: np.ndarray) -> np.ndarray:
    lam, vecs = np.linalg.eigh(rhos)
    if np.any(lam < EIG_FLOOR):
        warnings.warn(
            "near-singular state in entropy production; eigenvalue clipped",
            SingularLogWarning,
            stacklevel=3,
        )
        lam = np.maximum(lam, EIG_FLOOR)
    return np.einsum("nak,nk,nbk->nab", vecs, np.log(lam), vecs.conj())


def _batched_entropy(rhos: np.ndarray) -> np.ndarray:
    lam = np.clip(np.linalg.eigvalsh(rhos).real, 0.0, 1.0)
    terms = np.where(lam > 0, -lam * np.log(np.where(lam > 0, lam, 1.0)), 0.0)
    return np.sum(terms, axis=1)


def _finite_difference(series: np.ndarray, dt: float) -> np.ndarray:
    """Centered first derivative along axis 0, one-sided at the endpoints."""
    out = np.empty_like(series)
    out[1:-1] = (series[2:] - series[:-2]) / (2.0 * dt)
    out[0] = (-1.5 * series[0] + 2.0 * series[1] - 0.5 * series[2]) / dt
    out[-1] = (1.5 * series[-1] - 2.0 * series[-2] + 0.5 * series[-3]) / dt
    return out


def build_ledger(
    protocol: ControlProtocol,
    bath: BathSpec,
    traj: GibbsTrajectory,
    rho_int_series: np.ndarray | None = None,
    propagators: np.ndarray | None = None,
) -> ThermoLedger:
    """Assemble the full thermodynamic account on the protocol grid.

    ``traj`` must be sampled on the protocol grid. If ``rho_int_series`` is
    given (e.g. from the superoperator oracle) it overrides the states
    reconstructed from ``traj.beta``.
    """
    grid = protocol.grid
    t = grid.t
    if len(traj.t) != len(t) or abs(traj.t[-1] - t[-1]) > 1e-9:
        raise ValueError("trajectory is not sampled on the protocol grid")
    dt = protocol.grid_step

    rho_int = rho_int_series if rho_int_series is not None else _gibbs_sector_states(protocol, traj.beta)
    us = propagators if propagators is not None else exact_propagate(protocol)

    h_s = grid.omega[:, None, None] * SZ + grid.epsilon[:, None, None] * SX
    rho_s = np.einsum("nab,nbc,ndc->nad", us, rho_int, us.conj())
    h_heis = np.einsum("nba,nbc,ncd->nad", us.conj(), h_s, us)

    energy = np.real(np.einsum("nab,nba->n", rho_s, h_s))

    omega_dot = _finite_difference(grid.omega, dt)
    epsilon_dot = _finite_difference(grid.epsilon, dt)
    dh_dt = omega_dot[:, None, None] * SZ + epsilon_dot[:, None, None] * SX
    power = np.real(np.einsum("nab,nba->n", rho_s, dh_dt))
    work = _cumtrapz(power, t)

    drho_int = _finite_difference(rho_int, dt)
    heat_current = np.real(np.einsum("nab,nba->n", h_heis, drho_int))
    heat = _cumtrapz(heat_current, t)

    s_vn = _batched_entropy(rho_int)
    h_vals, h_vecs = np.linalg.eigh(h_s)
    pops = np.clip(np.real(np.einsum("nai,nab,nbi->ni", h_vecs.conj(), rho_s, h_vecs)), 0.0, 1.0)
    pop_terms = np.where(pops > 0, -pops * np.log(np.where(pops > 0, pops, 1.0)), 0.0)
    s_e = np.sum(pop_terms, axis=1)

    ds_bath = -heat / bath.temperature
    ds_universe = (s_vn - s_vn[0]) + ds_bath

    rate_series = rates(grid.alpha, bath)
    xis, sigmas = eigenoperator_arrays(grid.mu, protocol.frame0)
    sig_d = sigmas.conj().transpose(0, 2, 1)
    sds = sig_d @ sigmas
    ssd = sigmas @ sig_d
    ku = rate_series.k_up[:, None, None]
    kd = rate_series.k_down[:, None, None]
    gen = kd * (sigmas @ rho_int @ sig_d - 0.5 * (sds @ rho_int + rho_int @ sds)) + ku * (
        sig_d @ rho_int @ sigmas - 0.5 * (ssd @ rho_int + rho_int @ ssd)
    )
    beta_ia = -grid.alpha / bath.temperature
    attractors = 0.5 * ID2 + np.tanh(0.5 * beta_ia)[:, None, None] * xis
    log_diff = _batched_log(rho_int) - _batched_log(attractors)
    sigma_dot = -np.real(np.einsum("nab,nba->n", gen, log_diff))

    pur = np.real(np.einsum("nab,nba->n", rho_int, rho_int))

    with np.errstate(divide="ignore", invalid="ignore"):
        t_eff = np.where(traj.beta < 0, -grid.rabi / traj.beta, np.nan)

    bloch = np.stack(
        [np.real(np.einsum("nab,ba->n", rho_s, s)) for s in (SX, SY, SZ)], axis=1
    )

    bound = speed_limit_bound(protocol, rate_series)

    return ThermoLedger(
        t=t,
        energy=energy,
        power=power,
        work=work,
        heat_current=heat_current,
        heat=heat,
        s_vn=s_vn,
        s_e=s_e,
        ds_bath=ds_bath,
        ds_universe=ds_universe,
        sigma_dot=sigma_dot,
        purity=pur,
        t_eff=t_eff,
        bloch=bloch,
        beta=traj.beta,
        temp_bath=bath.temperature,
        speed_bound=bound,
    )
