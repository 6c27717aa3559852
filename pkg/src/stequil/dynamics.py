"""Dissipative dynamics of the driven two-level system.

The interaction-picture state is parameterized as the generalized Gibbs
product rho = Z^-1 exp(g*sigma) exp(b*xi) exp(conj(g)*sigma_dag); for a
Gibbs-sector start (g = 0) the motion reduces to a single scalar equation
for b. A direct superoperator integration of the master equation serves as
the cross-validation oracle for the parameterized route.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bath import BathSpec, RatePair, rates
from .errors import (
    BetaOverflowError,
    InvalidStateError,
    PositivityLossError,
    StepTooLargeError,
)
from .su2 import ID2, EigenoperatorSet, eigenoperator_arrays, eigenoperators

BETA_LIMIT = 50.0
# beyond this the integrator steps the flow in y = e^beta, which stays
# polynomial down to the pure state
BETA_SWITCH = 25.0


@dataclass(frozen=True)
class GibbsParameters:
    """Coordinates (beta, gamma) of the generalized canonical form."""

    beta: float
    gamma: complex = 0.0


def _check_beta(beta: float) -> None:
    if abs(beta) > BETA_LIMIT:
        raise BetaOverflowError(f"|beta|={abs(beta):.3g} > {BETA_LIMIT}: state numerically pure")


def rhs_gibbs(beta: float, kappa: float, rate_pair: RatePair) -> float:
    """d(beta)/dt on the Gibbs sector.

    beta_dot = [k_up (1 + e^-beta) - k_down (e^beta + 1)] / (4 kappa^2)
    """
    _check_beta(beta)
    k2 = kappa * kappa
    return (
        rate_pair.k_up * (1.0 + math.exp(-beta))
        - rate_pair.k_down * (math.exp(beta) + 1.0)
    ) / (4.0 * k2)


def rhs_gibbs_y(y: float, kappa: float, rate_pair: RatePair) -> float:
    """Gibbs-sector flow in y = e^beta: dy/dt = (1+y)(k_up - k_down y)/(4 kappa^2)."""
    k2 = kappa * kappa
    return (1.0 + y) * (rate_pair.k_up - rate_pair.k_down * y) / (4.0 * k2)


def rhs_full(beta: float, gamma: complex, mu: float, rate_pair: RatePair) -> tuple[float, complex]:
    """Full (beta, gamma) flow; the conjugate gamma rate appearing in the
    beta equation is eliminated using the gamma equation itself."""
    _check_beta(beta)
    k2 = 1.0 + mu * mu
    k4 = k2 * k2
    ku, kd = rate_pair.k_up, rate_pair.k_down
    eb = math.exp(beta)
    emb = math.exp(-beta)
    g2 = abs(gamma) ** 2

    gamma_dot = gamma * (kd / (8.0 * k2) - ku * (2.0 * (1.0 + 2.0 * emb) * k2 + g2) / (16.0 * k4))
    beta_dot = (
        (gamma * eb / (2.0 * k2)) * np.conj(gamma_dot)
        - kd * (4.0 * k2 * (eb + 1.0) + g2 * eb) / (16.0 * k4)
        + ku * ((g2 + 4.0 * k2 * emb) * (4.0 * (eb + 1.0) * k2 + eb * g2)) / (64.0 * k4 * k2)
    )
    return float(np.real(beta_dot)), complex(gamma_dot)


def instantaneous_attractor(alpha: float, temp_bath: float) -> float:
    """Fixed point of the Gibbs-sector flow: beta = -alpha / T_bath."""
    return -alpha / temp_bath


def _expm2(a: np.ndarray) -> np.ndarray:
    """Closed-form exponential of a 2x2 matrix via its spectral split."""
    s = 0.5 * (a[0, 0] + a[1, 1])
    b = a - s * ID2
    q2 = b[0, 1] * b[1, 0] + b[0, 0] ** 2  # -det(b) for traceless b
    q = np.sqrt(q2 + 0j)
    if abs(q) < 1e-8:
        # series keeps the defective/nilpotent case exact
        sinhc = 1.0 + q2 / 6.0 + q2 * q2 / 120.0
        coshq = 1.0 + q2 / 2.0 + q2 * q2 / 24.0
    else:
        sinhc = np.sinh(q) / q
        coshq = np.cosh(q)
    return np.exp(s) * (coshq * ID2 + sinhc * b)


def state_from_parameters(params: GibbsParameters, eig: EigenoperatorSet) -> np.ndarray:
    """Density matrix of the generalized canonical form, normalized to unit trace."""
    _check_beta(params.beta)
    g = complex(params.gamma)
    m = _expm2(params.beta * eig.xi)
    if g != 0.0:
        # sigma is nilpotent, so its exponential terminates at first order
        left = ID2 + g * eig.sigma
        m = left @ m @ left.conj().T
    z = np.trace(m)
    rho = m / z
    if abs(np.imag(z)) > 1e-12 or np.linalg.norm(rho - rho.conj().T) > 1e-10:
        raise InvalidStateError("generalized Gibbs construction produced a non-Hermitian state")
    if np.min(np.linalg.eigvalsh(rho)) < -1e-10:
        raise InvalidStateError("generalized Gibbs construction lost positivity")
    return rho


@dataclass(frozen=True)
class GibbsTrajectory:
    """Gibbs-sector solution sampled every integration step."""

    t: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray


def integrate(
    initial: GibbsParameters,
    protocol,
    bath: BathSpec,
    dt: float | None = None,
    error_check_stride: int = 200,
    local_error_budget: float = 1e-6,
) -> GibbsTrajectory:
    """Fixed-step 4th-order integration of the parameterized master equation.

    ``dt`` must be an integer multiple of the protocol grid step so every
    stage hits a stored lattice sample. A gamma(0) = 0 start stays on the
    Gibbs sector exactly and uses the scalar flow. The local error is
    estimated every ``error_check_stride`` steps by comparing one double
    step against the two single steps it spans.
    """
    lat = protocol.lattice
    h = protocol.grid_step
    if dt is None:
        dt = h
    m = int(round(dt / h))
    if m < 1 or abs(m * h - dt) > 1e-9 * max(1.0, dt):
        raise ValueError(f"dt={dt} must be a multiple of the protocol grid step {h}")
    n_steps = (protocol.n_grid - 1) // m
    if n_steps * m != protocol.n_grid - 1:
        raise ValueError("dt does not divide the protocol duration")

    kap = lat.kappa
    rp = rates(np.maximum(lat.alpha, 1e-300), bath)
    ku, kd = rp.k_up, rp.k_down

    gibbs_sector = initial.gamma == 0.0

    def f_scalar(i, b):
        return rhs_gibbs(b, kap[i], RatePair(ku[i], kd[i]))

    def f_y(i, y):
        return rhs_gibbs_y(y, kap[i], RatePair(ku[i], kd[i]))

    def f_full(i, state):
        bd, gd = rhs_full(float(np.real(state[0])), complex(state[1]), lat.mu[i], RatePair(ku[i], kd[i]))
        return np.array([bd, gd], dtype=complex)

    def rk4(f, i, y, half, step):
        # stage lattice indices i, i+half, i+2*half
        k1 = f(i, y)
        k2 = f(i + half, y + 0.5 * step * k1)
        k3 = f(i + half, y + 0.5 * step * k2)
        k4 = f(i + 2 * half, y + step * k3)
        return y + step * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0

    lat_step = 2 * m  # lattice indices per integration step
    t_out = np.empty(n_steps + 1)
    beta_out = np.empty(n_steps + 1)
    gamma_out = np.zeros(n_steps + 1, dtype=complex)
    t_out[0] = lat.t[0]

    if gibbs_sector:
        beta_out[0] = float(initial.beta)
        b = float(initial.beta)
        log_mode = abs(b) > BETA_SWITCH
        y = math.exp(b) if log_mode else 0.0
        for n in range(n_steps):
            i = n * lat_step
            if log_mode:
                y_new = rk4(f_y, i, y, m, dt)
            else:
                b_new = rk4(f_scalar, i, b, m, dt)
            if error_check_stride and n % error_check_stride == 0 and n + 1 < n_steps:
                if log_mode:
                    fine = rk4(f_y, i + lat_step, y_new, m, dt)
                    coarse = rk4(f_y, i, y, 2 * m, 2 * dt)
                else:
                    fine = rk4(f_scalar, i + lat_step, b_new, m, dt)
                    coarse = rk4(f_scalar, i, b, 2 * m, 2 * dt)
                if abs(fine - coarse) / 15.0 > local_error_budget:
                    raise StepTooLargeError(
                        f"step-doubling error {abs(fine - coarse) / 15.0:.2e} at t={lat.t[i]:.4g}"
                    )
            if log_mode:
                y = y_new
                b = math.log(y) if y > 0 else -BETA_LIMIT
            else:
                b = b_new
            if not log_mode and abs(b) > BETA_SWITCH:
                log_mode, y = True, math.exp(b)
            elif log_mode and y > math.exp(-BETA_SWITCH) and y < math.exp(BETA_SWITCH):
                log_mode, b = False, math.log(y)
            t_out[n + 1] = lat.t[i + lat_step]
            beta_out[n + 1] = b
    else:
        state = np.array([initial.beta, initial.gamma], dtype=complex)
        beta_out[0] = float(initial.beta)
        gamma_out[0] = complex(initial.gamma)
        for n in range(n_steps):
            i = n * lat_step
            new = rk4(f_full, i, state, m, dt)
            if error_check_stride and n % error_check_stride == 0 and n + 1 < n_steps:
                fine = rk4(f_full, i + lat_step, new, m, dt)
                coarse = rk4(f_full, i, state, 2 * m, 2 * dt)
                if np.max(np.abs(fine - coarse)) / 15.0 > local_error_budget:
                    raise StepTooLargeError(
                        f"step-doubling error at t={lat.t[i]:.4g}"
                    )
            state = new
            t_out[n + 1] = lat.t[i + lat_step]
            beta_out[n + 1] = float(np.real(state[0]))
            gamma_out[n + 1] = complex(state[1])

    return GibbsTrajectory(t=t_out, beta=beta_out, gamma=gamma_out)


def dissipator(rho: np.ndarray, sig: np.ndarray, rate_pair: RatePair) -> np.ndarray:
    """GKLS dissipator with jump operators (sig, sig_dag) and the given rates."""
    sd = sig.conj().T
    sds = sd @ sig
    ssd = sig @ sd
    down = sig @ rho @ sd - 0.5 * (sds @ rho + rho @ sds)
    up = sd @ rho @ sig - 0.5 * (ssd @ rho + rho @ ssd)
    return rate_pair.k_down * down + rate_pair.k_up * up


def superoperator_integrate(
    rho0: np.ndarray,
    protocol,
    bath: BathSpec,
    dt: float | None = None,
    comoving: bool = True,
    positivity_floor: float = -1e-6,
) -> np.ndarray:
    """Direct integration of the master equation for the 2x2 state.

    Jump operators are the instantaneous-mu eigenoperators built on the
    t = 0 frame. With ``comoving`` (default) the generator includes the
    frame-rotation commutator that keeps the dissipator's eigenbasis
    attached to mu(t); this is the flow the parameterized equations
    integrate, and the two routes then agree to integrator accuracy.
    ``comoving=False`` integrates the dissipator alone, which drifts from
    the parameterized route at first order in d(mu)/dt.
    """
    lat = protocol.lattice
    h = protocol.grid_step
    if dt is None:
        dt = h
    m = int(round(dt / h))
    if m < 1 or abs(m * h - dt) > 1e-9 * max(1.0, dt):
        raise ValueError(f"dt={dt} must be a multiple of the protocol grid step {h}")
    n_steps = (protocol.n_grid - 1) // m
    if n_steps * m != protocol.n_grid - 1:
        raise ValueError("dt does not divide the protocol duration")

    frame0 = protocol.frame0
    rp = rates(np.maximum(lat.alpha, 1e-300), bath)
    ku, kd = rp.k_up, rp.k_down
    conn = lat.mu_dot / (lat.kappa**2)
    j2 = -frame0.l / frame0.rabi
    _, sigmas = eigenoperator_arrays(lat.mu, frame0)

    def rhs(i, rho):
        out = dissipator(rho, sigmas[i], RatePair(ku[i], kd[i]))
        if comoving:
            out = out + 1j * conn[i] * (j2 @ rho - rho @ j2)
        return out

    rho = np.array(rho0, dtype=complex)
    series = np.empty((n_steps + 1, 2, 2), dtype=complex)
    series[0] = rho
    lat_step = 2 * m
    for n in range(n_steps):
        i = n * lat_step
        k1 = rhs(i, rho)
        k2 = rhs(i + m, rho + 0.5 * dt * k1)
        k3 = rhs(i + m, rho + 0.5 * dt * k2)
        k4 = rhs(i + lat_step, rho + dt * k3)
        rho = rho + dt * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0
        series[n + 1] = rho
        if n % 100 == 0 or n == n_steps - 1:
            low = float(np.min(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))))
            if low < positivity_floor:
                raise PositivityLossError(f"min eigenvalue {low:.2e} at t={lat.t[i]:.4g}")
    return series


def coherence_in_xi_basis(rho: np.ndarray, mu: float, frame0) -> float:
    """Magnitude of the off-diagonal element of rho in the xi(mu) eigenbasis."""
    eig = eigenoperators(mu, frame0)
    _, vecs = np.linalg.eigh(eig.xi)
    rr = vecs.conj().T @ rho @ vecs
    return float(abs(rr[0, 1]))


def trace_distance(rho1: np.ndarray, rho2: np.ndarray) -> float:
    d = np.linalg.eigvalsh(rho1 - rho2)
    return float(0.5 * np.sum(np.abs(d)))
