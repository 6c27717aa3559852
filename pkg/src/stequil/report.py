"""End-to-end runs: configuration, the synthesize/integrate/account pipeline,
duration sweeps, and deterministic file output."""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import jsonschema
import numpy as np

from .bath import DEFAULT_PREFACTOR, BathSpec
from .dynamics import (
    GibbsParameters,
    integrate,
    state_from_parameters,
    superoperator_integrate,
    trace_distance,
)
from .errors import ConfigError, NoRootError, NonPositiveAnsatzError
from .propagation import accuracy, exact_propagate, fidelity
from .protocol import ControlProtocol
from .su2 import SX, SZ, ID2, eigenoperator_arrays, eigenoperators
from .synthesis import (
    _PRESET_ROWS,
    PRESET_NAMES,
    DEFAULT_DT,
    DEFAULT_TF,
    SynthesisConfig,
    adiabatic_work,
    preset,
    quench_protocol,
    synthesize,
)
from .thermo import ThermoLedger, build_ledger, work_efficiency

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "preset": {"enum": list(PRESET_NAMES)},
        "rabi_i": {"type": "number", "exclusiveMinimum": 0},
        "rabi_f": {"type": "number", "exclusiveMinimum": 0},
        "temp_i": {"type": "number", "exclusiveMinimum": 0},
        "temp_f": {"type": "number", "exclusiveMinimum": 0},
        "temp_bath": {"type": "number", "exclusiveMinimum": 0},
        "tf": {"type": "number", "exclusiveMinimum": 0},
        "phase_a": {"type": "number", "minimum": 0},
        "phase_b": {"type": "number"},
        "grid_points": {"type": "integer", "minimum": 100},
        "dt": {"type": "number", "exclusiveMinimum": 0},
        "rate_prefactor": {"type": "number", "exclusiveMinimum": 0},
        "verify": {"type": "boolean"},
        "outdir": {"type": "string"},
        "tf_list": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}, "minItems": 1},
    },
}

TIMESERIES_COLUMNS = (
    "t", "omega", "epsilon", "rabi", "mu", "alpha", "beta", "purity",
    "S_vn", "S_e", "power", "work", "heat", "sigma_dot", "T_eff",
)


@dataclass(frozen=True)
class RunConfig:
    """Validated description of one run (or sweep) of the pipeline."""

    synthesis: SynthesisConfig
    bath: BathSpec
    preset_name: str | None = None
    verify: bool = False
    outdir: Path | None = None
    tf_list: tuple[float, ...] | None = None


def load_config(data: dict) -> RunConfig:
    """Build a RunConfig from a plain dict, validating against the schema."""
    try:
        jsonschema.validate(data, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"invalid configuration: {exc.message}") from exc

    name = data.get("preset")
    if name is not None:
        base = preset(name, t_f=data.get("tf"))
    else:
        required = ("rabi_i", "rabi_f", "temp_i", "temp_f", "temp_bath")
        missing = [k for k in required if k not in data]
        if missing:
            raise ConfigError(f"missing keys without a preset: {missing}")
        base = SynthesisConfig(
            rabi_i=data["rabi_i"],
            rabi_f=data["rabi_f"],
            temp_i=data["temp_i"],
            temp_f=data["temp_f"],
            temp_bath=data["temp_bath"],
            t_f=data.get("tf", DEFAULT_TF),
        )
    overrides = {}
    for src, dst in (("rabi_i", "rabi_i"), ("rabi_f", "rabi_f"), ("temp_i", "temp_i"),
                     ("temp_f", "temp_f"), ("temp_bath", "temp_bath"),
                     ("phase_a", "phase_a"), ("phase_b", "phase_b")):
        if name is not None and src in data:
            overrides[dst] = data[src]
        elif name is None and src in ("phase_a", "phase_b") and src in data:
            overrides[dst] = data[src]
    if overrides:
        base = replace(base, **overrides)

    dt = data.get("dt", DEFAULT_DT)
    if "grid_points" in data:
        base = replace(base, grid_points=data["grid_points"])
        if "dt" in data and abs(base.t_f / (base.n_grid - 1) - dt) > 1e-9 * dt:
            raise ConfigError("dt and grid_points disagree; give one of them")
    else:
        n = max(101, int(round(base.t_f / dt)) + 1)
        base = replace(base, grid_points=n)

    bath = BathSpec(base.temp_bath, data.get("rate_prefactor", DEFAULT_PREFACTOR))
    outdir = data.get("outdir") or os.environ.get("STE_OUTDIR")
    tf_list = tuple(data["tf_list"]) if "tf_list" in data else None
    return RunConfig(
        synthesis=base,
        bath=bath,
        preset_name=name,
        verify=bool(data.get("verify", False)),
        outdir=Path(outdir) if outdir else None,
        tf_list=tf_list,
    )


def gibbs_state(hamiltonian: np.ndarray, temperature: float) -> np.ndarray:
    vals, vecs = np.linalg.eigh(hamiltonian)
    weights = np.exp(-(vals - vals.min()) / temperature)
    return (vecs * weights) @ vecs.conj().T / weights.sum()


@dataclass(frozen=True)
class RunResult:
    config: RunConfig
    protocol: ControlProtocol
    ledger: ThermoLedger
    rho_final: np.ndarray
    rho_target: np.ndarray
    fidelity: float
    accuracy: float
    inertial_ratio: float
    verify_distance: float | None
    rho_int_series: np.ndarray

    def eta_w(self) -> float | None:
        cfg = self.config.synthesis
        if not (cfg.temp_i == cfg.temp_f == cfg.temp_bath):
            return None
        return work_efficiency(self.ledger.work_total, adiabatic_work(cfg), cfg.direction)

    def report_dict(self) -> dict:
        cfg = self.config.synthesis
        led = self.ledger
        eta = self.eta_w()
        return {
            "preset": self.config.preset_name,
            "config": {
                "rabi_i": cfg.rabi_i, "rabi_f": cfg.rabi_f,
                "temp_i": cfg.temp_i, "temp_f": cfg.temp_f, "temp_bath": cfg.temp_bath,
                "tf": cfg.t_f, "phase_a": cfg.a, "phase_b": cfg.b,
                "grid_points": cfg.n_grid, "rate_prefactor": self.config.bath.prefactor,
            },
            "fidelity": self.fidelity,
            "accuracy": self.accuracy,
            "work": led.work_total,
            "heat": led.heat_total,
            "delta_energy": led.delta_energy,
            "delta_s_universe": led.delta_s_universe,
            "eta_w": eta,
            "speed_limit": {"bound": led.speed_bound, "ln_purity_ratio": led.ln_purity_ratio},
            "t_eff": {"initial": float(led.t_eff[0]), "final": float(led.t_eff[-1])},
            "inertial": {"max_ratio": self.inertial_ratio, "violation": self.inertial_ratio >= 1.0},
            "multiple_roots": self.protocol.multiple_roots,
            "verify_trace_distance": self.verify_distance,
        }


def run(config: RunConfig) -> RunResult:
    """Synthesize, integrate, account, and compare against the target state."""
    cfg = config.synthesis
    protocol = synthesize(cfg, config.bath)
    inertial_ratio = float(np.max(protocol.inertial_ratio()))

    traj = integrate(GibbsParameters(cfg.beta_i), protocol, config.bath)
    propagators = exact_propagate(protocol)

    xis, _ = eigenoperator_arrays(protocol.grid.mu, protocol.frame0)
    rho_int = 0.5 * ID2 + np.tanh(0.5 * traj.beta)[:, None, None] * xis
    ledger = build_ledger(protocol, config.bath, traj, rho_int_series=rho_int, propagators=propagators)

    u_f = propagators[-1]
    rho_final = u_f @ rho_int[-1] @ u_f.conj().T
    grid = protocol.grid
    h_final = grid.omega[-1] * SZ + grid.epsilon[-1] * SX
    rho_target = gibbs_state(h_final, cfg.temp_f)
    fid = fidelity(rho_final, rho_target)
    acc = accuracy(rho_final, rho_target)

    verify_distance = None
    if config.verify:
        rho0 = state_from_parameters(GibbsParameters(cfg.beta_i), eigenoperators(0.0, protocol.frame0))
        oracle = superoperator_integrate(rho0, protocol, config.bath)
        verify_distance = max(
            trace_distance(oracle[i], rho_int[i]) for i in range(0, len(oracle), max(1, len(oracle) // 200))
        )

    return RunResult(
        config=config,
        protocol=protocol,
        ledger=ledger,
        rho_final=rho_final,
        rho_target=rho_target,
        fidelity=fid,
        accuracy=acc,
        inertial_ratio=inertial_ratio,
        verify_distance=verify_distance,
        rho_int_series=rho_int,
    )


def quench_accuracy(cfg: SynthesisConfig, bath: BathSpec) -> float:
    """Closeness to the thermal target reached by the sudden-jump baseline."""
    protocol = quench_protocol(cfg)
    traj = integrate(GibbsParameters(cfg.beta_i), protocol, bath)
    xi = eigenoperators(0.0, protocol.frame0).xi
    rho_f = 0.5 * ID2 + math.tanh(0.5 * traj.beta[-1]) * xi
    target = gibbs_state(cfg.rabi_f * SZ, bath.temperature)
    return accuracy(rho_f, target)


def sweep_row(config: RunConfig, t_f: float) -> dict:
    """One duration point: STE observables plus the quench baseline."""
    cfg = replace(config.synthesis, t_f=t_f, grid_points=None)
    cfg = replace(cfg, grid_points=max(101, int(round(t_f / DEFAULT_DT)) + 1))
    row: dict = {"tf": t_f}
    row["accuracy_quench"] = quench_accuracy(cfg, config.bath)
    try:
        result = run(replace(config, synthesis=cfg, verify=False, tf_list=None))
    except (NoRootError, NonPositiveAnsatzError) as exc:
        row["error"] = f"{type(exc).__name__}: {exc}"
        row["accuracy_ste"] = None
        row["work"] = None
        row["eta_w"] = None
        row["bound"] = None
        row["ln_purity_ratio"] = None
        return row
    row["accuracy_ste"] = result.accuracy
    row["work"] = result.ledger.work_total
    row["eta_w"] = result.eta_w()
    row["bound"] = result.ledger.speed_bound
    row["ln_purity_ratio"] = result.ledger.ln_purity_ratio
    return row


def sweep(config: RunConfig, tf_list=None, max_workers: int = 4) -> list[dict]:
    """Independent rows over protocol duration, ordered by t_f."""
    values = tuple(tf_list if tf_list is not None else (config.tf_list or ()))
    if not values:
        raise ConfigError("sweep requires tf_list")
    values = tuple(sorted(values))
    with ThreadPoolExecutor(max_workers=min(max_workers, len(values))) as pool:
        rows = list(pool.map(lambda tf: sweep_row(config, tf), values))
    return rows


def trajectory(config: RunConfig) -> dict:
    """Spin-space trajectory of the run in the Schroedinger picture."""
    result = run(config)
    led = result.ledger
    return {
        "t": led.t,
        "s_x": led.bloch[:, 0],
        "s_y": led.bloch[:, 1],
        "s_z": led.bloch[:, 2],
        "result": result,
    }


def _fmt(x) -> str:
    if x is None:
        return "nan"
    return format(float(x), ".17g")


def write_timeseries(result: RunResult, path: Path, fmt: str = "csv") -> None:
    led = result.ledger
    grid = result.protocol.grid
    cols = {
        "t": led.t, "omega": grid.omega, "epsilon": grid.epsilon, "rabi": grid.rabi,
        "mu": grid.mu, "alpha": grid.alpha, "beta": led.beta, "purity": led.purity,
        "S_vn": led.s_vn, "S_e": led.s_e, "power": led.power, "work": led.work,
        "heat": led.heat, "sigma_dot": led.sigma_dot, "T_eff": led.t_eff,
    }
    if fmt == "csv":
        lines = [",".join(TIMESERIES_COLUMNS)]
        data = [cols[c] for c in TIMESERIES_COLUMNS]
        for i in range(len(led.t)):
            lines.append(",".join(_fmt(col[i]) for col in data))
        path.write_text("\n".join(lines) + "\n")
    elif fmt == "json":
        path.write_text(json.dumps({c: [float(v) for v in cols[c]] for c in TIMESERIES_COLUMNS}))
    else:
        raise ConfigError(f"unknown format {fmt!r}")


def write_sweep(rows: list[dict], path: Path, fmt: str = "csv") -> None:
    columns = ("tf", "accuracy_ste", "accuracy_quench", "work", "eta_w", "bound", "ln_purity_ratio")
    if fmt == "csv":
        lines = [",".join(columns + ("error",))]
        for row in rows:
            vals = [_fmt(row.get(c)) for c in columns]
            vals.append('"' + row.get("error", "") + '"' if row.get("error") else "")
            lines.append(",".join(vals))
        path.write_text("\n".join(lines) + "\n")
    elif fmt == "json":
        path.write_text(json.dumps(rows, indent=1))
    else:
        raise ConfigError(f"unknown format {fmt!r}")


def write_trajectory(data: dict, path: Path, fmt: str = "csv") -> None:
    columns = ("t", "s_x", "s_y", "s_z")
    if fmt == "csv":
        lines = [",".join(columns)]
        for i in range(len(data["t"])):
            lines.append(",".join(_fmt(data[c][i]) for c in columns))
        path.write_text("\n".join(lines) + "\n")
    elif fmt == "json":
        path.write_text(json.dumps({c: [float(v) for v in data[c]] for c in columns}))
    else:
        raise ConfigError(f"unknown format {fmt!r}")


def preset_table() -> list[dict]:
    rows = []
    for name in PRESET_NAMES:
        rabi_i, rabi_f, temp_i, temp_f = _PRESET_ROWS[name]
        rows.append({
            "name": name, "rabi_i": rabi_i, "rabi_f": rabi_f,
            "temp_i": temp_i, "temp_f": temp_f, "temp_bath": 5.0,
        })
    return rows
