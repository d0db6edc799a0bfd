"""Semiclassical model: coherent fields coupled to a single-atom wavefunction.

The cavity amplitudes alpha_+- obey

    i d/dt alpha_+ = (u0 - delta_c - i kappa) alpha_+
                     + u0 <e^{-2ix}> alpha_-  + eta <e^{-i(1-s)x}>
    i d/dt alpha_- = (u0 - delta_c - i kappa) alpha_-
                     + u0 <e^{+2ix}> alpha_+  + eta <e^{+i(1+s)x}>

with s = sin(phi) and <.> over |psi(x)|^2 on one spatial cell, while psi sees
the optical potential

    V(x) = 2 u0 Re[conj(alpha_+) alpha_- e^{-2ix}]
           + 2 eta Re[alpha_+ e^{i(1-s)x}] + 2 eta Re[alpha_- e^{-i(1+s)x}].

Same units as the operator model (recoil energies, lengths 1/k); the two
descriptions share every coupling convention, so any disagreement between
their trajectories is physics, not bookkeeping.

Propagation: Strang splitting for psi (kinetic factor exact in the plane-wave
basis) around a classical RK4 segment for the fields.  The potential step
only changes the phase of psi, so order parameters evaluated after the first
half kick are exact midpoint values for the whole field segment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .hilbert import RationalAngle, kick_arithmetic
from .model import PhysicalParams

__all__ = [
    "MeanFieldConfig",
    "MeanFieldState",
    "MeanFieldTrajectory",
    "OrderParameters",
    "spatial_grid",
    "order_parameters",
    "mf_orderparams",
    "mf_potential",
    "mf_step",
    "initial_state",
    "run_meanfield",
]


@dataclass(frozen=True)
class MeanFieldConfig:
    t_final: float
    dt: float = 2e-4
    n_grid: int = 256
    record_interval: float = 0.05
    seed_amplitude: float = 1e-3

    def __post_init__(self):
        if self.t_final <= 0 or self.dt <= 0:
            raise ValueError("t_final and dt must be positive")
        if self.n_grid < 16 or self.n_grid & (self.n_grid - 1):
            raise ValueError("n_grid must be a power of two >= 16")


@dataclass
class MeanFieldState:
    """Snapshot of the Strang walker: spatial wavefunction plus two fields."""

    angle: RationalAngle
    x: np.ndarray
    psi: np.ndarray
    alpha_plus: complex
    alpha_minus: complex


@dataclass
class MeanFieldTrajectory:
    times: np.ndarray
    observables: dict
    final_state: MeanFieldState
    n_steps: int


class OrderParameters(NamedTuple):
    b_plus: complex
    b_minus: complex
    theta_plus: complex
    theta_minus: complex


def spatial_grid(angle: RationalAngle, n_grid: int) -> tuple:
    """(x, k): cell positions and the matching FFT momentum values.

    The cell length is 2 pi / q, so the FFT momenta are integer multiples of
    the lattice quantum q and line up with the plane-wave ladder of the
    operator model.
    """
    q, _, _, _ = kick_arithmetic(angle)
    length = 2.0 * math.pi / float(q)
    dx = length / n_grid
    x = dx * np.arange(n_grid)
    k = 2.0 * math.pi * np.fft.fftfreq(n_grid, d=dx)
    return x, k


def order_parameters(x: np.ndarray, prob: np.ndarray, s: float) -> dict:
    """Bunching overlaps of a (normalized) spatial density.

    Conventions match the operator-model samplers: theta_plus = <e^{i(1-s)x}>,
    theta_minus = <e^{-i(1+s)x}>, b_plus = <e^{2ix}>.  All kernels close an
    integer number of periods on the cell, so the rectangle rule is exact.
    """
    return {
        "theta_plus": complex(np.sum(prob * np.exp(1j * (1.0 - s) * x))),
        "theta_minus": complex(np.sum(prob * np.exp(-1j * (1.0 + s) * x))),
        "b_plus": complex(np.sum(prob * np.exp(2j * x))),
    }


def mf_orderparams(state: MeanFieldState,
                   angle: RationalAngle = None) -> OrderParameters:
    """Order parameters (B+, B-, Theta+, Theta-) of a mean-field state.

    B- is the conjugate of B+ by construction (the density is real), so it is
    returned as such rather than re-integrated.
    """
    if angle is None:
        angle = state.angle
    dx = state.x[1] - state.x[0]
    prob = np.abs(state.psi) ** 2 * dx
    total = float(prob.sum())
    ops = order_parameters(state.x, prob / total, angle.value)
    return OrderParameters(b_plus=ops["b_plus"],
                           b_minus=np.conj(ops["b_plus"]),
                           theta_plus=ops["theta_plus"],
                           theta_minus=ops["theta_minus"])


def mf_potential(x: np.ndarray, alpha_plus: complex, alpha_minus: complex,
                 params: PhysicalParams, s: float) -> np.ndarray:
    """Optical potential seen by the atom for given field amplitudes."""
    v = 2.0 * params.u0 * np.real(
        np.conj(alpha_plus) * alpha_minus * np.exp(-2j * x))
    v += 2.0 * params.eta * np.real(alpha_plus * np.exp(1j * (1.0 - s) * x))
    v += 2.0 * params.eta * np.real(alpha_minus * np.exp(-1j * (1.0 + s) * x))
    return v


def _field_rhs(alpha: np.ndarray, ops: dict, params: PhysicalParams) -> np.ndarray:
    base = params.u0 - params.delta_c - 1j * params.kappa
    drive_p = (params.u0 * np.conj(ops["b_plus"]) * alpha[1]
               + params.eta * np.conj(ops["theta_plus"]))
    drive_m = (params.u0 * ops["b_plus"] * alpha[0]
               + params.eta * np.conj(ops["theta_minus"]))
    return -1j * np.array([base * alpha[0] + drive_p,
                           base * alpha[1] + drive_m])


def _rk4(alpha: np.ndarray, ops: dict, params: PhysicalParams,
         h: float) -> np.ndarray:
    k1 = _field_rhs(alpha, ops, params)
    k2 = _field_rhs(alpha + 0.5 * h * k1, ops, params)
    k3 = _field_rhs(alpha + 0.5 * h * k2, ops, params)
    k4 = _field_rhs(alpha + h * k3, ops, params)
    return alpha + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


@lru_cache(maxsize=32)
def _half_kinetic(angle: RationalAngle, n_grid: int, dt: float) -> np.ndarray:
    _, k = spatial_grid(angle, n_grid)
    phase = np.exp(-0.5j * dt * k * k)
    phase.setflags(write=False)
    return phase


def initial_state(angle: RationalAngle, cfg: MeanFieldConfig,
                  psi0: np.ndarray = None, seed: tuple = None) -> MeanFieldState:
    """Normalized start state: uniform (or given) psi plus a weak field seed.

    psi is scaled so that sum |psi|^2 dx = 1 over the cell.  The small real
    field seed stands in for the vacuum fluctuations that trigger
    self-ordering.
    """
    x, _ = spatial_grid(angle, cfg.n_grid)
    dx = x[1] - x[0]
    if psi0 is None:
        psi = np.full(cfg.n_grid, 1.0, dtype=complex)
    else:
        if len(psi0) != cfg.n_grid:
            raise ValueError(f"psi0 must have n_grid = {cfg.n_grid} samples")
        psi = np.asarray(psi0, dtype=complex).copy()
    psi /= math.sqrt(float(np.sum(np.abs(psi) ** 2) * dx))
    alpha = (np.array(seed, dtype=complex) if seed is not None
             else np.full(2, cfg.seed_amplitude, dtype=complex))
    if alpha.shape != (2,):
        raise ValueError("seed must hold two amplitudes")
    return MeanFieldState(angle=angle, x=x, psi=psi,
                          alpha_plus=complex(alpha[0]),
                          alpha_minus=complex(alpha[1]))


def mf_step(state: MeanFieldState, params: PhysicalParams,
            dt: float) -> MeanFieldState:
    """One Strang step of length dt; returns the advanced state.

    Sequence: half kinetic kick, field RK4 over dt against frozen midpoint
    order parameters, potential phase kick at the field midpoint, half
    kinetic kick.  Each piece is unitary on psi up to rounding.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    s = state.angle.value
    x = state.x
    dx = x[1] - x[0]
    half = _half_kinetic(state.angle, len(x), dt)

    psi = np.fft.ifft(half * np.fft.fft(state.psi))
    prob = np.abs(psi) ** 2 * dx
    ops = order_parameters(x, prob, s)
    alpha = np.array([state.alpha_plus, state.alpha_minus], dtype=complex)
    alpha_mid = _rk4(alpha, ops, params, 0.5 * dt)
    alpha = _rk4(alpha_mid, ops, params, 0.5 * dt)
    v = mf_potential(x, alpha_mid[0], alpha_mid[1], params, s)
    psi = np.exp(-1j * dt * v) * psi
    psi = np.fft.ifft(half * np.fft.fft(psi))
    return MeanFieldState(angle=state.angle, x=x, psi=psi,
                          alpha_plus=complex(alpha[0]),
                          alpha_minus=complex(alpha[1]))


def run_meanfield(angle: RationalAngle, params: PhysicalParams,
                  cfg: MeanFieldConfig, psi0: np.ndarray = None,
                  seed: tuple = None) -> MeanFieldTrajectory:
    """Integrate the coupled atom-field equations from a weak field seed."""
    state = initial_state(angle, cfg, psi0=psi0, seed=seed)
    x = state.x
    dx = x[1] - x[0]
    _, k = spatial_grid(angle, cfg.n_grid)

    # land exactly on t_final with a step as close to cfg.dt as possible
    n_steps_total = max(1, int(round(cfg.t_final / cfg.dt)))
    dt = cfg.t_final / n_steps_total
    every = max(1, int(round(cfg.record_interval / dt)))

    times = []
    series = {key: [] for key in
              ("p_mean", "n_plus", "n_minus", "alpha_plus", "alpha_minus",
               "theta_plus", "theta_minus", "b_plus", "norm_drift")}

    def record(t):
        prob = np.abs(state.psi) ** 2 * dx
        norm = float(prob.sum())
        ops = order_parameters(x, prob / norm, angle.value)
        spec_pop = np.abs(np.fft.fft(state.psi)) ** 2
        p_mean = float(np.sum(k * spec_pop) / np.sum(spec_pop))
        times.append(t)
        series["p_mean"].append(p_mean)
        series["n_plus"].append(abs(state.alpha_plus) ** 2)
        series["n_minus"].append(abs(state.alpha_minus) ** 2)
        series["alpha_plus"].append(state.alpha_plus)
        series["alpha_minus"].append(state.alpha_minus)
        series["theta_plus"].append(ops["theta_plus"])
        series["theta_minus"].append(ops["theta_minus"])
        series["b_plus"].append(ops["b_plus"])
        series["norm_drift"].append(abs(norm - 1.0))

    record(0.0)
    for step in range(1, n_steps_total + 1):
        state = mf_step(state, params, dt)
        if step % every == 0 or step == n_steps_total:
            record(step * dt)

    obs = {key: np.array(vals) for key, vals in series.items()}
    return MeanFieldTrajectory(times=np.array(times), observables=obs,
                               final_state=state, n_steps=n_steps_total)
