"""Adaptive integration of the Lindblad master equation.

Dense density matrix, sparse operator application, embedded Dormand-Prince
4(5) pair with proportional step control.  After every accepted step the
state is re-hermitized (rho <- (rho + rho^dag)/2); the trace is deliberately
NOT renormalized, so trace drift stays visible as an integration diagnostic
and aborts the run beyond a configured bound.

The standard initial state is |p=0> (x) |0> (x) |0> (ground_product_state);
anything else must be supplied explicitly by the caller.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .hilbert import (
    DensityState,
    LatticeSpec,
    Operator,
    identity,
    momentum_shift,
    tensor,
)
from .model import LindbladContext, jump_operators
from .observables import log_negativity

__all__ = [
    "IntegratorConfig",
    "Trajectory",
    "TraceDriftError",
    "StepSizeUnderflowError",
    "evolve",
    "check_truncation",
    "Stepper",
]


class TraceDriftError(RuntimeError):
    """Trace left the configured band; integration aborted."""

    def __init__(self, t: float, drift: float, tol: float):
        self.t, self.drift, self.tol = t, drift, tol
        super().__init__(
            f"trace drift {drift:.3e} exceeded {tol:.1e} at t = {t:.6g}; "
            f"tighten tolerances or enlarge the space"
        )


class StepSizeUnderflowError(RuntimeError):
    """Step control collapsed below the floor (stiffness or a bad RHS)."""


@dataclass
class IntegratorConfig:
    t_final: float
    rel_tol: float = 1e-8
    abs_tol: float = 1e-10
    record_interval: float = 0.05
    dt_initial: float = 1e-4
    max_step: float = 0.25
    trace_tol: float = 1e-6
    snapshot_times: tuple = ()

    def __post_init__(self):
        if self.t_final <= 0 or self.record_interval <= 0:
            raise ValueError("t_final and record_interval must be positive")
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("tolerances must be positive")


@dataclass
class Trajectory:
    """Sampled observables of one run plus the final state."""

    times: np.ndarray
    observables: dict
    final_state: DensityState
    snapshots: list = field(default_factory=list)
    n_steps: int = 0
    n_rejected: int = 0


# Dormand-Prince 4(5) tableau (FSAL: the last stage is the next first stage).
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
# y5 - y4 weights for the embedded error estimate
_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920,
               -17253 / 339200, 22 / 525, -1 / 40])


class Stepper:
    """Stateful DP45 walker over the master equation.

    advance_to() integrates the held state exactly to a target time (steps are
    clipped to land on it), re-hermitizing after each accepted step and
    checking the trace band.  The FSAL stage is cached across calls.
    """

    H_FLOOR = 1e-13

    def __init__(self, ctx: LindbladContext, rho0: np.ndarray,
                 cfg: IntegratorConfig, t0: float = 0.0):
        self.ctx = ctx
        self.rho = rho0.astype(complex, copy=True)
        self.cfg = cfg
        self.t = t0
        self.h = min(cfg.dt_initial, cfg.max_step)
        self.k1 = ctx.apply(self.rho)
        self.n_steps = 0
        self.n_rejected = 0

    def _error_norm(self, err, y_old, y_new) -> float:
        scale = self.cfg.abs_tol + self.cfg.rel_tol * np.maximum(
            np.abs(y_old), np.abs(y_new))
        r = np.abs(err) / scale
        return float(np.sqrt(np.mean(r * r)))

    def advance_to(self, t_target: float) -> None:
        cfg = self.cfg
        apply = self.ctx.apply
        while self.t < t_target - 1e-14:
            h = min(self.h, cfg.max_step, t_target - self.t)
            if h < self.H_FLOOR:
                raise StepSizeUnderflowError(
                    f"step size {h:.3e} below floor at t = {self.t:.6g}")
            k = [self.k1]
            for i in range(1, 7):
                y = self.rho
                acc = None
                for a_ij, k_j in zip(_A[i], k):
                    if a_ij == 0.0:
                        continue
                    acc = a_ij * k_j if acc is None else acc + a_ij * k_j
                y_stage = y + h * acc
                k.append(apply(y_stage))
            # 5th-order solution; same combination as the last stage (FSAL)
            y_new = self.rho + h * (
                _A[6][0] * k[0] + _A[6][2] * k[2] + _A[6][3] * k[3]
                + _A[6][4] * k[4] + _A[6][5] * k[5])
            err = h * (_E[0] * k[0] + _E[2] * k[2] + _E[3] * k[3]
                       + _E[4] * k[4] + _E[5] * k[5] + _E[6] * k[6])
            en = self._error_norm(err, self.rho, y_new)
            if en <= 1.0:
                self.t += h
                # re-hermitize; do not renormalize the trace
                self.rho = 0.5 * (y_new + y_new.conj().T)
                drift = abs(self.rho.trace().real - 1.0)
                if drift > cfg.trace_tol:
                    raise TraceDriftError(self.t, drift, cfg.trace_tol)
                self.k1 = apply(self.rho)  # recompute on hermitized state
                self.n_steps += 1
                factor = 5.0 if en == 0.0 else min(5.0, 0.9 * en ** -0.2)
                self.h = min(h * max(factor, 0.2), cfg.max_step)
            else:
                self.n_rejected += 1
                self.h = h * max(0.2, 0.9 * en ** -0.2)


class _ObservableSet:
    """Operators sampled along a trajectory, built once per run."""

    def __init__(self, spec: LatticeSpec):
        self.spec = spec
        da, dp, dm = spec.dims
        eye_p = np.ones(dp)
        eye_m = np.ones(dm)
        self.p_diag = np.kron(np.kron(spec.momenta, eye_p), eye_m)
        self.np_diag = np.kron(np.kron(np.ones(da), np.arange(dp)), eye_m)
        self.nm_diag = np.kron(np.kron(np.ones(da), eye_p), np.arange(dm))

        def embed_atom(op):
            return tensor(op, identity(dp), identity(dm)).data

        self.theta_plus = embed_atom(momentum_shift(spec, +spec.kick_pump_plus))
        self.theta_minus = embed_atom(momentum_shift(spec, -spec.kick_pump_minus))
        self.b_plus = embed_atom(momentum_shift(spec, +spec.kick_intermode))
        self.b_minus = embed_atom(momentum_shift(spec, -spec.kick_intermode))
        self.a_ops = [j.data for j in jump_operators(spec)]

    def sample(self, rho: np.ndarray) -> dict:
        diag = np.real(np.diag(rho))
        bounds = check_truncation_populations(diag, self.spec)
        return {
            "p_mean": float(np.dot(self.p_diag, diag)),
            "n_plus": float(np.dot(self.np_diag, diag)),
            "n_minus": float(np.dot(self.nm_diag, diag)),
            "log_negativity": log_negativity(rho, self.spec.dims),
            "theta_plus": complex((self.theta_plus @ rho).trace()),
            "theta_minus": complex((self.theta_minus @ rho).trace()),
            "b_plus": complex((self.b_plus @ rho).trace()),
            "b_minus": complex((self.b_minus @ rho).trace()),
            "a_plus": complex((self.a_ops[0] @ rho).trace()),
            "a_minus": complex((self.a_ops[1] @ rho).trace()),
            "boundary_atom": bounds["boundary_atom"],
            "boundary_plus": bounds["boundary_plus"],
            "boundary_minus": bounds["boundary_minus"],
            "trace_drift": float(abs(np.sum(diag) - 1.0)),
        }


def check_truncation_populations(diag: np.ndarray, spec: LatticeSpec) -> dict:
    """Population in the outermost two momentum shells and top Fock levels."""
    pops = diag.reshape(spec.dims)
    da = pops.shape[0]
    if da > 4:
        atom = float(pops[:2].sum() + pops[-2:].sum())
    else:
        atom = float(pops.sum())  # ladder so short everything is boundary
    return {
        "boundary_atom": atom,
        "boundary_plus": float(pops[:, -1, :].sum()),
        "boundary_minus": float(pops[:, :, -1].sum()),
    }


def check_truncation(rho: DensityState, spec: LatticeSpec) -> dict:
    """Truncation-adequacy diagnostic for a state (largest value included)."""
    diag = np.real(np.diag(rho.data))
    out = check_truncation_populations(diag, spec)
    out["max"] = max(out.values())
    return out


def evolve(rho0: DensityState, h: Operator, kappa: float,
           cfg: IntegratorConfig, spec: LatticeSpec) -> Trajectory:
    """Integrate the master equation, sampling observables periodically.

    Samples land exactly on multiples of record_interval (t = 0 and t_final
    included); optional snapshot_times store full density-matrix copies.
    """
    ctx = LindbladContext(h, spec, kappa)
    obs_set = _ObservableSet(spec)

    n_rec = max(1, int(math.floor(cfg.t_final / cfg.record_interval + 1e-9)))
    sample_times = [i * cfg.record_interval for i in range(n_rec + 1)]
    if cfg.t_final - sample_times[-1] > 1e-12:
        sample_times.append(cfg.t_final)
    samples = set(sample_times)
    wanted_snaps = set(float(t) for t in cfg.snapshot_times)
    events = sorted(samples | wanted_snaps)

    stepper = Stepper(ctx, rho0.data, cfg)
    records = {}
    times = []
    snapshots = []

    def record(t):
        row = obs_set.sample(stepper.rho)
        times.append(t)
        for key, val in row.items():
            records.setdefault(key, []).append(val)

    for t_ev in events:
        if t_ev > 0.0:
            stepper.advance_to(t_ev)
        if t_ev in samples:
            record(t_ev)
        if t_ev in wanted_snaps:
            snapshots.append((t_ev, DensityState(spec.dims, stepper.rho.copy())))

    arrays = {}
    for key, vals in records.items():
        arrays[key] = np.array(vals)
    return Trajectory(
        times=np.array(times),
        observables=arrays,
        final_state=DensityState(spec.dims, stepper.rho),
        snapshots=snapshots,
        n_steps=stepper.n_steps,
        n_rejected=stepper.n_rejected,
    )
