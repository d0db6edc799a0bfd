"""Stationary states of the driven-dissipative model, and pump-strength sweeps.

Primary method: long-time integration from the standard initial state (or a
warm start), declared converged when the max-norm change of rho over a window
1/kappa falls below change_tol AND the max-norm of the master-equation
right-hand side falls below residual_tol.  Cross-check for small spaces: the
null vector of the explicitly vectorized Liouvillian by shifted inverse
iteration.

A sweep walks an ascending list of pump strengths, warm-starting each point
from the previous one, and reads out per point: the Wigner-extracted field
magnitudes of both modes, the broken-symmetry order parameters of the ground
state in the corresponding effective potential, the residual, and truncation
diagnostics.  Chains for different pump angles are independent and may run in
separate worker processes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .hilbert import DensityState, LatticeSpec, Operator, ground_product_state
from .model import (
    LindbladContext,
    PhysicalParams,
    build_hamiltonian,
    jump_operators,
)
from .observables import extract_field, reduced_mode, wigner
from .quantum_dynamics import IntegratorConfig, Stepper, check_truncation

__all__ = [
    "SteadyStateOptions",
    "SteadyStateResult",
    "SteadyStateError",
    "steady_state",
    "vectorized_liouvillian",
    "steady_state_nullspace",
    "SweepPoint",
    "sweep_chain",
]

NULLSPACE_DIM_LIMIT = 200


class SteadyStateError(RuntimeError):
    """No stationary state within the time budget; history attached."""

    def __init__(self, msg: str, history):
        super().__init__(msg)
        self.history = history


@dataclass
class SteadyStateOptions:
    change_tol: float = 1e-8       # max-norm change of rho over one window
    residual_tol: float = 1e-7     # max-norm of L(rho)
    t_max: float = 400.0
    window: float = 0.0            # 0 -> 1/kappa
    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    max_step: float = 0.25


@dataclass
class SteadyStateResult:
    state: DensityState
    residual: float
    t_converge: float
    n_steps: int
    method: str
    degenerate: bool
    history: list = field(default_factory=list)   # (t, window_change, residual)


def steady_state(h: Operator, spec: LatticeSpec, params: PhysicalParams,
                 opts: SteadyStateOptions = None,
                 rho0: DensityState = None) -> SteadyStateResult:
    """Evolve to the fixed point of the master equation.

    With eta = 0 every atom-diagonal (x) vacuum state is stationary; the
    reached fixed point is then reported with degenerate=True rather than
    pretending the state is unique.
    """
    opts = opts or SteadyStateOptions()
    if params.kappa <= 0:
        raise ValueError("steady_state needs kappa > 0 (dissipation selects the state)")
    window = opts.window if opts.window > 0 else 1.0 / params.kappa
    ctx = LindbladContext(h, spec, params.kappa)
    start = (rho0 or ground_product_state(spec)).data

    cfg = IntegratorConfig(t_final=opts.t_max, rel_tol=opts.rel_tol,
                           abs_tol=opts.abs_tol, record_interval=window,
                           max_step=opts.max_step)
    stepper = Stepper(ctx, start, cfg)
    history = []
    prev = stepper.rho.copy()
    t = 0.0
    while t < opts.t_max:
        t = min(t + window, opts.t_max)
        stepper.advance_to(t)
        change = float(np.max(np.abs(stepper.rho - prev)))
        prev = stepper.rho.copy()
        residual = math.inf
        if change < opts.change_tol:
            residual = float(np.max(np.abs(ctx.apply(stepper.rho))))
            if residual <= opts.residual_tol:
                history.append((t, change, residual))
                return SteadyStateResult(
                    state=DensityState(spec.dims, stepper.rho),
                    residual=residual,
                    t_converge=t,
                    n_steps=stepper.n_steps,
                    method="evolve",
                    degenerate=(params.eta == 0.0),
                    history=history,
                )
        history.append((t, change, residual))
    raise SteadyStateError(
        f"no steady state within t_max = {opts.t_max}: last window change "
        f"{history[-1][1]:.3e}, residual {history[-1][2]:.3e}", history)


def vectorized_liouvillian(h: Operator, spec: LatticeSpec,
                           kappa: float) -> sp.csr_matrix:
    """The superoperator as a sparse matrix acting on row-major vec(rho)."""
    hs = h.data.tocsr()
    d = hs.shape[0]
    eye = sp.identity(d, dtype=complex, format="csr")
    lind = -1j * (sp.kron(hs, eye) - sp.kron(eye, hs.T))
    for a in jump_operators(spec):
        asp = a.data.tocsr()
        ad_a = (asp.conj(copy=True).T @ asp).tocsr()
        lind = lind + kappa * (2.0 * sp.kron(asp, asp.conj())
                               - sp.kron(ad_a, eye) - sp.kron(eye, ad_a.T))
    return lind.tocsr()


def steady_state_nullspace(h: Operator, spec: LatticeSpec,
                           params: PhysicalParams,
                           residual_tol: float = 1e-9) -> SteadyStateResult:
    """Null vector of the vectorized Liouvillian by shifted inverse iteration.

    Gated to small composite dimensions; the superoperator is dim^2 x dim^2.
    Degeneracy of the null space (eta = 0) is detected structurally: a second
    start vector, re-orthogonalized against the first at every iteration,
    converging to an independent null vector.
    """
    d = spec.dim
    if d > NULLSPACE_DIM_LIMIT:
        raise ValueError(
            f"nullspace method gated to dim <= {NULLSPACE_DIM_LIMIT}, got {d}")
    lind = vectorized_liouvillian(h, spec, params.kappa).tocsc()
    scale = float(abs(lind).max())
    shift = 1e-12 * scale
    lu = spla.splu(lind - shift * sp.identity(d * d, dtype=complex, format="csc"))

    def iterate(v, against=None, n_iter=30):
        for _ in range(n_iter):
            v = lu.solve(v)
            if against is not None:
                v = v - against * np.vdot(against, v)
            v = v / np.linalg.norm(v)
        return v

    v1 = iterate(np.eye(d, dtype=complex).reshape(-1) / math.sqrt(d))
    rho = v1.reshape(d, d)
    rho = 0.5 * (rho + rho.conj().T)
    tr = np.trace(rho).real
    if abs(tr) < 1e-12:
        rho = -rho if tr < 0 else rho  # degenerate pathologies; keep hermitian
        tr = np.trace(rho).real
    rho = rho / tr

    ctx = LindbladContext(h, spec, params.kappa)
    residual = float(np.max(np.abs(ctx.apply(rho))))

    # structural degeneracy probe with a deflated second vector
    rng = np.random.default_rng(12345)
    v2 = rng.standard_normal(d * d) + 1j * rng.standard_normal(d * d)
    v2 = v2 / np.linalg.norm(v2)
    v2 = iterate(v2, against=v1)
    second_res = float(np.linalg.norm(lind @ v2))
    degenerate = second_res < 1e-6 * scale or params.eta == 0.0

    state = DensityState(spec.dims, rho)
    if residual > residual_tol:
        raise SteadyStateError(
            f"nullspace residual {residual:.3e} above {residual_tol:.1e}", [])
    return SteadyStateResult(state=state, residual=residual, t_converge=0.0,
                             n_steps=0, method="nullspace",
                             degenerate=degenerate)


@dataclass
class SweepPoint:
    eta: float
    alpha_plus: float
    alpha_minus: float
    annulus_plus: bool
    annulus_minus: bool
    theta_plus_gs: float
    theta_minus_gs: float
    residual: float
    boundary_atom: float
    boundary_plus: float
    boundary_minus: float
    t_converge: float
    degenerate: bool


def sweep_chain(spec: LatticeSpec, base: PhysicalParams, etas,
                opts: SteadyStateOptions = None) -> list:
    """Warm-started steady-state sweep over ascending pump strengths."""
    from .effective_potential import broken_symmetry_order_parameters

    opts = opts or SteadyStateOptions()
    etas = list(etas)
    if any(b < a for a, b in zip(etas, etas[1:])):
        raise ValueError("sweep etas must be ascending for warm starting")
    rows = []
    rho_prev = None
    for eta in etas:
        params = PhysicalParams(eta=eta, u0=base.u0, delta_c=base.delta_c,
                                kappa=base.kappa)
        h = build_hamiltonian(spec, params)
        res = steady_state(h, spec, params, opts, rho0=rho_prev)
        rho_prev = res.state
        rho = res.state.data

        fields = {}
        for mode in ("+", "-"):
            red = reduced_mode(rho, spec.dims, mode)
            fields[mode] = extract_field(wigner(red))
        theta_p, theta_m = broken_symmetry_order_parameters(
            spec, params,
            fields["+"].magnitude, fields["-"].magnitude)

        bounds = check_truncation(res.state, spec)
        rows.append(SweepPoint(
            eta=eta,
            alpha_plus=fields["+"].magnitude,
            alpha_minus=fields["-"].magnitude,
            annulus_plus=fields["+"].is_annulus,
            annulus_minus=fields["-"].is_annulus,
            theta_plus_gs=abs(theta_p),
            theta_minus_gs=abs(theta_m),
            residual=res.residual,
            boundary_atom=bounds["boundary_atom"],
            boundary_plus=bounds["boundary_plus"],
            boundary_minus=bounds["boundary_minus"],
            t_converge=res.t_converge,
            degenerate=res.degenerate,
        ))
    return rows
