"""Hamiltonian and dissipator of the pumped ring cavity.

In the frame rotating at the pump frequency (hbar = 1, energies in
omega_rec, lengths in 1/k):

    H_at  = p^2/2m
          + U0 (n+ + n- + a+^dag a- e^{-2ikx} + a-^dag a+ e^{+2ikx})
          + eta (a+ e^{+ikx(1-sin phi)} + a- e^{-ikx(1+sin phi)} + h.c.)
    H_cav = -Delta_c (n+ + n-)

and photons leak from both travelling modes at rate kappa:

    drho/dt = -i[H, rho] + kappa * sum_j (2 a_j rho a_j^dag
                                          - a_j^dag a_j rho - rho a_j^dag a_j).

Momentum bookkeeping on the ladder: with the convention
e^{iKx}|p> = |p + K> (hbar = k = 1), scattering a pump photon INTO mode +
kicks the atom by -(1 - sin phi) k and into mode - by +(1 + sin phi) k, so the
pump couples the ground state to |n = -kick_pump_plus, 1+, 0-> and
|n = +kick_pump_minus, 0+, 1->, both with amplitude eta.

The model has a continuous symmetry: a translation x -> x + Delta combined
with the mode phase rotations a_± -> a_± e^{∓ik(1∓sin phi)Delta} leaves H
invariant for every Delta (the pump's transverse phase at the atom position
shifts too, which is why the naive e^{∓ik Delta} compensation closes only at
sin phi = 0).  Equivalently the integer charge

    C = n_atom + kick_pump_plus * n+ - kick_pump_minus * n-

commutes with H, and the jump operators shift C on both sides of rho equally,
so a C-block-diagonal initial state stays block diagonal: <a_±> vanishes for
all time and the reduced mode states are Fock-diagonal.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .hilbert import (
    LatticeSpec,
    Operator,
    annihilation,
    identity,
    momentum_shift,
    number,
    tensor,
)

__all__ = [
    "PhysicalParams",
    "build_h_atom",
    "build_h_cav",
    "build_hamiltonian",
    "jump_operators",
    "LindbladContext",
    "liouvillian_apply",
    "translation_unitary",
    "symmetry_charge",
]


@dataclass(frozen=True)
class PhysicalParams:
    """Pump rate, dispersive shift, cavity detuning and decay (omega_rec)."""

    eta: float
    u0: float
    delta_c: float
    kappa: float

    def __post_init__(self):
        if self.kappa < 0:
            raise ValueError(f"kappa must be >= 0, got {self.kappa}")


def _embed(spec: LatticeSpec, atom=None, plus=None, minus=None) -> Operator:
    da, dp, dm = spec.dims
    return tensor(atom if atom is not None else identity(da),
                  plus if plus is not None else identity(dp),
                  minus if minus is not None else identity(dm))


def build_h_atom(spec: LatticeSpec, params: PhysicalParams) -> Operator:
    """Kinetic + dispersive + pump part of the Hamiltonian."""
    da, dp, dm = spec.dims
    q = float(spec.momentum_quantum)
    ns = np.arange(-spec.n_max, spec.n_max + 1)
    kinetic = Operator((da,), sp.diags((ns * q) ** 2 + 0j, 0, format="csr"))

    a_p = annihilation(spec.cutoff_plus)
    a_m = annihilation(spec.cutoff_minus)

    h = _embed(spec, atom=kinetic)
    h = h + params.u0 * (_embed(spec, plus=number(spec.cutoff_plus))
                         + _embed(spec, minus=number(spec.cutoff_minus)))

    # a+^dag a- e^{-2ikx} + h.c.
    inter = _embed(spec, atom=momentum_shift(spec, -spec.kick_intermode),
                   plus=a_p.adjoint(), minus=a_m)
    h = h + params.u0 * (inter + inter.adjoint())

    # eta (a+ e^{+ikx(1-s)} + a- e^{-ikx(1+s)} + h.c.)
    pump_p = _embed(spec, atom=momentum_shift(spec, +spec.kick_pump_plus), plus=a_p)
    pump_m = _embed(spec, atom=momentum_shift(spec, -spec.kick_pump_minus), minus=a_m)
    h = h + params.eta * (pump_p + pump_p.adjoint() + pump_m + pump_m.adjoint())
    return h


def build_h_cav(spec: LatticeSpec, params: PhysicalParams) -> Operator:
    return (-params.delta_c) * (_embed(spec, plus=number(spec.cutoff_plus))
                                + _embed(spec, minus=number(spec.cutoff_minus)))


def build_hamiltonian(spec: LatticeSpec, params: PhysicalParams) -> Operator:
    return build_h_atom(spec, params) + build_h_cav(spec, params)


def jump_operators(spec: LatticeSpec) -> list:
    """Embedded lowering operators of the two modes, in order (+, -)."""
    return [
        _embed(spec, plus=annihilation(spec.cutoff_plus)),
        _embed(spec, minus=annihilation(spec.cutoff_minus)),
    ]


class LindbladContext:
    """Precomputed sparse pieces of the master-equation right-hand side.

    Uses H_eff = H - i kappa (n+ + n-): the anticommutator part of the
    dissipator folds into the non-hermitian Hamiltonian, leaving only the
    recycling terms 2 kappa a_j rho a_j^dag to add explicitly.
    """

    def __init__(self, h: Operator, spec: LatticeSpec, kappa: float):
        n_tot = (_embed(spec, plus=number(spec.cutoff_plus))
                 + _embed(spec, minus=number(spec.cutoff_minus)))
        h_eff = (h.data - 1j * kappa * n_tot.data).tocsr()
        self.h_eff = h_eff
        self.h_eff_dag = h_eff.conj(copy=True).T.tocsr()
        self.jumps = [(j.data, j.data.conj(copy=True).T.tocsr())
                      for j in jump_operators(spec)]
        self.kappa = kappa
        self.dim = h.data.shape[0]

    def apply(self, rho: np.ndarray) -> np.ndarray:
        out = self.h_eff @ rho
        out -= (self.h_eff @ rho.conj().T).conj().T   # rho H_eff^dag
        out *= -1j
        if self.kappa != 0.0:
            for a, a_dag in self.jumps:
                ar = a @ rho
                out += (2.0 * self.kappa) * ((a @ ar.conj().T).conj().T)
        return out


def liouvillian_apply(h: Operator, spec: LatticeSpec, kappa: float,
                      rho: np.ndarray) -> np.ndarray:
    """Right-hand side of the master equation for a dense rho.

    Valid for arbitrary (not necessarily hermitian) rho; maps hermitian input
    to a traceless hermitian derivative.  For repeated application build a
    LindbladContext once and call .apply().
    """
    return LindbladContext(h, spec, kappa).apply(rho)


def translation_unitary(spec: LatticeSpec, delta: float) -> Operator:
    """Diagonal unitary implementing x -> x + delta with mode compensation.

    Atom phases e^{-i p_n delta} together with mode rotations
    e^{-i(1-s) delta n+} and e^{+i(1+s) delta n-} (s = sin phi, delta in 1/k).
    Conjugation leaves the Hamiltonian invariant for every delta, not just
    cell-commensurate ones.
    """
    s = spec.angle.value
    da, dp, dm = spec.dims
    p = spec.momenta
    atom = Operator((da,), sp.diags(np.exp(-1j * p * delta), 0, format="csr"))
    phi_p = np.exp(-1j * (1.0 - s) * delta * np.arange(dp))
    phi_m = np.exp(+1j * (1.0 + s) * delta * np.arange(dm))
    mode_p = Operator((dp,), sp.diags(phi_p, 0, format="csr"))
    mode_m = Operator((dm,), sp.diags(phi_m, 0, format="csr"))
    return tensor(atom, mode_p, mode_m)


def symmetry_charge(spec: LatticeSpec) -> Operator:
    """The conserved integer charge C = n_atom + s1 n+ - s2 n- (diagonal)."""
    da, dp, dm = spec.dims
    n_at = np.arange(-spec.n_max, spec.n_max + 1)
    c = (n_at[:, None, None]
         + spec.kick_pump_plus * np.arange(dp)[None, :, None]
         - spec.kick_pump_minus * np.arange(dm)[None, None, :])
    diag = c.reshape(-1).astype(complex)
    return Operator(spec.dims, sp.diags(diag, 0, format="csr"))
