"""Composite Hilbert space for a single atom in a two-mode ring cavity.

The atom moves along the cavity axis and is pumped transversally at an angle
phi with sin(phi) = a/b rational.  Every light-matter process transfers axial
momentum in multiples of a single quantum q*hbar*k, where

    q = gcd(b - a, b + a, 2b) / b

is the fundamental step of the kick lattice spanned by the three plane waves
e^{i k x (1 - sin phi)}, e^{-i k x (1 + sin phi)} and e^{+-2 i k x}.  The atom
is represented on the plane-wave ladder |n> with momentum n*q*hbar*k,
n in [-n_max, n_max], and each cavity mode on a truncated Fock space.

Units throughout the package: hbar = 1, energies and rates in the recoil
frequency omega_rec = hbar k^2 / 2m, lengths in 1/k.  The kinetic energy of
ladder state |n> is (n q)^2 omega_rec.

Subsystem order is fixed everywhere: (atom, mode +, mode -).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import scipy.sparse as sp

__all__ = [
    "RationalAngle",
    "LatticeSpec",
    "Operator",
    "DensityState",
    "kick_arithmetic",
    "make_lattice",
    "momentum_shift",
    "annihilation",
    "number",
    "identity",
    "tensor",
    "basis_state",
    "ground_product_state",
]


@dataclass(frozen=True)
class RationalAngle:
    """sin(phi) = num/den in lowest terms, |num| <= den, den > 0."""

    num: int
    den: int

    def __post_init__(self):
        if self.den <= 0:
            raise ValueError(f"denominator must be positive, got {self.den}")
        if abs(self.num) > self.den:
            raise ValueError(
                f"|sin phi| = |{self.num}/{self.den}| > 1 is not a pump angle"
            )
        if math.gcd(abs(self.num), self.den) != 1:
            raise ValueError(
                f"{self.num}/{self.den} is not in lowest terms; "
                f"use RationalAngle.of()"
            )

    @classmethod
    def of(cls, num: int, den: int) -> "RationalAngle":
        """Build from any integer ratio, reducing to lowest terms."""
        if den == 0:
            raise ValueError("denominator must be nonzero")
        if den < 0:
            num, den = -num, -den
        g = math.gcd(abs(num), den)
        if g == 0:
            # num == 0 and den == 0 already excluded above
            g = 1
        if num == 0:
            return cls(0, 1)
        return cls(num // g, den // g)

    @property
    def value(self) -> float:
        return self.num / self.den


@dataclass(frozen=True)
class LatticeSpec:
    """Momentum lattice and truncation data for the composite space.

    kick_pump_plus / kick_pump_minus / kick_intermode are the magnitudes, in
    lattice units, of the momentum transferred by e^{i k x (1 - sin phi)},
    e^{i k x (1 + sin phi)} and e^{2 i k x} respectively.
    """

    angle: RationalAngle
    n_max: int
    cutoff_plus: int
    cutoff_minus: int
    momentum_quantum: Fraction
    kick_pump_plus: int
    kick_pump_minus: int
    kick_intermode: int
    cell_length: float

    @property
    def dims(self) -> tuple:
        return (2 * self.n_max + 1, self.cutoff_plus + 1, self.cutoff_minus + 1)

    @property
    def dim(self) -> int:
        d = 1
        for n in self.dims:
            d *= n
        return d

    @property
    def momenta(self) -> np.ndarray:
        """Momentum of each ladder state in units of hbar k."""
        q = float(self.momentum_quantum)
        return q * np.arange(-self.n_max, self.n_max + 1)

    def atom_index(self, n: int) -> int:
        if abs(n) > self.n_max:
            raise ValueError(f"ladder index {n} outside [-{self.n_max}, {self.n_max}]")
        return n + self.n_max


def kick_arithmetic(angle: RationalAngle) -> tuple:
    """(q, s1, s2, s3): momentum quantum and integer kicks for a pump angle.

    q = gcd(b-a, b+a, 2b)/b for sin phi = a/b; the plane waves
    e^{i k x (1 - sin phi)}, e^{i k x (1 + sin phi)}, e^{2 i k x} then kick by
    s1, s2, s3 lattice units with s1 = (b-a)/g etc.
    """
    a, b = angle.num, angle.den
    g = math.gcd(math.gcd(b - a, b + a), 2 * b)
    return Fraction(g, b), (b - a) // g, (b + a) // g, 2 * b // g


def make_lattice(angle: RationalAngle, n_max: int,
                 cutoff_plus: int, cutoff_minus: int) -> LatticeSpec:
    """Construct the lattice spec for a reduced pump angle.

    The momentum quantum is q = gcd(b-a, b+a, 2b)/b for sin phi = a/b; the
    three plane-wave kicks become the integers (b-a)/g, (b+a)/g, 2b/g and the
    spatial unit cell has length 2 pi / q (units 1/k).

    Raises if the largest kick exceeds 2*n_max, in which case that coupling
    operator would be entirely truncated (no pair of retained ladder states is
    connected).  For meaningful physics n_max should be at least the largest
    kick, and in practice several times larger; see check_truncation.
    """
    q, s1, s2, s3 = kick_arithmetic(angle)
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    if max(s1, s2, s3) > 2 * n_max:
        raise ValueError(
            f"largest kick {max(s1, s2, s3)} exceeds 2*n_max = {2 * n_max}: "
            f"the corresponding coupling would be entirely truncated"
        )
    for name, c in (("cutoff_plus", cutoff_plus), ("cutoff_minus", cutoff_minus)):
        if c < 1:
            raise ValueError(f"{name} must be >= 1, got {c}")
    return LatticeSpec(
        angle=angle,
        n_max=n_max,
        cutoff_plus=cutoff_plus,
        cutoff_minus=cutoff_minus,
        momentum_quantum=q,
        kick_pump_plus=s1,
        kick_pump_minus=s2,
        kick_intermode=s3,
        cell_length=2.0 * math.pi / float(q),
    )


@dataclass(frozen=True)
class Operator:
    """Sparse operator together with the subsystem dims it acts on."""

    dims: tuple
    data: sp.csr_matrix

    def adjoint(self) -> "Operator":
        return Operator(self.dims, self.data.conj(copy=True).T.tocsr().sorted_indices())

    def to_dense(self) -> np.ndarray:
        return np.asarray(self.data.todense())

    def expect(self, rho: np.ndarray) -> complex:
        """Tr(A rho) for a dense density matrix."""
        return complex((self.data @ rho).trace())

    def __matmul__(self, other: "Operator") -> "Operator":
        if self.dims != other.dims:
            raise ValueError(f"dims mismatch: {self.dims} vs {other.dims}")
        return Operator(self.dims, (self.data @ other.data).tocsr().sorted_indices())

    def __add__(self, other: "Operator") -> "Operator":
        if self.dims != other.dims:
            raise ValueError(f"dims mismatch: {self.dims} vs {other.dims}")
        return Operator(self.dims, (self.data + other.data).tocsr().sorted_indices())

    def __mul__(self, scalar) -> "Operator":
        return Operator(self.dims, (self.data * scalar).tocsr())

    __rmul__ = __mul__


def momentum_shift(spec: LatticeSpec, steps: int) -> Operator:
    """e^{i (steps * q) k x} on the atom ladder: |n> -> |n + steps>.

    Rows shifted past the truncation boundary are dropped (hard truncation),
    so the matrix has zero columns near the edge and the composition law
    shift(m) @ shift(n) = shift(m+n) holds only away from the boundary.
    """
    d = 2 * spec.n_max + 1
    if steps == 0:
        return Operator((d,), sp.identity(d, dtype=complex, format="csr"))
    if abs(steps) > 2 * spec.n_max:
        # entirely truncated; still a valid (zero) operator but reject loudly
        raise ValueError(f"shift by {steps} connects no retained states (n_max={spec.n_max})")
    data = np.ones(d - abs(steps), dtype=complex)
    mat = sp.diags(data, offsets=-steps, shape=(d, d), format="csr", dtype=complex)
    # offset -steps: entry at (n + steps, n), i.e. column n feeds row n+steps
    return Operator((d,), mat.sorted_indices())


def annihilation(cutoff: int) -> Operator:
    """Fock-space lowering operator a with hard cutoff: a|m> = sqrt(m)|m-1>."""
    d = cutoff + 1
    data = np.sqrt(np.arange(1, d, dtype=float)).astype(complex)
    mat = sp.diags(data, offsets=1, shape=(d, d), format="csr", dtype=complex)
    return Operator((d,), mat.sorted_indices())


def number(cutoff: int) -> Operator:
    d = cutoff + 1
    return Operator((d,), sp.diags(np.arange(d, dtype=complex), 0, shape=(d, d),
                                   format="csr"))


def identity(dim: int) -> Operator:
    return Operator((dim,), sp.identity(dim, dtype=complex, format="csr"))


def tensor(*ops: Operator) -> Operator:
    """Kronecker product in the fixed subsystem order of the arguments."""
    if not ops:
        raise ValueError("tensor() needs at least one operator")
    dims = tuple(d for op in ops for d in op.dims)
    mat = ops[0].data
    for op in ops[1:]:
        mat = sp.kron(mat, op.data, format="csr")
    return Operator(dims, mat.tocsr().sorted_indices())


@dataclass
class DensityState:
    """Dense density matrix on the composite space (atom, mode +, mode -)."""

    dims: tuple
    data: np.ndarray

    def copy(self) -> "DensityState":
        return DensityState(self.dims, self.data.copy())

    def trace(self) -> float:
        return float(np.trace(self.data).real)

    def hermiticity_defect(self) -> float:
        return float(np.max(np.abs(self.data - self.data.conj().T)))

    def min_eigenvalue(self) -> float:
        h = 0.5 * (self.data + self.data.conj().T)
        return float(np.linalg.eigvalsh(h)[0])

    def validate(self, trace_tol: float = 1e-8, eig_tol: float = 1e-8) -> None:
        """Raise if the state is outside physical tolerances."""
        drift = abs(np.trace(self.data) - 1.0)
        if drift > trace_tol:
            raise ValueError(f"trace drift {drift:.3e} exceeds {trace_tol:.1e}")
        herm = self.hermiticity_defect()
        if herm > trace_tol:
            raise ValueError(f"hermiticity defect {herm:.3e} exceeds {trace_tol:.1e}")
        lam = self.min_eigenvalue()
        if lam < -eig_tol:
            raise ValueError(f"negative population {lam:.3e} below -{eig_tol:.1e}")


def basis_state(spec: LatticeSpec, n: int, m_plus: int, m_minus: int) -> DensityState:
    """Projector onto the product basis state |n> |m_+> |m_->."""
    da, dp, dm = spec.dims
    if not (0 <= m_plus < dp and 0 <= m_minus < dm):
        raise ValueError(f"Fock labels ({m_plus}, {m_minus}) outside cutoffs")
    idx = (spec.atom_index(n) * dp + m_plus) * dm + m_minus
    rho = np.zeros((spec.dim, spec.dim), dtype=complex)
    rho[idx, idx] = 1.0
    return DensityState(spec.dims, rho)


def ground_product_state(spec: LatticeSpec) -> DensityState:
    """The standard initial state |p=0> (x) |0> (x) |0>."""
    return basis_state(spec, 0, 0, 0)
