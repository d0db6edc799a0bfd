"""Hamiltonian structure, dissipator correctness, and symmetries.

The master-equation right-hand side is checked against an independently
assembled dense superoperator matrix (row-major vec convention:
vec(A rho B) = (A kron B^T) vec(rho)).
"""

import numpy as np
import pytest
import scipy.sparse as sp

from ringcavity.hilbert import RationalAngle, make_lattice, ground_product_state
from ringcavity.model import (
    LindbladContext,
    PhysicalParams,
    build_h_atom,
    build_h_cav,
    build_hamiltonian,
    jump_operators,
    liouvillian_apply,
    symmetry_charge,
    translation_unitary,
)

PARAMS = PhysicalParams(eta=12.0, u0=-1.0, delta_c=-10.0, kappa=10.0)
TOY = PhysicalParams(eta=0.7, u0=-1.3, delta_c=-2.0, kappa=0.9)


def toy_space():
    return make_lattice(RationalAngle(0, 1), n_max=1, cutoff_plus=1, cutoff_minus=1)


def dense_superoperator(h: np.ndarray, jumps, kappa: float) -> np.ndarray:
    """Oracle: the vectorized Liouvillian as an explicit dense matrix."""
    d = h.shape[0]
    eye = np.eye(d)
    lind = -1j * (np.kron(h, eye) - np.kron(eye, h.T))
    for a in jumps:
        ad_a = a.conj().T @ a
        lind += kappa * (2.0 * np.kron(a, a.conj())
                         - np.kron(ad_a, eye) - np.kron(eye, ad_a.T))
    return lind


# --- Hamiltonian structure ------------------------------------------------

def test_hamiltonian_hermitian():
    spec = make_lattice(RationalAngle(1, 2), n_max=8, cutoff_plus=4, cutoff_minus=4)
    h = build_hamiltonian(spec, PARAMS).to_dense()
    assert np.max(np.abs(h - h.conj().T)) < 1e-13


def test_pump_matrix_elements():
    """Creating a photon in mode + kicks the atom one lattice unit downward,
    in mode - three units upward (sin phi = 1/2), each with amplitude eta."""
    spec = make_lattice(RationalAngle(1, 2), n_max=8, cutoff_plus=4, cutoff_minus=4)
    h = build_h_atom(spec, PARAMS).to_dense()
    da, dp, dm = spec.dims

    def idx(n, mp, mm):
        return (spec.atom_index(n) * dp + mp) * dm + mm

    assert h[idx(-1, 1, 0), idx(0, 0, 0)] == pytest.approx(PARAMS.eta)
    assert h[idx(+3, 0, 1), idx(0, 0, 0)] == pytest.approx(PARAMS.eta)
    # those are the only states the pump connects to the ground state
    col = h[:, idx(0, 0, 0)].copy()
    col[idx(-1, 1, 0)] = col[idx(+3, 0, 1)] = 0.0
    assert np.max(np.abs(col)) == 0.0
    # photon-number ladder factor sqrt(m+1)
    assert h[idx(-1, 2, 1), idx(0, 1, 1)] == pytest.approx(PARAMS.eta * np.sqrt(2))


def test_intermode_matrix_element():
    spec = make_lattice(RationalAngle(1, 2), n_max=8, cutoff_plus=4, cutoff_minus=4)
    h = build_h_atom(spec, PARAMS).to_dense()
    da, dp, dm = spec.dims

    def idx(n, mp, mm):
        return (spec.atom_index(n) * dp + mp) * dm + mm

    # a+^dag a- e^{-2ikx}: |0, 0+, 1->  ->  |-4, 1+, 0->
    assert h[idx(-4, 1, 0), idx(0, 0, 1)] == pytest.approx(PARAMS.u0)
    # and its conjugate partner
    assert h[idx(0, 0, 1), idx(-4, 1, 0)] == pytest.approx(PARAMS.u0)


def test_kinetic_and_dispersive_diagonal():
    spec = make_lattice(RationalAngle(1, 2), n_max=8, cutoff_plus=4, cutoff_minus=4)
    h = build_h_atom(spec, PARAMS).to_dense()
    da, dp, dm = spec.dims

    def idx(n, mp, mm):
        return (spec.atom_index(n) * dp + mp) * dm + mm

    assert h[idx(0, 0, 0), idx(0, 0, 0)] == pytest.approx(0.0)
    assert h[idx(3, 0, 0), idx(3, 0, 0)] == pytest.approx((3 * 0.5) ** 2)
    assert h[idx(0, 2, 1), idx(0, 2, 1)] == pytest.approx(PARAMS.u0 * 3)


def test_h_cav_diagonal():
    spec = make_lattice(RationalAngle(1, 2), n_max=2, cutoff_plus=2, cutoff_minus=2)
    h = build_h_cav(spec, PARAMS).to_dense()
    assert np.count_nonzero(h - np.diag(np.diag(h))) == 0
    da, dp, dm = spec.dims
    diag = np.diag(h).real.reshape(spec.dims)
    assert diag[0, 2, 1] == pytest.approx(-PARAMS.delta_c * 3)


def test_jump_operators_shape():
    spec = make_lattice(RationalAngle(1, 2), n_max=2, cutoff_plus=3, cutoff_minus=2)
    a_p, a_m = jump_operators(spec)
    assert a_p.data.shape == (spec.dim, spec.dim)
    # lowering only the + mode: acts as sqrt(m) on the middle label
    rho = np.zeros((spec.dim, spec.dim), complex)
    v = np.zeros(spec.dim, complex)
    da, dp, dm = spec.dims
    v[(spec.atom_index(0) * dp + 2) * dm + 1] = 1.0
    w = a_p.data @ v
    assert w[(spec.atom_index(0) * dp + 1) * dm + 1] == pytest.approx(np.sqrt(2))
    assert np.count_nonzero(np.abs(w) > 1e-15) == 1


# --- Liouvillian ----------------------------------------------------------

def test_liouvillian_matches_dense_superoperator():
    spec = toy_space()
    h = build_hamiltonian(spec, TOY)
    lind = dense_superoperator(h.to_dense(),
                               [j.to_dense() for j in jump_operators(spec)],
                               TOY.kappa)
    rng = np.random.default_rng(3)
    d = spec.dim
    for hermitian in (True, False):
        m = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        if hermitian:
            m = 0.5 * (m + m.conj().T)
        got = liouvillian_apply(h, spec, TOY.kappa, m)
        want = (lind @ m.reshape(-1)).reshape(d, d)
        assert np.max(np.abs(got - want)) < 1e-12


def test_liouvillian_output_traceless_hermitian():
    spec = make_lattice(RationalAngle(1, 2), n_max=4, cutoff_plus=2, cutoff_minus=2)
    h = build_hamiltonian(spec, PARAMS)
    rng = np.random.default_rng(11)
    d = spec.dim
    m = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    rho = m @ m.conj().T
    rho /= np.trace(rho)
    out = liouvillian_apply(h, spec, PARAMS.kappa, rho)
    assert abs(np.trace(out)) < 1e-10
    assert np.max(np.abs(out - out.conj().T)) < 1e-10


def test_context_apply_matches_reference():
    spec = toy_space()
    h = build_hamiltonian(spec, TOY)
    ctx = LindbladContext(h, spec, TOY.kappa)
    rng = np.random.default_rng(5)
    m = rng.standard_normal((12, 12)) + 1j * rng.standard_normal((12, 12))
    assert np.max(np.abs(ctx.apply(m) - liouvillian_apply(h, spec, TOY.kappa, m))) < 1e-14


# --- symmetries -----------------------------------------------------------

@pytest.mark.parametrize("angle", [RationalAngle(1, 2), RationalAngle(0, 1)])
@pytest.mark.parametrize("delta", [0.37, 1.234, 6.0])
def test_translation_covariance(angle, delta):
    spec = make_lattice(angle, n_max=6, cutoff_plus=3, cutoff_minus=3)
    h = build_hamiltonian(spec, PARAMS).to_dense()
    u = translation_unitary(spec, delta).to_dense()
    resid = u.conj().T @ h @ u - h
    assert np.max(np.abs(resid)) < 1e-10


def test_translation_unitary_is_unitary():
    spec = make_lattice(RationalAngle(1, 2), n_max=3, cutoff_plus=2, cutoff_minus=2)
    u = translation_unitary(spec, 0.81).to_dense()
    assert np.max(np.abs(u.conj().T @ u - np.eye(spec.dim))) < 1e-14


@pytest.mark.parametrize("angle", [RationalAngle(1, 2), RationalAngle(0, 1),
                                   RationalAngle(1, 3)])
def test_symmetry_charge_commutes(angle):
    spec = make_lattice(angle, n_max=6, cutoff_plus=2, cutoff_minus=2)
    h = build_hamiltonian(spec, PARAMS).to_dense()
    c = symmetry_charge(spec).to_dense()
    assert np.max(np.abs(c @ h - h @ c)) < 1e-12


def test_vacuum_is_charge_eigenstate():
    spec = make_lattice(RationalAngle(1, 2), n_max=4, cutoff_plus=2, cutoff_minus=2)
    rho = ground_product_state(spec)
    c = symmetry_charge(spec)
    assert abs(c.expect(rho.data)) < 1e-15
