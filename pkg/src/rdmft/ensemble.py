"""Canonical Gibbs states, grand potential pieces, and 1RDM extraction.

The partition function is handled in log space throughout: with E_min the
lowest eigenvalue of H, log Z = -beta*E_min + log sum_m exp(-beta*(E_m -
E_min)), so no overflow occurs for any beta the floats can express.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from math import exp, log

import numpy as np

from .errors import (
    BasisMismatch,
    DimensionMismatch,
    InvalidArguments,
    InvalidDensityOperator,
    NonHermitianInput,
)
from .fock import ConfigurationBasis, DensityOperator, ManyBodyOperator, Statistics, _hermiticity_defect

RDM_TRACE_TOL = 1e-10
ENTROPY_EIGENVALUE_TOL = 1e-12
CLASSIFY_DEFAULT_TOL = 1e-9


@dataclass(frozen=True)
class EnsembleParams:
    """Inverse temperature of the canonical ensemble."""

    beta: float

    def __post_init__(self):
        if not (0.0 < self.beta < float("inf")):
            raise InvalidArguments(f"beta must be positive and finite, got {self.beta}")


@dataclass(frozen=True, eq=False)
class GibbsSolution:
    """Gibbs state of a many-body Hamiltonian together with its spectral data.

    weights holds the populations exp(-beta*(E_m - E_min))/Z~ matching the
    eigenvector columns; omega is the grand potential -log(Z)/beta.
    """

    rho: DensityOperator
    log_z: float
    omega: float
    energies: np.ndarray
    eigenvectors: np.ndarray
    weights: np.ndarray

    @property
    def z(self) -> float:
        """Partition function; may overflow to inf for large beta*|E_min|."""
        try:
            return exp(self.log_z)
        except OverflowError:
            return float("inf")


@dataclass(frozen=True, eq=False)
class OneRdm:
    """One-body reduced density matrix gamma_ij = Tr{rho a+_j a_i}."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(getattr(self.matrix, "matrix", self.matrix), dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionMismatch(f"expected a square matrix, got shape {m.shape}")
        if _hermiticity_defect(m) > 1e-12:
            raise NonHermitianInput("1RDM is not Hermitian within 1e-12")
        object.__setattr__(self, "matrix", m)

    @property
    def nb(self) -> int:
        return self.matrix.shape[0]

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)


@dataclass(frozen=True, eq=False)
class NaturalSpectrum:
    """Natural occupations (descending) and the matching orbital columns."""

    occupations: np.ndarray
    orbitals: np.ndarray


class RdmClass(Enum):
    INTERIOR = "interior"
    BOUNDARY = "boundary"
    OUTSIDE = "outside"


def gibbs_state(hamiltonian: ManyBodyOperator, params: EnsembleParams) -> GibbsSolution:
    """Diagonalize H and assemble exp(-beta*H)/Z in log space."""
    h = hamiltonian.matrix
    if _hermiticity_defect(h) > 1e-12:
        raise NonHermitianInput("Hamiltonian is not Hermitian within 1e-12")
    energies, vectors = np.linalg.eigh(h)
    shifted = energies - energies[0]
    boltzmann = np.exp(-params.beta * shifted)
    z_shifted = float(np.sum(boltzmann))
    log_z = -params.beta * float(energies[0]) + log(z_shifted)
    weights = boltzmann / z_shifted
    rho = (vectors * weights) @ vectors.conj().T
    rho = (rho + rho.conj().T) / 2
    return GibbsSolution(
        rho=DensityOperator(rho, hamiltonian.basis_tag),
        log_z=log_z,
        omega=-log_z / params.beta,
        energies=energies,
        eigenvectors=vectors,
        weights=weights,
    )


def entropy(rho: DensityOperator) -> float:
    """Von Neumann entropy -sum w log w in natural log units, 0 log 0 = 0."""
    w = np.linalg.eigvalsh(rho.matrix)
    if w[0] < -ENTROPY_EIGENVALUE_TOL or w[-1] > 1.0 + ENTROPY_EIGENVALUE_TOL:
        raise InvalidDensityOperator(f"eigenvalues outside [0, 1] beyond 1e-12: [{w[0]}, {w[-1]}]")
    w = np.clip(w, 0.0, 1.0)
    positive = w[w > 0.0]
    return max(float(-np.sum(positive * np.log(positive))), 0.0)


def helmholtz(rho: DensityOperator, hamiltonian: ManyBodyOperator, params: EnsembleParams) -> float:
    """Free-energy functional Tr{rho H} - S[rho]/beta of a trial state."""
    if rho.basis_tag != hamiltonian.basis_tag:
        raise BasisMismatch(f"state on {rho.basis_tag!r}, operator on {hamiltonian.basis_tag!r}")
    if rho.dim != hamiltonian.dim:
        raise DimensionMismatch(f"state dim {rho.dim} vs operator dim {hamiltonian.dim}")
    energy = float(np.trace(rho.matrix @ hamiltonian.matrix).real)
    return energy - entropy(rho) / params.beta


def one_rdm(rho: DensityOperator, basis: ConfigurationBasis) -> OneRdm:
    """Extract gamma_ij = Tr{rho a+_j a_i} via the basis hop tables."""
    if rho.basis_tag != basis.tag:
        raise BasisMismatch(f"state on {rho.basis_tag!r}, basis is {basis.tag!r}")
    if rho.dim != basis.dim:
        raise DimensionMismatch(f"state dim {rho.dim} vs basis dim {basis.dim}")
    gamma = np.zeros((basis.nb, basis.nb), dtype=complex)
    m = rho.matrix
    for i in range(basis.nb):
        for j in range(basis.nb):
            rows, cols, amps = basis.hop_terms[j][i]
            gamma[i, j] = np.sum(amps * m[cols, rows])
    gamma = (gamma + gamma.conj().T) / 2
    if abs(float(np.trace(gamma).real) - basis.n) > RDM_TRACE_TOL:
        raise InvalidDensityOperator(
            f"1RDM trace {np.trace(gamma).real!r} differs from n={basis.n} beyond 1e-10"
        )
    if basis.statistics is Statistics.FERMION:
        occ = np.linalg.eigvalsh(gamma)
        if occ[0] < -1e-12 or occ[-1] > 1.0 + 1e-12:
            raise InvalidDensityOperator(
                f"fermionic occupations {occ} leave [0, 1] beyond 1e-12"
            )
    return OneRdm(gamma)


def natural_spectrum(gamma: OneRdm) -> NaturalSpectrum:
    """Eigendecomposition of the 1RDM, occupations sorted descending."""
    occ, orbitals = np.linalg.eigh(gamma.matrix)
    return NaturalSpectrum(occupations=occ[::-1].copy(), orbitals=orbitals[:, ::-1].copy())


def classify_rdm(gamma, statistics: Statistics, tol: float = CLASSIFY_DEFAULT_TOL) -> RdmClass:
    """Locate a 1RDM relative to the representable set.

    Interior: every natural occupation clears the active constraints by
    more than tol (n_i > tol, and for fermions n_i < 1 - tol).  Boundary:
    within tol of a constraint but not beyond it.  Outside: any occupation
    violates a constraint by more than tol.
    """
    g = gamma if isinstance(gamma, OneRdm) else OneRdm(np.asarray(gamma, dtype=complex))
    occ = np.linalg.eigvalsh(g.matrix)
    low = float(np.min(occ))
    if low < -tol:
        return RdmClass.OUTSIDE
    if statistics is Statistics.FERMION:
        high = float(np.max(occ))
        if high > 1.0 + tol:
            return RdmClass.OUTSIDE
        if low <= tol or high >= 1.0 - tol:
            return RdmClass.BOUNDARY
        return RdmClass.INTERIOR
    return RdmClass.BOUNDARY if low <= tol else RdmClass.INTERIOR
