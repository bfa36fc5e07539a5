"""Explicit density operators generating a given 1RDM.

Any occupation vector inside the closed representable set decomposes
into extreme points: 0/1 vectors with N ones for fermions (greedy
peeling), the scaled simplex corners N*e_p for bosons.  From such a
decomposition a generating density operator is assembled as a convex
combination of Slater-determinant projectors, or for bosons as a single
condensate-superposition pure state.

Vertices use 0-based orbital indices throughout.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial, prod, sqrt

import numpy as np

from .ensemble import (
    CLASSIFY_DEFAULT_TOL,
    DensityOperator,
    OneRdm,
    RdmClass,
    classify_rdm,
    natural_spectrum,
)
from .errors import (
    DecompositionFailure,
    InfeasibleOccupations,
    InvalidArguments,
    NotRepresentableError,
)
from .fock import ConfigurationBasis, Statistics

OCCUPATION_FEAS_TOL = 1e-10
WEIGHT_SUM_TOL = 1e-12
RECONSTRUCTION_TOL = 1e-10
PEEL_CUTOFF = 1e-14


@dataclass(frozen=True)
class PolytopeDecomposition:
    """Convex combination of occupation-polytope vertices.

    terms pairs each weight with a vertex given as an orbital index
    tuple: strictly increasing with N entries for fermions, N repeats of
    a single orbital for bosonic simplex corners.  residual is the
    reconstruction error in the max norm.
    """

    terms: tuple[tuple[float, tuple[int, ...]], ...]
    residual: float

    @property
    def weights(self) -> np.ndarray:
        return np.array([mu for mu, _ in self.terms])

    def occupation_vector(self, nb: int) -> np.ndarray:
        out = np.zeros(nb)
        for mu, vertex in self.terms:
            for i in vertex:
                out[i] += mu
        return out


def polytope_decompose(occupations, n_particles: int) -> PolytopeDecomposition:
    """Greedy peeling of a fermionic occupation vector into 0/1 vertices.

    Each round selects the N largest remaining coordinates (ties to the
    lowest index) and peels off the largest weight that keeps the
    remainder inside the shrunken polytope.  Terminates well under the
    nb^2 iteration cap; exactness is enforced by a reconstruction check.
    """
    occ = np.asarray(occupations, dtype=float)
    n = int(n_particles)
    if occ.ndim != 1 or occ.size == 0:
        raise InvalidArguments(f"expected a 1-d occupation vector, got shape {occ.shape}")
    nb = occ.size
    if n < 1 or n > nb:
        raise InvalidArguments(f"particle count {n} incompatible with {nb} orbitals")
    if occ.min() < -OCCUPATION_FEAS_TOL or occ.max() > 1 + OCCUPATION_FEAS_TOL:
        raise InfeasibleOccupations(f"occupations outside [0, 1]: min {occ.min():.3e}, max {occ.max():.3e}")
    if abs(occ.sum() - n) > OCCUPATION_FEAS_TOL:
        raise InfeasibleOccupations(f"occupations sum to {occ.sum()!r}, expected {n}")

    residual = np.clip(occ, 0.0, 1.0)
    terms: list[tuple[float, tuple[int, ...]]] = []
    for _ in range(nb * nb):
        t = residual.sum() / n
        if t <= PEEL_CUTOFF:
            break
        order = np.argsort(-residual, kind="stable")
        selected = np.sort(order[:n])
        unselected = order[n:]
        mu = min(float(residual[selected].min()), t)
        if unselected.size:
            # unselected coordinates must stay coverable by later rounds
            mu = min(mu, t - float(residual[unselected].max()))
        if mu <= 0:
            break
        residual[selected] -= mu
        np.clip(residual, 0.0, None, out=residual)
        terms.append((float(mu), tuple(int(i) for i in selected)))

    decomp = PolytopeDecomposition(terms=tuple(terms), residual=0.0)
    recon = decomp.occupation_vector(nb)
    err = float(np.max(np.abs(recon - np.clip(occ, 0.0, 1.0))))
    weight_defect = abs(sum(mu for mu, _ in terms) - 1.0)
    if err > RECONSTRUCTION_TOL or weight_defect > max(WEIGHT_SUM_TOL, PEEL_CUTOFF):
        raise DecompositionFailure(
            f"greedy peel left reconstruction error {err:.3e}, weight defect {weight_defect:.3e}"
        )
    return PolytopeDecomposition(terms=tuple(terms), residual=err)


def simplex_decompose(occupations, n_particles: int) -> PolytopeDecomposition:
    """Bosonic analogue: weights n_p/N on the simplex corners N*e_p."""
    occ = np.asarray(occupations, dtype=float)
    n = int(n_particles)
    if occ.ndim != 1 or occ.size == 0:
        raise InvalidArguments(f"expected a 1-d occupation vector, got shape {occ.shape}")
    if occ.min() < -OCCUPATION_FEAS_TOL:
        raise InfeasibleOccupations(f"negative occupation {occ.min():.3e}")
    if abs(occ.sum() - n) > OCCUPATION_FEAS_TOL:
        raise InfeasibleOccupations(f"occupations sum to {occ.sum()!r}, expected {n}")
    clipped = np.clip(occ, 0.0, None)
    terms = tuple(
        (float(x / n), (int(p),) * n) for p, x in enumerate(clipped) if x > 0.0
    )
    recon = np.zeros(occ.size)
    for mu, vertex in terms:
        recon[vertex[0]] += mu * n
    err = float(np.max(np.abs(recon - clipped)))
    return PolytopeDecomposition(terms=terms, residual=err)


def _as_rdm(gamma) -> OneRdm:
    return gamma if isinstance(gamma, OneRdm) else OneRdm(np.asarray(gamma, dtype=complex))


def _check_target(gamma: OneRdm, basis: ConfigurationBasis, statistics: Statistics, tol: float) -> None:
    if basis.statistics is not statistics:
        raise InvalidArguments(f"basis holds {basis.statistics.value}s, construction is for {statistics.value}s")
    if gamma.nb != basis.nb:
        raise InvalidArguments(f"1RDM on {gamma.nb} orbitals, basis has {basis.nb}")
    if abs(gamma.trace - basis.n) > 1e-10:
        raise InvalidArguments(f"1RDM trace {gamma.trace} differs from n={basis.n} beyond 1e-10")
    if classify_rdm(gamma, statistics, tol) is RdmClass.OUTSIDE:
        raise NotRepresentableError("1RDM lies outside the admissible occupation set")


def coleman_fermionic(
    gamma, basis: ConfigurationBasis, tol: float = CLASSIFY_DEFAULT_TOL
) -> DensityOperator:
    """Density operator generating a fermionic 1RDM, boundary included.

    Natural occupations are peeled into 0/1 vertices; each vertex maps to
    the Slater determinant of the corresponding natural orbitals, whose
    configuration amplitudes are N x N minors of the orbital matrix.
    """
    target = _as_rdm(gamma)
    _check_target(target, basis, Statistics.FERMION, tol)
    spectrum = natural_spectrum(target)
    decomp = polytope_decompose(np.clip(spectrum.occupations, 0.0, 1.0), basis.n)
    orbitals = spectrum.orbitals
    occupied_rows = [np.flatnonzero(state) for state in basis.states]
    dim = len(basis.states)
    rho = np.zeros((dim, dim), dtype=complex)
    for mu, vertex in decomp.terms:
        cols = np.array(vertex, dtype=int)
        vec = np.array([np.linalg.det(orbitals[np.ix_(rows, cols)]) for rows in occupied_rows])
        vec /= np.linalg.norm(vec)
        rho += mu * np.outer(vec, vec.conj())
    return DensityOperator((rho + rho.conj().T) / 2, basis.tag)


def _condensate_vector(orbital: np.ndarray, basis: ConfigurationBasis) -> np.ndarray:
    # <s|phi^(x)N> = sqrt(N!/prod s_p!) * prod c_p^(s_p)
    n = basis.n
    root_nfac = sqrt(factorial(n))
    amps = np.empty(len(basis.states), dtype=complex)
    for m, state in enumerate(basis.states):
        weight = root_nfac / sqrt(prod(factorial(s) for s in state))
        value = 1.0 + 0.0j
        for p, s in enumerate(state):
            if s:
                value *= orbital[p] ** s
        amps[m] = weight * value
    return amps


def coleman_bosonic(
    gamma, basis: ConfigurationBasis, tol: float = CLASSIFY_DEFAULT_TOL
) -> DensityOperator:
    """Density operator generating a bosonic 1RDM.

    For one particle the 1RDM itself, reinterpreted on the configuration
    basis, is already a density operator.  For N >= 2 a single pure
    superposition of natural-orbital condensates suffices: the cross
    terms between different condensates carry no one-body weight.
    """
    target = _as_rdm(gamma)
    _check_target(target, basis, Statistics.BOSON, tol)
    if basis.n == 1:
        # descending-lex single-particle configurations align with orbitals
        return DensityOperator(target.matrix.copy(), basis.tag)
    spectrum = natural_spectrum(target)
    occ = np.clip(spectrum.occupations, 0.0, None)
    psi = np.zeros(len(basis.states), dtype=complex)
    for j in range(basis.nb):
        if occ[j] == 0.0:
            continue
        psi += sqrt(occ[j] / basis.n) * _condensate_vector(spectrum.orbitals[:, j], basis)
    psi /= np.linalg.norm(psi)
    return DensityOperator(np.outer(psi, psi.conj()), basis.tag)


def _haar_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    z = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def random_rdm(
    nb: int,
    n_particles: int,
    statistics: Statistics,
    interior: bool = True,
    seed=None,
) -> OneRdm:
    """Seeded random 1RDM: occupations from a scaled Dirichlet draw with
    rejection against the constraints, rotated by a Haar unitary.

    interior=True keeps every occupation at least 0.01 away from each
    polytope face; otherwise fermion draws merely reject n_i >= 1.
    """
    if nb < 1 or n_particles < 1:
        raise InvalidArguments(f"need nb >= 1 and n >= 1, got nb={nb}, n={n_particles}")
    if statistics is Statistics.FERMION and n_particles >= nb:
        raise InvalidArguments(f"fermions need nb > n, got nb={nb}, n={n_particles}")
    rng = np.random.default_rng(seed)
    margin = 0.01 if interior else 0.0
    for _ in range(100000):
        occ = rng.dirichlet(np.ones(nb)) * n_particles
        if interior and occ.min() < margin:
            continue
        if statistics is Statistics.FERMION and occ.max() > 1 - margin:
            continue
        break
    else:
        raise InvalidArguments(f"no occupation draw satisfied the margins for nb={nb}, n={n_particles}")
    q = _haar_unitary(rng, nb)
    gamma = (q * occ) @ q.conj().T
    return OneRdm((gamma + gamma.conj().T) / 2)
