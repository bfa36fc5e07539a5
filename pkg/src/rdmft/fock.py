"""Configuration bases at fixed particle number and second-quantized lifting.

A configuration is an occupation vector over ``nb`` orthonormal orbitals,
with entries in {0, 1} for fermions and {0..n} for bosons, summing to the
particle number ``n``.  Configurations are enumerated in descending
lexicographic order; that order is fixed, so matrices built on the same
(nb, n, statistics) triple are always directly comparable.

Sign convention: a fermionic configuration stands for the creation string
with ascending orbital indices applied to the vacuum.  Acting with a_j or
a+_j therefore picks up (-1)**(number of occupied orbitals below j),
evaluated on the occupations at the moment the operator is applied.
Bosonic operators carry the usual sqrt(occupation) factors.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from math import comb, sqrt

import numpy as np

from .errors import (
    DimensionMismatch,
    InvalidArguments,
    InvalidConfiguration,
    InvalidDensityOperator,
    NonHermitianInput,
    SymmetryViolation,
)

ONE_BODY_HERMITICITY_TOL = 1e-13
LIFTED_HERMITICITY_TOL = 1e-12
TWO_BODY_SYMMETRY_TOL = 1e-12
DENSITY_TRACE_TOL = 1e-12
DENSITY_PSD_TOL = 1e-12


class Statistics(Enum):
    """Particle exchange statistics."""

    BOSON = "boson"
    FERMION = "fermion"


def _hermiticity_defect(m: np.ndarray) -> float:
    return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0


def _as_square(matrix, size: int | None = None) -> np.ndarray:
    m = np.asarray(getattr(matrix, "matrix", matrix), dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {m.shape}")
    if size is not None and m.shape[0] != size:
        raise DimensionMismatch(f"expected a {size}x{size} matrix, got {m.shape}")
    return m


@dataclass(frozen=True, eq=False)
class OneBodyOperator:
    """Hermitian matrix on the orbital space."""

    matrix: np.ndarray

    def __post_init__(self):
        m = _as_square(self.matrix)
        if _hermiticity_defect(m) > ONE_BODY_HERMITICITY_TOL:
            raise NonHermitianInput("one-body matrix is not Hermitian within 1e-13")
        object.__setattr__(self, "matrix", m)

    @property
    def nb(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True, eq=False)
class TwoBodyOperator:
    """Coefficient tensor w[i,j,k,l] of (1/2) sum w_ijkl a+_i a+_j a_l a_k.

    Required symmetries: hermiticity w[i,j,k,l] = conj(w[k,l,i,j]) and
    particle exchange w[i,j,k,l] = w[j,i,l,k].
    """

    tensor: np.ndarray

    def __post_init__(self):
        w = np.asarray(getattr(self.tensor, "tensor", self.tensor), dtype=complex)
        if w.ndim != 4 or len(set(w.shape)) != 1:
            raise DimensionMismatch(f"expected an (nb,)*4 tensor, got shape {w.shape}")
        if np.max(np.abs(w - w.transpose(2, 3, 0, 1).conj())) > TWO_BODY_SYMMETRY_TOL:
            raise SymmetryViolation("two-body tensor violates hermiticity")
        if np.max(np.abs(w - w.transpose(1, 0, 3, 2))) > TWO_BODY_SYMMETRY_TOL:
            raise SymmetryViolation("two-body tensor violates particle-exchange symmetry")
        object.__setattr__(self, "tensor", w)

    @property
    def nb(self) -> int:
        return self.tensor.shape[0]


@dataclass(frozen=True, eq=False)
class ManyBodyOperator:
    """Hermitian matrix on a configuration basis, tagged by that basis."""

    matrix: np.ndarray
    basis_tag: str

    def __post_init__(self):
        m = _as_square(self.matrix)
        if _hermiticity_defect(m) > LIFTED_HERMITICITY_TOL:
            raise NonHermitianInput("many-body matrix is not Hermitian within 1e-12")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """Unit-trace positive semidefinite matrix on a configuration basis."""

    matrix: np.ndarray
    basis_tag: str

    def __post_init__(self):
        m = _as_square(self.matrix)
        if _hermiticity_defect(m) > LIFTED_HERMITICITY_TOL:
            raise InvalidDensityOperator("density matrix is not Hermitian within 1e-12")
        if abs(np.trace(m).real - 1.0) > DENSITY_TRACE_TOL or abs(np.trace(m).imag) > DENSITY_TRACE_TOL:
            raise InvalidDensityOperator("density matrix trace differs from 1 beyond 1e-12")
        if float(np.min(np.linalg.eigvalsh((m + m.conj().T) / 2))) < -DENSITY_PSD_TOL:
            raise InvalidDensityOperator("density matrix has an eigenvalue below -1e-12")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class ConfigurationBasis:
    """Ordered occupation-vector basis of the n-particle space."""

    nb: int
    n: int
    statistics: Statistics
    states: tuple[tuple[int, ...], ...]

    @property
    def dim(self) -> int:
        return len(self.states)

    @cached_property
    def tag(self) -> str:
        return f"{self.statistics.value}:nb={self.nb}:n={self.n}"

    @cached_property
    def index(self) -> dict[tuple[int, ...], int]:
        return {state: k for k, state in enumerate(self.states)}

    @cached_property
    def occupations(self) -> np.ndarray:
        """(dim, nb) float array of the occupation vectors, basis order."""
        return np.array(self.states, dtype=float)

    @cached_property
    def hop_terms(self) -> list[list[tuple[np.ndarray, np.ndarray, np.ndarray]]]:
        """Sparse triples (rows, cols, amps) of a+_i a_j for every (i, j)."""
        table = []
        for i in range(self.nb):
            row_i = []
            for j in range(self.nb):
                rows, cols, amps = [], [], []
                for col, state in enumerate(self.states):
                    hop = _apply_hop(state, i, j, self.statistics)
                    if hop is None:
                        continue
                    target, amp = hop
                    rows.append(self.index[target])
                    cols.append(col)
                    amps.append(amp)
                row_i.append(
                    (
                        np.array(rows, dtype=np.intp),
                        np.array(cols, dtype=np.intp),
                        np.array(amps, dtype=float),
                    )
                )
            table.append(row_i)
        return table


def _annihilate(state: tuple[int, ...], k: int, statistics: Statistics):
    """Apply a_k; returns (new state, amplitude) or None if annihilated."""
    occ = state[k]
    if occ == 0:
        return None
    s = list(state)
    if statistics is Statistics.FERMION:
        sign = -1.0 if sum(state[:k]) % 2 else 1.0
        s[k] = 0
        return tuple(s), sign
    s[k] = occ - 1
    return tuple(s), sqrt(occ)


def _create(state: tuple[int, ...], k: int, statistics: Statistics):
    """Apply a+_k; returns (new state, amplitude) or None if annihilated."""
    s = list(state)
    if statistics is Statistics.FERMION:
        if state[k]:
            return None
        sign = -1.0 if sum(state[:k]) % 2 else 1.0
        s[k] = 1
        return tuple(s), sign
    s[k] = state[k] + 1
    return tuple(s), sqrt(state[k] + 1)


def _apply_hop(state: tuple[int, ...], i: int, j: int, statistics: Statistics):
    """Amplitude and target of a+_i a_j on a configuration, or None."""
    if i == j:
        # number operator: exact integer amplitude, no sqrt round-off
        return (state, float(state[j])) if state[j] else None
    down = _annihilate(state, j, statistics)
    if down is None:
        return None
    up = _create(down[0], i, statistics)
    if up is None:
        return None
    return up[0], down[1] * up[1]


def _boson_states(nb: int, n: int) -> list[tuple[int, ...]]:
    if nb == 1:
        return [(n,)]
    out = []
    for k in range(n, -1, -1):
        out.extend((k,) + rest for rest in _boson_states(nb - 1, n - k))
    return out


def build_basis(nb: int, n: int, statistics: Statistics) -> ConfigurationBasis:
    """Enumerate all configurations of n particles in nb orbitals.

    Fermions require nb > n (otherwise the lattice of occupations collapses
    onto a single point or is empty).  The returned states are in descending
    lexicographic order.
    """
    if nb < 1 or n < 1:
        raise InvalidArguments(f"need nb >= 1 and n >= 1, got nb={nb}, n={n}")
    if statistics is Statistics.FERMION:
        if nb <= n:
            raise InvalidArguments(f"fermions need nb > n, got nb={nb}, n={n}")
        states = []
        for occ in itertools.combinations(range(nb), n):
            vec = [0] * nb
            for p in occ:
                vec[p] = 1
            states.append(tuple(vec))
        expected = comb(nb, n)
    else:
        states = _boson_states(nb, n)
        expected = comb(nb + n - 1, n)
    assert len(states) == expected
    assert all(states[k] > states[k + 1] for k in range(len(states) - 1))
    return ConfigurationBasis(nb=nb, n=n, statistics=statistics, states=tuple(states))


def lift_one_body(h, basis: ConfigurationBasis) -> ManyBodyOperator:
    """Lift sum_ij h_ij a+_i a_j onto the configuration basis."""
    m = _as_square(h, basis.nb)
    if _hermiticity_defect(m) > ONE_BODY_HERMITICITY_TOL:
        raise NonHermitianInput("one-body matrix is not Hermitian within 1e-13")
    out = np.zeros((basis.dim, basis.dim), dtype=complex)
    for i in range(basis.nb):
        for j in range(basis.nb):
            hij = m[i, j]
            if hij == 0:
                continue
            rows, cols, amps = basis.hop_terms[i][j]
            np.add.at(out, (rows, cols), hij * amps)
    return _hermitized(out, basis.tag)


def lift_two_body(w, basis: ConfigurationBasis) -> ManyBodyOperator:
    """Lift (1/2) sum_ijkl w_ijkl a+_i a+_j a_l a_k onto the basis.

    The annihilators act first (a_k, then a_l), then the creators
    (a+_j, then a+_i), each carrying the convention of this module.
    """
    op = w if isinstance(w, TwoBodyOperator) else TwoBodyOperator(np.asarray(w, dtype=complex))
    if op.nb != basis.nb:
        raise DimensionMismatch(f"tensor is for {op.nb} orbitals, basis has {basis.nb}")
    out = np.zeros((basis.dim, basis.dim), dtype=complex)
    if basis.n == 1:
        return ManyBodyOperator(out, basis.tag)
    tensor = op.tensor
    stats = basis.statistics
    for col, state in enumerate(basis.states):
        for k in range(basis.nb):
            first = _annihilate(state, k, stats)
            if first is None:
                continue
            s1, a1 = first
            for l in range(basis.nb):
                second = _annihilate(s1, l, stats)
                if second is None:
                    continue
                s2, a2 = second
                for j in range(basis.nb):
                    third = _create(s2, j, stats)
                    if third is None:
                        continue
                    s3, a3 = third
                    for i in range(basis.nb):
                        if tensor[i, j, k, l] == 0:
                            continue
                        fourth = _create(s3, i, stats)
                        if fourth is None:
                            continue
                        s4, a4 = fourth
                        out[basis.index[s4], col] += 0.5 * tensor[i, j, k, l] * a1 * a2 * a3 * a4
    return _hermitized(out, basis.tag)


def _hermitized(m: np.ndarray, tag: str) -> ManyBodyOperator:
    defect = _hermiticity_defect(m) / 2
    if defect >= LIFTED_HERMITICITY_TOL:
        raise NonHermitianInput(f"lifted operator hermiticity defect {defect:.3e} exceeds 1e-12")
    return ManyBodyOperator((m + m.conj().T) / 2, tag)


def slater_state(orbitals, basis: ConfigurationBasis) -> DensityOperator:
    """Projector onto a single configuration.

    Fermions accept either an index set of n distinct orbitals or a 0/1
    occupation vector of length nb; bosons take an occupation vector
    summing to n.
    """
    spec = tuple(int(x) for x in sorted(orbitals)) if isinstance(orbitals, (set, frozenset)) else tuple(int(x) for x in orbitals)
    state = None
    if len(spec) == basis.nb and all(x >= 0 for x in spec) and sum(spec) == basis.n:
        state = spec
    elif basis.statistics is Statistics.FERMION and len(spec) == basis.n:
        if len(set(spec)) != basis.n or not all(0 <= p < basis.nb for p in spec):
            raise InvalidConfiguration(f"index set {spec!r} is not n distinct orbitals below nb")
        vec = [0] * basis.nb
        for p in spec:
            vec[p] = 1
        state = tuple(vec)
    if state is None or state not in basis.index:
        raise InvalidConfiguration(f"{spec!r} does not describe a configuration of {basis.tag}")
    rho = np.zeros((basis.dim, basis.dim), dtype=complex)
    k = basis.index[state]
    rho[k, k] = 1.0
    return DensityOperator(rho, basis.tag)
