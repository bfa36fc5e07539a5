"""Dual evaluation of the universal 1RDM functional at fixed temperature.

The functional is evaluated through its concave dual: F[gamma] =
max_v (Omega[v] - tr{v gamma}) over traceless Hermitian one-body
potentials v.  The maximizer, when it exists, satisfies gamma_v = gamma
and -v* is the derivative of F at gamma.  Potentials are parametrized by
an orthonormal traceless Hermitian basis, so the maximization runs in
R^(nb^2 - 1) where the objective's Hessian is the (negative definite)
linear-response matrix and damped Newton steps converge quadratically.

Targets at or beyond the boundary of the representable set admit no
maximizer; the solver detects this through a potential-norm cap combined
with residual stagnation and reports NonRepresentable instead of a value.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from math import log, sqrt

import numpy as np

from .ensemble import (
    CLASSIFY_DEFAULT_TOL,
    EnsembleParams,
    OneRdm,
    RdmClass,
    classify_rdm,
)
from .errors import (
    BasisMismatch,
    ConvergenceFailure,
    DimensionMismatch,
    InvalidArguments,
    NonHermitianInput,
    NotRepresentableError,
)
from .fock import (
    ConfigurationBasis,
    ManyBodyOperator,
    _hermiticity_defect,
    lift_one_body,
)

TRACE_TOL = 1e-12
DEGENERACY_REL_TOL = 1e-9
ARMIJO_SLOPE = 1e-4
BACKTRACK_FACTOR = 0.5
MIN_STEP = 1e-14


@dataclass(frozen=True, eq=False)
class TracelessPotential:
    """Hermitian one-body potential with vanishing trace.

    The gauge freedom v -> v + c*1 is fixed by rejecting any nonzero
    trace at construction instead of silently projecting it away.
    """

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(getattr(self.matrix, "matrix", self.matrix), dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionMismatch(f"expected a square matrix, got shape {m.shape}")
        if _hermiticity_defect(m) > 1e-13:
            raise NonHermitianInput("potential is not Hermitian within 1e-13")
        # relative to scale: a large potential cannot express an exactly
        # zero trace below the ulp of its own diagonal entries
        if abs(complex(np.trace(m))) > TRACE_TOL * max(1.0, float(np.linalg.norm(m))):
            raise InvalidArguments(f"potential trace {np.trace(m)!r} exceeds 1e-12; remove the gauge part")
        object.__setattr__(self, "matrix", m)

    @property
    def nb(self) -> int:
        return self.matrix.shape[0]

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.matrix))


@dataclass(frozen=True, eq=False)
class PotentialBasis:
    """Orthonormal Hermitian traceless basis of the potential space.

    elements has shape (nb*nb - 1, nb, nb) with tr{G_a G_b} = delta_ab,
    so coefficient vectors carry the Frobenius geometry exactly.
    """

    nb: int
    elements: np.ndarray

    @property
    def size(self) -> int:
        return self.elements.shape[0]

    def coefficients(self, matrix) -> np.ndarray:
        m = np.asarray(getattr(matrix, "matrix", matrix), dtype=complex)
        return np.einsum("aij,ji->a", self.elements, m).real

    def assemble(self, coeffs: np.ndarray) -> np.ndarray:
        return np.tensordot(np.asarray(coeffs, dtype=float), self.elements, axes=1)

    def potential(self, coeffs: np.ndarray) -> TracelessPotential:
        m = self.assemble(coeffs)
        # scrub the summation round-off so construction never trips on it
        m -= (np.trace(m) / self.nb) * np.eye(self.nb)
        return TracelessPotential(m)


def potential_basis(nb: int) -> PotentialBasis:
    """Generalized Gell-Mann construction: symmetric and antisymmetric pair
    matrices plus the diagonal ladder, all orthonormal and traceless."""
    if nb < 2:
        raise InvalidArguments(f"potential space needs nb >= 2, got nb={nb}")
    mats = []
    for i in range(nb):
        for j in range(i + 1, nb):
            g = np.zeros((nb, nb), dtype=complex)
            g[i, j] = g[j, i] = 1 / sqrt(2)
            mats.append(g)
            g = np.zeros((nb, nb), dtype=complex)
            g[i, j] = -1j / sqrt(2)
            g[j, i] = 1j / sqrt(2)
            mats.append(g)
    for l in range(1, nb):
        g = np.zeros((nb, nb), dtype=complex)
        g[np.arange(l), np.arange(l)] = 1.0
        g[l, l] = -l
        mats.append(g / sqrt(l * (l + 1)))
    return PotentialBasis(nb=nb, elements=np.array(mats))


@dataclass(frozen=True, eq=False)
class System:
    """A configuration basis together with the lifted interaction part H0."""

    basis: ConfigurationBasis
    h0: ManyBodyOperator

    def __post_init__(self):
        if self.h0.basis_tag != self.basis.tag:
            raise BasisMismatch(f"H0 on {self.h0.basis_tag!r}, basis is {self.basis.tag!r}")


class InversionVerdict(Enum):
    CONVERGED = "converged"
    NON_REPRESENTABLE = "non_representable"
    MAX_ITERATIONS = "max_iterations"


@dataclass(frozen=True)
class InversionOptions:
    """Knobs of the dual Newton solver.

    norm_cap defaults to 1e6/beta when left as None.  initial optionally
    seeds the potential coefficients (zeros by default).
    """

    tol: float = 1e-10
    max_iter: int = 200
    norm_cap: float | None = None
    stagnation_window: int = 10
    stagnation_rtol: float = 1e-2
    classify_tol: float = CLASSIFY_DEFAULT_TOL
    initial: np.ndarray | None = None


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    g_value: float
    residual: float
    step_norm: float


@dataclass(frozen=True, eq=False)
class InversionReport:
    """Outcome of one dual maximization."""

    verdict: InversionVerdict
    v_star: TracelessPotential
    f_value: float
    gradient: TracelessPotential
    residual: float
    iterations: int
    classification: RdmClass
    trace: tuple[IterationRecord, ...]


@dataclass(frozen=True, eq=False)
class _Thermal:
    """Spectral data of one Gibbs state inside the Newton loop."""

    energies: np.ndarray
    vectors: np.ndarray
    weights: np.ndarray
    z_shifted: float
    omega: float
    rotated: np.ndarray
    gamma_coeffs: np.ndarray


def _lift_basis(pbasis: PotentialBasis, basis: ConfigurationBasis) -> np.ndarray:
    """Stack of the lifted potential-basis elements, shape (K, dim, dim)."""
    return np.array([lift_one_body(g, basis).matrix for g in pbasis.elements])


def _thermal(c: np.ndarray, system: System, params: EnsembleParams, lifted: np.ndarray) -> _Thermal:
    hv = system.h0.matrix + np.tensordot(c, lifted, axes=1)
    energies, vectors = np.linalg.eigh(hv)
    shifted = energies - energies[0]
    boltzmann = np.exp(-params.beta * shifted)
    z_shifted = float(np.sum(boltzmann))
    weights = boltzmann / z_shifted
    omega = float(energies[0]) - log(z_shifted) / params.beta
    # tr{gamma_v G_a} = Tr{rho lift(G_a)}, evaluated in the eigenbasis of H_v
    rotated = np.einsum("ma,kmn,nb->kab", vectors.conj(), lifted, vectors, optimize=True)
    gamma_coeffs = np.einsum("kmm,m->k", rotated, weights).real
    return _Thermal(
        energies=energies,
        vectors=vectors,
        weights=weights,
        z_shifted=z_shifted,
        omega=omega,
        rotated=rotated,
        gamma_coeffs=gamma_coeffs,
    )


def _gamma_matrix(coeffs: np.ndarray, pbasis: PotentialBasis, n: int) -> np.ndarray:
    """Reconstruct the 1RDM from its traceless coefficients plus the fixed
    trace part (n/nb) * identity."""
    return (n / pbasis.nb) * np.eye(pbasis.nb) + pbasis.assemble(coeffs)


def omega_of_v(v: TracelessPotential, system: System, params: EnsembleParams) -> tuple[float, OneRdm]:
    """Grand potential and Gibbs 1RDM of H0 + lift(v)."""
    if v.nb != system.basis.nb:
        raise DimensionMismatch(f"potential on {v.nb} orbitals, basis has {system.basis.nb}")
    pbasis = potential_basis(system.basis.nb)
    lifted = _lift_basis(pbasis, system.basis)
    state = _thermal(pbasis.coefficients(v), system, params, lifted)
    return state.omega, OneRdm(_gamma_matrix(state.gamma_coeffs, pbasis, system.basis.n))


def _divided_differences(shifted: np.ndarray, boltzmann: np.ndarray, beta: float) -> np.ndarray:
    """Matrix of (e^-bx - e^-by)/(x - y) on the shifted spectrum, with the
    confluent limit -beta*e^-bx applied below the degeneracy threshold."""
    x = shifted[:, None]
    y = shifted[None, :]
    diff = x - y
    scale = max(1.0, float(shifted[-1]))
    near = np.abs(diff) <= DEGENERACY_REL_TOL * scale
    safe = np.where(near, 1.0, diff)
    quotient = (boltzmann[:, None] - boltzmann[None, :]) / safe
    midpoint = -beta * np.exp(-beta * (x + y) / 2)
    return np.where(near, midpoint, quotient)


def _jacobian(state: _Thermal, params: EnsembleParams) -> np.ndarray:
    """Response matrix J_ab = d tr{gamma_v G_a} / d c_b; symmetric and
    negative definite on the traceless space."""
    shifted = state.energies - state.energies[0]
    boltzmann = state.weights * state.z_shifted
    phi = _divided_differences(shifted, boltzmann, params.beta) / state.z_shifted
    j = np.einsum("amn,bmn,mn->ab", state.rotated.conj(), state.rotated, phi, optimize=True).real
    j += params.beta * np.outer(state.gamma_coeffs, state.gamma_coeffs)
    return (j + j.T) / 2


def response_jacobian(
    v: TracelessPotential, system: System, params: EnsembleParams, pbasis: PotentialBasis | None = None
) -> np.ndarray:
    """Analytic derivative of the potential-to-1RDM map at v, in the
    coefficient coordinates of pbasis."""
    pb = pbasis if pbasis is not None else potential_basis(system.basis.nb)
    if pb.nb != system.basis.nb:
        raise DimensionMismatch(f"potential basis for {pb.nb} orbitals, system has {system.basis.nb}")
    lifted = _lift_basis(pb, system.basis)
    state = _thermal(pb.coefficients(v), system, params, lifted)
    return _jacobian(state, params)


def invert_potential(
    gamma: OneRdm,
    system: System,
    params: EnsembleParams,
    opts: InversionOptions = InversionOptions(),
) -> InversionReport:
    """Maximize g(v) = Omega[v] - tr{v gamma} by damped Newton ascent.

    Interior targets converge to the unique maximizer.  Boundary and
    outside targets have none: for them the iterates drift off to infinity
    while the residual bottoms out, which the norm cap and the stagnation
    window turn into a NonRepresentable verdict.  Convergence is only
    claimed for targets classified Interior, because a finite residual can
    dip below tolerance near the boundary even though no maximizer exists
    there.
    """
    target = gamma if isinstance(gamma, OneRdm) else OneRdm(np.asarray(gamma, dtype=complex))
    basis = system.basis
    if target.nb != basis.nb:
        raise DimensionMismatch(f"target on {target.nb} orbitals, basis has {basis.nb}")
    if abs(target.trace - basis.n) > 1e-10:
        raise InvalidArguments(f"target trace {target.trace} differs from n={basis.n} beyond 1e-10")
    classification = classify_rdm(target, basis.statistics, opts.classify_tol)
    interior = classification is RdmClass.INTERIOR

    pbasis = potential_basis(basis.nb)
    lifted = _lift_basis(pbasis, basis)
    target_coeffs = pbasis.coefficients(target.matrix)
    norm_cap = opts.norm_cap if opts.norm_cap is not None else 1e6 / params.beta

    if opts.initial is not None:
        c = np.array(opts.initial, dtype=float)
        if c.shape != (pbasis.size,):
            raise InvalidArguments(f"initial coefficients must have shape ({pbasis.size},)")
    else:
        c = np.zeros(pbasis.size)

    def dual_value(state: _Thermal, coeffs: np.ndarray) -> float:
        return state.omega - float(np.dot(coeffs, target_coeffs))

    state = _thermal(c, system, params, lifted)
    records: list[IterationRecord] = []
    best_residual = float("inf")
    stalled = 0
    verdict = InversionVerdict.MAX_ITERATIONS
    residual = float("inf")
    iterations = 0
    step_norm = 0.0

    for iteration in range(1, opts.max_iter + 1):
        iterations = iteration
        g_value = dual_value(state, c)
        grad = state.gamma_coeffs - target_coeffs
        # both 1RDMs carry trace n, so the coefficient-space norm equals
        # the Frobenius distance of the matrices
        residual = float(np.linalg.norm(grad))
        records.append(IterationRecord(iteration, g_value, residual, step_norm))

        if residual <= opts.tol and interior:
            verdict = InversionVerdict.CONVERGED
            break
        if float(np.linalg.norm(c)) > norm_cap:
            verdict = InversionVerdict.NON_REPRESENTABLE
            break
        if residual < best_residual * (1.0 - opts.stagnation_rtol):
            best_residual = residual
            stalled = 0
        else:
            stalled += 1
        if stalled >= opts.stagnation_window:
            verdict = InversionVerdict.NON_REPRESENTABLE if not interior else InversionVerdict.MAX_ITERATIONS
            break

        jac = _jacobian(state, params)
        try:
            step = np.linalg.solve(jac, -grad)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(jac, -grad, rcond=None)[0]
        slope = float(np.dot(grad, step))
        if not np.isfinite(slope) or slope <= 0.0:
            # Newton direction unusable (J numerically singular); fall back
            # to steepest ascent to keep the dual value monotone
            step = grad / max(params.beta, 1.0)
            slope = float(np.dot(grad, step))
            if slope <= 0.0:
                verdict = InversionVerdict.NON_REPRESENTABLE if not interior else InversionVerdict.MAX_ITERATIONS
                break

        g_scale = max(1.0, abs(g_value))
        t = 1.0
        accepted = None
        while t >= MIN_STEP:
            trial_c = c + t * step
            trial = _thermal(trial_c, system, params, lifted)
            required = ARMIJO_SLOPE * t * slope
            if dual_value(trial, trial_c) >= g_value + required:
                accepted = (trial_c, trial)
                break
            # once the required gain falls below float resolution of g the
            # Armijo test is meaningless; accept on residual contraction
            if required <= 1e-12 * g_scale:
                trial_residual = float(np.linalg.norm(trial.gamma_coeffs - target_coeffs))
                if trial_residual <= residual * (1.0 - ARMIJO_SLOPE * t):
                    accepted = (trial_c, trial)
                    break
            t *= BACKTRACK_FACTOR
        if accepted is None:
            # no admissible step left: the objective is flat at float
            # resolution, which near the boundary signals divergence
            verdict = InversionVerdict.NON_REPRESENTABLE if not interior else InversionVerdict.MAX_ITERATIONS
            break
        c, state = accepted
        step_norm = float(np.linalg.norm(t * step))
    else:
        verdict = InversionVerdict.MAX_ITERATIONS if interior else InversionVerdict.NON_REPRESENTABLE

    return InversionReport(
        verdict=verdict,
        v_star=pbasis.potential(c),
        f_value=dual_value(state, c),
        gradient=pbasis.potential(-c),
        residual=residual,
        iterations=iterations,
        classification=classification,
        trace=tuple(records),
    )


def universal_functional(
    gamma: OneRdm,
    system: System,
    params: EnsembleParams,
    opts: InversionOptions = InversionOptions(),
) -> tuple[float, TracelessPotential]:
    """Value and derivative of the universal functional at an interior 1RDM.

    Returns (F[gamma], dF/dgamma) where the derivative is -v* for the
    maximizing potential.  Raises NotRepresentableError off the interior
    and ConvergenceFailure if the solver gives up on a valid target.
    """
    report = invert_potential(gamma, system, params, opts)
    if report.verdict is InversionVerdict.NON_REPRESENTABLE:
        raise NotRepresentableError(
            f"target classified {report.classification.value}; the dual maximum is not attained"
        )
    if report.verdict is not InversionVerdict.CONVERGED:
        raise ConvergenceFailure(
            f"dual Newton stopped after {report.iterations} iterations at residual {report.residual:.3e}"
        )
    return report.f_value, report.gradient
