"""Seeded numerical certification of the structural theorems.

Each check runs randomized trials against one model system and reports
signed margins: positive means the claimed inequality held with room to
spare.  Strict claims fail at margin <= 0; claims carrying an explicit
tolerance fail below it.  Identical config plus seed reproduces the
identical report.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .ensemble import (
    DensityOperator,
    EnsembleParams,
    OneRdm,
    entropy,
    gibbs_state,
    helmholtz,
    natural_spectrum,
    one_rdm,
)
from .errors import ConfigError, RdmftError
from .fock import ManyBodyOperator, Statistics, lift_one_body
from .functional import (
    InversionOptions,
    InversionVerdict,
    PotentialBasis,
    System,
    invert_potential,
    omega_of_v,
    potential_basis,
    universal_functional,
)
from .models import ModelSpec, build_system
from .representability import (
    _haar_unitary,
    coleman_bosonic,
    coleman_fermionic,
    random_rdm,
)

ALL_CHECKS = (
    "omega_concavity",
    "injectivity",
    "entropy_concavity",
    "f_convexity",
    "gradient",
    "coleman",
    "fractional_occupations",
    "gibbs_minimality",
)

# fixed stream tags so each check owns an independent substream per seed
_STREAM = {name: i + 1 for i, name in enumerate(ALL_CHECKS)}


@dataclass(frozen=True)
class CheckConfig:
    """One check campaign: a model system, a temperature, and knobs."""

    model: ModelSpec
    beta: float = 1.0
    seed: int = 0
    trials: int = 20
    v_scale: float = 1.0
    separation: float = 0.1
    midpoint: bool = False
    fd_step: float = 1e-4
    gradient_tol: float = 1e-5
    convexity_slack: float = 1e-8
    coleman_tol: float = 1e-10
    injectivity_floor: float = 1e-10
    fractional_floor: float = 1e-12
    fractional_betas: tuple[float, ...] = (0.1, 1.0, 10.0)
    fractional_v_scale: float = 0.3

    def describe(self) -> dict:
        m = self.model
        return {
            "nb": m.nb,
            "n": m.n,
            "statistics": m.statistics.value,
            "beta": self.beta,
            "seed": self.seed,
            "model": {
                "kind": m.kind,
                "h_scale": m.h_scale,
                "w_norm": m.w_norm,
                "u": m.u,
                "t_hop": m.t_hop,
                "seed": m.seed,
            },
        }


@dataclass(frozen=True)
class TheoremReport:
    """Outcome of one check: trial count, failures, worst signed margin."""

    theorem_id: str
    trials: int
    failures: int
    worst_margin: float | None
    config: dict
    details: tuple[dict, ...]
    notes: str = ""

    @property
    def passed(self) -> bool:
        return self.failures == 0


def _rng(config: CheckConfig, check: str) -> np.random.Generator:
    return np.random.default_rng([_STREAM[check], config.seed])


def _coeff_draw(rng: np.random.Generator, pbasis: PotentialBasis, norm: float) -> np.ndarray:
    c = rng.normal(size=pbasis.size)
    length = np.linalg.norm(c)
    return c * (norm / length) if length > 0 else c


def _separated_coeff_pair(rng, pbasis, norm, separation):
    for _ in range(1000):
        c1 = _coeff_draw(rng, pbasis, norm)
        c2 = _coeff_draw(rng, pbasis, norm)
        if np.linalg.norm(c1 - c2) >= separation:
            return c1, c2
    raise RdmftError(f"could not draw potentials separated by {separation}")


def _mix_parameter(rng: np.random.Generator, config: CheckConfig) -> float:
    return 0.5 if config.midpoint else float(rng.uniform(0.1, 0.9))


def _report(theorem_id, config, records, margins, failures, notes="") -> TheoremReport:
    worst = float(min(margins)) if margins else None
    return TheoremReport(
        theorem_id=theorem_id,
        trials=len(records),
        failures=failures,
        worst_margin=worst,
        config=config.describe(),
        details=tuple(records),
        notes=notes,
    )


def check_omega_concavity(config: CheckConfig) -> TheoremReport:
    """Strict concavity of the potential-to-free-energy map on chords with
    a minimum endpoint separation."""
    system = build_system(config.model)
    params = EnsembleParams(config.beta)
    pbasis = potential_basis(config.model.nb)
    rng = _rng(config, "omega_concavity")
    records, margins, failures = [], [], 0
    for k in range(config.trials):
        c1, c2 = _separated_coeff_pair(rng, pbasis, config.v_scale, config.separation)
        t = _mix_parameter(rng, config)
        omega_1, _ = omega_of_v(pbasis.potential(c1), system, params)
        omega_2, _ = omega_of_v(pbasis.potential(c2), system, params)
        omega_mix, _ = omega_of_v(pbasis.potential(t * c1 + (1 - t) * c2), system, params)
        margin = omega_mix - t * omega_1 - (1 - t) * omega_2
        if margin <= 0:
            failures += 1
        margins.append(margin)
        records.append({"trial": k, "t": t, "margin": float(margin)})
    return _report("omega_concavity", config, records, margins, failures)


def check_injectivity(config: CheckConfig) -> TheoremReport:
    """Distinct potentials produce distinct Gibbs 1RDMs."""
    system = build_system(config.model)
    params = EnsembleParams(config.beta)
    pbasis = potential_basis(config.model.nb)
    rng = _rng(config, "injectivity")
    records, margins, failures = [], [], 0
    for k in range(config.trials):
        c1, c2 = _separated_coeff_pair(rng, pbasis, config.v_scale, config.separation)
        _, gamma_1 = omega_of_v(pbasis.potential(c1), system, params)
        _, gamma_2 = omega_of_v(pbasis.potential(c2), system, params)
        distance = float(np.linalg.norm(gamma_1.matrix - gamma_2.matrix))
        margin = distance - config.injectivity_floor
        if margin <= 0:
            failures += 1
        margins.append(margin)
        records.append({"trial": k, "rdm_distance": distance, "margin": float(margin)})
    return _report("injectivity", config, records, margins, failures)


def _random_density(rng: np.random.Generator, dim: int, tag: str) -> DensityOperator:
    w = rng.dirichlet(np.ones(dim))
    q = _haar_unitary(rng, dim)
    m = (q * w) @ q.conj().T
    return DensityOperator((m + m.conj().T) / 2, tag)


def check_entropy_concavity(config: CheckConfig) -> TheoremReport:
    """Strict concavity of the von Neumann entropy on separated pairs of
    random full-rank density operators."""
    basis = build_system(config.model).basis
    dim = len(basis.states)
    rng = _rng(config, "entropy_concavity")
    records, margins, failures = [], [], 0
    for k in range(config.trials):
        rho_1 = rho_2 = None
        for _ in range(1000):
            rho_1 = _random_density(rng, dim, basis.tag)
            rho_2 = _random_density(rng, dim, basis.tag)
            if np.linalg.norm(rho_1.matrix - rho_2.matrix) >= config.separation:
                break
        t = _mix_parameter(rng, config)
        mixed = DensityOperator(t * rho_1.matrix + (1 - t) * rho_2.matrix, basis.tag)
        margin = entropy(mixed) - t * entropy(rho_1) - (1 - t) * entropy(rho_2)
        if margin <= 0:
            failures += 1
        margins.append(margin)
        records.append({"trial": k, "t": t, "margin": float(margin)})
    return _report("entropy_concavity", config, records, margins, failures)


def check_f_convexity(config: CheckConfig) -> TheoremReport:
    """Convexity of the universal functional along random interior
    segments, with slack for the two inversion tolerances."""
    m = config.model
    system = build_system(m)
    params = EnsembleParams(config.beta)
    rng = _rng(config, "f_convexity")
    records, margins, failures = [], [], 0
    for k in range(config.trials):
        gamma_0 = random_rdm(m.nb, m.n, m.statistics, interior=True, seed=rng)
        gamma_1 = random_rdm(m.nb, m.n, m.statistics, interior=True, seed=rng)
        t = _mix_parameter(rng, config)
        mixed = OneRdm(t * gamma_0.matrix + (1 - t) * gamma_1.matrix)
        try:
            f_0, _ = universal_functional(gamma_0, system, params)
            f_1, _ = universal_functional(gamma_1, system, params)
            f_mix, _ = universal_functional(mixed, system, params)
        except RdmftError as exc:
            failures += 1
            records.append({"trial": k, "t": t, "margin": None, "error": str(exc)})
            continue
        margin = t * f_0 + (1 - t) * f_1 - f_mix
        if margin < -config.convexity_slack:
            failures += 1
        margins.append(margin)
        records.append({"trial": k, "t": t, "margin": float(margin)})
    return _report("f_convexity", config, records, margins, failures)


def check_gradient(config: CheckConfig) -> TheoremReport:
    """Central differences of the functional along orthonormal traceless
    directions against the recovered potential."""
    m = config.model
    system = build_system(m)
    params = EnsembleParams(config.beta)
    pbasis = potential_basis(m.nb)
    rng = _rng(config, "gradient")
    eps = config.fd_step
    records, margins, failures = [], [], 0
    for k in range(config.trials):
        gamma = random_rdm(m.nb, m.n, m.statistics, interior=True, seed=rng)
        report = invert_potential(gamma, system, params)
        if report.verdict is not InversionVerdict.CONVERGED:
            failures += 1
            records.append({"trial": k, "margin": None, "error": f"inversion {report.verdict.value}"})
            continue
        cv = pbasis.coefficients(report.v_star)
        warm = InversionOptions(initial=cv)
        directions = np.linalg.qr(rng.normal(size=(pbasis.size, 5)))[0].T
        worst_dev = 0.0
        bad = None
        for d in directions:
            shift = eps * pbasis.assemble(d)
            try:
                f_plus, _ = universal_functional(OneRdm(gamma.matrix + shift), system, params, warm)
                f_minus, _ = universal_functional(OneRdm(gamma.matrix - shift), system, params, warm)
            except RdmftError as exc:
                bad = str(exc)
                break
            fd = (f_plus - f_minus) / (2 * eps)
            exact = -float(np.dot(cv, d))
            worst_dev = max(worst_dev, abs(fd - exact) / max(1.0, float(np.linalg.norm(cv))))
        if bad is not None:
            failures += 1
            records.append({"trial": k, "margin": None, "error": bad})
            continue
        margin = config.gradient_tol - worst_dev
        if margin < 0:
            failures += 1
        margins.append(margin)
        records.append({"trial": k, "max_rel_dev": float(worst_dev), "margin": float(margin)})
    notes = "a well-defined derivative also certifies that the subgradient set is a single element"
    return _report("gradient", config, records, margins, failures, notes=notes)


def _boundary_occupations(rng, nb, n, statistics, variant):
    if variant == "zero_pinned":
        if statistics is Statistics.FERMION and nb - 1 == n:
            rest = np.ones(nb - 1)
        else:
            for _ in range(1000):
                rest = rng.dirichlet(np.ones(nb - 1)) * n
                if statistics is Statistics.BOSON or rest.max() < 1:
                    break
            else:
                rest = np.ones(nb - 1) * (n / (nb - 1))
        occ = np.concatenate([[0.0], rest])
    elif variant == "one_pinned":
        if n == 1:
            rest = np.zeros(nb - 1)
        else:
            for _ in range(1000):
                rest = rng.dirichlet(np.ones(nb - 1)) * (n - 1)
                if rest.max() < 1:
                    break
            else:
                rest = np.ones(nb - 1) * ((n - 1) / (nb - 1))
        occ = np.concatenate([[1.0], rest])
    elif variant == "idempotent":
        occ = np.zeros(nb)
        occ[rng.permutation(nb)[:n]] = 1.0
    else:  # condensate
        occ = np.zeros(nb)
        occ[rng.integers(nb)] = float(n)
    return occ[rng.permutation(nb)]


def check_coleman(config: CheckConfig) -> TheoremReport:
    """Reconstruction of interior and boundary 1RDMs by explicit density
    operators; every output must be a valid state with the right 1RDM."""
    m = config.model
    basis = build_system(m).basis
    construct = coleman_fermionic if m.statistics is Statistics.FERMION else coleman_bosonic
    if m.statistics is Statistics.FERMION:
        variants = ("interior", "zero_pinned", "one_pinned", "idempotent")
    else:
        variants = ("interior", "zero_pinned", "condensate")
    rng = _rng(config, "coleman")
    records, margins, failures = [], [], 0
    for k in range(config.trials):
        variant = variants[k % len(variants)]
        if variant == "interior":
            gamma = random_rdm(m.nb, m.n, m.statistics, interior=True, seed=rng)
        else:
            occ = _boundary_occupations(rng, m.nb, m.n, m.statistics, variant)
            q = _haar_unitary(rng, m.nb)
            g = (q * occ) @ q.conj().T
            gamma = OneRdm((g + g.conj().T) / 2)
        try:
            rho = construct(gamma, basis)
            err = float(np.linalg.norm(one_rdm(rho, basis).matrix - gamma.matrix))
        except RdmftError as exc:
            failures += 1
            records.append({"trial": k, "variant": variant, "margin": None, "error": str(exc)})
            continue
        margin = config.coleman_tol - err
        if margin < 0:
            failures += 1
        margins.append(margin)
        records.append({"trial": k, "variant": variant, "error_norm": err, "margin": float(margin)})
    return _report("coleman", config, records, margins, failures)


def check_fractional_occupations(config: CheckConfig) -> TheoremReport:
    """Gibbs 1RDMs keep every natural occupation strictly off the polytope
    faces across a temperature sweep."""
    m = config.model
    system = build_system(m)
    pbasis = potential_basis(m.nb)
    rng = _rng(config, "fractional_occupations")
    records, margins, failures = [], [], 0
    for k in range(config.trials):
        beta = config.fractional_betas[k % len(config.fractional_betas)]
        v = pbasis.potential(_coeff_draw(rng, pbasis, config.fractional_v_scale))
        _, gamma = omega_of_v(v, system, EnsembleParams(beta))
        occ = natural_spectrum(gamma).occupations
        lowest = float(occ.min())
        head = float(1 - occ.max()) if m.statistics is Statistics.FERMION else np.inf
        margin = min(lowest, head) - config.fractional_floor
        if margin <= 0:
            failures += 1
        margins.append(margin)
        records.append(
            {"trial": k, "beta": beta, "min_occupation": lowest, "margin": float(margin)}
        )
    return _report("fractional_occupations", config, records, margins, failures)


def check_gibbs_minimality(config: CheckConfig) -> TheoremReport:
    """The Gibbs state strictly beats every competitor density operator in
    the free-energy objective of its own Hamiltonian."""
    m = config.model
    system = build_system(m)
    params = EnsembleParams(config.beta)
    pbasis = potential_basis(m.nb)
    basis = system.basis
    dim = len(basis.states)
    rng = _rng(config, "gibbs_minimality")
    records, margins, failures = [], [], 0
    for k in range(config.trials):
        v = pbasis.potential(_coeff_draw(rng, pbasis, config.v_scale))
        h_v = ManyBodyOperator(system.h0.matrix + lift_one_body(v.matrix, basis).matrix, basis.tag)
        gibbs = gibbs_state(h_v, params)
        base = helmholtz(gibbs.rho, h_v, params)
        psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
        psi /= np.linalg.norm(psi)
        competitors = {
            "mixed_1pct": DensityOperator(
                0.99 * gibbs.rho.matrix + 0.01 * np.outer(psi, psi.conj()), basis.tag
            ),
            "maximally_mixed": DensityOperator(np.eye(dim) / dim, basis.tag),
            "random_state": _random_density(rng, dim, basis.tag),
        }
        gaps = {name: helmholtz(rho, h_v, params) - base for name, rho in competitors.items()}
        margin = min(gaps.values())
        if margin <= 0:
            failures += 1
        margins.append(margin)
        records.append({"trial": k, "margin": float(margin), **{f"gap_{n}": float(g) for n, g in gaps.items()}})
    return _report("gibbs_minimality", config, records, margins, failures)


CHECK_REGISTRY = {
    "omega_concavity": check_omega_concavity,
    "injectivity": check_injectivity,
    "entropy_concavity": check_entropy_concavity,
    "f_convexity": check_f_convexity,
    "gradient": check_gradient,
    "coleman": check_coleman,
    "fractional_occupations": check_fractional_occupations,
    "gibbs_minimality": check_gibbs_minimality,
}

DEFAULT_SYSTEMS = (
    (3, 2, Statistics.FERMION),
    (4, 2, Statistics.FERMION),
    (4, 3, Statistics.FERMION),
    (3, 2, Statistics.BOSON),
    (2, 3, Statistics.BOSON),
)
DEFAULT_BETAS = (0.5, 1.0, 5.0)
DEFAULT_MODELS = (
    ("zero", {}),
    ("random_full", {"seed": 11, "h_scale": 1.0, "w_norm": 1.0}),
    # t/U = 1/8: keeps the one-body gap under ~2.7 so occupations at
    # beta = 10 stay clear of the 1e-12 fractional floor
    ("hubbard_ring", {"u": 4.0, "t_hop": 0.5}),
)


@dataclass(frozen=True)
class SuiteConfig:
    """A grid of systems, temperatures, and models crossed with checks."""

    checks: tuple[str, ...] = ALL_CHECKS
    systems: tuple[tuple[int, int, Statistics], ...] = DEFAULT_SYSTEMS
    betas: tuple[float, ...] = DEFAULT_BETAS
    models: tuple[tuple[str, dict], ...] = DEFAULT_MODELS
    seed: int = 2026
    trials: int = 20
    overrides: dict = field(default_factory=dict)


def run_suite(config: SuiteConfig) -> list[TheoremReport]:
    """All selected checks over the whole grid, in deterministic order."""
    if not config.checks:
        raise ConfigError("no checks selected")
    unknown = [c for c in config.checks if c not in CHECK_REGISTRY]
    if unknown:
        raise ConfigError(f"unknown checks: {unknown}; available: {sorted(CHECK_REGISTRY)}")
    reports = []
    combo = 0
    for nb, n, statistics in config.systems:
        for beta in config.betas:
            for kind, raw_params in config.models:
                combo += 1
                combo_seed = int(np.random.SeedSequence((config.seed, combo)).generate_state(1)[0])
                mparams = dict(raw_params)
                model_seed = mparams.pop("seed", combo_seed)
                model = ModelSpec(
                    kind=kind, nb=nb, n=n, statistics=statistics, seed=model_seed, **mparams
                )
                for name in config.checks:
                    check_config = CheckConfig(
                        model=model,
                        beta=beta,
                        seed=combo_seed,
                        trials=config.trials,
                        **config.overrides,
                    )
                    reports.append(CHECK_REGISTRY[name](check_config))
    return reports


def suite_failures(reports: list[TheoremReport]) -> int:
    return sum(report.failures for report in reports)
