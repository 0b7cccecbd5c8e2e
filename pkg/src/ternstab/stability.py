"""Desk-scale stability experiments.

An experiment perturbs an exact j-mapping by a power-law term, extracts the
exact mapping back with the direct method and checks the distance bound
k / (2 (1 - k)) delta(...) at every grid point. The homomorphism variant does
the same for a pair (homomorphism, hom-derivation) and also checks that the
recovered pair keeps its algebraic structure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional

import numpy as np

from .algebra import AlgebraInstance
from .errors import InadmissibleError, PreconditionError
from .fixedpoint import (
    DEFAULT_NMAX,
    ControlFunction,
    ContractionEstimate,
    ExtractedMapping,
    HalvingOperator,
    contraction_constant_estimate,
    generalized_distance,
    stability_bound,
)
from .funceq import (
    DEFAULT_RHO,
    DefectReport,
    FunctionHandle,
    PowerPerturbation,
    check_j,
    check_rho,
    hom_residual,
    homder_residual,
    j_mapping_defect,
    residual_sup,
)
from .sampling import SampleGrid

BASE_TOL = 1e-12

PASS, FAIL, INADMISSIBLE = "PASS", "FAIL", "INADMISSIBLE"


@dataclass(frozen=True)
class Tolerances:
    convergence: float = 1e-12
    bound_slack: float = 1e-9
    defect: float = 1e-9

    def to_dict(self):
        return {"convergence": self.convergence, "bound_slack": self.bound_slack, "defect": self.defect}


@dataclass
class ExperimentSpec:
    algebra: AlgebraInstance
    j: int
    base: FunctionHandle
    perturbation: ControlFunction
    rho: complex = DEFAULT_RHO
    seed: int = 0
    grid: SampleGrid = field(default_factory=SampleGrid)
    tolerances: Tolerances = field(default_factory=Tolerances)
    n_max: int = DEFAULT_NMAX

    def __post_init__(self):
        self.j = check_j(self.j)
        self.rho = check_rho(self.rho)
        if self.base.algebra != self.algebra:
            raise ValueError("base handle lives on a different algebra")


@dataclass
class BoundCheck:
    label: str
    index: int
    point: np.ndarray
    norm: float
    lhs: float
    rhs: float
    passed: bool

    def to_dict(self):
        return {
            "label": self.label,
            "index": self.index,
            "point": [[c.real, c.imag] for c in self.point],
            "norm": self.norm,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "pass": self.passed,
        }


@dataclass
class StabilityReport:
    experiment: str
    algebra: str
    j: int
    verdict: str
    k: Optional[float] = None
    residual: Optional[DefectReport] = None
    extraction: Dict[str, list] = field(default_factory=dict)
    bound_checks: List[BoundCheck] = field(default_factory=list)
    recovered: Dict[str, DefectReport] = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)
    settings: dict = field(default_factory=dict)

    @property
    def residual_sup(self) -> Optional[float]:
        return None if self.residual is None else self.residual.max_defect

    @property
    def all_bounds_pass(self) -> bool:
        return all(b.passed for b in self.bound_checks)

    def to_dict(self) -> dict:
        return {
            "kind": "stability",
            "experiment": self.experiment,
            "algebra": self.algebra,
            "j": self.j,
            "verdict": self.verdict,
            "k": self.k,
            "residual": None if self.residual is None else self.residual.to_dict(),
            "extraction": {
                label: [{"index": i, "certificate": c.to_dict()} for i, c in certs]
                for label, certs in self.extraction.items()
            },
            "bound_checks": [b.to_dict() for b in self.bound_checks],
            "recovered": {k: v.to_dict() for k, v in self.recovered.items()},
            "diagnostics": self.diagnostics,
            "settings": self.settings,
        }

    def csv_rows(self):
        header = ["label", "index", "norm", "lhs", "rhs", "pass"]
        rows = [[b.label, b.index, b.norm, b.lhs, b.rhs, b.passed] for b in self.bound_checks]
        return header, rows


def inadmissible_report(experiment: str, algebra: str, j: int, reason: str) -> StabilityReport:
    return StabilityReport(experiment, algebra, j, INADMISSIBLE, diagnostics={"reason": reason})


def _direction_for(parity: str) -> str:
    return "even" if parity == "even" else "odd"


def make_perturbed_mapping(base: FunctionHandle, perturbation: ControlFunction, seed: int, j: int) -> FunctionHandle:
    """base(x) + s ||x||^r u(x), with u's parity matched to the base."""
    j = check_j(j)
    if perturbation.family != "power":
        raise InadmissibleError("perturbations must come from the power family")
    if perturbation.r <= j:
        raise InadmissibleError(
            f"exponent r = {perturbation.r} must exceed j = {j}: the halving iteration "
            "only contracts for r > j"
        )
    term = PowerPerturbation(perturbation.s, perturbation.r, _direction_for(base.parity), seed)
    return base.plus(term)


def _check_admissible(control: ControlFunction, j: int, grid, algebra, what: str):
    if control.family == "power" and control.s == 0:
        # nothing to sample; the analytic constant still decides admissibility
        k = control.k_analytic(j)
        est = ContractionEstimate(k, k, control.exponent(j), 0)
    else:
        est = contraction_constant_estimate(control, j, grid, algebra)
    if not est.admissible:
        raise InadmissibleError(
            f"{what} is not contractive under halving: estimated k = {est.k_hat:.6g} >= 1"
        )
    return est


def _require_exact(report: DefectReport, what: str, tol: float = BASE_TOL):
    if report.max_relative > tol:
        raise PreconditionError(
            f"{what}: defect {report.max_defect:.6g} at grid index {report.argmax_index}",
            witness=report.argmax_point,
            value=report.max_defect,
        )


def _bound_checks(label, f, h, k, delta, j, points, slack) -> List[BoundCheck]:
    A = f.algebra
    out = []
    for i, x in enumerate(points):
        lhs = A.norm(f(x) - h(x))
        rhs = stability_bound(k, delta.structured(A, x, j))
        ok = lhs <= rhs + slack * (1 + rhs)
        out.append(BoundCheck(label, i, x, A.norm(x), lhs, rhs, ok))
    return out


def _certificates(h: ExtractedMapping, points) -> list:
    return [(i, h.certificate(x)) for i, x in enumerate(points)]


def _base_match(h, base, grid, label) -> DefectReport:
    A = base.algebra
    rep = DefectReport(label, grid=grid.describe())
    for i, x in enumerate(grid.points(A)):
        bx = base(x)
        rep.record(i, (x,), A.norm(h(x) - bx), A.norm(bx))
    return rep


def _settings(spec: ExperimentSpec) -> dict:
    return {
        "algebra": spec.algebra.name,
        "j": spec.j,
        "rho": [spec.rho.real, spec.rho.imag],
        "base": spec.base.to_dict(),
        "perturbation": spec.perturbation.to_dict(),
        "seed": spec.seed,
        "grid": spec.grid.describe(),
        "tolerances": spec.tolerances.to_dict(),
        "n_max": spec.n_max,
    }


def _verdict(report: StabilityReport, extracted, tol: float) -> str:
    ok = report.all_bounds_pass
    ok = ok and all(r.max_relative <= tol for r in report.recovered.values())
    ok = ok and all(h.all_converged for h in extracted)
    return PASS if ok else FAIL


def run_theorem_2_5(spec: ExperimentSpec) -> StabilityReport:
    """Perturb an exact j-mapping, extract it back and check the distance bound."""
    A, j, tol = spec.algebra, spec.j, spec.tolerances
    delta = replace(spec.perturbation, role="delta")
    grid = spec.grid
    f = make_perturbed_mapping(spec.base, delta, spec.seed, j)
    est = _check_admissible(delta, j, grid, A, "perturbation control")
    _require_exact(j_mapping_defect(spec.base, j, grid), f"base is not a {j}-mapping")
    k = est.k_analytic

    report = StabilityReport("theorem25", A.name, j, FAIL, k=k, settings=_settings(spec))
    report.residual = residual_sup(f, j, spec.rho, grid, control=delta)

    h = ExtractedMapping(f, j, spec.n_max, tol.convergence, lipschitz=k)
    points = grid.points(A)
    report.extraction["h"] = _certificates(h, points)
    report.bound_checks = _bound_checks("f-h", f, h, k, delta, j, points, tol.bound_slack)
    report.recovered["j_mapping_defect"] = j_mapping_defect(h, j, grid)

    hypothesis = report.residual.max_ratio is not None and report.residual.max_ratio <= 1
    report.diagnostics = {
        "k_hat": est.k_hat,
        "k_analytic": est.k_analytic,
        "bound_factor": k / (2 * (1 - k)),
        "residual_ratio_max": report.residual.max_ratio,
        "residual_hypothesis_holds_on_grid": hypothesis,
        "distance_f_Qf": generalized_distance(f, HalvingOperator(f, j), j, delta, grid),
        "distance_f_h": generalized_distance(f, h, j, delta, grid),
        "max_extraction_steps": h.max_steps,
    }
    report.verdict = _verdict(report, [h], tol.defect)
    return report


def run_theorem_2_6(
    spec: ExperimentSpec,
    base_hom: FunctionHandle,
    base_der: FunctionHandle,
    sigma: ControlFunction,
    perturbation_der: Optional[ControlFunction] = None,
) -> StabilityReport:
    """Recover a ternary j-homomorphism H and a j-hom-derivation D.

    The homomorphism and derivation are perturbed independently (the
    derivation uses ``perturbation_der``, defaulting to the experiment's
    perturbation, and seed + 1). The common constant k is the largest of the
    analytic constants of both residual controls and of sigma.
    """
    A, j, tol, grid = spec.algebra, spec.j, spec.tolerances, spec.grid
    delta_f = replace(spec.perturbation, role="delta")
    delta_g = replace(perturbation_der or spec.perturbation, role="delta")
    sigma = replace(sigma, role="sigma")
    if sigma.family != "power":
        raise InadmissibleError("sigma must come from the power family")

    f = make_perturbed_mapping(base_hom, delta_f, spec.seed, j)
    g = make_perturbed_mapping(base_der, delta_g, (spec.seed + 1) % 2**64, j)
    est_f = _check_admissible(delta_f, j, grid, A, "homomorphism perturbation control")
    est_g = _check_admissible(delta_g, j, grid, A, "derivation perturbation control")
    est_s = _check_admissible(sigma, j, grid, A, "sigma")

    _require_exact(j_mapping_defect(base_hom, j, grid), f"base homomorphism is not a {j}-mapping")
    _require_exact(j_mapping_defect(base_der, j, grid), f"base derivation is not a {j}-mapping")
    _require_exact(hom_residual(base_hom, grid), "base homomorphism is not a ternary homomorphism")
    _require_exact(
        homder_residual(base_der, base_hom, j, grid), "base derivation is not a hom-derivation"
    )

    k = max(est_f.k_analytic, est_g.k_analytic, est_s.k_analytic)
    settings = _settings(spec)
    settings.update(
        base_hom=base_hom.to_dict(),
        base_der=base_der.to_dict(),
        sigma=sigma.to_dict(),
        perturbation_der=delta_g.to_dict(),
    )
    report = StabilityReport("theorem26", A.name, j, FAIL, k=k, settings=settings)

    H = ExtractedMapping(f, j, spec.n_max, tol.convergence, lipschitz=est_f.k_analytic)
    D = ExtractedMapping(g, j, spec.n_max, tol.convergence, lipschitz=est_g.k_analytic)
    points = grid.points(A)
    report.extraction["H"] = _certificates(H, points)
    report.extraction["D"] = _certificates(D, points)
    report.bound_checks = _bound_checks("f-H", f, H, k, delta_f, j, points, tol.bound_slack)
    report.bound_checks += _bound_checks("g-D", g, D, k, delta_g, j, points, tol.bound_slack)

    report.recovered = {
        "H_matches_base": _base_match(H, base_hom, grid, "H_matches_base"),
        "D_matches_base": _base_match(D, base_der, grid, "D_matches_base"),
        "H_j_mapping_defect": j_mapping_defect(H, j, grid),
        "D_j_mapping_defect": j_mapping_defect(D, j, grid),
        "hom_residual_H": hom_residual(H, grid),
        "homder_residual_D_H": homder_residual(D, H, j, grid),
    }
    report.residual = residual_sup(f, j, spec.rho, grid, control=delta_f)

    hom_f = hom_residual(f, grid)
    homder_g = homder_residual(g, f, j, grid)
    report.diagnostics = {
        "k_components": {
            "delta_f": est_f.k_analytic,
            "delta_g": est_g.k_analytic,
            "sigma": est_s.k_analytic,
        },
        "k_hat_sigma": est_s.k_hat,
        "bound_factor": k / (2 * (1 - k)),
        "hom_residual_f_max": hom_f.max_defect,
        "homder_residual_g_max": homder_g.max_defect,
        "max_extraction_steps": max(H.max_steps, D.max_steps),
    }
    report.verdict = _verdict(report, [H, D], tol.defect)
    return report


@dataclass
class CorollaryBound:
    constant: float
    k: float
    case_note: str

    def to_dict(self):
        return {"kind": "corollary", "constant": self.constant, "k": self.k, "case_note": self.case_note}


def corollary_bound(s: float, r: float, j: int) -> CorollaryBound:
    """Coefficient C with ||f_j(x) - H_j(x)|| <= C ||x||^r for power controls.

    Computed as stability_bound(2^{j-r}, 2 s); for j = 1 this is 2s / (2^r - 2).
    """
    j = check_j(j)
    if s < 0:
        raise ValueError("s must be nonnegative")
    if r == 1:
        raise InadmissibleError("r = 1 is excluded: the power control needs r != 1")
    if r <= j:
        raise InadmissibleError(
            f"r = {r} <= j = {j}: only the halving iteration (r > j) is implemented"
        )
    k = 2.0 ** (j - r)
    constant = stability_bound(k, 2 * s)
    notes = [
        "the printed case labels carry 2s/(2-2^r) for r>1, which is negative there; "
        "the positive constant 2s/(2^r-2) is used for r>1"
    ]
    if j == 2:
        notes.append(
            f"the printed choice k = 2^(1-r) = {2.0 ** (1 - r):.17g} does not satisfy the "
            f"halving condition for j = 2, which needs k >= 2^(2-r) = {k:.17g}; "
            "k = 2^(j-r) is used"
        )
    return CorollaryBound(constant, k, "; ".join(notes))
