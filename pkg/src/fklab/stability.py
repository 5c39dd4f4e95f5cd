"""Deficits, inequality margins, and sweep-level stability scans.

All deficits compare a star domain against the unit disk on matched
meshes: the domain mesh is the disk mesh of the same ring count pushed
radially onto the boundary, so the leading O(h^2) discretization bias
cancels in the difference.  Quantities are computed on a coarse/fine
pair of ring counts and Richardson-extrapolated with assumed order 2;
the energy route also solves one extra coarser level so an observed
convergence order can be attached to each data point.

Conventions (dimension is fixed to 2 for all meshed quantities):

* energy gap     :  E(Omega) - E(B_1), both volumes pi
* energy deficit :  D = E|Omega|^{-2} - E(B_1) pi^{-2}  (scale invariant)
* FK deficit     :  |Omega|^{2/q} lambda_q(Omega) - pi^{2/q} lambda_q(B_1)
* KJ slack       :  lambda_q (-E)^theta, domain minus disk
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import asymmetry, fem
from .circle import BoundaryProfile, h_half_norm_sq
from .domain import (StarDomain, ellipse, recenter_rescale, volume,
                     volume_corrected, volume_corrected_profile)

DIM = 2
SCALE_EXP = (DIM + 2) / DIM  # volume exponent of the energy normalization

DEFAULT_RINGS = 64
DEFAULT_RINGS_FINE = 128
RATIO_ASYMMETRY_FLOOR = 1e-3
ORDER_BAND = (1.6, 2.4)


# -- matched disk references (cached per process) ----------------------


class _DiskData:
    def __init__(self, rings: int):
        self.mesh = fem.disk_mesh(rings)
        self._energy: float | None = None
        self._eigen: float | None = None
        self._lq: dict[float, float] = {}

    def energy(self) -> float:
        if self._energy is None:
            u, _ = fem.solve_torsion(self.mesh)
            self._energy = fem.energy_of(u)
        return self._energy

    def eigenvalue(self) -> float:
        if self._eigen is None:
            self._eigen, _ = fem.principal_eigenvalue(self.mesh)
        return self._eigen

    def lambda_q(self, q: float) -> float:
        q = float(q)
        if q == 2.0:
            return self.eigenvalue()
        if q not in self._lq:
            self._lq[q] = fem.poincare_sobolev(self.mesh, q)
        return self._lq[q]


_DISK: dict[int, _DiskData] = {}


def disk_data(rings: int) -> _DiskData:
    if rings not in _DISK:
        _DISK[rings] = _DiskData(rings)
    return _DISK[rings]


def prepare_disk_references(levels, q_list=()) -> None:
    """Precompute disk solves so forked sweep workers inherit them."""
    for rings in levels:
        data = disk_data(rings)
        data.energy()
        data.eigenvalue()
        for q in q_list:
            data.lambda_q(q)


# -- extrapolation helpers ----------------------------------------------


def richardson(coarse: float, fine: float, order: float = 2.0) -> float:
    f = 2.0 ** order
    return (f * fine - coarse) / (f - 1.0)


def observed_order(v_coarse: float, v_mid: float, v_fine: float) -> float:
    num = v_coarse - v_mid
    den = v_mid - v_fine
    if den == 0.0 or num / den <= 0.0:
        return math.nan
    return math.log2(num / den)


def _domain_energy(d: StarDomain, rings: int) -> float:
    u, _ = fem.solve_torsion(fem.polar_mesh(d, rings))
    return fem.energy_of(u)


def _domain_lambda_q(d: StarDomain, q: float, rings: int) -> float:
    mesh = fem.polar_mesh(d, rings)
    if q == 2.0:
        lam, _ = fem.principal_eigenvalue(mesh)
        return lam
    return fem.poincare_sobolev(mesh, q)


# -- deficits -------------------------------------------------------------


def energy_gap(d: StarDomain, rings: int = DEFAULT_RINGS,
               rings_fine: int = DEFAULT_RINGS_FINE) -> float:
    """Extrapolated E(Omega) - E(B_1) on matched meshes (volumes must be pi)."""
    gaps = [_domain_energy(d, r) - disk_data(r).energy()
            for r in (rings, rings_fine)]
    return richardson(gaps[0], gaps[1])


def energy_deficit(d: StarDomain, rings: int = DEFAULT_RINGS,
                   rings_fine: int = DEFAULT_RINGS_FINE,
                   with_order: bool = False):
    """Scale-invariant energy deficit D, Richardson-extrapolated.

    With ``with_order`` also returns the convergence order observed on
    a coarser third level (a preasymptotic-mesh diagnostic).
    """
    vol = volume(d)
    levels = [rings // 2, rings, rings_fine] if with_order else [rings, rings_fine]
    vals = [_domain_energy(d, r) * vol ** (-SCALE_EXP)
            - disk_data(r).energy() * math.pi ** (-SCALE_EXP)
            for r in levels]
    out = richardson(vals[-2], vals[-1])
    if with_order:
        return out, observed_order(*vals)
    return out


def fk_exponent(q: float) -> float:
    return 2.0 / DIM + 2.0 / q - 1.0


def fk_deficit(d: StarDomain, q: float, rings: int = DEFAULT_RINGS,
               rings_fine: int = DEFAULT_RINGS_FINE) -> float:
    """Scale-invariant Faber-Krahn deficit for the L^q embedding constant."""
    vol = volume(d)
    e = fk_exponent(q)
    vals = [vol ** e * _domain_lambda_q(d, q, r)
            - math.pi ** e * disk_data(r).lambda_q(q)
            for r in (rings, rings_fine)]
    return richardson(vals[0], vals[1])


def kj_exponent(q: float, dim: int = DIM) -> float:
    """Exponent theta(q, N) = (1/q - (N-2)/(2N)) 2N/(N+2) of the
    torsion-energy power in the Kohler-Jobin product."""
    if q < 1.0:
        raise ValueError("q must be >= 1")
    return (1.0 / q - (dim - 2.0) / (2.0 * dim)) * 2.0 * dim / (dim + 2.0)


def kj_slack(d: StarDomain, q: float, rings: int = DEFAULT_RINGS,
             rings_fine: int = DEFAULT_RINGS_FINE) -> float:
    """lambda_q (-E)^theta, domain minus disk (nonnegative, zero on disks)."""
    if q <= 1.0:
        raise ValueError("the Kohler-Jobin comparison requires q > 1")
    th = kj_exponent(q)
    vals = []
    for r in (rings, rings_fine):
        ref = disk_data(r)
        vals.append(_domain_lambda_q(d, q, r) * (-_domain_energy(d, r)) ** th
                    - ref.lambda_q(q) * (-ref.energy()) ** th)
    return richardson(vals[0], vals[1])


def cappio_check(d: StarDomain, q: float, rings: int = DEFAULT_RINGS,
                 rings_fine: int = DEFAULT_RINGS_FINE) -> tuple[float, float]:
    """Ratio form of the Kohler-Jobin bound for a volume-pi domain.

    Returns (lambda_q(Omega)/lambda_q(B) - 1, (E(B)/E(Omega))^theta - 1);
    the first dominates the second up to discretization tolerance.
    """
    if q <= 1.0:
        raise ValueError("the ratio comparison requires q > 1")
    th = kj_exponent(q)
    lhs_vals, rhs_vals = [], []
    for r in (rings, rings_fine):
        ref = disk_data(r)
        lhs_vals.append(_domain_lambda_q(d, q, r) / ref.lambda_q(q) - 1.0)
        rhs_vals.append((ref.energy() / _domain_energy(d, r)) ** th - 1.0)
    return richardson(lhs_vals[0], lhs_vals[1]), richardson(rhs_vals[0], rhs_vals[1])


# -- expansions at the disk ----------------------------------------------


def hessian_target(k: int) -> float:
    """Second-order energy gap per squared amplitude of a cosine mode:
    pi (k - 1) / 8 in two dimensions."""
    return math.pi * (k - 1) / 8.0


def taylor_validation(k: int, s_values, rings: int = DEFAULT_RINGS,
                      rings_fine: int = DEFAULT_RINGS_FINE) -> float:
    """Fitted small-amplitude limit of (E(Omega_s) - E(B_1)) / s^2 along
    volume-corrected mode-k profiles.

    Fits a quadratic in s to absorb the cubic and quartic terms of the
    gap and returns the intercept, which the closed-form quadratic form
    predicts to be pi (k-1)/8.
    """
    if k < 1:
        raise ValueError("mode index must be >= 1")
    s = np.asarray(s_values, dtype=float)
    if len(s) < 3 or np.any(s <= 0.0) or np.any(s > 0.1):
        raise ValueError("amplitudes must lie in (0, 0.1] and number >= 3")
    y = np.array([energy_gap(StarDomain((0.0, 0.0), volume_corrected_profile(k, si)),
                             rings, rings_fine) / si ** 2
                  for si in s])
    coeffs, residuals, *_ = np.polyfit(s, y, 2, full=True)
    intercept = float(coeffs[2])
    rms = math.sqrt(float(residuals[0]) / len(s)) if len(residuals) else 0.0
    if rms > 0.05 * max(abs(intercept), hessian_target(2)):
        raise fem.SolverError(
            f"Taylor fit residual {rms:.3g} too large for mode {k}")
    return intercept


def fuglede_margin(p: BoundaryProfile, rings: int = DEFAULT_RINGS,
                   rings_fine: int = DEFAULT_RINGS_FINE) -> float:
    """Energy gap per squared H^{1/2} norm for a nearly spherical profile.

    The profile must be volume-corrected (volume pi), essentially
    barycentered and supported on modes >= 2; quantitative stability
    bounds this ratio below by 1/(32 N^2) = 1/128 in the plane.
    """
    if p.grid_sup() > 0.05 * (1.0 + 1e-6):
        raise ValueError("profile sup norm exceeds the nearly-spherical budget 0.05")
    d = StarDomain((0.0, 0.0), p)
    if abs(volume(d) - math.pi) > 1e-8:
        raise ValueError("profile is not volume-corrected")
    low_mass = 0.0
    if p.max_mode >= 1:
        low_mass = 2.0 * math.pi * (p.cos_coeffs[0] ** 2 + p.sin_coeffs[0] ** 2)
    norm_sq = h_half_norm_sq(p)
    if low_mass > 0.05 * norm_sq:
        raise ValueError("translation mode dominates; recenter the profile first")
    return energy_gap(d, rings, rings_fine) / norm_sq


def sharpness_fit(eps_values, rings: int = DEFAULT_RINGS,
                  rings_fine: int = DEFAULT_RINGS_FINE) -> tuple[float, float]:
    """Fit the deficit growth rate along the ellipse family.

    Returns (log-log slope of D vs eps, relative spread of A/eps); the
    slope sits near 2 and the spread stays small, which is what makes
    the squared asymmetry the right power in the stability inequality.
    """
    eps = np.asarray(eps_values, dtype=float)
    if len(eps) < 5 or np.any(eps <= 0.0) or np.any(eps > 0.5):
        raise ValueError("need >= 5 eccentricities in (0, 0.5]")
    deficits, ratios = [], []
    for e in eps:
        d = ellipse(e)
        deficits.append(energy_deficit(d, rings, rings_fine))
        a, _ = asymmetry.fraenkel(d, rings)
        ratios.append(a / e)
    slope = float(np.polyfit(np.log(eps), np.log(deficits), 1)[0])
    ratios = np.asarray(ratios)
    spread = float((ratios.max() - ratios.min()) / ratios.mean())
    return slope, spread


# -- sweep machinery -------------------------------------------------------


def random_near_sphere_profile(rng: np.random.Generator,
                               target_sup: float) -> BoundaryProfile:
    """Random profile on modes 2..8 with k^{-2} coefficient decay,
    rescaled to the target sup norm, volume-corrected and recentered."""
    ks = np.arange(1, 9, dtype=float)
    cos = rng.standard_normal(8) / ks ** 2
    sin = rng.standard_normal(8) / ks ** 2
    cos[0] = sin[0] = 0.0
    p = BoundaryProfile(0.0, cos, sin)
    p = p * (target_sup / p.grid_sup())
    p = volume_corrected(p)
    return recenter_rescale(StarDomain((0.0, 0.0), p)).profile


@dataclass(frozen=True)
class SweepSpec:
    """Combined ellipse + random near-sphere family."""

    eps_values: tuple = tuple(np.round(np.linspace(0.02, 0.2, 8), 6))
    random_count: int = 52
    seed: int = 7
    sup_min: float = 0.015
    sup_max: float = 0.047
    q_list: tuple = (1.5, 2.0, 3.0)
    rings: int = DEFAULT_RINGS
    rings_fine: int = DEFAULT_RINGS_FINE


@dataclass
class DeficitReport:
    """Per-domain record of functionals, deficits, and diagnostics."""

    domain_id: str
    family: str
    param: float
    volume: float
    energy: float
    eigenvalue: float
    lambda_q: dict
    fraenkel: float
    alpha: float
    alpha_annular_bound: float
    deficit_energy: float
    deficit_fk: dict
    kj_slack: dict
    cappio: dict
    ratio_energy_asym_sq: float
    ratio_fk2_asym_sq: float
    mesh_rings: int
    extrap_order: float
    order_flagged: bool


@dataclass
class SweepResult:
    reports: list
    slope: float
    slope_residual: float
    min_ratio_energy: float
    min_ratio_fk2: float
    min_ratio_fk: dict
    kj_slack_min: dict
    q_list: tuple


def build_family(spec: SweepSpec) -> list[tuple[str, str, float, StarDomain]]:
    members = [(f"ellipse-{e}", "ellipse", float(e), ellipse(float(e)))
               for e in spec.eps_values]
    seeds = np.random.SeedSequence(spec.seed).spawn(spec.random_count)
    for i, ss in enumerate(seeds):
        rng = np.random.default_rng(ss)
        sup = rng.uniform(spec.sup_min, spec.sup_max)
        profile = random_near_sphere_profile(rng, sup)
        members.append((f"random-{i}", "random", float(i),
                        StarDomain((0.0, 0.0), profile)))
    return members


def evaluate_member(domain_id: str, family: str, param: float, d: StarDomain,
                    q_list=(1.5, 2.0, 3.0), rings: int = DEFAULT_RINGS,
                    rings_fine: int = DEFAULT_RINGS_FINE) -> DeficitReport:
    vol = volume(d)
    levels = (rings // 2, rings, rings_fine)

    e_levels = [_domain_energy(d, r) for r in levels]
    e_extrap = richardson(e_levels[1], e_levels[2])
    d_levels = [e_levels[i] * vol ** (-SCALE_EXP)
                - disk_data(levels[i]).energy() * math.pi ** (-SCALE_EXP)
                for i in range(3)]
    deficit_e = richardson(d_levels[1], d_levels[2])
    order = observed_order(*d_levels)
    flagged = not (ORDER_BAND[0] <= order <= ORDER_BAND[1]) if math.isfinite(order) else True

    lam_levels = [_domain_lambda_q(d, 2.0, r) for r in (rings, rings_fine)]
    lam_extrap = richardson(lam_levels[0], lam_levels[1])

    lambda_q, deficit_fk, slack, cappio = {}, {}, {}, {}
    for q in q_list:
        q = float(q)
        lq = [_domain_lambda_q(d, q, r) if q != 2.0 else lam_levels[i]
              for i, r in enumerate((rings, rings_fine))]
        lambda_q[q] = richardson(lq[0], lq[1])
        e = fk_exponent(q)
        fk = [vol ** e * lq[i] - math.pi ** e * disk_data(r).lambda_q(q)
              for i, r in enumerate((rings, rings_fine))]
        deficit_fk[q] = richardson(fk[0], fk[1])
        if q > 1.0:
            th = kj_exponent(q)
            kj, lhs_v, rhs_v = [], [], []
            for i, r in enumerate((rings, rings_fine)):
                ref = disk_data(r)
                e_dom = e_levels[1 + i]
                kj.append(lq[i] * (-e_dom) ** th - ref.lambda_q(q) * (-ref.energy()) ** th)
                lhs_v.append(lq[i] / ref.lambda_q(q) - 1.0)
                rhs_v.append((ref.energy() / e_dom) ** th - 1.0)
            slack[q] = richardson(kj[0], kj[1])
            cappio[q] = (richardson(lhs_v[0], lhs_v[1]),
                         richardson(rhs_v[0], rhs_v[1]))

    frk, _center = asymmetry.fraenkel(d, rings)
    alpha_val = asymmetry.alpha(d)
    outside, missing = asymmetry.ball_overlaps(d, rings)
    bound = asymmetry.annular_lower_bound(outside, missing)

    ratio_e = deficit_e / frk ** 2 if frk >= RATIO_ASYMMETRY_FLOOR else math.nan
    ratio_fk2 = (deficit_fk.get(2.0, math.nan) / frk ** 2
                 if frk >= RATIO_ASYMMETRY_FLOOR and 2.0 in deficit_fk else math.nan)

    return DeficitReport(
        domain_id=domain_id, family=family, param=param, volume=vol,
        energy=e_extrap, eigenvalue=lam_extrap, lambda_q=lambda_q,
        fraenkel=frk, alpha=alpha_val, alpha_annular_bound=bound,
        deficit_energy=deficit_e, deficit_fk=deficit_fk, kj_slack=slack,
        cappio=cappio, ratio_energy_asym_sq=ratio_e,
        ratio_fk2_asym_sq=ratio_fk2, mesh_rings=rings_fine,
        extrap_order=order, order_flagged=flagged,
    )


def _worker(args) -> DeficitReport:
    return evaluate_member(*args)


def sigma_scan(spec: SweepSpec, workers: int | None = None) -> SweepResult:
    """Evaluate the whole family, in input order, optionally in parallel.

    Any member whose solves fail aborts the scan with that member's id.
    """
    members = build_family(spec)
    levels = (spec.rings // 2, spec.rings, spec.rings_fine)
    prepare_disk_references(levels, spec.q_list)
    jobs = [(mid, fam, par, dom, spec.q_list, spec.rings, spec.rings_fine)
            for (mid, fam, par, dom) in members]
    if workers is None:
        workers = os.cpu_count() or 1
    reports: list[DeficitReport] = []
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_worker, job) for job in jobs]
            for job, fut in zip(jobs, futures):
                try:
                    reports.append(fut.result())
                except Exception as exc:
                    raise fem.SolverError(f"sweep member {job[0]} failed: {exc}") from exc
    else:
        for job in jobs:
            try:
                reports.append(_worker(job))
            except fem.SolverError as exc:
                raise fem.SolverError(f"sweep member {job[0]} failed: {exc}") from exc

    ell = [r for r in reports if r.family == "ellipse"]
    slope, slope_res = math.nan, math.nan
    if len(ell) >= 3:
        logs = np.log([r.param for r in ell])
        coeffs, residuals, *_ = np.polyfit(
            logs, np.log([r.deficit_energy for r in ell]), 1, full=True)
        slope = float(coeffs[0])
        slope_res = math.sqrt(float(residuals[0]) / len(ell)) if len(residuals) else 0.0
    ratios_e = [r.ratio_energy_asym_sq for r in reports
                if math.isfinite(r.ratio_energy_asym_sq)]
    ratios_fk = [r.ratio_fk2_asym_sq for r in reports
                 if math.isfinite(r.ratio_fk2_asym_sq)]
    min_fk = {}
    for q in spec.q_list:
        q = float(q)
        vals = [r.deficit_fk[q] / r.fraenkel ** 2 for r in reports
                if q in r.deficit_fk and r.fraenkel >= RATIO_ASYMMETRY_FLOOR]
        min_fk[q] = min(vals) if vals else math.nan
    kj_min = {q: min(r.kj_slack[q] for r in reports if q in r.kj_slack)
              for q in spec.q_list if q > 1.0}
    return SweepResult(
        reports=reports, slope=slope, slope_residual=slope_res,
        min_ratio_energy=min(ratios_e) if ratios_e else math.nan,
        min_ratio_fk2=min(ratios_fk) if ratios_fk else math.nan,
        min_ratio_fk=min_fk, kj_slack_min=kj_min,
        q_list=tuple(float(q) for q in spec.q_list),
    )
