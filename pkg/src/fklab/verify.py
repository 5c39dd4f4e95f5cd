"""Named verification suites behind the ``verify`` CLI subcommand.

Each suite re-runs one block of the package's mathematical guarantees
end to end and returns (check name, passed, detail) triples; the CLI
renders them and turns any failure into exit code 3.
"""

from __future__ import annotations

import math

import numpy as np

from . import asymmetry, circle, fem, stability
from .circle import BoundaryProfile
from .domain import (StarDomain, ellipse, unit_disk, volume, volume_corrected,
                     volume_corrected_profile, volume_flow)

Check = tuple[str, bool, str]


def _check(name: str, ok: bool, detail: str) -> Check:
    return name, bool(ok), detail


def suite_steklov(cfg) -> list[Check]:
    out = []
    for mm in (2, 32):
        val = circle.steklov_min_rayleigh(mm)
        out.append(_check(f"min Rayleigh quotient, modes 2..{mm}", val == 2.0,
                          f"value {val!r}"))
    val3 = circle.steklov_min_rayleigh(32, min_mode=3)
    out.append(_check("restricted to modes >= 3", val3 == 3.0, f"value {val3!r}"))
    for k in (2, 5, 11):
        q = circle.mode_rayleigh(k)
        out.append(_check(f"mode-{k} quotient equals {k}", abs(q - k) < 1e-13,
                          f"value {q!r}"))
    return out


def suite_fuglede(cfg, count: int = 50) -> list[Check]:
    seeds = np.random.SeedSequence(cfg.seed).spawn(count)
    margins = []
    for ss in seeds:
        rng = np.random.default_rng(ss)
        sup = rng.uniform(0.015, 0.047)
        p = stability.random_near_sphere_profile(rng, sup)
        margins.append(stability.fuglede_margin(p, cfg.rings, cfg.rings_fine))
    worst = min(margins)
    return [_check(f"gap/||phi||^2 >= 1/128 on {count} seeded profiles",
                   worst >= 1.0 / 128.0,
                   f"min margin {worst:.6f}, bound {1/128:.6f}")]


def suite_taylor(cfg) -> list[Check]:
    out = []
    s_values = (0.03, 0.05, 0.07, 0.09)
    for k in (1, 2, 3, 4):
        fit = stability.taylor_validation(k, s_values, cfg.rings, cfg.rings_fine)
        target = stability.hessian_target(k)
        if k == 1:
            ok = abs(fit) <= 0.02 * math.pi / 8.0
            detail = f"fit {fit:.3e}, |fit| <= 0.02*pi/8"
        else:
            ok = abs(fit - target) <= 0.05 * target
            detail = f"fit {fit:.6f}, target {target:.6f}"
        out.append(_check(f"second-order limit, mode {k}", ok, detail))
    return out


def suite_kohler_jobin(cfg) -> list[Check]:
    out = []
    for q, n, expected in ((1.0, 2, 1.0), (2.0, 2, 0.5), (6.0, 3, 0.0)):
        th = stability.kj_exponent(q, n)
        out.append(_check(f"exponent theta({q}, N={n})", abs(th - expected) < 1e-15,
                          f"value {th!r}"))
    tol = 2e-4
    for q in [q for q in cfg.q_list if q > 1.0]:
        slack_disk = stability.kj_slack(unit_disk(), q, cfg.rings, cfg.rings_fine)
        out.append(_check(f"disk slack ~ 0 at q={q}", abs(slack_disk) <= tol,
                          f"value {slack_disk:.3e}"))
        for e in (0.1, 0.2):
            slack = stability.kj_slack(ellipse(e), q, cfg.rings, cfg.rings_fine)
            out.append(_check(f"ellipse({e}) slack > 0 at q={q}", slack > 0.0,
                              f"value {slack:.3e}"))
            lhs, rhs = stability.cappio_check(ellipse(e), q, cfg.rings, cfg.rings_fine)
            out.append(_check(f"ratio bound at q={q}, ellipse({e})",
                              lhs >= rhs - tol, f"lhs {lhs:.3e} rhs {rhs:.3e}"))
    return out


def suite_alpha_props(cfg) -> list[Check]:
    out = []
    a_ball = asymmetry.alpha(unit_disk(center=(0.7, -0.2)))
    out.append(_check("alpha of a translated unit disk", abs(a_ball) <= 1e-9,
                      f"value {a_ball:.2e}"))
    for r in (1.1, 0.9):
        exact = (math.pi / 3.0 + 2.0 * math.pi * (r ** 3 / 3.0 - r ** 2 / 2.0))
        val = asymmetry.alpha(unit_disk(r))
        out.append(_check(f"alpha of B_{r} vs closed form", abs(val - exact) <= 1e-9,
                          f"value {val:.9f}, exact {exact:.9f}"))
    out.append(_check("beta_2 = pi/3", abs(asymmetry.beta_const(2) - math.pi / 3) <= 1e-15,
                      f"value {asymmetry.beta_const(2)!r}"))

    # translation invariance of both asymmetries
    base = StarDomain((0.0, 0.0), volume_corrected_profile(3, 0.06))
    moved = base.translated(0.37, -0.58)
    a0v, _ = asymmetry.fraenkel(base, cfg.rings)
    a1v, _ = asymmetry.fraenkel(moved, cfg.rings)
    out.append(_check("Fraenkel translation invariance", abs(a0v - a1v) <= 1e-9,
                      f"delta {abs(a0v - a1v):.2e}"))
    al0 = asymmetry.alpha(base)
    al1 = asymmetry.alpha(moved)
    out.append(_check("alpha translation invariance", abs(al0 - al1) <= 1e-9,
                      f"delta {abs(al0 - al1):.2e}"))

    # annular rearrangement lower bound on a few shapes
    for d, label in ((ellipse(0.15), "ellipse(0.15)"),
                     (StarDomain((0.0, 0.0), volume_corrected_profile(2, 0.08)), "mode-2"),
                     (StarDomain((0.0, 0.0), volume_corrected_profile(5, 0.05)), "mode-5")):
        outside, missing = asymmetry.ball_overlaps(d, cfg.rings)
        bound = asymmetry.annular_lower_bound(outside, missing)
        val = asymmetry.alpha(d)
        out.append(_check(f"annular bound <= alpha, {label}", bound <= val + 1e-8,
                          f"bound {bound:.3e}, alpha {val:.3e}"))

    # Lipschitz in symmetric difference for nested dilates inside B_2
    rads = np.linspace(0.8, 1.9, 10)
    ratios = []
    for r1, r2 in zip(rads[:-1], rads[1:]):
        da = abs(asymmetry.alpha(unit_disk(r1)) - asymmetry.alpha(unit_disk(r2)))
        dv = math.pi * (r2 ** 2 - r1 ** 2)
        ratios.append(da / dv)
    out.append(_check("alpha Lipschitz constant on nested disks in B_2",
                      max(ratios) <= 6.0, f"max ratio {max(ratios):.3f}"))

    # nearly spherical quadratic upper bound
    rng = np.random.default_rng(cfg.seed)
    worst = 0.0
    for _ in range(100):
        p = stability.random_near_sphere_profile(rng, rng.uniform(0.01, 0.05))
        val = asymmetry.alpha(StarDomain((0.0, 0.0), p))
        worst = max(worst, val / circle.boundary_l2_sq(p))
    out.append(_check("alpha / boundary-L2^2 bounded on 100 near-spheres",
                      worst <= 0.75, f"max ratio {worst:.4f}"))

    # two-sided sandwich of the volume penalty
    rng = np.random.default_rng(cfg.seed + 1)
    ok = True
    for _ in range(1000):
        eta = rng.uniform(0.05, 1.0)
        s2 = rng.uniform(0.0, 8.0)
        s1 = s2 + rng.uniform(0.0, 8.0)
        lhs = eta * (s1 - s2)
        mid = asymmetry.f_eta(s1, eta) - asymmetry.f_eta(s2, eta)
        rhs = (s1 - s2) / eta
        if not (lhs - 1e-12 <= mid <= rhs + 1e-12):
            ok = False
            break
    out.append(_check("volume penalty sandwich on 1000 random pairs", ok, ""))
    return out


def suite_flow(cfg) -> list[Check]:
    out = []
    p = volume_corrected_profile(2, 0.1)
    for t in (0.0, 0.25, 0.5, 0.75, 1.0):
        v = volume(volume_flow(p, t))
        out.append(_check(f"flow volume at t={t}", abs(v - math.pi) <= 1e-10,
                          f"|vol - pi| = {abs(v - math.pi):.2e}"))
    # linear interpolation of the area for an uncorrected target
    q = BoundaryProfile.single_mode(3, cos_amp=0.2)
    target_vol = volume(StarDomain((0.0, 0.0), q))
    worst = 0.0
    for t in (0.3, 0.6, 0.9):
        v = volume(volume_flow(q, t))
        worst = max(worst, abs(v - (math.pi + t * (target_vol - math.pi))))
    out.append(_check("area interpolates linearly along the flow", worst <= 1e-10,
                      f"max deviation {worst:.2e}"))
    end = volume_flow(q, 1.0)
    dev = np.max(np.abs(end.radius(np.linspace(0, 2 * math.pi, 64))
                        - (1.0 + q.values(np.linspace(0, 2 * math.pi, 64)))))
    out.append(_check("t=1 recovers the target boundary", dev == 0.0, f"dev {dev:.2e}"))
    return out


def suite_sharpness(cfg) -> list[Check]:
    eps = np.linspace(cfg.eps_min, cfg.eps_max, cfg.eps_count)
    slope, spread = stability.sharpness_fit(eps, cfg.rings, cfg.rings_fine)
    return [
        _check("log-log deficit slope in [1.85, 2.15]", 1.85 <= slope <= 2.15,
               f"slope {slope:.4f}"),
        _check("A/eps spread <= 15%", spread <= 0.15, f"spread {spread:.3%}"),
    ]


def suite_saint_venant_signs(cfg) -> list[Check]:
    out = []
    tol_e = 2e-4 * abs(asymmetry.ball_energy(2)) / math.pi ** 2
    domains = [("disk", unit_disk()), ("ellipse(0.1)", ellipse(0.1)),
               ("mode-3", StarDomain((0.0, 0.0), volume_corrected_profile(3, 0.07)))]
    for label, d in domains:
        dv = stability.energy_deficit(d, cfg.rings, cfg.rings_fine)
        out.append(_check(f"energy deficit sign, {label}", dv >= -tol_e,
                          f"D = {dv:.3e}"))
        for q in cfg.q_list:
            ref = math.pi ** stability.fk_exponent(q) * stability.disk_data(cfg.rings).lambda_q(q)
            fkv = stability.fk_deficit(d, q, cfg.rings, cfg.rings_fine)
            out.append(_check(f"FK deficit sign, {label}, q={q}",
                              fkv >= -2e-4 * ref, f"value {fkv:.3e}"))
    return out


def _spike_profile(amplitude: float, width: float) -> BoundaryProfile:
    theta = np.linspace(0.0, 2.0 * math.pi, 512, endpoint=False)
    wrapped = np.minimum(theta, 2.0 * math.pi - theta)
    bump = amplitude * np.exp(-((wrapped / width) ** 2))
    from .domain import fit_profile
    profile, _ = fit_profile(1.0 + bump, max_modes=128)
    return volume_corrected(profile)


def suite_tail_sup(cfg) -> list[Check]:
    out = []
    mesh = fem.disk_mesh(cfg.rings)
    u, _ = fem.solve_torsion(mesh)
    sup, meas = fem.tail_sup(u, 1.0)
    out.append(_check("disk tail at R=1", sup == 0.0 and meas <= 1e-12,
                      f"sup {sup:.2e}, measure {meas:.2e}"))
    ratios = []
    for amp, width in ((1.3, 0.22), (1.5, 0.18), (1.7, 0.15)):
        p = _spike_profile(amp, width)
        d = StarDomain((0.0, 0.0), p)
        mesh = fem.polar_mesh(d, cfg.rings)
        u, _ = fem.solve_torsion(mesh)
        sup, meas = fem.tail_sup(u, 1.2)
        if meas > 0.0:
            ratios.append(sup / math.sqrt(meas))
        out.append(_check(f"spike amp={amp}: finite pair", sup >= 0.0 and meas > 0.0,
                          f"sup {sup:.3e}, |Omega \\ B_R| {meas:.3e}, "
                          f"ratio {sup / math.sqrt(meas):.3e}"))
    out.append(_check("tail ratio bounded across the family",
                      max(ratios) <= 1.0, f"max ratio {max(ratios):.3e}"))
    return out


SUITES = {
    "steklov": suite_steklov,
    "fuglede": suite_fuglede,
    "taylor": suite_taylor,
    "kohler-jobin": suite_kohler_jobin,
    "alpha-props": suite_alpha_props,
    "flow": suite_flow,
    "sharpness": suite_sharpness,
    "saint-venant-signs": suite_saint_venant_signs,
    "tail-sup": suite_tail_sup,
}
