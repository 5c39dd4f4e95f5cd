"""Asymmetry functionals and the penalization machinery.

Two ways of measuring how far a volume-pi domain is from a unit disk:

* the Fraenkel asymmetry, the infimum over unit-disk centers of the
  normalized symmetric-difference area, minimized here by derivative-
  free simplex descent over centers with exact triangle/disk clipping
  as the objective;
* the smoothed asymmetry alpha, a weighted symmetric-difference with
  the unit disk at the barycenter, evaluated spectrally from the radial
  profile about the barycenter (one closed-form integral, no
  ball-intersection geometry).

The module also carries the volume penalty f_eta, the penalized energy
functionals built from it, and the radial coercivity check that pins
the unit disk as the minimizer among balls.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from . import fem
from .circle import TWO_PI
from .domain import StarDomain, barycenter, profile_relative_to, volume
from .geometry import triangles_disk_area

DEFAULT_RINGS = 64


def unit_ball_volume(dim: int) -> float:
    """Lebesgue measure of the unit ball in the given dimension."""
    if dim < 1:
        raise ValueError("dimension must be >= 1")
    return math.pi ** (dim / 2.0) / math.gamma(dim / 2.0 + 1.0)


def ball_energy(dim: int, radius: float = 1.0) -> float:
    """Torsional energy of a ball: -omega_N r^{N+2} / (2N(N+2))."""
    if dim < 2:
        raise ValueError("dimension must be >= 2")
    return -unit_ball_volume(dim) * radius ** (dim + 2) / (2.0 * dim * (dim + 2))


def beta_const(dim: int) -> float:
    """Weighted unit-ball mass int_{B_1} (1 - |x|) dx = omega_N / (N+1)."""
    if dim < 2:
        raise ValueError("dimension must be >= 2")
    return unit_ball_volume(dim) / (dim + 1)


@dataclass
class AsymmetryReport:
    """Per-domain bundle of asymmetry values and their diagnostics."""

    fraenkel: float
    fraenkel_center: tuple[float, float]
    alpha: float
    barycenter: tuple[float, float]
    sym_diff_to_unit_ball_at_barycenter: float
    mesh_rings: int
    center_tol: float


def _mesh_for(d: StarDomain, rings: int) -> fem.TriMesh:
    return fem.polar_mesh(d, rings)


def sym_diff_fraction(mesh: fem.TriMesh, center) -> float:
    """|Omega delta B_1(center)| / |B_1| on the given mesh of Omega."""
    tri = mesh.vertices[mesh.triangles]
    inter = triangles_disk_area(tri, center, 1.0)
    return (mesh.area() + math.pi - 2.0 * inter) / math.pi


def fraenkel(d: StarDomain, rings: int = DEFAULT_RINGS,
             center_tol: float = 1e-6) -> tuple[float, np.ndarray]:
    """Fraenkel asymmetry of a volume-pi domain and the optimal center.

    Nelder-Mead over centers, started at the barycenter plus four axial
    multistarts of radius 0.25; the best of the five runs wins.
    """
    vol = volume(d)
    if abs(vol - math.pi) > 1e-6 * math.pi:
        raise ValueError(f"Fraenkel asymmetry expects |Omega| = pi, got {vol!r}")
    mesh = _mesh_for(d, rings)
    bc = barycenter(d)

    tri = mesh.vertices[mesh.triangles]
    area = mesh.area()

    def objective(x):
        inter = triangles_disk_area(tri, x, 1.0)
        return (area + math.pi - 2.0 * inter) / math.pi

    # coarse multistart pass, then one tight refinement from the best point
    starts = [bc,
              bc + (0.25, 0.0), bc - (0.25, 0.0),
              bc + (0.0, 0.25), bc - (0.0, 0.25)]
    best_val, best_x = math.inf, bc
    for x0 in starts:
        res = minimize(objective, x0, method="Nelder-Mead",
                       options={"xatol": 1e-3, "fatol": 1e-9, "maxiter": 80})
        if res.fun < best_val:
            best_val, best_x = float(res.fun), np.asarray(res.x)
    res = minimize(objective, best_x, method="Nelder-Mead",
                   options={"xatol": center_tol, "fatol": 1e-12, "maxiter": 400})
    if res.fun <= best_val:
        best_val, best_x = float(res.fun), np.asarray(res.x)
    return max(best_val, 0.0), best_x


def alpha(d: StarDomain) -> float:
    """Smoothed asymmetry: beta_2 + int_Omega (|x - x_Omega| - 1) dx.

    In polar form about the barycenter the integral is
    int (r^3/3 - r^2/2) d theta, a trigonometric polynomial of the
    refitted profile, evaluated exactly.  Zero exactly on unit disks.
    """
    c = barycenter(d)
    p = profile_relative_to(d, c)
    n = max(3 * p.max_mode + 2, 64)
    theta = np.linspace(0.0, TWO_PI, n, endpoint=False)
    r = 1.0 + p.values(theta)
    radial = r ** 3 / 3.0 - r ** 2 / 2.0
    return beta_const(2) + float(np.mean(radial)) * TWO_PI


def ball_overlaps(d: StarDomain, rings: int = DEFAULT_RINGS) -> tuple[float, float]:
    """(|Omega \\ B_1(x_Omega)|, |B_1(x_Omega) \\ Omega|) by mesh clipping."""
    mesh = _mesh_for(d, rings)
    c = barycenter(d)
    inter = triangles_disk_area(mesh.vertices[mesh.triangles], c, 1.0)
    outside = max(mesh.area() - inter, 0.0)
    missing = max(math.pi - inter, 0.0)
    return outside, missing


def annular_lower_bound(outside: float, missing: float, dim: int = 2) -> float:
    """Rearranged annular lower bound for alpha.

    Replacing Omega \\ B_1 and B_1 \\ Omega by annuli of the same measure
    can only decrease the weighted symmetric difference; the resulting
    closed form in the two fractions is a valid lower bound for alpha.
    """
    w = unit_ball_volume(dim)
    r1 = (1.0 + outside / w) ** (1.0 / dim)
    r2 = (1.0 - missing / w) ** (1.0 / dim)

    def shell(r):
        return (r ** (dim + 1) - 1.0) / (dim + 1) - (r ** dim - 1.0) / dim

    return w * (shell(r1) + shell(r2))


def asymmetry_report(d: StarDomain, rings: int = DEFAULT_RINGS) -> AsymmetryReport:
    frk, center = fraenkel(d, rings)
    bc = barycenter(d)
    mesh = _mesh_for(d, rings)
    return AsymmetryReport(
        fraenkel=frk,
        fraenkel_center=(float(center[0]), float(center[1])),
        alpha=alpha(d),
        barycenter=(float(bc[0]), float(bc[1])),
        sym_diff_to_unit_ball_at_barycenter=sym_diff_fraction(mesh, bc),
        mesh_rings=rings,
        center_tol=1e-6,
    )


def f_eta(s: float, eta: float, dim: int = 2) -> float:
    """Piecewise-linear volume penalty vanishing at the unit-ball volume.

    Slope eta below omega_N and 1/eta above, so that
    eta (s1 - s2) <= f(s1) - f(s2) <= (s1 - s2)/eta for s2 <= s1.
    """
    if not 0.0 < eta <= 1.0:
        raise ValueError(f"eta must lie in (0, 1], got {eta}")
    if s < 0.0:
        raise ValueError("volumes are nonnegative")
    w = unit_ball_volume(dim)
    if s <= w:
        return eta * (s - w)
    return (s - w) / eta


def penalized_F(d: StarDomain, eta: float, rings: int = DEFAULT_RINGS) -> float:
    """Volume-penalized energy E(Omega) + f_eta(|Omega|)."""
    mesh = _mesh_for(d, rings)
    u, _ = fem.solve_torsion(mesh)
    return fem.energy_of(u) + f_eta(volume(d), eta)


def penalized_G(d: StarDomain, eta: float, eps: float, sigma: float,
                rings: int = DEFAULT_RINGS) -> float:
    """Penalized selection functional F_eta + sqrt(eps^2 + sigma^2 (alpha - eps)^2)."""
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    if not 0.0 < sigma < 1.0:
        raise ValueError("sigma must lie in (0, 1)")
    a = alpha(d)
    return penalized_F(d, eta, rings) + math.sqrt(eps ** 2 + sigma ** 2 * (a - eps) ** 2)


def eta_threshold(dim: int = 2, r_max: float = 2.0) -> float:
    """Largest eta for which the ball energy g(r) = F_eta(B_r) is minimized
    at r = 1 over (0, r_max].

    Two explicit conditions: the right slope
    g'(r) = r^{N-1}((N+2) r^2 E(B_1) + N omega_N / eta) must be positive on
    (1, r_max], i.e. eta < N omega_N / ((N+2) r_max^2 |E(B_1)|); and the
    left branch, whose only interior critical point is a maximum, must
    satisfy g(0+) = -eta omega_N > E(B_1), i.e. eta < |E(B_1)| / omega_N.
    """
    if r_max <= 1.0:
        raise ValueError("r_max must exceed 1")
    w = unit_ball_volume(dim)
    e1 = abs(ball_energy(dim))
    right = dim * w / ((dim + 2) * r_max ** 2 * e1)
    left = e1 / w
    return min(right, left, 1.0)


def ball_penalized_energy(r: float, eta: float, dim: int = 2) -> float:
    """g(r) = F_eta(B_r) = r^{N+2} E(B_1) + f_eta(omega_N r^N), closed form."""
    if r < 0.0:
        raise ValueError("radius must be nonnegative")
    return r ** (dim + 2) * ball_energy(dim) + f_eta(unit_ball_volume(dim) * r ** dim, eta, dim)


def radial_coercivity(eta: float, r_grid, dim: int = 2) -> tuple[float, float]:
    """Locate the minimum of g over the grid and fit the coercivity constant.

    Returns (radius at the grid minimum, smallest C with
    g(r) - g(1) >= |r - 1| / C on the grid).  The constant is infinite
    whenever some g(r) dips to or below g(1) away from r = 1.
    """
    r = np.asarray(r_grid, dtype=float)
    if r.ndim != 1 or len(r) < 3 or np.any(r <= 0.0):
        raise ValueError("radius grid must be one-dimensional, positive, len >= 3")
    g = np.array([ball_penalized_energy(x, eta, dim) for x in r])
    r_min = float(r[np.argmin(g)])
    g1 = ball_penalized_energy(1.0, eta, dim)
    off = np.abs(r - 1.0) > 1e-12
    gaps = g[off] - g1
    if np.any(gaps <= 0.0):
        return r_min, math.inf
    return r_min, float(np.max(np.abs(r[off] - 1.0) / gaps))
