"""P1 finite elements on polar triangulations of star-shaped domains.

Meshes are built on a fixed "sunflower" topology: ring i carries 6i
vertices, so triangles stay near-equilateral on the disk, and the same
(rings)-mesh of any star domain is the disk mesh pushed radially onto
the boundary.  Deficits between a domain and the disk are therefore
computed on topologically identical meshes and the leading
discretization bias cancels.

Solvers: torsion (-Laplace u = 1, u = 0 on the boundary) by diagonally
preconditioned conjugate gradients; the principal Dirichlet eigenvalue
by inverse power iteration; optimal Poincare-Sobolev constants by a
normalized gradient descent in the energy inner product with
backtracking line search.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .domain import StarDomain, unit_disk
from .geometry import triangles_disk_area

DEFAULT_CG_TOL = 1e-10
DEFAULT_EIG_TOL = 1e-8
DEFAULT_DESCENT_TOL = 1e-8
DEFAULT_Q_MAX = 4.0


class SolverError(RuntimeError):
    """Signals non-convergence of an iterative solve."""


class TriMesh:
    """Conforming P1 triangulation with fixed ring/sector topology."""

    def __init__(self, vertices: np.ndarray, triangles: np.ndarray,
                 boundary_vertices: np.ndarray, rings: int, sectors: int):
        self.vertices = np.ascontiguousarray(vertices, dtype=float)
        self.triangles = np.ascontiguousarray(triangles, dtype=np.int64)
        self.boundary_vertices = np.asarray(boundary_vertices, dtype=np.int64)
        self.rings = rings
        self.sectors = sectors
        if np.min(self.signed_areas) <= 0.0:
            raise ValueError("mesh has inverted or degenerate elements")

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @cached_property
    def signed_areas(self) -> np.ndarray:
        v = self.vertices[self.triangles]
        d1 = v[:, 1] - v[:, 0]
        d2 = v[:, 2] - v[:, 0]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    def area(self) -> float:
        return float(np.sum(self.signed_areas))

    @cached_property
    def h(self) -> float:
        v = self.vertices[self.triangles]
        e = np.concatenate([v[:, 1] - v[:, 0], v[:, 2] - v[:, 1], v[:, 0] - v[:, 2]])
        return float(np.max(np.hypot(e[:, 0], e[:, 1])))

    @cached_property
    def interior_mask(self) -> np.ndarray:
        mask = np.ones(self.n_vertices, dtype=bool)
        mask[self.boundary_vertices] = False
        return mask

    @cached_property
    def _gradients(self) -> np.ndarray:
        # per-triangle gradients of the three barycentric functions, (m, 3, 2)
        v = self.vertices[self.triangles]
        edges = v[:, [2, 0, 1]] - v[:, [1, 2, 0]]  # edge opposite vertex i
        rot = np.stack([-edges[:, :, 1], edges[:, :, 0]], axis=-1)
        return rot / (2.0 * self.signed_areas)[:, None, None]

    @cached_property
    def stiffness(self) -> sp.csr_matrix:
        g = self._gradients
        a = self.signed_areas
        tri = self.triangles
        rows, cols, data = [], [], []
        for i in range(3):
            for j in range(3):
                rows.append(tri[:, i])
                cols.append(tri[:, j])
                data.append(a * np.sum(g[:, i] * g[:, j], axis=1))
        k = sp.coo_matrix((np.concatenate(data),
                           (np.concatenate(rows), np.concatenate(cols))),
                          shape=(self.n_vertices, self.n_vertices))
        return k.tocsr()

    @cached_property
    def mass(self) -> sp.csr_matrix:
        a = self.signed_areas
        tri = self.triangles
        rows, cols, data = [], [], []
        for i in range(3):
            for j in range(3):
                rows.append(tri[:, i])
                cols.append(tri[:, j])
                data.append(a * ((2.0 if i == j else 1.0) / 12.0))
        m = sp.coo_matrix((np.concatenate(data),
                           (np.concatenate(rows), np.concatenate(cols))),
                          shape=(self.n_vertices, self.n_vertices))
        return m.tocsr()

    @cached_property
    def load(self) -> np.ndarray:
        """Exact integrals of the P1 basis functions (area/3 per vertex)."""
        b = np.zeros(self.n_vertices)
        np.add.at(b, self.triangles.ravel(),
                  np.repeat(self.signed_areas / 3.0, 3))
        return b

    @cached_property
    def _interior_stiffness(self) -> sp.csr_matrix:
        idx = np.flatnonzero(self.interior_mask)
        return self.stiffness[np.ix_(idx, idx)].tocsr()

    @cached_property
    def _interior_factor(self):
        # cached sparse LU used by the eigen/descent inner solves
        return spla.splu(self._interior_stiffness.tocsc())

    @cached_property
    def boundary_edges(self) -> np.ndarray:
        """(n_edges, 3) array [v0, v1, triangle] of edges used only once."""
        tri = self.triangles
        edges = np.concatenate([tri[:, [0, 1]], tri[:, [1, 2]], tri[:, [2, 0]]])
        owner = np.tile(np.arange(len(tri)), 3)
        key = np.sort(edges, axis=1)
        order = np.lexsort((key[:, 1], key[:, 0]))
        key, edges, owner = key[order], edges[order], owner[order]
        uniq, first, counts = np.unique(key, axis=0, return_index=True,
                                        return_counts=True)
        sel = first[counts == 1]
        return np.column_stack([edges[sel], owner[sel]])

    def dump(self) -> str:
        """Text dump: ``v x y`` / ``t i j k`` / ``b i`` lines."""
        lines = [f"v {float(x)!r} {float(y)!r}" for x, y in self.vertices]
        lines += [f"t {i} {j} {k}" for i, j, k in self.triangles]
        lines += [f"b {i}" for i in self.boundary_vertices]
        return "\n".join(lines) + "\n"


@dataclass
class SolveStats:
    iterations: int
    residual: float
    h: float


@dataclass
class ScalarField:
    """Nodal P1 field; Dirichlet fields vanish on boundary vertices."""

    mesh: TriMesh
    values: np.ndarray
    dirichlet: bool = True

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.mesh.n_vertices,):
            raise ValueError("field length does not match the mesh")
        if self.dirichlet:
            self.values[self.mesh.boundary_vertices] = 0.0


def polar_mesh(d: StarDomain, rings: int) -> TriMesh:
    """Ring/sector triangulation of a star domain (6i vertices on ring i)."""
    if rings < 4:
        raise ValueError(f"rings must be >= 4, got {rings}")
    ring_start = [0] * (rings + 1)
    for i in range(1, rings + 1):
        ring_start[i] = 1 + 3 * i * (i - 1)
    n_vertices = 1 + 3 * rings * (rings + 1)

    theta_all = np.empty(n_vertices)
    rho_all = np.empty(n_vertices)
    theta_all[0] = 0.0
    rho_all[0] = 0.0
    for i in range(1, rings + 1):
        s = ring_start[i]
        theta_all[s:s + 6 * i] = np.arange(6 * i) * (2.0 * math.pi / (6 * i))
        rho_all[s:s + 6 * i] = i / rings

    r_bound = d.radius(theta_all)
    verts = np.stack([
        d.center[0] + rho_all * r_bound * np.cos(theta_all),
        d.center[1] + rho_all * r_bound * np.sin(theta_all),
    ], axis=1)

    tris = np.empty((6 * rings * rings, 3), dtype=np.int64)
    pos = 0
    for j in range(6):
        tris[pos] = (0, 1 + j, 1 + (j + 1) % 6)
        pos += 1
    for i in range(2, rings + 1):
        so, si = ring_start[i], ring_start[i - 1]
        no, ni = 6 * i, 6 * (i - 1)
        for seg in range(6):
            for t in range(i):
                o0 = so + (seg * i + t) % no
                o1 = so + (seg * i + t + 1) % no
                n0 = si + (seg * (i - 1) + t) % ni
                tris[pos] = (o0, o1, n0)
                pos += 1
            for t in range(i - 1):
                o1 = so + (seg * i + t + 1) % no
                n0 = si + (seg * (i - 1) + t) % ni
                n1 = si + (seg * (i - 1) + t + 1) % ni
                tris[pos] = (n0, o1, n1)
                pos += 1
    boundary = np.arange(ring_start[rings], n_vertices, dtype=np.int64)
    return TriMesh(verts, tris, boundary, rings, 6 * rings)


def disk_mesh(rings: int) -> TriMesh:
    return polar_mesh(unit_disk(), rings)


def _cg_solve(a: sp.csr_matrix, b: np.ndarray, tol: float,
              x0: np.ndarray | None = None,
              maxiter: int | None = None) -> tuple[np.ndarray, int]:
    diag = a.diagonal()
    precond = spla.LinearOperator(a.shape, matvec=lambda x: x / diag)
    count = [0]

    def _cb(_):
        count[0] += 1

    if maxiter is None:
        maxiter = 50 * int(math.isqrt(a.shape[0]) + 100)
    x, info = spla.cg(a, b, x0=x0, rtol=tol, atol=0.0, M=precond,
                      maxiter=maxiter, callback=_cb)
    if info != 0:
        raise SolverError(f"conjugate gradients failed to converge (info={info})")
    return x, count[0]


def solve_torsion(mesh: TriMesh, tol: float | None = None) -> tuple[ScalarField, SolveStats]:
    """Solve -Laplace u = 1 with zero boundary values."""
    tol = DEFAULT_CG_TOL if tol is None else tol
    idx = np.flatnonzero(mesh.interior_mask)
    a = mesh._interior_stiffness
    b = mesh.load[idx]
    x, iters = _cg_solve(a, b, tol)
    res = float(np.linalg.norm(a @ x - b) / np.linalg.norm(b))
    values = np.zeros(mesh.n_vertices)
    values[idx] = x
    return ScalarField(mesh, values), SolveStats(iters, res, mesh.h)


def integral(u: ScalarField) -> float:
    """Exact integral of the P1 field."""
    return float(u.mesh.load @ u.values)


def energy_of(u: ScalarField) -> float:
    """Torsional energy -(1/2) int u of a torsion solution."""
    return -0.5 * integral(u)


def dirichlet_energy(u: ScalarField) -> float:
    return float(u.values @ (u.mesh.stiffness @ u.values))


def lq_integral(u: ScalarField, q: float) -> float:
    """int |u|^q: exact mass-matrix quadrature for q in {1, 2}, otherwise
    the 3-point edge-midpoint rule per triangle."""
    if q == 1.0:
        return float(u.mesh.load @ np.abs(u.values))
    if q == 2.0:
        return float(u.values @ (u.mesh.mass @ u.values))
    tri = u.mesh.triangles
    uv = u.values[tri]
    mids = 0.5 * np.stack([uv[:, 1] + uv[:, 2],
                           uv[:, 0] + uv[:, 2],
                           uv[:, 0] + uv[:, 1]], axis=1)
    w = (u.mesh.signed_areas / 3.0)[:, None]
    return float(np.sum(w * np.abs(mids) ** q))


def _lq_gradient(mesh: TriMesh, values: np.ndarray, q: float) -> np.ndarray:
    """Gradient of v -> int |v|^q with respect to nodal values."""
    if q == 1.0:
        return mesh.load * np.sign(values)
    if q == 2.0:
        return 2.0 * (mesh.mass @ values)
    tri = mesh.triangles
    uv = values[tri]
    mids = 0.5 * np.stack([uv[:, 1] + uv[:, 2],
                           uv[:, 0] + uv[:, 2],
                           uv[:, 0] + uv[:, 1]], axis=1)
    w = (mesh.signed_areas / 3.0)[:, None]
    dmid = w * (0.5 * q) * np.abs(mids) ** (q - 1.0) * np.sign(mids)
    grad = np.zeros(mesh.n_vertices)
    np.add.at(grad, tri[:, 1], dmid[:, 0])
    np.add.at(grad, tri[:, 2], dmid[:, 0])
    np.add.at(grad, tri[:, 0], dmid[:, 1])
    np.add.at(grad, tri[:, 2], dmid[:, 1])
    np.add.at(grad, tri[:, 0], dmid[:, 2])
    np.add.at(grad, tri[:, 1], dmid[:, 2])
    return grad


def principal_eigenvalue(mesh: TriMesh, tol: float | None = None,
                         max_iter: int = 400) -> tuple[float, ScalarField]:
    """Smallest Dirichlet eigenvalue by inverse power iteration (shift 0)."""
    tol = DEFAULT_EIG_TOL if tol is None else tol
    idx = np.flatnonzero(mesh.interior_mask)
    k = mesh._interior_stiffness
    m = mesh.mass[np.ix_(idx, idx)].tocsr()
    lu = mesh._interior_factor
    x = mesh.load[idx].copy()
    x /= math.sqrt(x @ (m @ x))
    lam_prev = math.inf
    for it in range(1, max_iter + 1):
        y = lu.solve(m @ x)
        y /= math.sqrt(y @ (m @ y))
        lam = float(y @ (k @ y))
        if abs(lam - lam_prev) <= tol:
            x = y
            break
        lam_prev = lam
        x = y
    else:
        raise SolverError("inverse power iteration stagnated")
    if np.sum(x) < 0:
        x = -x
    values = np.zeros(mesh.n_vertices)
    values[idx] = x
    return lam, ScalarField(mesh, values)


def poincare_sobolev(mesh: TriMesh, q: float, tol: float | None = None,
                     q_max: float = DEFAULT_Q_MAX, max_iter: int = 500) -> float:
    """Optimal constant of the embedding into L^q: min of the Dirichlet
    integral over Dirichlet fields with unit L^q norm.

    Descent in the energy inner product: from the current normalized
    iterate, step against u - R(u) K^{-1} grad(norm term) with
    backtracking, and stop once the Rayleigh quotient decreases by less
    than ``tol`` in relative terms.
    """
    tol = DEFAULT_DESCENT_TOL if tol is None else tol
    q = float(q)
    if not 1.0 <= q <= q_max:
        raise ValueError(f"exponent q={q} outside the supported range [1, {q_max}]")
    idx = np.flatnonzero(mesh.interior_mask)
    k = mesh._interior_stiffness
    lu = mesh._interior_factor

    full = np.zeros(mesh.n_vertices)

    def norm_q(x):
        full[idx] = x
        return lq_integral(ScalarField(mesh, full.copy(), dirichlet=False), q) ** (1.0 / q)

    def grad_rho(x):
        # gradient of ||.||_q at a unit-norm point, interior dofs
        full[idx] = x
        g = _lq_gradient(mesh, full, q)
        return g[idx] / q

    u = lu.solve(mesh.load[idx])  # torsion start, positive
    u /= norm_q(u)
    rayleigh = float(u @ (k @ u))
    for _ in range(max_iter):
        w = grad_rho(u)
        direction = u - rayleigh * lu.solve(w)
        step = 1.0
        improved = False
        for _ in range(40):
            trial = u - step * direction
            nrm = norm_q(trial)
            if nrm > 0.0:
                trial = trial / nrm
                r_trial = float(trial @ (k @ trial))
                if r_trial < rayleigh:
                    improved = True
                    break
            step *= 0.5
        if not improved:
            return rayleigh
        drop = (rayleigh - r_trial) / rayleigh
        u, rayleigh = trial, r_trial
        if drop <= tol:
            return rayleigh
    raise SolverError(f"L^{q} descent did not converge in {max_iter} iterations")


def boundary_flux(u: ScalarField) -> np.ndarray:
    """|normal derivative| per boundary edge from one-sided P1 gradients.

    A Dirichlet field is constant (zero) along each boundary edge, so
    the gradient of the adjacent triangle is normal to it.
    """
    mesh = u.mesh
    edges = mesh.boundary_edges
    g = mesh._gradients
    tri_idx = edges[:, 2]
    uv = u.values[mesh.triangles[tri_idx]]
    grads = np.sum(uv[:, :, None] * g[tri_idx], axis=1)
    mids = 0.5 * (mesh.vertices[edges[:, 0]] + mesh.vertices[edges[:, 1]])
    order = np.argsort(np.arctan2(mids[:, 1], mids[:, 0]))
    return np.hypot(grads[:, 0], grads[:, 1])[order]


def tail_sup(u: ScalarField, ball_radius: float) -> tuple[float, float]:
    """(sup of u outside B_{R+1}, |domain outside B_R|), balls at the origin."""
    if ball_radius < 1.0:
        raise ValueError("tail radius must be >= 1")
    mesh = u.mesh
    if abs(mesh.area() / math.pi - 1.0) > 0.05:
        raise ValueError("tail estimate expects a volume-normalized domain")
    dist = np.hypot(mesh.vertices[:, 0], mesh.vertices[:, 1])
    outside = dist > ball_radius + 1.0
    sup = float(np.max(u.values[outside])) if np.any(outside) else 0.0
    tri_verts = mesh.vertices[mesh.triangles]
    measure = mesh.area() - triangles_disk_area(tri_verts, (0.0, 0.0), ball_radius)
    return max(sup, 0.0), max(measure, 0.0)


def set_default_tolerances(cg: float | None = None, eig: float | None = None,
                           descent: float | None = None) -> None:
    """Override the module-wide solver tolerances (used by the CLI config)."""
    global DEFAULT_CG_TOL, DEFAULT_EIG_TOL, DEFAULT_DESCENT_TOL
    if cg is not None:
        DEFAULT_CG_TOL = cg
    if eig is not None:
        DEFAULT_EIG_TOL = eig
    if descent is not None:
        DEFAULT_DESCENT_TOL = descent
