"""Higgs potential along Reeb orbits: flow-box construction, batched RK4
integration of  d Phi/ds = phi - [A_xi, Phi] + 2i [phi, Phi]  from the
transversal disc, interpolation, and the derived field psi = -2i nabla_Z Phi.

Flow-box coordinates (u1, u2, s): base points on the square grid tangent to
{sigma0, jsigma0} at P0 through the geodesic exponential, orbit phase s from
the fibre-adapted chart (principal branch; continuation around the closed
fibre is deliberately not attempted).
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import NdBSpline, make_interp_spline

from .errors import BadParams, DomainExcluded, StencilOutOfBox
from .kernels import higgs_rk4
from .sphere import (DEFAULT_POLICY, LMI, check_unit, dirderiv, frame_at,
                     gamma_angle, geodesic_distance, qmul, to_c2)


@dataclass
class FlowBox:
    """Transversal-disc x flow-time product neighbourhood around P0."""

    P0: np.ndarray
    sigma0: np.ndarray
    jsigma0: np.ndarray
    r_d: float
    eps: float
    delta: float
    n_disc: int
    n_s: int
    u_grid: np.ndarray = field(init=False)
    s_grid: np.ndarray = field(init=False)

    def __post_init__(self):
        self.u_grid = np.linspace(-self.r_d, self.r_d, self.n_disc)
        self.s_grid = np.linspace(-self.eps, self.eps, self.n_s)

    # -- coordinates ------------------------------------------------------
    def disc_point(self, u1, u2):
        """Geodesic exponential of u1 sigma0 + u2 jsigma0 at P0."""
        u1 = np.asarray(u1, dtype=float)
        u2 = np.asarray(u2, dtype=float)
        rho = np.sqrt(u1 * u1 + u2 * u2)
        unit = np.where(rho[..., None] > 0,
                        (u1[..., None] * self.sigma0 + u2[..., None] * self.jsigma0)
                        / np.where(rho[..., None] == 0, 1.0, rho[..., None]),
                        0.0 * self.sigma0)
        return np.cos(rho)[..., None] * self.P0 + np.sin(rho)[..., None] * unit

    def box_point(self, u1, u2, s):
        x = self.disc_point(u1, u2)
        s = np.asarray(s, dtype=float)
        e = np.stack([np.cos(s), np.sin(s), np.zeros_like(s), np.zeros_like(s)],
                     axis=-1)
        return qmul(e, x)

    def box_coords(self, pts):
        """(u1, u2, s) of sphere points; raises StencilOutOfBox outside."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        c2 = to_c2(pts)
        p0c = to_c2(self.P0)
        s0c = to_c2(self.sigma0)
        w = c2 @ np.conj(p0c)
        if np.any(np.abs(w) < 1e-12):
            raise StencilOutOfBox("point on the equator of the adapted chart")
        s = np.angle(w)
        e = np.stack([np.cos(-s), np.sin(-s), np.zeros_like(s), np.zeros_like(s)],
                     axis=-1)
        x = qmul(e, pts)
        zx = to_c2(x) @ np.conj(s0c)
        rho = np.arcsin(np.clip(np.abs(zx), 0.0, 1.0))
        theta = np.angle(zx)
        u1 = rho * np.cos(theta)
        u2 = rho * np.sin(theta)
        return u1, u2, s

    def interior_mask(self, u1, u2, s, margin=0.0):
        rho = np.sqrt(u1 ** 2 + u2 ** 2)
        return ((np.abs(u1) <= self.r_d - margin)
                & (np.abs(u2) <= self.r_d - margin)
                & (np.abs(s) <= self.eps - margin)
                & (rho <= self.r_d))

    def interior_points(self, margin, s_span=None, n_u=None, n_s=None):
        """Grid of box points away from the boundary and the delta-ball."""
        us = self.u_grid[2:-2] if n_u is None else np.linspace(
            -self.r_d + margin, self.r_d - margin, n_u)
        span = s_span if s_span is not None else self.eps - margin
        ss = (self.s_grid[4:-4] if n_s is None
              else np.linspace(-span, span, n_s))
        pts, coords = [], []
        for u1 in us:
            for u2 in us:
                if np.hypot(u1, u2) > self.r_d - margin:
                    continue
                for s in ss:
                    p = self.box_point(u1, u2, s)
                    if self.delta > 0 and geodesic_distance(p, self.P0) < self.delta:
                        continue
                    pts.append(p)
                    coords.append((u1, u2, s))
        return np.asarray(pts), np.asarray(coords)


def flow_box(P0, r_d=0.35, eps=2.2, delta=0.0, n_disc=17, n_s=111,
             policy=DEFAULT_POLICY):
    """Build the flow-box around P0 with a disc transversal to the Reeb field."""
    P0 = check_unit(np.asarray(P0, dtype=float))
    if not (0.0 < r_d < np.pi / 2):
        raise BadParams("disc radius must lie in (0, pi/2)")
    if not (0.0 < eps < 2.0 * np.pi):
        raise BadParams("flow-time half-width must lie in (0, 2 pi)")
    if delta < 0 or n_disc < 5 or n_s < 9:
        raise BadParams("invalid flow-box resolution parameters")
    fr = frame_at(P0, policy)
    return FlowBox(P0=P0, sigma0=fr.sigma, jsigma0=fr.jsigma, r_d=r_d, eps=eps,
                   delta=delta, n_disc=int(n_disc), n_s=int(n_s))


@dataclass
class PotentialSolution:
    """Phi sampled on the (disc x flow-time) grid with a cubic interpolator."""

    box: FlowBox
    values: np.ndarray            # (n_disc, n_disc, n_s, n, n) complex
    stats: dict
    _interp: object = field(init=False, repr=False)

    def __post_init__(self):
        v = self.values
        stacked = np.stack([v.real, v.imag], axis=-1)
        grids = (self.box.u_grid, self.box.u_grid, self.box.s_grid)
        knots = []
        coef = stacked
        for ax in range(3):
            spl = make_interp_spline(grids[ax], np.moveaxis(coef, ax, 0), k=3)
            knots.append(spl.t)
            coef = np.moveaxis(spl.c, 0, ax)
        self._interp = NdBSpline(tuple(knots), coef, k=3)

    def value_at_coords(self, u1, u2, s):
        u1, u2, s = np.broadcast_arrays(u1, u2, s)
        if (np.any(np.abs(u1) > self.box.r_d) or np.any(np.abs(u2) > self.box.r_d)
                or np.any(np.abs(s) > self.box.eps)):
            raise StencilOutOfBox("interpolation query outside the flow-box grid")
        pts = np.stack([u1, u2, s], axis=-1)
        out = self._interp(pts)
        return out[..., 0] + 1j * out[..., 1]

    def value_at(self, pts):
        u1, u2, s = self.box.box_coords(pts)
        return self.value_at_coords(u1, u2, s)


def solve_potential(fld, box, substeps=8):
    """Integrate the potential ODE from Phi = 0 on the disc, both directions.

    Orbit nodes are exact Reeb exponentials of the disc grid; the RK4
    recursion runs in the batched kernel.  The returned defining-equation
    residual is an order-6 stencil check on the stored grid."""
    n1 = box.n_disc
    u1g, u2g = np.meshgrid(box.u_grid, box.u_grid, indexing="ij")
    base = box.disc_point(u1g.ravel(), u2g.ravel())
    nb = base.shape[0]
    n = fld.rank

    n_s = box.n_s
    if n_s % 2 == 0:
        raise BadParams("n_s must be odd so the disc slice is a grid plane")
    half = (n_s - 1) // 2
    ds = box.s_grid[1] - box.s_grid[0]
    sub = int(substeps)
    h = ds / sub

    values = np.empty((nb, n_s, n, n), dtype=complex)
    values[:, half] = 0.0
    for direction in (+1.0, -1.0):
        k_steps = half * sub
        s_nodes = direction * h / 2.0 * np.arange(2 * k_steps + 1)
        orbit = box.box_point(np.repeat(u1g.ravel(), s_nodes.size),
                              np.repeat(u2g.ravel(), s_nodes.size),
                              np.tile(s_nodes, nb))
        if not np.all(fld.domain_mask(orbit)):
            raise DomainExcluded("orbit crosses the field's excluded set")
        _, _, a_xi, phi = fld(orbit)
        phi = phi.reshape(nb, s_nodes.size, n, n)
        a_xi = a_xi.reshape(nb, s_nodes.size, n, n)
        path = higgs_rk4(phi, a_xi, direction * h)
        idx = half + direction * np.arange(0, half + 1)
        values[:, idx.astype(int)] = path[:, ::sub]
    values = values.reshape(n1, n1, n_s, n, n)

    sol = PotentialSolution(box=box, values=values,
                            stats={"ode_step": h, "substeps": sub})
    sol.stats["defining_residual"] = defining_residual(sol, fld)
    sol.stats["disc_slice_max"] = float(np.max(np.abs(values[:, :, half])))
    return sol


_STENCIL6 = np.array([-1.0, 9.0, -45.0, 0.0, 45.0, -9.0, 1.0]) / 60.0


def defining_residual(sol, fld, policy=DEFAULT_POLICY):
    """sup || xi(Phi) - (phi - [A_xi, Phi] + 2i [phi, Phi]) || on interior
    grid nodes, with xi(Phi) from an order-6 stencil along the stored orbit."""
    box = sol.box
    v = sol.values
    ds = box.s_grid[1] - box.s_grid[0]
    dv = sum(c * v[:, :, k:v.shape[2] - 6 + k or None]
             for k, c in enumerate(_STENCIL6) if c != 0.0) / ds
    worst = 0.0
    u1g, u2g = np.meshgrid(box.u_grid, box.u_grid, indexing="ij")
    inner = slice(3, box.n_s - 3)
    for ks, s in enumerate(box.s_grid[inner]):
        pts = box.box_point(u1g.ravel(), u2g.ravel(), np.full(u1g.size, s))
        _, _, a_xi, phi = fld(pts)
        cur = v[:, :, ks + 3].reshape(-1, v.shape[3], v.shape[4])
        rhs = (phi + (cur @ a_xi - a_xi @ cur)
               + 2.0j * (phi @ cur - cur @ phi))
        gap = np.abs(dv[:, :, ks].reshape(rhs.shape) - rhs)
        worst = max(worst, float(np.max(gap)))
    return worst


def order_estimate(fld, box, substeps=2):
    """Classical step-halving order estimate of the orbit integrator."""
    sols = [solve_potential(fld, box, substeps=substeps * k) for k in (1, 2, 4)]
    d1 = float(np.max(np.abs(sols[0].values - sols[1].values)))
    d2 = float(np.max(np.abs(sols[1].values - sols[2].values)))
    if d2 == 0.0:
        return float("inf")
    return float(np.log2(d1 / d2))


def quadrature_oracle(fld, box, u1, u2, s, n_nodes=2001):
    """Simpson integral of phi along the orbit: valid oracle whenever the
    commutator terms vanish ([phi, Phi] = [A_xi, Phi] = 0)."""
    ss = np.linspace(0.0, s, n_nodes if n_nodes % 2 == 1 else n_nodes + 1)
    pts = box.box_point(np.full(ss.size, u1), np.full(ss.size, u2), ss)
    _, _, _, phi = fld(pts)
    from scipy.integrate import simpson
    return simpson(phi, x=ss, axis=0)


def psi_field(sol, fld, policy=DEFAULT_POLICY, fd_step=5e-4):
    """psi = -2i (Z(Phi) + [A_Z, Phi]) with Z-derivatives through the
    interpolated potential along policy-frame great circles."""

    def ev(pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        fr = frame_at(pts, policy)
        a1, a2, _, _ = fld(pts)
        if not isinstance(policy, DEFAULT_POLICY.__class__):
            g = gamma_angle(pts, policy)[:, None, None]
            a1, a2 = (np.cos(g) * a1 + np.sin(g) * a2,
                      -np.sin(g) * a1 + np.cos(g) * a2)
        out = np.empty(a1.shape, dtype=complex)
        for k in range(pts.shape[0]):
            d_s = dirderiv(lambda q: sol.value_at(q[None])[0], pts[k],
                           fr.sigma[k], h=fd_step)
            d_j = dirderiv(lambda q: sol.value_at(q[None])[0], pts[k],
                           fr.jsigma[k], h=fd_step)
            phi_val = sol.value_at(pts[k][None])[0]
            a_z = a1[k] - 1j * a2[k]
            out[k] = -2.0j * ((d_s - 1j * d_j)
                              + (a_z @ phi_val - phi_val @ a_z))
        return out

    return ev


def export_csv(sol, path):
    """CSV rows (u1, u2, s, Re/Im matrix entries row-major)."""
    import csv as _csv
    box = sol.box
    n = sol.values.shape[-1]
    header = ["u1", "u2", "s"]
    for r in range(n):
        for c in range(n):
            header += [f"re{r}{c}", f"im{r}{c}"]
    with open(path, "w", newline="") as fh:
        w = _csv.writer(fh)
        w.writerow(header)
        for i, u1 in enumerate(box.u_grid):
            for j, u2 in enumerate(box.u_grid):
                for k, s in enumerate(box.s_grid):
                    m = sol.values[i, j, k]
                    row = [repr(float(u1)), repr(float(u2)), repr(float(s))]
                    for r in range(n):
                        for c in range(n):
                            row += [repr(float(m[r, c].real)),
                                    repr(float(m[r, c].imag))]
                    w.writerow(row)
