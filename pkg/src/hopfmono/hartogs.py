"""Holonomy probe near the puncture fibre: adapted holomorphic coordinates,
first-order transport around z-loops, holonomy matrices alpha(w) and the
Hartogs-figure triviality indicator.

Two transport modes ship: ``literal`` follows the printed matrix
A_sigma - i A_jsigma - psi against dz, ``coordinate`` contracts the lifted
(1,0)-connection minus psi zeta* with the true loop velocity.  Their gap is
itself a reported quantity (the straightening of Z to d/dz is an analytic
step the probe cannot perform).
"""

import csv
from dataclasses import dataclass, field

import numpy as np

from .cone import ConePoint, J_apply, embed, unembed
from .errors import LoopExitsDomain, MissingInputs
from .kernels import transport_rk4
from .obstruction import _policy_components
from .sphere import DEFAULT_POLICY, check_unit, frame_at, from_c2, to_c2


@dataclass
class AdaptedChart:
    """Unitary chart (z, w) = U * embed(cp) with the puncture ray on the
    positive real w-axis and the transversal disc tangent to the z-plane."""

    U: np.ndarray
    eps_z: float
    eps_w: float
    annulus_inner: float
    d_center: complex
    d_radius: float
    mu: float

    def to_chart(self, cp, calib):
        return self.U @ embed(cp, calib)

    def from_chart(self, z, w, calib):
        x = np.conj(self.U.T) @ np.array([z, w], dtype=complex)
        return unembed(x, calib)

    def fiber_image_offset(self, t_values, calib):
        """Max |z| over the chart image of the puncture ray (invariant)."""
        worst = 0.0
        for t in t_values:
            z, _ = self.to_chart(ConePoint(p=self._p0, t=float(t)), calib)
            worst = max(worst, abs(z))
        return worst


def adapted_coordinates(P0, calib, eps_z=0.24, eps_w=0.9, annulus_inner=0.12,
                        d_center=0.55j, d_radius=0.12, policy=DEFAULT_POLICY):
    """Special-unitary chart completing embed(P0, 1) to (0, 1)."""
    P0 = check_unit(np.asarray(P0, dtype=float))
    fr = frame_at(P0, policy)
    row2 = np.conj(to_c2(P0))
    row1 = np.conj(to_c2(fr.sigma))
    U = np.stack([row1, row2])
    det = np.linalg.det(U)
    U[0] = U[0] / det  # |det| = 1, so this only rotates the z-axis phase
    chart = AdaptedChart(U=U, eps_z=eps_z, eps_w=eps_w,
                         annulus_inner=annulus_inner, d_center=complex(d_center),
                         d_radius=d_radius, mu=calib.mu)
    chart._p0 = P0
    return chart


def _loop_cone_data(chart, w, r, s_nodes, calib):
    """Cone points and real velocities along the z-circle at fixed w."""
    z = r * np.exp(2j * np.pi * s_nodes)
    zdot = 2j * np.pi * z
    xs = np.conj(chart.U.T) @ np.stack([z, np.full_like(z, w)])
    xdots = np.conj(chart.U.T) @ np.stack([zdot, np.zeros_like(z)])
    pts, ts, vels = [], [], []
    for k in range(s_nodes.size):
        x = xs[:, k]
        r_abs = float(np.linalg.norm(np.abs(x)))
        p4 = from_c2(x / r_abs)
        t = r_abs ** (1.0 / calib.mu)
        xd4 = from_c2(xdots[:, k])
        x4 = from_c2(x)
        dr = float(np.dot(xd4, x4)) / r_abs
        pdot = xd4 / r_abs - x4 * dr / r_abs ** 2
        tdot = (1.0 / calib.mu) * r_abs ** (1.0 / calib.mu - 1.0) * dr
        pts.append(p4)
        ts.append(t)
        vels.append((pdot, tdot))
    return np.asarray(pts), np.asarray(ts), vels, z, zdot


def _one_zero_connection(field, psi_fn, p, t, vel, calib, policy):
    """[(1,0)-part of the lifted connection minus psi zeta*] on a real
    cone velocity (complex-linear extension is implied by linearity)."""
    a1, a2, a3, phi = _policy_components(field, p, policy)
    fr = frame_at(p, policy)
    u4, tau = vel

    def conn(v4, vt):
        return (a1 * float(np.dot(v4, fr.sigma))
                + a2 * float(np.dot(v4, fr.jsigma))
                + a3 * float(np.dot(v4, fr.xi))
                + phi * vt / (t * np.sqrt(calib.c)))

    jv4, jvt = J_apply(ConePoint(p=p, t=t), (u4, tau), calib, policy)
    a_10 = 0.5 * (conn(u4, tau) - 1j * conn(jv4, jvt))
    zeta_v = 0.5 * (float(np.dot(u4, fr.sigma)) + 1j * float(np.dot(u4, fr.jsigma)))
    zeta_jv = 0.5 * (float(np.dot(jv4, fr.sigma)) + 1j * float(np.dot(jv4, fr.jsigma)))
    zeta_10 = 0.5 * (zeta_v - 1j * zeta_jv)
    psi0 = psi_fn(p[None])[0]
    return a_10 - psi0 * zeta_10


def transport(field, psi_fn, chart, calib, w, r=None, n_steps=256,
              mode="literal", policy=DEFAULT_POLICY, generator_override=None):
    """Holonomy matrix of the first-order transport around |z| = r at fixed w.

    mode 'literal': df/ds = -(A_sigma - i A_jsigma - psi) (dz/ds) f.
    mode 'coordinate': df/ds = -[(1,0)-connection - psi zeta*](loop velocity) f.
    """
    if r is None:
        r = 0.5 * (chart.annulus_inner + chart.eps_z)
    if not (0.0 < r <= chart.eps_z):
        raise LoopExitsDomain(f"loop radius {r} outside the bidisc")
    k_steps = int(n_steps)
    s_nodes = np.arange(2 * k_steps + 1) / (2.0 * k_steps)
    pts, ts, vels, z, zdot = _loop_cone_data(chart, w, r, s_nodes, calib)
    if not np.all(field.domain_mask(pts)):
        raise LoopExitsDomain("loop crosses the field's excluded set")

    n = field.rank
    gen = np.empty((1, 2 * k_steps + 1, n, n), dtype=complex)
    if generator_override is not None:
        for k in range(2 * k_steps + 1):
            gen[0, k] = -generator_override(s_nodes[k], pts[k]) * zdot[k]
    elif mode == "literal":
        a1, a2, _, _ = _policy_components_batch(field, pts, policy)
        psis = psi_fn(pts)
        b = (a1 - 1j * a2) - psis
        gen[0] = -b * zdot[:, None, None]
    elif mode == "coordinate":
        for k in range(2 * k_steps + 1):
            b = _one_zero_connection(field, psi_fn, pts[k], ts[k], vels[k],
                                     calib, policy)
            gen[0, k] = -b
    else:
        raise MissingInputs(f"unknown transport mode {mode!r}")
    return transport_rk4(gen, 1.0 / k_steps)[0]


def _policy_components_batch(field, pts, policy):
    from .sphere import gamma_angle
    a1, a2, a3, phi = field(pts)
    if not isinstance(policy, DEFAULT_POLICY.__class__):
        g = gamma_angle(pts, policy)[:, None, None]
        a1, a2 = (np.cos(g) * a1 + np.sin(g) * a2,
                  -np.sin(g) * a1 + np.cos(g) * a2)
    return a1, a2, a3, phi


def abel_determinant_gap(field, psi_fn, chart, calib, w, r=None, n_steps=256,
                         mode="literal", policy=DEFAULT_POLICY):
    """|det alpha - exp(-contour integral of trace B dz)| via Simpson."""
    from scipy.integrate import simpson
    if r is None:
        r = 0.5 * (chart.annulus_inner + chart.eps_z)
    alpha = transport(field, psi_fn, chart, calib, w, r, n_steps, mode, policy)
    s_nodes = np.arange(2 * n_steps + 1) / (2.0 * n_steps)
    pts, ts, vels, z, zdot = _loop_cone_data(chart, w, r, s_nodes, calib)
    if mode == "literal":
        a1, a2, _, _ = _policy_components_batch(field, pts, policy)
        b = (a1 - 1j * a2) - psi_fn(pts)
    else:
        b = np.stack([_one_zero_connection(field, psi_fn, pts[k], ts[k], vels[k],
                                           calib, policy) / zdot[k]
                      for k in range(pts.shape[0])])
    integrand = np.trace(b, axis1=-2, axis2=-1) * zdot
    contour = simpson(integrand, x=s_nodes)
    return abs(np.linalg.det(alpha) - np.exp(-contour))


@dataclass
class HolonomyReport:
    samples: list
    z0: complex
    mode: str
    max_deviation_disc: float
    max_deviation_annulus: float
    holomorphy_residual: float

    def as_dict(self):
        return {"z0": [self.z0.real, self.z0.imag], "mode": self.mode,
                "max_deviation_disc": self.max_deviation_disc,
                "max_deviation_annulus": self.max_deviation_annulus,
                "holomorphy_residual": self.holomorphy_residual,
                "n_samples": len(self.samples)}


def _w_grids(chart, n_disc, n_annulus, phase_span=0.35):
    """Sample w in D and in the outer annulus of the w-disc near D's phase."""
    kd = max(int(np.ceil(np.sqrt(n_disc))), 1)
    disc = []
    for a in np.linspace(-0.7, 0.7, kd):
        for b in np.linspace(-0.7, 0.7, kd):
            if np.hypot(a, b) <= 0.75:
                disc.append(chart.d_center + chart.d_radius * complex(a, b))
    disc = disc[:max(n_disc, 1)]
    base_phase = np.angle(chart.d_center)
    radii = np.linspace(0.55 * chart.eps_w, 0.9 * chart.eps_w,
                        max(int(np.sqrt(n_annulus)), 1))
    phases = base_phase + np.linspace(-phase_span, phase_span,
                                      max(int(np.sqrt(n_annulus)), 1))
    ann = [rr * np.exp(1j * ph) for rr in radii for ph in phases]
    return disc, ann[:max(n_annulus, 1)]


def holonomy_map(field, psi_fn, chart, calib, n_w_disc=9, n_w_annulus=9,
                 r=None, n_steps=256, mode="literal", policy=DEFAULT_POLICY,
                 holomorphy_step=2e-3):
    """alpha(w) over the D-grid and the annulus grid, deviation from the
    identity, eigenvalues, and a finite-difference Cauchy-Riemann residual of
    w -> alpha(w).

    The triviality narrative (alpha == 1 on D, holomorphic in w, hence
    trivial throughout) is reported as indicator values, not as a proof."""
    if r is None:
        r = 0.5 * (chart.annulus_inner + chart.eps_z)
    disc_grid, ann_grid = _w_grids(chart, n_w_disc, n_w_annulus)
    samples = []
    devs_d, devs_a = [0.0], [0.0]
    eye = np.eye(field.rank)
    for tag, grid in (("disc", disc_grid), ("annulus", ann_grid)):
        for w in grid:
            alpha = transport(field, psi_fn, chart, calib, w, r, n_steps,
                              mode, policy)
            dev = float(np.linalg.norm(alpha - eye, ord=2))
            (devs_d if tag == "disc" else devs_a).append(dev)
            samples.append({"w": complex(w), "region": tag, "alpha": alpha,
                            "deviation": dev,
                            "eigenvalues": np.linalg.eigvals(alpha)})
    # Cauchy-Riemann residual of alpha in w at the D centre
    h = holomorphy_step
    w0 = chart.d_center
    al = {d: transport(field, psi_fn, chart, calib, w0 + d, r, n_steps, mode,
                       policy)
          for d in (h, -h, 1j * h, -1j * h)}
    dre = (al[h] - al[-h]) / (2.0 * h)
    dim = (al[1j * h] - al[-1j * h]) / (2.0 * h)
    holo = float(np.linalg.norm(0.5 * (dre + 1j * dim)))
    return HolonomyReport(samples=samples, z0=complex(r), mode=mode,
                          max_deviation_disc=float(max(devs_d)),
                          max_deviation_annulus=float(max(devs_a)),
                          holomorphy_residual=holo)


def extension_report(field, sol, psi_fn, chart, calib, cfg,
                     policy=DEFAULT_POLICY):
    """Aggregate feasibility record for the removable-singularity criteria.

    Condition (i): sup of the sufficiency residuals (e1, e2) over the
    flow-box interior (corollary mode drops the lambda term of e2).
    Condition (ii): regularity of the Higgs field and the connection with
    the divergence detector and the fitted-exponent threshold.
    Holonomy: max deviation of the transport matrices from the identity.
    Each condition reports PASS or FAIL against config thresholds; the
    record is a feasibility indicator, not a proof."""
    from .obstruction import obstruction_residuals
    from .regularity import c1alpha_report

    box = sol.box
    pts, _ = box.interior_points(margin=0.35 * box.r_d,
                                 n_u=cfg.grid.obstruction_u,
                                 n_s=cfg.grid.obstruction_s)
    e1s, e2s = [], []
    for p in pts:
        e1, e2 = obstruction_residuals(field, sol, p, policy, cfg.fd_step,
                                       corollary=cfg.corollary_mode)
        e1s.append(e1)
        e2s.append(e2)
    cond_i_sup = max(max(e1s), max(e2s)) if e1s else float("nan")
    cond_i = {"sup_e1": float(max(e1s)), "sup_e2": float(max(e2s)),
              "threshold": cfg.thresholds.condition_i,
              "corollary_mode": bool(cfg.corollary_mode),
              "status": "PASS" if cond_i_sup <= cfg.thresholds.condition_i
              else "FAIL"}

    rcfg = cfg.regularity
    cond_ii = {"status": "PASS", "sections": {}}
    for kind in ("higgs", "connection"):
        rep = c1alpha_report(kind, field, box.P0, alpha=rcfg.alpha,
                             inner=rcfg.inner_radius, outer=rcfg.outer_radius,
                             n_samples=rcfg.n_samples, halvings=rcfg.halvings,
                             divergence_factor=rcfg.divergence_factor,
                             policy=policy, fd_step=cfg.fd_step,
                             seed=cfg.seed)
        section = rep.as_dict()
        bad = rep.divergence_flag or (
            np.isfinite(rep.fitted_alpha)
            and rep.aggregated > 1e-6
            and rep.fitted_alpha < rcfg.alpha_threshold)
        section["status"] = "FAIL" if bad else "PASS"
        if bad:
            cond_ii["status"] = "FAIL"
        cond_ii["sections"][kind] = section

    hol = holonomy_map(field, psi_fn, chart, calib,
                       n_w_disc=cfg.chart.n_w_disc,
                       n_w_annulus=cfg.chart.n_w_annulus,
                       r=cfg.chart.loop_radius, n_steps=cfg.chart.n_steps,
                       mode=cfg.chart.mode, policy=policy)
    hol_dev = max(hol.max_deviation_disc, hol.max_deviation_annulus)
    holonomy = dict(hol.as_dict())
    holonomy["status"] = ("PASS" if hol_dev <= cfg.thresholds.holonomy_deviation
                          else "FAIL")

    statuses = [cond_i["status"], cond_ii["status"], holonomy["status"]]
    if any(s == "FAIL" for s in statuses):
        overall = "FAIL"
    elif all(s == "PASS" for s in statuses):
        overall = "PASS"
    else:
        overall = "INCONCLUSIVE"
    return {"condition_i": cond_i, "condition_ii": cond_ii,
            "holonomy": holonomy, "calibration": calib.as_dict(),
            "overall": overall}


def write_holonomy_csv(path, report):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["re_w", "im_w", "region", "deviation",
                    "holomorphy_residual", "eigenvalues"])
        for s in report.samples:
            eig = ";".join(f"{e.real!r}+{e.imag!r}j" for e in s["eigenvalues"])
            w.writerow([repr(s["w"].real), repr(s["w"].imag), s["region"],
                        repr(s["deviation"]),
                        repr(report.holomorphy_residual), eig])
