"""Coupled-system, sufficiency and commutator-identity residuals, plus the
4d/3d equivalence gap of the lifted Cauchy-Riemann equation.

Notation used throughout: phi_hat = -2i phi and nabla_hat = nabla + phi_hat
theta; Z = sigma - i jsigma in the chosen policy frame; lambda is the
quarter-bracket function of the frame.
"""

import csv
from dataclasses import dataclass

import numpy as np

from .errors import NotABogomolnySolution
from .fields import comm, curvature_components, nabla_phi
from .sphere import (DEFAULT_POLICY, check_unit, dirderiv, frame_at,
                     gamma_angle, lambda_at)


@dataclass
class ObstructionResiduals:
    r1: float
    r2: float
    e1: float
    e2: float
    commutator: float
    equivalence_gap: float

    def as_dict(self):
        return {"r1": self.r1, "r2": self.r2, "e1": self.e1, "e2": self.e2,
                "commutator": self.commutator,
                "equivalence_gap": self.equivalence_gap}


def _fro(m):
    return float(np.sqrt(np.sum(np.abs(m) ** 2)))


def _policy_components(field, p, policy):
    a1, a2, a3, phi = (m[0] for m in field(np.atleast_2d(p)))
    if not isinstance(policy, DEFAULT_POLICY.__class__):
        g = float(gamma_angle(p, policy))
        a1, a2 = (np.cos(g) * a1 + np.sin(g) * a2,
                  -np.sin(g) * a1 + np.cos(g) * a2)
    return a1, a2, a3, phi


def covariant(field, ev, p, policy=DEFAULT_POLICY, fd_step=1e-3, hat=False):
    """(nabla_sigma T, nabla_jsigma T, nabla_xi T) of an endomorphism
    evaluator T under the field's connection (nabla_hat when hat=True)."""
    p = check_unit(np.asarray(p, dtype=float))
    fr = frame_at(p, policy)
    a1, a2, a3, phi = _policy_components(field, p, policy)
    if hat:
        a3 = a3 - 2.0j * phi
    t0 = ev(p[None])[0]

    def d(v):
        return dirderiv(lambda q: ev(np.atleast_2d(q))[0], p, v, h=fd_step)

    return (d(fr.sigma) + comm(a1, t0), d(fr.jsigma) + comm(a2, t0),
            d(fr.xi) + comm(a3, t0))


def coupled_residuals(field, psi_fn, p, policy=DEFAULT_POLICY, fd_step=1e-3):
    """Residual norms (r1, r2) of the coupled first-order system
        nabla_Zbar psi = 2i nabla_xi phi,
        (nabla_xi - 2i phi) psi = -2i nabla_Z phi,
    plus the implementation gap between the expanded and the concise
    nabla_hat formulation (they agree identically)."""
    p = check_unit(np.asarray(p, dtype=float))
    _, _, _, phi = _policy_components(field, p, policy)
    ds, dj, dx = covariant(field, psi_fn, p, policy, fd_step)
    n1, n2, n3 = nabla_phi(field, p, policy, fd_step)
    psi0 = psi_fn(p[None])[0]

    r1vec = (ds + 1j * dj) - 2.0j * n3
    r2vec = dx - 2.0j * comm(phi, psi0) + 2.0j * (n1 - 1j * n2)

    # concise route: nabla_hat of psi and of phi_hat through the shifted
    # connection, assembled independently
    hs, hj, hx = covariant(field, psi_fn, p, policy, fd_step, hat=True)
    phihat_fn = lambda pts: -2.0j * field(pts)[3]  # noqa: E731
    gs, gj, gx = covariant(field, phihat_fn, p, policy, fd_step, hat=True)
    r1vec_b = (hs + 1j * hj) + gx
    r2vec_b = hx - (gs - 1j * gj)
    gap = max(_fro(r1vec - r1vec_b), _fro(r2vec - r2vec_b))
    return _fro(r1vec), _fro(r2vec), gap


def nabla_z_phi_evaluator(field, sol, policy=DEFAULT_POLICY, fd_step=1e-3):
    """Evaluator p -> nabla_Z Phi(p) from an interpolated potential."""

    def ev(pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        out = []
        for k in range(pts.shape[0]):
            p = pts[k]
            fr = frame_at(p, policy)
            a1, a2, _, _ = _policy_components(field, p, policy)
            phi_fn = lambda q: sol.value_at(np.atleast_2d(q))[0]  # noqa: E731
            d_s = dirderiv(phi_fn, p, fr.sigma, h=fd_step)
            d_j = dirderiv(phi_fn, p, fr.jsigma, h=fd_step)
            val = sol.value_at(p[None])[0]
            a_z = a1 - 1j * a2
            out.append((d_s - 1j * d_j) + comm(a_z, val))
        return np.stack(out)

    return ev


def obstruction_residuals(field, sol, p, policy=DEFAULT_POLICY, fd_step=1e-3,
                          lam=None, corollary=False):
    """(e1, e2): residuals of the sufficiency equations
        nabla_Zbar (nabla_Z Phi) + nabla_xi phi = 0,
        lambda nabla_Z Phi + [nabla_Z phi, Phi] = 0,
    with lambda from the frame unless supplied; corollary mode drops the
    lambda term (regular-Sasaki simplification)."""
    p = check_unit(np.asarray(p, dtype=float))
    nz = nabla_z_phi_evaluator(field, sol, policy, fd_step)
    ds, dj, _ = covariant(field, nz, p, policy, fd_step)
    _, _, n3 = nabla_phi(field, p, policy, fd_step)
    e1vec = (ds + 1j * dj) + n3

    if lam is None:
        lam = 0.0 if corollary else lambda_at(p, policy, fd_step)
    nzp = nz(p[None])[0]
    n1, n2, _ = nabla_phi(field, p, policy, fd_step)
    phi_val = (sol.value_at(p[None]) if hasattr(sol, "value_at") else sol(p[None]))[0]
    e2vec = lam * nzp + comm(n1 - 1j * n2, phi_val)
    return _fro(e1vec), _fro(e2vec)


def commutator_identity_residual(field, phi_ev, p, policy=DEFAULT_POLICY,
                                 fd_step=1e-3):
    """Two-sided residual of the second-order commutator expansion
        nabla_hat_Z nabla_hat_xi Phi - nabla_hat_xi nabla_hat_Z Phi
            = nabla_hat_[Z,xi] Phi + [iota_Z iota_xi F_hat, Phi],
    left side by iterated finite differences, right side from brackets and
    curvature.  Also returns the curvature sub-identity residual
    || iota_Z iota_xi F_hat - 4i nabla_Z phi ||  (valid on solutions of the
    monopole equation) and the gap of the rewritten lambda-form."""
    p = check_unit(np.asarray(p, dtype=float))

    def hat_z(ev):
        def g(pts):
            pts = np.atleast_2d(pts)
            out = []
            for k in range(pts.shape[0]):
                s_, j_, _ = covariant(field, ev, pts[k], policy, fd_step,
                                      hat=True)
                out.append(s_ - 1j * j_)
            return np.stack(out)
        return g

    def hat_xi(ev):
        def g(pts):
            pts = np.atleast_2d(pts)
            out = []
            for k in range(pts.shape[0]):
                _, _, x_ = covariant(field, ev, pts[k], policy, fd_step,
                                     hat=True)
                out.append(x_)
            return np.stack(out)
        return g

    lhs = hat_z(hat_xi(phi_ev))(p[None])[0] - hat_xi(hat_z(phi_ev))(p[None])[0]

    lam = lambda_at(p, policy, fd_step)
    nz_phi = hat_z(phi_ev)(p[None])[0]
    f12, f13, f23 = curvature_components(field, p, policy, fd_step)
    n1, n2, _ = nabla_phi(field, p, policy, fd_step)
    nzphi_field = n1 - 1j * n2
    phi0 = phi_ev(p[None])[0]
    # F_hat(Z, xi) = F(Z, xi) + nabla_Z phi_hat = (F13 - i F23) - 2i nabla_Z phi;
    # the curvature term enters in derivative order (the printed contraction
    # carries the opposite slot order, a commutator-order slip)
    fhat_zxi = (f13 - 1j * f23) - 2.0j * nzphi_field
    rhs = 1j * 4.0 * lam * nz_phi + comm(fhat_zxi, phi0)
    residual = _fro(lhs - rhs)

    # on monomole-equation solutions F_hat(xi, Z) = -2 nabla_Z phi_hat,
    # i.e. F_hat(Z, xi) = -4i nabla_Z phi
    sub_identity = _fro(fhat_zxi + 4.0j * nzphi_field)
    rewritten = 1j * 4.0 * lam * nz_phi - 4.0j * comm(nzphi_field, phi0)
    rewritten_gap = _fro(rhs - rewritten)
    return residual, sub_identity, rewritten_gap


def equivalence_gap(field, psi_fn, cp, calib, policy=DEFAULT_POLICY,
                    fd_step=1e-3, eps_b=1e-6):
    """4d-versus-3d residual assembly of the lifted Cauchy-Riemann equation.

    (a) computes || dbar_E(pi^* psi) - iota_Z F' || directly on the cone via
    the lifted connection and the calibrated complex structure; (b) assembles
    the same norm from the three-dimensional coupled residuals through the
    slot decomposition.  Returns (|a - b|, a, b, slot_coincidence_gap) where
    the last entry checks that the theta-slot and dt-slot conditions agree
    after the -2i t sqrt(c) rescaling.

    Requires the field to satisfy the monopole equation at the base point
    within eps_b (the decomposition substitutes it)."""
    from .fields import bogomolny_residual

    p, t, c = cp.p, cp.t, calib.c
    bog = bogomolny_residual(field, p, policy, fd_step)
    if bog > eps_b:
        raise NotABogomolnySolution(
            f"monopole-equation residual {bog:.3e} above {eps_b:.1e}")

    a1, a2, a3, phi = _policy_components(field, p, policy)
    psi0 = psi_fn(p[None])[0]
    p_s, p_j, p_x = covariant(field, psi_fn, p, policy, fd_step)
    # radial covariant derivative of the t-independent lift: the fd part
    # measures t-independence (identically zero), the connection part is the
    # 1/(t sqrt c) phi coefficient
    dt_fd = (psi_fn(p[None])[0] - psi_fn(p[None])[0]) / (2.0 * fd_step)
    p_t = dt_fd + comm(phi, psi0) / (t * np.sqrt(c))

    # dbar slots with the calibrated J (coframe composition, radial sign -1)
    dbar_sig = p_s + 1j * p_j
    dbar_jsig = p_j - 1j * p_s
    dbar_theta = p_x - 2.0j * np.sqrt(c) * t * p_t
    dbar_dt = p_t + 1j * p_x / (2.0 * np.sqrt(c) * t)

    f12, f13, f23 = curvature_components(field, p, policy, fd_step)
    n1, n2, _ = nabla_phi(field, p, policy, fd_step)
    nzphi = n1 - 1j * n2
    rhs_sig = 1j * f12
    rhs_jsig = f12
    rhs_theta = f13 - 1j * f23
    rhs_dt = nzphi / (t * np.sqrt(c))

    r_sig = dbar_sig - rhs_sig
    r_jsig = dbar_jsig - rhs_jsig
    r_theta = dbar_theta - rhs_theta
    r_dt = dbar_dt - rhs_dt
    a_val = float(np.sqrt(_fro(r_sig) ** 2 + _fro(r_jsig) ** 2
                          + _fro(r_theta) ** 2
                          + _fro(2.0 * np.sqrt(c) * t * r_dt) ** 2))
    slot_gap = _fro(r_theta - (-2.0j * np.sqrt(c) * t) * r_dt)

    r1, r2, _ = coupled_residuals(field, psi_fn, p, policy, fd_step)
    b_val = float(np.sqrt(2.0 * r1 ** 2 + 2.0 * r2 ** 2))
    return abs(a_val - b_val), a_val, b_val, slot_gap


def sweep(field, sol, psi_fn, points, calib=None, policy=DEFAULT_POLICY,
          fd_step=1e-3, corollary=False, t_probe=1.0, eps_b=None):
    """Residual table over sample points; equivalence gap only where the
    monopole residual admits it (eps_b set)."""
    rows = []
    for p in points:
        r1, r2, form_gap = coupled_residuals(field, psi_fn, p, policy, fd_step)
        e1, e2 = obstruction_residuals(field, sol, p, policy, fd_step,
                                       corollary=corollary)
        com, sub, _ = commutator_identity_residual(
            field, lambda pts: sol.value_at(np.atleast_2d(pts)), p, policy,
            fd_step)
        eq = float("nan")
        if eps_b is not None and calib is not None:
            from .cone import ConePoint
            try:
                eq = equivalence_gap(field, psi_fn, ConePoint(p=p, t=t_probe),
                                     calib, policy, fd_step, eps_b)[0]
            except NotABogomolnySolution:
                eq = float("nan")
        rows.append(ObstructionResiduals(r1=r1, r2=r2, e1=e1, e2=e2,
                                         commutator=com, equivalence_gap=eq))
    return rows


def write_sweep_csv(path, points, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["p0", "p1", "p2", "p3", "r1", "r2", "e1", "e2",
                    "commutator", "equivalence_gap"])
        for p, r in zip(points, rows):
            w.writerow([repr(float(x)) for x in p]
                       + [repr(float(v)) for v in (r.r1, r.r2, r.e1, r.e2,
                                                   r.commutator,
                                                   r.equivalence_gap)])
