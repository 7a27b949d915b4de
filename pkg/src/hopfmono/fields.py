"""Monopole field data (E, nabla, phi) in a global smooth gauge: builtins,
curvature, monopole-equation and anti-self-duality residuals, lifts to the
cone and gauge transformations.

A field evaluator is vectorised: points (N, 4) -> (A_sigma, A_jsigma, A_xi,
phi), each (N, n, n) complex, with connection components taken in the
left-invariant frame (policy frames are rotations of it and derived
quantities are rotated, not re-evaluated).
"""

import csv
import json
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .cone import Form4Components, hodge4, pullback_3form, wedge_dt
from .errors import (BadParams, EvalDomain, ReductionInconsistent,
                     SingularGauge)
from .sphere import (DEFAULT_POLICY, LMI, FormComponents, check_unit,
                     dirderiv, frame_at, gamma_angle, hodge3, hopf_point,
                     lie_bracket, qmul)

SU_TOL = 1e-10


@dataclass
class MonopoleField:
    """Connection + Higgs data in a fixed global gauge over its smooth domain."""

    rank: int
    kind: str
    eval_fn: object
    params: dict = field(default_factory=dict)
    excluded: list = field(default_factory=list)  # [(axis 3-vector, margin)]

    def __call__(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        self.require_domain(pts)
        return self.eval_fn(pts)

    def domain_mask(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        ok = np.ones(pts.shape[0], dtype=bool)
        if self.excluded:
            h = hopf_point(pts)
            for axis, margin in self.excluded:
                ang = np.arccos(np.clip(h @ np.asarray(axis), -1.0, 1.0))
                ok &= ang > margin
        return ok

    def require_domain(self, pts):
        if not np.all(self.domain_mask(pts)):
            raise EvalDomain(f"{self.kind} field evaluated inside its excluded set")

    def su_defect(self, pts):
        """Max deviation of (A, phi) from anti-hermitian trace-free."""
        comps = self(pts)
        worst = 0.0
        for m in comps:
            worst = max(worst, float(np.max(np.abs(m + np.conj(np.swapaxes(m, -1, -2))))))
            worst = max(worst, float(np.max(np.abs(np.trace(m, axis1=-2, axis2=-1)))))
        return worst


PAULI3 = np.diag([1.0 + 0.0j, -1.0 + 0.0j])
T_DIAG = 1j * PAULI3  # diag(i, -i)


def _broadcast_zero(pts, n):
    z = np.zeros((pts.shape[0], n, n), dtype=complex)
    return z


def make_builtin(kind, params=None):
    """Built-in example fields: zero | constant_higgs | hopf_invariant_abelian."""
    params = dict(params or {})
    if kind == "zero":
        n = int(params.pop("rank", 2))
        if params:
            raise BadParams(f"unknown zero-field params {sorted(params)}")

        def ev(pts):
            z = _broadcast_zero(pts, n)
            return z, z.copy(), z.copy(), z.copy()

        return MonopoleField(rank=n, kind="zero", eval_fn=ev)

    if kind == "constant_higgs":
        m = float(params.pop("m", 1.0))
        if params:
            raise BadParams(f"unknown constant_higgs params {sorted(params)}")

        def ev(pts):
            z = _broadcast_zero(pts, 2)
            phi = np.broadcast_to(m * T_DIAG, z.shape).copy()
            return z, z.copy(), z.copy(), phi

        return MonopoleField(rank=2, kind="constant_higgs", eval_fn=ev,
                             params={"m": m})

    if kind == "hopf_invariant_abelian":
        return _make_hopf_abelian(params)

    raise BadParams(f"unknown builtin field kind {kind!r}")


def solve_hopf_profiles(u0=1.0, h0=0.7, c0=0.0, n=4001, rho_min=0.05,
                        rho_max=None, tol=1e-5):
    """Profiles of the fibre-invariant reducible ansatz.

    Inserting phi = h(rho) T, A = (u(rho) theta + v(rho) a*) T into the
    monopole equation and equating frame components gives
        h' = 0,   u' = 0,   (v sin rho)' = -u sin rho,
    solved with classical RK4 on the rho-grid.  The integration constant c0
    selects the string structure: c0 = -u0 is regular at rho = 0, generic c0
    is singular at both exceptional fibres.
    """
    if rho_max is None:
        rho_max = np.pi - rho_min
    if not (0.0 < rho_min < rho_max < np.pi):
        raise BadParams("profile grid must sit strictly inside (0, pi)")
    rho = np.linspace(rho_min, rho_max, int(n))
    mid = int(n) // 2
    v = np.empty_like(rho)
    v[mid] = (u0 * np.cos(rho[mid]) + c0) / np.sin(rho[mid])

    def rhs(r, val):
        return -u0 - val / np.tan(r)

    for idx, step in ((range(mid, int(n) - 1), 1), (range(mid, 0, -1), -1)):
        for k in idx:
            h = (rho[k + step] - rho[k])
            y = v[k]
            k1 = rhs(rho[k], y)
            k2 = rhs(rho[k] + h / 2, y + h / 2 * k1)
            k3 = rhs(rho[k] + h / 2, y + h / 2 * k2)
            k4 = rhs(rho[k] + h, y + h * k3)
            v[k + step] = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)

    exact = (u0 * np.cos(rho) + c0) / np.sin(rho)
    ode_residual = float(np.max(np.abs(v - exact)))
    if ode_residual > tol:
        raise ReductionInconsistent(
            f"profile ODE residual {ode_residual:.3e} above {tol:.1e}")
    return {"rho": rho, "h": np.full_like(rho, h0), "u": np.full_like(rho, u0),
            "v": v, "ode_residual": ode_residual}


def _make_hopf_abelian(params):
    axis = np.asarray(params.pop("axis", (1.0, 0.0, 0.0)), dtype=float)
    axis = axis / np.linalg.norm(axis)
    margin = float(params.pop("margin", 0.05))
    table = params.pop("profile_table", None)
    if table is not None:
        rho = np.asarray(table["rho"], dtype=float)
        prof = {"rho": rho, "h": np.asarray(table["h"], dtype=float),
                "u": np.asarray(table["u"], dtype=float),
                "v": np.asarray(table["v"], dtype=float)}
        if params.pop("u0", None) is not None or params.pop("h0", None) is not None:
            raise BadParams("give either profile_table or scalar params, not both")
    else:
        prof = solve_hopf_profiles(u0=float(params.pop("u0", 1.0)),
                                   h0=float(params.pop("h0", 0.7)),
                                   c0=float(params.pop("c0", 0.0)),
                                   n=int(params.pop("n", 4001)),
                                   rho_min=margin * 0.5,
                                   tol=float(params.pop("tol", 1e-5)))
    if params:
        raise BadParams(f"unknown hopf_invariant_abelian params {sorted(params)}")
    h_s = CubicSpline(prof["rho"], prof["h"])
    u_s = CubicSpline(prof["rho"], prof["u"])
    v_s = CubicSpline(prof["rho"], prof["v"])

    def ev(pts):
        pts = np.atleast_2d(pts)
        hp = hopf_point(pts)
        cosr = np.clip(hp @ axis, -1.0, 1.0)
        rho = np.arccos(cosr)
        sinr = np.sin(rho)
        # radial horizontal lift: right-form coefficient t_away x h, since
        # dh(q * b) = 2 h x b rotates base images by a quarter turn
        away = (cosr[:, None] * hp - axis) / sinr[:, None]
        b_r = np.cross(away, hp)
        bq = np.concatenate([np.zeros((pts.shape[0], 1)), b_r], axis=1)
        e_r = qmul(pts, bq)
        e_a = e_r @ LMI.T
        fr = frame_at(pts)
        uval = u_s(rho)[:, None, None]
        vval = v_s(rho)[:, None, None]
        hval = h_s(rho)[:, None, None]
        t = T_DIAG[None, :, :]
        a_sig = vval * np.sum(e_a * fr.sigma, axis=1)[:, None, None] * t
        a_jsig = vval * np.sum(e_a * fr.jsigma, axis=1)[:, None, None] * t
        a_xi = uval * t
        phi = hval * t
        return a_sig, a_jsig, a_xi, phi

    fld = MonopoleField(rank=2, kind="hopf_invariant_abelian", eval_fn=ev,
                        params={"axis": axis.tolist(), "margin": margin},
                        excluded=[(axis, margin), (-axis, margin)])
    fld.params["ode_residual"] = float(prof.get("ode_residual", 0.0))
    fld.profiles = prof
    return fld


# ---------------------------------------------------------------------------
# random smooth test fields (seeded, low-degree polynomial coefficients)
# ---------------------------------------------------------------------------

def _poly_matrix_field(rng, n, amplitude, su):
    coef0 = amplitude * (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
    coef1 = amplitude * (rng.normal(size=(4, n, n)) + 1j * rng.normal(size=(4, n, n)))
    coef2 = amplitude * (rng.normal(size=(4, 4, n, n))
                         + 1j * rng.normal(size=(4, 4, n, n))) / 4.0

    def ev(pts):
        pts = np.atleast_2d(pts)
        m = (coef0[None] + np.einsum("pk,kij->pij", pts, coef1)
             + np.einsum("pk,pl,klij->pij", pts, pts, coef2))
        if su:
            m = 0.5 * (m - np.conj(np.swapaxes(m, -1, -2)))
            tr = np.trace(m, axis1=-2, axis2=-1) / n
            m = m - tr[:, None, None] * np.eye(n)
        return m

    return ev


def make_random_smooth_field(seed, rank=2, amplitude=0.3):
    """Random smooth su(n) field: generic non-solution test data."""
    rng = np.random.Generator(np.random.Philox(key=[seed, 7]))
    parts = [_poly_matrix_field(rng, rank, amplitude, su=True) for _ in range(4)]

    def ev(pts):
        pts = np.atleast_2d(pts)
        return tuple(p(pts) for p in parts)

    return MonopoleField(rank=rank, kind="random_smooth", eval_fn=ev,
                         params={"seed": seed, "amplitude": amplitude})


def make_random_endo_field(seed, rank=2, amplitude=0.3):
    """Random smooth gl(n) evaluator pts -> (N, n, n): generic Phi data."""
    rng = np.random.Generator(np.random.Philox(key=[seed, 11]))
    return _poly_matrix_field(rng, rank, amplitude, su=False)


def make_random_gauge(seed, rank=2, amplitude=0.4, unitary=True):
    """tau(p) = exp(S(p)) with S a random smooth matrix field."""
    rng = np.random.Generator(np.random.Philox(key=[seed, 13]))
    gen = _poly_matrix_field(rng, rank, amplitude, su=unitary)

    def tau(pts):
        from scipy.linalg import expm
        pts = np.atleast_2d(pts)
        s = gen(pts)
        return np.stack([expm(s[k]) for k in range(s.shape[0])])

    return tau


# ---------------------------------------------------------------------------
# covariant calculus
# ---------------------------------------------------------------------------

def _rotate_pair(x1, x2, gamma):
    c, s = np.cos(gamma), np.sin(gamma)
    return c * x1 + s * x2, -s * x1 + c * x2


def _component(field, which):
    idx = {"sigma": 0, "jsigma": 1, "xi": 2, "phi": 3}[which]

    def f(pts):
        return field(pts)[idx]

    return f


def curvature_components(field, p, policy=DEFAULT_POLICY, fd_step=1e-3,
                         richardson=False):
    """(F12, F13, F23) in the policy frame via the frame formula
    F(X, Y) = X(A_Y) - Y(A_X) - A_[X,Y] + [A_X, A_Y]
    with exact invariant brackets; policy components are frame rotations of
    the invariant ones."""
    p = check_unit(np.asarray(p, dtype=float))
    fr = frame_at(p)
    a1f, a2f, a3f = (_component(field, w) for w in ("sigma", "jsigma", "xi"))

    def d(fn, v):
        return dirderiv(lambda q: fn(np.atleast_2d(q))[0], p, v, h=fd_step,
                        richardson=richardson)

    a1, a2, a3, _ = (m[0] for m in field(p[None]))
    # [sigma, jsigma] = -2 xi ; [sigma, xi] = 2 jsigma ; [jsigma, xi] = -2 sigma
    f12 = d(a2f, fr.sigma) - d(a1f, fr.jsigma) + 2.0 * a3 + comm(a1, a2)
    f13 = d(a3f, fr.sigma) - d(a1f, fr.xi) - 2.0 * a2 + comm(a1, a3)
    f23 = d(a3f, fr.jsigma) - d(a2f, fr.xi) + 2.0 * a1 + comm(a2, a3)
    if isinstance(policy, DEFAULT_POLICY.__class__):
        return f12, f13, f23
    g = float(gamma_angle(p, policy))
    f13r, f23r = _rotate_pair(f13, f23, g)
    return f12, f13r, f23r


def comm(a, b):
    return a @ b - b @ a


def nabla_phi(field, p, policy=DEFAULT_POLICY, fd_step=1e-3, richardson=False):
    """(nabla_sigma phi, nabla_jsigma phi, nabla_xi phi) in the policy frame."""
    p = check_unit(np.asarray(p, dtype=float))
    fr = frame_at(p)
    phif = _component(field, "phi")

    def d(v):
        return dirderiv(lambda q: phif(np.atleast_2d(q))[0], p, v, h=fd_step,
                        richardson=richardson)

    a1, a2, a3, phi = (m[0] for m in field(p[None]))
    n1 = d(fr.sigma) + comm(a1, phi)
    n2 = d(fr.jsigma) + comm(a2, phi)
    n3 = d(fr.xi) + comm(a3, phi)
    if isinstance(policy, DEFAULT_POLICY.__class__):
        return n1, n2, n3
    g = float(gamma_angle(p, policy))
    n1r, n2r = _rotate_pair(n1, n2, g)
    return n1r, n2r, n3


def bogomolny_defect(field, p, policy=DEFAULT_POLICY, fd_step=1e-3,
                     richardson=False):
    """nabla phi - (1/2) star F as a matrix-valued 1-form (3 slots)."""
    f12, f13, f23 = curvature_components(field, p, policy, fd_step, richardson)
    n1, n2, n3 = nabla_phi(field, p, policy, fd_step, richardson)
    fform = FormComponents(2, np.stack([f12, f13, f23]))
    half_star = hodge3(fform).comps * 0.5
    return np.stack([n1, n2, n3]) - half_star


def bogomolny_residual(field, p, policy=DEFAULT_POLICY, fd_step=1e-3,
                       richardson=False):
    """|| nabla phi - (1/2) star F || at p (Frobenius over slots)."""
    g = bogomolny_defect(field, p, policy, fd_step, richardson)
    return float(np.sqrt(np.sum(np.abs(g) ** 2)))


@dataclass
class LiftedSample:
    """Lifted connection/curvature data at a cone point."""

    conn_t: np.ndarray      # dt-slot coefficient of the lifted connection
    f4: Form4Components     # curvature of the lifted connection
    f3: np.ndarray          # (F12, F13, F23) at the base point
    dphi: np.ndarray        # (3, n, n) covariant derivative of phi


def lift_curvature(field, cp, calib, policy=DEFAULT_POLICY, fd_step=1e-3,
                   richardson=False):
    """F of the lifted connection nabla' = d + pi^*A + (1/(t sqrt c)) phi dt."""
    t, c = cp.t, calib.c
    f12, f13, f23 = curvature_components(field, cp.p, policy, fd_step, richardson)
    n = nabla_phi(field, cp.p, policy, fd_step, richardson)
    _, _, _, phi = (m[0] for m in field(cp.p[None]))
    f3 = np.stack([f12, f13, f23])
    coef = 1.0 / (t * np.sqrt(c))
    f4 = Form4Components(pullback_3form(FormComponents(2, f3)).comps
                         + coef * wedge_dt(FormComponents(1, np.stack(n)), t, calib).comps)
    return LiftedSample(conn_t=coef * phi, f4=f4, f3=f3, dphi=np.stack(n))


def asd_residual(field, cp, calib, policy=DEFAULT_POLICY, fd_step=1e-3,
                 richardson=False):
    """|| F' + star' F' || at the cone point, orthonormal components."""
    lift = lift_curvature(field, cp, calib, policy, fd_step, richardson)
    starred = hodge4(lift.f4, cp.t, calib)
    return Form4Components(lift.f4.comps + starred.comps).norm(cp.t)


def asd_exact_identity_gap(field, cp, calib, policy=DEFAULT_POLICY,
                           fd_step=1e-3, richardson=False):
    """|| F' - (pi^*F - star'(pi^*F)) ||: vanishes exactly on solutions."""
    lift = lift_curvature(field, cp, calib, policy, fd_step, richardson)
    pf = pullback_3form(FormComponents(2, lift.f3))
    rhs = pf.comps - hodge4(pf, cp.t, calib).comps
    return Form4Components(lift.f4.comps - rhs).norm(cp.t)


def gauge_transform(field, tau_fn, fd_step=1e-3, det_floor=1e-8):
    """A -> tau^-1 A tau + tau^-1 d tau (per frame slot), phi -> tau^-1 phi tau."""

    def ev(pts):
        pts = np.atleast_2d(pts)
        a1, a2, a3, phi = field(pts)
        tau = tau_fn(pts)
        det = np.linalg.det(tau)
        if np.any(np.abs(det) < det_floor):
            raise SingularGauge("gauge determinant below floor")
        inv = np.linalg.inv(tau)
        fr = frame_at(pts)
        out = []
        for slot, v in (("sigma", fr.sigma), ("jsigma", fr.jsigma), ("xi", fr.xi)):
            dtau = np.stack([
                dirderiv(lambda q: tau_fn(np.atleast_2d(q))[0], pts[k], v[k],
                         h=fd_step)
                for k in range(pts.shape[0])])
            a = (a1, a2, a3)[("sigma", "jsigma", "xi").index(slot)]
            out.append(inv @ a @ tau + inv @ dtau)
        out.append(inv @ phi @ tau)
        return tuple(out)

    return MonopoleField(rank=field.rank, kind=f"{field.kind}+gauge", eval_fn=ev,
                         params=dict(field.params), excluded=list(field.excluded))


# ---------------------------------------------------------------------------
# field spec files
# ---------------------------------------------------------------------------

def load_field_spec(path):
    """JSON field spec: {kind, rank?, params?, profile_table? | profile_csv?}."""
    with open(path) as fh:
        spec = json.load(fh)
    kind = spec.get("kind")
    params = dict(spec.get("params", {}))
    if "profile_csv" in spec:
        params["profile_table"] = read_profile_csv(spec["profile_csv"])
    elif "profile_table" in spec:
        rows = np.asarray(spec["profile_table"], dtype=float)
        params["profile_table"] = {"rho": rows[:, 0], "h": rows[:, 1],
                                   "u": rows[:, 2], "v": rows[:, 3]}
    if kind == "zero" and "rank" in spec:
        params["rank"] = spec["rank"]
    return make_builtin(kind, params)


def read_profile_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise BadParams(f"empty profile table {path}")
    cols = {k: np.array([float(r[k]) for r in rows]) for k in ("rho", "h", "u", "v")}
    return cols


def write_profile_csv(path, prof):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["rho", "h", "u", "v"])
        for k in range(len(prof["rho"])):
            w.writerow([repr(float(prof[c][k])) for c in ("rho", "h", "u", "v")])
