"""Round unit 3-sphere as unit quaternions: Reeb flow, frames, brackets,
Levi-Civita connection, contact identities and the 3-dimensional Hodge star.

Conventions (fixed once, consumed everywhere):
  xi(q) = i*q, sigma(q) = j*q, jsigma(q) = k*q  (quaternion left products),
  j(v) = i*v on the contact distribution, {sigma, jsigma, xi} positive.
Directional derivatives are central differences along great circles, which
coincide with the frame-field flows for the invariant fields.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .errors import BadDegree, FrameDegenerate, NonUnitPoint, PolicyChartMiss, StepFailure

UNIT_TOL = 1e-10

# left-multiplication matrices: (LM @ q) == unit * q
LMI = np.array([[0., -1., 0., 0.],
                [1., 0., 0., 0.],
                [0., 0., 0., -1.],
                [0., 0., 1., 0.]])
LMJ = np.array([[0., 0., -1., 0.],
                [0., 0., 0., 1.],
                [1., 0., 0., 0.],
                [0., -1., 0., 0.]])
LMK = np.array([[0., 0., 0., -1.],
                [0., 0., -1., 0.],
                [0., 1., 0., 0.],
                [1., 0., 0., 0.]])


def qmul(a, b):
    """Quaternion product, vectorised over leading axes."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    w1, x1, y1, z1 = np.moveaxis(a, -1, 0)
    w2, x2, y2, z2 = np.moveaxis(b, -1, 0)
    return np.stack([
        w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
        w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
        w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
        w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
    ], axis=-1)


def qconj(q):
    q = np.asarray(q, dtype=float)
    return q * np.array([1.0, -1.0, -1.0, -1.0])


def to_c2(q):
    """(a,b,c,d) -> (a+bi, c+di): the q = z + w j identification."""
    q = np.asarray(q)
    return np.stack([q[..., 0] + 1j * q[..., 1], q[..., 2] + 1j * q[..., 3]], axis=-1)


def from_c2(x):
    x = np.asarray(x)
    return np.stack([x[..., 0].real, x[..., 0].imag,
                     x[..., 1].real, x[..., 1].imag], axis=-1)


def check_unit(q, tol=UNIT_TOL):
    q = np.asarray(q, dtype=float)
    err = np.abs(np.sum(q * q, axis=-1) - 1.0)
    if np.any(err > tol):
        raise NonUnitPoint(f"base point off the unit sphere by {float(np.max(err)):.3e}")
    return q


def project_tangent(u, q):
    """Orthogonal projection of an ambient vector onto T_q S^3."""
    u = np.asarray(u, dtype=float)
    q = np.asarray(q, dtype=float)
    return u - np.sum(u * q, axis=-1, keepdims=True) * q


def hopf_point(q):
    """Hopf projection q -> conj(q) * i * q, returned as a 3-vector in Im(H)."""
    i_unit = np.broadcast_to(np.array([0.0, 1.0, 0.0, 0.0]), np.shape(q))
    h = qmul(qconj(q), qmul(i_unit, q))
    return h[..., 1:]


def geodesic_distance(p, q):
    p = check_unit(p)
    q = check_unit(q)
    return np.arccos(np.clip(np.sum(p * q, axis=-1), -1.0, 1.0))


# ---------------------------------------------------------------------------
# frame policies
# ---------------------------------------------------------------------------

class LeftInvariant:
    """Globally defined frame sigma = j q, jsigma = k q, xi = i q."""

    def __repr__(self):
        return "LeftInvariant()"


@dataclass
class FlowInvariantLift:
    """Reeb-flow invariant frame on a chart excluding one Hopf fibre.

    The transverse direction is the horizontal lift of the parallel transport
    of a reference base direction along great circles of the Hopf base; the
    lift is equivariant under the Reeb flow, so [sigma, xi] = 0 on the chart.
    The chart excludes the fibre over the antipode of the projected basepoint.
    """

    basepoint: np.ndarray
    reference: np.ndarray | None = None
    chart_margin: float = 1e-9
    _h0: np.ndarray = field(init=False, repr=False)
    _b0: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        q0 = check_unit(np.asarray(self.basepoint, dtype=float))
        self.basepoint = q0
        if self.reference is None:
            ref = LMJ @ q0
        else:
            ref = project_tangent(np.asarray(self.reference, dtype=float), q0)
            xi0 = LMI @ q0
            ref = ref - np.dot(ref, xi0) * xi0
            nrm = np.linalg.norm(ref)
            if nrm < 1e-8:
                raise FrameDegenerate("reference direction parallel to the Reeb field")
            ref = ref / nrm
        self.reference = ref
        self._h0 = hopf_point(q0)
        # right-form coefficient of the reference: b0 = conj(q0) * ref
        self._b0 = qmul(qconj(q0), ref)[1:]


DEFAULT_POLICY = LeftInvariant()


def s2_parallel_transport(b0, h0, h, margin=1e-9):
    """Parallel transport of the tangent b0 at h0 to h along minimizing arcs.

    Undefined at the antipode of h0 (the excluded locus of the chart).
    """
    h = np.asarray(h, dtype=float)
    b0 = np.asarray(b0, dtype=float)
    h0 = np.asarray(h0, dtype=float)
    c = 1.0 + np.tensordot(h, h0, axes=([-1], [0]))
    if np.any(c < margin):
        raise PolicyChartMiss("point on (or too close to) the excluded Hopf fibre")
    m = np.broadcast_to(h0, h.shape) + h
    proj = np.sum(m * b0, axis=-1, keepdims=True) / c[..., None]
    return np.broadcast_to(b0, h.shape) - proj * m + 2.0 * float(np.dot(h0, b0)) * h


@dataclass
class OrthoFrame:
    sigma: np.ndarray
    jsigma: np.ndarray
    xi: np.ndarray
    policy: object


def frame_at(p, policy=DEFAULT_POLICY):
    """Orthonormal oriented frame {sigma, jsigma, xi} at p under the policy."""
    p = check_unit(p)
    xi = p @ LMI.T
    if isinstance(policy, LeftInvariant):
        sigma = p @ LMJ.T
        jsigma = p @ LMK.T
    elif isinstance(policy, FlowInvariantLift):
        h = hopf_point(p)
        b = s2_parallel_transport(policy._b0, policy._h0, h, policy.chart_margin)
        bq = np.concatenate([np.zeros(np.shape(b)[:-1] + (1,)), b], axis=-1)
        sigma = qmul(p, bq)
        jsigma = sigma @ LMI.T
    else:
        raise FrameDegenerate(f"unknown frame policy {policy!r}")
    return OrthoFrame(sigma=sigma, jsigma=jsigma, xi=xi, policy=policy)


def gamma_angle(p, policy):
    """Rotation angle of the policy frame relative to the left-invariant one."""
    fr = frame_at(p, policy)
    base = frame_at(p, DEFAULT_POLICY)
    cosg = np.sum(fr.sigma * base.sigma, axis=-1)
    sing = np.sum(fr.sigma * base.jsigma, axis=-1)
    return np.arctan2(sing, cosg)


_IM_UNITS = {"xi": np.array([0.0, 1.0, 0.0, 0.0]),
             "sigma": np.array([0.0, 0.0, 1.0, 0.0]),
             "jsigma": np.array([0.0, 0.0, 0.0, 1.0])}


def flow(p, gen, s, policy=DEFAULT_POLICY, rtol=1e-11, atol=1e-13):
    """Time-s flow image of p under a frame field or a tangent-field callable.

    Invariant generators flow by the exact exponential exp(s a) * q; smooth
    non-invariant fields are integrated with adaptive stepping.
    """
    p = check_unit(p)
    if isinstance(gen, str):
        if isinstance(policy, LeftInvariant) or gen == "xi":
            a = _IM_UNITS[gen]
            e = np.concatenate([[np.cos(s)], np.sin(s) * a[1:]])
            return qmul(np.broadcast_to(e, np.shape(p)), p)
        fld = lambda q: getattr(frame_at(q, policy), gen)  # noqa: E731
    else:
        fld = gen
    if s == 0.0:
        return p.copy()

    def rhs(_t, q):
        qn = q / np.linalg.norm(q)
        return project_tangent(fld(qn), qn)

    sol = solve_ivp(rhs, (0.0, s), np.asarray(p, dtype=float),
                    rtol=rtol, atol=atol)
    if not sol.success:
        raise StepFailure(f"flow integration failed: {sol.message}")
    out = sol.y[:, -1]
    return out / np.linalg.norm(out)


def dirderiv(fn, p, v, h=1e-3, richardson=False):
    """Central difference of fn along the great circle through p with speed v.

    The derivative is taken with respect to the flow parameter of v itself
    (chain rule by |v|); v = 0 returns zero.
    """
    p = np.asarray(p, dtype=float)
    v = np.asarray(v, dtype=float)
    nrm = np.linalg.norm(v, axis=-1, keepdims=True)
    scal = nrm.reshape(nrm.shape[:-1])
    if np.all(scal == 0.0):
        return np.zeros_like(np.asarray(fn(p)))
    vhat = np.where(nrm > 0, v / np.where(nrm == 0.0, 1.0, nrm), 0.0)

    def d(step):
        cp, sp = np.cos(step), np.sin(step)
        return (np.asarray(fn(cp * p + sp * vhat))
                - np.asarray(fn(cp * p - sp * vhat))) / (2.0 * step)

    est = (4.0 * d(h / 2.0) - d(h)) / 3.0 if richardson else d(h)
    return est * _expand(scal, np.shape(est))


def _expand(scal, shape):
    scal = np.asarray(scal)
    extra = len(shape) - scal.ndim
    return scal.reshape(scal.shape + (1,) * extra) if extra > 0 else scal


_BRACKETS = {("sigma", "jsigma"): ("xi", -2.0),
             ("sigma", "xi"): ("jsigma", 2.0),
             ("jsigma", "xi"): ("sigma", -2.0)}


def _resolve_field(name_or_fn, policy):
    if callable(name_or_fn):
        return name_or_fn
    return lambda q: getattr(frame_at(q, policy), name_or_fn)


def lie_bracket(field_a, field_b, p, policy=DEFAULT_POLICY, mode="exact",
                fd_step=1e-3, richardson=False):
    """[A, B] at p; exact structure constants for the invariant frame fields,
    finite-difference commutator otherwise (also available as oracle mode)."""
    p = check_unit(p)
    names = isinstance(field_a, str) and isinstance(field_b, str)
    if mode == "exact" and names and isinstance(policy, LeftInvariant):
        if field_a == field_b:
            return np.zeros(np.shape(p))
        fr = frame_at(p, policy)
        key, sign = (field_a, field_b), 1.0
        if key not in _BRACKETS:
            key, sign = (field_b, field_a), -1.0
        target, coef = _BRACKETS[key]
        return sign * coef * getattr(fr, target)
    fa = _resolve_field(field_a, policy)
    fb = _resolve_field(field_b, policy)
    dab = dirderiv(fb, p, fa(p), h=fd_step, richardson=richardson)
    dba = dirderiv(fa, p, fb(p), h=fd_step, richardson=richardson)
    return project_tangent(dab - dba, p)


class RoundMetric:
    """g(u, v) at p: the ambient restriction."""

    def __call__(self, p, u, v):
        return np.sum(np.asarray(u) * np.asarray(v), axis=-1)


@dataclass
class PerturbedMetric:
    """Test hook: g + eps * s(p) <u,e><v,e>, deliberately breaking the
    Killing/contact symmetries so the residual detectors have a target."""

    eps: float = 1e-2
    axis: np.ndarray = field(default_factory=lambda: np.array([0.3, 0.9, -0.2, 0.1]))

    def __call__(self, p, u, v):
        e = self.axis / np.linalg.norm(self.axis)
        s = 1.0 + np.sum(np.asarray(p) * e, axis=-1)
        return (np.sum(np.asarray(u) * np.asarray(v), axis=-1)
                + self.eps * s * np.sum(np.asarray(u) * e, axis=-1)
                * np.sum(np.asarray(v) * e, axis=-1))


def levi_civita(field_a, field_b, p, policy=DEFAULT_POLICY, mode="exact",
                fd_step=1e-3, richardson=False, metric=None):
    """D_A B at p: half-bracket for invariant frame fields, projected ambient
    derivative otherwise, Koszul formula for generic metrics (oracle mode)."""
    p = check_unit(p)
    names = isinstance(field_a, str) and isinstance(field_b, str)
    if metric is not None or mode == "koszul":
        return _koszul(field_a, field_b, p, policy, fd_step, metric)
    if mode == "exact" and names and isinstance(policy, LeftInvariant):
        return 0.5 * lie_bracket(field_a, field_b, p, policy, mode="exact")
    fa = _resolve_field(field_a, policy)
    fb = _resolve_field(field_b, policy)
    return project_tangent(dirderiv(fb, p, fa(p), h=fd_step,
                                    richardson=richardson), p)


def _koszul(field_a, field_b, p, policy, fd_step, metric):
    g = metric if metric is not None else RoundMetric()
    fa = _resolve_field(field_a, policy)
    fb = _resolve_field(field_b, policy)
    fr = frame_at(p, policy)
    names = ("sigma", "jsigma", "xi")
    basis = {"sigma": fr.sigma, "jsigma": fr.jsigma, "xi": fr.xi}
    flds = {n: _resolve_field(n, policy) for n in names}
    gram = np.array([[g(p, basis[m], basis[n]) for n in names] for m in names])
    rhs = np.zeros(3)
    for k, w in enumerate(names):
        fw = flds[w]
        t1 = dirderiv(lambda q: g(q, fb(q), fw(q)), p, fa(p), h=fd_step)
        t2 = dirderiv(lambda q: g(q, fa(q), fw(q)), p, fb(p), h=fd_step)
        t3 = dirderiv(lambda q: g(q, fa(q), fb(q)), p, fw(p), h=fd_step)
        br_ab = lie_bracket(field_a, field_b, p, policy, fd_step=fd_step)
        br_aw = lie_bracket(field_a, w, p, policy, fd_step=fd_step)
        br_bw = lie_bracket(field_b, w, p, policy, fd_step=fd_step)
        rhs[k] = 0.5 * (t1 + t2 - t3 + g(p, br_ab, basis[w])
                        - g(p, br_aw, fb(p)) - g(p, br_bw, fa(p)))
    coef = np.linalg.solve(gram, rhs)
    return sum(coef[k] * basis[w] for k, w in enumerate(names))


def beta_operator(p, policy=DEFAULT_POLICY, fd_step=1e-3, richardson=True,
                  metric=None):
    """Matrix of v -> D_v xi on the contact plane in the (sigma, jsigma) basis."""
    p = check_unit(p)
    fr = frame_at(p, policy)
    xi_field = lambda q: q @ LMI.T  # noqa: E731
    cols = []
    for name, v in (("sigma", fr.sigma), ("jsigma", fr.jsigma)):
        if metric is None:
            dv = project_tangent(dirderiv(xi_field, p, v, h=fd_step,
                                          richardson=richardson), p)
        else:
            dv = levi_civita(name, "xi", p, policy, mode="koszul",
                             fd_step=fd_step, metric=metric)
        cols.append([float(np.dot(dv, fr.sigma)), float(np.dot(dv, fr.jsigma))])
    return np.array(cols).T


def ricci_xi(p, policy=DEFAULT_POLICY, fd_step=1e-3, metric=None):
    """f defined by the trace identity -2 f = trace(beta^2) + xi(trace beta)."""
    p = check_unit(p)
    beta = beta_operator(p, policy, fd_step=fd_step, metric=metric)
    tr_b2 = float(np.trace(beta @ beta))
    fr = frame_at(p, policy)

    def tr(q):
        return np.trace(beta_operator(q, policy, fd_step=fd_step, metric=metric))

    xi_tr = float(dirderiv(tr, p, fr.xi, h=fd_step))
    return -0.5 * (tr_b2 + xi_tr)


def ricci_standard(p):
    """Ricci(xi, xi) of the round metric via curvature of the invariant frame.

    Reported alongside the trace-identity value of f so the normalisation gap
    between the two conventions stays visible; on the unit sphere this is 2.
    """
    p = check_unit(p)
    fr = frame_at(p)
    names = ("sigma", "jsigma", "xi")
    total = 0.0
    for e in ("sigma", "jsigma"):
        # R(e, xi) xi = D_e D_xi xi - D_xi D_e xi - D_[e,xi] xi
        de_xi = levi_civita(e, "xi", p)
        comps = {n: float(np.dot(de_xi, getattr(fr, n))) for n in names}
        dxi_de_xi = sum(comps[n] * levi_civita("xi", n, p) for n in names)
        br = lie_bracket(e, "xi", p)
        brc = {n: float(np.dot(br, getattr(fr, n))) for n in names}
        dbr_xi = sum(brc[n] * levi_civita(n, "xi", p) for n in names)
        r = -dxi_de_xi - dbr_xi  # D_xi xi = 0 kills the first term
        total += float(np.dot(r, getattr(fr, e)))
    return total


@dataclass
class GeometryResiduals:
    geodesibility: float
    killing: float
    contact_identity: float
    integrability: float
    divergence: float

    def as_dict(self):
        return {"geodesibility": self.geodesibility, "killing": self.killing,
                "contact_identity": self.contact_identity,
                "integrability": self.integrability,
                "divergence": self.divergence}

    def max(self):
        return max(self.as_dict().values())


def _dtheta_fd(p, policy, fd_step, pair, metric=None):
    """d theta (X, Y) via fd scalar derivatives and fd brackets (measured)."""
    g = metric if metric is not None else RoundMetric()
    xa, xb = pair
    fa = _resolve_field(xa, policy)
    fb = _resolve_field(xb, policy)

    def reeb(q):
        xi = frame_at(q, policy).xi
        if metric is not None:
            xi = xi / np.sqrt(g(q, xi, xi))
        return xi

    t1 = dirderiv(lambda q: g(q, reeb(q), fb(q)), p, fa(p), h=fd_step)
    t2 = dirderiv(lambda q: g(q, reeb(q), fa(q)), p, fb(p), h=fd_step)
    br = lie_bracket(xa, xb, p, policy, mode="fd", fd_step=fd_step)
    return float(t1 - t2 - g(p, reeb(p), br))


def contact_residuals(p, policy=DEFAULT_POLICY, fd_step=1e-3, metric=None,
                      f_value=None):
    """Pointwise residuals of the contact-geometry hypothesis chain.

    Every quantity is measured with finite differences (no structure-constant
    shortcuts), so the values carry the O(h^2) signature probed by the
    step-halving convergence test.
    """
    p = check_unit(p)
    fr = frame_at(p, policy)
    g = metric if metric is not None else RoundMetric()

    beta = beta_operator(p, policy, fd_step=fd_step, richardson=False,
                         metric=metric)
    divergence = abs(float(np.trace(beta)))
    killing = float(np.linalg.norm(beta + beta.T - np.trace(beta) * np.eye(2)))

    geo1 = _dtheta_fd(p, policy, fd_step, ("xi", "sigma"), metric)
    geo2 = _dtheta_fd(p, policy, fd_step, ("xi", "jsigma"), metric)
    geodesibility = float(np.hypot(geo1, geo2))

    if f_value is None:
        f_value = ricci_xi(p, policy, fd_step=fd_step, metric=metric)
    dtheta_12 = _dtheta_fd(p, policy, fd_step, ("sigma", "jsigma"), metric)
    omega_12 = float(g(p, fr.jsigma, fr.jsigma))
    c1 = abs(dtheta_12 - 2.0 * np.sqrt(max(f_value, 0.0)) * omega_12)
    skew = beta - beta.T
    c2 = abs(dtheta_12 - skew[1, 0])
    contact_identity = float(max(c1, c2))

    br1 = lie_bracket("xi", "jsigma", p, policy, mode="fd", fd_step=fd_step)
    br2 = lie_bracket("xi", "sigma", p, policy, mode="fd", fd_step=fd_step)
    integrability = float(np.linalg.norm(br1 - br2 @ LMI.T))

    return GeometryResiduals(geodesibility=geodesibility, killing=killing,
                             contact_identity=contact_identity,
                             integrability=integrability, divergence=divergence)


def lambda_at(p, policy=DEFAULT_POLICY, fd_step=1e-3):
    """lambda = (1/4) g([sigma, xi], jsigma) under the policy frame."""
    return lambda_residuals(p, policy, fd_step)[0]


def lambda_residuals(p, policy=DEFAULT_POLICY, fd_step=1e-3):
    """(lambda, |[sigma,xi] - 4 lam jsigma|, |[Z,xi] - i 4 lam Z|, orth gap)."""
    p = check_unit(p)
    fr = frame_at(p, policy)
    mode = "exact" if isinstance(policy, LeftInvariant) else "fd"
    br = lie_bracket("sigma", "xi", p, policy, mode=mode, fd_step=fd_step,
                     richardson=True)
    brj = lie_bracket("jsigma", "xi", p, policy, mode=mode, fd_step=fd_step,
                      richardson=True)
    lam = 0.25 * float(np.dot(br, fr.jsigma))
    res_real = float(np.linalg.norm(br - 4.0 * lam * fr.jsigma))
    z = fr.sigma - 1j * fr.jsigma
    brz = br - 1j * brj
    res_z = float(np.linalg.norm(brz - 1j * (4.0 * lam) * z))
    orth = max(abs(float(np.dot(br, fr.xi))), abs(float(np.dot(br, fr.sigma))))
    return lam, res_real, res_z, orth


def geometry_residual_sweep(pts, policy=DEFAULT_POLICY, fd_step=1e-3,
                            f_value=1.0):
    """Vectorised measured-mode residuals at a batch of points.

    Returns a dict of arrays: the five GeometryResiduals entries plus the
    frame gram defect and orientation determinant defect."""
    pts = check_unit(np.atleast_2d(np.asarray(pts, dtype=float)))
    fr = frame_at(pts, policy)

    def g(u, v):
        return np.einsum("...k,...k->...", u, v)

    ximap = lambda q: q @ LMI.T  # noqa: E731

    d_sig = project_tangent(dirderiv(ximap, pts, fr.sigma, h=fd_step), pts)
    d_jsig = project_tangent(dirderiv(ximap, pts, fr.jsigma, h=fd_step), pts)
    b11, b21 = g(d_sig, fr.sigma), g(d_sig, fr.jsigma)
    b12, b22 = g(d_jsig, fr.sigma), g(d_jsig, fr.jsigma)
    tr = b11 + b22
    divergence = np.abs(tr)
    killing = np.sqrt((2 * b11 - tr) ** 2 + (2 * b22 - tr) ** 2
                      + 2.0 * (b12 + b21) ** 2)

    def fld(name):
        return lambda q: getattr(frame_at(q, policy), name)

    def bracket(a, b):
        fa, fb = fld(a), fld(b)
        return project_tangent(
            dirderiv(fb, pts, fa(pts), h=fd_step)
            - dirderiv(fa, pts, fb(pts), h=fd_step), pts)

    def dtheta(a, b, br_ab):
        fa, fb = fld(a), fld(b)
        t1 = dirderiv(lambda q: g(frame_at(q, policy).xi, fb(q)), pts,
                      fa(pts), h=fd_step)
        t2 = dirderiv(lambda q: g(frame_at(q, policy).xi, fa(q)), pts,
                      fb(pts), h=fd_step)
        return t1 - t2 - g(fr.xi, br_ab)

    br_xs = bracket("xi", "sigma")
    br_xj = bracket("xi", "jsigma")
    br_sj = bracket("sigma", "jsigma")
    geod = np.hypot(dtheta("xi", "sigma", br_xs), dtheta("xi", "jsigma", br_xj))
    d12 = dtheta("sigma", "jsigma", br_sj)
    contact = np.maximum(np.abs(d12 - 2.0 * np.sqrt(f_value)),
                         np.abs(d12 - (b21 - b12)))
    integrability = np.linalg.norm(br_xj - br_xs @ LMI.T, axis=-1)

    gram = np.stack([fr.sigma, fr.jsigma, fr.xi], axis=-2)
    gram_defect = np.max(np.abs(np.einsum("...ik,...jk->...ij", gram, gram)
                                - np.eye(3)), axis=(-2, -1))
    frame4 = np.stack([pts, fr.sigma, fr.jsigma, fr.xi], axis=-1)
    orient_defect = np.abs(np.linalg.det(frame4) - 1.0)

    return {"geodesibility": geod, "killing": killing, "contact": contact,
            "integrability": integrability, "divergence": divergence,
            "orthonormality": gram_defect, "orientation": orient_defect}


# ---------------------------------------------------------------------------
# forms and the 3d Hodge star
# ---------------------------------------------------------------------------

@dataclass
class FormComponents:
    """Coefficients in {sigma*, (jsigma)*, theta} for degree 1, or in
    {sigma*^(jsigma)*, sigma*^theta, (jsigma)*^theta} for degree 2.

    Components may be scalars or matrices (endomorphism-valued forms)."""

    degree: int
    comps: np.ndarray

    def __post_init__(self):
        self.comps = np.asarray(self.comps)
        if self.degree not in (1, 2):
            raise BadDegree(f"3-manifold forms of degree {self.degree} unsupported")
        if self.comps.shape[0] != 3:
            raise BadDegree("expected 3 components")

    def norm(self):
        return float(np.sqrt(sum(np.sum(np.abs(c) ** 2) for c in self.comps)))


def hodge3(form, orient_sign=1.0):
    """Hodge star for the metric volume orient_sign * sigma*^(jsigma)*^theta.

    An involution and an isometry on components in both degrees."""
    if not isinstance(form, FormComponents):
        raise BadDegree("hodge3 expects FormComponents")
    c = form.comps
    s = float(orient_sign)
    out = np.stack([s * c[2], -s * c[1], s * c[0]])
    return FormComponents(2 if form.degree == 1 else 1, out)
