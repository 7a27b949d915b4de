"""Hoelder and C^{1,alpha} estimators for gauges, Higgs fields and
connections on punctured regions, with the curvature Lipschitz bound check.

Matrix norms are operator 2-norms throughout.  Uniformity over a continuum
is approximated by sampled maxima; unboundedness is detected by the growth
factor of the estimated constants across radius halvings of the inner
exclusion radius.
"""

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import BadAlpha, EmptySamples
from .kernels import envelope_slope, pairwise_hoelder
from .sphere import (DEFAULT_POLICY, check_unit, dirderiv, frame_at,
                     gamma_angle, geodesic_distance, lie_bracket)


@dataclass
class GaugeSampleSet:
    points: np.ndarray           # (N, 4)
    mats: np.ndarray             # (N, n, n) complex
    region: dict = field(default_factory=dict)

    def __post_init__(self):
        self.points = np.atleast_2d(np.asarray(self.points, dtype=float))
        self.mats = np.asarray(self.mats, dtype=complex)
        if self.points.shape[0] < 2:
            raise EmptySamples("need at least two samples")
        check_unit(self.points)


def admissibility_margin(samples):
    """inf |det| over the sample set."""
    if samples.mats.shape[0] == 0:
        raise EmptySamples("empty sample set")
    return float(np.min(np.abs(np.linalg.det(samples.mats))))


def hoelder_constant(samples, alpha):
    """max over pairs of ||m(p) - m(q)|| / d(p, q)^alpha (operator norm)."""
    if not 0.0 < alpha <= 1.0:
        raise BadAlpha(f"alpha = {alpha} outside (0, 1]")
    best, _, _ = pairwise_hoelder(samples.points, samples.mats, alpha)
    return best


def fit_exponent(samples, nbins=24, d_lo=None, d_hi=None):
    """Fitted Hoelder exponent: least-squares slope of the log upper envelope
    of ||m(p) - m(q)|| against the log separation.

    The regression is restricted to the scaling window [d_lo, d_hi]: below
    the sampler's inner radius the quotients are in their smooth (Lipschitz)
    regime, near the region diameter the envelope of a bounded map saturates.
    Defaults: 30x the region's inner radius up to half its outer radius."""
    inner = samples.region.get("inner")
    outer = samples.region.get("outer")
    if d_lo is None:
        d_lo = 30.0 * inner if inner else None
    if d_hi is None:
        d_hi = 0.5 * outer if outer else None
    _, env, lohi = pairwise_hoelder(samples.points, samples.mats, 1.0,
                                    nbins=nbins)
    lo, hi = lohi
    edges = lo + (np.arange(nbins) + 1.0) * (hi - lo) / nbins
    mask = env > 0
    if d_lo is not None:
        mask &= edges >= np.log(d_lo)
    if d_hi is not None:
        mask &= edges <= np.log(d_hi)
    if mask.sum() < 3:
        mask = env > 0
    x = edges[mask]
    y = np.log(env[mask])
    a = np.vstack([x, np.ones_like(x)]).T
    slope, _ = np.linalg.lstsq(a, y, rcond=None)[0]
    return float(slope)


def region_points(P0, inner, outer, n, seed, rng_stream=0):
    """Seeded sample points in the punctured geodesic annulus around P0.

    Radii are drawn log-uniformly so the region near the puncture is
    represented (that is where the detectors look), and half the points are
    companions at separations comparable to their radius so the pair sweep
    has small-separation data at every scale."""
    P0 = check_unit(np.asarray(P0, dtype=float))
    rng = np.random.Generator(np.random.Philox(key=[seed, 100 + rng_stream]))
    fr = frame_at(P0)
    basis = np.stack([fr.sigma, fr.jsigma, fr.xi])
    pts = []
    while len(pts) < n:
        d = float(np.exp(rng.uniform(np.log(inner), np.log(outer))))
        u = rng.normal(size=3)
        u /= np.linalg.norm(u)
        v = np.cos(d) * P0 + np.sin(d) * (u @ basis)
        pts.append(v / np.linalg.norm(v))
        if len(pts) < n:
            step = d * rng.uniform(0.2, 1.0)
            w = v + step * rng.normal(size=4)
            w /= np.linalg.norm(w)
            dw = float(geodesic_distance(w, P0))
            if inner <= dw <= outer:
                pts.append(w)
    return np.asarray(pts[:n])


def gauge_samples(gauge_fn, points, region=None):
    return GaugeSampleSet(points=points, mats=gauge_fn(points),
                          region=region or {})


def _direction_fields(policy):
    return ("sigma", "jsigma", "xi")


def _object_samples(kind, obj, points, policy, fd_step):
    """Sampled matrices whose Hoelder constants define the C^{1,alpha}
    estimate: d rho(zeta) for gauges, phi and nabla phi for the Higgs field,
    dA(zeta, eta) for connections."""
    out = {}
    n_pts = points.shape[0]
    if kind == "gauge":
        for w in _direction_fields(policy):
            mats = []
            for k in range(n_pts):
                fr = frame_at(points[k], policy)
                v = getattr(fr, w)
                mats.append(dirderiv(lambda q: obj(np.atleast_2d(q))[0],
                                     points[k], v, h=fd_step))
            out[f"drho({w})"] = np.stack(mats)
        return out
    if kind == "higgs":
        from .fields import nabla_phi
        out["phi"] = obj(points)[3]
        grads = {w: [] for w in _direction_fields(policy)}
        for k in range(n_pts):
            n1, n2, n3 = nabla_phi(obj, points[k], policy, fd_step)
            grads["sigma"].append(n1)
            grads["jsigma"].append(n2)
            grads["xi"].append(n3)
        for w, v in grads.items():
            out[f"nabla_{w}(phi)"] = np.stack(v)
        return out
    if kind == "connection":
        names = _direction_fields(policy)
        comp = {n: i for i, n in enumerate(names)}

        def a_comp(pts, w):
            a1, a2, a3, _ = _rotated(obj, pts, policy)
            return (a1, a2, a3)[comp[w]]

        for wa in names:
            for wb in names:
                if wa >= wb:
                    continue
                mats = []
                for k in range(n_pts):
                    fr = frame_at(points[k], policy)
                    da = dirderiv(lambda q: a_comp(np.atleast_2d(q), wb)[0],
                                  points[k], getattr(fr, wa), h=fd_step)
                    db = dirderiv(lambda q: a_comp(np.atleast_2d(q), wa)[0],
                                  points[k], getattr(fr, wb), h=fd_step)
                    br = lie_bracket(wa, wb, points[k], policy,
                                     mode="exact" if isinstance(policy, DEFAULT_POLICY.__class__) else "fd",
                                     fd_step=fd_step)
                    fr_k = frame_at(points[k], policy)
                    a1, a2, a3, _ = _rotated(obj, points[k][None], policy)
                    acomps = {"sigma": a1[0], "jsigma": a2[0], "xi": a3[0]}
                    a_br = sum(float(np.dot(br, getattr(fr_k, nm))) * acomps[nm]
                               for nm in names)
                    mats.append(da - db - a_br)
                out[f"dA({wa},{wb})"] = np.stack(mats)
        return out
    raise EmptySamples(f"unknown object kind {kind!r}")


def _rotated(fld, pts, policy):
    a1, a2, a3, phi = fld(np.atleast_2d(pts))
    if not isinstance(policy, DEFAULT_POLICY.__class__):
        g = gamma_angle(np.atleast_2d(pts), policy)[:, None, None]
        a1, a2 = (np.cos(g) * a1 + np.sin(g) * a2,
                  -np.sin(g) * a1 + np.cos(g) * a2)
    return a1, a2, a3, phi


@dataclass
class RegularityReport:
    kind: str
    alpha: float
    constants: dict
    aggregated: float
    fitted_alpha: float
    divergence_factor: float
    divergence_flag: bool
    admissibility: float
    radii: list

    def as_dict(self):
        return {"kind": self.kind, "alpha": self.alpha,
                "constants": self.constants, "aggregated": self.aggregated,
                "fitted_alpha": self.fitted_alpha,
                "divergence_factor": self.divergence_factor,
                "divergence_flag": self.divergence_flag,
                "admissibility": self.admissibility, "radii": self.radii}


ZERO_FLOOR = 1e-12


def c1alpha_report(kind, obj, P0, alpha=0.9, inner=0.08, outer=0.6,
                   n_samples=220, halvings=2, divergence_factor=6.0,
                   policy=DEFAULT_POLICY, fd_step=1e-3, seed=20240601):
    """Hoelder constants of the object's defining derivative samples on a
    shrinking family of punctured annuli; the divergence detector compares
    the constants across ``halvings`` halvings of the inner radius."""
    radii = [inner * 2.0 ** k for k in range(halvings, -1, -1)]
    radii = [r for r in radii if r < outer]
    consts_by_radius = []
    constants = {}
    fitted = float("nan")
    admissibility = float("nan")
    for ridx, r in enumerate(radii):
        pts = region_points(P0, r, outer, n_samples, seed, rng_stream=ridx)
        samp_dict = _object_samples(kind, obj, pts, policy, fd_step)
        worst = 0.0
        for name, mats in samp_dict.items():
            ss = GaugeSampleSet(points=pts, mats=mats, region={"inner": r})
            cst = hoelder_constant(ss, alpha)
            worst = max(worst, cst)
            if ridx == len(radii) - 1:
                constants[name] = cst
        consts_by_radius.append(worst)
        if ridx == len(radii) - 1:
            variation = max(float(np.max(np.abs(m - m[0])))
                            for m in samp_dict.values())
            if variation > ZERO_FLOOR:
                key = max(samp_dict, key=lambda k2: float(np.max(np.abs(
                    samp_dict[k2] - samp_dict[k2][0]))))
                fitted = fit_exponent(GaugeSampleSet(points=pts,
                                                     mats=samp_dict[key]))
            if kind == "gauge":
                admissibility = admissibility_margin(
                    GaugeSampleSet(points=pts, mats=obj(pts)))
    base = consts_by_radius[0]
    tightest = consts_by_radius[-1]
    factor = tightest / base if base > ZERO_FLOOR else 1.0
    return RegularityReport(kind=kind, alpha=alpha, constants=constants,
                            aggregated=tightest, fitted_alpha=float(fitted),
                            divergence_factor=float(factor),
                            divergence_flag=bool(factor > divergence_factor),
                            admissibility=float(admissibility),
                            radii=[float(r) for r in radii])


def ad_norm(a, tol=1e-10):
    """Operator norm of ad(a) = [a, .] on (matrices, spectral norm).

    Exact for normal matrices (spectral spread); the 2 ||a|| bound otherwise
    keeps the triangle-inequality check a theorem."""
    a = np.asarray(a)
    if np.linalg.norm(a @ np.conj(a.T) - np.conj(a.T) @ a) < tol * max(
            1.0, np.linalg.norm(a) ** 2):
        lam = np.linalg.eigvals(a)
        return float(np.max(np.abs(lam[:, None] - lam[None, :])))
    return 2.0 * float(np.linalg.norm(a, ord=2))


def curvature_lipschitz_check(fld, P0, inner=0.1, outer=0.6, n_samples=80,
                              policy=DEFAULT_POLICY, seed=20240601,
                              slack=1e-9):
    """Measured Lipschitz data of the commutators [A_zeta, A_eta] against the
    displayed ad-norm triangle bound; the inequality is a theorem, so any
    violation flags an implementation bug."""
    pts = region_points(P0, inner, outer, n_samples, seed, rng_stream=9)
    a1, a2, a3, _ = _rotated(fld, pts, policy)
    comps = {"sigma": a1, "jsigma": a2, "xi": a3}
    names = ("sigma", "jsigma", "xi")
    records = []
    ok = True
    for ia, wa in enumerate(names):
        for wb in names[ia + 1:]:
            az, ae = comps[wa], comps[wb]
            for i in range(pts.shape[0]):
                for j in range(i + 1, pts.shape[0]):
                    lhs = np.linalg.norm(
                        (az[i] @ ae[i] - ae[i] @ az[i])
                        - (az[j] @ ae[j] - ae[j] @ az[j]), ord=2)
                    rhs = (ad_norm(az[i]) * np.linalg.norm(ae[i] - ae[j], ord=2)
                           + ad_norm(ae[j]) * np.linalg.norm(az[i] - az[j],
                                                             ord=2))
                    if lhs > rhs + slack:
                        ok = False
                    records.append((float(lhs), float(rhs)))
    measured = max((r[0] for r in records), default=0.0)
    bound = max((r[1] for r in records), default=0.0)
    return {"ok": ok, "pairs": len(records), "max_measured": measured,
            "max_bound": bound}


def conjugation_bound(rho_samples, tau_samples, alpha):
    """Algebraic Hoelder bound for tau^-1 rho tau from the factors' data."""
    sup = lambda m: float(np.max(np.linalg.norm(m, ord=2, axis=(1, 2))))  # noqa: E731
    inv = np.linalg.inv(tau_samples.mats)
    c_rho = hoelder_constant(rho_samples, alpha)
    c_tau = hoelder_constant(tau_samples, alpha)
    c_inv = hoelder_constant(GaugeSampleSet(points=tau_samples.points,
                                            mats=inv), alpha)
    s_rho, s_tau, s_inv = (sup(rho_samples.mats), sup(tau_samples.mats),
                           sup(inv))
    return s_inv * (s_rho * c_tau + c_rho * s_tau) + c_inv * s_rho * s_tau


def read_samples_csv(path):
    """CSV: p0,p1,p2,p3, re00,im00,re01,... row-major matrix entries."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, data = rows[0], rows[1:]
    if not data:
        raise EmptySamples(f"no sample rows in {path}")
    n2 = (len(header) - 4) // 2
    n = int(round(np.sqrt(n2)))
    pts, mats = [], []
    for r in data:
        pts.append([float(x) for x in r[:4]])
        vals = [float(x) for x in r[4:]]
        m = np.array(vals[0::2]) + 1j * np.array(vals[1::2])
        mats.append(m.reshape(n, n))
    return GaugeSampleSet(points=np.asarray(pts), mats=np.stack(mats))


def write_samples_csv(path, samples):
    n = samples.mats.shape[-1]
    header = ["p0", "p1", "p2", "p3"]
    for r in range(n):
        for c in range(n):
            header += [f"re{r}{c}", f"im{r}{c}"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for k in range(samples.points.shape[0]):
            row = [repr(float(x)) for x in samples.points[k]]
            for r in range(n):
                for c in range(n):
                    row += [repr(float(samples.mats[k, r, c].real)),
                            repr(float(samples.mats[k, r, c].imag))]
            w.writerow(row)
