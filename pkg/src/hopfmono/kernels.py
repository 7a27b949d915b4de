"""Hot numeric kernels: numba-jitted loops with a pure-numpy fallback.

The numpy path is selected by setting the environment variable
``HOPFMONO_NO_NUMBA=1`` before import (or automatically when numba is not
installed).  Both paths are exercised by the test suite and compared by
``benchmarks/bench_kernels.py``.

Kernels here are deliberately restricted to array-in / array-out signatures:
all geometry and field evaluation happens outside (vectorised numpy), the
kernels only run the sequential recursions and pairwise sweeps that numpy
cannot vectorise cheaply.
"""

import os

import numpy as np

NUMBA_ENABLED = False
if os.environ.get("HOPFMONO_NO_NUMBA", "0") != "1":
    try:
        from numba import njit, prange

        NUMBA_ENABLED = True
    except ImportError:  # pragma: no cover - numba is a declared dependency
        pass

if not NUMBA_ENABLED:
    def njit(*args, **kwargs):  # noqa: D103 - identity decorator fallback
        if len(args) == 1 and callable(args[0]):
            return args[0]

        def wrap(fn):
            return fn

        return wrap

    prange = range


# ---------------------------------------------------------------------------
# path-ordered matrix transport, f' = M(s) f, classical RK4
# ---------------------------------------------------------------------------

def _transport_rk4_numpy(gen, h):
    """gen: (B, 2K+1, n, n) generator samples at half-step nodes."""
    b, m, n, _ = gen.shape
    nstep = (m - 1) // 2
    f = np.broadcast_to(np.eye(n, dtype=gen.dtype), (b, n, n)).copy()
    for j in range(nstep):
        m0 = gen[:, 2 * j]
        m1 = gen[:, 2 * j + 1]
        m2 = gen[:, 2 * j + 2]
        k1 = m0 @ f
        k2 = m1 @ (f + 0.5 * h * k1)
        k3 = m1 @ (f + 0.5 * h * k2)
        k4 = m2 @ (f + h * k3)
        f = f + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return f


@njit(cache=True)
def _transport_rk4_numba(gen, h):  # pragma: no cover - exercised via wrapper
    b, m, n, _ = gen.shape
    nstep = (m - 1) // 2
    out = np.empty((b, n, n), dtype=gen.dtype)
    for ib in prange(b):
        f = np.eye(n).astype(gen.dtype)
        for j in range(nstep):
            m0 = gen[ib, 2 * j]
            m1 = gen[ib, 2 * j + 1]
            m2 = gen[ib, 2 * j + 2]
            k1 = m0 @ f
            k2 = m1 @ (f + 0.5 * h * k1)
            k3 = m1 @ (f + 0.5 * h * k2)
            k4 = m2 @ (f + h * k3)
            f = f + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        out[ib] = f
    return out


def transport_rk4(gen, h):
    """Integrate f' = M(s) f over K steps of size h, f(0) = I.

    gen holds M at the 2K+1 half-step nodes; returns f at the endpoint,
    batched over the leading axis.
    """
    gen = np.ascontiguousarray(gen)
    if NUMBA_ENABLED:
        return _transport_rk4_numba(gen, float(h))
    return _transport_rk4_numpy(gen, float(h))


# ---------------------------------------------------------------------------
# Higgs-potential orbit integration
# dPhi/ds = phi - [A_xi, Phi] + 2i [phi, Phi],  Phi(0) = 0
# ---------------------------------------------------------------------------

def _higgs_rhs_numpy(phi, axi, p):
    return phi + (p @ axi - axi @ p) + 2.0j * (phi @ p - p @ phi)


def _higgs_rk4_numpy(phi, axi, h):
    b, m, n, _ = phi.shape
    nstep = (m - 1) // 2
    path = np.zeros((b, nstep + 1, n, n), dtype=phi.dtype)
    cur = np.zeros((b, n, n), dtype=phi.dtype)
    for j in range(nstep):
        p0, a0 = phi[:, 2 * j], axi[:, 2 * j]
        p1, a1 = phi[:, 2 * j + 1], axi[:, 2 * j + 1]
        p2, a2 = phi[:, 2 * j + 2], axi[:, 2 * j + 2]
        k1 = _higgs_rhs_numpy(p0, a0, cur)
        k2 = _higgs_rhs_numpy(p1, a1, cur + 0.5 * h * k1)
        k3 = _higgs_rhs_numpy(p1, a1, cur + 0.5 * h * k2)
        k4 = _higgs_rhs_numpy(p2, a2, cur + h * k3)
        cur = cur + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        path[:, j + 1] = cur
    return path


@njit(cache=True)
def _higgs_rhs_numba(phi, axi, p):  # pragma: no cover - exercised via wrapper
    return phi + (p @ axi - axi @ p) + 2.0j * (phi @ p - p @ phi)


@njit(cache=True)
def _higgs_rk4_numba(phi, axi, h):  # pragma: no cover - exercised via wrapper
    b, m, n, _ = phi.shape
    nstep = (m - 1) // 2
    path = np.zeros((b, nstep + 1, n, n), dtype=phi.dtype)
    for ib in prange(b):
        cur = np.zeros((n, n), dtype=phi.dtype)
        for j in range(nstep):
            p0, a0 = phi[ib, 2 * j], axi[ib, 2 * j]
            p1, a1 = phi[ib, 2 * j + 1], axi[ib, 2 * j + 1]
            p2, a2 = phi[ib, 2 * j + 2], axi[ib, 2 * j + 2]
            k1 = _higgs_rhs_numba(p0, a0, cur)
            k2 = _higgs_rhs_numba(p1, a1, cur + 0.5 * h * k1)
            k3 = _higgs_rhs_numba(p1, a1, cur + 0.5 * h * k2)
            k4 = _higgs_rhs_numba(p2, a2, cur + h * k3)
            cur = cur + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            path[ib, j + 1] = cur
    return path


def higgs_rk4(phi, axi, h):
    """Integrate the Higgs-potential ODE along precomputed orbit samples.

    phi, axi: (B, 2K+1, n, n) field samples at half-step orbit nodes.
    Returns the solution path at the K+1 full nodes, batched.
    """
    phi = np.ascontiguousarray(phi)
    axi = np.ascontiguousarray(axi)
    if NUMBA_ENABLED:
        return _higgs_rk4_numba(phi, axi, float(h))
    return _higgs_rk4_numpy(phi, axi, float(h))


# ---------------------------------------------------------------------------
# pairwise Hoelder sweep
# ---------------------------------------------------------------------------

def _specnorm22(m):
    # closed-form spectral norm of a 2x2 complex matrix
    fro2 = (m[0, 0].real ** 2 + m[0, 0].imag ** 2
            + m[0, 1].real ** 2 + m[0, 1].imag ** 2
            + m[1, 0].real ** 2 + m[1, 0].imag ** 2
            + m[1, 1].real ** 2 + m[1, 1].imag ** 2)
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    det2 = det.real ** 2 + det.imag ** 2
    disc = fro2 * fro2 - 4.0 * det2
    if disc < 0.0:
        disc = 0.0
    return np.sqrt(0.5 * (fro2 + np.sqrt(disc)))


_specnorm22_jit = njit(cache=True)(_specnorm22) if NUMBA_ENABLED else _specnorm22


@njit(cache=True)
def _pairwise_numba(pts, mats, alpha, nbins, lo, hi):  # pragma: no cover
    n = pts.shape[0]
    dim = mats.shape[1]
    best = 0.0
    env = np.zeros(nbins)
    span = hi - lo
    for i in range(n):
        for j in range(i + 1, n):
            dot = 0.0
            for k in range(4):
                dot += pts[i, k] * pts[j, k]
            if dot > 1.0:
                dot = 1.0
            elif dot < -1.0:
                dot = -1.0
            d = np.arccos(dot)
            if d <= 0.0:
                continue
            diff = mats[i] - mats[j]
            if dim == 2:
                nrm = _specnorm22_jit(diff)
            else:
                s = np.linalg.svd(diff)[1]
                nrm = s[0]
            ratio = nrm / d ** alpha
            if ratio > best:
                best = ratio
            t = (np.log(d) - lo) / span
            if 0.0 <= t < 1.0:
                b = int(t * nbins)
                if nrm > env[b]:
                    env[b] = nrm
    return best, env


def _pairwise_numpy(pts, mats, alpha, nbins, lo, hi):
    n = pts.shape[0]
    iu, ju = np.triu_indices(n, k=1)
    dots = np.clip(np.einsum("ik,ik->i", pts[iu], pts[ju]), -1.0, 1.0)
    d = np.arccos(dots)
    diff = mats[iu] - mats[ju]
    nrm = np.linalg.norm(diff, ord=2, axis=(1, 2))
    ok = d > 0.0
    d, nrm = d[ok], nrm[ok]
    best = float(np.max(nrm / d ** alpha)) if d.size else 0.0
    env = np.zeros(nbins)
    t = (np.log(d) - lo) / (hi - lo)
    sel = (t >= 0.0) & (t < 1.0)
    bins = (t[sel] * nbins).astype(np.intp)
    np.maximum.at(env, bins, nrm[sel])
    return best, env


def pairwise_hoelder(pts, mats, alpha, nbins=14, lo=None, hi=None):
    """Max pairwise ratio |m_i - m_j| / d(p_i,p_j)^alpha plus a distance-binned
    upper envelope of |m_i - m_j| (used by the exponent fitter).

    pts: (N, 4) unit sphere points; mats: (N, n, n) complex samples.
    Matrix differences are measured in the operator 2-norm.
    """
    pts = np.ascontiguousarray(pts, dtype=np.float64)
    mats = np.ascontiguousarray(mats, dtype=np.complex128)
    if lo is None or hi is None:
        dots = np.clip(pts @ pts.T, -1.0, 1.0)
        d = np.arccos(dots)[np.triu_indices(pts.shape[0], k=1)]
        d = d[d > 0]
        lo = float(np.log(d.min())) if lo is None else lo
        hi = float(np.log(d.max()) + 1e-12) if hi is None else hi
    if NUMBA_ENABLED:
        best, env = _pairwise_numba(pts, mats, float(alpha), int(nbins), lo, hi)
        return float(best), env, (lo, hi)
    best, env = _pairwise_numpy(pts, mats, float(alpha), int(nbins), lo, hi)
    return float(best), env, (lo, hi)


def envelope_slope(env, lohi, nbins=None):
    """Least-squares slope of log(envelope) vs log(distance) bin centres."""
    lo, hi = lohi
    nbins = len(env)
    centres = lo + (np.arange(nbins) + 0.5) * (hi - lo) / nbins
    mask = env > 0
    if mask.sum() < 2:
        return float("nan")
    x = centres[mask]
    y = np.log(env[mask])
    a = np.vstack([x, np.ones_like(x)]).T
    slope, _ = np.linalg.lstsq(a, y, rcond=None)[0]
    return float(slope)
