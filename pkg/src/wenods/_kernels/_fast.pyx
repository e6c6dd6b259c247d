# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled line-sweep kernel.

Cell-by-cell port of ``wenods._kernels.reference`` with the CNN evaluated
in-line per interface window.  Rows are independent and run under OpenMP;
all arithmetic is strict IEEE double (no fast-math), so results match the
numpy backend to rounding noise and are bit-stable across reruns.
"""

import os

import numpy as np

cimport numpy as cnp
from cython.parallel cimport prange
from libc.math cimport INFINITY, exp, expm1, fabs, log1p, sqrt

from .. import cnn as cnn_mod
from ..errors import MissingModel, NonPhysicalState

cnp.import_array()

cdef enum:
    MAXCH = 64          # widest supported CNN layer
    MAXWIN = 40         # longest supported stencil window (k <= 17)
    CHBUF = MAXCH * MAXWIN

cdef double D0 = 0.1
cdef double D1 = 0.6
cdef double D2 = 0.3

_SCHEME_IDS = {"js": 0, "z": 1, "ds-js": 2, "ds-z": 3}


cdef inline double _act(double x, int kind, double prm) nogil:
    if kind == 0:
        return x
    if kind == 1:
        return x if x > 0.0 else prm * expm1(x)
    # adaptive softplus; beyond the cutoff it is x to machine precision
    cdef double t = prm * x
    return x if t > 30.0 else log1p(exp(t)) / prm


cdef inline void _cnn(const double* src, int stride, int width_in,
                      int n_layers, const int* meta, const double* lparam,
                      const double* wts, const cnp.int64_t* woff,
                      const double* bias, const cnp.int64_t* boff,
                      double* out, int out_stride) nogil:
    """Valid 1D convolutions over a (channels, width) window.

    ``src`` holds 4 input channels at ``src[c*stride + t]``; the final
    4-channel result lands in ``out[c*out_stride + t]``.
    """
    cdef double buf_a[CHBUF]
    cdef double buf_b[CHBUF]
    cdef double* cur = buf_a
    cdef double* nxt = buf_b
    cdef double* swap
    cdef int c, t, o, tap, layer
    cdef int cur_w = width_in
    cdef int oc, ic, w, kind, nw
    cdef double acc, prm
    cdef const double* kern

    for c in range(4):
        for t in range(width_in):
            cur[c * MAXWIN + t] = src[c * stride + t]

    for layer in range(n_layers):
        oc = meta[4 * layer + 0]
        ic = meta[4 * layer + 1]
        w = meta[4 * layer + 2]
        kind = meta[4 * layer + 3]
        prm = lparam[layer]
        nw = cur_w - w + 1
        kern = wts + woff[layer]
        for o in range(oc):
            for t in range(nw):
                acc = bias[boff[layer] + o]
                for c in range(ic):
                    for tap in range(w):
                        acc += kern[(o * ic + c) * w + tap] * cur[c * MAXWIN + t + tap]
                nxt[o * MAXWIN + t] = _act(acc, kind, prm)
        swap = cur
        cur = nxt
        nxt = swap
        cur_w = nw

    for c in range(4):
        for t in range(cur_w):
            out[c * out_stride + t] = cur[c * MAXWIN + t]


cdef inline void _normalise(double a0, double a1, double a2, double* w) nogil:
    # eps = 0 can push alphas to infinity; the weights then concentrate on
    # the infinite entries in proportion to the ideal weights.
    cdef double l0, l1, l2, s
    if a0 == INFINITY or a1 == INFINITY or a2 == INFINITY:
        l0 = D0 if a0 == INFINITY else 0.0
        l1 = D1 if a1 == INFINITY else 0.0
        l2 = D2 if a2 == INFINITY else 0.0
        s = l0 + l1 + l2
        w[0] = l0 / s
        w[1] = l1 / s
        w[2] = l2 / s
    else:
        s = a0 + a1 + a2
        w[0] = a0 / s
        w[1] = a1 / s
        w[2] = a2 / s


cdef inline void _weights_js(double b0, double b1, double b2, double eps,
                             double* w) nogil:
    cdef double d0 = (eps + b0) * (eps + b0)
    cdef double d1 = (eps + b1) * (eps + b1)
    cdef double d2 = (eps + b2) * (eps + b2)
    cdef double a0 = D0 / d0 if d0 > 0.0 else INFINITY
    cdef double a1 = D1 / d1 if d1 > 0.0 else INFINITY
    cdef double a2 = D2 / d2 if d2 > 0.0 else INFINITY
    _normalise(a0, a1, a2, w)


cdef inline double _z_ratio(double tau, double den) nogil:
    if den > 0.0:
        return tau / den
    return 0.0 if tau == 0.0 else INFINITY


cdef inline void _weights_z(double b0, double b1, double b2, double eps,
                            double* w) nogil:
    cdef double tau = fabs(b0 - b2)
    cdef double r0 = _z_ratio(tau, b0 + eps)
    cdef double r1 = _z_ratio(tau, b1 + eps)
    cdef double r2 = _z_ratio(tau, b2 + eps)
    _normalise(D0 * (1.0 + r0 * r0), D1 * (1.0 + r1 * r1), D2 * (1.0 + r2 * r2), w)


cdef inline int _row(const double* u, const double* flux, int m, int g, int n,
                     double gamma, double alpha, double dxinv, int scheme_id,
                     double eps, double c_ds, int e,
                     int n_layers, const int* meta, const double* lparam,
                     const double* wts, const cnp.int64_t* woff,
                     const double* bias, const cnp.int64_t* boff,
                     double* out) nogil:
    """One line: interfaces left to right, differenced into the tendency.

    Returns -1 on success or the offending interface index when the average
    state loses positivity.
    """
    cdef double qa[4]
    cdef double lmat[16]
    cdef double rmat[16]
    cdef double fp[4 * MAXWIN]
    cdef double fm[4 * MAXWIN]
    cdef double dp[12]
    cdef double dm[12]
    cdef double prev[4]
    cdef double cur[4]
    cdef double ch[4]
    cdef double wgt[3]
    cdef double rho, uu, vv, p, c, enth, b2c, q2h, b1c, cinv
    cdef double sq, sf, aq
    cdef double a, b, cc, d, ee
    cdef double m1, m2, m3, m4, m5
    cdef double c0, c1, c2, b0, b1v, b2v, fhp, fhm, t1, t2
    cdef int j, i0, wi, cell, fld, comp, wlen, cnn_w
    cdef bint ds = scheme_id >= 2
    cdef bint zform = (scheme_id % 2) == 1

    wlen = 6 + 2 * e
    cnn_w = 5 + 2 * e

    for j in range(n + 1):
        i0 = g - 1 + j

        for comp in range(4):
            qa[comp] = 0.5 * (u[4 * i0 + comp] + u[4 * (i0 + 1) + comp])
        rho = qa[0]
        if rho <= 0.0:
            return j
        uu = qa[1] / rho
        vv = qa[2] / rho
        p = (gamma - 1.0) * (qa[3] - 0.5 * rho * (uu * uu + vv * vv))
        if p <= 0.0:
            return j
        c = sqrt(gamma * p / rho)
        enth = (qa[3] + p) / rho

        # eigenvector matrices, fields ordered u-c, u, u, u+c
        b2c = (gamma - 1.0) / (c * c)
        q2h = 0.5 * (uu * uu + vv * vv)
        b1c = b2c * q2h
        cinv = 1.0 / c
        rmat[0] = 1.0;        rmat[1] = 1.0;      rmat[2] = 0.0;  rmat[3] = 1.0
        rmat[4] = uu - c;     rmat[5] = uu;       rmat[6] = 0.0;  rmat[7] = uu + c
        rmat[8] = vv;         rmat[9] = vv;       rmat[10] = 1.0; rmat[11] = vv
        rmat[12] = enth - uu * c; rmat[13] = q2h; rmat[14] = vv;  rmat[15] = enth + uu * c
        lmat[0] = 0.5 * (b1c + uu * cinv)
        lmat[1] = -0.5 * (b2c * uu + cinv)
        lmat[2] = -0.5 * b2c * vv
        lmat[3] = 0.5 * b2c
        lmat[4] = 1.0 - b1c
        lmat[5] = b2c * uu
        lmat[6] = b2c * vv
        lmat[7] = -b2c
        lmat[8] = -vv
        lmat[9] = 0.0
        lmat[10] = 1.0
        lmat[11] = 0.0
        lmat[12] = 0.5 * (b1c - uu * cinv)
        lmat[13] = -0.5 * (b2c * uu - cinv)
        lmat[14] = -0.5 * b2c * vv
        lmat[15] = 0.5 * b2c

        # project the stencil window and split
        for wi in range(wlen):
            cell = 4 * (i0 - 2 - e + wi)
            for fld in range(4):
                sq = (lmat[4 * fld + 0] * u[cell + 0]
                      + lmat[4 * fld + 1] * u[cell + 1]
                      + lmat[4 * fld + 2] * u[cell + 2]
                      + lmat[4 * fld + 3] * u[cell + 3])
                sf = (lmat[4 * fld + 0] * flux[cell + 0]
                      + lmat[4 * fld + 1] * flux[cell + 1]
                      + lmat[4 * fld + 2] * flux[cell + 2]
                      + lmat[4 * fld + 3] * flux[cell + 3])
                aq = alpha * sq
                fp[fld * MAXWIN + wi] = 0.5 * (sf + aq)
                fm[fld * MAXWIN + wi] = 0.5 * (sf - aq)

        if ds:
            _cnn(fp, MAXWIN, cnn_w, n_layers, meta, lparam, wts, woff,
                 bias, boff, dp, 3)
            _cnn(&fm[1], MAXWIN, cnn_w, n_layers, meta, lparam, wts, woff,
                 bias, boff, dm, 3)

        for fld in range(4):
            a = fp[fld * MAXWIN + e]
            b = fp[fld * MAXWIN + e + 1]
            cc = fp[fld * MAXWIN + e + 2]
            d = fp[fld * MAXWIN + e + 3]
            ee = fp[fld * MAXWIN + e + 4]
            c0 = (2.0 * a - 7.0 * b + 11.0 * cc) / 6.0
            c1 = (-b + 5.0 * cc + 2.0 * d) / 6.0
            c2 = (2.0 * cc + 5.0 * d - ee) / 6.0
            t1 = a - 2.0 * b + cc
            t2 = a - 4.0 * b + 3.0 * cc
            b0 = (13.0 / 12.0) * (t1 * t1) + 0.25 * (t2 * t2)
            t1 = b - 2.0 * cc + d
            t2 = b - d
            b1v = (13.0 / 12.0) * (t1 * t1) + 0.25 * (t2 * t2)
            t1 = cc - 2.0 * d + ee
            t2 = 3.0 * cc - 4.0 * d + ee
            b2v = (13.0 / 12.0) * (t1 * t1) + 0.25 * (t2 * t2)
            if ds:
                b0 = b0 * (dp[fld * 3 + 0] + c_ds)
                b1v = b1v * (dp[fld * 3 + 1] + c_ds)
                b2v = b2v * (dp[fld * 3 + 2] + c_ds)
            if zform:
                _weights_z(b0, b1v, b2v, eps, wgt)
            else:
                _weights_js(b0, b1v, b2v, eps, wgt)
            fhp = wgt[0] * c0 + wgt[1] * c1 + wgt[2] * c2

            m1 = fm[fld * MAXWIN + e + 1]
            m2 = fm[fld * MAXWIN + e + 2]
            m3 = fm[fld * MAXWIN + e + 3]
            m4 = fm[fld * MAXWIN + e + 4]
            m5 = fm[fld * MAXWIN + e + 5]
            c0 = (11.0 * m3 - 7.0 * m4 + 2.0 * m5) / 6.0
            c1 = (2.0 * m2 + 5.0 * m3 - m4) / 6.0
            c2 = (-m1 + 5.0 * m2 + 2.0 * m3) / 6.0
            t1 = m3 - 2.0 * m4 + m5
            t2 = 3.0 * m3 - 4.0 * m4 + m5
            b0 = (13.0 / 12.0) * (t1 * t1) + 0.25 * (t2 * t2)
            t1 = m2 - 2.0 * m3 + m4
            t2 = m2 - m4
            b1v = (13.0 / 12.0) * (t1 * t1) + 0.25 * (t2 * t2)
            t1 = m1 - 2.0 * m2 + m3
            t2 = m1 - 4.0 * m2 + 3.0 * m3
            b2v = (13.0 / 12.0) * (t1 * t1) + 0.25 * (t2 * t2)
            if ds:
                b0 = b0 * (dm[fld * 3 + 2] + c_ds)
                b1v = b1v * (dm[fld * 3 + 1] + c_ds)
                b2v = b2v * (dm[fld * 3 + 0] + c_ds)
            if zform:
                _weights_z(b0, b1v, b2v, eps, wgt)
            else:
                _weights_js(b0, b1v, b2v, eps, wgt)
            fhm = wgt[0] * c0 + wgt[1] * c1 + wgt[2] * c2
            ch[fld] = fhp + fhm

        for comp in range(4):
            cur[comp] = (rmat[4 * comp + 0] * ch[0] + rmat[4 * comp + 1] * ch[1]
                         + rmat[4 * comp + 2] * ch[2] + rmat[4 * comp + 3] * ch[3])
        if j > 0:
            for comp in range(4):
                out[4 * (j - 1) + comp] = -dxinv * (cur[comp] - prev[comp])
        for comp in range(4):
            prev[comp] = cur[comp]
    return -1


def _sweep_impl(double[:, :, ::1] u, double[:, :, ::1] flux, int g, int n,
                double gamma, double alpha, double dxinv, int scheme_id,
                double eps, double c_ds, int e,
                int[:, ::1] meta, double[::1] lparam,
                double[::1] wts, cnp.int64_t[::1] woff,
                double[::1] bias, cnp.int64_t[::1] boff,
                double[:, :, ::1] out, cnp.int64_t[::1] err, int num_threads):
    cdef int nrows = u.shape[0]
    cdef int m = u.shape[1]
    cdef int n_layers = meta.shape[0]
    cdef int row, bad
    cdef const int* meta_p = NULL
    cdef const double* lparam_p = NULL
    cdef const double* wts_p = NULL
    cdef const cnp.int64_t* woff_p = NULL
    cdef const double* bias_p = NULL
    cdef const cnp.int64_t* boff_p = NULL
    if n_layers > 0:
        meta_p = &meta[0, 0]
        lparam_p = &lparam[0]
        wts_p = &wts[0]
        woff_p = &woff[0]
        bias_p = &bias[0]
        boff_p = &boff[0]
    for row in prange(nrows, nogil=True, schedule="static", num_threads=num_threads):
        if err[0] >= 0:
            continue
        bad = _row(&u[row, 0, 0], &flux[row, 0, 0], m, g, n, gamma, alpha,
                   dxinv, scheme_id, eps, c_ds, e, n_layers, meta_p, lparam_p,
                   wts_p, woff_p, bias_p, boff_p, &out[row, 0, 0])
        if bad >= 0:
            err[0] = row
            err[1] = bad


def sweep(lines, ghost, gamma, alpha, dxinv, scheme, eps, c_ds,
          model=None, capture=None):
    """Drop-in replacement for the reference backend's sweep."""
    if capture is not None:
        raise ValueError("the capture hook only exists on the reference backend")
    scheme_id = _SCHEME_IDS[scheme]
    ds = scheme_id >= 2
    if ds and model is None:
        raise MissingModel(f"scheme {scheme!r} needs a CNN model")

    u = np.ascontiguousarray(lines, dtype=np.float64)
    nrows, m, _ = u.shape
    g = int(ghost)
    n = m - 2 * g
    e = (model.k - 1) if ds else 0
    if g < 3 + e:
        raise ValueError(f"ghost width {g} too small for stencil halo {3 + e}")
    if 6 + 2 * e > MAXWIN:
        raise ValueError(f"receptive field too wide for the compiled kernel (k={model.k})")

    rho = u[..., 0]
    if not (rho > 0.0).all():
        raise NonPhysicalState("non-positive density on a sweep line")
    vel = u[..., 1] / rho
    vt = u[..., 2] / rho
    p = (gamma - 1.0) * (u[..., 3] - 0.5 * rho * (vel * vel + vt * vt))
    if not (p > 0.0).all():
        raise NonPhysicalState("non-positive pressure on a sweep line")
    flux = np.empty_like(u)
    flux[..., 0] = u[..., 1]
    flux[..., 1] = u[..., 1] * vel + p
    flux[..., 2] = u[..., 1] * vt
    flux[..., 3] = vel * (u[..., 3] + p)

    if ds:
        pack = cnn_mod.pack_model(model)
        if int(np.max(pack.meta[:, 0])) > MAXCH:
            raise ValueError("model too wide for the compiled kernel")
        meta, lparam = pack.meta, pack.params
        wts, woff, bias, boff = pack.weights, pack.woff, pack.bias, pack.boff
    else:
        meta = np.zeros((0, 4), dtype=np.int32)
        lparam = np.zeros(0)
        wts = np.zeros(0)
        woff = np.zeros(1, dtype=np.int64)
        bias = np.zeros(0)
        boff = np.zeros(1, dtype=np.int64)

    out = np.empty((nrows, n, 4))
    err = np.full(2, -1, dtype=np.int64)
    # rows are independent; more threads help on machines where OpenMP
    # actually scales (the default stays serial, which is always safe)
    num_threads = max(1, int(os.environ.get("WENODS_THREADS", "1")))
    _sweep_impl(u, flux, g, n, gamma, alpha, dxinv, scheme_id, eps, c_ds, e,
                np.ascontiguousarray(meta), np.ascontiguousarray(lparam),
                np.ascontiguousarray(wts), np.ascontiguousarray(woff),
                np.ascontiguousarray(bias), np.ascontiguousarray(boff),
                out, err, num_threads)
    if err[0] >= 0:
        raise NonPhysicalState(
            f"non-physical interface average state (row {err[0]}, interface {err[1]})")
    return out
