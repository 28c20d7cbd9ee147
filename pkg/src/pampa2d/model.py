"""Ripa model physics: fluxes, variable sets, Jacobians, sources, wave speeds.

Conservative state u = (h, hu, hv, htheta).  The point-value schemes work in
a non-conservative variable set: either pressure-momentum-temperature
v = (p, hu, hv, theta) with p = h*htheta = h^2*theta (the default, which
preserves both the lake-at-rest and the isobaric equilibrium) or primitive
q = (h, u, v, theta) (preserves lake-at-rest only; kept for comparison runs).

All functions are vectorized over arbitrary leading axes and are pure.  The
scheme internals call them with ``check=False`` and rely on NaN propagation,
which the a-posteriori limiter interprets as inadmissibility; the checked
paths raise ``InvariantDomainError`` instead.
"""

from __future__ import annotations

import numpy as np

H_FLOOR = 1.0e-13
THETA_FLOOR = 1.0e-13

_EYE4 = np.eye(4)


class InvariantDomainError(ValueError):
    """State left the invariant domain (h > 0, theta > 0)."""


class HyperbolicityError(RuntimeError):
    """Failed to produce a real eigendecomposition of J.n."""


def _require(cond, msg):
    if not np.all(cond):
        raise InvariantDomainError(msg)


def cons_components(u):
    """Split u into (h, hu, hv, htheta)."""
    u = np.asarray(u, dtype=float)
    return u[..., 0], u[..., 1], u[..., 2], u[..., 3]


def flux(u, g, check=True):
    """Flux tensor, shape (..., 4, 2): columns are the x- and y-fluxes."""
    h, hu, hv, hth = cons_components(u)
    if check:
        _require(h >= H_FLOOR, "flux: nonpositive depth")
        _require(hth / h >= THETA_FLOOR, "flux: nonpositive temperature")
    uu = hu / h
    vv = hv / h
    pr = 0.5 * g * h * hth  # (g/2) h^2 theta
    out = np.empty(np.shape(h) + (4, 2))
    out[..., 0, 0] = hu
    out[..., 1, 0] = hu * uu + pr
    out[..., 2, 0] = hv * uu
    out[..., 3, 0] = hth * uu
    out[..., 0, 1] = hv
    out[..., 1, 1] = hu * vv
    out[..., 2, 1] = hv * vv + pr
    out[..., 3, 1] = hth * vv
    return out


def normal_flux(u, n, g, check=True):
    """f(u) . n for a 2-vector n (broadcastable)."""
    f = flux(u, g, check=check)
    n = np.asarray(n, dtype=float)
    return f[..., 0] * n[..., 0, None] + f[..., 1] * n[..., 1, None]


# -- variable transformations ------------------------------------------------

def to_pmt(u, check=True):
    """(h, hu, hv, htheta) -> (p, hu, hv, theta) with p = h*htheta."""
    h, hu, hv, hth = cons_components(u)
    if check:
        _require(h >= H_FLOOR, "to_pmt: nonpositive depth")
        _require(hth / h >= THETA_FLOOR, "to_pmt: nonpositive temperature")
    return np.stack([h * hth, hu, hv, hth / h], axis=-1)


def from_pmt(v, check=True):
    """(p, hu, hv, theta) -> (h, hu, hv, htheta)."""
    v = np.asarray(v, dtype=float)
    p, hu, hv, th = v[..., 0], v[..., 1], v[..., 2], v[..., 3]
    if check:
        _require(th >= THETA_FLOOR, "from_pmt: nonpositive temperature")
        _require(p > 0.0, "from_pmt: nonpositive pressure")
    with np.errstate(invalid="ignore", divide="ignore"):
        h = np.sqrt(p / th)
        hth = np.sqrt(p * th)
    if check:
        _require(h >= H_FLOOR, "from_pmt: depth below floor")
    return np.stack([h, hu, hv, hth], axis=-1)


def to_prim(u, check=True):
    """(h, hu, hv, htheta) -> (h, u, v, theta)."""
    h, hu, hv, hth = cons_components(u)
    if check:
        _require(h >= H_FLOOR, "to_prim: nonpositive depth")
    return np.stack([h, hu / h, hv / h, hth / h], axis=-1)


def from_prim(q, check=True):
    """(h, u, v, theta) -> (h, hu, hv, htheta)."""
    q = np.asarray(q, dtype=float)
    h, uu, vv, th = q[..., 0], q[..., 1], q[..., 2], q[..., 3]
    if check:
        _require(h >= H_FLOOR, "from_prim: nonpositive depth")
        _require(th >= THETA_FLOOR, "from_prim: nonpositive temperature")
    return np.stack([h, h * uu, h * vv, h * th], axis=-1)


def to_variables(u, variable_set, check=True):
    if variable_set == "pmt":
        return to_pmt(u, check=check)
    if variable_set == "prim":
        return to_prim(u, check=check)
    raise ValueError(f"unknown variable_set: {variable_set!r}")


def from_variables(v, variable_set, check=True):
    if variable_set == "pmt":
        return from_pmt(v, check=check)
    if variable_set == "prim":
        return from_prim(v, check=check)
    raise ValueError(f"unknown variable_set: {variable_set!r}")


def state_primitives(v, variable_set):
    """(h, u, v, theta) recovered from a non-conservative state, unchecked."""
    v = np.asarray(v, dtype=float)
    if variable_set == "pmt":
        p, mx, my, th = v[..., 0], v[..., 1], v[..., 2], v[..., 3]
        with np.errstate(invalid="ignore", divide="ignore"):
            h = np.sqrt(p / th)
            uu = mx / h
            vv = my / h
        return h, uu, vv, th
    if variable_set == "prim":
        return v[..., 0], v[..., 1], v[..., 2], v[..., 3]
    raise ValueError(f"unknown variable_set: {variable_set!r}")


# -- Jacobians of the non-conservative forms ----------------------------------

def jacobians_pmt(v, g):
    """Jacobian pair (A, B) of the pressure-momentum-temperature form."""
    h, uu, vv, th = state_primitives(v, "pmt")
    hth = h * th
    shp = np.shape(h) + (4, 4)
    A = np.zeros(shp)
    B = np.zeros(shp)
    A[..., 0, 1] = 2.0 * hth
    A[..., 0, 3] = h * h * uu
    A[..., 1, 0] = 0.5 * (g - uu * uu / hth)
    A[..., 1, 1] = 2.0 * uu
    A[..., 1, 3] = 0.5 * h * uu * uu / th
    A[..., 2, 0] = -0.5 * uu * vv / hth
    A[..., 2, 1] = vv
    A[..., 2, 2] = uu
    A[..., 2, 3] = 0.5 * h * uu * vv / th
    A[..., 3, 3] = uu

    B[..., 0, 2] = 2.0 * hth
    B[..., 0, 3] = h * h * vv
    B[..., 1, 0] = -0.5 * uu * vv / hth
    B[..., 1, 1] = vv
    B[..., 1, 2] = uu
    B[..., 1, 3] = 0.5 * h * uu * vv / th
    B[..., 2, 0] = 0.5 * (g - vv * vv / hth)
    B[..., 2, 2] = 2.0 * vv
    B[..., 2, 3] = 0.5 * h * vv * vv / th
    B[..., 3, 3] = vv
    return A, B


def jacobians_prim(q, g):
    """Jacobian pair (A, B) of the primitive-variable form."""
    h, uu, vv, th = state_primitives(q, "prim")
    shp = np.shape(h) + (4, 4)
    A = np.zeros(shp)
    B = np.zeros(shp)
    A[..., 0, 0] = uu
    A[..., 0, 1] = h
    A[..., 1, 0] = g * th
    A[..., 1, 1] = uu
    A[..., 1, 3] = 0.5 * g * h
    A[..., 2, 2] = uu
    A[..., 3, 3] = uu

    B[..., 0, 0] = vv
    B[..., 0, 2] = h
    B[..., 1, 1] = vv
    B[..., 2, 0] = g * th
    B[..., 2, 2] = vv
    B[..., 2, 3] = 0.5 * g * h
    B[..., 3, 3] = vv
    return A, B


def k_matrix(v, n, g, variable_set="pmt"):
    """K = A n_x + B n_y at a non-conservative state, shape (..., 4, 4)."""
    n = np.asarray(n, dtype=float)
    nx, ny = n[..., 0], n[..., 1]
    h, uu, vv, th = state_primitives(v, variable_set)
    un = uu * nx + vv * ny
    K = np.zeros(np.broadcast_shapes(np.shape(h), np.shape(nx)) + (4, 4))
    if variable_set == "pmt":
        hth = h * th
        K[..., 0, 1] = 2.0 * hth * nx
        K[..., 0, 2] = 2.0 * hth * ny
        K[..., 0, 3] = h * h * un
        K[..., 1, 0] = 0.5 * g * nx - 0.5 * uu * un / hth
        K[..., 1, 1] = uu * nx + un
        K[..., 1, 2] = uu * ny
        K[..., 1, 3] = 0.5 * h * uu * un / th
        K[..., 2, 0] = 0.5 * g * ny - 0.5 * vv * un / hth
        K[..., 2, 1] = vv * nx
        K[..., 2, 2] = vv * ny + un
        K[..., 2, 3] = 0.5 * h * vv * un / th
        K[..., 3, 3] = un
    else:
        K[..., 0, 0] = un
        K[..., 0, 1] = h * nx
        K[..., 0, 2] = h * ny
        K[..., 1, 0] = g * th * nx
        K[..., 1, 1] = un
        K[..., 1, 3] = 0.5 * g * h * nx
        K[..., 2, 0] = g * th * ny
        K[..., 2, 2] = un
        K[..., 2, 3] = 0.5 * g * h * ny
        K[..., 3, 3] = un
    return K


def k_split_closed(K, un, cnorm):
    """Split K into K+ and K- from its known spectrum.

    The spectrum is {un, un, un + cnorm, un - cnorm}; the split is evaluated
    as a quadratic matrix polynomial (Lagrange interpolation of max/min on
    the three distinct eigenvalues), which handles the double contact
    eigenvalue without forming eigenvectors.
    """
    un = np.asarray(un, dtype=float)[..., None, None]
    bb = np.asarray(cnorm, dtype=float)[..., None, None]
    M = K - un * _EYE4
    M2 = M @ M
    c2 = bb * bb
    with np.errstate(invalid="ignore", divide="ignore"):
        P0 = _EYE4 - M2 / c2
        Pp = 0.5 * (M2 + bb * M) / c2
        Pm = 0.5 * (M2 - bb * M) / c2
    lam0 = un
    lamp = un + bb
    lamm = un - bb
    Kp = (
        np.maximum(lam0, 0.0) * P0
        + np.maximum(lamp, 0.0) * Pp
        + np.maximum(lamm, 0.0) * Pm
    )
    Km = (
        np.minimum(lam0, 0.0) * P0
        + np.minimum(lamp, 0.0) * Pp
        + np.minimum(lamm, 0.0) * Pm
    )
    return Kp, Km


def k_decompose(v, n, g, variable_set="pmt"):
    """Return (K, K+, K-) at a non-conservative state for a nonzero normal.

    Uses the closed-form split; if its residual check fails, falls back to a
    numerical eigendecomposition and raises ``HyperbolicityError`` when no
    real, well-conditioned eigenbasis exists.
    """
    v = np.asarray(v, dtype=float)
    n = np.asarray(n, dtype=float)
    h, uu, vv, th = state_primitives(v, variable_set)
    nnorm = np.hypot(n[..., 0], n[..., 1])
    if not np.all(nnorm > 0.0):
        raise ValueError("k_decompose: zero normal vector")
    K = k_matrix(v, n, g, variable_set)
    un = uu * n[..., 0] + vv * n[..., 1]
    cnorm = np.sqrt(g * h * th) * nnorm
    Kp, Km = k_split_closed(K, un, cnorm)
    resid = np.abs(Kp + Km - K).max()
    scale = np.abs(K).max() + 1.0
    if np.isfinite(resid) and resid <= 1.0e-10 * scale:
        return K, Kp, Km
    # fallback: generic eigensolver on a single matrix
    if K.ndim != 2:
        raise HyperbolicityError("closed-form split failed on a batch")
    lam, R = np.linalg.eig(K)
    if np.abs(lam.imag).max() > 1.0e-8 * (np.abs(lam.real).max() + 1.0):
        raise HyperbolicityError("complex eigenvalues: state not hyperbolic")
    lam = lam.real
    R = R.real
    if np.linalg.cond(R) > 1.0e12:
        raise HyperbolicityError("eigenvector basis is numerically singular")
    Rinv = np.linalg.inv(R)
    Kp = R @ np.diag(np.maximum(lam, 0.0)) @ Rinv
    Km = R @ np.diag(np.minimum(lam, 0.0)) @ Rinv
    return K, Kp, Km


def jdot_grad(v, grads, g, variable_set="pmt"):
    """J(v) . grad(v) evaluated componentwise, without forming matrices.

    ``grads`` holds the two-dimensional gradients of the four non-conservative
    components, shape (..., 4, 2).
    """
    grads = np.asarray(grads, dtype=float)
    h, uu, vv, th = state_primitives(v, variable_set)
    out = np.empty(np.shape(h) + (4,))
    if variable_set == "pmt":
        gp = grads[..., 0, :]
        gmx = grads[..., 1, :]
        gmy = grads[..., 2, :]
        gth = grads[..., 3, :]
        hth = h * th
        adv_p = uu * gp[..., 0] + vv * gp[..., 1]
        adv_th = uu * gth[..., 0] + vv * gth[..., 1]
        out[..., 0] = 2.0 * hth * (gmx[..., 0] + gmy[..., 1]) + h * h * adv_th
        out[..., 1] = (
            0.5 * g * gp[..., 0]
            - 0.5 * uu * adv_p / hth
            + 2.0 * uu * gmx[..., 0]
            + vv * gmx[..., 1]
            + uu * gmy[..., 1]
            + 0.5 * h * uu * adv_th / th
        )
        out[..., 2] = (
            0.5 * g * gp[..., 1]
            - 0.5 * vv * adv_p / hth
            + vv * gmx[..., 0]
            + uu * gmy[..., 0]
            + 2.0 * vv * gmy[..., 1]
            + 0.5 * h * vv * adv_th / th
        )
        out[..., 3] = adv_th
    else:
        gh = grads[..., 0, :]
        gu = grads[..., 1, :]
        gv = grads[..., 2, :]
        gth = grads[..., 3, :]
        adv_h = uu * gh[..., 0] + vv * gh[..., 1]
        adv_u = uu * gu[..., 0] + vv * gu[..., 1]
        adv_v = uu * gv[..., 0] + vv * gv[..., 1]
        adv_th = uu * gth[..., 0] + vv * gth[..., 1]
        out[..., 0] = adv_h + h * (gu[..., 0] + gv[..., 1])
        out[..., 1] = g * th * gh[..., 0] + adv_u + 0.5 * g * h * gth[..., 0]
        out[..., 2] = g * th * gh[..., 1] + adv_v + 0.5 * g * h * gth[..., 1]
        out[..., 3] = adv_th
    return out


def k_plus(v, n, g, variable_set="pmt"):
    """Positive part of J(v).n (scaled normal), closed form, batched."""
    n = np.asarray(n, dtype=float)
    h, uu, vv, th = state_primitives(v, variable_set)
    K = k_matrix(v, n, g, variable_set)
    un = uu * n[..., 0] + vv * n[..., 1]
    with np.errstate(invalid="ignore"):
        cnorm = np.sqrt(g * h * th) * np.hypot(n[..., 0], n[..., 1])
    un_b = un[..., None, None]
    bb = cnorm[..., None, None]
    M = K - un_b * _EYE4
    M2 = M @ M
    with np.errstate(invalid="ignore", divide="ignore"):
        inv2 = 0.5 / (bb * bb)
    Kp = (
        np.maximum(un_b, 0.0) * (_EYE4 - 2.0 * inv2 * M2)
        + np.maximum(un_b + bb, 0.0) * inv2 * (M2 + bb * M)
        + np.maximum(un_b - bb, 0.0) * inv2 * (M2 - bb * M)
    )
    return Kp


# -- sources ------------------------------------------------------------------

def split_source_pmt(v, z, grad_z, grad_z2, g):
    """Split momentum source (g theta/2) grad(Z^2) - g w theta grad(Z).

    ``z`` is the bottom value at the evaluation point (w = h + z), ``grad_z``
    and ``grad_z2`` the FD gradients of Z and Z^2 there, shape (..., 2).
    """
    h, _, _, th = state_primitives(v, "pmt")
    grad_z = np.asarray(grad_z, dtype=float)
    grad_z2 = np.asarray(grad_z2, dtype=float)
    w = h + np.asarray(z, dtype=float)
    out = np.zeros(np.shape(h) + (4,))
    coef1 = 0.5 * g * th
    coef2 = g * w * th
    out[..., 1] = coef1 * grad_z2[..., 0] - coef2 * grad_z[..., 0]
    out[..., 2] = coef1 * grad_z2[..., 1] - coef2 * grad_z[..., 1]
    return out


def source_prim(q, grad_z, g):
    """Primitive-form momentum source (0, -g theta grad Z, 0)."""
    th = np.asarray(q, dtype=float)[..., 3]
    grad_z = np.asarray(grad_z, dtype=float)
    out = np.zeros(np.shape(th) + (4,))
    out[..., 1] = -g * th * grad_z[..., 0]
    out[..., 2] = -g * th * grad_z[..., 1]
    return out


def point_source(v, z, grad_z, grad_z2, g, variable_set="pmt"):
    if variable_set == "pmt":
        return split_source_pmt(v, z, grad_z, grad_z2, g)
    return source_prim(v, grad_z, g)


# -- wave speeds and oracles ---------------------------------------------------

def max_wave_speed(u, n, g, check=True):
    """Spectral radius |nu.n| + sqrt(g h theta) for a unit normal n."""
    h, hu, hv, hth = cons_components(u)
    if check:
        _require(h >= H_FLOOR, "max_wave_speed: nonpositive depth")
    n = np.asarray(n, dtype=float)
    un = (hu * n[..., 0] + hv * n[..., 1]) / h
    return np.abs(un) + np.sqrt(g * hth)  # g*h*theta = g*htheta


def psi_jacobian_fd(u, variable_set="pmt", rel=1.0e-7):
    """Finite-difference Jacobian of the variable map Psi at a single state."""
    u = np.asarray(u, dtype=float)
    M = np.empty((4, 4))
    for j in range(4):
        d = rel * max(abs(u[j]), 1.0)
        up = u.copy()
        um = u.copy()
        up[j] += d
        um[j] -= d
        M[:, j] = (
            to_variables(up, variable_set) - to_variables(um, variable_set)
        ) / (2.0 * d)
    return M
