"""Simultaneous polynomial root finding and root clustering.

Polynomials are given as ascending coefficient sequences
``c[0] + c[1] x + ... + c[N] x**N``.
"""
import math
from typing import NamedTuple

import numpy as np

from . import kernels
from .errors import NoConvergence

MAXITER = 500
STEP_TOL = 1e-14
RESIDUAL_TOL = 1e-10
CLUSTER_TOL = 1e-6


class RootCluster(NamedTuple):
    value: complex
    multiplicity: int


def _trim(coeffs):
    c = np.asarray(coeffs, dtype=complex).ravel()
    nz = np.nonzero(c)[0]
    if nz.size == 0:
        raise ValueError("zero polynomial has no roots")
    return c[: nz[-1] + 1]


def polyval(coeffs, z):
    """Horner evaluation of ascending ``coeffs`` at ``z`` (scalar or array)."""
    z = np.asarray(z, dtype=complex)
    p = np.zeros_like(z) + coeffs[-1]
    for c in coeffs[-2::-1]:
        p = p * z + c
    return p


def scaled_residual(coeffs, z):
    """``|p(z)| / sum_k |c_k| max(1, |z|)^k`` for each ``z``."""
    coeffs = np.asarray(coeffs, dtype=complex)
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    r = np.maximum(1.0, np.abs(z))
    scale = sum(abs(c) * r**k for k, c in enumerate(coeffs))
    return np.abs(polyval(coeffs, z)) / scale


def _phase_key(z):
    ang = math.atan2(z.imag, z.real) % (2 * math.pi)
    if ang > 2 * math.pi - 1e-12:
        ang = 0.0
    return ang


def _order_key(z):
    return (-round(abs(z), 9), round(_phase_key(z), 9))


def sort_roots(rs):
    """Order by descending modulus, then by phase in ``[0, 2 pi)``."""
    return sorted((complex(r) for r in rs), key=_order_key)


def roots(coeffs, maxiter=MAXITER):
    """All complex roots of a polynomial, by Aberth-Ehrlich iteration.

    Starting points sit on a circle whose radius is the Cauchy bound, so the
    result is a deterministic function of ``coeffs``. Exact roots at the
    origin (vanishing low-order coefficients) are split off first.

    Raises
    ------
    NoConvergence
        If the iteration cap is hit and some root still has a scaled
        residual above ``RESIDUAL_TOL``.
    """
    c = _trim(coeffs)
    deg = len(c) - 1
    if deg < 1:
        raise ValueError("polynomial must have degree >= 1")
    scale = np.max(np.abs(c))
    nzero = 0
    while nzero < deg and abs(c[nzero]) <= 1e-15 * scale:
        nzero += 1
    out = [0j] * nzero
    c_red = c[nzero:] / c[-1]
    d = len(c_red) - 1
    if d >= 1:
        radius = 1.0 + np.max(np.abs(c_red[:-1]))
        z0 = radius * np.exp(1j * (2 * np.pi * np.arange(d) / d + 0.4))
        z, _, _ = kernels.aberth(np.ascontiguousarray(c_red), z0, maxiter, STEP_TOL)
        res = scaled_residual(c_red, z)
        if not np.all(res < RESIDUAL_TOL):
            raise NoConvergence(
                f"Aberth iteration did not converge in {maxiter} steps "
                f"(worst residual {res.max():.3g})",
                roots=z,
                residuals=res,
            )
        out.extend(z.tolist())
    return sort_roots(out)


def cluster_roots(rs, tol=CLUSTER_TOL):
    """Group nearly equal roots into clusters with multiplicities.

    Two roots are linked when their distance is below ``tol * (1 + |root|)``;
    linked groups (transitively) form one cluster located at the group's
    centroid.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    rs = [complex(r) for r in rs]
    parent = list(range(len(rs)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(len(rs)):
        for j in range(i):
            if abs(rs[i] - rs[j]) < tol * (1.0 + max(abs(rs[i]), abs(rs[j]))):
                parent[find(i)] = find(j)
    groups = {}
    for i, r in enumerate(rs):
        groups.setdefault(find(i), []).append(r)
    clusters = [RootCluster(complex(np.mean(g)), len(g)) for g in groups.values()]
    return sorted(clusters, key=lambda cl: _order_key(cl.value))


def poly_from_clusters(clusters, leading=1.0):
    """Ascending coefficients of ``leading * prod (x - value)^multiplicity``."""
    p = np.array([leading], dtype=complex)
    for cl in clusters:
        for _ in range(cl.multiplicity):
            p = np.convolve(p, [-cl.value, 1.0])
    return p


def cluster_polynomial_roots(coeffs, rs=None, tols=(1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 3e-2, 1e-1),
                             rtol=1e-9):
    """Cluster the roots of ``coeffs``, choosing the tolerance automatically.

    A ``d``-fold root comes back from floating-point iteration as a ring of
    radius about ``eps**(1/d)``, so no fixed tolerance fits every
    multiplicity. Cluster centres are polished with
    :func:`refine_multiple_root`, and a candidate tolerance is accepted only
    if the clustered factorisation reproduces the coefficients to ``rtol``
    (relative to the largest coefficient). The coarsest accepted clustering
    wins.
    """
    c = _trim(coeffs)
    if rs is None:
        rs = roots(c)
    scale = np.max(np.abs(c))
    best = None
    for tol in tols:
        cand = sorted((refine_multiple_root(c, cl) for cl in cluster_roots(rs, tol)),
                      key=lambda cl: _order_key(cl.value))
        if best is not None and len(cand) >= len(best):
            continue
        err = np.max(np.abs(poly_from_clusters(cand, c[-1]) - c)) / scale
        if err <= rtol:
            best = cand
    return best if best is not None else cluster_roots(rs, tols[0])


def refine_multiple_root(coeffs, cluster, steps=30):
    """Polish a ``d``-fold cluster centre by Newton on the ``(d-1)``-th derivative.

    A ``d``-fold root is a simple root of ``p^(d-1)``, where Newton converges
    quadratically and is well conditioned.
    """
    d = cluster.multiplicity
    if d == 1:
        return cluster
    q = np.polynomial.polynomial.polyder(np.asarray(coeffs, dtype=complex), d - 1)
    dq = np.polynomial.polynomial.polyder(q)
    z = complex(cluster.value)
    for _ in range(steps):
        den = complex(polyval(dq, z))
        if den == 0:
            break
        step = complex(polyval(q, z)) / den
        z -= step
        if abs(step) <= 4 * np.finfo(float).eps * (1.0 + abs(z)):
            break
    if abs(z - cluster.value) > 0.5 * (1.0 + abs(cluster.value)):
        return cluster
    return RootCluster(z, d)
