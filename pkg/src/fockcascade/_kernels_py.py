"""Pure numpy versions of the compiled kernels in ``_kernels.pyx``."""
import numpy as np

EPS = np.finfo(float).eps


def aberth(coeffs, z0, maxiter, steptol):
    """Aberth-Ehrlich iteration (Jacobi sweep) on ascending ``coeffs``.

    Returns ``(roots, iterations, all_converged)``. A root freezes once its
    step is below ``steptol * (1 + |z|)`` or its backward error reaches
    rounding level.
    """
    coeffs = np.asarray(coeffs, dtype=complex)
    deg = len(coeffs) - 1
    z = np.array(z0, dtype=complex)
    conv = np.zeros(deg, dtype=bool)
    absc = np.abs(coeffs)
    it = 0
    while it < maxiter and not conv.all():
        it += 1
        active = ~conv
        zi = z[active]
        az = np.abs(zi)
        p = np.full(zi.shape, coeffs[deg])
        dp = np.zeros_like(zi)
        mag = np.full(az.shape, absc[deg])
        for k in range(deg - 1, -1, -1):
            dp = dp * zi + p
            p = p * zi + coeffs[k]
            mag = mag * az + absc[k]
        small = np.abs(p) <= 4.0 * deg * EPS * mag
        diff = zi[:, None] - z[None, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            inv = np.where(diff != 0, 1.0 / np.where(diff != 0, diff, 1.0), 0.0)
            s = inv.sum(axis=1)
            ratio = p / np.where(dp != 0, dp, 1.0)
            w = ratio / (1.0 - ratio * s)
        w = np.where(dp == 0, 1e-8 * (1.0 + az), w)
        w = np.where(small, 0.0, w)
        idx = np.nonzero(active)[0]
        conv[idx[small]] = True
        conv[idx[~small & (dp != 0) & (np.abs(w) < steptol * (1.0 + az))]] = True
        z[idx] -= w
    return z, it, bool(conv.all())


def walk_shots(u, cdf, target):
    """Inverse-CDF walk through a chain of outcome tables with early abort.

    ``u[i, s]`` is the uniform for shot ``i`` at stage ``s``; the outcome is
    the number of ``cdf[s]`` entries ``<= u`` (index ``K`` means overflow).
    A shot stops at its first outcome differing from ``target[s]``. Returns
    ``hist[s, k]``: shots that reached stage ``s`` and saw outcome ``k``.
    """
    stages, K = cdf.shape
    hist = np.zeros((stages, K + 1), dtype=np.int64)
    alive = np.arange(u.shape[0])
    for s in range(stages):
        if alive.size == 0:
            break
        k = np.searchsorted(cdf[s], u[alive, s], side="right")
        hist[s] += np.bincount(k, minlength=K + 1)
        alive = alive[k == target[s]]
    return hist
