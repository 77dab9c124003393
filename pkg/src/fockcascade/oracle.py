"""Brute-force two-mode reference for the conditional stage maps.

The beam splitter acts on creation operators as

    a^dag -> T a^dag - R* b^dag,     b^dag -> R a^dag + T* b^dag,

with ``a`` the signal and ``b`` the ancilla. It is generated by
``exp(sum_ij G_ji a_j^dag a_i)`` with ``G = logm(S)``; that generator conserves
the total photon number, so the unitary is assembled from independent blocks
of fixed total number, each exponentiated exactly. Nothing in this module
uses the factorised stage operator.
"""
import threading
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm, logm

from . import fock


@dataclass(frozen=True)
class TwoModeSpace:
    """Product space ``|n_a> (x) |n_b>`` flattened as ``n_a * cutoff_b + n_b``."""

    cutoff_a: int
    cutoff_b: int

    def __post_init__(self):
        if self.cutoff_a < 1 or self.cutoff_b < 1:
            raise ValueError("cutoffs must be >= 1")

    @property
    def dim(self):
        return self.cutoff_a * self.cutoff_b

    def index(self, n_a, n_b):
        return n_a * self.cutoff_b + n_b


def mode_matrix(bs):
    """Single-photon matrix ``S``: column ``i`` is the image of mode ``i``'s creation operator."""
    t, r = complex(bs.t), complex(bs.r)
    return np.array([[t, r], [-np.conj(r), np.conj(t)]])


class _BlockCache:
    """Per-beam-splitter list of fixed-photon-number blocks, grown on demand."""

    def __init__(self):
        self._lock = threading.Lock()
        self._blocks = {}

    def get(self, bs, n_max):
        key = (complex(bs.t), complex(bs.r))
        with self._lock:
            blocks = self._blocks.setdefault(key, [])
            if len(blocks) <= n_max:
                g = logm(mode_matrix(bs))
                for n in range(len(blocks), n_max + 1):
                    blk = expm(_block_generator(g, n))
                    blk.flags.writeable = False
                    blocks.append(blk)
            return blocks[: n_max + 1]


_CACHE = _BlockCache()


def _block_generator(g, n):
    """Generator restricted to the ``n``-photon block, basis ``|k, n-k>``."""
    k = np.arange(n + 1)
    h = np.diag(g[0, 0] * k + g[1, 1] * (n - k)).astype(complex)
    # a^dag b : |k, n-k> -> sqrt((k+1)(n-k)) |k+1, n-k-1>
    up = np.sqrt((k[:-1] + 1) * (n - k[:-1]))
    h[k[1:], k[:-1]] += g[0, 1] * up
    # b^dag a : |k, n-k> -> sqrt(k(n-k+1)) |k-1, n-k+1>
    h[k[:-1], k[1:]] += g[1, 0] * up
    return h


def number_blocks(bs, n_max):
    """Blocks ``U_n`` (``n = 0..n_max``) indexed by the signal photon number."""
    return _CACHE.get(bs, n_max)


def beam_splitter_unitary(space2, bs):
    """Dense two-mode beam-splitter matrix on ``space2``.

    Blocks whose total photon number fits in both cutoffs are complete and
    exactly unitary; higher blocks are cropped by the truncation.
    """
    ca, cb = space2.cutoff_a, space2.cutoff_b
    blocks = number_blocks(bs, ca + cb - 2)
    u = np.zeros((space2.dim, space2.dim), dtype=complex)
    for n, blk in enumerate(blocks):
        ks = np.arange(max(0, n - cb + 1), min(n, ca - 1) + 1)
        idx = ks * cb + (n - ks)
        u[np.ix_(idx, idx)] = blk[np.ix_(ks, ks)]
    return u


def ancilla_cutoff(alpha, extra=0):
    return fock.coherent_cutoff(alpha, fock.WORKSPACE_TAIL_TOL) + int(extra) + 2


def stage_kraus(cutoff, bs, alpha, m_max=None, cutoff_b=None):
    """Signal-mode maps ``K_m = <m|_b U (1 (x) |alpha>_b)`` for ``m = 0..m_max``.

    Returns an array of shape ``(m_max + 1, cutoff, cutoff)``. Signal outputs
    above ``cutoff`` are dropped; ancilla components beyond ``cutoff_b`` are
    below the workspace tail tolerance.
    """
    cb = ancilla_cutoff(alpha) if cutoff_b is None else int(cutoff_b)
    if m_max is None:
        m_max = cb + cutoff
    c = fock.coherent_state(cb, alpha) if alpha != 0 else fock.basis(cb, 0)
    blocks = number_blocks(bs, cutoff + max(cb, m_max + 1))
    out = np.zeros((m_max + 1, cutoff, cutoff), dtype=complex)
    i = np.arange(cutoff)
    for m in range(m_max + 1):
        for o in range(cutoff):
            n = o + m
            k = n - i
            ok = (k >= 0) & (k < cb)
            if not ok.any():
                continue
            blk = blocks[n]
            out[m, o, i[ok]] = c[k[ok]] * blk[o, i[ok]]
    return out


def conditional_stage_oracle(cutoff, bs, alpha, d, cutoff_b=None):
    """``<d|_b U (1 (x) |alpha>_b)`` on a signal space of the given cutoff."""
    if d < 0:
        raise ValueError("d must be >= 0")
    cb = ancilla_cutoff(alpha, d) if cutoff_b is None else cutoff_b
    c = fock.coherent_state(cb, alpha) if alpha != 0 else fock.basis(cb, 0)
    blocks = number_blocks(bs, cutoff + d)
    k_mat = np.zeros((cutoff, cutoff), dtype=complex)
    i = np.arange(cutoff)
    for o in range(cutoff):
        k = o + d - i
        ok = (k >= 0) & (k < cb)
        k_mat[o, i[ok]] = c[k[ok]] * blocks[o + d][o, i[ok]]
    return k_mat


def oracle_dimension(dim, scheme):
    """Signal dimension that holds every intermediate conditional state.

    Each stage displaces by ``-T* alpha / R*``, attenuates by ``T`` and
    displaces by ``alpha / R*``; the largest centre reached along the way
    sets the coherent margin.
    """
    t, rc = scheme.bs.t, np.conj(scheme.bs.r)
    centre, reach = 0j, 0.0
    for s in scheme.stages:
        mid = centre - np.conj(t) * s.alpha / rc
        centre = s.alpha / rc + t * mid
        reach = max(reach, abs(mid), abs(centre))
    return max(dim, fock.working_cutoff(dim + scheme.n_photons, [reach]), 24)


def cascade_probability_oracle(rho_in, scheme, dim=None):
    """Joint probability of the accepting pattern, stage by stage.

    Each stage applies ``rho -> K rho K^dag`` with the unnormalised oracle map
    for the required click count; the final detector contributes ``<0|rho|0>``.
    """
    rho = fock.check_density(rho_in)
    dim = oracle_dimension(rho.shape[0], scheme) if dim is None else dim
    rho = fock.embed(rho, dim)
    for s in scheme.stages:
        k = conditional_stage_oracle(dim, scheme.bs, s.alpha, s.clicks)
        rho = k @ rho @ k.conj().T
    return float(rho[0, 0].real)


def number_conservation_error(u, space2):
    """Largest matrix element connecting different total photon numbers."""
    cb = space2.cutoff_b
    idx = np.arange(space2.dim)
    tot = idx // cb + idx % cb
    mask = tot[:, None] != tot[None, :]
    return float(np.max(np.abs(u[mask]), initial=0.0))


def unitarity_error(u, space2):
    """``max|U^dag U - 1|`` on blocks untouched by the truncation."""
    cb = space2.cutoff_b
    idx = np.arange(space2.dim)
    keep = (idx // cb + idx % cb) < min(space2.cutoff_a, space2.cutoff_b)
    sub = u[np.ix_(keep, keep)]
    return float(np.max(np.abs(sub.conj().T @ sub - np.eye(sub.shape[0]))))
