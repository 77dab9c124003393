"""Cat-like reference states and their two-stage cascade.

``|Psi_n(beta)> ~ [(a^dag)^2 - beta*^2]^n |0>`` has the two zeros ``+beta`` and
``-beta``, each ``n``-fold, so a cascade of two stages demanding ``n`` clicks
each projects onto it. For ``n = |beta|^2`` the state approaches the even
coherent-state superposition ``|i beta> + |-i beta>``.
"""
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import gammaln, logsumexp

from . import fock
from .errors import DesignVerificationFailed, TooManyZerosForCutoff
from .scheme import (
    design_scheme,
    efficiency_numeric,
    joint_event_probability,
)

#: Sums switch to log space above this ``n``.
LOG_SPACE_N = 12


@dataclass(frozen=True)
class CatLikeSpec:
    n: int
    beta: complex
    normalization: float


def _log_comb(n, k):
    return gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)


def cat_normalization(n, beta):
    """``sum_k C(n,k)^2 (2k)! |beta|^(4(n-k))``."""
    b2 = abs(beta) ** 2
    k = np.arange(n + 1)
    if n <= LOG_SPACE_N:
        return float(sum(math.comb(n, int(j)) ** 2 * math.factorial(2 * int(j)) * b2 ** (2 * (n - int(j))) for j in k))
    if b2 == 0:
        return math.exp(gammaln(2 * n + 1))
    terms = 2 * _log_comb(n, k) + gammaln(2 * k + 1) + 2 * (n - k) * math.log(b2)
    return float(math.exp(logsumexp(terms)))


def hyp1f2_terminating(n, b, c, x):
    """``1F2(-n; b, c; x)``; the series stops after ``n + 1`` terms."""
    total, term = 1.0, 1.0
    for k in range(n):
        term *= (-n + k) / ((b + k) * (c + k)) * x / (k + 1)
        total += term
    return total


def cat_normalization_hypergeometric(n, beta):
    """``4^n n! Gamma(n + 1/2) / sqrt(pi) * 1F2(-n; 1/2 - n, 1; |beta|^4 / 4)``."""
    pref = math.exp(n * math.log(4) + gammaln(n + 1) + gammaln(n + 0.5) - 0.5 * math.log(math.pi))
    return pref * hyp1f2_terminating(n, 0.5 - n, 1.0, abs(beta) ** 4 / 4)


def cat_like_state(n, beta, cutoff=None):
    """Normalised ``[(a^dag)^2 - beta*^2]^n |0>`` and its :class:`CatLikeSpec`."""
    if n < 1:
        raise ValueError("n must be >= 1")
    cutoff = 2 * n + 1 if cutoff is None else cutoff
    if 2 * n >= cutoff:
        raise TooManyZerosForCutoff(f"2n={2 * n} zeros need cutoff > {2 * n}, got {cutoff}")
    beta = complex(beta)
    norm = cat_normalization(n, beta)
    psi = np.zeros(cutoff, dtype=complex)
    b2c = -np.conj(beta) ** 2
    for k in range(n + 1):
        # C(n,k) (-beta*^2)^(n-k) sqrt((2k)!) / sqrt(N), assembled in logs
        mag = _log_comb(n, k) + 0.5 * gammaln(2 * k + 1) - 0.5 * math.log(norm)
        if n - k:
            if b2c == 0:
                continue
            mag += (n - k) * math.log(abs(b2c))
            psi[2 * k] = math.exp(mag) * np.exp(1j * (n - k) * np.angle(b2c))
        else:
            psi[2 * k] = math.exp(mag)
    if abs(np.linalg.norm(psi) - 1.0) > 1e-9:
        raise AssertionError("cat-like state normalisation disagrees with the direct sum")
    return psi, CatLikeSpec(n, beta, norm)


def cat_state(beta, cutoff, normalization="exact"):
    """``e^{i|beta|^2 (pi - 2 arg beta)} (|i beta> + |-i beta>)``, normalised.

    ``normalization="exact"`` divides by the true norm (the components overlap);
    ``"sqrt2"`` uses the plain factor ``1/sqrt(2)``, which is what the
    closed-form overlap :func:`cat_overlap_closed_form` assumes.
    """
    beta = complex(beta)
    phase = np.exp(1j * abs(beta) ** 2 * (math.pi - 2 * np.angle(beta)))
    v = fock.coherent_state(cutoff, 1j * beta) + fock.coherent_state(cutoff, -1j * beta)
    if normalization == "exact":
        return phase * v / np.linalg.norm(v)
    if normalization == "sqrt2":
        return phase * v / math.sqrt(2)
    raise ValueError(f"unknown normalization {normalization!r}")


def cat_overlap_closed_form(n):
    """``2 (4/e)^n / sum_k p_k f_k`` with ``p_k f_k = C(n,k)^2 (2k)! / n^(2k)``."""
    k = np.arange(n + 1)
    if n <= LOG_SPACE_N:
        s = sum(math.comb(n, int(j)) ** 2 * math.factorial(2 * int(j)) / n ** (2 * int(j)) for j in k)
        return 2 * (4 / math.e) ** n / s
    log_s = logsumexp(2 * _log_comb(n, k) + gammaln(2 * k + 1) - 2 * k * math.log(n))
    return math.exp(math.log(2) + n * (math.log(4) - 1) - log_s)


def cat_scheme(n, beta, bs):
    """Two merged stages with ``n`` clicks each, designed for ``|Psi_n(beta)>``."""
    psi, _ = cat_like_state(n, beta)
    scheme, report = design_scheme(psi, bs, merge_degenerate=True)
    clicks = [s.clicks for s in scheme.stages]
    if beta != 0 and clicks != [n, n]:
        raise DesignVerificationFailed(f"expected stage clicks ({n}, {n}), got {clicks}")
    return scheme, report


def cat_efficiency_closed_form(n, beta, bs):
    """``N |R^2 T|^(2n) / n!^2 exp{-|R beta / T|^2 [1 + |T|^-2 (1 - 2|T|^2)^2]}``."""
    t2 = abs(bs.t) ** 2
    r2 = abs(bs.r) ** 2
    b2 = abs(beta) ** 2
    log_eff = (
        math.log(cat_normalization(n, beta))
        + 2 * n * math.log(r2 * abs(bs.t))
        - 2 * gammaln(n + 1)
        - r2 * b2 / t2 * (1 + (1 - 2 * t2) ** 2 / t2)
    )
    return math.exp(log_eff)


class SuperpositionOverlap(NamedTuple):
    pipeline: float
    direct: float
    n: int
    beta: complex
    gamma: complex
    relative_phase: float


def coherent_superposition(beta1, beta2, cutoff):
    """``|beta1> + |beta2>`` normalised with the exact overlap."""
    b1, b2 = complex(beta1), complex(beta2)
    ov = np.exp(-0.5 * abs(b1) ** 2 - 0.5 * abs(b2) ** 2 + np.conj(b1) * b2)
    v = fock.coherent_state(cutoff, b1) + fock.coherent_state(cutoff, b2)
    return v / math.sqrt(2 + 2 * ov.real)


def displaced_superposition_overlap(rho, beta1, beta2, bs):
    """Overlap of ``rho`` with ``|beta1> + |beta2>`` through a displaced cat cascade.

    ``rho`` is displaced by ``-gamma`` with ``gamma = (beta1 + beta2)/2`` and
    measured against ``|Psi_n(beta)>``, ``beta = (beta1 - beta2)/(2i)``,
    ``n = max(1, round(|beta|^2))``. ``D(gamma)(|i beta> + |-i beta>)`` equals
    ``|beta1> + |beta2>`` only up to the relative phase
    ``2 Im(gamma conj(i beta))`` between the branches, which is returned.
    ``direct`` is the exact overlap with the normalised ``|beta1> + |beta2>``.
    """
    rho = fock.check_density(rho)
    b1, b2 = complex(beta1), complex(beta2)
    beta = (b1 - b2) / 2j
    gamma = (b1 + b2) / 2
    n = max(1, int(round(abs(beta) ** 2)))
    dim = fock.working_cutoff(max(rho.shape[0], 2 * n + 1), [abs(gamma)], tol=fock.TAIL_TOL)
    shift = fock.displacement_operator(dim, -gamma, check=False)
    rho_d = shift @ fock.embed(rho, dim) @ shift.conj().T
    rho_d = 0.5 * (rho_d + rho_d.conj().T)
    rho_d /= np.trace(rho_d).real
    scheme, _ = cat_scheme(n, beta, bs)
    pipeline = joint_event_probability(rho_d, scheme) / efficiency_numeric(scheme)
    cdim = max(rho.shape[0], fock.coherent_cutoff(max(abs(b1), abs(b2))))
    psi = coherent_superposition(b1, b2, cdim)
    direct = float(np.vdot(psi, fock.embed(rho, cdim) @ psi).real)
    rel = float(2 * (gamma * np.conj(1j * beta)).imag)
    return SuperpositionOverlap(float(pipeline), direct, n, beta, gamma, rel)
