"""Truncated single-mode Fock space.

States are complex numpy vectors of length ``cutoff`` (amplitudes for photon
numbers ``0 .. cutoff-1``) and operators are dense ``cutoff x cutoff``
complex matrices. Nothing here wraps those arrays; the cutoff is simply the
array dimension.
"""
import math

import numpy as np
from scipy.linalg import expm
from scipy.special import gammainc, gammaln

from .errors import (
    AmplitudeTooLargeForCutoff,
    NotAState,
    TooManyZerosForCutoff,
    VacuumOnly,
    ZeroState,
)

#: Allowed probability mass of a coherent state beyond the cutoff.
TAIL_TOL = 1e-12
#: Much stricter tail used when sizing internal workspaces.
WORKSPACE_TAIL_TOL = 1e-26


def coherent_tail(alpha, cutoff):
    """Probability that a coherent state ``|alpha>`` has ``>= cutoff`` photons."""
    mu = abs(alpha) ** 2
    if mu == 0.0:
        return 0.0
    return float(gammainc(cutoff, mu))


def coherent_cutoff(alpha, tol=TAIL_TOL):
    """Smallest cutoff whose coherent-state tail mass is below ``tol``."""
    mu = abs(alpha) ** 2
    c = max(1, int(mu))
    while coherent_tail(alpha, c) >= tol:
        c += max(1, int(math.sqrt(mu)) // 2)
    while c > 1 and coherent_tail(alpha, c - 1) < tol:
        c -= 1
    return c


def working_cutoff(n_max, amplitudes=(), tol=WORKSPACE_TAIL_TOL):
    """Cutoff large enough for displaced states with at most ``n_max`` photons.

    A displaced polynomial state of degree ``n_max`` is dominated by a
    coherent state of amplitude ``max|amplitude| + sqrt(n_max)``; the cutoff
    is that coherent cutoff plus ``n_max``.
    """
    r = max((abs(a) for a in amplitudes), default=0.0) + math.sqrt(n_max)
    return int(n_max) + coherent_cutoff(r, tol) + 2


def basis(cutoff, n):
    v = np.zeros(cutoff, dtype=complex)
    v[n] = 1.0
    return v


def ladder_operators(cutoff):
    """Return ``(a, a_dag, n)`` on a Fock space of the given cutoff."""
    if cutoff < 1:
        raise ValueError(f"cutoff must be >= 1, got {cutoff}")
    a = np.diag(np.sqrt(np.arange(1, cutoff, dtype=float)), 1).astype(complex)
    return a, a.conj().T.copy(), np.diag(np.arange(cutoff)).astype(complex)


def _displacement(dim, alpha):
    a, ad, _ = ladder_operators(dim)
    return expm(alpha * ad - np.conj(alpha) * a)


def displacement_operator(cutoff, alpha, check=True):
    """Displacement operator ``D(alpha) = exp(alpha a^dag - alpha^* a)``.

    The exponential is taken in a workspace twice the cutoff and cropped, so
    the returned block is free of the edge error a truncated generator
    produces in its last rows.

    Raises
    ------
    AmplitudeTooLargeForCutoff
        If ``|alpha>`` puts more than ``TAIL_TOL`` probability past the cutoff.
    """
    if check and coherent_tail(alpha, cutoff) >= TAIL_TOL:
        raise AmplitudeTooLargeForCutoff(
            f"|alpha|^2={abs(alpha) ** 2:.3g} needs cutoff >= {coherent_cutoff(alpha)}, "
            f"got {cutoff}"
        )
    if alpha == 0:
        return np.eye(cutoff, dtype=complex)
    return _displacement(2 * cutoff + 8, alpha)[:cutoff, :cutoff]


def attenuation_operator(cutoff, t):
    """Diagonal operator ``t**n``."""
    return np.diag(np.asarray(t, dtype=complex) ** np.arange(cutoff))


def coherent_state(cutoff, alpha):
    """Fock amplitudes ``exp(-|alpha|^2/2) alpha^n / sqrt(n!)``."""
    if coherent_tail(alpha, cutoff) >= TAIL_TOL:
        raise AmplitudeTooLargeForCutoff(
            f"|alpha|^2={abs(alpha) ** 2:.3g} needs cutoff >= {coherent_cutoff(alpha)}, "
            f"got {cutoff}"
        )
    amp = np.empty(cutoff, dtype=complex)
    amp[0] = math.exp(-abs(alpha) ** 2 / 2)
    for n in range(1, cutoff):
        amp[n] = amp[n - 1] * alpha / math.sqrt(n)
    return amp


def _sqrt_factorials(n):
    return np.exp(0.5 * gammaln(np.arange(n) + 1.0))


def state_from_zeros(cutoff, zeros, normalize=True):
    """Build ``prod_k (a^dag - conj(beta_k)) |0>`` from Q-function zeros.

    The result has support on photon numbers ``0..len(zeros)``.
    """
    zeros = np.asarray(zeros, dtype=complex).ravel()
    if len(zeros) >= cutoff:
        raise TooManyZerosForCutoff(
            f"{len(zeros)} zeros need cutoff > {len(zeros)}, got {cutoff}"
        )
    # ascending coefficients of prod_k (x - conj(beta_k))
    poly = np.array([1.0 + 0j])
    for b in zeros:
        poly = np.convolve(poly, [-np.conj(b), 1.0])
    psi = np.zeros(cutoff, dtype=complex)
    psi[: len(poly)] = poly * _sqrt_factorials(len(poly))
    if normalize:
        psi /= np.linalg.norm(psi)
    return psi


def top_index(psi, rtol=1e-13):
    """Largest photon number carrying a non-negligible amplitude."""
    psi = np.asarray(psi)
    scale = np.max(np.abs(psi)) if psi.size else 0.0
    if scale == 0.0:
        raise ZeroState("state vector is zero")
    return int(np.nonzero(np.abs(psi) > rtol * scale)[0][-1])


def q_polynomial(psi):
    """Ascending coefficients of ``sum_n conj(psi_n) beta^n / sqrt(n!)``.

    Its roots are the zeros of the Q-function ``<psi|beta>``.
    """
    n = top_index(psi)
    psi = np.asarray(psi, dtype=complex)[: n + 1]
    return np.conj(psi) / _sqrt_factorials(n + 1)


def zeros_of_state(psi):
    """Zeros ``beta_k`` of ``<psi|beta>``, ordered like :func:`polyroots.roots`."""
    from .polyroots import roots

    if top_index(psi) == 0:
        raise VacuumOnly("state is proportional to |0> and has no zeros")
    return roots(q_polynomial(psi))


def fidelity_up_to_phase(u, v):
    """``|<u|v>|^2 / (|u|^2 |v|^2)``; insensitive to global phase and norm."""
    u = np.asarray(u)
    v = np.asarray(v)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch {u.shape} vs {v.shape}")
    nu = np.vdot(u, u).real
    nv = np.vdot(v, v).real
    if nu == 0.0 or nv == 0.0:
        raise ZeroState("cannot compare with a zero vector")
    return float(min(1.0, abs(np.vdot(u, v)) ** 2 / (nu * nv)))


def operator_fidelity(A, B):
    """Fidelity of two operators viewed as vectors (Hilbert-Schmidt)."""
    return fidelity_up_to_phase(np.ravel(A), np.ravel(B))


def pure_density(psi):
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def check_density(rho, tol=1e-9):
    """Raise :class:`NotAState` unless ``rho`` is a density matrix."""
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise NotAState(f"density matrix must be square, got shape {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        raise NotAState("density matrix is not Hermitian")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > tol:
        raise NotAState(f"trace is {tr!r}, expected 1")
    lam = np.linalg.eigvalsh((rho + rho.conj().T) / 2).min()
    if lam < -tol:
        raise NotAState(f"negative eigenvalue {lam:.3g}")
    return rho


def embed(x, dim):
    """Zero-pad a vector or square matrix to dimension ``dim``."""
    x = np.asarray(x, dtype=complex)
    n = x.shape[0]
    if n > dim:
        raise ValueError(f"cannot embed dimension {n} into {dim}")
    if x.ndim == 1:
        out = np.zeros(dim, dtype=complex)
        out[:n] = x
    else:
        out = np.zeros((dim, dim), dtype=complex)
        out[:n, :n] = x
    return out
