"""Phase statistics measured with the cascade.

Two families of reference states are covered: truncated London phase states
``|phi;N>`` (canonical phase) and two-term superpositions of them, the
truncated Susskind-Glogower cosine/sine phase states ``|phi,chi;N>``.
Distributions come from the cascade probability and are checked pointwise
against the direct overlap.
"""
import math

import numpy as np

from . import fock
from .errors import (
    AmplitudeTooLargeForCutoff,
    DegeneratePhase,
    DesignVerificationFailed,
    InconsistentProbability,
)
from .scheme import (
    BeamSplitter,
    Scheme,
    Stage,
    design_scheme,
    efficiency_numeric,
    joint_event_probability,
)

DEFAULT_GRID = 512
#: Cutoff above which the trig scheme is considered infeasible.
PIPELINE_CUTOFF_BUDGET = 160
_AGREEMENT_TOL = 1e-8
_SIN_EPS = 1e-9


def canonical_grid(points=DEFAULT_GRID):
    """Equispaced phases on ``[0, 2 pi)``."""
    return 2 * np.pi * np.arange(points) / points


def trig_grid(points=DEFAULT_GRID):
    """Midpoints of ``points`` equal cells of ``(0, pi)``."""
    return np.pi * (np.arange(points) + 0.5) / points


def london_phase_state(N, phi, cutoff=None):
    """``(N+1)^(-1/2) sum_{n<=N} e^{i n phi} |n>``."""
    cutoff = N + 1 if cutoff is None else cutoff
    if N >= cutoff:
        raise fock.TooManyZerosForCutoff(f"N={N} needs cutoff > {N}, got {cutoff}")
    psi = np.zeros(cutoff, dtype=complex)
    psi[: N + 1] = np.exp(1j * phi * np.arange(N + 1)) / math.sqrt(N + 1)
    return psi


def canonical_overlap_formula(z, phi, N):
    """``|<z|phi;N>|^2`` for ``|z> ~ |0> + z|1>``."""
    r = abs(z)
    psi = np.angle(z)
    return (1 + r * r + 2 * r * math.cos(phi - psi)) / ((N + 1) * (1 + r * r))


def superposition01(z, cutoff=2):
    """Normalised ``|0> + z|1>``."""
    v = np.zeros(cutoff, dtype=complex)
    v[0], v[1] = 1.0, z
    return v / math.sqrt(1 + abs(z) ** 2)


def canonical_efficiency(bs):
    """``2|R|^2 exp(-|R/T|^2)``."""
    return 2 * abs(bs.r) ** 2 * math.exp(-(abs(bs.r) / abs(bs.t)) ** 2)


def canonical_optimal_tsq():
    """``|T|^2`` maximising :func:`canonical_efficiency`; ``|R|^2 = (3 - sqrt 5)/2`` there."""
    return (math.sqrt(5) - 1) / 2


def canonical_phase_scheme(phi, bs):
    """Single-stage cascade projecting onto ``|phi;1>``."""
    alpha = -np.conj(bs.r) / np.conj(bs.t) * np.exp(1j * phi)
    cutoff = fock.working_cutoff(1, [abs(alpha) / abs(bs.r)], tol=fock.TAIL_TOL)
    return Scheme(bs, (Stage(alpha, 1),), cutoff)


def _rotated(scheme, phi):
    rot = np.exp(1j * phi)
    return Scheme(scheme.bs, tuple(Stage(s.alpha * rot, s.clicks) for s in scheme.stages), scheme.cutoff)


def direct_canonical_distribution(rho, N, phi_grid):
    rho = np.asarray(rho, dtype=complex)
    dim = max(rho.shape[0], N + 1)
    rho = fock.embed(rho, dim)
    out = np.empty(len(phi_grid))
    for k, phi in enumerate(phi_grid):
        psi = london_phase_state(N, phi, dim)
        out[k] = np.vdot(psi, rho @ psi).real
    return out * (N + 1) / (2 * np.pi)


def canonical_phase_distribution(rho, N, phi_grid=None, bs=None, check=True):
    """``(N+1)/(2 pi) <phi;N|rho|phi;N>`` measured through the cascade.

    The London state for ``phi`` has the zeros of the ``phi = 0`` state
    rotated by ``e^{i phi}``; the amplitude map is linear, so the scheme for
    every grid point is the verified ``phi = 0`` design with rotated
    amplitudes. Each point then goes through the joint probability and the
    efficiency.

    ``rho`` should be supported on photon numbers ``<= N``; components above
    ``N`` are simply outside what ``|phi;N>`` can see.
    """
    phi_grid = canonical_grid() if phi_grid is None else np.asarray(phi_grid, dtype=float)
    bs = BeamSplitter.from_tsq(canonical_optimal_tsq()) if bs is None else bs
    rho = fock.check_density(rho)
    base, _ = design_scheme(london_phase_state(N, 0.0), bs)
    eff = efficiency_numeric(base)
    out = np.empty(len(phi_grid))
    for k, phi in enumerate(phi_grid):
        p = joint_event_probability(rho, _rotated(base, phi))
        out[k] = p / eff
    out *= (N + 1) / (2 * np.pi)
    if check:
        _assert_close(out, direct_canonical_distribution(rho, N, phi_grid), "canonical")
    return out


def _assert_close(pipeline, direct, label):
    scale = max(1.0, float(np.max(np.abs(direct))))
    err = float(np.max(np.abs(pipeline - direct), initial=0.0))
    if err > _AGREEMENT_TOL * scale:
        raise InconsistentProbability(
            f"{label} distribution from the cascade differs from the direct overlap by {err:.3g}"
        )


# -- Susskind-Glogower trigonometric phase -------------------------------------

def _check_phase(phi):
    if abs(math.sin(phi)) < _SIN_EPS:
        raise DegeneratePhase(f"phi={phi!r} is a multiple of pi; the two branches cancel")


def trig_normalization(phi, N):
    """``C(phi;N) = -i {2 - 2 sin((N+1)phi) cos((N+2)phi) / [(N+1) sin phi]}^(-1/2)``."""
    _check_phase(phi)
    inner = 2 - 2 * math.sin((N + 1) * phi) * math.cos((N + 2) * phi) / ((N + 1) * math.sin(phi))
    return -1j / math.sqrt(inner)


def trig_phase_state(N, phi, chi, cutoff=None):
    """``C [e^{i phi}|chi+phi;N> - e^{-i phi}|chi-phi;N>]``."""
    cutoff = N + 1 if cutoff is None else cutoff
    c = trig_normalization(phi, N)
    psi = c * (
        np.exp(1j * phi) * london_phase_state(N, chi + phi, cutoff)
        - np.exp(-1j * phi) * london_phase_state(N, chi - phi, cutoff)
    )
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > 1e-10:
        raise AssertionError(f"trig phase state has norm {norm!r}")
    return psi


def trig_overlap_formula(z, phi, chi, N):
    """``|<z|phi,chi;N>|^2`` in closed form."""
    c2 = abs(trig_normalization(phi, N)) ** 2
    r = abs(z)
    psi = np.angle(z)
    s1, s2 = math.sin(phi), math.sin(2 * phi)
    bracket = s1 * s1 + 2 * r * math.cos(psi - chi) * s1 * s2 + r * r * s2 * s2
    return 4 * c2 / ((N + 1) * (1 + r * r)) * bracket


def trig_efficiency(phi, bs):
    """``(1 - cos phi cos 3phi) / sin^2(2 phi) |R|^2 exp(-|R / (2 T cos phi)|^2)``."""
    s2 = math.sin(2 * phi)
    if abs(s2) < _SIN_EPS:
        raise DegeneratePhase(f"sin(2 phi) vanishes at phi={phi!r}")
    c = math.cos(phi)
    expo = (abs(bs.r) / (2 * abs(bs.t) * c)) ** 2
    return (1 - c * math.cos(3 * phi)) / (s2 * s2) * abs(bs.r) ** 2 * math.exp(-expo)


def optimal_transmittance(phi):
    """``|T|^2`` maximising :func:`trig_efficiency` at ``phi``.

    ``(sqrt(1 + 16 c^2) - 1) / (8 c^2)`` with ``c = cos phi``, written as
    ``2 / (sqrt(1 + 16 c^2) + 1)``, which is finite (and equal to 1) at
    ``c = 0``.
    """
    c2 = math.cos(phi) ** 2
    return 2.0 / (math.sqrt(1 + 16 * c2) + 1)


def max_trig_efficiency(phi):
    """:func:`trig_efficiency` at :func:`optimal_transmittance`, limits included.

    At ``sin phi = 0`` the prefactor tends to ``5/4``; at ``cos phi = 0`` the
    optimum has ``|T| -> 1`` and the efficiency tends to ``1/e``.
    """
    c = math.cos(phi)
    tsq = optimal_transmittance(phi)
    if abs(c) < 1e-6:
        return math.exp(-1.0)
    rsq = 1.0 - tsq
    s2 = math.sin(2 * phi)
    pref = 1.25 if abs(s2) < 1e-6 else (1 - c * math.cos(3 * phi)) / (s2 * s2)
    return pref * rsq * math.exp(-rsq / (4 * tsq * c * c))


def trig_phase_scheme(phi, chi, bs):
    """Single-stage cascade projecting onto ``|phi,chi;1>``."""
    c = math.cos(phi)
    if abs(c) < _SIN_EPS:
        raise DegeneratePhase(f"cos(phi) vanishes at phi={phi!r}; the ancilla amplitude diverges")
    alpha = -np.conj(bs.r) / (2 * np.conj(bs.t) * c) * np.exp(1j * chi)
    cutoff = fock.working_cutoff(1, [abs(alpha) / abs(bs.r)], tol=fock.TAIL_TOL)
    return Scheme(bs, (Stage(alpha, 1),), cutoff)


def direct_trig_distribution(rho, chi, N, phi_grid):
    rho = np.asarray(rho, dtype=complex)
    dim = max(rho.shape[0], N + 1)
    rho = fock.embed(rho, dim)
    out = np.empty(len(phi_grid))
    for k, phi in enumerate(phi_grid):
        psi = trig_phase_state(N, phi, chi, dim)
        c2 = abs(trig_normalization(phi, N)) ** 2
        out[k] = (N + 1) / (2 * np.pi * c2) * np.vdot(psi, rho @ psi).real
    return out


def _trig_point(rho, phi, chi, N, bs):
    """Pipeline value at one phase, or ``None`` when the scheme is infeasible."""
    if abs(math.cos(phi)) < _SIN_EPS or abs(math.sin(2 * phi)) < _SIN_EPS:
        return None
    bs = BeamSplitter.from_tsq(optimal_transmittance(phi)) if bs is None else bs
    if N == 1:
        sch = trig_phase_scheme(phi, chi, bs)
        if sch.cutoff > PIPELINE_CUTOFF_BUDGET:
            return None
        p = joint_event_probability(rho, sch)
        expo = (abs(bs.r) / (2 * abs(bs.t) * math.cos(phi))) ** 2
        return 2 * math.sin(2 * phi) ** 2 / (math.pi * abs(bs.r) ** 2) * math.exp(expo) * p
    try:
        sch, _ = design_scheme(trig_phase_state(N, phi, chi), bs, max_workspace=PIPELINE_CUTOFF_BUDGET)
    except (AmplitudeTooLargeForCutoff, DesignVerificationFailed):
        return None
    c2 = abs(trig_normalization(phi, N)) ** 2
    return (N + 1) / (2 * np.pi * c2) * joint_event_probability(rho, sch) / efficiency_numeric(sch)


def trig_distribution(rho, chi, N=1, phi_grid=None, bs=None, return_flags=False, check=True):
    """Susskind-Glogower phase distribution ``prob(phi)|_chi`` from the cascade.

    For ``N = 1`` the joint probability is rescaled with the closed-form
    efficiency; for larger ``N`` a full design is made per phase. Points where
    the ancilla amplitude diverges (``cos phi = 0``), or where the scheme needs
    a Fock space above ``PIPELINE_CUTOFF_BUDGET``, fall back to the direct
    overlap and are flagged.
    With ``bs=None`` every point uses its optimal transmittance.
    """
    phi_grid = trig_grid() if phi_grid is None else np.asarray(phi_grid, dtype=float)
    rho = fock.check_density(rho)
    direct = direct_trig_distribution(rho, chi, N, phi_grid)
    out = direct.copy()
    flags = np.zeros(len(phi_grid), dtype=bool)
    for k, phi in enumerate(phi_grid):
        val = _trig_point(rho, phi, chi, N, bs)
        if val is None:
            flags[k] = True
        else:
            out[k] = val
    if check:
        _assert_close(out, direct, "trigonometric")
    return (out, flags) if return_flags else out
