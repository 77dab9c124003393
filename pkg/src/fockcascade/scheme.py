"""Beam-splitter cascades that project a signal mode onto a chosen state.

A cascade mixes the signal with coherent ancillas ``|alpha_i>`` at identical
beam splitters, requires ``d_i`` photons at each stage detector and none at
the final detector. The conditional operator of the whole cascade is
``Y = Y_M ... Y_1``; the event probability is ``<0|Y rho Y^dag|0>``, which is
proportional to ``<psi|rho|psi>`` when ``Y^dag|0>`` is parallel to ``psi``.
"""
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import expm_multiply
from scipy.special import gammaln

from . import fock
from .errors import (
    AmplitudeTooLargeForCutoff,
    DesignVerificationFailed,
    InconsistentProbability,
)
from .polyroots import (
    RootCluster,
    cluster_polynomial_roots,
    cluster_roots,
    refine_multiple_root,
    roots,
    scaled_residual,
)

DESIGN_FIDELITY_TOL = 1e-6
#: Designs needing a larger Fock workspace are rejected unless the caller says otherwise.
MAX_WORKSPACE = 4096


@dataclass(frozen=True)
class BeamSplitter:
    """Lossless beam splitter with complex transmittance ``t`` and reflectance ``r``."""

    t: complex
    r: complex

    def __post_init__(self):
        object.__setattr__(self, "t", complex(self.t))
        object.__setattr__(self, "r", complex(self.r))
        if abs(abs(self.t) ** 2 + abs(self.r) ** 2 - 1.0) > 1e-12:
            raise ValueError(f"|t|^2 + |r|^2 must be 1, got {abs(self.t) ** 2 + abs(self.r) ** 2!r}")
        if abs(self.t) == 0 or abs(self.r) == 0:
            raise ValueError("both |t| and |r| must be nonzero")

    @classmethod
    def from_tsq(cls, tsq, t_phase=0.0, r_phase=0.0):
        """Build from the intensity transmittance ``|t|^2`` and optional phases."""
        if not 0.0 < tsq < 1.0:
            raise ValueError(f"|t|^2 must lie in (0, 1), got {tsq}")
        return cls(math.sqrt(tsq) * np.exp(1j * t_phase), math.sqrt(1.0 - tsq) * np.exp(1j * r_phase))

    @property
    def tsq(self):
        return abs(self.t) ** 2


@dataclass(frozen=True)
class Stage:
    alpha: complex
    clicks: int = 1

    def __post_init__(self):
        object.__setattr__(self, "alpha", complex(self.alpha))
        if int(self.clicks) != self.clicks or self.clicks < 1:
            raise ValueError(f"clicks must be an integer >= 1, got {self.clicks}")
        object.__setattr__(self, "clicks", int(self.clicks))


@dataclass(frozen=True)
class Scheme:
    """A cascade of stages sharing one beam splitter.

    ``cutoff`` is the Fock dimension operators are reported in. The final
    detector always has to register zero photons.
    """

    bs: BeamSplitter
    stages: tuple = ()
    cutoff: int = 16

    def __post_init__(self):
        object.__setattr__(self, "stages", tuple(self.stages))

    @property
    def n_photons(self):
        return sum(s.clicks for s in self.stages)

    @property
    def final_zero(self):
        return True

    def to_dict(self):
        return {
            "cutoff": self.cutoff,
            "t_re": self.bs.t.real,
            "t_im": self.bs.t.imag,
            "r_re": self.bs.r.real,
            "r_im": self.bs.r.imag,
            "stages": [
                {"alpha_re": s.alpha.real, "alpha_im": s.alpha.imag, "clicks": s.clicks}
                for s in self.stages
            ],
        }

    @classmethod
    def from_dict(cls, d):
        bs = BeamSplitter(complex(d["t_re"], d["t_im"]), complex(d["r_re"], d["r_im"]))
        stages = [Stage(complex(s["alpha_re"], s["alpha_im"]), s["clicks"]) for s in d["stages"]]
        return cls(bs, stages, int(d["cutoff"]))


def _cplx_dict(z):
    return {"re": float(z.real), "im": float(z.imag)}


@dataclass
class DesignReport:
    target: np.ndarray
    zeros: list
    alphas: list
    efficiency_closed: float
    efficiency_numeric: float
    root_residual: float
    fidelity: float = 1.0
    stage_alphas: list = field(default_factory=list)

    def to_dict(self):
        return {
            "zeros": [
                {"re": c.value.real, "im": c.value.imag, "multiplicity": c.multiplicity}
                for c in self.zeros
            ],
            "alphas": [_cplx_dict(a) for a in self.alphas],
            "stage_alphas": [_cplx_dict(a) for a in self.stage_alphas],
            "efficiency_closed": self.efficiency_closed,
            "efficiency_numeric": self.efficiency_numeric,
            "root_residual": self.root_residual,
            "fidelity": self.fidelity,
        }


# -- amplitude <-> zero maps ---------------------------------------------------

def alphas_from_zeros(zeros, bs):
    """Ancilla amplitudes realising the ordered Q-function zeros ``beta_1..beta_N``.

    ``alpha_k = conj(R) / (T conj(T)^(k+1)) * sum_{l<=k} |T|^(2l) (beta_l - beta_{l-1})``
    with ``beta_0 = 0``.
    """
    t, r = bs.t, bs.r
    out = []
    acc = 0j
    prev = 0j
    for k, b in enumerate(zeros, start=1):
        acc += abs(t) ** (2 * k) * (complex(b) - prev)
        prev = complex(b)
        out.append(np.conj(r) / (t * np.conj(t) ** (k + 1)) * acc)
    return out


def zeros_from_alphas(alphas, bs):
    """Inverse of :func:`alphas_from_zeros`.

    ``beta_k = (T / conj(R)) * sum_{l<=k} (conj(T) alpha_l - alpha_{l-1}) / T^l``
    with ``alpha_0 = 0``.
    """
    t, r = bs.t, bs.r
    out = []
    acc = 0j
    prev = 0j
    for k, a in enumerate(alphas, start=1):
        acc += (np.conj(t) * complex(a) - prev) / t**k
        prev = complex(a)
        out.append(t / np.conj(r) * acc)
    return out


# -- operators -----------------------------------------------------------------

#: Above this dimension displacements are applied to vectors, not built densely.
DENSE_LIMIT = 128


@lru_cache(maxsize=256)
def _real_displacement(dim, radius):
    d = fock._displacement(dim, radius)
    d.flags.writeable = False
    return d


def _displacement_cached(dim, alpha):
    """``D(alpha) = e^{i theta n} D(|alpha|) e^{-i theta n}``; the real core is cached."""
    alpha = complex(alpha)
    rot = np.exp(1j * np.angle(alpha) * np.arange(dim))
    return rot[:, None] * _real_displacement(dim, abs(alpha)) * rot.conj()[None, :]


def _apply_displacement(v, alpha):
    dim = len(v)
    if alpha == 0:
        return v
    if dim <= DENSE_LIMIT:
        return _displacement_cached(dim, alpha) @ v
    n = np.sqrt(np.arange(1, dim))
    gen = sparse.diags([alpha * n, -np.conj(alpha) * n], [-1, 1], format="csr")
    return expm_multiply(gen, v)


def _apply_stage_adjoint(v, bs, stage):
    """``Y_i^dag v`` without forming the stage matrix."""
    x_out, x_in = _displacement_args(bs, stage)
    v = _apply_displacement(v, -x_out)
    v = np.conj(bs.t) ** np.arange(len(v)) * v
    n = np.sqrt(np.arange(1, len(v)))
    for _ in range(stage.clicks):
        w = np.zeros_like(v)
        w[1:] = -bs.r * n * v[:-1]
        v = w
    v = v / math.sqrt(math.factorial(stage.clicks))
    return _apply_displacement(v, -x_in)


def _displacement_args(bs, stage):
    rc = np.conj(bs.r)
    return stage.alpha / rc, -np.conj(bs.t) * stage.alpha / rc


def _workspace(cutoff, amplitudes):
    amp = max((abs(a) for a in amplitudes), default=0.0)
    spread = fock.coherent_cutoff(amp + math.sqrt(cutoff), fock.WORKSPACE_TAIL_TOL)
    return max(2 * cutoff + 8, spread + 8)


def _stage_matrix(dim, bs, stage):
    x_out, x_in = _displacement_args(bs, stage)
    a, _, _ = fock.ladder_operators(dim)
    d = stage.clicks
    core = np.linalg.matrix_power(-np.conj(bs.r) * a, d) / math.sqrt(math.factorial(d))
    core = (bs.t ** np.arange(dim))[:, None] * core
    return _displacement_cached(dim, x_out) @ core @ _displacement_cached(dim, x_in)


def _check_stage(cutoff, bs, stage):
    for x in _displacement_args(bs, stage):
        if fock.coherent_tail(x, cutoff) >= fock.TAIL_TOL:
            raise AmplitudeTooLargeForCutoff(
                f"stage amplitude {stage.alpha:.4g} displaces by |x|={abs(x):.3g}; "
                f"cutoff {cutoff} is too small (need {fock.coherent_cutoff(x)})"
            )


def stage_operator(cutoff, bs, stage):
    """Conditional operator of one stage with ``stage.clicks`` detected photons.

    ``Y = D(alpha/R*) T^n [(-R* a)^d / sqrt(d!)] D(-T* alpha / R*)``, built in
    an enlarged workspace and cropped to ``cutoff``.
    """
    _check_stage(cutoff, bs, stage)
    ws = _workspace(cutoff, _displacement_args(bs, stage))
    return _stage_matrix(ws, bs, stage)[:cutoff, :cutoff]


def _cascade_workspace(cutoff, scheme):
    amps = [x for s in scheme.stages for x in _displacement_args(scheme.bs, s)]
    return _workspace(cutoff, amps)


def _cascade_matrix(dim, scheme):
    y = np.eye(dim, dtype=complex)
    for s in scheme.stages:
        y = _stage_matrix(dim, scheme.bs, s) @ y
    return y


def cascade_operator(cutoff, scheme):
    """``Y = Y_M ... Y_1`` (first stage rightmost), cropped to ``cutoff``."""
    for s in scheme.stages:
        _check_stage(cutoff, scheme.bs, s)
    ws = _cascade_workspace(cutoff, scheme)
    return _cascade_matrix(ws, scheme)[:cutoff, :cutoff]


def _projection_workspace(scheme):
    """Dimension holding every intermediate state of ``Y^dag|0>``.

    Between stages the vector is a polynomial state whose zeros are the
    partial cascade zeros; inside a stage it is additionally displaced by
    ``alpha_i / R*``.
    """
    bs = scheme.bs
    n = scheme.n_photons
    disp = max((abs(s.alpha) / abs(bs.r) for s in scheme.stages), default=0.0)
    zs = zeros_from_alphas([s.alpha for s in scheme.stages], bs)
    zmax = max((abs(z) for z in zs), default=0.0) / min(1.0, abs(bs.t)) ** len(zs)
    return fock.working_cutoff(n, [disp + zmax]) + 8


def projection_vector(scheme, cutoff=None):
    """``Y^dag |0>`` (unnormalised): the state the cascade projects onto."""
    cutoff = scheme.cutoff if cutoff is None else cutoff
    ws = max(_projection_workspace(scheme), cutoff)
    v = np.zeros(ws, dtype=complex)
    v[0] = 1.0
    for s in reversed(scheme.stages):
        v = _apply_stage_adjoint(v, scheme.bs, s)
    return v[:cutoff]


def efficiency_numeric(scheme):
    """``||Y^dag |0>||^2``, the event probability for a signal equal to the target."""
    if not scheme.stages:
        return 1.0
    v = projection_vector(scheme, scheme.n_photons + 1)
    return float(np.vdot(v, v).real)


def joint_event_probability(rho_in, scheme):
    """Probability that every stage sees its click count and the last detector none."""
    rho = fock.check_density(rho_in)
    dim = rho.shape[0]
    v = projection_vector(scheme, max(dim, scheme.n_photons + 1))[:dim]
    return float(max(0.0, np.vdot(v, rho @ v).real))


# -- closed forms --------------------------------------------------------------

def _log_efficiency(target, bs, alphas, clicks):
    psi = np.asarray(target, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    n = fock.top_index(psi)
    if sum(clicks) != n:
        raise ValueError(f"clicks sum to {sum(clicks)} but the target has top index {n}")
    tail = np.cumsum(clicks[::-1])[::-1]
    t_power = 2 * sum(int(x) for x in tail[1:])
    return (
        gammaln(n + 1)
        - 2 * math.log(abs(psi[n]))
        + 2 * n * math.log(abs(bs.r))
        + t_power * math.log(abs(bs.t))
        - sum(gammaln(d + 1) for d in clicks)
        - sum(abs(a) ** 2 for a in alphas)
    )


def efficiency_closed_form(target, bs, alphas, clicks=None):
    """Closed-form efficiency ``||Y^dag|0>||^2`` of a designed cascade.

    With single clicks this is ``N!/|<N|psi>|^2 |R|^(2N) |T|^(N(N-1)) exp(-sum|alpha|^2)``.
    For stages with ``d_i`` clicks the ``|T|`` exponent becomes
    ``2 sum_i sum_{j>i} d_j`` and the whole expression is divided by
    ``prod d_i!``.
    """
    clicks = [1] * len(alphas) if clicks is None else list(clicks)
    if len(clicks) != len(alphas):
        raise ValueError("need one click count per amplitude")
    return float(math.exp(_log_efficiency(target, bs, alphas, clicks)))


def product_form_state(alphas, bs, cutoff):
    """``Y^dag|0>`` evaluated from its factorised form (single-click stages).

    ``R^N T^(N(N-1)/2) exp(-sum|alpha|^2 / 2) prod_k (a^dag - w_k) |0>`` with
    ``w_k = (T*/R) sum_{l<=k} (T alpha_l* - alpha_{l-1}*) / T*^l``. The global
    phase is fixed arbitrarily.
    """
    t, r = bs.t, bs.r
    n = len(alphas)
    poly = np.array([1.0 + 0j])
    acc = 0j
    prev = 0j
    for l, a in enumerate(alphas, start=1):
        acc += (t * np.conj(a) - prev) / np.conj(t) ** l
        prev = np.conj(a)
        w = np.conj(t) / r * acc
        poly = np.convolve(poly, [-w, 1.0])
    pref = r**n / t ** (n * (1 - n) // 2) * math.exp(-0.5 * sum(abs(a) ** 2 for a in alphas))
    v = np.zeros(cutoff, dtype=complex)
    v[: n + 1] = pref * poly * fock._sqrt_factorials(n + 1)
    return v


def overlap_from_probability(p, efficiency):
    """Recover ``<psi|rho|psi>`` from the event probability.

    Raises
    ------
    InconsistentProbability
        If ``p`` exceeds ``efficiency`` beyond rounding, which a correctly
        designed cascade never allows.
    """
    if efficiency <= 0:
        raise ValueError("efficiency must be positive")
    if p < 0 or p > efficiency * (1 + 1e-9):
        raise InconsistentProbability(f"probability {p!r} outside [0, efficiency={efficiency!r}]")
    return min(1.0, max(0.0, p / efficiency))


# -- design ----------------------------------------------------------------------

def scheme_cutoff(n_photons, bs, alphas, zeros=()):
    """Working cutoff for a cascade with the given amplitudes and zeros."""
    amp = max((abs(a) / abs(bs.r) for a in alphas), default=0.0)
    amp += max((abs(z) for z in zeros), default=0.0)
    return fock.working_cutoff(n_photons, [amp], tol=fock.TAIL_TOL)


def design_scheme(target, bs, merge_degenerate=True, cluster_tol=None, max_workspace=MAX_WORKSPACE):
    """Choose ancilla amplitudes so the cascade projects onto ``target``.

    The Q-function zeros of the target are found and clustered; each
    distinct zero ``b`` of multiplicity ``d`` becomes one stage demanding
    ``d`` clicks when ``merge_degenerate`` is set, otherwise ``d``
    single-click stages. Amplitudes follow from :func:`alphas_from_zeros`
    applied to the zero list the stages realise (distinct zeros for merged
    stages, the expanded list otherwise). The resulting ``Y^dag|0>`` is
    checked against the target before returning.

    ``cluster_tol=None`` picks the clustering tolerance automatically (see
    :func:`polyroots.cluster_polynomial_roots`). ``max_workspace`` rejects
    designs whose verification would need a larger Fock workspace; such
    designs have vanishing efficiency anyway. Pass ``None`` to disable it.

    Raises
    ------
    AmplitudeTooLargeForCutoff
        If the workspace exceeds ``max_workspace``.
    DesignVerificationFailed
        If ``Y^dag|0>`` does not reproduce the target.

    Returns
    -------
    (Scheme, DesignReport)
    """
    psi = np.asarray(target, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    n = fock.top_index(psi)
    coeffs = fock.q_polynomial(psi)
    rs = fock.zeros_of_state(psi)
    residual = float(np.max(scaled_residual(coeffs, rs)))
    if cluster_tol is None:
        clusters = cluster_polynomial_roots(coeffs, rs)
    else:
        clusters = [refine_multiple_root(coeffs, cl) for cl in cluster_roots(rs, cluster_tol)]
    expanded = [cl.value for cl in clusters for _ in range(cl.multiplicity)]
    full_alphas = alphas_from_zeros(expanded, bs)

    if merge_degenerate:
        stage_alphas = alphas_from_zeros([cl.value for cl in clusters], bs)
        stages = [Stage(a, cl.multiplicity) for a, cl in zip(stage_alphas, clusters)]
    else:
        stage_alphas = full_alphas
        stages = [Stage(a, 1) for a in full_alphas]
        # equal consecutive zeros must give alpha_k = alpha_{k-1} / conj(T)
        for k in range(1, n):
            if expanded[k] == expanded[k - 1]:
                drift = abs(np.conj(bs.t) * full_alphas[k] - full_alphas[k - 1])
                if drift > 1e-9 * (1 + abs(full_alphas[k - 1])):
                    raise DesignVerificationFailed(
                        f"repeated zero at index {k} left intermediate displacement {drift:.3g}"
                    )

    cutoff = scheme_cutoff(n, bs, stage_alphas, expanded)
    scheme = Scheme(bs, stages, max(cutoff, len(psi)))
    if max_workspace is not None:
        ws = _projection_workspace(scheme)
        if ws > max_workspace:
            raise AmplitudeTooLargeForCutoff(
                f"design needs a workspace of {ws} > {max_workspace}"
            )
    v = projection_vector(scheme, n + 1)
    fid = fock.fidelity_up_to_phase(v, psi[: n + 1])
    if fid < 1 - DESIGN_FIDELITY_TOL:
        raise DesignVerificationFailed(
            f"Y^dag|0> has fidelity {fid:.10f} with the target", fidelity=fid
        )
    report = DesignReport(
        target=psi,
        zeros=[RootCluster(complex(c.value), c.multiplicity) for c in clusters],
        alphas=full_alphas,
        efficiency_closed=efficiency_closed_form(psi, bs, stage_alphas, [s.clicks for s in stages]),
        efficiency_numeric=float(np.vdot(v, v).real),
        root_residual=residual,
        fidelity=fid,
        stage_alphas=stage_alphas,
    )
    return scheme, report
