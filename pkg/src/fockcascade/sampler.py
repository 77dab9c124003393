"""Monte Carlo simulation of the counting experiment.

Every shot walks the cascade: at each stage the detected photon number is
drawn from the outcome distribution of the current conditional signal state
(built from the two-mode oracle maps), then the final detector is read. A
shot whose outcome departs from the accepting pattern is abandoned; since the
conditional state after an accepting prefix is always the same, the whole
run needs one outcome table per stage.

Shots are split into batches of ``BATCH_SIZE``. Batch ``b`` draws its
uniforms from a Philox stream seeded by ``SeedSequence([seed, b])``, so the
counts depend only on ``(seed, shots)`` and not on the number of workers.
"""
import json
import math
import os
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import NamedTuple

import numpy as np

from . import fock, kernels, oracle

BATCH_SIZE = 1 << 16
RNG_NAME = "numpy.Philox(SeedSequence([seed, batch]))"


@dataclass
class EventCounts:
    """Tallies of one sampling run.

    ``marginals[s][k]`` counts shots whose stage ``s`` detector saw ``k``
    photons (last entry: overflow); the final detector is stage ``M``.
    """

    shots: int
    pattern_hits: int
    seed: int
    rng: str = RNG_NAME
    batch_size: int = BATCH_SIZE
    pattern: list = field(default_factory=list)
    marginals: list = None

    def __post_init__(self):
        if not 0 <= self.pattern_hits <= self.shots:
            raise ValueError("pattern_hits must lie in [0, shots]")

    @property
    def frequency(self):
        return self.pattern_hits / self.shots

    def merge(self, other):
        """Combine two runs of the same pattern (counts add)."""
        if self.pattern != other.pattern:
            raise ValueError("cannot merge counts for different patterns")
        marg = None
        if self.marginals is not None and other.marginals is not None:
            marg = [list(np.add(a, b).tolist()) for a, b in zip(self.marginals, other.marginals)]
        return EventCounts(
            self.shots + other.shots,
            self.pattern_hits + other.pattern_hits,
            self.seed,
            self.rng,
            self.batch_size,
            list(self.pattern),
            marg,
        )

    def to_dict(self):
        d = asdict(self)
        d["hits"] = d.pop("pattern_hits")
        if d["marginals"] is None:
            del d["marginals"]
        return d

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d):
        return cls(
            int(d["shots"]),
            int(d["hits"]),
            int(d["seed"]),
            d.get("rng", RNG_NAME),
            int(d.get("batch_size", BATCH_SIZE)),
            list(d.get("pattern", [])),
            d.get("marginals"),
        )


class OverlapEstimate(NamedTuple):
    estimate: float
    stderr: float
    no_hits: bool


def estimate_overlap(counts, efficiency):
    """Overlap from the hit frequency: ``(hits/shots) / efficiency``.

    The standard error is the binomial one, ``sqrt(f(1-f)/shots)/efficiency``;
    with no hits it is 0 and ``no_hits`` is set (then ``3/shots/efficiency``
    is the usual 95% upper bound).
    """
    if efficiency <= 0:
        raise ValueError("efficiency must be positive")
    if counts.shots < 1:
        raise ValueError("need at least one shot")
    f = counts.pattern_hits / counts.shots
    se = math.sqrt(f * (1 - f) / counts.shots) / efficiency
    return OverlapEstimate(f / efficiency, se, counts.pattern_hits == 0)


# -- outcome tables ----------------------------------------------------------------

def _outcome_probabilities(rho, kraus):
    """``p_m = Tr(K_m rho K_m^dag)`` for every ``m``."""
    kr = kraus @ rho
    return np.clip(np.real(np.einsum("mij,mij->m", kr, kraus.conj())), 0.0, None)


def _cdf(p, width):
    c = np.cumsum(p)
    out = np.full(width, c[-1] if len(c) else 0.0)
    out[: len(c)] = c
    return np.minimum(out, 1.0)


class _Node(NamedTuple):
    cdf: np.ndarray
    probs: np.ndarray
    rho: np.ndarray


class _Chain:
    """Conditional states and outcome tables, keyed by detection history.

    Node ``h`` (a tuple of earlier outcomes) holds the signal state after
    that history and the outcome CDF of the next detector; the final
    detector's outcome is the signal photon number.
    """

    def __init__(self, rho, scheme):
        self.scheme = scheme
        self.dim = oracle.oracle_dimension(rho.shape[0], scheme)
        self.kraus = [
            oracle.stage_kraus(self.dim, scheme.bs, s.alpha,
                               m_max=oracle.ancilla_cutoff(s.alpha) + self.dim)
            for s in scheme.stages
        ]
        self.width = max([k.shape[0] for k in self.kraus] + [self.dim])
        self._lock = threading.Lock()
        self._memo = {(): self._make(0, fock.embed(rho, self.dim))}

    def _make(self, stage, rho):
        if stage < len(self.kraus):
            p = _outcome_probabilities(rho, self.kraus[stage])
        else:
            p = np.clip(np.real(np.diag(rho)), 0.0, None)
        return _Node(_cdf(p, self.width), p, rho)

    def node(self, history):
        history = tuple(int(m) for m in history)
        with self._lock:
            hit = self._memo.get(history)
        if hit is not None:
            return hit
        parent = self.node(history[:-1])
        m = history[-1]
        stage = len(history) - 1
        if m >= len(parent.probs) or parent.probs[m] <= 0:
            raise ValueError(f"history {history} has zero probability")
        k = self.kraus[stage][m]
        child = self._make(stage + 1, k @ parent.rho @ k.conj().T / parent.probs[m])
        with self._lock:
            return self._memo.setdefault(history, child)


def _uniforms(seed, batch, n, cols):
    bitgen = np.random.Philox(np.random.SeedSequence([int(seed), int(batch)]))
    return np.random.Generator(bitgen).random((n, cols))


def _batches(shots, batch_size):
    return [(b, min(batch_size, shots - b * batch_size)) for b in range(-(-shots // batch_size))]


def _walk_full(chain, u, target):
    """Run every shot to the end, grouping shots that share a history."""
    n, cols = u.shape
    hist = np.zeros((cols, chain.width + 1), dtype=np.int64)
    matched = np.ones(n, dtype=bool)
    groups = {(): np.arange(n)}
    for s in range(cols):
        nxt = {}
        for key, idx in groups.items():
            nd = chain.node(key)
            k = np.searchsorted(nd.cdf, u[idx, s], side="right")
            hist[s] += np.bincount(k, minlength=chain.width + 1)
            matched[idx[k != target[s]]] = False
            if s + 1 < cols:
                for kk in np.unique(k):
                    if kk < len(nd.probs) and nd.probs[kk] > 0:
                        nxt[key + (int(kk),)] = idx[k == kk]
        groups = nxt
    return hist, int(matched.sum())


def sample_cascade(rho, scheme, shots, seed, marginals=False, workers=None, batch_size=BATCH_SIZE):
    """Simulate ``shots`` runs of the cascade on ``rho``.

    With ``marginals=False`` shots stop at their first non-accepting outcome.
    With ``marginals=True`` every shot runs to the end, conditioning on its
    own history, and per-stage histograms are recorded; the uniforms and the
    tables along the accepting history are shared, so ``pattern_hits`` is
    identical in both modes.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    rho = fock.check_density(rho)
    chain = _Chain(rho, scheme)
    target = np.array([s.clicks for s in scheme.stages] + [0], dtype=np.int64)
    cols = len(target)
    workers = workers or min(32, os.cpu_count() or 1)
    jobs = _batches(shots, batch_size)

    if marginals:
        def run(job):
            return _walk_full(chain, _uniforms(seed, job[0], job[1], cols), target)
    else:
        try:
            rows = [chain.node(target[:s]).cdf for s in range(cols)]
        except ValueError:
            # some accepting prefix is impossible: only the reachable rows matter
            rows = []
            for s in range(cols):
                try:
                    rows.append(chain.node(target[:s]).cdf)
                except ValueError:
                    rows.append(np.zeros(chain.width))
        accept = np.ascontiguousarray(np.vstack(rows))

        def run(job):
            hist = kernels.walk_shots(_uniforms(seed, job[0], job[1], cols), accept, target)
            return hist, int(hist[-1, target[-1]])

    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(run, jobs))
    hist = np.sum([r[0] for r in results], axis=0)
    hits = sum(r[1] for r in results)
    return EventCounts(
        shots, hits, int(seed), RNG_NAME, batch_size, target.tolist(),
        hist.tolist() if marginals else None,
    )
