import math

import numpy as np
import pytest

from fockcascade import fock, phase, sampler
from fockcascade.errors import NotAState
from fockcascade.sampler import EventCounts, estimate_overlap, sample_cascade
from fockcascade.scheme import BeamSplitter, Scheme, design_scheme, efficiency_numeric, joint_event_probability

BS = BeamSplitter.from_tsq(phase.canonical_optimal_tsq())


@pytest.fixture(scope="module")
def canonical():
    return phase.canonical_phase_scheme(0.0, BS)


def test_event_counts_contract():
    with pytest.raises(ValueError):
        EventCounts(10, 11, 0)
    a = EventCounts(10, 3, 1, pattern=[1, 0], marginals=[[7, 3], [1, 2]])
    b = EventCounts(5, 2, 1, pattern=[1, 0], marginals=[[3, 2], [0, 2]])
    m = a.merge(b)
    assert (m.shots, m.pattern_hits, m.marginals) == (15, 5, [[10, 5], [1, 4]])
    assert m.frequency == pytest.approx(1 / 3)
    assert a.merge(b) == b.merge(a)
    with pytest.raises(ValueError):
        a.merge(EventCounts(1, 0, 1, pattern=[2, 0]))
    d = m.to_dict()
    assert d["hits"] == 5 and d["rng"] == sampler.RNG_NAME
    assert EventCounts.from_dict(d) == m
    assert "marginals" not in EventCounts(3, 1, 0).to_dict()


def test_estimate_overlap_rules():
    e = estimate_overlap(EventCounts(100, 0, 0), 0.5)
    assert e.estimate == 0 and e.stderr == 0 and e.no_hits
    assert estimate_overlap(EventCounts(10, 10, 0), 1.0).estimate == 1
    e = estimate_overlap(EventCounts(400, 100, 0), 0.5)
    assert e.estimate == pytest.approx(0.5)
    assert e.stderr == pytest.approx(math.sqrt(0.25 * 0.75 / 400) / 0.5)
    with pytest.raises(ValueError):
        estimate_overlap(EventCounts(1, 0, 0), 0)


def test_empty_scheme_on_vacuum_always_hits():
    c = sample_cascade(fock.pure_density(fock.basis(2, 0)), Scheme(BS, (), 4), 5000, seed=1)
    assert c.pattern_hits == c.shots == 5000


def test_rejects_bad_input(canonical):
    with pytest.raises(NotAState):
        sample_cascade(np.eye(2), canonical, 10, 0)
    with pytest.raises(ValueError):
        sample_cascade(fock.pure_density(fock.basis(2, 0)), canonical, 0, 0)


def test_reproducible_and_worker_independent(canonical):
    rho = fock.pure_density(phase.superposition01(0.6))
    runs = [sample_cascade(rho, canonical, 150_000, seed=11, workers=w) for w in (1, 3, 1)]
    assert runs[0] == runs[1] == runs[2]
    other = sample_cascade(rho, canonical, 150_000, seed=12)
    assert other.pattern_hits != runs[0].pattern_hits


def test_early_abort_matches_full_walk():
    psi = fock.state_from_zeros(3, [0.6 - 0.2j, -0.4j])
    sch, _ = design_scheme(psi, BeamSplitter.from_tsq(0.7), merge_degenerate=False)
    rho = fock.pure_density(phase.superposition01(0.3 + 0.5j, 3))
    fast = sample_cascade(rho, sch, 20_000, seed=4)
    full = sample_cascade(rho, sch, 20_000, seed=4, marginals=True)
    assert fast.pattern_hits == full.pattern_hits
    assert len(full.marginals) == 3
    assert sum(full.marginals[0]) == full.shots == sum(full.marginals[-1])


def test_marginals_follow_outcome_distribution(canonical):
    rho = fock.pure_density(fock.basis(2, 1))
    c = sample_cascade(rho, canonical, 100_000, seed=2, marginals=True)
    chain = sampler._Chain(rho, canonical)
    p = chain.node(()).probs
    freq = np.asarray(c.marginals[0][: len(p)]) / c.shots
    assert np.max(np.abs(freq - p)) < 5 * math.sqrt(0.25 / c.shots)


def test_target_state_hits_at_efficiency():
    psi = phase.london_phase_state(2, 0.5)
    sch, rep = design_scheme(psi, BeamSplitter.from_tsq(0.7))
    c = sample_cascade(fock.pure_density(psi), sch, 300_000, seed=9)
    eff = rep.efficiency_numeric
    sigma = math.sqrt(eff * (1 - eff) / c.shots)
    assert abs(c.frequency - eff) < 4 * sigma


def test_unbiased_over_seeds(canonical):
    rho = fock.pure_density(phase.superposition01(0.6))
    eff = efficiency_numeric(canonical)
    exact = joint_event_probability(rho, canonical) / eff
    ests = [estimate_overlap(sample_cascade(rho, canonical, 20_000, seed=s, workers=1), eff) for s in range(50)]
    mean = np.mean([e.estimate for e in ests])
    se = np.mean([e.stderr for e in ests])
    assert abs(mean - exact) < 5 * se / math.sqrt(50)


def test_batches_partition_shots():
    assert sampler._batches(10, 4) == [(0, 4), (1, 4), (2, 2)]
    assert sum(n for _, n in sampler._batches(sampler.BATCH_SIZE * 2 + 1, sampler.BATCH_SIZE)) == sampler.BATCH_SIZE * 2 + 1
