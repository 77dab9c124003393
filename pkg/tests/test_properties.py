"""Property-based checks of the design pipeline."""
import numpy as np
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from fockcascade import fock, oracle, polyroots
from fockcascade.scheme import (
    BeamSplitter,
    Stage,
    alphas_from_zeros,
    design_scheme,
    efficiency_closed_form,
    efficiency_numeric,
    joint_event_probability,
    overlap_from_probability,
    stage_operator,
    zeros_from_alphas,
)

finite = dict(allow_nan=False, allow_infinity=False)
small_complex = st.builds(complex, st.floats(-1, 1, **finite), st.floats(-1, 1, **finite))
beam_splitters = st.builds(
    BeamSplitter.from_tsq,
    st.floats(0.5, 0.85),
    st.floats(0, 2 * np.pi),
    st.floats(0, 2 * np.pi),
)
zero_lists = st.lists(small_complex, min_size=1, max_size=4)
common = settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])


@st.composite
def densities(draw, dim):
    rank = draw(st.integers(1, 3))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    vs = rng.normal(size=(rank, dim)) + 1j * rng.normal(size=(rank, dim))
    vs /= np.linalg.norm(vs, axis=1, keepdims=True)
    w = rng.dirichlet(np.ones(rank))
    return np.einsum("k,ki,kj->ij", w, vs, vs.conj())


@common
@given(zero_lists, beam_splitters)
def test_amplitude_maps_invert(zeros, bs):
    back = zeros_from_alphas(alphas_from_zeros(zeros, bs), bs)
    assert np.max(np.abs(np.subtract(back, zeros))) < 1e-12 * (1 + max(map(abs, zeros)))


@common
@given(zero_lists, beam_splitters, st.data())
def test_central_identity(zeros, bs, data):
    n = len(zeros)
    psi = fock.state_from_zeros(n + 1, zeros)
    sch, rep = design_scheme(psi, bs)
    rho = data.draw(densities(n + 1))
    p = joint_event_probability(rho, sch)
    direct = np.vdot(psi, rho @ psi).real
    assert abs(overlap_from_probability(p, rep.efficiency_numeric) - direct) < 1e-9
    if all(c.multiplicity == 1 for c in rep.zeros):
        assert abs(rep.efficiency_closed / efficiency_numeric(sch) - 1) < 1e-9
        assert abs(efficiency_closed_form(psi, bs, rep.alphas) / rep.efficiency_numeric - 1) < 1e-9


@common
@given(beam_splitters, small_complex, st.integers(1, 3))
def test_oracle_equals_stage_operator(bs, alpha, d):
    y = stage_operator(36, bs, Stage(alpha, d))
    k = oracle.conditional_stage_oracle(36, bs, alpha, d)
    assert fock.operator_fidelity(y, k) > 1 - 1e-9


@common
@given(st.lists(small_complex, min_size=1, max_size=10, unique=True))
def test_roots_reassemble_polynomial(rs):
    if min((abs(a - b) for i, a in enumerate(rs) for b in rs[:i]), default=1) < 1e-3:
        return
    coeffs = np.polynomial.polynomial.polyfromroots(rs)
    found = polyroots.roots(coeffs)
    back = np.polynomial.polynomial.polyfromroots(found)
    assert np.max(np.abs(back - coeffs)) <= 1e-8 * np.max(np.abs(coeffs))


@common
@given(st.lists(small_complex, min_size=1, max_size=6))
def test_state_zero_round_trip(zeros):
    psi = fock.state_from_zeros(len(zeros) + 1, zeros)
    rebuilt = fock.state_from_zeros(len(zeros) + 1, fock.zeros_of_state(psi))
    assert fock.fidelity_up_to_phase(psi, rebuilt) > 1 - 1e-8
