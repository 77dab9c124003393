import math

import numpy as np
import pytest

from fockcascade import cat, fock
from fockcascade.errors import TooManyZerosForCutoff
from fockcascade.scheme import BeamSplitter, efficiency_numeric

BS = BeamSplitter.from_tsq(0.5)


def test_normalisation_examples():
    assert cat.cat_normalization(1, 1.3) == pytest.approx(1.3 ** 4 + 2)
    psi, spec = cat.cat_like_state(1, 1.3)
    assert spec.normalization == pytest.approx(1.3 ** 4 + 2)
    assert np.linalg.norm(psi) == pytest.approx(1)


@pytest.mark.parametrize("b2", [0.5, 1, 3, 8])
def test_direct_sum_matches_hypergeometric(b2):
    for n in range(1, 9):
        beta = math.sqrt(b2) * np.exp(0.3j)
        assert cat.cat_normalization_hypergeometric(n, beta) == pytest.approx(cat.cat_normalization(n, beta), rel=1e-9)


def test_log_space_sum_is_continuous():
    n = cat.LOG_SPACE_N + 1
    direct = sum(math.comb(n, k) ** 2 * math.factorial(2 * k) * 2.0 ** (2 * (n - k)) for k in range(n + 1))
    assert cat.cat_normalization(n, math.sqrt(2)) == pytest.approx(direct, rel=1e-12)


def test_parity_and_support():
    psi, _ = cat.cat_like_state(3, 0.7 - 0.4j, cutoff=10)
    assert np.all(psi[1::2] == 0)
    assert np.all(psi[7:] == 0) and psi[6] != 0
    with pytest.raises(TooManyZerosForCutoff):
        cat.cat_like_state(3, 1.0, cutoff=6)
    with pytest.raises(ValueError):
        cat.cat_like_state(0, 1.0)


def test_cat_state():
    b = 1.2
    v = cat.cat_state(b, 30)
    bare = fock.coherent_state(30, 1j * b) + fock.coherent_state(30, -1j * b)
    ratio = v[0] / bare[0]
    assert np.angle(ratio) == pytest.approx(np.angle(np.exp(1j * math.pi * b * b)))
    assert np.linalg.norm(v) == pytest.approx(1)
    assert fock.fidelity_up_to_phase(cat.cat_state(1e-6, 8), fock.basis(8, 0)) == pytest.approx(1)
    with pytest.raises(ValueError):
        cat.cat_state(1.0, 10, normalization="other")


def test_overlap_closed_form_values():
    assert cat.cat_overlap_closed_form(1) == pytest.approx(8 / (3 * math.e))
    assert cat.cat_overlap_closed_form(3) == pytest.approx(0.9577, abs=1e-4)
    assert cat.cat_overlap_closed_form(20) > cat.cat_overlap_closed_form(5)
    for n in range(3, 30):
        assert cat.cat_overlap_closed_form(n) > 0.95


@pytest.mark.parametrize("n", range(1, 9))
def test_overlap_closed_form_uses_plain_normalisation(n):
    b = math.sqrt(n)
    psi, _ = cat.cat_like_state(n, b, 64)
    plain = abs(np.vdot(psi, cat.cat_state(b, 64, normalization="sqrt2"))) ** 2
    assert cat.cat_overlap_closed_form(n) == pytest.approx(plain, abs=1e-8)
    # the exact fidelity approaches it as the two coherent components separate
    exact = fock.fidelity_up_to_phase(psi, cat.cat_state(b, 64))
    assert abs(exact - plain) < 2 * math.exp(-2 * n) + 1e-12


@pytest.mark.parametrize("n,phi", [(1, 0.0), (2, 0.7), (4, -1.2), (6, 2.5)])
def test_phase_factor(n, phi):
    beta = math.sqrt(n) * np.exp(1j * phi)
    psi, _ = cat.cat_like_state(n, beta, 60)
    ov = np.vdot(fock.coherent_state(60, 1j * beta), psi)
    expect = abs(beta) ** 2 * (math.pi - 2 * phi)
    diff = (np.angle(ov) - expect + math.pi) % (2 * math.pi) - math.pi
    assert abs(diff) < 1e-8


def test_cat_scheme_clicks():
    s1, _ = cat.cat_scheme(1, 1.0, BS)
    assert [s.clicks for s in s1.stages] == [1, 1]
    s3, rep = cat.cat_scheme(3, math.sqrt(3), BS)
    assert [s.clicks for s in s3.stages] == [3, 3]
    assert rep.fidelity > 1 - 1e-6


@pytest.mark.parametrize("n", range(1, 7))
def test_cat_efficiency_closed_form(n):
    for tsq in (0.4, 0.6, 0.8):
        bs = BeamSplitter.from_tsq(tsq, 0.3)
        beta = math.sqrt(n) * np.exp(0.5j)
        sch, _ = cat.cat_scheme(n, beta, bs)
        assert efficiency_numeric(sch) == pytest.approx(cat.cat_efficiency_closed_form(n, beta, bs), rel=1e-8)


def test_cat_efficiency_small_beta():
    eff = cat.cat_efficiency_closed_form(1, 0.0, BS)
    assert eff == pytest.approx(2 * (abs(BS.r) ** 2 * abs(BS.t)) ** 2)


def test_cat_efficiency_curves():
    grid = np.arange(1, 400) / 400
    maxima = []
    for n in range(1, 9):
        curve = np.array([cat.cat_efficiency_closed_form(n, math.sqrt(n), BeamSplitter.from_tsq(t * t)) for t in grid])
        k = int(np.argmax(curve))
        assert 0 < k < len(grid) - 1
        # small |T| underflows to exactly zero
        rising = np.all(np.diff(curve[: k + 1]) >= 0) and np.all(np.diff(curve[: k + 1])[curve[:k] > 0] > 0)
        falling = np.all(np.diff(curve[k:]) < 0)
        assert rising and falling
        maxima.append(curve[k])
    assert np.all(np.diff(maxima) < 0)


def test_superposition_reduces_to_cat_case():
    beta = 1.5
    psi = cat.coherent_superposition(1j * beta, -1j * beta, 40)
    res = cat.displaced_superposition_overlap(fock.pure_density(psi), 1j * beta, -1j * beta, BS)
    assert res.gamma == 0 and res.relative_phase == 0
    assert res.direct == pytest.approx(1)
    n = res.n
    target, _ = cat.cat_like_state(n, beta, 40)
    assert res.pipeline == pytest.approx(abs(np.vdot(target, psi)) ** 2, abs=1e-9)


def test_superposition_collinear_displaced():
    # gamma parallel to i beta: the branches pick up no relative phase
    b1, b2 = (math.sqrt(3) + 0.5) * 1j, (0.5 - math.sqrt(3)) * 1j
    psi = cat.coherent_superposition(b1, b2, 60)
    res = cat.displaced_superposition_overlap(fock.pure_density(psi), b1, b2, BS)
    assert res.n == 3 and abs(res.relative_phase) < 1e-12
    assert res.direct == pytest.approx(1)
    assert res.pipeline > 0.95


def test_superposition_branch_phase_reported():
    # gamma not collinear with i beta: the displaced cat carries a relative
    # phase between its branches and no longer matches |beta1> + |beta2>
    b1, b2 = 1.0 + 2.0j, 1.0 - 2.0j + 0.8
    res = cat.displaced_superposition_overlap(fock.pure_density(cat.coherent_superposition(b1, b2, 60)), b1, b2, BS)
    assert abs(res.relative_phase) > 0.1
    assert res.direct == pytest.approx(1)
    assert res.pipeline < res.direct - 0.1


def test_superposition_direct_value_vacuum():
    g = 0.8 - 0.3j
    res = cat.displaced_superposition_overlap(fock.pure_density(fock.basis(1, 0)), g, g, BS)
    assert res.direct == pytest.approx(math.exp(-abs(g) ** 2), rel=1e-10)
