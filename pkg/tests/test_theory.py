import itertools
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import lemma1_terms, random_corpus
from intergrams import UnsupportedParameter
from intergrams import theory as T


def mp_partial(k, a):
    """M_k via the Hurwitz zeta function at 40 digits."""
    with mpmath.workdps(40):
        if a == 1:
            return mpmath.harmonic(k)
        return mpmath.zeta(a) - mpmath.zeta(a, k + 1)


def worst_case(D, a, beta_eff, k):
    """Adversarial mass removal: drop the heaviest ranks while the dropped mass
    stays within 1 - beta_eff. Returns (ranks dropped, mass recall of the top k)."""
    M = np.cumsum(np.arange(1, D + 1, dtype=np.float64) ** -a)
    u = int(np.searchsorted(M, (1 - beta_eff) * M[-1] * (1 + 1e-12), side="right"))
    Mu = M[u - 1] if u else 0.0
    return u, max(0.0, 1.0 - Mu / M[k - 1])


def test_harmonic_small():
    assert T.harmonic_partial(1, 0.7) == 1.0
    assert T.harmonic_partial(3, 1) == pytest.approx(11 / 6, abs=1e-15)
    with pytest.raises(ValueError):
        T.harmonic_partial(0, 1.2)


@pytest.mark.parametrize("k,a", [(10**6, 1.2), (10**5, 0.5), (12345, 2.5), (1000, 1.0)])
def test_harmonic_matches_high_precision(k, a):
    assert T.harmonic_partial(k, a) == pytest.approx(float(mp_partial(k, a)), rel=1e-10)


def test_mk_bounds_examples():
    assert T.mk_bounds(1, 2) == (0.5, 1.0)
    lo, hi = T.mk_bounds(3, 1)
    assert lo == pytest.approx(math.log(4)) and hi == pytest.approx(math.log(3) + 1)
    assert lo <= 11 / 6 <= hi


@given(st.integers(1, 10_000), st.sampled_from([0.3, 0.5, 0.8, 1.0, 1.2, 1.5, 2.0, 2.5]))
def test_mk_sandwich(k, a):
    lo, hi = T.mk_bounds(k, a)
    mk = T.harmonic_partial(k, a)
    assert lo - 1e-9 <= mk <= hi + 1e-9


def test_zipf_normalisation():
    for D in (1, 10, 10**6):
        for a in (0.3, 1.0, 1.2, 3.0):
            assert abs(T.ZipfModel(a, D).probabilities().sum() - 1.0) < 1e-12
    assert T.ZipfModel(2, 10).top_mass(50) == 1.0
    with pytest.raises(ValueError):
        T.ZipfModel(0, 10)


def test_beta_prime():
    assert T.beta_prime(0.8, 100, 10_100) == pytest.approx(0.79)
    assert abs(T.beta_prime(0.6, 1, 10**9) - 0.6) < 1e-8
    assert T.beta_prime(0.01, 50, 60) < 0
    for m, N in ((0, 10), (10, 10), (10, 5)):
        with pytest.raises(ValueError):
            T.beta_prime(0.5, m, N)


def test_lemma1_on_random_corpora(rng):
    for _ in range(40):
        seqs = random_corpus(rng, 12, 60, rng.randint(2, 5), min_len=4)
        for kp in (1, 3, 10):
            frac, beta, m, N = lemma1_terms(seqs, 3, kp)
            assert frac >= T.beta_prime(beta, m, N) - 1e-12


def test_u_bound_values():
    assert T.u_bound(1000, 2, 0.9) == pytest.approx(0.24984, abs=5e-6)
    assert T.u_bound(10**6, 0.5, 1.0) == 0.0
    assert T.u_bound(100, 0.5, 0.0) == pytest.approx(99.0)  # capped at D_next - 1
    assert T.u_bound(10**6, 2.0, 0.0) == 10**6 - 1
    with pytest.raises(UnsupportedParameter):
        T.u_bound(100, 1, 0.5)


def test_recall_values():
    assert T.recall_expression(100, 10**6, 0.5, 0.999) == pytest.approx(0.944806, abs=1e-6)
    assert T.recall_bound(100, 10**6, 0.5, 0.999) == pytest.approx(0.944806, abs=1e-6)
    # an expression above 1 is clamped
    assert T.recall_expression(10, 100, 0.5, 1.0) > 1
    assert T.recall_bound(10, 100, 0.5, 1.0) == 1.0
    assert T.recall_bound(10, 10**6, 1.5, 0.2) == 0.0
    with pytest.raises(UnsupportedParameter):
        T.recall_bound(10, 100, 1.0, 0.9)
    assert isinstance(UnsupportedParameter("x"), ValueError)


@given(st.sampled_from([0.3, 0.5, 0.8, 1.3, 2.0]), st.integers(1, 500),
       st.sampled_from([10**3, 10**5]), st.floats(0, 1), st.floats(0, 1))
def test_bounds_monotone_in_beta(a, k, D, b1, b2):
    lo, hi = sorted((b1, b2))
    assert T.u_bound(D, a, hi) <= T.u_bound(D, a, lo) + 1e-9
    assert T.recall_bound(k, D, a, hi) >= T.recall_bound(k, D, a, lo) - 1e-12


def test_u_bound_against_worst_case():
    for a, D, b in itertools.product((0.3, 0.5, 0.8, 1.2, 2.0), (10**3, 10**4), (0.5, 0.9, 0.99)):
        u, _ = worst_case(D, a, b, 1)
        assert u + 1 <= math.ceil(T.u_bound(D, a, b)) + 1


def test_conservative_recall_against_worst_case():
    grid = itertools.product((0.3, 0.5, 0.8, 1.2, 2.0), (1, 10, 100), (10**3, 10**5), (0.5, 0.9, 0.999))
    for a, k, D, b in grid:
        _, rec = worst_case(D, a, b, k)
        assert T.recall_bound_conservative(k, D, a, b) <= rec + 1e-12
        if a < 1:
            assert T.recall_bound_conservative(k, D, a, b) <= T.recall_bound(k, D, a, b)


def test_printed_recall_form_can_exceed_worst_case():
    # dropping the +1 of the rank bound makes the closed form optimistic here
    _, rec = worst_case(10**4, 0.8, 0.9, 10)
    assert T.recall_bound(10, 10**4, 0.8, 0.9) > rec


def test_concentration_delta():
    assert T.concentration_delta(0.05, 10, 100, 10**6) == pytest.approx(0.081457, abs=1e-6)
    assert T.concentration_delta(0.05, 10, 100, 10**12) < 1e-4
    for bad in (0.0, 1.0):
        with pytest.raises(ValueError):
            T.concentration_delta(bad, 10, 100, 100)


def test_concentration_coverage_small():
    rng = np.random.default_rng(21)
    D, N, k, delta = 200, 10**4, 5, 0.05
    p = T.ZipfModel(1.0, D).probabilities()
    true_top = p[:k].sum()
    draws = rng.multinomial(N, p, size=2000) / N
    emp_top = -np.sort(-draws, axis=1)[:, :k].sum(axis=1)
    width = T.concentration_delta(delta, k, D, N)
    assert np.mean(np.abs(emp_top - true_top) <= width) >= 1 - delta - 0.01


def test_noisy_reduces_to_noiseless():
    inp = T.BoundInputs(k=100, k_prime=150, beta=0.999, m=1, N=10**30, delta=0.05, D=10**4,
                        D_next=10**6)
    nb = T.noisy_bounds(inp, 0.5)
    assert nb.recall == pytest.approx(T.recall_bound(100, 10**6, 0.5, 0.999), abs=1e-9)
    assert nb.u == pytest.approx(T.u_bound(10**6, 0.5, 0.999), rel=1e-6)
    assert not nb.vacuous


def test_noisy_vacuous_example():
    inp = T.BoundInputs(k=100, k_prime=100, beta=0.9, m=100, N=10**6, delta=0.05, D=10**4,
                        D_next=10**6)
    raw = 0.9 - 100 / (10**6 - 100) - 4 * math.sqrt(100**2 * math.log(2 * 10**4 / 0.05) / (2 * 10**6))
    assert T.beta_double_prime(inp) == pytest.approx(raw)
    nb = T.noisy_bounds(inp, 0.5)
    assert raw < 0 and nb.vacuous
    assert nb.recall == T.recall_bound(100, 10**6, 0.5, max(raw, 0.0)) == 0.0
    assert nb.u == 10**6 - 1


def test_noisy_chained_example():
    inp = T.BoundInputs(k=10, k_prime=15, beta=0.95, m=1000, N=10**9, delta=0.05, D=10**4,
                        D_next=10**6)
    b2 = 0.95 - 1000 / (10**9 - 1000) - 4 * math.sqrt(15**2 * math.log(2 * 10**4 / 0.05) / (2 * 10**9))
    nb = T.noisy_bounds(inp, 0.5)
    e = 1 - 0.5
    expected = 1 - ((10**6) ** e - 0.5) * (1 - b2) / (11 ** e - 1) + 0.5 / (11 ** e - 1)
    assert nb.beta_eff == pytest.approx(b2, abs=1e-12)
    assert nb.recall == pytest.approx(min(1.0, max(0.0, expected)), abs=1e-12)
