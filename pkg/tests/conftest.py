import random
from collections import Counter

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

settings.register_profile(
    "default", max_examples=60, deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


def brute_counts(seqs, n, once=True):
    """Second, deliberately dumb reference: nested loops, no slicing tricks."""
    out = Counter()
    for s in seqs:
        s = s.encode() if isinstance(s, str) else bytes(s)
        found = []
        for i in range(len(s) - n + 1):
            g = bytes(s[i + t] for t in range(n))
            if once and g in found:
                continue
            found.append(g)
            out[g] += 1
    return out


def ranked(counts, k):
    items = [(g, c) for g, c in counts.items() if c > 0]
    items.sort(key=lambda gc: (-gc[1], list(gc[0])))
    return items[:k]


def random_corpus(rng: random.Random, m_max=50, len_max=2000, alphabet=None, min_len=0):
    a = alphabet or rng.randint(4, 256)
    symbols = rng.sample(range(256), a)
    m = rng.randint(1, m_max)
    # skew symbol choice so some grams repeat across sequences
    weights = [1.0 / (i + 1) for i in range(a)]
    seqs = []
    for _ in range(m):
        length = rng.randint(min_len, len_max)
        seqs.append(bytes(rng.choices(symbols, weights, k=length)))
    return seqs


def lemma1_terms(seqs, n, k_prime):
    """``(prefixed fraction, beta, m, N)`` measured with every-occurrence counts.

    ``beta`` is the share of the N n-gram occurrences taken by the canonical
    top-k' n-grams; the fraction is the share of (n+1)-gram occurrences whose
    n-byte prefix is one of them.
    """
    small = brute_counts(seqs, n, once=False)
    big = brute_counts(seqs, n + 1, once=False)
    top = {g for g, _ in ranked(small, k_prime)}
    N = sum(small.values())
    beta = sum(small[g] for g in top) / N
    frac = sum(c for g, c in big.items() if g[:n] in top) / sum(big.values())
    return frac, beta, len(seqs), N


@st.composite
def small_corpora(draw, max_seqs=8, max_len=60, alphabet=b"abcd"):
    seqs = draw(st.lists(
        st.lists(st.sampled_from(list(alphabet)), max_size=max_len).map(bytes),
        min_size=1, max_size=max_seqs))
    return seqs


@pytest.fixture
def rng():
    return random.Random(1234)


# criterion number -> (passed, one-line detail); filled by test_acceptance.py
ACCEPTANCE: dict[int, tuple[bool, str]] = {}
ACCEPTANCE_TITLES = {
    1: "oracle exactness",
    2: "hash-gram correctness",
    3: "prefix recall vs z",
    4: "rank and recall bounds vs worst case",
    5: "partial-sum sandwich",
    6: "concentration coverage",
    7: "prefix mass transfer",
    8: "Jaccard vs z",
    9: "relative throughput",
    10: "determinism across worker counts",
}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num, title in ACCEPTANCE_TITLES.items():
        if num in ACCEPTANCE:
            ok, detail = ACCEPTANCE[num]
            terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {num:>2}. {title}: {detail}")
        else:
            terminalreporter.write_line(f"[SKIP] {num:>2}. {title}: not run")
