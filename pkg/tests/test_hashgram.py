import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from conftest import brute_counts, ranked, small_corpora
from intergrams import ConfigError, HashgramConfig, hash_ngram, naive_count, naive_topk, run_hashgram
from intergrams import _kernels as K
from intergrams.counting import CountMode

M64 = (1 << 64) - 1


def ref_mix(z):
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & M64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & M64
    return z ^ (z >> 31)


def ref_hash(gram, seed, buckets):
    h = ref_mix((seed ^ (len(gram) * 0x9E3779B97F4A7C15)) & M64)
    for i in range(0, len(gram), 8):
        h = ref_mix(h ^ int.from_bytes(gram[i:i + 8], "big"))
    return h % buckets


@given(st.binary(min_size=1, max_size=20), st.integers(0, M64), st.integers(1, 1 << 40))
def test_hash_matches_reference(gram, seed, buckets):
    cfg = HashgramConfig(n=len(gram), buckets=buckets, seed=seed)
    assert hash_ngram(gram, cfg) == ref_hash(gram, seed, buckets)


def test_hash_basics():
    cfg = HashgramConfig(n=3, buckets=1000)
    assert hash_ngram(b"abc", cfg) == hash_ngram(b"abc", cfg)
    assert 0 <= hash_ngram(b"xyz", cfg) < 1000
    one = HashgramConfig(n=3, buckets=1)
    assert {hash_ngram(bytes([a, b, c]), one) for a in range(4) for b in range(4) for c in (0, 255)} == {0}
    with pytest.raises(ValueError):
        hash_ngram(b"ab", cfg)


def test_rolling_kernel_agrees_with_direct_hash():
    rng = np.random.default_rng(0)
    seq = rng.integers(0, 256, 500).astype(np.uint8)
    for n in (3, 8, 11):
        cfg = HashgramConfig(n=n, buckets=997, seed=42)
        counts = np.zeros(997, dtype=np.uint64)
        K.add_hash(seq, n, cfg.h0, cfg.buckets, counts)
        ref = np.zeros(997, dtype=np.uint64)
        for i in range(len(seq) - n + 1):
            ref[ref_hash(seq[i:i + n].tobytes(), 42, 997)] += 1
        assert np.array_equal(counts, ref)


def test_bucket_uniformity():
    rng = np.random.default_rng(7)
    n, B = 6, 1 << 16
    seq = rng.integers(0, 256, 1_000_000 + n - 1).astype(np.uint8)
    counts = np.zeros(B, dtype=np.uint64)
    cfg = HashgramConfig(n=n, buckets=B, seed=3)
    K.add_hash(seq, n, cfg.h0, B, counts)
    assert counts.sum() == 1_000_000
    assert stats.chisquare(counts.astype(np.float64)).pvalue > 0.001


def collision_free(seqs, n, cfg):
    grams = set(naive_count(seqs, n))
    return len({hash_ngram(g, cfg) for g in grams}) == len(grams)


def test_single_gram_corpus():
    cfg = HashgramConfig(n=3, k=1, buckets=1 << 20)
    assert run_hashgram(["aaaa"], cfg).entries == ((b"aaa", 1),)


@settings(max_examples=40)
@given(small_corpora(alphabet=b"abc\x00"), st.integers(3, 9), st.integers(1, 10),
       st.sampled_from(list(CountMode)), st.sampled_from(["map", "trie"]))
def test_injective_regime_is_exact(seqs, n, k, mode, second):
    cfg = HashgramConfig(n=n, k=k, buckets=1 << 24, mode=mode, second_pass=second, seed=9)
    if not collision_free(seqs, n, cfg):
        return
    got = run_hashgram(seqs, cfg)
    assert list(got.entries) == ranked(brute_counts(seqs, n, mode is CountMode.ONCE), k)


@settings(max_examples=40)
@given(small_corpora(alphabet=b"abcdef", max_len=100), st.integers(3, 10), st.integers(1, 64),
       st.sampled_from(list(CountMode)), st.sampled_from(["map", "trie"]), st.integers(1, 8))
def test_forced_collisions_keep_counts_exact(seqs, n, B, mode, second, k):
    cfg = HashgramConfig(n=n, k=k, buckets=B, mode=mode, second_pass=second, workers=2)
    truth = naive_count(seqs, n, mode)
    got = run_hashgram(seqs, cfg)
    assert len(got) <= k
    for g, c in got:
        assert c == truth[g]


def test_pass_one_bucket_bound():
    rng = np.random.default_rng(4)
    seqs = [rng.integers(0, 3, 40).astype(np.uint8) for _ in range(30)]
    words = np.zeros(1, dtype=np.uint64)
    counts = np.zeros(64, dtype=np.uint64)
    cfg = HashgramConfig(n=4, buckets=64)
    for s in seqs:
        words[:] = 0
        K.mark_hash(s, 4, cfg.h0, 64, words)
        K.flush_rows(words.reshape(1, 1), np.arange(1), counts)
    assert counts.max() <= len(seqs)


def test_sorted_membership_matches_bitset():
    from intergrams.hashgram import _Membership
    rng = np.random.default_rng(6)
    seq = rng.integers(0, 4, 400).astype(np.uint8)
    big, small = (1 << 33) + 5, 1 << 12
    for buckets, sorted_path in ((big, True), (small, False)):
        cfg = HashgramConfig(n=5, buckets=buckets, seed=1)
        keys = [seq[i:i + 5].tobytes() for i in range(len(seq) - 4)]
        chosen = {hash_ngram(g, cfg) for g in keys[::7]}
        member = _Membership(np.array(sorted(chosen), dtype=np.uint64), buckets)
        assert member.use_bitset is not sorted_path
        hits = K.hit_keys(seq, 5, cfg.h0, buckets, *member.args())
        expected = [int.from_bytes(g, "big") for g in keys if hash_ngram(g, cfg) in chosen]
        assert hits.tolist() == expected


def test_report_lists_passes():
    report = []
    run_hashgram(["abcabc"], HashgramConfig(n=3, k=2, buckets=1 << 10), report)
    assert [p.label for p in report] == ["hash pass", "exact pass (map)"]
    report = []
    run_hashgram(["abcabc"], HashgramConfig(n=3, k=2, buckets=1 << 10, second_pass="trie"), report)
    assert [p.label for p in report] == ["hash pass", "candidate discovery", "exact pass (trie)"]


def test_config_validation():
    with pytest.raises(ConfigError):
        HashgramConfig(buckets=0)
    with pytest.raises(ConfigError):
        HashgramConfig(second_pass="heap")
