"""Two-pass hash-gramming baseline.

Pass 1 counts hashed n-grams into ``B`` buckets and keeps the k heaviest
buckets. Pass 2 counts exactly, but only the n-grams that hash into a kept
bucket. The second pass either uses an associative map keyed by the gram
(``second_pass="map"``) or discovers the candidate grams first and then counts
them through a prefix trie into a dense table (``second_pass="trie"``).

Hash: ``h = mix(seed ^ (n * GOLDEN))`` then, for each 8-byte big-endian chunk
``c`` of the gram, ``h = mix(h ^ c)``; the bucket is ``h mod B``. ``mix`` is
the SplitMix64 finalizer.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass
from functools import partial

import numpy as np
from numba import types
from numba.typed import Dict

from . import _kernels as K
from .corpus import Sequence, as_stream, run_pipeline
from .counting import DEFAULT_BATCH, CountMode, TopKList, run_counting_pass, tied_cut, top_k
from .errors import ConfigError
from .multipass import PassResult
from .trie import build_trie

GOLDEN = 0x9E3779B97F4A7C15
_MASK = (1 << 64) - 1


def mix64(z: int) -> int:
    z &= _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def seed_state(seed: int, n: int) -> int:
    return mix64((seed ^ (n * GOLDEN)) & _MASK)


@dataclass(frozen=True)
class HashgramConfig:
    n: int = 6
    k: int = 10_000
    buckets: int = 1 << 31
    mode: CountMode = CountMode.ONCE
    seed: int = 0
    second_pass: str = "map"
    workers: int = 1
    batch_size: int = DEFAULT_BATCH

    def __post_init__(self):
        if self.n < 1 or self.k < 1:
            raise ConfigError("n and k must be >= 1")
        if self.buckets < 1:
            raise ConfigError("bucket count must be >= 1")
        if self.second_pass not in ("map", "trie"):
            raise ConfigError(f"unknown second pass {self.second_pass!r}")
        object.__setattr__(self, "mode", CountMode.parse(self.mode))
        object.__setattr__(self, "seed", self.seed & _MASK)

    @property
    def h0(self) -> np.uint64:
        return np.uint64(seed_state(self.seed, self.n))


def hash_ngram(gram: bytes, cfg: HashgramConfig) -> int:
    if len(gram) != cfg.n:
        raise ValueError(f"gram length {len(gram)} != n={cfg.n}")
    h = K.hash_bytes(np.frombuffer(bytes(gram), dtype=np.uint8), cfg.h0)
    return int(h) % cfg.buckets


def run_hashgram(corpus, cfg: HashgramConfig, report: list | None = None) -> TopKList:
    stream = as_stream(corpus)
    passes = report if report is not None else []

    table, st = run_counting_pass(
        stream, cfg.buckets, cfg.mode,
        lambda seq, words: K.mark_hash(seq, cfg.n, cfg.h0, cfg.buckets, words),
        lambda seq, counts: K.add_hash(seq, cfg.n, cfg.h0, cfg.buckets, counts),
        workers=cfg.workers, batch_size=cfg.batch_size,
    )
    t0 = time.perf_counter()
    # every bucket tied with the k-th one is kept, so the final canonical
    # tie-break sees all grams that could win it
    selected = tied_cut(table.counts, cfg.k).astype(np.uint64)
    del table
    member = _Membership(selected, cfg.buckets)
    passes.append(PassResult(j=cfg.n, label="hash pass", top=TopKList(), elapsed=st.elapsed,
                             bytes=st.bytes, sequences=st.sequences, capacity=cfg.buckets,
                             select_elapsed=time.perf_counter() - t0))

    if cfg.second_pass == "trie":
        return _trie_pass(stream, cfg, member, passes)
    if cfg.n <= 8:
        return _map_pass_packed(stream, cfg, member, passes)
    return _map_pass_bytes(stream, cfg, member, passes)


class _Membership:
    """Selected-bucket test: a B-bit bitset when B <= 2**32, else a sorted array."""

    def __init__(self, selected: np.ndarray, buckets: int):
        self.use_bitset = buckets <= (1 << 32)
        self.sorted = np.sort(selected)
        if self.use_bitset:
            self.words = np.zeros((buckets + 63) // 64, dtype=np.uint64)
            np.bitwise_or.at(self.words, (self.sorted >> np.uint64(6)).astype(np.int64),
                             np.uint64(1) << (self.sorted & np.uint64(63)))
        else:
            self.words = np.zeros(1, dtype=np.uint64)

    def args(self):
        return self.words, self.sorted, self.use_bitset


def _new_dict():
    return Dict.empty(key_type=types.uint64, value_type=types.uint64)


def _map_pass_packed(stream, cfg, member, passes) -> TopKList:
    once = cfg.mode is CountMode.ONCE
    total = _new_dict()
    lock = threading.Lock()
    t0 = time.perf_counter()

    class Worker:
        def __init__(self):
            self.local = _new_dict()
            self.pending = 0

        def __call__(self, seq: Sequence):
            arr = np.frombuffer(seq.data, dtype=np.uint8)
            keys = K.hit_keys(arr, cfg.n, cfg.h0, cfg.buckets, *member.args())
            K.dict_add_keys(self.local, keys, once)
            self.pending += 1
            if self.pending >= cfg.batch_size:
                self.merge()

        def merge(self):
            with lock:
                K.dict_merge(total, self.local)
            self.pending = 0

    workers = [Worker() for _ in range(max(1, cfg.workers))]
    st = run_pipeline(stream, workers)
    for w in workers:
        w.merge()
    keys, vals = K.dict_to_arrays(total)
    elapsed = time.perf_counter() - t0
    t1 = time.perf_counter()
    order = np.lexsort((keys, -vals.astype(np.int64)))[:cfg.k]
    grams = _unpack(keys[order], cfg.n)
    top = TopKList(tuple((g, int(c)) for g, c in zip(grams, vals[order])))
    passes.append(PassResult(j=cfg.n, label="exact pass (map)", top=top, elapsed=elapsed,
                             bytes=st.bytes, sequences=st.sequences, capacity=len(keys),
                             select_elapsed=time.perf_counter() - t1))
    return top


def _unpack(keys: np.ndarray, n: int) -> list[bytes]:
    return [int(k).to_bytes(n, "big") for k in keys]


def _hit_grams(seq: Sequence, cfg, member) -> list[bytes]:
    arr = np.frombuffer(seq.data, dtype=np.uint8)
    pos = K.hit_positions(arr, cfg.n, cfg.h0, cfg.buckets, *member.args())
    d = seq.data
    return [d[p:p + cfg.n] for p in pos.tolist()]


def _map_pass_bytes(stream, cfg, member, passes) -> TopKList:
    once = cfg.mode is CountMode.ONCE
    total: dict[bytes, int] = {}
    lock = threading.Lock()
    t0 = time.perf_counter()

    def handle(seq: Sequence):
        grams = _hit_grams(seq, cfg, member)
        local: dict[bytes, int] = {}
        for g in (set(grams) if once else grams):
            local[g] = local.get(g, 0) + 1
        with lock:
            for g, c in local.items():
                total[g] = total.get(g, 0) + c

    st = run_pipeline(stream, [handle] * max(1, cfg.workers))
    top = TopKList.from_counts(total, cfg.k)
    passes.append(PassResult(j=cfg.n, label="exact pass (map)", top=top,
                             elapsed=time.perf_counter() - t0, bytes=st.bytes,
                             sequences=st.sequences, capacity=len(total)))
    return top


def _trie_pass(stream, cfg, member, passes) -> TopKList:
    found: set[bytes] = set()
    lock = threading.Lock()
    t0 = time.perf_counter()

    def discover(seq: Sequence):
        grams = set(_hit_grams(seq, cfg, member))
        with lock:
            found.update(grams)

    st = run_pipeline(stream, [discover] * max(1, cfg.workers))
    passes.append(PassResult(j=cfg.n, label="candidate discovery", top=TopKList(),
                             elapsed=time.perf_counter() - t0, bytes=st.bytes,
                             sequences=st.sequences, capacity=len(found)))
    if not found:
        return TopKList()
    t0 = time.perf_counter()
    trie = build_trie(sorted(found))
    build_time = time.perf_counter() - t0
    table, st = run_counting_pass(
        stream, len(trie), cfg.mode,
        partial(_mark_full, trie), partial(_add_full, trie),
        workers=cfg.workers, batch_size=cfg.batch_size,
    )
    t1 = time.perf_counter()
    top = top_k(table, cfg.k, lambda ids: trie.prefixes[ids])
    passes.append(PassResult(j=cfg.n, label="exact pass (trie)", top=top, elapsed=st.elapsed,
                             bytes=st.bytes, sequences=st.sequences, capacity=len(trie),
                             select_elapsed=build_time + time.perf_counter() - t1))
    return top


def _mark_full(trie, seq, words):
    K.mark_full(seq, trie.depth, *trie.kernel_args(), words)


def _add_full(trie, seq, counts):
    K.add_full(seq, trie.depth, *trie.kernel_args(), counts)
