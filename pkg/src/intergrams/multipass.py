"""Multi-pass top-k n-gram search that grows the gram length one byte per pass.

Pass 3 counts every trigram densely. Each later pass ``j`` only counts
j-grams whose ``(j-1)``-byte prefix was among the ``k' = ceil(z * k)`` best
grams of the previous pass, so the candidate space is ``256 * k'`` ids:
``ordinal * 256 + last_byte``.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from functools import partial
from typing import NamedTuple

import numpy as np

from . import _kernels as K
from .corpus import as_stream
from .counting import DEFAULT_BATCH, CountMode, CountTable, PassStats, TopKList, run_counting_pass, top_k
from .errors import ConfigError
from .trie import PrefixTrie, build_trie
from .trigram import count_dense, topk_dense

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class IntergramConfig:
    n: int = 6
    k: int = 10_000
    z: float = 1.5
    mode: CountMode = CountMode.ONCE
    batch_size: int = DEFAULT_BATCH
    workers: int = 1
    frequency_layout: bool = True

    def __post_init__(self):
        if self.n < 1:
            raise ConfigError("n must be >= 1")
        if self.k < 1:
            raise ConfigError("k must be >= 1")
        if not self.z >= 1:
            raise ConfigError("z must be >= 1")
        if self.batch_size < 1:
            raise ConfigError("flush batch size must be >= 1")
        object.__setattr__(self, "mode", CountMode.parse(self.mode))

    @property
    def k_prime(self) -> int:
        # round first so 1.1 * 10 is 11, not 12
        return max(self.k, math.ceil(round(self.z * self.k, 9)))


@dataclass
class PassResult:
    j: int
    label: str
    top: TopKList
    elapsed: float
    bytes: int
    sequences: int
    capacity: int
    select_elapsed: float = 0.0
    notes: list[str] = field(default_factory=list)

    @property
    def throughput(self) -> float:
        return self.bytes / self.elapsed if self.elapsed > 0 else float("inf")


class IntergramsResult(NamedTuple):
    top: TopKList
    passes: list


def candidate_id(prefix_ordinal: int, last_byte: int, k_prime: int | None = None) -> int:
    if prefix_ordinal < 0 or (k_prime is not None and prefix_ordinal >= k_prime):
        raise ValueError(f"prefix ordinal {prefix_ordinal} out of range")
    if not 0 <= last_byte <= 255:
        raise ValueError(f"byte {last_byte} out of range")
    return prefix_ordinal * 256 + last_byte


def _mark_ext(trie, seq, words):
    K.mark_extend(seq, trie.depth, *trie.kernel_args(), words)


def _add_ext(trie, seq, counts):
    K.add_extend(seq, trie.depth, *trie.kernel_args(), counts)


def extend_pass_stats(corpus, trie: PrefixTrie, j: int, mode=CountMode.ONCE,
                      k_prime: int | None = None, workers: int = 1,
                      batch_size: int = DEFAULT_BATCH) -> tuple[CountTable, PassStats]:
    if trie.size and trie.depth != j - 1:
        raise ValueError(f"trie depth {trie.depth} cannot extend to {j}-grams")
    k_prime = len(trie) if k_prime is None else k_prime
    if k_prime < len(trie):
        raise ValueError("k_prime smaller than the number of retained prefixes")
    return run_counting_pass(
        as_stream(corpus), 256 * max(k_prime, 1), CountMode.parse(mode),
        partial(_mark_ext, trie), partial(_add_ext, trie),
        workers=workers, batch_size=batch_size,
    )


def extend_pass(corpus, trie: PrefixTrie, j: int, mode=CountMode.ONCE,
                k_prime: int | None = None, workers: int = 1,
                batch_size: int = DEFAULT_BATCH) -> CountTable:
    table, _ = extend_pass_stats(corpus, trie, j, mode, k_prime, workers, batch_size)
    return table


def extended_grams(trie: PrefixTrie, ids: np.ndarray) -> np.ndarray:
    ids = np.asarray(ids, dtype=np.int64)
    return np.concatenate(
        [trie.prefixes[ids >> 8], (ids & 0xFF).astype(np.uint8)[:, None]], axis=1)


def run_intergrams(corpus, cfg: IntergramConfig) -> IntergramsResult:
    stream = as_stream(corpus)
    passes: list[PassResult] = []
    kp = cfg.k_prime
    first_n = min(cfg.n, 3)
    last = cfg.n == first_n

    table, st = count_dense(stream, first_n, cfg.mode, cfg.workers, cfg.batch_size)
    t0 = time.perf_counter()
    top = topk_dense(table, cfg.k if last else kp)
    del table
    passes.append(_record(first_n, top, st, 256 ** first_n, time.perf_counter() - t0, kp, last))
    if last:
        return IntergramsResult(top, passes)

    for j in range(4, cfg.n + 1):
        last = j == cfg.n
        t0 = time.perf_counter()
        trie = build_trie(top, frequency_layout=cfg.frequency_layout)
        passes[-1].select_elapsed += time.perf_counter() - t0
        table, st = extend_pass_stats(stream, trie, j, cfg.mode, kp, cfg.workers, cfg.batch_size)
        t0 = time.perf_counter()
        top = top_k(table, cfg.k if last else kp, partial(extended_grams, trie))
        del table
        passes.append(_record(j, top, st, 256 * kp, time.perf_counter() - t0, kp, last))
    return IntergramsResult(top, passes)


def _record(j, top, st, capacity, select_elapsed, kp, last) -> PassResult:
    res = PassResult(j=j, label=f"{j}-gram pass", top=top, elapsed=st.elapsed,
                     bytes=st.bytes, sequences=st.sequences, capacity=capacity,
                     select_elapsed=select_elapsed)
    if not last and len(top) < kp:
        msg = f"{j}-gram pass produced only {len(top)} nonzero candidates (< k'={kp}); kept all"
        res.notes.append(msg)
        log.info(msg)
    return res
