"""Exact dense counting of every possible n-gram for n <= 3 in one pass.

A trigram ``(b0, b1, b2)`` has id ``b0 * 65536 + b1 * 256 + b2``, so id order
is byte order and the table needs no side index.
"""

from __future__ import annotations

from functools import partial

from . import _kernels as K
from .corpus import as_stream
from .counting import (
    DEFAULT_BATCH,
    CountMode,
    CountTable,
    PassStats,
    TopKList,
    big_endian_grams,
    run_counting_pass,
    top_k,
)
from .errors import ConfigError

TRIGRAM_SPACE = 256 ** 3


def trigram_id(gram: bytes) -> int:
    return int.from_bytes(gram, "big")


def count_dense(corpus, n: int = 3, mode=CountMode.ONCE, workers: int = 1,
                batch_size: int = DEFAULT_BATCH) -> tuple[CountTable, PassStats]:
    if n not in (1, 2, 3):
        raise ConfigError(f"dense counting supports n in 1..3, got {n}")
    mode = CountMode.parse(mode)
    return run_counting_pass(
        as_stream(corpus), 256 ** n, mode,
        partial(_mark, n), partial(_add, n),
        workers=workers, batch_size=batch_size,
    )


def _mark(n, seq, words):
    K.mark_dense(seq, n, words)


def _add(n, seq, counts):
    K.add_dense(seq, n, counts)


def count_trigrams(corpus, mode=CountMode.ONCE, workers: int = 1,
                   batch_size: int = DEFAULT_BATCH) -> CountTable:
    table, _ = count_dense(corpus, 3, mode, workers, batch_size)
    return table


def topk_dense(table: CountTable, k: int) -> TopKList:
    n = {256: 1, 65536: 2, TRIGRAM_SPACE: 3}[table.capacity]
    return top_k(table, k, lambda ids: big_endian_grams(ids, n))


def topk_trigrams(table: CountTable, k_prime: int) -> TopKList:
    return topk_dense(table, k_prime)
