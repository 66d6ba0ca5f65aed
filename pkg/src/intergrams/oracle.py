"""Plain dictionary counting: the reference every other algorithm is checked against."""

from __future__ import annotations

from collections import Counter

from .corpus import as_stream
from .counting import CountMode, TopKList
from .errors import ConfigError

DEFAULT_MAX_BYTES = 256 * 1024 * 1024


def naive_count(corpus, n: int, mode=CountMode.ONCE,
                max_bytes: int | None = DEFAULT_MAX_BYTES) -> Counter:
    if n < 1:
        raise ConfigError("n must be >= 1")
    mode = CountMode.parse(mode)
    counts: Counter = Counter()
    seen_bytes = 0
    for seq in as_stream(corpus):
        data = seq.data
        seen_bytes += len(data)
        if max_bytes is not None and seen_bytes > max_bytes:
            raise ConfigError(
                f"corpus exceeds the naive-counting guard of {max_bytes} bytes")
        grams = (data[i:i + n] for i in range(len(data) - n + 1))
        if mode is CountMode.ONCE:
            counts.update(set(grams))
        else:
            counts.update(grams)
    return counts


def naive_topk(counts: dict[bytes, int], k: int) -> TopKList:
    if k < 1:
        raise ValueError("k must be >= 1")
    return TopKList.from_counts(counts, k)
