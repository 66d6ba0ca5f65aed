"""Seen-bitsets, dense count tables, batched flushes and canonical top-k."""

from __future__ import annotations

import enum
import queue
import threading
import time
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator

import numpy as np

from . import _kernels as K
from .corpus import Sequence, run_pipeline
from .errors import ConfigError

DEFAULT_BATCH = 8


class CountMode(enum.Enum):
    ONCE = "once"
    ALL = "all"

    @classmethod
    def parse(cls, value) -> "CountMode":
        if isinstance(value, cls):
            return value
        return cls(str(value).lower())


class SeenBitset:
    """One bit per candidate id; a worker's per-sequence dedup buffer."""

    def __init__(self, capacity: int, words: np.ndarray | None = None):
        self.capacity = capacity
        nwords = (capacity + 63) // 64
        if words is None:
            words = np.zeros(nwords, dtype=np.uint64)
        elif words.shape != (nwords,):
            raise ValueError("word buffer does not match capacity")
        self.words = words

    def mark(self, ident: int) -> None:
        if not 0 <= ident < self.capacity:
            raise IndexError(f"id {ident} outside [0, {self.capacity})")
        K.set_bit(self.words, ident)

    def __contains__(self, ident: int) -> bool:
        return bool((int(self.words[ident >> 6]) >> (ident & 63)) & 1)

    def popcount(self) -> int:
        return int(K.popcount_words(self.words))

    def clear(self) -> None:
        self.words[:] = 0


class CountTable:
    def __init__(self, capacity: int):
        self.capacity = capacity
        try:
            self.counts = np.zeros(capacity, dtype=np.uint64)
        except MemoryError:
            raise ConfigError(f"a table of {capacity} 64-bit counters ({capacity * 8 / 2**30:.1f} GiB) "
                              "does not fit in memory; lower the bucket count or k") from None

    def __getitem__(self, ident: int) -> int:
        return int(self.counts[ident])

    def total(self) -> int:
        return int(self.counts.sum(dtype=np.uint64))

    def nonzero(self) -> int:
        return int(np.count_nonzero(self.counts))


def mark(seen: SeenBitset, ident: int) -> None:
    seen.mark(ident)


def flush_batch(batch: list[SeenBitset], table: CountTable) -> None:
    """Add every bitset in ``batch`` into ``table`` and clear the bitsets."""
    if not batch:
        return
    for b in batch:
        if b.capacity != table.capacity:
            raise ValueError(
                f"bitset capacity {b.capacity} != table capacity {table.capacity}")
    stacked = np.stack([b.words for b in batch])
    K.flush_rows(stacked, np.arange(len(batch), dtype=np.int64), table.counts)
    for b in batch:
        b.clear()


def increment_all(table: CountTable, ident: int, times: int) -> None:
    if not 0 <= ident < table.capacity:
        raise IndexError(f"id {ident} outside [0, {table.capacity})")
    if times < 0:
        raise ValueError("times must be >= 0")
    table.counts[ident] += np.uint64(times)


# ------------------------------------------------------------------ top-k

@dataclass(frozen=True)
class TopKList:
    """Ranked ``(gram, count)`` pairs: count descending, then gram bytes ascending."""

    entries: tuple[tuple[bytes, int], ...] = ()

    def __iter__(self) -> Iterator[tuple[bytes, int]]:
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    @property
    def grams(self) -> list[bytes]:
        return [g for g, _ in self.entries]

    @property
    def counts(self) -> list[int]:
        return [c for _, c in self.entries]

    def gram_set(self) -> set[bytes]:
        return {g for g, _ in self.entries}

    def as_dict(self) -> dict[bytes, int]:
        return dict(self.entries)

    def to_tsv(self) -> str:
        return "".join(f"{g.hex()}\t{c}\n" for g, c in self.entries)

    @classmethod
    def from_tsv(cls, text: str) -> "TopKList":
        entries = []
        for line in text.splitlines():
            if not line.strip():
                continue
            gram, count = line.split("\t")
            entries.append((bytes.fromhex(gram), int(count)))
        return cls(tuple(entries))

    @classmethod
    def from_counts(cls, counts: dict[bytes, int], k: int) -> "TopKList":
        ranked = sorted(((g, c) for g, c in counts.items() if c > 0),
                        key=lambda gc: (-gc[1], gc[0]))
        return cls(tuple((bytes(g), int(c)) for g, c in ranked[:k]))


_HIST_CAP = 1 << 16


def _kth(counts: np.ndarray, k: int) -> tuple[int, np.ndarray]:
    hist = K.count_histogram(counts, _HIST_CAP)
    if k < 1 or k > counts.shape[0]:
        return 0, hist
    # walk the bins from the top until k entries have been passed
    c = _HIST_CAP - 1 - int(np.searchsorted(np.cumsum(hist[::-1]), k))
    if c < _HIST_CAP - 1:
        return c, hist
    big = np.sort(K.values_at_least(counts, _HIST_CAP - 1, int(hist[-1])))
    return int(big[big.shape[0] - k]), hist


def kth_largest(counts: np.ndarray, k: int) -> int:
    """The k-th largest value of ``counts`` (0 if there are fewer than k entries).

    Two linear scans and no copy of the table, so it is safe on
    multi-gigabyte bucket arrays.
    """
    return _kth(counts, k)[0]


def tied_cut(counts: np.ndarray, k: int) -> np.ndarray:
    """Nonzero ids whose count is at least the k-th largest count (ascending)."""
    kth, hist = _kth(counts, k)
    threshold = max(kth, 1)
    if threshold < _HIST_CAP - 1:
        size = int(hist[threshold:].sum())
    else:
        size = int(hist[-1])
    return K.ids_at_least(counts, threshold, size)


def top_ids(counts: np.ndarray, k: int) -> np.ndarray:
    """Ids of the k largest counts, ties broken by ascending id."""
    if k < 1:
        raise ValueError("k must be >= 1")
    ids = tied_cut(counts, k)
    order = np.lexsort((ids, -counts[ids].astype(np.int64)))
    return ids[order[:k]]


def top_k(table: CountTable, k: int,
          id_to_gram: Callable[[np.ndarray], np.ndarray]) -> TopKList:
    """Canonical top-k of a dense table.

    ``id_to_gram`` maps an array of ids to a ``(len(ids), n)`` uint8 array of
    gram bytes; it is only called on the few ids tied at or above the cut.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    counts = table.counts
    ids = tied_cut(counts, k)
    if ids.size == 0:
        return TopKList()
    grams = np.asarray(id_to_gram(ids), dtype=np.uint8)
    keys = [grams[:, c] for c in range(grams.shape[1] - 1, -1, -1)]
    keys.append(-counts[ids].astype(np.int64))
    order = np.lexsort(keys)[:k]
    n = grams.shape[1]
    flat = grams[order].tobytes()
    values = counts[ids[order]].tolist()
    return TopKList(tuple((flat[i * n:(i + 1) * n], c) for i, c in enumerate(values)))


def big_endian_grams(ids: np.ndarray, n: int) -> np.ndarray:
    ids = np.asarray(ids, dtype=np.int64)
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64) * 8
    return ((ids[:, None] >> shifts) & 0xFF).astype(np.uint8)


# ------------------------------------------------------------- pass engine

class BatchedFlusher:
    """Shared pool of seen-bitsets drained into one table in batches.

    Workers take a free row, mark one sequence into it and hand it back. Once
    ``batch_size`` rows are pending, the submitting worker flushes them under
    exclusive table access.
    """

    def __init__(self, table: CountTable, batch_size: int, workers: int):
        if batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        self.table = table
        self.batch_size = batch_size
        nwords = (table.capacity + 63) // 64
        self.buf = np.zeros((batch_size + workers, nwords), dtype=np.uint64)
        self._free: queue.Queue = queue.Queue()
        for r in range(self.buf.shape[0]):
            self._free.put(r)
        self._pending: list[int] = []
        self._lock = threading.Lock()
        self._table_lock = threading.Lock()
        self.flushes = 0

    def acquire(self) -> int:
        return self._free.get()

    def submit(self, row: int) -> None:
        with self._lock:
            self._pending.append(row)
            if len(self._pending) < self.batch_size:
                return
            rows, self._pending = self._pending, []
        self._flush(rows)

    def _flush(self, rows: list[int]) -> None:
        with self._table_lock:
            K.flush_rows(self.buf, np.asarray(rows, dtype=np.int64), self.table.counts)
            self.flushes += 1
        for r in rows:
            self._free.put(r)

    def finish(self) -> None:
        with self._lock:
            rows, self._pending = self._pending, []
        if rows:
            self._flush(rows)


@dataclass
class PassStats:
    sequences: int
    bytes: int
    elapsed: float

    @property
    def throughput(self) -> float:
        return self.bytes / self.elapsed if self.elapsed > 0 else float("inf")


def run_counting_pass(
    stream: Iterable[Sequence],
    capacity: int,
    mode: CountMode,
    mark_fn: Callable[[np.ndarray, np.ndarray], None],
    add_fn: Callable[[np.ndarray, np.ndarray], None],
    workers: int = 1,
    batch_size: int = DEFAULT_BATCH,
) -> tuple[CountTable, PassStats]:
    """One pass over ``stream`` into a fresh table of ``capacity`` counters.

    ``mark_fn(seq, words)`` sets the candidate bits of one sequence (ONCE);
    ``add_fn(seq, counts)`` increments counters directly (ALL). Count-all
    increments go through a lock since there is no atomic add to rely on.
    """
    workers = max(1, int(workers))
    table = CountTable(capacity)
    start = time.perf_counter()
    if mode is CountMode.ONCE:
        flusher = BatchedFlusher(table, batch_size, workers)

        def handle(seq: Sequence) -> None:
            row = flusher.acquire()
            mark_fn(np.frombuffer(seq.data, dtype=np.uint8), flusher.buf[row])
            flusher.submit(row)

        stats = run_pipeline(stream, [handle] * workers)
        flusher.finish()
    else:
        lock = threading.Lock()

        def handle(seq: Sequence) -> None:
            arr = np.frombuffer(seq.data, dtype=np.uint8)
            with lock:
                add_fn(arr, table.counts)

        stats = run_pipeline(stream, [handle] * workers)
    return table, PassStats(stats.sequences, stats.bytes, time.perf_counter() - start)
