"""Sequence sources and the reader/worker pipeline that feeds counting passes."""

from __future__ import annotations

import os
import queue
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Iterator, Sequence as Seq

from .errors import ConfigError, CorpusIOError

_BLOCK = 1 << 20


@dataclass(frozen=True)
class Sequence:
    id: int
    data: bytes


@dataclass(frozen=True)
class CorpusSpec:
    """Where sequences come from.

    Files are one sequence each unless ``chunk_size`` splits them into
    fixed-size records or ``lines`` makes every newline-terminated line a
    record. ``in_memory`` bypasses the filesystem entirely.
    """

    roots: tuple = ()
    recurse: bool = True
    in_memory: Seq[bytes] | None = None
    chunk_size: int | None = None
    lines: bool = False

    def __post_init__(self):
        if self.chunk_size is not None and self.chunk_size < 1:
            raise ConfigError("chunk_size must be >= 1")
        if self.chunk_size is not None and self.lines:
            raise ConfigError("chunk mode and line mode are exclusive")


class SequenceStream:
    """Re-iterable view over a corpus; every iteration yields identical items."""

    def __init__(self, spec: CorpusSpec, paths: list[Path]):
        self.spec = spec
        self.paths = paths

    def __iter__(self) -> Iterator[Sequence]:
        if self.spec.in_memory is not None:
            for i, data in enumerate(self.spec.in_memory):
                yield Sequence(i, to_bytes(data))
            return
        ident = 0
        for path in self.paths:
            for record in self._records(path):
                yield Sequence(ident, record)
                ident += 1

    def _records(self, path: Path) -> Iterator[bytes]:
        try:
            with open(path, "rb") as fh:
                if self.spec.lines:
                    for line in fh:
                        yield line[:-1] if line.endswith(b"\n") else line
                elif self.spec.chunk_size:
                    while True:
                        chunk = fh.read(self.spec.chunk_size)
                        if not chunk:
                            break
                        yield chunk
                else:
                    buf = bytearray()
                    while True:
                        block = fh.read(_BLOCK)
                        if not block:
                            break
                        buf += block
                    yield bytes(buf)
        except OSError as exc:
            raise CorpusIOError(path, exc) from exc

    @property
    def total_bytes(self) -> int:
        if self.spec.in_memory is not None:
            return sum(len(s) for s in self.spec.in_memory)
        return sum(p.stat().st_size for p in self.paths)


def _list_files(root: Path, recurse: bool) -> list[Path]:
    if root.is_file():
        return [root]
    if recurse:
        found = []
        for dirpath, _dirs, files in os.walk(root):
            found.extend(Path(dirpath) / f for f in files)
        return found
    return [p for p in root.iterdir() if p.is_file()]


def open_corpus(spec: CorpusSpec) -> SequenceStream:
    if spec.in_memory is not None:
        return SequenceStream(spec, [])
    paths: list[Path] = []
    for root in spec.roots:
        root = Path(root)
        if not root.exists():
            raise ConfigError(f"input path does not exist: {root}")
        if not os.access(root, os.R_OK):
            raise ConfigError(f"input path is not readable: {root}")
        paths.extend(_list_files(root, spec.recurse))
    paths.sort(key=lambda p: str(p))
    return SequenceStream(spec, paths)


def to_bytes(s) -> bytes:
    return s.encode("utf-8") if isinstance(s, str) else bytes(s)


def as_stream(corpus) -> SequenceStream:
    """Accept a stream, a CorpusSpec or a list of byte strings.

    One-shot iterators are rejected: every algorithm here reads the corpus
    more than once.
    """
    if isinstance(corpus, SequenceStream):
        return corpus
    if isinstance(corpus, CorpusSpec):
        return open_corpus(corpus)
    if isinstance(corpus, (list, tuple)):
        return open_corpus(CorpusSpec(in_memory=[to_bytes(s) for s in corpus]))
    if iter(corpus) is corpus:
        raise ConfigError("corpus must be re-iterable; got a one-shot iterator")
    return corpus


def corpus_stats(stream: Iterable[Sequence], n: int) -> tuple[int, int, int]:
    """Return ``(m, N, bytes_total)`` where N counts n-gram windows."""
    if n < 1:
        raise ConfigError("n must be >= 1")
    m = total = nbytes = 0
    for seq in stream:
        m += 1
        nbytes += len(seq.data)
        total += max(0, len(seq.data) - n + 1)
    return m, total, nbytes


@dataclass
class PipelineStats:
    sequences: int = 0
    bytes: int = 0
    errors: list = field(default_factory=list)


def run_pipeline(
    stream: Iterable[Sequence],
    handlers: list[Callable[[Sequence], None]],
    queue_size: int | None = None,
) -> PipelineStats:
    """Feed ``stream`` through one reader thread into ``len(handlers)`` workers.

    Each handler is owned by exactly one worker thread. The reader blocks when
    the queue is full. The first exception raised anywhere stops the pipeline
    and is re-raised in the caller.
    """
    stats = PipelineStats()
    if len(handlers) <= 1:
        handle = handlers[0]
        for seq in stream:
            stats.sequences += 1
            stats.bytes += len(seq.data)
            handle(seq)
        return stats

    q: queue.Queue = queue.Queue(maxsize=queue_size or 2 * len(handlers))
    stop = threading.Event()
    done = object()
    lock = threading.Lock()

    def fail(exc):
        with lock:
            stats.errors.append(exc)
        stop.set()

    def put(item):
        while not stop.is_set():
            try:
                q.put(item, timeout=0.1)
                return True
            except queue.Full:
                continue
        return False

    def reader():
        try:
            for seq in stream:
                stats.sequences += 1
                stats.bytes += len(seq.data)
                if not put(seq):
                    return
        except BaseException as exc:  # noqa: BLE001 - re-raised by caller
            fail(exc)
        finally:
            for _ in handlers:
                put(done)

    def worker(handle):
        try:
            while True:
                try:
                    item = q.get(timeout=0.1)
                except queue.Empty:
                    if stop.is_set():
                        return
                    continue
                if item is done:
                    return
                handle(item)
        except BaseException as exc:  # noqa: BLE001
            fail(exc)

    threads = [threading.Thread(target=reader, name="corpus-reader", daemon=True)]
    threads += [
        threading.Thread(target=worker, args=(h,), name=f"count-worker-{i}", daemon=True)
        for i, h in enumerate(handlers)
    ]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    if stats.errors:
        raise stats.errors[0]
    return stats
