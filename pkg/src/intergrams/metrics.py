"""Accuracy and throughput reporting, plus Boolean feature extraction."""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import sparse

from . import _kernels as K
from .corpus import Sequence, as_stream, run_pipeline
from .counting import CountMode, TopKList
from .oracle import DEFAULT_MAX_BYTES, naive_count, naive_topk
from .trie import build_trie

REPORT_SCHEMA_VERSION = 1


def jaccard(a: TopKList, b: TopKList) -> float:
    sa, sb = set(a.grams), set(b.grams)
    union = sa | sb
    if not union:
        return 1.0
    return len(sa & sb) / len(union)


def prefix_recall_curve(corpus, k: int, zs, n_small: int, mode=CountMode.ONCE,
                        max_bytes: int | None = DEFAULT_MAX_BYTES) -> dict[float, float]:
    """Fraction of the true top-k (n_small+1)-grams whose prefix is a true
    top-ceil(z*k) n_small-gram, for each z in ``zs``."""
    stream = as_stream(corpus)
    big = naive_topk(naive_count(stream, n_small + 1, mode, max_bytes), k)
    small_counts = naive_count(stream, n_small, mode, max_bytes)
    ranked = naive_topk(small_counts, max(len(small_counts), 1)).grams
    out = {}
    for z in zs:
        kept = set(ranked[:math.ceil(round(z * k, 9))])
        if len(big) == 0:
            out[z] = 1.0
        else:
            out[z] = sum(g[:n_small] in kept for g in big.grams) / len(big)
    return out


def prefix_recall(corpus, k: int, z: float, n_small: int, mode=CountMode.ONCE,
                  max_bytes: int | None = DEFAULT_MAX_BYTES) -> float:
    return prefix_recall_curve(corpus, k, [z], n_small, mode, max_bytes)[z]


def featurize(corpus, vocab: TopKList | list[bytes], workers: int = 1) -> sparse.csr_matrix:
    """``m x len(vocab)`` Boolean matrix; entry (i, j) is set iff gram j occurs in sequence i."""
    grams = vocab.grams if isinstance(vocab, TopKList) else [bytes(g) for g in vocab]
    if len({len(g) for g in grams}) > 1:
        raise ValueError("vocabulary grams must all have the same length")
    stream = as_stream(corpus)
    width = len(grams)
    rows: dict[int, np.ndarray] = {}
    if width == 0:
        m = sum(1 for _ in stream)
        return sparse.csr_matrix((m, 0), dtype=bool)
    trie = build_trie(grams, frequency_layout=False)
    args = trie.kernel_args()
    lock = threading.Lock()
    nwords = (width + 63) // 64

    def handle(seq: Sequence) -> None:
        words = np.zeros(nwords, dtype=np.uint64)
        K.mark_full(np.frombuffer(seq.data, dtype=np.uint8), trie.depth, *args, words)
        bits = np.unpackbits(words.view(np.uint8), bitorder="little")[:width]
        cols = np.flatnonzero(bits)
        with lock:
            rows[seq.id] = cols

    run_pipeline(stream, [handle] * max(1, workers))
    m = len(rows)
    indptr = np.zeros(m + 1, dtype=np.int64)
    for i in range(m):
        indptr[i + 1] = indptr[i] + rows[i].size
    indices = np.concatenate([rows[i] for i in range(m)]) if m else np.zeros(0, dtype=np.int64)
    data = np.ones(indices.size, dtype=bool)
    return sparse.csr_matrix((data, indices, indptr), shape=(m, width))


def write_features(matrix: sparse.spmatrix, vocab: TopKList, path: str | Path) -> tuple[Path, Path]:
    """Write ``row<TAB>col`` lines (row-major) and a ``<path>.vocab.tsv`` sidecar."""
    path = Path(path)
    coo = sparse.csr_matrix(matrix).tocoo()
    order = np.lexsort((coo.col, coo.row))
    with open(path, "w") as fh:
        fh.write(f"# {matrix.shape[0]} {matrix.shape[1]}\n")
        for r, c in zip(coo.row[order].tolist(), coo.col[order].tolist()):
            fh.write(f"{r}\t{c}\n")
    side = path.with_name(path.name + ".vocab.tsv")
    side.write_text(vocab.to_tsv())
    return path, side


@dataclass
class RunReport:
    algorithm: str
    config: dict
    passes: list = field(default_factory=list)
    total_runtime: float = 0.0
    jaccard: float | None = None

    def rows(self) -> list[tuple[str, float, float | None]]:
        """``(step, runtime, throughput)`` rows: one per pass, then its selection step."""
        out = []
        for p in self.passes:
            out.append((p.label, p.elapsed, p.throughput))
            if p.select_elapsed:
                out.append((f"top-k selection after {p.label}", p.select_elapsed, None))
        return out

    def to_dict(self) -> dict:
        return {
            "schema_version": REPORT_SCHEMA_VERSION,
            "algorithm": self.algorithm,
            "config": self.config,
            "total_runtime_s": self.total_runtime,
            "jaccard": self.jaccard,
            "steps": [{"step": s, "runtime_s": t, "throughput_Bps": bw}
                      for s, t, bw in self.rows()],
        }

    def to_tsv(self) -> str:
        lines = ["step\truntime_s\tthroughput_MBps"]
        for s, t, bw in self.rows():
            lines.append(f"{s}\t{t:.4f}\t{'-' if bw is None else f'{bw / 1e6:.2f}'}")
        lines.append(f"total\t{self.total_runtime:.4f}\t-")
        if self.jaccard is not None:
            lines.append(f"jaccard\t{self.jaccard:.6f}\t-")
        return "\n".join(lines) + "\n"
