"""Deterministic Zipf corpora.

Generation model: a vocabulary of ``D`` distinct n-byte grams is drawn once;
every sequence is a concatenation of grams whose ranks are sampled i.i.d. with
probability proportional to ``rank ** -a``.

Randomness comes from SplitMix64 used as a counter-based generator: output
``i`` of stream ``s`` is ``mix(s + (i + 1) * 0x9E3779B97F4A7C15)`` (mod 2**64),
and a uniform double is ``(x >> 11) * 2**-53``. Stream seeds are
``mix(seed ^ 0x766F636162)`` for the vocabulary and ``mix(seed ^ 0x72616E6B73)``
for rank sampling. A rank is ``searchsorted(cdf, u, side="right")`` where
``cdf`` is the running float64 sum of the normalised probabilities in rank
order with its last entry forced to 1.0. Sequence ``j`` consumes sampling
outputs ``[j * g, (j + 1) * g)`` with ``g = ceil(length / n)``, then is cut
to ``length`` bytes.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .corpus import CorpusSpec
from .errors import ConfigError
from .theory import ZipfModel

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_VOCAB_TAG = 0x766F636162
_RANK_TAG = 0x72616E6B73
MEMORY_LIMIT = 512 * 1024 * 1024
MANIFEST = "manifest.json"
SEQUENCE_DIR = "sequences"
PRNG_NAME = "splitmix64-counter"


def _mix(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


class SplitMix64:
    """Counter-based SplitMix64; ``block(start, count)`` is random access."""

    def __init__(self, seed: int):
        self.seed = np.uint64(seed & ((1 << 64) - 1))
        self.position = 0

    def block(self, start: int, count: int) -> np.ndarray:
        idx = np.arange(start + 1, start + count + 1, dtype=np.uint64)
        with np.errstate(over="ignore"):
            return _mix(self.seed + idx * GOLDEN)

    def next_u64(self, count: int) -> np.ndarray:
        out = self.block(self.position, count)
        self.position += count
        return out

    def uniform(self, count: int) -> np.ndarray:
        return to_unit(self.next_u64(count))


def to_unit(x: np.ndarray) -> np.ndarray:
    return (x >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))


def _stream_seed(seed: int, tag: int) -> int:
    with np.errstate(over="ignore"):
        return int(_mix(np.array([(seed ^ tag) & ((1 << 64) - 1)], dtype=np.uint64))[0])


@dataclass(frozen=True)
class SynthSpec:
    a: float = 1.2
    D: int = 10_000
    n: int = 6
    m: int = 100
    length: int = 10_000
    seed: int = 0
    alphabet: int = 256

    def __post_init__(self):
        if not 1 <= self.alphabet <= 256:
            raise ConfigError("alphabet size must be in 1..256")
        if self.n < 1 or self.m < 0 or self.length < 0:
            raise ConfigError("n >= 1, m >= 0 and length >= 0 required")
        if self.alphabet ** self.n < self.D:
            raise ConfigError(
                f"alphabet {self.alphabet}^{self.n} cannot hold {self.D} distinct grams")
        ZipfModel(self.a, self.D)

    @property
    def model(self) -> ZipfModel:
        return ZipfModel(self.a, self.D)

    @property
    def grams_per_sequence(self) -> int:
        return math.ceil(self.length / self.n)


def vocabulary(spec: SynthSpec) -> np.ndarray:
    """``(D, n)`` uint8 array; row r is the gram with Zipf rank r + 1."""
    A, n, D = spec.alphabet, spec.n, spec.D
    rng = SplitMix64(_stream_seed(spec.seed, _VOCAB_TAG))
    space = A ** n
    if space <= 4 * D and space <= 1 << 24:
        codes = np.argsort(rng.next_u64(space), kind="stable")[:D].astype(np.uint64)
    else:
        picked: dict[int, None] = {}
        while len(picked) < D:
            draws = rng.next_u64(2 * (D - len(picked)) + 16)
            if space < 1 << 64:
                draws = draws % np.uint64(space)
            for c in draws.tolist():
                picked.setdefault(c, None)
                if len(picked) == D:
                    break
        codes = np.fromiter(picked, dtype=np.uint64, count=D)
    digits = np.empty((D, n), dtype=np.uint8)
    base = np.uint64(A)
    for col in range(n - 1, -1, -1):
        digits[:, col] = (codes % base).astype(np.uint8)
        codes = codes // base
    return digits


def rank_cdf(model: ZipfModel) -> np.ndarray:
    cdf = np.cumsum(model.probabilities())
    cdf[-1] = 1.0
    return cdf


def sample_ranks(spec: SynthSpec, start: int, count: int, cdf: np.ndarray | None = None) -> np.ndarray:
    """Zero-based ranks for sampling outputs ``[start, start + count)``."""
    cdf = rank_cdf(spec.model) if cdf is None else cdf
    u = to_unit(SplitMix64(_stream_seed(spec.seed, _RANK_TAG)).block(start, count))
    return np.searchsorted(cdf, u, side="right")


def iter_sequences(spec: SynthSpec):
    vocab = vocabulary(spec)
    cdf = rank_cdf(spec.model)
    g = spec.grams_per_sequence
    for j in range(spec.m):
        ranks = sample_ranks(spec, j * g, g, cdf)
        yield vocab[ranks].tobytes()[:spec.length]


def generate_corpus(spec: SynthSpec, out_dir: str | os.PathLike | None = None,
                    memory_limit: int = MEMORY_LIMIT) -> CorpusSpec:
    """Materialise the corpus in memory, or on disk as ``out_dir/sequences/*.bin``
    (one file per sequence) next to ``out_dir/manifest.json``.

    Corpora larger than ``memory_limit`` spill to a scratch directory when no
    ``out_dir`` is given.
    """
    total = spec.m * spec.length
    if out_dir is None and total <= memory_limit:
        return CorpusSpec(in_memory=tuple(iter_sequences(spec)))
    if out_dir is None:
        out_dir = tempfile.mkdtemp(prefix="synth-", dir=os.environ.get("INTERGRAMS_SCRATCH"))
    out = Path(out_dir)
    data_dir = out / SEQUENCE_DIR
    data_dir.mkdir(parents=True, exist_ok=True)
    width = max(6, len(str(max(spec.m - 1, 0))))
    for j, data in enumerate(iter_sequences(spec)):
        (data_dir / f"seq_{j:0{width}d}.bin").write_bytes(data)
    write_manifest(spec, out)
    return CorpusSpec(roots=(str(data_dir),), recurse=False)


def write_manifest(spec: SynthSpec, out: Path) -> Path:
    path = out / MANIFEST
    path.write_text(json.dumps({"schema_version": 1, "prng": PRNG_NAME,
                                "spec": asdict(spec)}, indent=2, sort_keys=True) + "\n")
    return path


def read_manifest(path: str | os.PathLike) -> SynthSpec:
    data = json.loads(Path(path).read_text())
    if data.get("prng") != PRNG_NAME:
        raise ConfigError(f"unknown generator {data.get('prng')!r}")
    return SynthSpec(**data["spec"])
