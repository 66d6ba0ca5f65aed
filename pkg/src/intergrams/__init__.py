"""Top-k frequent byte n-grams via multi-pass prefix filtering."""

from .corpus import CorpusSpec, Sequence, SequenceStream, corpus_stats, open_corpus
from .counting import CountMode, CountTable, SeenBitset, TopKList, flush_batch, increment_all, mark, top_k
from .errors import ConfigError, CorpusIOError, UnsupportedParameter
from .hashgram import HashgramConfig, hash_ngram, run_hashgram
from .metrics import RunReport, featurize, jaccard, prefix_recall
from .multipass import IntergramConfig, PassResult, candidate_id, extend_pass, run_intergrams
from .oracle import naive_count, naive_topk
from .synth import SynthSpec, generate_corpus
from .trie import PrefixTrie, build_trie, lookup
from .trigram import count_trigrams, topk_trigrams

__all__ = [
    "ConfigError", "CorpusIOError", "CorpusSpec", "CountMode", "CountTable", "HashgramConfig",
    "IntergramConfig", "PassResult", "PrefixTrie", "RunReport", "SeenBitset", "Sequence",
    "SequenceStream", "SynthSpec", "TopKList", "UnsupportedParameter", "build_trie",
    "candidate_id", "corpus_stats", "count_trigrams", "extend_pass", "featurize", "flush_batch",
    "generate_corpus", "hash_ngram", "increment_all", "jaccard", "lookup", "mark", "naive_count",
    "naive_topk", "open_corpus", "prefix_recall", "run_hashgram", "run_intergrams", "top_k",
    "topk_trigrams",
]
