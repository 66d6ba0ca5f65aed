"""Command-line front end: count, bench, theory, synth, compare, featurize."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from pathlib import Path

from .corpus import CorpusSpec, open_corpus
from .counting import CountMode, TopKList
from .errors import ConfigError
from .hashgram import HashgramConfig, run_hashgram
from .metrics import RunReport, featurize, jaccard, write_features
from .multipass import IntergramConfig, run_intergrams
from .oracle import naive_count, naive_topk
from .synth import SynthSpec, generate_corpus
from . import theory

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_INTERNAL = 0, 2, 3, 4
ALGORITHMS = ("intergrams", "hashgram", "naive")


def default_workers() -> int:
    env = os.environ.get("INTERGRAMS_WORKERS")
    if env:
        try:
            return int(env)
        except ValueError:
            raise ConfigError(f"INTERGRAMS_WORKERS must be an integer, got {env!r}")
    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:
        return os.cpu_count() or 1


def _corpus_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("inputs", nargs="+", help="files or directories")
    p.add_argument("--no-recurse", action="store_true", help="do not descend into subdirectories")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--lines", action="store_true", help="each input line is one sequence")
    g.add_argument("--chunk-size", type=int, help="split files into records of this many bytes")


def _count_args(p: argparse.ArgumentParser) -> None:
    _corpus_args(p)
    p.add_argument("--algorithm", choices=ALGORITHMS, default="intergrams")
    p.add_argument("--n", type=int, default=6)
    p.add_argument("--k", type=int, default=10_000)
    p.add_argument("--z", type=float, default=1.5)
    p.add_argument("--mode", choices=[m.value for m in CountMode], default="once")
    p.add_argument("--buckets", "--B", dest="buckets", type=int, default=1 << 31,
                   help="hashgram bucket count")
    p.add_argument("--seed", type=int, default=0, help="hashgram hash seed")
    p.add_argument("--second-pass", choices=("map", "trie"), default="map")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--batch-size", type=int, default=8, help="bitsets per flush")
    p.add_argument("--output", "-o", help="write results here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="intergrams", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    _count_args(sub.add_parser("count", help="top-k n-grams as hex<TAB>count lines"))

    bench = sub.add_parser("bench", help="run an algorithm and report per-pass timings")
    _count_args(bench)
    bench.add_argument("--report-format", choices=("tsv", "json"), default="tsv")
    bench.add_argument("--reference", choices=ALGORITHMS,
                       help="also run this algorithm and report Jaccard similarity")
    bench.add_argument("--results", help="also write the top-k TSV here")

    th = sub.add_parser("theory", help="evaluate the Zipf recall bounds")
    th.add_argument("--a", type=float, required=True)
    th.add_argument("--dnext", type=int, required=True)
    th.add_argument("--beta-eff", type=float, help="mass fraction to evaluate the bounds at")
    th.add_argument("--k", type=int, default=100)
    th.add_argument("--beta", type=float, help="measured mass fraction (enables noisy bounds)")
    th.add_argument("--m", type=int)
    th.add_argument("--N", type=int)
    th.add_argument("--delta", type=float, default=0.05)
    th.add_argument("--D", type=int, help="support size of the retained n-grams")
    th.add_argument("--k-prime", type=int)

    sy = sub.add_parser("synth", help="write a Zipf corpus and its manifest")
    sy.add_argument("--out", required=True)
    sy.add_argument("--a", type=float, default=1.2)
    sy.add_argument("--D", type=int, default=10_000)
    sy.add_argument("--n", type=int, default=6)
    sy.add_argument("--m", type=int, default=100)
    sy.add_argument("--length", type=int, default=10_000)
    sy.add_argument("--seed", type=int, default=0)
    sy.add_argument("--alphabet", type=int, default=256)

    cmp_ = sub.add_parser("compare", help="Jaccard similarity of two result TSV files")
    cmp_.add_argument("first")
    cmp_.add_argument("second")

    fe = sub.add_parser("featurize", help="Boolean sequence x gram matrix as row<TAB>col lines")
    _corpus_args(fe)
    fe.add_argument("--vocab", required=True, help="result TSV whose grams become columns")
    fe.add_argument("--output", "-o", required=True)
    fe.add_argument("--workers", type=int, default=None)
    return parser


def _corpus(args):
    spec = CorpusSpec(roots=tuple(args.inputs), recurse=not args.no_recurse,
                      chunk_size=args.chunk_size, lines=args.lines)
    return open_corpus(spec)


def _validate(args) -> None:
    if args.n < 1:
        raise ConfigError("--n must be >= 1")
    if args.k < 1:
        raise ConfigError("--k must be >= 1")
    if args.z < 1:
        raise ConfigError("--z must be >= 1")
    if args.batch_size < 1:
        raise ConfigError("--batch-size must be >= 1")
    if args.workers is not None and args.workers < 1:
        raise ConfigError("--workers must be >= 1")
    if args.buckets < 1:
        raise ConfigError("--buckets must be >= 1")


def _run(algorithm: str, stream, args):
    """Return ``(TopKList, passes)``."""
    workers = args.workers or default_workers()
    if algorithm == "intergrams":
        cfg = IntergramConfig(n=args.n, k=args.k, z=args.z, mode=args.mode,
                              batch_size=args.batch_size, workers=workers)
        res = run_intergrams(stream, cfg)
        return res.top, res.passes
    if algorithm == "hashgram":
        cfg = HashgramConfig(n=args.n, k=args.k, buckets=args.buckets, mode=args.mode,
                             seed=args.seed, second_pass=args.second_pass,
                             workers=workers, batch_size=args.batch_size)
        passes: list = []
        return run_hashgram(stream, cfg, passes), passes
    return naive_topk(naive_count(stream, args.n, args.mode), args.k), []


def _emit(text: str, path: str | None) -> None:
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_count(args) -> int:
    _validate(args)
    stream = _corpus(args)
    top, _ = _run(args.algorithm, stream, args)
    _emit(top.to_tsv(), args.output)
    return EXIT_OK


def cmd_bench(args) -> int:
    _validate(args)
    stream = _corpus(args)
    t0 = time.perf_counter()
    top, passes = _run(args.algorithm, stream, args)
    total = time.perf_counter() - t0
    config = {k: getattr(args, k) for k in ("n", "k", "z", "mode", "buckets", "seed",
                                             "batch_size", "second_pass")}
    config["workers"] = args.workers or default_workers()
    report = RunReport(args.algorithm, config, passes, total)
    if args.reference:
        ref, _ = _run(args.reference, stream, args)
        report.jaccard = jaccard(top, ref)
    if args.results:
        Path(args.results).write_text(top.to_tsv())
    if args.report_format == "json":
        _emit(json.dumps(report.to_dict(), indent=2) + "\n", args.output)
    else:
        _emit(report.to_tsv(), args.output)
    return EXIT_OK


def cmd_theory(args) -> int:
    rows = [("a", args.a), ("D_next", args.dnext), ("k", args.k)]
    if args.beta is not None:
        for name in ("m", "N", "D"):
            if getattr(args, name) is None:
                raise ConfigError(f"--beta requires --{name}")
        inputs = theory.BoundInputs(k=args.k, k_prime=args.k_prime or args.k, beta=args.beta,
                                    m=args.m, N=args.N, delta=args.delta, D=args.D,
                                    D_next=args.dnext)
        rows += [("beta_prime", theory.beta_prime(args.beta, args.m, args.N)),
                 ("delta_width", theory.concentration_delta(args.delta, inputs.k_prime,
                                                             args.D, args.N))]
        nb = theory.noisy_bounds(inputs, args.a)
        rows += [("beta_double_prime", nb.beta_eff), ("u_bound", nb.u),
                 ("recall_bound", nb.recall), ("vacuous", int(nb.vacuous))]
    elif args.beta_eff is not None:
        expr = theory.recall_expression(args.k, args.dnext, args.a, args.beta_eff)
        rows += [("beta_eff", args.beta_eff),
                 ("u_bound", theory.u_bound(args.dnext, args.a, args.beta_eff)),
                 ("recall_bound", theory.recall_bound(args.k, args.dnext, args.a, args.beta_eff)),
                 ("vacuous", int(expr < 0 or expr > 1))]
    else:
        raise ConfigError("give --beta-eff, or --beta with --m, --N and --D")
    sys.stdout.write("".join(f"{name}\t{value:.10g}\n" for name, value in rows))
    return EXIT_OK


def cmd_synth(args) -> int:
    spec = SynthSpec(a=args.a, D=args.D, n=args.n, m=args.m, length=args.length,
                     seed=args.seed, alphabet=args.alphabet)
    generate_corpus(spec, args.out)
    sys.stdout.write(f"{Path(args.out) / 'sequences'}\n")
    return EXIT_OK


def cmd_compare(args) -> int:
    a = TopKList.from_tsv(Path(args.first).read_text())
    b = TopKList.from_tsv(Path(args.second).read_text())
    sys.stdout.write(f"{jaccard(a, b):.6f}\n")
    return EXIT_OK


def cmd_featurize(args) -> int:
    vocab = TopKList.from_tsv(Path(args.vocab).read_text())
    matrix = featurize(_corpus(args), vocab, workers=args.workers or default_workers())
    write_features(matrix, vocab, args.output)
    return EXIT_OK


COMMANDS = {"count": cmd_count, "bench": cmd_bench, "theory": cmd_theory,
            "synth": cmd_synth, "compare": cmd_compare, "featurize": cmd_featurize}


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except Exception as exc:  # noqa: BLE001 - categorised exit code
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
