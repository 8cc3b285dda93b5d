"""Benchmark the compiled kernels against the pure-Python fallback.

Micro section times the three kernels directly; the end-to-end section
times classical and parity training plus corpus encoding with each backend
selected via parity_bpe._kernels.set_backend.

Usage: python benchmarks/bench_kernels.py [--merges 500] [--repeat 3]
"""

import argparse
import random
import sys
import tempfile
import time
from pathlib import Path

from parity_bpe import (
    ParityConfig,
    SyntheticSpec,
    _kernels,
    generate_synthetic,
    load_labeled_corpus,
    load_parallel_dev,
    train_classical,
    train_parity,
)


def timeit(fn, repeat: int) -> float:
    samples = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - start)
    return min(samples)


def bench_micro(repeat: int) -> list[tuple[str, dict[str, float]]]:
    rng = random.Random(0)
    words = [
        tuple(rng.randrange(300) for _ in range(rng.randint(2, 24))) for _ in range(4000)
    ]
    table = {}
    next_id = 256
    for rank in range(200):
        pair = (rng.randrange(next_id), rng.randrange(next_id))
        if pair not in table:
            table[pair] = (rank, next_id)
            next_id += 1

    def count_all(impl):
        for word in words:
            impl.count_pairs(word)

    def merge_all(impl):
        for word in words:
            impl.merge_and_deltas(word, 3, 7, 999)

    def encode_all(impl):
        for word in words:
            impl.encode_ids(list(word), table)

    rows = []
    for name, fn in (("count_pairs", count_all), ("merge_and_deltas", merge_all), ("encode_ids", encode_all)):
        timings = {}
        for backend, impl in sorted(_kernels.BACKENDS.items()):
            timings[backend] = timeit(lambda impl=impl: fn(impl), repeat)
        rows.append((name, timings))
    return rows


def bench_end_to_end(merges: int, repeat: int) -> list[tuple[str, dict[str, float]]]:
    with tempfile.TemporaryDirectory() as tmp:
        spec = SyntheticSpec.default(["aa", "bb", "cc"], [0.8, 0.15, 0.05], dev_lines=100)
        generate_synthetic(spec, seed=1, out_dir=tmp)
        corpus = load_labeled_corpus(Path(tmp) / "manifest.json")
        dev = load_parallel_dev(Path(tmp) / "dev", list(corpus.languages))
        lines = [line for lang in dev.languages for line in dev.lines[lang]]

        def run_classical():
            train_classical(corpus, merges)

        def run_parity():
            train_parity(corpus, dev, ParityConfig(total_merges=merges, window_size=0))

        model, _ = train_classical(corpus, merges)

        def run_encode():
            fresh = type(model)(list(model.merges))  # cold per-word cache
            for line in lines * 20:
                fresh.encode_ids(line)

        rows = []
        for name, fn in (
            (f"train_classical({merges})", run_classical),
            (f"train_parity({merges})", run_parity),
            ("encode dev x20", run_encode),
        ):
            timings = {}
            original = _kernels.BACKEND
            try:
                for backend in sorted(_kernels.BACKENDS):
                    _kernels.set_backend(backend)
                    timings[backend] = timeit(fn, repeat)
            finally:
                _kernels.set_backend(original)
            rows.append((name, timings))
        return rows


def print_rows(title: str, rows) -> None:
    print(f"\n{title}")
    backends = sorted(_kernels.BACKENDS)
    header = f"{'benchmark':<28}" + "".join(f"{b:>12}" for b in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for name, timings in rows:
        line = f"{name:<28}" + "".join(f"{timings[b] * 1e3:>10.1f}ms" for b in backends)
        if len(backends) == 2:
            py, c = timings["python"], timings["c"]
            line += f"{py / c:>9.2f}x"
        print(line)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--merges", type=int, default=500)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    print(f"available backends: {sorted(_kernels.BACKENDS)} (active: {_kernels.BACKEND})")
    if "c" not in _kernels.BACKENDS:
        print("compiled kernels not built; benchmarking pure Python only")
    print_rows("kernel microbenchmarks", bench_micro(args.repeat))
    print_rows("end to end", bench_end_to_end(args.merges, args.repeat))
    return 0


if __name__ == "__main__":
    sys.exit(main())
