import random

import pytest

from parity_bpe import (
    ParityConfig,
    SyntheticSpec,
    generate_synthetic,
    load_labeled_corpus,
    load_parallel_dev,
    train_classical,
    train_parity,
)

SEED = 20250809
MERGE_BUDGET = 500


@pytest.fixture(scope="session")
def synth_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("synth")
    spec = SyntheticSpec.default(["aa", "bb", "cc"], [0.80, 0.15, 0.05], dev_lines=100)
    generate_synthetic(spec, seed=SEED, out_dir=out)
    return out


@pytest.fixture(scope="session")
def corpus(synth_dir):
    return load_labeled_corpus(synth_dir / "manifest.json")


@pytest.fixture(scope="session")
def dev(synth_dir, corpus):
    return load_parallel_dev(synth_dir / "dev", list(corpus.languages))


@pytest.fixture(scope="session")
def classical_run(corpus):
    return train_classical(corpus, MERGE_BUDGET)


@pytest.fixture(scope="session")
def parity_run(corpus, dev):
    config = ParityConfig(total_merges=MERGE_BUDGET, window_size=0)
    return train_parity(corpus, dev, config)


@pytest.fixture(scope="session")
def hybrid_run(corpus, dev):
    config = ParityConfig.with_split(MERGE_BUDGET, 0.5, window_size=0)
    return train_parity(corpus, dev, config)


@pytest.fixture(scope="session")
def window_run(corpus, dev):
    config = ParityConfig(total_merges=MERGE_BUDGET, window_size=6, alpha=2)
    return train_parity(corpus, dev, config)


@pytest.fixture(scope="session")
def fuzz_strings():
    rng = random.Random(SEED)
    return [rng.randbytes(rng.randint(0, 512)) for _ in range(10_000)]
