"""Intrinsic tokenizer evaluation: compression, diversity, fairness, morphology.

Compression rate is reported under two estimators that differ on skewed
data: the per-document mean of ratios and the ratio of sums. Reports label
each explicitly so they are never silently conflated.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Sequence

from .corpus import NormUnit, ParallelDevCorpus, char_count, unit_length
from .errors import DataError
from .tokenizer import TokenizerModel

RENYI_ALPHA_DEFAULT = 2.5


@dataclass
class UnigramDistribution:
    """Empirical token frequency distribution over an evaluation corpus."""

    freq: dict[bytes, int]
    total: int

    @classmethod
    def from_token_lists(cls, token_lists) -> "UnigramDistribution":
        freq = Counter()
        for tokens in token_lists:
            freq.update(tokens)
        total = sum(freq.values())
        if total <= 0:
            raise DataError("empty token stream: cannot build a unigram distribution")
        return cls(dict(freq), total)

    @classmethod
    def from_texts(cls, model: TokenizerModel, docs: Sequence[bytes]) -> "UnigramDistribution":
        return cls.from_token_lists(model.encode(doc) for doc in docs)

    def probabilities(self) -> list[float]:
        return [count / self.total for count in self.freq.values()]


class CompressionRates(NamedTuple):
    mean_of_ratios: float
    ratio_of_sums: float


class MorphScores(NamedTuple):
    precision: float
    recall: float
    f1: float


@dataclass
class GoldSegmentation:
    """A word with its gold interior morpheme-boundary byte offsets."""

    word: bytes
    boundaries: frozenset[int]

    def __post_init__(self):
        if not self.word:
            raise DataError("empty word in gold segmentation")
        bad = [b for b in self.boundaries if not 0 < b < len(self.word)]
        if bad:
            raise DataError(f"gold boundary outside word {self.word!r}: {sorted(bad)}")


def compression_rate(
    model: TokenizerModel, docs: Sequence[bytes], unit: NormUnit
) -> CompressionRates:
    """Both compression-rate estimators of ``model`` over ``docs``."""
    unit = NormUnit(unit)
    if not docs:
        raise DataError("empty corpus: no documents")
    unit_sum = 0
    token_sum = 0
    ratio_sum = 0.0
    for doc in docs:
        tokens = model.token_count(doc)
        if tokens == 0:
            raise DataError("zero-token document in corpus")
        units = unit_length(doc, unit)
        unit_sum += units
        token_sum += tokens
        ratio_sum += units / tokens
    return CompressionRates(ratio_sum / len(docs), unit_sum / token_sum)


def fertility(model: TokenizerModel, docs: Sequence[bytes]) -> float:
    """Average tokens per whitespace word, as a ratio of sums."""
    token_sum = sum(model.token_count(doc) for doc in docs)
    word_sum = sum(unit_length(doc, NormUnit.WORDS) for doc in docs)
    if word_sum == 0:
        raise DataError("empty corpus: no words")
    return token_sum / word_sum


def vocab_utilization(model: TokenizerModel, docs: Sequence[bytes]) -> float:
    """Fraction of the vocabulary observed when tokenizing ``docs``."""
    observed = set()
    for doc in docs:
        observed.update(model.encode(doc))
    return len(observed) / model.vocab_size


def type_token_ratio(model: TokenizerModel, docs: Sequence[bytes]) -> float:
    """Distinct token types over total tokens produced for ``docs``."""
    dist = UnigramDistribution.from_texts(model, docs)
    return len(dist.freq) / dist.total


def avg_token_rank(
    model: TokenizerModel,
    docs: Sequence[bytes],
    dist: UnigramDistribution | None = None,
) -> float:
    """Frequency-weighted mean rank in the frequency-ordered vocabulary.

    Rank 1 is the most frequent token; ties order by (count desc, bytes).
    """
    if dist is None:
        dist = UnigramDistribution.from_texts(model, docs)
    ordered = sorted(dist.freq.items(), key=lambda item: (-item[1], item[0]))
    weighted = sum(rank * count for rank, (_, count) in enumerate(ordered, start=1))
    return weighted / dist.total


def renyi_entropy(dist: UnigramDistribution | Sequence[float], alpha: float) -> float:
    """Order-``alpha`` Renyi entropy in bits (Shannon at alpha=1, min-entropy at inf)."""
    if alpha <= 0:
        raise DataError(f"Renyi order must be > 0, got {alpha}")
    probs = dist.probabilities() if isinstance(dist, UnigramDistribution) else list(dist)
    probs = [p for p in probs if p > 0]
    if not probs:
        raise DataError("empty distribution")
    if math.isinf(alpha):
        return -math.log2(max(probs))
    if alpha == 1:
        return -sum(p * math.log2(p) for p in probs)
    return math.log2(sum(p**alpha for p in probs)) / (1.0 - alpha)


def gini(costs: Sequence[float]) -> float:
    """Inequality of per-language costs; 0 means all costs are equal.

    With ascending costs c_1..c_n this is
    (1/n) * (n + 1 - 2 * sum((n + 1 - i) * c_i) / sum(c_i)).
    """
    n = len(costs)
    if n == 0:
        raise DataError("empty cost vector")
    if any(c <= 0 for c in costs):
        raise DataError("costs must be positive")
    ordered = sorted(costs)
    total = sum(ordered)
    weighted = sum((n + 1 - i) * c for i, c in enumerate(ordered, start=1))
    # mathematically >= 0; clamp float rounding on near-equal costs
    return max(0.0, (n + 1 - 2.0 * weighted / total) / n)


def morph_boundary_scores(
    model: TokenizerModel, gold: Sequence[GoldSegmentation]
) -> MorphScores:
    """Boundary-set precision/recall of token splits against gold morphemes.

    Each word is tokenized in isolation; predicted boundaries are the
    cumulative byte offsets between consecutive tokens. An empty prediction
    has precision 1 by convention; scores are macro-averaged over words.
    """
    if not gold:
        raise DataError("empty gold segmentation list")
    p_sum = r_sum = f_sum = 0.0
    for entry in gold:
        tokens = model.encode(entry.word)
        predicted = set()
        offset = 0
        for token in tokens[:-1]:
            offset += len(token)
            predicted.add(offset)
        hits = len(predicted & entry.boundaries)
        precision = hits / len(predicted) if predicted else 1.0
        recall = hits / len(entry.boundaries) if entry.boundaries else 1.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        p_sum += precision
        r_sum += recall
        f_sum += f1
    n = len(gold)
    return MorphScores(p_sum / n, r_sum / n, f_sum / n)


def load_gold_tsv(path: str | Path) -> list[GoldSegmentation]:
    """Parse ``word<TAB>seg|ment|ed`` lines into gold segmentations."""
    path = Path(path)
    entries = []
    with open(path, "rb") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.rstrip(b"\r\n")
            if not line:
                continue
            parts = line.split(b"\t")
            if len(parts) != 2:
                raise DataError(f"{path}:{lineno}: expected word<TAB>segmentation")
            word, segmented = parts
            pieces = segmented.split(b"|")
            if b"".join(pieces) != word:
                raise DataError(
                    f"{path}:{lineno}: segmentation does not concatenate to the word"
                )
            boundaries = set()
            offset = 0
            for piece in pieces[:-1]:
                offset += len(piece)
                boundaries.add(offset)
            entries.append(GoldSegmentation(word, frozenset(boundaries)))
    if not entries:
        raise DataError(f"{path}: no gold entries")
    return entries


@dataclass
class MetricReport:
    """Per-language and global metric values plus provenance."""

    global_metrics: dict
    per_language: dict[str, dict]
    provenance: dict

    def to_dict(self) -> dict:
        return {
            "global": self.global_metrics,
            "per_language": self.per_language,
            "provenance": self.provenance,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "MetricReport":
        return cls(data["global"], data["per_language"], data["provenance"])

    @classmethod
    def from_json(cls, text: str) -> "MetricReport":
        return cls.from_dict(json.loads(text))


def _doc_metrics(model: TokenizerModel, docs: Sequence[bytes], renyi_alpha: float) -> dict:
    dist = UnigramDistribution.from_texts(model, docs)
    cr_bytes = compression_rate(model, docs, NormUnit.BYTES)
    cr_chars = compression_rate(model, docs, NormUnit.CHARS)
    cr_lines = compression_rate(model, docs, NormUnit.LINES)
    return {
        "cr_bytes_mean_of_ratios": cr_bytes.mean_of_ratios,
        "cr_bytes_ratio_of_sums": cr_bytes.ratio_of_sums,
        "cr_chars_mean_of_ratios": cr_chars.mean_of_ratios,
        "cr_chars_ratio_of_sums": cr_chars.ratio_of_sums,
        "cr_lines_mean_of_ratios": cr_lines.mean_of_ratios,
        "cr_lines_ratio_of_sums": cr_lines.ratio_of_sums,
        "fertility": fertility(model, docs),
        "type_token_ratio": len(dist.freq) / dist.total,
        "vocab_utilization": len(dist.freq) / model.vocab_size,
        "avg_token_rank": avg_token_rank(model, docs, dist=dist),
        "renyi_entropy": renyi_entropy(dist, renyi_alpha),
        "tokens_per_line": dist.total / len(docs),
    }


def full_report(
    model: TokenizerModel,
    dev: ParallelDevCorpus,
    renyi_alpha: float = RENYI_ALPHA_DEFAULT,
    gold: Sequence[GoldSegmentation] | None = None,
    provenance: dict | None = None,
) -> MetricReport:
    """All intrinsic metrics per language and pooled over the parallel corpus.

    The fairness Gini uses tokens per aligned line as the per-language cost,
    which normalizes by content rather than script.
    """
    if dev.n_lines == 0:
        raise DataError("empty dev corpus")
    per_language = {}
    costs = {}
    for lang in dev.languages:
        docs = dev.lines[lang]
        stats = _doc_metrics(model, docs, renyi_alpha)
        per_language[lang] = stats
        costs[lang] = stats["tokens_per_line"]

    pooled: list[bytes] = []
    for lang in dev.languages:
        pooled.extend(dev.lines[lang])
    global_metrics = _doc_metrics(model, pooled, renyi_alpha)
    global_metrics["gini_tokens_per_line"] = gini([costs[lang] for lang in dev.languages])
    if gold is not None:
        scores = morph_boundary_scores(model, gold)
        global_metrics["morph_boundary_precision"] = scores.precision
        global_metrics["morph_boundary_recall"] = scores.recall
        global_metrics["morph_boundary_f1"] = scores.f1

    meta = {
        "languages": list(dev.languages),
        "n_lines": dev.n_lines,
        "renyi_alpha": renyi_alpha,
        "gini_cost": "tokens_per_line",
        "vocab_size": model.vocab_size,
        "n_merges": len(model.merges),
        "char_fallback_languages": [
            lang
            for lang in dev.languages
            if any(char_count(line)[1] for line in dev.lines[lang])
        ],
    }
    if provenance:
        meta.update(provenance)
    return MetricReport(global_metrics, per_language, meta)
